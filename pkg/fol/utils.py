import logging

from apriori.models import GroupType, SetOfSingletons, Singleton
from FactoidEntailment_project.exceptions import UnboundStructure
from kernel.models import Relationship, is_variable

from .models import Formula, FormulaKind, Proposition, Quantity, Term

logger = logging.getLogger(__name__)

UNIVERSAL_DETERMINERS = frozenset({"all", "every", "each"})
# Adjective and adverb properties render without the ◇ prefix.
MODIFIER_KEYS = frozenset({"JJ", "JJR", "JJS", "RB", "RBR", "RBS"})
# Adjectives on a proper name describe it without restricting it.
PROPER_TYPES = frozenset({"GPE", "LOC", "ORG"})
ADJECTIVE_KEYS = frozenset({"JJ", "JJR", "JJS"})
CONNECTIVES = {GroupType.AND: Formula.and_, GroupType.OR: Formula.or_}


def _term(entity: Singleton, binders: list) -> Term:
    if is_variable(entity) and entity.named_entity not in binders:
        binders.append(entity.named_entity)
    properties = {}
    for key, values in entity.properties.items():
        if key in ADJECTIVE_KEYS and entity.type in PROPER_TYPES:
            continue
        terms = [
            term
            for value in values
            if not isinstance(value, str)
            for term in _property_terms(value, binders)
        ]
        if terms:
            properties[key] = terms
    if is_variable(entity):
        return Term.var(entity.named_entity, properties)
    determiners = {str(value).lower() for value in entity.properties.get("det", [])}
    extra = [str(value) for value in entity.properties.get("extra", [])]
    return Term(
        name=entity.lemma,
        quantity=Quantity.ALL if determiners & UNIVERSAL_DETERMINERS else Quantity.SOME,
        specification=" ".join(extra) or None,
        properties=properties,
    )


def _property_terms(entity, binders: list) -> list[Term]:
    """Terms standing for a property value: a negated set becomes a negated term."""
    if isinstance(entity, Relationship):
        raise UnboundStructure("a kernel cannot be a term property", stage="fol")
    if isinstance(entity, Singleton):
        return [_term(entity, binders)]
    if entity.group_type == GroupType.NOT:
        return [term.negate() for term in _property_terms(entity.entities[0], binders)]
    if entity.group_type in (GroupType.AND, GroupType.MULTIINDIRECT):
        return [term for member in entity.entities for term in _property_terms(member, binders)]
    raise UnboundStructure(
        f"{entity.group_type.value} group {entity.id} has no term counterpart", stage="fol"
    )


def _connected(entity, build, binders: list) -> Formula:
    """Distributes ``build`` over the entities of a set, joined by the set's connective."""
    if isinstance(entity, Singleton):
        return build(_term(entity, binders))
    if not isinstance(entity, SetOfSingletons):
        raise UnboundStructure(f"cannot use {entity!r} as an argument", stage="fol")
    if entity.group_type == GroupType.NOT:
        return Formula.not_(_connected(entity.entities[0], build, binders))
    if entity.group_type == GroupType.NEITHER:
        return Formula.not_(Formula.or_(*(_connected(e, build, binders) for e in entity.entities)))
    if entity.group_type in CONNECTIVES:
        return CONNECTIVES[entity.group_type](
            *(_connected(e, build, binders) for e in entity.entities)
        )
    raise UnboundStructure(
        f"{entity.group_type.value} group {entity.id} has no logical connective", stage="fol"
    )


def _alternative(properties: dict) -> tuple[str, int, SetOfSingletons] | None:
    for key, values in properties.items():
        for index, value in enumerate(values):
            if isinstance(value, SetOfSingletons) and value.group_type in (GroupType.OR, GroupType.NEITHER):
                return key, index, value
    return None


def _atom(kernel: Relationship, properties: dict, binders: list) -> Formula:
    found = _alternative(properties)
    if found is not None:
        key, index, group = found
        branches = []
        for member in group.entities:
            values = list(properties[key])
            values[index] = member
            branches.append(_atom(kernel, {**properties, key: values}, binders))
        either = Formula.or_(*branches)
        return Formula.not_(either) if group.group_type == GroupType.NEITHER else either

    def with_source(source: Term) -> Formula:
        if kernel.target is None:
            return Formula.atom(Proposition(kernel.label, (source,), terms))
        return _connected(
            kernel.target,
            lambda target: Formula.atom(Proposition(kernel.label, (source, target), terms)),
            binders,
        )

    terms = {}
    for key, values in properties.items():
        terms[key] = [term for value in values for term in _property_terms(value, binders)]
    return _connected(kernel.source, with_source, binders)


def _kernel_formula(kernel: Relationship, binders: list) -> Formula:
    parts = [_kernel_formula(nested, binders) for nested in kernel.nested()]
    properties = {key: values for key, values in kernel.properties.items() if key != "SENTENCE"}
    atom = _atom(kernel, properties, binders)
    parts.append(Formula.not_(atom) if kernel.negated else atom)
    return Formula.and_(*parts)


def to_fol(kernel: Relationship) -> Formula:
    """
    Converts a rewritten kernel into a formula.

    Sets in the source or target distribute the proposition over their
    members (AND as ∧, OR as ∨, NEITHER as ¬∨, NOT as ¬). A NOT set among the
    properties is a negated term. Nested ``SENTENCE`` kernels are conjoined
    before the kernel's own proposition, and every variable is bound by an
    existential at the top, in the order it was met.

    Args:
        kernel (Relationship): The final kernel of a sentence.

    Returns:
        Formula: The formula.

    Raises:
        UnboundStructure: If a set has no logical counterpart where it occurs.
    """
    binders = []
    formula = _kernel_formula(kernel, binders)
    for name in reversed(binders):
        formula = Formula.exists(name, formula)
    logger.debug("%s", render(formula))
    return formula


def render_term(term: Term, bare: bool = False) -> str:
    prefix = "¬" if term.negated else ""
    quantity = "" if bare and term.quantity == Quantity.SOME else term.quantity.value
    if term.specification:
        text = f"{prefix}{quantity}[{term.name} [of] {term.specification}]"
    else:
        text = f"{prefix}{quantity}{term.name}"
    return text + _render_properties(term.properties)


def _render_properties(properties: tuple) -> str:
    if not properties:
        return ""
    shown = []
    for key, values in properties:
        bare = key in MODIFIER_KEYS
        if len(values) == 1:
            shown.append(f"{key}: {render_term(values[0], bare)}")
        else:
            shown.append(f"{key}: [{', '.join(render_term(v, bare) for v in values)}]")
    return f"[{', '.join(shown)}]"


def render_proposition(proposition: Proposition) -> str:
    args = ", ".join(render_term(arg) for arg in proposition.args)
    text = f"{proposition.name}({args}){_render_properties(proposition.properties)}"
    return f"¬{text}" if proposition.negated else text


def render(formula: Formula) -> str:
    """
    Renders a formula canonically.

    Terms read ``◇name`` (``□name`` when universal), ``◇[name [of] spec]``
    when specified and carry their properties as ``[KEY: term, ...]`` with
    sorted keys. Negated and quantified subformulae are always parenthesised.
    """
    if formula.kind == FormulaKind.ATOM:
        return render_proposition(formula.proposition)
    if formula.kind == FormulaKind.NOT:
        return f"¬({render(formula.children[0])})"
    if formula.kind == FormulaKind.EXISTS:
        return f"∃{formula.binder}.({render(formula.children[0])})"
    joiner = " ∧ " if formula.kind == FormulaKind.AND else " ∨ "
    return joiner.join(
        f"({render(child)})" if child.kind in (FormulaKind.AND, FormulaKind.OR) else render(child)
        for child in formula.children
    )
