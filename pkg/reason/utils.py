import itertools
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from django.conf import settings

from FactoidEntailment_project.exceptions import AtomBudgetExceeded
from fol.models import Formula, Proposition, Quantity, Term
from kb.models import ExpansionMode, KbVerdict, KnowledgeBase
from kb.utils import expand, kb_relation

from .models import (
    CmpOutcome,
    Comparison,
    Motivation,
    PairVerdict,
    WorldTable,
)

logger = logging.getLogger(__name__)

EQ, NEQ, OMEGA = CmpOutcome.EQ, CmpOutcome.NEQ, CmpOutcome.OMEGA
IMPL_NSPEC, IMPL_NONE = CmpOutcome.IMPL_NSPEC, CmpOutcome.IMPL_NONE
IMPL_DOWN, IMPL_GEN = CmpOutcome.IMPL_DOWN, CmpOutcome.IMPL_GEN

KB_OUTCOMES = {
    KbVerdict.EQUIV: EQ,
    KbVerdict.IMPLIES: IMPL_GEN,
    KbVerdict.INCONSISTENT: NEQ,
    KbVerdict.NONE: OMEGA,
}


def eta(value: CmpOutcome) -> CmpOutcome:
    """Outcome under negation of one side: Eq and NEq swap, everything else is ω."""
    if value == EQ:
        return NEQ
    if value == NEQ:
        return EQ
    return OMEGA


def sigma(outcomes: Iterable[CmpOutcome]) -> CmpOutcome:
    """
    Summarises a set of outcomes with the most specific one.

    NEq wins over Eq, Eq over implications; a single implication variant is
    kept as such, mixed variants collapse to the generic implication.
    """
    found = set(outcomes)
    if not found:
        return OMEGA
    if NEQ in found:
        return NEQ
    if EQ in found:
        return EQ
    variants = found & {IMPL_NSPEC, IMPL_NONE, IMPL_DOWN, IMPL_GEN}
    if variants == {IMPL_NSPEC}:
        return IMPL_NSPEC
    if variants == {IMPL_NONE}:
        return IMPL_NONE
    if variants == {IMPL_DOWN}:
        return IMPL_DOWN
    if variants:
        return IMPL_GEN
    return OMEGA


def sigma_prime(outcomes: Iterable[CmpOutcome]) -> CmpOutcome:
    """Summarises the per-key outcomes of two property maps; no keys at all is Eq."""
    found = set(outcomes)
    if not found:
        return EQ
    if OMEGA in found:
        return OMEGA
    if NEQ in found:
        return NEQ
    if EQ not in found and any(value.is_implication for value in found):
        return sigma(found)
    if EQ in found:
        return EQ
    return OMEGA


def compare_value(x: str | None, y: str | None, kb: KnowledgeBase) -> CmpOutcome:
    """Compares two names, specifications or copulae through the KB."""
    if x is None and y is None:
        return EQ
    if x is None:
        return IMPL_NONE
    if y is None:
        return OMEGA
    return KB_OUTCOMES[kb_relation(x, y, kb)]


def copula(term: Term) -> str | None:
    """The adjectives qualifying a term, as one comparable name."""
    names = sorted(
        ("¬" if value.negated else "") + value.name
        for value in term.property_map().get("JJ", [])
    )
    return ", ".join(names) or None


def _universal(term: Term) -> bool:
    return term.quantity == Quantity.ALL


def cmp_term(a: Term | None, b: Term | None, kb: KnowledgeBase) -> CmpOutcome:
    """
    Multi-valued equivalence between two terms.

    Cases are tried in order and the first matching one decides. Names,
    specifications and copulae are related through the KB: the first term
    implies the second when it is at least as specific.

    Args:
        a (Term | None): The first term; None for a missing argument.
        b (Term | None): The second term.
        kb (KnowledgeBase): The knowledge base.

    Returns:
        CmpOutcome: The comparison outcome.
    """
    if a == b:
        return EQ
    if a is None:
        return IMPL_NONE
    if b is None:
        return OMEGA
    if a.is_var or b.is_var:
        return OMEGA
    if a.positive() == b.positive():
        return NEQ
    if a.negated:
        return eta(cmp_term(a.positive(), b, kb))
    if b.negated:
        return eta(cmp_term(a, b.positive(), kb))

    n = compare_value(a.name, b.name, kb)
    n_flipped = compare_value(b.name, a.name, kb)
    s = compare_value(b.specification, a.specification, kb)
    c = compare_value(copula(b), copula(a), kb)
    n_spec = compare_value(b.name, a.specification, kb)
    a_all, b_all = _universal(a), _universal(b)

    if n == s == c == EQ:
        return EQ
    if n == OMEGA:
        # a universal second term covers a first term specifying it
        if b_all and n_spec == EQ and b.specification is not None:
            return IMPL_DOWN
        if b_all and not a_all and n_flipped.is_implication:
            return n_flipped
        if not b_all and not a_all and n_flipped == EQ:
            return IMPL_DOWN
        return OMEGA
    if n == EQ:
        if c == EQ:
            return s
        if s == c and (b_all == a_all or b_all):
            return s
        if s == EQ and c == IMPL_NONE:
            return IMPL_NSPEC
        return c
    if n.is_implication:
        if s == c == EQ and not b_all and a_all:
            return n
        if s == EQ and c == NEQ:
            return NEQ
        if n_spec == EQ and b.specification is None and b_all:
            return IMPL_DOWN
        return OMEGA
    if n == NEQ and s == c == EQ:
        return NEQ
    return OMEGA


def _same_name(a: Proposition, b: Proposition) -> bool:
    return a.name.lower() == b.name.lower()


def cmp_unary(a: Proposition, b: Proposition, kb: KnowledgeBase) -> CmpOutcome:
    if not _same_name(a, b):
        return OMEGA
    return cmp_term(a.args[0], b.args[0], kb)


def cmp_binary(a: Proposition, b: Proposition, kb: KnowledgeBase) -> CmpOutcome:
    """
    Compares two binary propositions by their source and target terms.

    An indifferent slot makes the propositions indifferent. An inconsistent
    slot carries through as long as the other slot is related; two
    inconsistent slots cancel out into indifference.
    """
    if not _same_name(a, b):
        return OMEGA
    source = cmp_term(a.args[0], b.args[0], kb)
    target = cmp_term(a.args[1], b.args[1], kb)
    if OMEGA in (source, target):
        return OMEGA
    if source == target == NEQ:
        return OMEGA
    if NEQ in (source, target):
        return NEQ
    if target == EQ:
        return source
    if source == EQ:
        return target
    return sigma({source, target})


def _kappa(p: dict, q: dict, kb: KnowledgeBase, only_p: CmpOutcome, only_q: CmpOutcome) -> dict:
    summary = {}
    for key in sorted(p.keys() | q.keys()):
        if key in p and key in q:
            summary[key] = sigma(cmp_term(x, y, kb) for x in p[key] for y in q[key])
        else:
            summary[key] = only_p if key in p else only_q
    return summary


def kappa_r(p: dict, q: dict, kb: KnowledgeBase) -> dict:
    """
    Per-key outcomes of two property maps, read from the first to the second.

    Shared keys summarise every cross comparison of their terms; a key only
    the first map has is indifferent, one only the second has is implied.
    """
    return _kappa(p, q, kb, OMEGA, IMPL_GEN)


def kappa_i(p: dict, q: dict, kb: KnowledgeBase) -> dict:
    """Per-key outcomes of two property maps, read from the second to the first."""
    return _kappa(p, q, kb, IMPL_GEN, OMEGA)


def _case_table(a: Proposition | None, b: Proposition | None, kb: KnowledgeBase) -> Motivation:
    if a == b:
        return Motivation(EQ, "equal")
    if a is None:
        return Motivation(OMEGA, "missing first")
    if b is None:
        return Motivation(IMPL_GEN, "missing second")
    if a.positive() == b.positive():
        return Motivation(NEQ, "negation")
    if a.negated:
        return Motivation(eta(_case_table(a.positive(), b, kb).outcome), "negated first")
    if b.negated:
        return Motivation(eta(_case_table(a, b.positive(), kb).outcome), "negated second")
    if a.arity != b.arity:
        return Motivation(OMEGA, "arity")
    gamma = cmp_binary(a, b, kb) if a.is_binary else cmp_unary(a, b, kb)
    if gamma == OMEGA:
        return Motivation(OMEGA, "predicate")

    first = cmp_term(a.args[0], b.args[0], kb)
    c = compare_value(copula(b.args[0]), copula(a.args[0]), kb)
    forward = kappa_r(a.property_map(), b.property_map(), kb)
    codomain = set(forward.values())
    kappa = sigma_prime(codomain)
    kappa_flipped = sigma_prime(kappa_r(b.property_map(), a.property_map(), kb).values())

    if gamma == EQ and first == EQ:
        if kappa.is_implication and c != EQ:
            return Motivation(kappa, "properties imply, copula differs")
        if kappa.is_implication and c == EQ and OMEGA in codomain:
            return Motivation(OMEGA, "properties indifferent")
        if kappa.is_implication and c == EQ and IMPL_NSPEC in codomain:
            return Motivation(OMEGA, "properties lose specification")
        if kappa == IMPL_DOWN or IMPL_DOWN in codomain:
            return Motivation(kappa, "properties specialise")
        if kappa.is_implication:
            return Motivation(OMEGA, "properties imply")
        if kappa_flipped == IMPL_NSPEC:
            return Motivation(IMPL_DOWN, "reverse properties lose specification")
        return Motivation(kappa, "properties")
    if gamma.is_implication and kappa != EQ:
        if OMEGA in codomain:
            return Motivation(OMEGA, "implied predicate, indifferent properties")
        if kappa_flipped == IMPL_NSPEC:
            return Motivation(IMPL_DOWN, "implied predicate, reverse properties lose specification")
        return Motivation(kappa, "implied predicate, properties")
    if gamma == NEQ and kappa in (OMEGA, NEQ):
        return Motivation(OMEGA, "inconsistent predicate, unrelated properties")
    return Motivation(gamma, "predicate")


def _equivalents(p: Proposition, kb: KnowledgeBase) -> frozenset:
    return frozenset({p}) | expand(p, ExpansionMode.EQUIVALENT, kb)


def _entailed(p: Proposition, kb: KnowledgeBase) -> frozenset:
    return expand(p, ExpansionMode.ENTAILING, kb)


@lru_cache(maxsize=8192)
def motivate(a: Proposition, b: Proposition, kb: KnowledgeBase) -> Motivation:
    """
    :func:`cmp_prop` together with the case that decided it.

    Equivalence is checked first, then inconsistency between any two
    expanded propositions, then implication of the second by an entailed
    proposition of the first. Otherwise every pair of equivalent expansions
    goes through the case table and the outcomes are summarised.

    Raises:
        ExpansionBudgetExceeded: If an expansion does not reach its fixpoint.
    """
    same_a, same_b = _equivalents(a, kb), _equivalents(b, kb)
    if a == b or b in same_a:
        return Motivation(EQ, "equivalent")
    entailed_a = _entailed(a, kb)
    reach_a = same_a | entailed_a
    reach_b = same_b | _entailed(b, kb)
    for q, r in itertools.product(reach_a, reach_b):
        if q.negated != r.negated:
            if _case_table(q.positive(), r.positive(), kb).outcome == EQ:
                return Motivation(NEQ, "expansion negates")
        elif not q.negated and _case_table(q, r, kb).outcome == NEQ:
            return Motivation(NEQ, "expansion inconsistent")
    if entailed_a & same_b:
        return Motivation(IMPL_GEN, "expansion entails")
    if len(same_a) == 1 and len(same_b) == 1:
        return _case_table(a, b, kb)
    outcome = sigma(_case_table(q, r, kb).outcome for q, r in itertools.product(same_a, same_b))
    return Motivation(outcome, "equivalent expansions")


def cmp_prop(a: Proposition, b: Proposition, kb: KnowledgeBase) -> CmpOutcome:
    """
    Multi-valued equivalence between two propositions, expansions included.

    Args:
        a (Proposition): The first proposition.
        b (Proposition): The second proposition.
        kb (KnowledgeBase): The knowledge base.

    Returns:
        CmpOutcome: Eq, NEq, an implication from ``a`` to ``b`` or ω.
    """
    return motivate(a, b, kb).outcome


# Possible worlds


def atom_labels(formula: Formula, sentence: str) -> dict:
    """Column label of every distinct atom, ``A0, A1, ...`` for sentence ``A``."""
    return {atom: f"{sentence}{index}" for index, atom in enumerate(formula.atoms())}


def tabular_semantics(formula: Formula, sentence: str = "A", cap: int | None = None) -> WorldTable:
    """
    Every assignment to the atoms of a formula, with the formula's value.

    Args:
        formula (Formula): The formula.
        sentence (str): Label of the sentence column and prefix of the atom columns.
        cap (int, optional): Maximum distinct atoms. Defaults to ``settings.ATOM_CAP``.

    Returns:
        WorldTable: ``2^n`` rows over the atom columns followed by the sentence column.

    Raises:
        AtomBudgetExceeded: If the formula has more atoms than the cap.
    """
    cap = cap if cap is not None else settings.ATOM_CAP
    labels = atom_labels(formula, sentence)
    if len(labels) > cap:
        raise AtomBudgetExceeded(
            f"{len(labels)} atoms in sentence {sentence}, at most {cap} allowed",
            atom_count=len(labels),
            stage="reason",
        )
    atoms = list(labels)
    rows = []
    for bits in itertools.product((0, 1), repeat=len(atoms)):
        valuation = dict(zip(atoms, bits))
        rows.append((*bits, int(formula.evaluate(valuation))))
    return WorldTable((*labels.values(), sentence), rows)


PAIR_ROWS = {
    EQ: ((0, 0), (1, 1)),
    NEQ: ((0, 1), (1, 0)),
    OMEGA: ((0, 0), (0, 1), (1, 0), (1, 1)),
}
IMPLICATION_ROWS = ((0, 0), (0, 1), (1, 1))


def pair_table(outcome: CmpOutcome, a: str, b: str) -> WorldTable:
    """The worlds two atoms can share given their comparison outcome."""
    rows = IMPLICATION_ROWS if outcome.is_implication else PAIR_ROWS[outcome]
    return WorldTable((a, b), rows)


def natural_join(left: WorldTable, right: WorldTable) -> WorldTable:
    """Hash join on the shared columns; a cross product when none are shared."""
    shared = [column for column in right.columns if column in left.columns]
    extra = [column for column in right.columns if column not in left.columns]
    right_keys = [right.index(column) for column in shared]
    right_extra = [right.index(column) for column in extra]
    hashed = {}
    for row in right.rows:
        hashed.setdefault(tuple(row[i] for i in right_keys), []).append(
            tuple(row[i] for i in right_extra)
        )
    left_keys = [left.index(column) for column in shared]
    rows = [
        row + values
        for row in left.rows
        for values in hashed.get(tuple(row[i] for i in left_keys), ())
    ]
    return WorldTable((*left.columns, *extra), rows)


def join_all(first: WorldTable, second: WorldTable, pair_tables: Iterable[WorldTable]) -> WorldTable:
    """
    Joins two sentence tables through the atom pair tables.

    Worlds where two atoms take values their comparison rules out disappear
    from the result, so a contradiction between two atoms only removes
    worlds instead of making everything derivable.
    """
    joined = first
    for table in pair_tables:
        joined = natural_join(joined, table)
    return natural_join(joined, second)


def confidence(s: str, t: str, table: WorldTable) -> Fraction:
    """Share of the worlds where ``s`` holds in which ``t`` holds too; 0 when ``s`` never holds."""
    s_index, t_index = table.index(s), table.index(t)
    holding = [row for row in table.rows if row[s_index]]
    if not holding:
        return Fraction(0)
    return Fraction(sum(1 for row in holding if row[t_index]), len(holding))


def support(s: str, t: str, table: WorldTable) -> Fraction:
    """Average of the ``t`` column over the worlds where ``s`` holds."""
    values = table.select(s).column(t)
    if not values:
        return Fraction(0)
    return Fraction(sum(values), len(values))


def compare_formulas(
    first: Formula, second: Formula, kb: KnowledgeBase, cap: int | None = None
) -> Comparison:
    """
    Joins the worlds of two formulae, atoms related from the first to the second.

    Args:
        first (Formula): The premise.
        second (Formula): The hypothesis.
        kb (KnowledgeBase): The knowledge base.
        cap (int, optional): Maximum atoms per formula.

    Returns:
        Comparison: Atoms, per pair motivations and the joined table.
    """
    table_a = tabular_semantics(first, "A", cap)
    table_b = tabular_semantics(second, "B", cap)
    labels_a, labels_b = atom_labels(first, "A"), atom_labels(second, "B")
    motivations = {}
    for atom_a, label_a in labels_a.items():
        for atom_b, label_b in labels_b.items():
            motivations[label_a, label_b] = motivate(atom_a, atom_b, kb)
    tables = [
        pair_table(motivation.outcome, *labels)
        for labels, motivation in motivations.items()
        if motivation.outcome != OMEGA
    ]
    joined = join_all(table_a, table_b, tables)
    logger.debug(
        "joined %d x %d worlds into %d", len(table_a.rows), len(table_b.rows), len(joined.rows)
    )
    return Comparison(
        atoms_a=tuple(labels_a),
        atoms_b=tuple(labels_b),
        labels_a=tuple(labels_a.values()),
        labels_b=tuple(labels_b.values()),
        motivations=motivations,
        table=joined,
    )


def classify_pair(
    first: Formula, second: Formula, kb: KnowledgeBase, cap: int | None = None
) -> PairVerdict:
    """
    Scores an ordered sentence pair in both directions.

    Each direction builds its own atom comparisons, so an implication from the
    first sentence to the second does not carry over to the reverse.

    Args:
        first (Formula): The first sentence.
        second (Formula): The second sentence.
        kb (KnowledgeBase): The knowledge base.
        cap (int, optional): Maximum atoms per formula.

    Returns:
        PairVerdict: Both confidences, and through them both classes.
    """
    forward = compare_formulas(first, second, kb, cap)
    backward = compare_formulas(second, first, kb, cap)
    verdict = PairVerdict(
        confidence_ab=confidence("A", "B", forward.table),
        confidence_ba=confidence("A", "B", backward.table),
        comparison_ab=forward,
        comparison_ba=backward,
    )
    logger.debug("pair verdict %s", verdict.to_dict())
    return verdict
