import json
import logging
import re
from collections import deque
from functools import lru_cache
from pathlib import Path

import jsonschema
import networkx as nx
from attrs import evolve
from django.conf import settings

from FactoidEntailment_project.exceptions import (
    ExpansionBudgetExceeded,
    ParseError,
    ValidationError,
)
from fol.models import Proposition, Term

from .models import (
    AttachTo,
    EntityClass,
    ExpansionMode,
    ExpansionRule,
    KbLexEntry,
    KbVerdict,
    KernelContext,
    KnowledgeBase,
    LogicalFunctionDef,
    LogicalRewriteRule,
    NodeContext,
    PropositionPattern,
    RelationKind,
    SemanticRelation,
    VerbClass,
)
from .schema import KB_SCHEMA
from .serializers import (
    ExpansionRuleSerializer,
    KbLexEntrySerializer,
    LogicalFunctionDefSerializer,
    LogicalRewriteRuleSerializer,
    SemanticRelationSerializer,
)

logger = logging.getLogger(__name__)

SPECIFIED_SLOT_RE = re.compile(r"^(\$\w+)\[of\](¬?)(\$\w+)$")
DIRECTED_KINDS = (RelationKind.IMPLIES, RelationKind.IS_A, RelationKind.PART_OF)


def load_kb(path: str | Path | None = None) -> KnowledgeBase:
    """
    Loads and validates the knowledge base document.

    Args:
        path (str | Path, optional): The KB JSON file. Defaults to ``settings.KB_PATH``.

    Returns:
        KnowledgeBase: The immutable knowledge base.

    Raises:
        ParseError: If the file is missing or is not valid JSON.
        ValidationError: If an entry breaks the schema or a type invariant.
    """
    path = Path(path or settings.KB_PATH)
    try:
        with open(path, "r", encoding="utf-8") as kb_file:
            document = json.load(kb_file)
    except FileNotFoundError:
        raise ParseError(f"knowledge base not found at '{path}'", stage="kb")
    except json.JSONDecodeError as e:
        raise ParseError(
            f"{path}: line {e.lineno} column {e.colno}: {e.msg}", stage="kb"
        )
    else:
        kb = build_knowledge_base(document)
        logger.debug(
            "loaded knowledge base %s: %d lexicon entries, %d rules",
            path,
            len(kb.lexicon),
            len(kb.rewrite_rules),
        )
        return kb


def _validated(serializer_class, entries: list, section: str) -> list[dict]:
    validated = []
    for index, entry in enumerate(entries):
        serializer = serializer_class(data=entry)
        if not serializer.is_valid():
            raise ValidationError(
                f"{section}[{index}]: {serializer.errors}", stage="kb"
            )
        validated.append(serializer.validated_data)
    return validated


def _pattern(data: dict) -> PropositionPattern:
    return PropositionPattern(
        name=data["name"],
        args=tuple(data["args"]),
        properties=tuple(sorted(data.get("properties", {}).items())),
        negated=data.get("negated", False),
    )


def build_knowledge_base(document: dict) -> KnowledgeBase:
    """
    Builds a knowledge base from an already parsed KB document.

    Args:
        document (dict): The decoded KB JSON document.

    Returns:
        KnowledgeBase: The immutable knowledge base with its relation closures.

    Raises:
        ValidationError: If the document breaks the schema or a type invariant.
    """
    errors = sorted(
        jsonschema.Draft7Validator(KB_SCHEMA).iter_errors(document),
        key=lambda error: list(error.absolute_path),
    )
    if errors:
        error = errors[0]
        where = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ValidationError(f"{where}: {error.message}", stage="kb")

    lexicon, lemmas = {}, {}
    for data in _validated(KbLexEntrySerializer, document["lexicon"], "lexicon"):
        entry = KbLexEntry(
            lemma=data["lemma"],
            entity_class=EntityClass(data["entity_class"]),
            surface_forms=tuple(data["surface_forms"]),
            abstract_entity=data["abstract_entity"],
            transitive=data["transitive"],
            semi_modal=data["semi_modal"],
            verb_class=VerbClass(data["verb_class"]) if data["verb_class"] else None,
        )
        lexicon[entry.lemma] = entry
        lemmas[entry.lemma.lower()] = entry.lemma
        for form in entry.surface_forms:
            lemmas[form.lower()] = entry.lemma

    rules, seen_orders = [], set()
    for data in _validated(
        LogicalRewriteRuleSerializer, document["rewrite_rules"], "rewrite_rules"
    ):
        if data["rule_order"] in seen_orders:
            raise ValidationError(
                f"rewrite_rules: duplicate rule_order {data['rule_order']}", stage="kb"
            )
        seen_orders.add(data["rule_order"])
        verb_class = data["requires_verb_class"]
        rules.append(
            LogicalRewriteRule(
                rule_order=data["rule_order"],
                construct_name=data["construct_name"],
                construct_property=data["construct_property"],
                prepositions=frozenset(p.lower() for p in data["prepositions"]),
                matched_by_source=data["matched_by_source"],
                requires_abstract_entity=data["requires_abstract_entity"],
                requires_verb_class=VerbClass(verb_class) if verb_class else None,
            )
        )
    rules.sort(key=lambda rule: rule.rule_order)

    functions = {}
    for data in _validated(
        LogicalFunctionDefSerializer, document["functions"], "functions"
    ):
        key = (data["construct_name"], data["construct_property"])
        if key in functions:
            raise ValidationError(f"functions: duplicate definition {key}", stage="kb")
        functions[key] = LogicalFunctionDef(
            construct_name=key[0],
            construct_property=key[1],
            attach_to=AttachTo(data["attach_to"]),
            argument=data["argument"],
        )

    relations = tuple(
        SemanticRelation(
            kind=RelationKind(data["kind"]),
            left=data["left"].lower(),
            right=data["right"].lower(),
        )
        for data in _validated(
            SemanticRelationSerializer, document["relations"], "relations"
        )
    )

    expansions = tuple(
        ExpansionRule(
            mode=ExpansionMode(data["mode"]),
            pattern=_pattern(data["pattern"]),
            rewrite=_pattern(data["rewrite"]),
        )
        for data in _validated(
            ExpansionRuleSerializer, document["expansions"], "expansions"
        )
    )

    equiv_graph, entail_graph, implies_graph = nx.Graph(), nx.DiGraph(), nx.DiGraph()
    inconsistent = set()
    for relation in relations:
        if relation.kind == RelationKind.EQUIV:
            equiv_graph.add_edge(relation.left, relation.right)
            for graph in (entail_graph, implies_graph):
                graph.add_edge(relation.left, relation.right)
                graph.add_edge(relation.right, relation.left)
        elif relation.kind == RelationKind.INCONSISTENT:
            inconsistent.add(frozenset((relation.left, relation.right)))
        else:
            entail_graph.add_edge(relation.left, relation.right)
            if relation.kind == RelationKind.IMPLIES:
                implies_graph.add_edge(relation.left, relation.right)

    return KnowledgeBase(
        lexicon=lexicon,
        lemmas=lemmas,
        rewrite_rules=tuple(rules),
        functions=functions,
        relations=relations,
        expansions=expansions,
        prototypical_prepositions=frozenset(
            document.get("prototypical_prepositions", [])
        ),
        pronouns=frozenset(p.lower() for p in document.get("pronouns", [])),
        phrasal_verbs=frozenset(document.get("phrasal_verbs", [])),
        equiv_graph=equiv_graph,
        entail_graph=entail_graph,
        implies_graph=implies_graph,
        inconsistent_pairs=frozenset(inconsistent),
    )


def match_logical_rule(
    kernel_ctx: KernelContext, node_ctx: NodeContext, kb: KnowledgeBase
) -> LogicalRewriteRule | None:
    """
    Returns the first rule, in ascending ``rule_order``, whose premises all hold.

    Args:
        kernel_ctx (KernelContext): The enclosing kernel (its verb).
        node_ctx (NodeContext): Prepositions, source tag and abstractness of the node.
        kb (KnowledgeBase): The knowledge base.

    Returns:
        LogicalRewriteRule | None: The matching rule, or None when no rule fires.
    """
    prepositions = {p.lower() for p in node_ctx.prepositions}
    for rule in kb.rewrite_rules:
        if rule.prepositions and not (rule.prepositions & prepositions):
            continue
        if rule.matched_by_source and rule.matched_by_source != node_ctx.source:
            continue
        if (
            rule.requires_abstract_entity is not None
            and rule.requires_abstract_entity != node_ctx.abstract
        ):
            continue
        if rule.requires_verb_class not in (None, VerbClass.ANY):
            if not kernel_ctx.verb:
                continue
            if kb.verb_class(kernel_ctx.verb) != rule.requires_verb_class:
                continue
        return rule
    return None


def _reach(graph: nx.DiGraph, node: str) -> set[str]:
    if node not in graph:
        return {node}
    return {node} | nx.descendants(graph, node)


def kb_relation(a: str, b: str, kb: KnowledgeBase) -> KbVerdict:
    """
    Relates two lemmas or entity names through the KB closures.

    Priority is EQUIV, then INCONSISTENT, then IMPLIES. Inconsistency
    carries over EQUIV and IMPLIES only, never over IS_A or PART_OF.

    Args:
        a (str): The first name.
        b (str): The second name.
        kb (KnowledgeBase): The knowledge base.

    Returns:
        KbVerdict: The strongest relation holding from ``a`` to ``b``.
    """
    a, b = a.lower(), b.lower()
    if a == b:
        return KbVerdict.EQUIV
    if a in kb.equiv_graph and b in kb.equiv_graph and nx.has_path(kb.equiv_graph, a, b):
        return KbVerdict.EQUIV
    if kb.inconsistent_pairs:
        reach_a, reach_b = _reach(kb.implies_graph, a), _reach(kb.implies_graph, b)
        for x in reach_a:
            for y in reach_b:
                if frozenset((x, y)) in kb.inconsistent_pairs:
                    return KbVerdict.INCONSISTENT
    if a in kb.entail_graph and b in nx.descendants(kb.entail_graph, a):
        return KbVerdict.IMPLIES
    return KbVerdict.NONE


# Expansion


def _bind(slot: str | None, term: Term | None, bindings: dict) -> bool:
    if slot is None or term is None:
        return slot is None and term is None
    if slot.startswith("¬$"):
        if not term.negated:
            return False
        slot, term = slot[1:], term.positive()
    if slot.startswith("$"):
        if slot in bindings:
            return bindings[slot] == term
        bindings[slot] = term
        return True
    return not term.negated and term.name.lower() == slot.lower()


def _match(pattern: PropositionPattern, p: Proposition) -> tuple[dict, tuple] | None:
    """
    Matches a proposition against a pattern.

    Returns the variable bindings together with the properties the pattern
    did not consume, or None when the pattern does not match.
    """
    if len(pattern.args) != len(p.args):
        return None
    bindings = {}
    if pattern.name.startswith("$"):
        bindings[pattern.name] = Term(name=p.name)
    elif pattern.name.lower() != p.name.lower():
        return None
    for slot, term in zip(pattern.args, p.args):
        if not _bind(slot, term, bindings):
            return None
    remaining = p.property_map()
    for key, slot in pattern.properties:
        values = remaining.pop(key, [])
        if len(values) != 1 or not _bind(slot, values[0], bindings):
            return None
    return bindings, tuple(remaining.items())


def _fill(slot: str | None, bindings: dict) -> Term | None:
    if slot is None:
        return None
    specified = SPECIFIED_SLOT_RE.match(slot)
    if specified:
        head, negation, spec = specified.groups()
        spec_term = bindings[spec]
        negated = spec_term.negated != bool(negation)
        return evolve(bindings[head], specification=spec_term.name, negated=negated)
    if slot.startswith("¬$"):
        return bindings[slot[1:]].negate()
    if slot.startswith("$"):
        return bindings[slot]
    return Term(name=slot)


def _instantiate(
    template: PropositionPattern, bindings: dict, remaining: tuple, negated: bool
) -> Proposition | None:
    properties = dict(remaining)
    for key, slot in template.properties:
        if key in properties:
            return None
        properties[key] = [_fill(slot, bindings)]
    name = template.name
    if name.startswith("$"):
        name = bindings[name].name
    return Proposition(
        name=name,
        args=tuple(_fill(slot, bindings) for slot in template.args),
        properties=properties,
        negated=negated != template.negated,
    )


def _reversible(template: PropositionPattern) -> bool:
    slots = [template.name, *template.args, *(slot for _, slot in template.properties)]
    return all(slot is None or not SPECIFIED_SLOT_RE.match(slot) for slot in slots)


def _rule_successors(p: Proposition, mode: ExpansionMode, kb: KnowledgeBase):
    for rule in kb.expansions:
        directions = []
        if rule.mode == ExpansionMode.EQUIVALENT:
            directions.append((rule.pattern, rule.rewrite))
            if _reversible(rule.rewrite):
                directions.append((rule.rewrite, rule.pattern))
        elif mode == ExpansionMode.ENTAILING and not p.negated:
            directions.append((rule.pattern, rule.rewrite))
        for source, target in directions:
            matched = _match(source, p.positive())
            if matched is None:
                continue
            bindings, remaining = matched
            negated = p.negated != source.negated
            produced = _instantiate(target, bindings, remaining, negated)
            if produced is not None:
                yield produced


def _phrase(p: Proposition) -> str:
    target = p.args[1] if p.is_binary else None
    if target is None or target.negated:
        return p.name.lower()
    if p.name.lower() == "be":
        return target.name.lower()
    return f"{p.name} {target.name}".lower()


def _from_phrase(p: Proposition, phrase: str, kb: KnowledgeBase) -> Proposition:
    subject = p.args[0]
    words = phrase.split(" ", 1)
    entry = kb.entry(kb.lemmatize(words[0]))
    if entry and entry.entity_class == EntityClass.VERB:
        args = (subject, Term(name=words[1])) if len(words) > 1 else (subject,)
        return Proposition(entry.lemma, args, p.properties, p.negated)
    return Proposition("be", (subject, Term(name=phrase)), p.properties, p.negated)


def _relation_successors(p: Proposition, mode: ExpansionMode, kb: KnowledgeBase):
    for relation in kb.relations:
        pairs = []
        if relation.kind == RelationKind.EQUIV:
            pairs = [(relation.left, relation.right), (relation.right, relation.left)]
        elif (
            relation.kind in DIRECTED_KINDS
            and mode == ExpansionMode.ENTAILING
            and not p.negated
        ):
            pairs = [(relation.left, relation.right)]
        for left, right in pairs:
            if p.is_binary and _phrase(p) == left:
                yield _from_phrase(p, right, kb)
            if p.name.lower() == left:
                yield evolve(p, name=right)
            args = tuple(
                evolve(term, name=right)
                if term is not None and term.name.lower() == left
                else term
                for term in p.args
            )
            if args != p.args:
                yield evolve(p, args=args)


@lru_cache(maxsize=4096)
def _expand(
    p: Proposition, mode: ExpansionMode, kb: KnowledgeBase, bound: int
) -> frozenset:
    derived, queue = set(), deque([p])
    while queue:
        current = queue.popleft()
        for successor in (
            *_rule_successors(current, mode, kb),
            *_relation_successors(current, mode, kb),
        ):
            if successor == p or successor in derived:
                continue
            derived.add(successor)
            if len(derived) > bound:
                raise ExpansionBudgetExceeded(
                    f"expansion of {p.name} derived more than {bound} propositions",
                    stage="reason",
                )
            queue.append(successor)
    return frozenset(derived)


def expand(
    p: Proposition,
    mode: ExpansionMode,
    kb: KnowledgeBase,
    bound: int | None = None,
) -> frozenset:
    """
    Derives every proposition reachable from ``p`` under the rules of a mode.

    EQUIVALENT uses equivalence rules (both directions) and EQUIV relations.
    ENTAILING additionally uses entailing rules and directed relations, which
    only fire on non-negated propositions.

    Args:
        p (Proposition): The seed proposition.
        mode (ExpansionMode): Which rules apply.
        kb (KnowledgeBase): The knowledge base.
        bound (int, optional): Maximum derived propositions. Defaults to ``settings.EXPANSION_BOUND``.

    Returns:
        frozenset: The derived propositions, without ``p`` itself.

    Raises:
        ExpansionBudgetExceeded: If the fixpoint is not reached within the bound.
    """
    mode = ExpansionMode(mode)
    return _expand(p, mode, kb, bound if bound is not None else settings.EXPANSION_BOUND)
