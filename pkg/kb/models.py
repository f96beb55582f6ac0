"""
Knowledge base entries.

The knowledge base is immutable after loading: every entry is a frozen attrs
class and the container only exposes read operations.
"""

from enum import Enum

from attrs import field, frozen
import networkx as nx


class EntityClass(str, Enum):
    VERB = "VERB"
    GPE = "GPE"
    LOC = "LOC"
    ORG = "ORG"
    NOUN = "NOUN"
    ENTITY = "ENTITY"
    ADJECTIVE = "ADJECTIVE"
    PRONOUN = "PRONOUN"


class VerbClass(str, Enum):
    CAUSATIVE = "causative"
    MOVEMENT = "movement"
    ANY = "any"


class AttachTo(str, Enum):
    KERNEL = "Kernel"
    SINGLETON = "Singleton"


class RelationKind(str, Enum):
    EQUIV = "EQUIV"
    IMPLIES = "IMPLIES"
    INCONSISTENT = "INCONSISTENT"
    PART_OF = "PART_OF"
    IS_A = "IS_A"


class ExpansionMode(str, Enum):
    ENTAILING = "ENTAILING"
    EQUIVALENT = "EQUIVALENT"


class KbVerdict(str, Enum):
    """Outcome of :func:`kb.utils.kb_relation`."""

    EQUIV = "EQUIV"
    IMPLIES = "IMPLIES"
    INCONSISTENT = "INCONSISTENT"
    NONE = "NONE"


@frozen
class KbLexEntry:
    lemma: str
    entity_class: EntityClass
    surface_forms: tuple[str, ...] = ()
    abstract_entity: bool = False
    transitive: bool | None = None
    semi_modal: bool = False
    verb_class: VerbClass | None = None


@frozen
class LogicalRewriteRule:
    """
    A declarative rule assigning a logical function to an adverbial node.

    Premises left as ``None`` are not checked. Rules are tested in ascending
    ``rule_order`` and the first one whose premises all hold wins.
    """

    rule_order: int
    construct_name: str
    construct_property: str
    prepositions: frozenset[str] = frozenset()
    matched_by_source: str | None = None
    requires_abstract_entity: bool | None = None
    requires_verb_class: VerbClass | None = None


@frozen
class LogicalFunctionDef:
    construct_name: str
    construct_property: str
    attach_to: AttachTo
    argument: str


@frozen
class SemanticRelation:
    kind: RelationKind
    left: str
    right: str


@frozen
class PropositionPattern:
    """
    A proposition pattern for expansion rules.

    Slots holding a string starting with ``$`` are wildcards binding a
    variable; ``name`` may also be a wildcard. ``properties`` maps a property
    key to a single slot. A rewrite slot may read ``¬$x`` (negated term) or
    ``$x[of]$z`` (term $x specified by the name of $z).
    """

    name: str
    args: tuple[str | None, ...]
    properties: tuple[tuple[str, str], ...] = ()
    negated: bool = False


@frozen
class ExpansionRule:
    mode: ExpansionMode
    pattern: PropositionPattern
    rewrite: PropositionPattern


@frozen(eq=False)
class KnowledgeBase:
    """
    The loaded knowledge base.

    Attributes:
        lexicon (dict): Lemma to :class:`KbLexEntry`.
        lemmas (dict): Lowercased surface form to lemma.
        rewrite_rules (tuple): Rules sorted by ``rule_order``.
        functions (dict): ``(construct_name, construct_property)`` to definition.
        relations (tuple): Semantic relations between lemmas or names.
        expansions (tuple): Expansion rules of both modes.
        prototypical_prepositions (frozenset): Prepositions expressing spatial relations.
        pronouns (frozenset): Pronouns resolved against relative clauses.
        phrasal_verbs (frozenset): Verb plus adverb combinations merged into one label.
        entail_graph (nx.DiGraph): Every directed relation, EQUIV in both directions.
        implies_graph (nx.DiGraph): Only EQUIV and IMPLIES edges; inconsistency spreads along it.
    """

    lexicon: dict = field(factory=dict)
    lemmas: dict = field(factory=dict)
    rewrite_rules: tuple = ()
    functions: dict = field(factory=dict)
    relations: tuple = ()
    expansions: tuple = ()
    prototypical_prepositions: frozenset = frozenset()
    pronouns: frozenset = frozenset()
    phrasal_verbs: frozenset = frozenset()
    equiv_graph: nx.Graph = field(factory=nx.Graph)
    entail_graph: nx.DiGraph = field(factory=nx.DiGraph)
    implies_graph: nx.DiGraph = field(factory=nx.DiGraph)
    inconsistent_pairs: frozenset = frozenset()

    def lemmatize(self, word: str) -> str:
        """Unknown words lemmatize to themselves."""
        return self.lemmas.get(word.lower(), word)

    def entry(self, lemma: str) -> KbLexEntry | None:
        return self.lexicon.get(lemma) or self.lexicon.get(lemma.lower())

    def rule_by_order(self, rule_order: int) -> LogicalRewriteRule | None:
        for rule in self.rewrite_rules:
            if rule.rule_order == rule_order:
                return rule
        return None

    def function_for(self, rule: LogicalRewriteRule) -> LogicalFunctionDef | None:
        return self.functions.get((rule.construct_name, rule.construct_property))

    def is_abstract(self, name: str) -> bool:
        entry = self.entry(self.lemmatize(name))
        return bool(entry and entry.abstract_entity)

    def is_transitive(self, verb: str) -> bool | None:
        entry = self.entry(self.lemmatize(verb))
        return entry.transitive if entry else None

    def is_semi_modal(self, verb: str) -> bool:
        entry = self.entry(self.lemmatize(verb))
        return bool(entry and entry.semi_modal)

    def verb_class(self, verb: str) -> VerbClass | None:
        entry = self.entry(self.lemmatize(verb))
        return entry.verb_class if entry else None


@frozen
class KernelContext:
    """The enclosing kernel as seen by rule matching."""

    verb: str | None = None


@frozen
class NodeContext:
    """
    The node under rewriting as seen by rule matching.

    Attributes:
        prepositions (frozenset): Prepositions drawn from positional ``case`` properties.
        source (str | None): The MEU source tag of the node, e.g. ``SUTime``.
        abstract (bool): Whether the KB marks the node as an abstract entity.
    """

    prepositions: frozenset = frozenset()
    source: str | None = None
    abstract: bool = False
