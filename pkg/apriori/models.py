"""
Sentence graph entities.

Singletons and sets are mutable attrs classes: every pipeline stage works on
its own deep copy of the graph it receives.
"""

from enum import Enum
from typing import Iterator, Union

from attrs import define, field


class GroupType(str, Enum):
    AND = "AND"
    OR = "OR"
    NEITHER = "NEITHER"
    NOT = "NOT"
    GROUPING = "GROUPING"
    MULTIINDIRECT = "MULTIINDIRECT"


class MeuSource(str, Enum):
    GEONAMES = "GeoNames"
    SUTIME = "SUTime"
    STANZA = "Stanza"
    ONTOLOGY = "Ontology"
    CONCEPTNET = "ConceptNet"


# Most specific first.
TYPE_HIERARCHY = ("VERB", "GPE", "LOC", "ORG", "NOUN", "ENTITY", "ADJECTIVE")


def is_position_key(key: str) -> bool:
    """Positional ``case`` properties are keyed by their float position."""
    try:
        float(key)
    except ValueError:
        return False
    return True


@define
class MeuEntry:
    start: int
    end: int
    text: str
    monad: str
    type: str
    source: MeuSource
    confidence: float


@define
class DepEdge:
    """
    A labelled edge between two node ids.

    Verb edges built by the rewrite stage have ``label_type`` "verb", carry the
    id of the verb node in ``verb_id`` and may miss either endpoint.
    """

    source: int | None
    target: int | None
    label: str
    label_type: str = "dependency"
    negated: bool = False
    verb_id: int | None = None


@define
class Singleton:
    """
    An atomic sentence entity.

    Attributes:
        id (int): Node id, kept across every rewrite as provenance.
        named_entity (str): Surface text of the entity.
        lemma (str): KB lemma; first-order terms are named after it.
        pos (str): Part-of-speech tag.
        type (str): Entity type (GPE, NOUN, VERB, ...).
        properties (dict): Multimap of key to list of text or entities.
        min (int): First character offset.
        max (int): Last character offset.
        confidence (float): Match confidence in [0, 1].
        kernel (Relationship | None): A kernel nested in this entity.
        source (str | None): Source of the best MEU match, e.g. ``SUTime``.
    """

    id: int
    named_entity: str
    lemma: str = ""
    pos: str = ""
    type: str = "None"
    properties: dict = field(factory=dict)
    min: int = 0
    max: int = 0
    confidence: float = 1.0
    kernel: "object | None" = None
    source: str | None = None

    def __attrs_post_init__(self):
        if not self.lemma:
            self.lemma = self.named_entity

    @property
    def is_verb(self) -> bool:
        return self.type == "VERB" or self.pos.startswith("VB")

    def prepositions(self) -> set[str]:
        found = set()
        for key, values in self.properties.items():
            if is_position_key(key):
                found.update(str(value).lower() for value in values)
        return found

    def leaves(self) -> Iterator["Singleton"]:
        yield self


@define
class SetOfSingletons:
    id: int
    entities: list
    group_type: GroupType
    confidence: float = 1.0

    def __attrs_post_init__(self):
        if self.group_type == GroupType.NOT and len(self.entities) != 1:
            raise ValueError(f"NOT set {self.id} must have exactly one child")

    @property
    def min(self) -> int:
        return min(entity.min for entity in self.entities)

    @property
    def max(self) -> int:
        return max(entity.max for entity in self.entities)

    @property
    def named_entity(self) -> str:
        return " ".join(leaf.named_entity for leaf in self.leaves())

    @property
    def properties(self) -> dict:
        return {}

    @property
    def is_verb(self) -> bool:
        return False

    def prepositions(self) -> set[str]:
        found = set()
        for leaf in self.leaves():
            found |= leaf.prepositions()
        return found

    def leaves(self) -> Iterator[Singleton]:
        for entity in self.entities:
            yield from entity.leaves()


Entity = Union[Singleton, SetOfSingletons]


@define
class DepGraph:
    """
    A sentence graph: dependency nodes and edges plus the sentence's MEU entries.

    ``nodes`` keeps the order of the input file.
    """

    text: str
    nodes: dict
    edges: list
    meu: list = field(factory=list)

    def children(self, node_id: int, *labels: str) -> list[DepEdge]:
        return [
            edge
            for edge in self.edges
            if edge.source == node_id and (not labels or edge.label in labels)
        ]

    def parents(self, node_id: int, *labels: str) -> list[DepEdge]:
        return [
            edge
            for edge in self.edges
            if edge.target == node_id and (not labels or edge.label in labels)
        ]

    def next_id(self) -> int:
        ids = [node.id for entity in self.nodes.values() for node in _walk(entity)]
        return max(ids, default=0) + 1

    def find(self, node_id: int):
        """Finds an entity by id, looking inside sets too."""
        if node_id in self.nodes:
            return self.nodes[node_id]
        for entity in self.nodes.values():
            found = _find_in(entity, node_id)
            if found is not None:
                return found
        return None

    def top_level(self, node_id: int) -> int | None:
        """The id of the top-level entity holding ``node_id``."""
        if node_id in self.nodes:
            return node_id
        for key, entity in self.nodes.items():
            if _find_in(entity, node_id) is not None:
                return key
        return None


def _walk(entity):
    yield entity
    for child in getattr(entity, "entities", ()):
        yield from _walk(child)


def _find_in(entity, node_id: int):
    if entity.id == node_id:
        return entity
    for child in getattr(entity, "entities", ()):
        found = _find_in(child, node_id)
        if found is not None:
            return found
    return None
