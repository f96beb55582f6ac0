from attrs import define, field

from apriori.models import SetOfSingletons, Singleton


@define
class Relationship:
    """
    A kernel: a source and a target mediated by an edge label.

    Attributes:
        source (Singleton | SetOfSingletons | None): The acting entity, or a fresh variable.
        target (Singleton | SetOfSingletons | None): None for intransitive verbs.
        edge_label (Singleton | None): The verb; None for non-verb edges.
        negated (bool): Whether the whole kernel is negated.
        intransitive (bool): The verb takes no target; renders with one argument.
        properties (dict): Multimap of key to entities or nested kernels.
    """

    source: "Singleton | SetOfSingletons | None"
    target: "Singleton | SetOfSingletons | None" = None
    edge_label: Singleton | None = None
    negated: bool = False
    intransitive: bool = False
    properties: dict = field(factory=dict)

    @property
    def label(self) -> str:
        return self.edge_label.lemma if self.edge_label is not None else "None"

    def nested(self) -> list["Relationship"]:
        return [
            value
            for value in self.properties.get("SENTENCE", [])
            if isinstance(value, Relationship)
        ]


VARIABLE_TYPE = "VARIABLE"


def variable(index: int) -> Singleton:
    """A fresh existential variable ``?index``; variables take negative ids."""
    return Singleton(id=-index, named_entity=f"?{index}", type=VARIABLE_TYPE)


def is_variable(entity) -> bool:
    return isinstance(entity, Singleton) and entity.type == VARIABLE_TYPE


def property_key(entity) -> str:
    """
    The kernel property key an entity is filed under before logical rewriting.

    Sets use their group type; untyped words and adjectives use their
    part-of-speech prefix (JJ, RB, ...); everything else its entity type.
    """
    if isinstance(entity, SetOfSingletons):
        return entity.group_type.value
    if isinstance(entity, Relationship):
        return "SENTENCE"
    if entity.type in ("None", "", "ADJECTIVE"):
        return entity.pos[:2].upper() or "None"
    return entity.type
