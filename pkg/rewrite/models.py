from attrs import define, field

from apriori.models import DepEdge, DepGraph

# Edge labels whose targets are folded into the verb label or node properties.
FOLDED_LABELS = frozenset(
    {"mark", "aux", "aux_pass", "cop", "neg", "expl", "cc", "cc_preconj", "case", "det", "punct"}
)


@define
class IntermediateGraph(DepGraph):
    """
    A coalesced sentence graph where every verb also labels one edge.

    Verb edges have ``label_type`` "verb"; the dependency edges they replace
    are removed, the rest are kept for property gathering.
    """

    def verb_edges(self) -> list[DepEdge]:
        return [edge for edge in self.edges if edge.label_type == "verb"]

    def verb_edge(self, verb_id: int) -> DepEdge | None:
        return next((edge for edge in self.verb_edges() if edge.verb_id == verb_id), None)


@define
class VisitOrder:
    ids: list = field(factory=list)

    def position(self, node_id: int) -> int:
        return self.ids.index(node_id) if node_id in self.ids else len(self.ids)
