import copy
import logging
from collections import defaultdict

import networkx as nx

from apriori.models import DepEdge, DepGraph, Singleton
from FactoidEntailment_project.exceptions import CyclicGraphError
from kernel.models import property_key

from .models import FOLDED_LABELS, IntermediateGraph, VisitOrder

logger = logging.getLogger(__name__)

MODIFIER_LABELS = ("amod", "nummod")
NEGATORS = frozenset({"not", "n't", "never", "no"})


def _fold_modifiers(graph: DepGraph) -> None:
    kept = []
    for edge in graph.edges:
        head, modifier = graph.find(edge.source), graph.find(edge.target)
        if edge.label in MODIFIER_LABELS and head is not None and not head.is_verb:
            head.properties.setdefault(property_key(modifier), []).append(modifier)
            graph.nodes.pop(edge.target, None)
        else:
            kept.append(edge)
    graph.edges = kept


def _inherit_properties(graph: DepGraph) -> None:
    for edge in [e for e in graph.edges if e.label == "inherit_edge"]:
        source, target = graph.find(edge.source), graph.find(edge.target)
        for key, values in target.properties.items():
            merged = source.properties.setdefault(key, [])
            merged.extend(value for value in values if value not in merged)


def _first(edges: list[DepEdge]) -> DepEdge | None:
    return edges[0] if edges else None


def _verb_edge(graph: DepGraph, verb: Singleton) -> DepEdge:
    """
    Builds the single edge standing for ``verb`` and drops the argument edges it replaces.

    With a ``by`` agent the agent becomes the source and the passive subject
    the target, so active and passive sentences give the same edge.
    """
    children = defaultdict(list)
    for edge in graph.children(verb.id):
        children[edge.label].append(edge)

    agent = _first(children["obl_agent"])
    subject = _first(children["nsubj"])
    passive = _first(children["nsubj_pass"])
    obj = _first(children["obj"]) or _first(children["attr"])
    if agent is not None:
        source, target = agent, passive or obj
        agent_entity = graph.find(agent.target)
        for key in [k for k, v in agent_entity.properties.items() if v == ["by"]]:
            del agent_entity.properties[key]
    else:
        source, target = subject, obj or passive

    negated = any(edge.negated for edges in children.values() for edge in edges)
    for edge in children["neg"] + children["aux"] + children["advmod"]:
        marker = graph.find(edge.target)
        if marker is not None and marker.lemma.lower() in NEGATORS:
            negated = True
            if edge.label == "advmod":
                edge.label = "neg"

    label = verb.lemma
    for edge in children["mark"]:
        marker = graph.find(edge.target)
        if marker is not None and marker.lemma.lower() == "to":
            label = f"to {label}"

    consumed = [edge for edge in (source, target) if edge is not None]
    graph.edges = [edge for edge in graph.edges if edge not in consumed]
    return DepEdge(
        source=source.target if source is not None else None,
        target=target.target if target is not None else None,
        label=label,
        label_type="verb",
        negated=negated,
        verb_id=verb.id,
    )


def _copula_edge(graph: DepGraph, cop: DepEdge) -> DepEdge:
    """
    ``X is Y``: the copula's head becomes the target of a ``be`` edge anchored on it.

    Without a subject (``it is busy`` with an expletive ``it``) the head is the
    only argument.
    """
    head = graph.top_level(cop.source)
    marker = graph.find(cop.target)
    subject = _first(graph.children(cop.source, "nsubj")) or _first(graph.children(head, "nsubj"))
    negated = head == cop.source and bool(graph.children(cop.source, "neg"))
    if subject is not None:
        graph.edges.remove(subject)
    return DepEdge(
        source=subject.target if subject is not None else head,
        target=head if subject is not None else None,
        label=marker.lemma if marker is not None else "be",
        label_type="verb",
        negated=negated,
        verb_id=head,
    )


def build_intermediate(graph: DepGraph, kb=None) -> IntermediateGraph:
    """
    Promotes every verb to an edge between its acting entity and its object.

    Auxiliaries fold into their head verb, a copula turns its head into the
    target of a ``be`` edge anchored on that head, noun modifiers become
    properties of their head and ``inherit_edge`` targets pass their
    properties on to the source. Negation lands on the verb edge.

    Args:
        graph (DepGraph): A coalesced graph; it is not modified.
        kb (KnowledgeBase, optional): Not consulted by the current passes.

    Returns:
        IntermediateGraph: The graph with one verb edge per main verb.
    """
    graph = copy.deepcopy(graph)
    _fold_modifiers(graph)
    _inherit_properties(graph)
    copulae = [edge for edge in graph.edges if edge.label == "cop"]
    verb_edges = [_copula_edge(graph, edge) for edge in copulae]
    heads = {edge.source for edge in copulae}
    for node_id, entity in list(graph.nodes.items()):
        if not isinstance(entity, Singleton) or not entity.is_verb or node_id in heads:
            continue
        if graph.parents(node_id, "aux", "aux_pass", "cop"):
            continue
        verb_edges.append(_verb_edge(graph, entity))
    logger.debug(
        "intermediate graph: %s",
        ", ".join(f"{e.label}({e.source}, {e.target})" for e in verb_edges),
    )
    return IntermediateGraph(
        text=graph.text, nodes=graph.nodes, edges=graph.edges + verb_edges, meu=graph.meu
    )


def topo_sort_filter(graph: DepGraph) -> VisitOrder:
    """
    Orders node ids depth-first, children before parents, then prunes them.

    Pruned ids are ``inherit_edge`` targets, nodes folded into an edge label
    or a property (markers, auxiliaries, ...), empty nodes and nodes nested
    inside sets.

    Args:
        graph (DepGraph): The intermediate graph.

    Returns:
        VisitOrder: The filtered order.

    Raises:
        CyclicGraphError: If the dependency edges form a cycle.
    """
    digraph = nx.DiGraph()
    digraph.add_nodes_from(graph.nodes)
    digraph.add_edges_from(
        (edge.source, edge.target)
        for edge in graph.edges
        if edge.label_type != "verb" and edge.source is not None and edge.target is not None
    )
    if not nx.is_directed_acyclic_graph(digraph):
        raise CyclicGraphError(
            f"cycle through {nx.find_cycle(digraph)}", stage="rewrite"
        )
    pruned = {
        edge.target
        for edge in graph.edges
        if edge.label == "inherit_edge" or edge.label in FOLDED_LABELS
    }
    ids = [
        node_id
        for node_id in nx.dfs_postorder_nodes(digraph)
        if node_id in graph.nodes
        and node_id not in pruned
        and graph.nodes[node_id].named_entity != ""
    ]
    return VisitOrder(ids=ids)
