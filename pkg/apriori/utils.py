import copy
import json
import logging
import math
import re
from collections import defaultdict
from pathlib import Path

import distance
import jsonschema
import networkx as nx
from django.conf import settings

from FactoidEntailment_project.exceptions import (
    CyclicGraphError,
    EmptyGroupError,
    ParseError,
    ValidationError,
)

from .models import (
    TYPE_HIERARCHY,
    DepEdge,
    DepGraph,
    GroupType,
    MeuEntry,
    MeuSource,
    SetOfSingletons,
    Singleton,
)
from .schema import DEP_GRAPH_SCHEMA
from .serializers import DepNodeSerializer, MeuEntrySerializer

logger = logging.getLogger(__name__)

CONJUNCTIONS = {
    "and": GroupType.AND,
    "but": GroupType.AND,
    "or": GroupType.OR,
    "nor": GroupType.NEITHER,
    "neither": GroupType.NEITHER,
}
NEGATION_LABELS = ("neg",)


def build_dep_graph(document: dict, origin: str = "<graph>") -> DepGraph:
    """
    Builds a dependency graph from a decoded graph document.

    Nodes without offsets are located in the sentence text by their name.

    Args:
        document (dict): The decoded graph document.
        origin (str): Where the document came from, used in error messages.

    Returns:
        DepGraph: The validated graph.

    Raises:
        ParseError: If the document breaks the schema or an edge names a missing node.
        ValidationError: If a node or MEU entry breaks its invariants.
        CyclicGraphError: If the edges contain a cycle.
    """
    for error in jsonschema.Draft7Validator(DEP_GRAPH_SCHEMA).iter_errors(document):
        where = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ParseError(f"{origin}: {where}: {error.message}", stage="apriori")

    text = document.get("text", "")
    nodes, cursor = {}, 0
    for index, data in enumerate(document["nodes"]):
        if "min" not in data and data["name"]:
            match = re.compile(rf"\b{re.escape(data['name'])}\b").search(text, cursor)
            match = match or re.compile(rf"\b{re.escape(data['name'])}\b").search(text)
            if match:
                data = {**data, "min": match.start(), "max": match.end()}
                cursor = match.end()
        serializer = DepNodeSerializer(data=data)
        if not serializer.is_valid():
            raise ValidationError(
                f"{origin}: nodes[{index}]: {serializer.errors}", stage="apriori"
            )
        node = serializer.validated_data
        if node["id"] in nodes:
            raise ParseError(f"{origin}: duplicate node id {node['id']}", stage="apriori")
        nodes[node["id"]] = Singleton(
            id=node["id"],
            named_entity=node["name"],
            lemma=node["lemma"],
            pos=node["pos"],
            type=node["type"],
            properties={key: list(values) for key, values in node["properties"].items()},
            min=node["min"],
            max=node["max"],
        )

    edges = []
    for data in document["edges"]:
        for end in ("source", "target"):
            if data[end] not in nodes:
                raise ParseError(
                    f"{origin}: edge {data['label']} references missing node {data[end]}",
                    stage="apriori",
                )
        edges.append(
            DepEdge(
                source=data["source"],
                target=data["target"],
                label=data["label"],
                label_type=data.get("label_type", "dependency"),
                negated=data.get("negated", False),
            )
        )

    meu = []
    for index, data in enumerate(document.get("meu", [])):
        serializer = MeuEntrySerializer(data=data)
        if not serializer.is_valid():
            raise ValidationError(
                f"{origin}: meu[{index}]: {serializer.errors}", stage="apriori"
            )
        entry = serializer.validated_data
        meu.append(MeuEntry(**{**entry, "source": MeuSource(entry["source"])}))

    graph = DepGraph(text=text, nodes=nodes, edges=edges, meu=meu)
    check_acyclic(graph, origin)
    return graph


def check_acyclic(graph: DepGraph, origin: str = "<graph>") -> None:
    digraph = nx.DiGraph()
    digraph.add_nodes_from(graph.nodes)
    digraph.add_edges_from(
        (edge.source, edge.target)
        for edge in graph.edges
        if edge.source is not None and edge.target is not None
    )
    if not nx.is_directed_acyclic_graph(digraph):
        cycle = nx.find_cycle(digraph)
        raise CyclicGraphError(f"{origin}: cycle through {cycle}", stage="apriori")


def load_dep_graph(path: str | Path) -> DepGraph:
    """
    Loads a dependency graph JSON file.

    Args:
        path (str | Path): The graph file.

    Returns:
        DepGraph: The validated graph.

    Raises:
        ParseError: If the file is missing or malformed.
        CyclicGraphError: If the graph has a cycle.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as graph_file:
            document = json.load(graph_file)
    except FileNotFoundError:
        raise ParseError(f"dependency graph not found at '{path}'", stage="apriori")
    except json.JSONDecodeError as e:
        raise ParseError(
            f"{path}: line {e.lineno} column {e.colno} (offset {e.pos}): {e.msg}", stage="apriori"
        )
    else:
        return build_dep_graph(document, origin=str(path))


def most_specific_type(types: list[str]) -> str:
    """
    Returns the most specific type under VERB <: GPE <: LOC <: ORG <: NOUN <: ENTITY <: ADJECTIVE.

    Args:
        types (list[str]): Candidate types; unknown ones are ignored.

    Returns:
        str: The most specific known type, or "None".
    """
    ranked = [TYPE_HIERARCHY.index(t) for t in types if t in TYPE_HIERARCHY]
    return TYPE_HIERARCHY[min(ranked)] if ranked else "None"


def _type_rank(entity_type: str) -> int:
    if entity_type in TYPE_HIERARCHY:
        return TYPE_HIERARCHY.index(entity_type)
    return len(TYPE_HIERARCHY)


def _compatible(entry_type: str, required_type: str | None) -> bool:
    if required_type in (None, "None") or entry_type not in TYPE_HIERARCHY:
        return True
    return _type_rank(entry_type) >= _type_rank(required_type)


def similarity(a: str, b: str) -> float:
    """Normalized edit-distance similarity, 1 - levenshtein / max length."""
    if not a and not b:
        return 1.0
    return 1.0 - distance.levenshtein(a.lower(), b.lower(), normalized=True)


def best_meu_entry(
    min: int,
    max: int,
    required_type: str | None,
    meu_db: list[MeuEntry],
    text: str | None = None,
    threshold: float | None = None,
) -> tuple[float, MeuEntry | None, float]:
    """
    Finds the best MEU entry for a span.

    Without ``text`` only entries covering exactly ``[min, max)`` match;
    with it, overlapping entries match when their text is similar enough.

    Returns:
        tuple: ``(confidence, entry, similarity)``; ``(0, None, 0)`` when nothing matches.
    """
    threshold = settings.MEU_FUZZY_THRESHOLD if threshold is None else threshold
    best = (0.0, None, 0.0)
    for entry in meu_db:
        if entry.start >= max or entry.end <= min:
            continue
        if not _compatible(entry.type, required_type):
            continue
        if text is None:
            score = 1.0 if (entry.start, entry.end) == (min, max) else 0.0
        else:
            score = similarity(text, entry.text)
        if score < threshold:
            continue
        confidence = entry.confidence
        if entry.source == MeuSource.GEONAMES:
            confidence *= settings.GEONAMES_MULTIPLIER
        if (confidence, score) > best[::2]:
            best = (confidence, entry, score)
    return best


def meu_resolution(
    min: int,
    max: int,
    required_type: str | None,
    meu_db: list[MeuEntry],
    text: str | None = None,
) -> tuple[float, str | None]:
    """
    Returns the greatest confidence of a typed MEU match over a span, and its type.

    Args:
        min (int): First character offset.
        max (int): End character offset.
        required_type (str | None): The type the match must be compatible with.
        meu_db (list[MeuEntry]): The MEU entries of the sentence.
        text (str, optional): The span's lemma text, enabling fuzzy matching.

    Returns:
        tuple: ``(confidence, type)``, or ``(0, None)`` when nothing matches.
    """
    confidence, entry, _ = best_meu_entry(min, max, required_type, meu_db, text)
    if entry is None:
        return 0.0, None
    return confidence, entry.type


def _merge_properties(entities) -> dict:
    merged = defaultdict(list)
    for entity in entities:
        for key, values in entity.properties.items():
            for value in values:
                if value not in merged[key]:
                    merged[key].append(value)
    return dict(merged)


def resolve_multiword(node: SetOfSingletons, meu_db: list[MeuEntry]) -> Singleton:
    """
    Resolves a GROUPING set into one Singleton, adding an ``extra`` when needed.

    Every contiguous sub-sequence of at least two members is an alternative;
    the best MEU confidence wins, then the greater member count, then the
    first in position order. The matched alternative becomes one unit and the
    unit of the most specific type becomes the core entity; the remaining
    units make up its ``extra``.

    Args:
        node (SetOfSingletons): A GROUPING set.
        meu_db (list[MeuEntry]): The MEU entries of the sentence.

    Returns:
        Singleton: The resolved entity, keeping the core member's id.

    Raises:
        EmptyGroupError: If the set has no entities.
    """
    members = sorted(node.leaves(), key=lambda entity: entity.min)
    if not members:
        raise EmptyGroupError(f"grouping {node.id} has no entities", stage="apriori")

    best_key, best_span, best_entry = (0.0, 0), None, None
    for length in range(2, len(members) + 1):
        for start in range(len(members) - length + 1):
            sequence = members[start : start + length]
            text = " ".join(member.lemma for member in sequence)
            required = most_specific_type([member.type for member in sequence])
            confidence, entry, score = best_meu_entry(
                sequence[0].min, sequence[-1].max, required, meu_db, text
            )
            if entry is not None and score < 1.0:
                logger.warning("possible misspelling: '%s' matched '%s'", text, entry.text)
            if (confidence, length) > best_key and confidence > 0:
                best_key, best_span, best_entry = (confidence, length), (start, start + length), entry

    units = list(members)
    if best_span is not None:
        start, end = best_span
        matched = members[start:end]
        unit = Singleton(
            id=min(matched, key=lambda m: _type_rank(m.type)).id,
            named_entity=" ".join(member.named_entity for member in matched),
            lemma=" ".join(member.lemma for member in matched),
            pos=matched[-1].pos,
            type=best_entry.type,
            min=matched[0].min,
            max=matched[-1].max,
            source=best_entry.source.value,
        )
        units = [*members[:start], unit, *members[end:]]

    core = min(units, key=lambda unit: _type_rank(unit.type))
    properties = _merge_properties(members)
    extra = " ".join(unit.lemma for unit in units if unit is not core)
    if extra:
        properties["extra"] = [extra]
    confidence = math.prod(member.confidence for member in members)
    if best_key[0] > 0:
        confidence *= best_key[0]
    return Singleton(
        id=core.id,
        named_entity=core.named_entity,
        lemma=core.lemma,
        pos=core.pos,
        type=core.type,
        properties=properties,
        min=members[0].min,
        max=members[-1].max,
        confidence=confidence,
        source=core.source,
    )


def _keeps_nominal(graph: DepGraph, node: Singleton) -> bool:
    if node.properties.get("det"):
        return True
    if "on" in node.prepositions():
        return True
    return bool(graph.children(node.id, "compound"))


def annotate_types(graph: DepGraph, kb=None, resolve: bool = True) -> None:
    """
    Lemmatizes every node and applies its single-word MEU match in place.

    A VERB match is ignored for nodes the syntax keeps nominal: a ``det``
    property, an ``on`` case, or a compound parent.
    """
    for node in graph.nodes.values():
        if not isinstance(node, Singleton):
            continue
        if kb is not None:
            node.lemma = kb.lemmatize(node.lemma)
        if not resolve or not node.named_entity:
            continue
        confidence, entry, score = best_meu_entry(
            node.min, node.max, None, graph.meu, node.lemma
        )
        if entry is None:
            continue
        if score < 1.0:
            logger.warning("possible misspelling: '%s' matched '%s'", node.named_entity, entry.text)
        node.source = entry.source.value
        node.confidence = confidence
        if entry.type == "VERB" and _keeps_nominal(graph, node):
            continue
        node.type = entry.type


def _replace(graph: DepGraph, removed: set, replacement, anchor: int) -> None:
    """Puts ``replacement`` at the position of ``anchor`` and re-points edges to it."""
    nodes = {}
    for node_id, entity in graph.nodes.items():
        if node_id == anchor:
            nodes[replacement.id] = replacement
        elif node_id not in removed:
            nodes[node_id] = entity
    graph.nodes = nodes
    edges = []
    for edge in graph.edges:
        if edge.source in removed:
            edge.source = replacement.id
        if edge.target in removed:
            edge.target = replacement.id
        if edge.source != edge.target:
            edges.append(edge)
    graph.edges = edges


def _drop_nodes(graph: DepGraph, node_ids: set) -> None:
    for node_id in node_ids:
        graph.nodes.pop(node_id, None)
    graph.edges = [
        edge
        for edge in graph.edges
        if edge.source not in node_ids and edge.target not in node_ids
    ]


def _merge_particles(graph: DepGraph) -> None:
    for edge in [edge for edge in graph.edges if edge.label == "compound_prt"]:
        verb, particle = graph.nodes[edge.source], graph.nodes[edge.target]
        verb.named_entity = f"{verb.named_entity} {particle.named_entity}"
        verb.lemma = f"{verb.lemma} {particle.lemma}"
        verb.max = max(verb.max, particle.max)
        _drop_nodes(graph, {particle.id})


def _group_compounds(graph: DepGraph) -> None:
    pairs = [(e.source, e.target) for e in graph.edges if e.label == "compound"]
    compounds = nx.DiGraph()
    compounds.add_nodes_from(sorted({node for pair in pairs for node in pair}))
    compounds.add_edges_from(pairs)
    heads = [
        node
        for node in nx.dfs_postorder_nodes(compounds)
        if compounds.out_degree(node)
    ]
    for head in heads:
        member_ids = [head] + [edge.target for edge in graph.children(head, "compound")]
        members = [graph.nodes[member_id] for member_id in member_ids]
        group = SetOfSingletons(id=head, entities=members, group_type=GroupType.GROUPING)
        resolved = resolve_multiword(group, graph.meu)
        graph.edges = [
            edge
            for edge in graph.edges
            if not (edge.label == "compound" and edge.source == head)
        ]
        _replace(graph, set(member_ids), resolved, head)
        logger.debug("grouped %s into %s", member_ids, resolved.named_entity)


def _wrap_negations(graph: DepGraph) -> None:
    for node_id in sorted(graph.nodes):
        entity = graph.nodes.get(node_id)
        if entity is None or entity.is_verb:
            continue
        markers = graph.children(node_id, *NEGATION_LABELS)
        if not markers:
            continue
        _drop_nodes(graph, {edge.target for edge in markers})
        wrapper = SetOfSingletons(
            id=graph.next_id(), entities=[entity], group_type=GroupType.NOT
        )
        for edge in graph.edges:
            if edge.target == node_id:
                edge.target = wrapper.id
        graph.nodes = {
            (wrapper.id if key == node_id else key): (wrapper if key == node_id else value)
            for key, value in graph.nodes.items()
        }


def _conjunction_type(graph: DepGraph, member_ids: list[int]) -> tuple[GroupType, set]:
    group_type, markers = GroupType.AND, set()
    entity_ids = set(member_ids)
    for member_id in member_ids:
        entity_ids.update(leaf.id for leaf in graph.nodes[member_id].leaves())
    for entity_id in sorted(entity_ids):
        for edge in graph.children(entity_id, "cc", "cc_preconj"):
            marker = graph.nodes.get(edge.target)
            markers.add(edge.target)
            if marker is not None and marker.lemma.lower() in CONJUNCTIONS:
                found = CONJUNCTIONS[marker.lemma.lower()]
                if group_type != GroupType.NEITHER:
                    group_type = found
    return group_type, markers


def _group_conjunctions(graph: DepGraph) -> None:
    conj_targets = {edge.target for edge in graph.edges if edge.label == "conj"}
    heads = [
        node_id
        for node_id in sorted(graph.nodes)
        if node_id not in conj_targets
        and graph.children(node_id, "conj")
        and not graph.nodes[node_id].is_verb
    ]
    for head in heads:
        # Breadth-first over conj chains.
        member_ids, queue = [head], [head]
        while queue:
            current = queue.pop(0)
            for edge in graph.children(current, "conj"):
                member_ids.append(edge.target)
                queue.append(edge.target)
        group_type, markers = _conjunction_type(graph, member_ids)
        _drop_nodes(graph, markers)
        members = sorted((graph.nodes[m] for m in member_ids), key=lambda e: e.min)
        group = SetOfSingletons(
            id=graph.next_id(),
            entities=members,
            group_type=group_type,
            confidence=math.prod(member.confidence for member in members),
        )
        graph.edges = [
            edge
            for edge in graph.edges
            if not (edge.label == "conj" and edge.source in member_ids)
        ]
        for edge in graph.edges:
            if edge.target == head:
                edge.target = group.id
        graph.nodes = {
            (group.id if key == head else key): (group if key == head else value)
            for key, value in graph.nodes.items()
            if key == head or key not in member_ids
        }
        logger.debug("coordinated %s as %s", member_ids, group_type.value)


def _group_indirects(graph: DepGraph) -> None:
    for node_id in sorted(graph.nodes):
        entity = graph.nodes.get(node_id)
        if entity is None or not entity.is_verb:
            continue
        obliques = graph.children(node_id, "obl")
        if len(obliques) < 2:
            continue
        targets = sorted((graph.nodes[edge.target] for edge in obliques), key=lambda e: e.min)
        group = SetOfSingletons(
            id=graph.next_id(), entities=targets, group_type=GroupType.MULTIINDIRECT
        )
        target_ids = {target.id for target in targets}
        graph.edges = [edge for edge in graph.edges if edge not in obliques]
        graph.nodes = {
            key: value for key, value in graph.nodes.items() if key not in target_ids
        }
        graph.nodes[group.id] = group
        graph.edges.append(DepEdge(source=node_id, target=group.id, label="obl"))


def coalesce_groups(graph: DepGraph, kb=None, resolve: bool = True) -> DepGraph:
    """
    Resolves multi-word entities and groups coordinations into sets.

    Passes run in order: particles, compounds (depth-first, so children
    resolve before their parents), negation wrappers, coordination and
    multiple adverbial attachments. Nodes are visited in id order.

    Args:
        graph (DepGraph): The loaded dependency graph; it is not modified.
        kb (KnowledgeBase, optional): Used to lemmatize node names.
        resolve (bool): When False only lemmatization runs; compounds stay
            separate nodes and conjunctions stay plain edges.

    Returns:
        DepGraph: The coalesced graph.
    """
    graph = copy.deepcopy(graph)
    annotate_types(graph, kb, resolve)
    if not resolve:
        return graph
    _merge_particles(graph)
    _group_compounds(graph)
    _wrap_negations(graph)
    _group_conjunctions(graph)
    _group_indirects(graph)
    check_acyclic(graph)
    return graph
