import copy
import logging
from collections import defaultdict

from attrs import define, evolve, field

from apriori.models import GroupType, SetOfSingletons, Singleton, is_position_key
from FactoidEntailment_project.exceptions import NoKernelConstructible
from logifun.utils import rewrite_properties_logically
from rewrite.models import FOLDED_LABELS, IntermediateGraph, VisitOrder
from rewrite.utils import topo_sort_filter

from .models import Relationship, is_variable, property_key, variable

logger = logging.getLogger(__name__)

NOUN_MODIFIER_LABELS = ("nmod", "nmod_poss")
COORDINATIONS = (GroupType.AND, GroupType.OR)
SKIPPED_LABELS = FOLDED_LABELS | {"inherit_edge", "acl_relcl", *NOUN_MODIFIER_LABELS}


def _opens_with_preposition(label: str, kb) -> bool:
    words = label.lower().split()
    return len(words) > 1 and words[0] in kb.prototypical_prepositions


def _is_adjective(entity) -> bool:
    return isinstance(entity, Singleton) and (
        entity.pos.startswith("JJ") or entity.type == "ADJECTIVE"
    )


def _be(anchor_id: int = 0) -> Singleton:
    return Singleton(id=anchor_id, named_entity="be", type="VERB")


def get_kernel_edges(edges: list, nodes: dict, kb) -> tuple[list, set, set]:
    """
    Selects the edges kernels are built from.

    A ``dep`` edge is dropped when a more precise label joins the same two
    nodes. Verb edges whose label opens with a prototypical preposition
    (``to steal``) keep their verb as a root even when another verb targets
    it, and so do gerund targets.

    Args:
        edges (list): Edges of the intermediate graph.
        nodes (dict): Top-level nodes of the intermediate graph.
        kb (KnowledgeBase): Supplies the prototypical prepositions.

    Returns:
        tuple: The kept edges, the ids that only act as verb targets, and the
        preposition-bearing verb labels.
    """
    labelled = {(edge.source, edge.target) for edge in edges if edge.label != "dep"}
    kept = [
        edge
        for edge in edges
        if edge.label != "dep" or (edge.source, edge.target) not in labelled
    ]
    verb_edges = [edge for edge in kept if edge.label_type == "verb"]
    preposition_labels = {
        edge.label for edge in verb_edges if _opens_with_preposition(edge.label, kb)
    }
    true_targets = set()
    for edge in verb_edges:
        target = nodes.get(edge.target)
        if edge.target == edge.verb_id or target is None:
            continue
        if isinstance(target, Singleton) and target.pos == "VBG":
            continue
        true_targets.add(edge.target)
    promoted = {edge.verb_id for edge in verb_edges if edge.label in preposition_labels}
    return kept, true_targets - promoted, preposition_labels


def get_topological_root_ids(
    edges: list, true_targets: set, order: VisitOrder, nodes: dict | None = None
) -> list[int]:
    """
    Kernel roots in visit order, so nested clauses come before the clauses holding them.

    Falls back to nodes already carrying a kernel, then to the last visited node.
    """
    candidates = []
    for edge in edges:
        if edge.label_type != "verb" or edge.verb_id in true_targets:
            continue
        if nodes is not None and edge.verb_id not in nodes:
            continue
        if edge.verb_id not in candidates:
            candidates.append(edge.verb_id)
    if not candidates and nodes is not None:
        candidates = [
            node_id
            for node_id, entity in nodes.items()
            if getattr(entity, "kernel", None) is not None
        ]
    if not candidates and order.ids:
        candidates = [order.ids[-1]]
    return sorted(candidates, key=order.position)


@define
class KernelBuilder:
    """
    Builds the kernels of one sentence.

    Attributes:
        graph (IntermediateGraph): The graph kernels are drawn from.
        kb (KnowledgeBase): Verb transitivity and semi-modals.
        kernels (dict): Root id to the kernel built for it.
        consumed (set): Root ids whose kernel is nested in another kernel.
        variables (int): Existential variables allocated so far.
    """

    graph: IntermediateGraph
    kb: object
    kernels: dict = field(factory=dict)
    consumed: set = field(factory=set)
    variables: int = 0

    def fresh(self) -> Singleton:
        self.variables += 1
        return variable(self.variables)

    def _nest(self, node_id: int, properties: dict) -> None:
        properties["SENTENCE"].append(self.kernels[node_id])
        self.consumed.add(node_id)

    def _anchor_ids(self, node_id: int) -> list[int]:
        entity = self.graph.find(node_id)
        ids = [node_id]
        if isinstance(entity, SetOfSingletons):
            ids.extend(leaf.id for leaf in entity.leaves())
        return ids

    def _argument(self, node_id: int | None, properties: dict):
        if node_id is None:
            return None
        if node_id in self.kernels:
            self._nest(node_id, properties)
            return None
        entity = self.graph.find(node_id)
        if isinstance(entity, SetOfSingletons) and entity.group_type in COORDINATIONS:
            entity = self._split_adverbials(entity, properties)
        if entity is not None and entity.prepositions():
            properties[property_key(entity)].append(entity)
            return None
        return entity

    def _split_adverbials(self, group: SetOfSingletons, properties: dict):
        """
        ``traffic but not in the centre``: prepositional members leave the argument.

        They stay coordinated under the group's type as a property; the plain
        members remain the argument.
        """
        plain = [member for member in group.entities if not member.prepositions()]
        adverbial = [member for member in group.entities if member.prepositions()]
        if not plain or not adverbial:
            return group
        split = evolve(group, entities=adverbial)
        properties[property_key(split)].append(split)
        if len(plain) == 1:
            return plain[0]
        return evolve(group, id=self.graph.next_id(), entities=plain)

    def _nest_descendants(self, node_id: int, properties: dict) -> None:
        stack, seen = [node_id], set()
        while stack:
            current = stack.pop()
            for edge in self.graph.children(current):
                if edge.label_type == "verb" or edge.target in seen:
                    continue
                seen.add(edge.target)
                if edge.target in self.kernels and edge.target not in self.consumed:
                    self._nest(edge.target, properties)
                else:
                    stack.append(edge.target)

    def _gather(self, node_id: int, properties: dict, target):
        if node_id in self.kernels:
            if node_id not in self.consumed:
                self._nest(node_id, properties)
            return target
        child = self.graph.find(node_id)
        if child is None:
            return target
        if isinstance(child, SetOfSingletons) and child.group_type == GroupType.MULTIINDIRECT:
            for member in child.entities:
                properties[property_key(member)].append(member)
        elif _is_adjective(child):
            subjects = self.graph.children(node_id, "nsubj")
            if subjects and target is None:
                target = self.graph.find(subjects[0].target)
            properties["JJ"].append(child)
            self._nest_descendants(node_id, properties)
        else:
            properties[property_key(child)].append(child)
        return target

    def _gather_children(self, anchor_id: int, skipped: tuple, properties: dict, target):
        for anchor in self._anchor_ids(anchor_id):
            for edge in self.graph.children(anchor):
                if edge.label_type == "verb" or edge.label in SKIPPED_LABELS:
                    continue
                if edge.target in skipped:
                    continue
                target = self._gather(edge.target, properties, target)
        return target

    def _attach_modifiers(self, kernel: Relationship) -> None:
        holders = [kernel.source, kernel.target]
        for key, values in kernel.properties.items():
            if key not in ("SENTENCE", "nmod"):
                holders.extend(values)
        for holder in holders:
            if holder is None or isinstance(holder, Relationship) or is_variable(holder):
                continue
            for leaf in holder.leaves():
                for edge in self.graph.children(leaf.id, *NOUN_MODIFIER_LABELS):
                    dependent = self.graph.find(edge.target)
                    if dependent is not None:
                        kernel.properties.setdefault("nmod", []).append(
                            Relationship(source=leaf, target=dependent)
                        )

    def _property_kernel(self, root_id: int) -> Relationship:
        root = self.graph.find(root_id)
        if root is None:
            raise NoKernelConstructible(f"no node {root_id} to build a kernel from", stage="kernel")
        properties = defaultdict(list)
        target = self._gather_children(root_id, (), properties, None)
        return Relationship(source=root, target=target, edge_label=_be(), properties=dict(properties))

    def assign(self, root_id: int) -> Relationship:
        edge = self.graph.verb_edge(root_id)
        if edge is None:
            kernel = self._property_kernel(root_id)
        else:
            kernel = self._verb_kernel(edge)
        self._attach_modifiers(kernel)
        logger.debug("kernel for %s: %s", root_id, render_kernel(kernel))
        return kernel

    def _verb_kernel(self, edge) -> Relationship:
        verb = self.graph.find(edge.verb_id)
        base = edge.label.removeprefix("to ")
        properties = defaultdict(list)
        intransitive = self.kb.is_transitive(base) is False
        source = self._argument(edge.source, properties)
        target = self._argument(edge.target, properties)
        if target is not None and intransitive:
            properties[property_key(target)].append(target)
            target = None
        target = self._gather_children(
            edge.verb_id, (edge.source, edge.target), properties, target
        )
        if source is None:
            nested = [k.source for k in properties.get("SENTENCE", []) if is_variable(k.source)]
            if nested and self.kb.is_semi_modal(base):
                # The complement adjective qualifies the shared subject.
                source = nested[0]
                if properties.get("JJ"):
                    source.properties.setdefault("JJ", []).extend(properties.pop("JJ"))
            else:
                source = self.fresh()
        if isinstance(verb, Singleton) and verb.is_verb:
            label = evolve(verb, lemma=edge.label, properties={})
        else:
            label = Singleton(id=edge.verb_id, named_entity=edge.label, type="VERB")
        kernel = Relationship(
            source=source,
            target=target,
            edge_label=label,
            negated=edge.negated,
            intransitive=intransitive and target is None,
            properties=dict(properties),
        )
        if isinstance(verb, Singleton) and verb.is_verb:
            verb.kernel = kernel
        return kernel


def assign_kernel(
    graph: IntermediateGraph, root_id: int, kb, builder: KernelBuilder | None = None
) -> Relationship:
    """
    Builds the kernel rooted at ``root_id``.

    The root's verb edge gives the source and the target: a missing source
    becomes a fresh existential variable, a source or target introduced by a
    preposition moves to the properties, and so does the target of a verb the
    knowledge base marks intransitive. Without a verb edge the root becomes
    the source of a ``be`` kernel gathering its children.

    Args:
        graph (IntermediateGraph): The sentence's intermediate graph.
        root_id (int): Id of the verb, or of the node, the kernel is rooted at.
        kb (KnowledgeBase): The loaded knowledge base.
        builder (KernelBuilder, optional): Shares variables and built kernels across roots.

    Returns:
        Relationship: The kernel.

    Raises:
        NoKernelConstructible: If ``root_id`` names no node.
    """
    builder = builder or KernelBuilder(graph, kb)
    kernel = builder.assign(root_id)
    builder.kernels[root_id] = kernel
    return kernel


def _replace_relative_pronouns(final: Relationship, graph, builder: KernelBuilder, kb) -> Relationship:
    for edge in graph.edges:
        if edge.label != "acl_relcl":
            continue
        clause, noun = builder.kernels.get(edge.target), graph.find(edge.source)
        if clause is None or noun is None:
            continue
        for slot in ("source", "target"):
            value = getattr(clause, slot)
            if isinstance(value, Singleton) and value.lemma.lower() in kb.pronouns:
                setattr(clause, slot, copy.deepcopy(noun))
        if clause is final:
            final = Relationship(
                source=copy.deepcopy(noun), edge_label=_be(), properties={"SENTENCE": [clause]}
            )
    return final


def _remove_duplicates(kernel: Relationship) -> None:
    """Drops property entities repeating the kernel's own source or target."""
    taken = {entity.id for entity in (kernel.source, kernel.target) if entity is not None}
    for key in list(kernel.properties):
        kept = []
        for value in kernel.properties[key]:
            if isinstance(value, Relationship):
                kept.append(value)
            elif value.id not in taken:
                taken.add(value.id)
                kept.append(value)
        if kept:
            kernel.properties[key] = kept
        else:
            del kernel.properties[key]
    for nested in kernel.nested():
        _remove_duplicates(nested)


def _merge_phrasal_verbs(kernel: Relationship, kb) -> None:
    adverbs = kernel.properties.get("RB", [])
    if kernel.edge_label is not None:
        for adverb in list(adverbs):
            phrase = f"{kernel.edge_label.lemma} {adverb.lemma}"
            if phrase.lower() in kb.phrasal_verbs:
                kernel.edge_label = evolve(kernel.edge_label, lemma=phrase)
                adverbs.remove(adverb)
    if "RB" in kernel.properties and not adverbs:
        del kernel.properties["RB"]
    for nested in kernel.nested():
        _merge_phrasal_verbs(nested, kb)


def construct_final_kernel(graph: IntermediateGraph, kb) -> Relationship:
    """
    Turns a sentence's intermediate graph into one nested kernel.

    Roots are built deepest first; a kernel found among another kernel's
    arguments or children nests there as a ``SENTENCE`` property. Kernels left
    over nest inside the last one built. The result then goes through relative
    pronoun replacement, duplicate removal, logical rewriting and phrasal verb
    merging, in this order.

    Args:
        graph (IntermediateGraph): The sentence's intermediate graph; it is not modified.
        kb (KnowledgeBase): The loaded knowledge base.

    Returns:
        Relationship: The final kernel.

    Raises:
        NoKernelConstructible: If the graph has nothing to root a kernel at.
        CyclicGraphError: If the graph has a cycle.
    """
    graph = copy.deepcopy(graph)
    order = topo_sort_filter(graph)
    edges, true_targets, _ = get_kernel_edges(graph.edges, graph.nodes, kb)
    graph.edges = edges
    roots = get_topological_root_ids(edges, true_targets, order, graph.nodes)
    if not roots:
        raise NoKernelConstructible(f"nothing to build a kernel from in '{graph.text}'", stage="kernel")

    builder = KernelBuilder(graph, kb)
    for root_id in roots:
        assign_kernel(graph, root_id, kb, builder)

    pending = [root_id for root_id in roots if root_id not in builder.consumed]
    final = builder.kernels[pending[-1]]
    for root_id in pending[:-1]:
        final.properties.setdefault("SENTENCE", []).append(builder.kernels[root_id])
        builder.consumed.add(root_id)

    final = _replace_relative_pronouns(final, graph, builder, kb)
    _remove_duplicates(final)
    rewrite_properties_logically(final, kb)
    _merge_phrasal_verbs(final, kb)
    return final


# Entity keys shown first, in this order; the rest follow sorted.
LEADING_KEYS = ("type", "extra")


def _entity_keys(properties: dict) -> list[str]:
    keys = [key for key, values in properties.items() if values and not is_position_key(key)]
    rank = {key: index for index, key in enumerate(LEADING_KEYS)}
    return sorted(keys, key=lambda key: (rank.get(key, len(rank)), key))


def _variable_ids(entity, found: set) -> set:
    if isinstance(entity, Relationship):
        for slot in (entity.source, entity.target):
            _variable_ids(slot, found)
        for values in entity.properties.values():
            for value in values:
                _variable_ids(value, found)
    elif isinstance(entity, SetOfSingletons):
        for member in entity.entities:
            _variable_ids(member, found)
    elif is_variable(entity):
        found.add(entity.id)
    return found


def render_entity(entity, anonymous: bool = False) -> str:
    """
    Renders an entity as ``name[type: ..., extra: ..., key: value, ...]``.

    With ``anonymous`` set, variables render as a bare ``?``.
    """
    if isinstance(entity, Relationship):
        return _render_kernel(entity, anonymous)
    if isinstance(entity, SetOfSingletons):
        members = ", ".join(render_entity(e, anonymous) for e in entity.entities)
        return f"{entity.group_type.value}({members})"
    name = "?" if anonymous and is_variable(entity) else entity.named_entity
    shown = []
    for key in _entity_keys(entity.properties):
        values = ", ".join(
            value if isinstance(value, str) else render_entity(value, anonymous)
            for value in entity.properties[key]
        )
        shown.append(f"{key}: {values}")
    return name + (f"[{', '.join(shown)}]" if shown else "")


def _render_kernel(kernel: Relationship, anonymous: bool) -> str:
    source = render_entity(kernel.source, anonymous) if kernel.source is not None else "?"
    if kernel.target is not None:
        text = f"{kernel.label}({source}, {render_entity(kernel.target, anonymous)})"
    elif kernel.intransitive:
        text = f"{kernel.label}({source})"
    else:
        text = f"{kernel.label}({source}, ?)"
    shown = [
        f"{key}: {render_entity(value, anonymous)}"
        for key in sorted(kernel.properties)
        for value in kernel.properties[key]
    ]
    if shown:
        text += f"[{', '.join(shown)}]"
    return f"NOT({text})" if kernel.negated else text


def render_kernel(kernel: Relationship) -> str:
    """
    Renders a kernel as ``label(source, target)[KEY: value, ...]``.

    Intransitive kernels show their source only and any other missing
    argument reads ``?``. A kernel with a single variable shows it as ``?``,
    several variables keep their numbers. A negated kernel is wrapped in
    ``NOT(...)``.
    """
    return _render_kernel(kernel, anonymous=len(_variable_ids(kernel, set())) == 1)
