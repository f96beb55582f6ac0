"""
Logical rewriting of kernel properties.

Entity-valued properties reached through a preposition are renamed after the
logical function the KB associates with them (SPACE, TIME, ...), and noun
modifiers become the ``extra`` specification of their head.
"""

import logging
from collections import defaultdict

from apriori.models import is_position_key
from kb.models import AttachTo, KernelContext, NodeContext
from kb.utils import match_logical_rule
from kernel.models import Relationship, property_key

logger = logging.getLogger(__name__)


def node_context(entity, kb) -> NodeContext:
    leaves = list(entity.leaves())
    return NodeContext(
        prepositions=frozenset(p for leaf in leaves for p in leaf.prepositions()),
        source=next((leaf.source for leaf in leaves if leaf.source), None),
        abstract=any(kb.is_abstract(leaf.lemma) for leaf in leaves),
    )


def _strip_prepositions(entity, prepositions: frozenset) -> None:
    for leaf in entity.leaves():
        for key in [k for k in leaf.properties if is_position_key(k)]:
            if {str(value).lower() for value in leaf.properties[key]} & prepositions:
                del leaf.properties[key]


def rewrite_node_logically(entity, kernel_ctx: KernelContext, kb) -> str | None:
    """
    Finds the logical function an entity-valued property stands for.

    On a match every leaf of ``entity`` is typed after the rule and loses the
    prepositions the rule consumed.

    Args:
        entity (Singleton | SetOfSingletons): The property value.
        kernel_ctx (KernelContext): The verb of the kernel holding the property.
        kb (KnowledgeBase): The knowledge base.

    Returns:
        str | None: The new property key, or None when no kernel-level function applies.
    """
    rule = match_logical_rule(kernel_ctx, node_context(entity, kb), kb)
    function = kb.function_for(rule) if rule is not None else None
    if function is None or function.attach_to != AttachTo.KERNEL:
        return None
    for leaf in entity.leaves():
        leaf.properties["type"] = [rule.construct_property]
    _strip_prepositions(entity, rule.prepositions)
    logger.debug("%s -> %s (rule %s)", entity.named_entity, function.argument, rule.rule_order)
    return function.argument


def _specify(kernel: Relationship, relation: Relationship, kernel_ctx: KernelContext, kb) -> bool:
    head, dependent = relation.source, relation.target
    rule = match_logical_rule(kernel_ctx, node_context(dependent, kb), kb)
    function = kb.function_for(rule) if rule is not None else None
    if function is None or function.attach_to != AttachTo.SINGLETON:
        return False
    _strip_prepositions(dependent, rule.prepositions)
    holder, value = (dependent, head) if rule.construct_property == "inverse" else (head, dependent)
    values = holder.properties.setdefault(function.argument, [])
    if value.lemma not in values:
        values.append(value.lemma)
    for slot in ("source", "target"):
        current = getattr(kernel, slot)
        if current is not None and current is not holder and current.id == head.id:
            setattr(kernel, slot, holder)
    return True


def rewrite_properties_logically(kernel: Relationship, kb) -> Relationship:
    """
    Rewrites a kernel's properties, and those of its nested kernels, in place.

    Noun modifiers matching a Singleton-level rule turn into ``extra`` on
    their head; the others become plain properties. Rewriting a kernel twice
    gives the same kernel.

    Args:
        kernel (Relationship): The kernel to rewrite.
        kb (KnowledgeBase): The knowledge base.

    Returns:
        Relationship: The same kernel.
    """
    verb = kernel.edge_label.lemma.removeprefix("to ") if kernel.edge_label else None
    kernel_ctx = KernelContext(verb=verb)
    for relation in kernel.properties.pop("nmod", []):
        if not _specify(kernel, relation, kernel_ctx, kb):
            kernel.properties.setdefault(property_key(relation.target), []).append(relation.target)

    rewritten = defaultdict(list)
    for key, values in kernel.properties.items():
        for value in values:
            if isinstance(value, Relationship):
                rewritten[key].append(value)
                continue
            rewritten[rewrite_node_logically(value, kernel_ctx, kb) or key].append(value)
    kernel.properties = dict(rewritten)

    for nested in kernel.nested():
        rewrite_properties_logically(nested, kb)
    return kernel
