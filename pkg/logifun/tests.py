from django.conf import settings
from django.test import SimpleTestCase

from apriori.models import GroupType, SetOfSingletons, Singleton
from kb.models import KernelContext
from kb.utils import load_kb
from kernel.models import Relationship
from kernel.utils import render_kernel

from .utils import rewrite_node_logically, rewrite_properties_logically


def word(node_id, name, preposition=None, **fields):
    properties = {f"{node_id - 0.5}": [preposition]} if preposition else {}
    return Singleton(id=node_id, named_entity=name, properties=properties, **fields)


def kernel(verb, source, target=None, **properties):
    return Relationship(
        source=source,
        target=target,
        edge_label=Singleton(id=0, named_entity=verb, type="VERB"),
        properties={key: list(values) for key, values in properties.items()},
    )


class RewritePropertiesLogicallyTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = load_kb(settings.KB_PATH)

    def test_stay_in_place(self):
        newcastle = word(4, "Newcastle", "in", type="GPE")
        rewritten = rewrite_properties_logically(
            kernel("flow", word(1, "traffic"), GPE=[newcastle]), self.kb
        )
        self.assertEqual(list(rewritten.properties), ["SPACE"])
        self.assertEqual(newcastle.properties, {"type": ["stay in place"]})

    def test_negated_place(self):
        centre = word(7, "Newcastle", "in", type="GPE")
        negation = SetOfSingletons(id=9, entities=[centre], group_type=GroupType.NOT)
        rewritten = rewrite_properties_logically(
            kernel("be", word(3, "traffic"), NOT=[negation]), self.kb
        )
        self.assertEqual(rewritten.properties, {"SPACE": [negation]})
        self.assertEqual(centre.properties["type"], ["stay in place"])

    def test_movement_verb(self):
        city = word(5, "city", "to", type="NOUN")
        rewritten = rewrite_properties_logically(kernel("go", word(1, "Alice"), NOUN=[city]), self.kb)
        self.assertEqual(rewritten.properties, {"SPACE": [city]})
        self.assertEqual(city.properties["type"], ["motion to place"])

    def test_non_movement_verb_keeps_key(self):
        city = word(5, "city", "to", type="NOUN")
        rewritten = rewrite_properties_logically(kernel("eat", word(1, "cat"), NOUN=[city]), self.kb)
        self.assertEqual(rewritten.properties, {"NOUN": [city]})
        self.assertNotIn("type", city.properties)

    def test_abstract_entity_is_not_a_place(self):
        traffic = word(6, "traffic", "for", type="NOUN")
        self.assertEqual(
            rewrite_node_logically(traffic, KernelContext(verb="close"), self.kb),
            "AIM_OBJECTIVE",
        )
        music = word(8, "music", "in", type="NOUN")
        self.assertIsNone(rewrite_node_logically(music, KernelContext(verb="be"), self.kb))

    def test_time(self):
        saturdays = word(9, "Saturdays", "on", type="DATE", source="SUTime")
        rewritten = rewrite_properties_logically(kernel("flow", word(1, "traffic"), DATE=[saturdays]), self.kb)
        self.assertEqual(rewritten.properties, {"TIME": [saturdays]})

    def test_specification(self):
        group = word(2, "group")
        reindeer = word(4, "reindeer", "of")
        rewritten = rewrite_properties_logically(
            kernel("be", group, nmod=[Relationship(source=group, target=reindeer)]), self.kb
        )
        self.assertEqual(rewritten.properties, {})
        self.assertEqual(group.properties["extra"], ["reindeer"])
        self.assertEqual(render_kernel(rewritten), "be(group[extra: reindeer], ?)")

    def test_unmatched_modifier_becomes_property(self):
        cat = word(2, "cat")
        friend = word(4, "friend", "with", type="NOUN")
        rewritten = rewrite_properties_logically(
            kernel("be", cat, nmod=[Relationship(source=cat, target=friend)]), self.kb
        )
        self.assertEqual(rewritten.properties, {"NOUN": [friend]})

    def test_nested_kernels(self):
        street = word(3, "street", "across", type="NOUN")
        inner = kernel("go", word(-1, "?1", type="VARIABLE"), NOUN=[street])
        rewrite_properties_logically(kernel("like", word(1, "Alice"), SENTENCE=[inner]), self.kb)
        self.assertEqual(inner.properties, {"SPACE": [street]})
        self.assertEqual(street.properties["type"], ["motion through place"])

    def test_idempotent(self):
        newcastle = word(4, "Newcastle", "in", type="GPE")
        group = word(2, "group")
        rewritten = rewrite_properties_logically(
            kernel(
                "flow",
                group,
                GPE=[newcastle],
                RB=[word(5, "usually", pos="RB")],
                nmod=[Relationship(source=group, target=word(6, "reindeer", "of"))],
            ),
            self.kb,
        )
        once = render_kernel(rewritten)
        self.assertEqual(render_kernel(rewrite_properties_logically(rewritten, self.kb)), once)
        self.assertEqual(list(rewritten.properties), ["SPACE", "RB"])

    def test_order_stable(self):
        places = [word(i, f"place{i}", "in", type="NOUN") for i in range(10, 15)]
        rewritten = rewrite_properties_logically(kernel("be", word(1, "it"), NOUN=places), self.kb)
        self.assertEqual(rewritten.properties["SPACE"], places)
