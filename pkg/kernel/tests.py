from django.conf import settings
from django.test import SimpleTestCase

from apriori.models import DepEdge, Singleton
from apriori.utils import build_dep_graph, coalesce_groups
from FactoidEntailment_project.exceptions import NoKernelConstructible
from kb.utils import load_kb
from rewrite.models import IntermediateGraph, VisitOrder
from rewrite.utils import build_intermediate

from .models import Relationship, is_variable, variable
from .utils import (
    construct_final_kernel,
    get_kernel_edges,
    get_topological_root_ids,
    render_kernel,
)


def node(node_id, name, pos, **fields):
    return {"id": node_id, "name": name, "pos": pos, **fields}


def edge(source, target, label):
    return {"source": source, "target": target, "label": label}


def verb_edge(source, target, label, verb_id):
    return DepEdge(source, target, label, label_type="verb", verb_id=verb_id)


class KernelTestCase(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = load_kb(settings.KB_PATH)

    def kernel(self, text, nodes, edges, meu=()):
        graph = build_dep_graph({"text": text, "nodes": nodes, "edges": edges, "meu": list(meu)})
        return construct_final_kernel(build_intermediate(coalesce_groups(graph, self.kb), self.kb), self.kb)


class GetKernelEdgesTests(KernelTestCase):
    def test_preposition_label(self):
        edges = [verb_edge(None, 6, "to steal", 3), verb_edge(1, 3, "like", 2)]
        nodes = {3: Singleton(3, "steal", pos="VB"), 6: Singleton(6, "husband")}
        kept, true_targets, labels = get_kernel_edges(edges, nodes, self.kb)
        self.assertEqual(kept, edges)
        self.assertEqual(labels, {"to steal"})
        self.assertEqual(true_targets, {6})

    def test_label_equal_to_preposition(self):
        _, _, labels = get_kernel_edges([verb_edge(1, 2, "to", 3)], {}, self.kb)
        self.assertEqual(labels, set())

    def test_dep_edge_skipped(self):
        edges = [DepEdge(1, 2, "dep"), DepEdge(1, 2, "obl"), DepEdge(1, 3, "dep")]
        kept, _, _ = get_kernel_edges(edges, {}, self.kb)
        self.assertEqual([e.label for e in kept], ["obl", "dep"])

    def test_gerund_target_promoted(self):
        edges = [verb_edge(1, 2, "like", 5), verb_edge(None, None, "go", 2)]
        nodes = {1: Singleton(1, "Alice"), 2: Singleton(2, "going", pos="VBG")}
        _, true_targets, _ = get_kernel_edges(edges, nodes, self.kb)
        self.assertEqual(true_targets, set())

    def test_empty(self):
        self.assertEqual(get_kernel_edges([], {}, self.kb), ([], set(), set()))


class GetTopologicalRootIdsTests(SimpleTestCase):
    def test_single_kernel(self):
        roots = get_topological_root_ids([verb_edge(1, 3, "play", 2)], {3}, VisitOrder([1, 3, 2]))
        self.assertEqual(roots, [2])

    def test_visit_order(self):
        edges = [verb_edge(None, None, "become", 1), verb_edge(None, 6, "to answer", 4)]
        self.assertEqual(get_topological_root_ids(edges, {6}, VisitOrder([4, 2, 1, 6])), [4, 1])

    def test_fallback(self):
        self.assertEqual(get_topological_root_ids([], set(), VisitOrder([3, 1])), [1])
        self.assertEqual(get_topological_root_ids([], set(), VisitOrder([])), [])


class ConstructFinalKernelTests(KernelTestCase):
    def test_transitive(self):
        kernel = self.kernel(
            "Alice plays football",
            [node(1, "Alice", "NNP", type="ENTITY"), node(2, "plays", "VBZ", type="VERB"), node(3, "football", "NN", type="NOUN")],
            [edge(2, 1, "nsubj"), edge(2, 3, "obj")],
        )
        self.assertEqual(render_kernel(kernel), "play(Alice, football)")

    def test_negated(self):
        kernel = self.kernel(
            "Alice does not play football",
            [
                node(1, "Alice", "NNP", type="ENTITY"),
                node(2, "does", "VBZ"),
                node(3, "not", "RB"),
                node(4, "play", "VB", type="VERB"),
                node(5, "football", "NN", type="NOUN"),
            ],
            [edge(4, 1, "nsubj"), edge(4, 2, "aux"), edge(4, 3, "neg"), edge(4, 5, "obj")],
        )
        self.assertTrue(kernel.negated)
        self.assertEqual(render_kernel(kernel), "NOT(play(Alice, football))")

    def test_verb_alone(self):
        kernel = self.kernel("work", [node(1, "work", "VB", type="VERB")], [])
        self.assertEqual(render_kernel(kernel), "work(?)")
        self.assertTrue(is_variable(kernel.source))
        self.assertEqual(kernel.source.id, -1)

    def test_intransitive_with_adverb(self):
        kernel = self.kernel(
            "work alone",
            [node(1, "work", "VB", type="VERB"), node(2, "alone", "RB")],
            [edge(1, 2, "advmod")],
        )
        self.assertEqual(render_kernel(kernel), "work(?)[RB: alone]")

    def test_motion_across(self):
        kernel = self.kernel(
            "going across the street",
            [
                node(1, "going", "VBG", type="VERB"),
                node(3, "street", "NN", type="NOUN", properties={"2": ["across"], "det": ["the"]}),
            ],
            [edge(1, 3, "obl")],
        )
        self.assertEqual(
            render_kernel(kernel),
            "go(?)[SPACE: street[type: motion through place, det: the]]",
        )

    def test_relative_pronoun(self):
        kernel = self.kernel(
            "Music that is not classical",
            [
                node(1, "Music", "NN", type="NOUN"),
                node(2, "that", "WDT"),
                node(3, "is", "VBZ", type="VERB"),
                node(4, "not", "RB"),
                node(5, "classical", "JJ"),
            ],
            [edge(1, 5, "acl_relcl"), edge(5, 2, "nsubj"), edge(5, 3, "cop"), edge(5, 4, "neg")],
        )
        self.assertEqual(
            render_kernel(kernel), "be(Music, ?)[SENTENCE: be(Music, NOT(classical))]"
        )
        self.assertEqual(kernel.source.id, 1)
        self.assertEqual(kernel.nested()[0].source.id, 1)

    def test_coordinated_adverbial_leaves_subject(self):
        kernel = self.kernel(
            "There is traffic but not in the centre",
            [
                node(1, "There", "EX"),
                node(2, "is", "VBZ", type="VERB"),
                node(3, "traffic", "NN", type="NOUN"),
                node(4, "but", "CC"),
                node(5, "not", "RB"),
                node(7, "centre", "NN", type="NOUN", properties={"6": ["in"], "det": ["the"]}),
            ],
            [edge(2, 1, "expl"), edge(2, 3, "nsubj"), edge(3, 7, "conj"), edge(7, 4, "cc"), edge(7, 5, "neg")],
        )
        self.assertEqual(kernel.source.named_entity, "traffic")
        self.assertEqual(
            render_kernel(kernel), "be(traffic, ?)[SPACE: AND(NOT(centre[type: stay in place, det: the]))]"
        )

    def test_small_clause(self):
        kernel = self.kernel(
            "making you angry",
            [node(1, "making", "VBG", type="VERB"), node(2, "you", "PRP"), node(3, "angry", "JJ")],
            [edge(1, 3, "xcomp"), edge(3, 2, "nsubj")],
        )
        self.assertEqual(render_kernel(kernel), "make(?, you)[JJ: angry]")

    def test_nested_clause(self):
        kernel = self.kernel(
            "attempt to steal someone's husband",
            [
                node(1, "attempt", "VB", type="VERB"),
                node(2, "to", "TO"),
                node(3, "steal", "VB", type="VERB"),
                node(4, "someone", "NN", properties={"5": ["'s"]}),
                node(6, "husband", "NN", type="NOUN"),
            ],
            [edge(1, 3, "xcomp"), edge(3, 2, "mark"), edge(3, 6, "obj"), edge(6, 4, "nmod_poss")],
        )
        self.assertEqual(
            render_kernel(kernel),
            "attempt(?2)[SENTENCE: to steal(?1, husband[extra: someone])]",
        )

    def test_semi_modal_shares_variable(self):
        kernel = self.kernel(
            "become able to answer more questions",
            [
                node(1, "become", "VB", type="VERB"),
                node(2, "able", "JJ"),
                node(3, "to", "TO"),
                node(4, "answer", "VB", type="VERB"),
                node(5, "more", "JJR"),
                node(6, "questions", "NNS", type="NOUN"),
            ],
            [edge(1, 2, "xcomp"), edge(2, 4, "xcomp"), edge(4, 3, "mark"), edge(4, 6, "obj"), edge(6, 5, "amod")],
        )
        self.assertEqual(
            render_kernel(kernel),
            "become(?[JJ: able])[SENTENCE: to answer(?[JJ: able], questions[JJ: more])]",
        )
        self.assertIs(kernel.source, kernel.nested()[0].source)

    def test_multiple_obliques(self):
        kernel = self.kernel(
            "traffic flows in Newcastle on Saturdays",
            [
                node(1, "traffic", "NN", type="NOUN"),
                node(2, "flows", "VBZ", type="VERB"),
                node(4, "Newcastle", "NNP", properties={"3": ["in"]}),
                node(6, "Saturdays", "NNPS", properties={"5": ["on"]}),
            ],
            [edge(2, 1, "nsubj"), edge(2, 4, "obl"), edge(2, 6, "obl")],
            meu=[
                {"start": 17, "end": 26, "text": "Newcastle", "type": "GPE", "source": "GeoNames", "confidence": 1.0},
                {"start": 30, "end": 39, "text": "Saturdays", "type": "DATE", "source": "SUTime", "confidence": 1.0},
            ],
        )
        self.assertEqual(
            render_kernel(kernel),
            "flow(traffic)[SPACE: Newcastle[type: stay in place], TIME: Saturdays[type: defined]]",
        )

    def test_phrasal_verb(self):
        kernel = self.kernel(
            "shut down the centre",
            [
                node(1, "shut", "VB", type="VERB"),
                node(2, "down", "RB"),
                node(4, "centre", "NN", type="NOUN", properties={"det": ["the"]}),
            ],
            [edge(1, 2, "advmod"), edge(1, 4, "obj")],
        )
        self.assertEqual(render_kernel(kernel), "shut down(?, centre[det: the])")

    def test_property_kernel(self):
        kernel = self.kernel(
            "the busy city",
            [node(1, "busy", "JJ"), node(2, "city", "NN", type="NOUN", properties={"det": ["the"]})],
            [edge(2, 1, "amod")],
        )
        self.assertEqual(render_kernel(kernel), "be(city[JJ: busy, det: the], ?)")

    def test_passive_matches_active(self):
        active = self.kernel(
            "the cat eats the mouse",
            [node(1, "cat", "NN", type="NOUN"), node(2, "eats", "VBZ", type="VERB"), node(3, "mouse", "NN", type="NOUN")],
            [edge(2, 1, "nsubj"), edge(2, 3, "obj")],
        )
        passive = self.kernel(
            "the mouse is eaten by the cat",
            [
                node(3, "mouse", "NN", type="NOUN"),
                node(4, "is", "VBZ", type="VERB"),
                node(2, "eaten", "VBN", type="VERB"),
                node(1, "cat", "NN", type="NOUN", properties={"5": ["by"]}),
            ],
            [edge(2, 3, "nsubj_pass"), edge(2, 4, "aux_pass"), edge(2, 1, "obl_agent")],
        )
        self.assertEqual(render_kernel(passive), render_kernel(active))
        self.assertEqual(render_kernel(active), "eat(cat, mouse)")

    def test_no_duplicates_of_arguments(self):
        kernel = self.kernel(
            "Alice plays football",
            [node(1, "Alice", "NNP", type="ENTITY"), node(2, "plays", "VBZ", type="VERB"), node(3, "football", "NN", type="NOUN")],
            [edge(2, 1, "nsubj"), edge(2, 3, "obj"), edge(2, 3, "dep")],
        )
        self.assertEqual(kernel.properties, {})

    def test_nothing_to_build(self):
        with self.assertRaises(NoKernelConstructible):
            construct_final_kernel(IntermediateGraph(text="", nodes={}, edges=[]), self.kb)


class RelationshipTests(SimpleTestCase):
    def test_nested(self):
        inner = Relationship(source=variable(1))
        outer = Relationship(source=variable(2), properties={"SENTENCE": [inner], "JJ": [Singleton(3, "able")]})
        self.assertEqual(outer.nested(), [inner])
        self.assertEqual(outer.label, "None")
