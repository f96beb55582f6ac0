from django.test import SimpleTestCase

from apriori.models import DepEdge, DepGraph, Singleton
from apriori.utils import build_dep_graph
from FactoidEntailment_project.exceptions import CyclicGraphError

from .utils import build_intermediate, topo_sort_filter


def verb_edges(graph):
    return [(e.label, e.source, e.target, e.negated) for e in graph.edges if e.label_type == "verb"]


ACTIVE = {
    "text": "the cat eats the mouse",
    "nodes": [
        {"id": 1, "name": "cat", "pos": "NN", "type": "NOUN", "properties": {"det": ["the"]}},
        {"id": 2, "name": "eats", "lemma": "eat", "pos": "VBZ", "type": "VERB"},
        {"id": 3, "name": "mouse", "pos": "NN", "type": "NOUN", "properties": {"det": ["the"]}},
    ],
    "edges": [
        {"source": 2, "target": 1, "label": "nsubj"},
        {"source": 2, "target": 3, "label": "obj"},
    ],
}

PASSIVE = {
    "text": "the mouse is eaten by the cat",
    "nodes": [
        {"id": 3, "name": "mouse", "pos": "NN", "type": "NOUN", "properties": {"det": ["the"]}},
        {"id": 4, "name": "is", "lemma": "be", "pos": "VBZ", "type": "VERB"},
        {"id": 2, "name": "eaten", "lemma": "eat", "pos": "VBN", "type": "VERB"},
        {"id": 1, "name": "cat", "pos": "NN", "type": "NOUN", "properties": {"5": ["by"], "det": ["the"]}},
    ],
    "edges": [
        {"source": 2, "target": 3, "label": "nsubj_pass"},
        {"source": 2, "target": 4, "label": "aux_pass"},
        {"source": 2, "target": 1, "label": "obl_agent"},
    ],
}


class BuildIntermediateTests(SimpleTestCase):
    def test_active_and_passive_agree(self):
        active = build_intermediate(build_dep_graph(ACTIVE))
        passive = build_intermediate(build_dep_graph(PASSIVE))
        self.assertEqual(verb_edges(active), [("eat", 1, 3, False)])
        self.assertEqual(verb_edges(passive), verb_edges(active))
        self.assertEqual(passive.nodes[1].properties, {"det": ["the"]})

    def test_input_untouched(self):
        graph = build_dep_graph(PASSIVE)
        build_intermediate(graph)
        self.assertEqual(len(graph.edges), 3)
        self.assertIn("5", graph.nodes[1].properties)

    def test_negation(self):
        graph = build_dep_graph(
            {
                "text": "Alice does not play football",
                "nodes": [
                    {"id": 1, "name": "Alice", "pos": "NNP", "type": "ENTITY"},
                    {"id": 2, "name": "does", "lemma": "do", "pos": "VBZ"},
                    {"id": 3, "name": "not", "pos": "RB"},
                    {"id": 4, "name": "play", "pos": "VB", "type": "VERB"},
                    {"id": 5, "name": "football", "pos": "NN", "type": "NOUN"},
                ],
                "edges": [
                    {"source": 4, "target": 1, "label": "nsubj"},
                    {"source": 4, "target": 2, "label": "aux"},
                    {"source": 4, "target": 3, "label": "neg"},
                    {"source": 4, "target": 5, "label": "obj"},
                ],
            }
        )
        intermediate = build_intermediate(graph)
        self.assertEqual(verb_edges(intermediate), [("play", 1, 5, True)])
        self.assertEqual(topo_sort_filter(intermediate).ids, [1, 4, 5])

    def test_infinitive_marker(self):
        graph = build_dep_graph(
            {
                "text": "to steal",
                "nodes": [
                    {"id": 1, "name": "to", "pos": "TO"},
                    {"id": 2, "name": "steal", "pos": "VB", "type": "VERB"},
                ],
                "edges": [{"source": 2, "target": 1, "label": "mark"}],
            }
        )
        self.assertEqual(verb_edges(build_intermediate(graph)), [("to steal", None, None, False)])

    def test_adjective_becomes_property(self):
        graph = build_dep_graph(
            {
                "text": "busy centre",
                "nodes": [
                    {"id": 1, "name": "busy", "pos": "JJ"},
                    {"id": 2, "name": "centre", "pos": "NN", "type": "NOUN"},
                ],
                "edges": [{"source": 2, "target": 1, "label": "amod"}],
            }
        )
        intermediate = build_intermediate(graph)
        self.assertEqual(list(intermediate.nodes), [2])
        self.assertEqual([e.lemma for e in intermediate.nodes[2].properties["JJ"]], ["busy"])
        self.assertEqual(intermediate.edges, [])

    def test_copula(self):
        document = {
            "text": "it is not busy",
            "nodes": [
                {"id": 1, "name": "it", "pos": "PRP"},
                {"id": 2, "name": "is", "lemma": "be", "pos": "VBZ", "type": "VERB"},
                {"id": 3, "name": "not", "pos": "RB"},
                {"id": 4, "name": "busy", "pos": "JJ"},
            ],
            "edges": [
                {"source": 4, "target": 1, "label": "nsubj"},
                {"source": 4, "target": 2, "label": "cop"},
                {"source": 4, "target": 3, "label": "neg"},
            ],
        }
        intermediate = build_intermediate(build_dep_graph(document))
        self.assertEqual(verb_edges(intermediate), [("be", 1, 4, True)])
        self.assertEqual(intermediate.verb_edge(4).verb_id, 4)
        self.assertEqual(topo_sort_filter(intermediate).ids, [1, 4])

    def test_copula_without_subject(self):
        document = {
            "text": "It is busy in Newcastle",
            "nodes": [
                {"id": 1, "name": "It", "pos": "PRP"},
                {"id": 2, "name": "is", "lemma": "be", "pos": "VBZ", "type": "VERB"},
                {"id": 3, "name": "busy", "pos": "JJ"},
                {"id": 5, "name": "Newcastle", "pos": "NNP", "type": "GPE", "properties": {"4": ["in"]}},
            ],
            "edges": [
                {"source": 3, "target": 1, "label": "expl"},
                {"source": 3, "target": 2, "label": "cop"},
                {"source": 3, "target": 5, "label": "obl"},
            ],
        }
        intermediate = build_intermediate(build_dep_graph(document))
        self.assertEqual(verb_edges(intermediate), [("be", 3, None, False)])

    def test_single_node(self):
        graph = build_dep_graph({"nodes": [{"id": 1, "name": "work", "pos": "VB", "type": "VERB"}], "edges": []})
        intermediate = build_intermediate(graph)
        self.assertEqual(verb_edges(intermediate), [("work", None, None, False)])
        self.assertEqual(topo_sort_filter(intermediate).ids, [1])

    def test_disconnected_verbs(self):
        document = {
            "text": "Alice works Bob plays",
            "nodes": [
                {"id": 1, "name": "Alice", "pos": "NNP", "type": "ENTITY"},
                {"id": 2, "name": "works", "lemma": "work", "pos": "VBZ", "type": "VERB"},
                {"id": 3, "name": "Bob", "pos": "NNP", "type": "ENTITY"},
                {"id": 4, "name": "plays", "lemma": "play", "pos": "VBZ", "type": "VERB"},
            ],
            "edges": [
                {"source": 2, "target": 1, "label": "nsubj"},
                {"source": 4, "target": 3, "label": "nsubj"},
            ],
        }
        intermediate = build_intermediate(build_dep_graph(document))
        self.assertEqual(
            verb_edges(intermediate),
            [("work", 1, None, False), ("play", 3, None, False)],
        )


class TopoSortFilterTests(SimpleTestCase):
    def graph(self, names, edges):
        nodes = {node_id: Singleton(id=node_id, named_entity=name) for node_id, name in names}
        return DepGraph(text="", nodes=nodes, edges=[DepEdge(s, t, label) for s, t, label in edges])

    def test_prunes_inherited_marker_and_empty_nodes(self):
        graph = self.graph(
            [(1, "a"), (6, "b"), (7, "c"), (8, ""), (9, "d"), (10, "e"),
             (11, "f"), (12, ""), (5, "g"), (2, "to"), (3, "h")],
            [
                (1, 3, "inherit_edge"),
                (6, 2, "mark"),
                (8, 9, "dep"),
                (8, 5, "dep"),
                (10, 6, "dep"),
                (11, 10, "dep"),
                (12, 11, "dep"),
            ],
        )
        self.assertEqual(topo_sort_filter(graph).ids, [1, 6, 7, 9, 5, 10, 11])

    def test_children_before_parents(self):
        graph = self.graph([(1, "a"), (2, "b"), (3, "c")], [(1, 2, "dep"), (2, 3, "dep")])
        order = topo_sort_filter(graph)
        self.assertEqual(order.ids, [3, 2, 1])
        self.assertLess(order.position(3), order.position(1))
        self.assertEqual(order.position(99), 3)

    def test_cycle(self):
        graph = self.graph([(1, "a"), (2, "b")], [(1, 2, "dep"), (2, 1, "dep")])
        with self.assertRaises(CyclicGraphError):
            topo_sort_filter(graph)
