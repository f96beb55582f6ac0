import random
from collections import Counter
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from FactoidEntailment_project.exceptions import (
    CyclicGraphError,
    EmptyGroupError,
    ParseError,
)
from kb.utils import load_kb

from .models import GroupType, MeuEntry, MeuSource, SetOfSingletons, Singleton
from .utils import (
    build_dep_graph,
    coalesce_groups,
    load_dep_graph,
    meu_resolution,
    most_specific_type,
    resolve_multiword,
)

FIXTURES = Path(__file__).resolve().parent / "fixtures"

BUT_NOT = {
    "text": "There is traffic but not in the Newcastle city centre",
    "nodes": [
        {"id": 1, "name": "There", "pos": "EX"},
        {"id": 2, "name": "is", "pos": "VBZ", "type": "VERB"},
        {"id": 3, "name": "traffic", "pos": "NN", "type": "NOUN"},
        {"id": 4, "name": "but", "pos": "CC"},
        {"id": 5, "name": "not", "pos": "RB"},
        {"id": 7, "name": "Newcastle", "pos": "NNP", "type": "GPE"},
        {"id": 8, "name": "city", "pos": "NN", "type": "NOUN"},
        {
            "id": 9,
            "name": "centre",
            "pos": "NN",
            "type": "NOUN",
            "properties": {"6": ["in"], "det": ["the"]},
        },
    ],
    "edges": [
        {"source": 2, "target": 1, "label": "expl"},
        {"source": 2, "target": 3, "label": "nsubj"},
        {"source": 3, "target": 9, "label": "conj"},
        {"source": 9, "target": 4, "label": "cc"},
        {"source": 9, "target": 5, "label": "neg"},
        {"source": 9, "target": 7, "label": "compound"},
        {"source": 9, "target": 8, "label": "compound"},
    ],
    "meu": [
        {"start": 32, "end": 41, "text": "Newcastle", "type": "GPE", "source": "GeoNames", "confidence": 1.0},
        {"start": 42, "end": 53, "text": "city centre", "type": "NOUN", "source": "Stanza", "confidence": 1.0},
        {"start": 32, "end": 53, "text": "Newcastle city centre", "type": "GPE", "source": "GeoNames", "confidence": 1.0},
    ],
}


def singleton(node_id, name, entity_type, start, lemma=""):
    return Singleton(
        id=node_id,
        named_entity=name,
        lemma=lemma or name,
        type=entity_type,
        min=start,
        max=start + len(name),
    )


def meu(start, end, text, entity_type, source=MeuSource.STANZA, confidence=1.0):
    return MeuEntry(start, end, text, text, entity_type, source, confidence)


class DepGraphTests(SimpleTestCase):
    def test_single_node(self):
        graph = build_dep_graph({"nodes": [{"id": 1, "name": "work"}], "edges": []})
        self.assertEqual(len(graph.nodes), 1)
        self.assertEqual(graph.edges, [])

    def test_fixture(self):
        graph = load_dep_graph(FIXTURES / "newcastle_brighton.json")
        self.assertEqual(len(graph.nodes), 5)
        self.assertEqual([e.label for e in graph.children(1)], ["conj"])
        self.assertEqual((graph.nodes[3].min, graph.nodes[3].max), (14, 22))

    def test_missing_node(self):
        document = {
            "nodes": [{"id": 1, "name": "work"}],
            "edges": [{"source": 1, "target": 2, "label": "obj"}],
        }
        with self.assertRaisesMessage(ParseError, "missing node 2"):
            build_dep_graph(document)

    def test_cycle(self):
        document = {
            "nodes": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
            "edges": [
                {"source": 1, "target": 2, "label": "obj"},
                {"source": 2, "target": 1, "label": "obj"},
            ],
        }
        with self.assertRaises(CyclicGraphError):
            build_dep_graph(document)

    def test_unknown_key(self):
        with self.assertRaises(ParseError):
            build_dep_graph({"nodes": [{"id": 1, "name": "a", "colour": "red"}], "edges": []})


class MeuResolutionTests(SimpleTestCase):
    meu_db = [
        meu(32, 41, "Newcastle", "GPE", MeuSource.GEONAMES),
        meu(42, 53, "city centre", "NOUN"),
        meu(32, 53, "Newcastle city centre", "GPE", MeuSource.GEONAMES),
    ]

    def test_exact_span(self):
        self.assertEqual(meu_resolution(42, 53, "NOUN", self.meu_db), (1.0, "NOUN"))

    def test_geonames_multiplier(self):
        confidence, entity_type = meu_resolution(32, 53, "GPE", self.meu_db)
        self.assertAlmostEqual(confidence, settings.GEONAMES_MULTIPLIER)
        self.assertEqual(entity_type, "GPE")

    def test_no_entries(self):
        self.assertEqual(meu_resolution(0, 5, None, []), (0.0, None))

    def test_monotone(self):
        generator = random.Random(11)
        for _ in range(100):
            entries = []
            previous = 0.0
            for _ in range(5):
                start = generator.randint(0, 10)
                entries.append(
                    meu(start, start + generator.randint(1, 5), "x", "NOUN", confidence=generator.random())
                )
                confidence, _ = meu_resolution(2, 6, None, entries, text="x")
                self.assertGreaterEqual(confidence, previous)
                previous = confidence


class MostSpecificTypeTests(SimpleTestCase):
    def test_hierarchy(self):
        self.assertEqual(most_specific_type(["NOUN", "GPE"]), "GPE")
        self.assertEqual(most_specific_type(["ADJECTIVE", "VERB", "NOUN"]), "VERB")

    def test_empty(self):
        self.assertEqual(most_specific_type([]), "None")
        self.assertEqual(most_specific_type(["DATE"]), "None")


class ResolveMultiwordTests(SimpleTestCase):
    def grouping(self, *members):
        return SetOfSingletons(id=members[-1].id, entities=list(members), group_type=GroupType.GROUPING)

    def assertCoversSpan(self, resolved, members):
        words = resolved.lemma.split() + " ".join(resolved.properties.get("extra", [])).split()
        expected = " ".join(member.lemma for member in members).split()
        self.assertEqual(Counter(words), Counter(expected))

    def test_extra(self):
        members = [
            singleton(7, "Newcastle", "GPE", 32),
            singleton(8, "city", "NOUN", 42),
            singleton(9, "center", "NOUN", 47, lemma="centre"),
        ]
        resolved = resolve_multiword(self.grouping(*members), MeuResolutionTests.meu_db)
        self.assertEqual(resolved.id, 7)
        self.assertEqual(resolved.named_entity, "Newcastle")
        self.assertEqual(resolved.properties["extra"], ["city centre"])
        self.assertCoversSpan(resolved, members)

    def test_full_span_match(self):
        members = [
            singleton(1, "Newcastle", "GPE", 0),
            singleton(2, "upon", "None", 10),
            singleton(3, "Tyne", "GPE", 15),
        ]
        db = [meu(0, 19, "Newcastle upon Tyne", "GPE", MeuSource.GEONAMES)]
        resolved = resolve_multiword(self.grouping(*members), db)
        self.assertEqual(resolved.named_entity, "Newcastle upon Tyne")
        self.assertNotIn("extra", resolved.properties)
        self.assertCoversSpan(resolved, members)

    def test_more_entities_win_ties(self):
        members = [
            singleton(1, "Griffith", "ENTITY", 0),
            singleton(2, "Park", "LOC", 9),
            singleton(3, "Observatory", "ORG", 14),
        ]
        db = [
            meu(0, 13, "Griffith Park", "LOC", confidence=0.9),
            meu(0, 25, "Griffith Park Observatory", "ORG", confidence=0.9),
        ]
        resolved = resolve_multiword(self.grouping(*members), db)
        self.assertEqual(resolved.named_entity, "Griffith Park Observatory")
        self.assertEqual(resolved.type, "ORG")

    def test_typo_is_reported_not_corrected(self):
        members = [singleton(1, "Griffth", "ENTITY", 0), singleton(2, "Park", "LOC", 8)]
        db = [meu(0, 12, "Griffith Park", "LOC")]
        with self.assertLogs("apriori", level="WARNING") as logs:
            resolved = resolve_multiword(self.grouping(*members), db)
        self.assertIn("Griffth Park", logs.output[0])
        self.assertEqual(resolved.named_entity, "Griffth Park")

    def test_empty_group(self):
        with self.assertRaises(EmptyGroupError):
            resolve_multiword(SetOfSingletons(1, [], GroupType.GROUPING), [])


class CoalesceGroupsTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = load_kb(settings.KB_PATH)

    def test_particle(self):
        graph = build_dep_graph(
            {
                "text": "shut down",
                "nodes": [
                    {"id": 1, "name": "shut", "pos": "VB", "type": "VERB"},
                    {"id": 2, "name": "down", "pos": "RP"},
                ],
                "edges": [{"source": 1, "target": 2, "label": "compound_prt"}],
            }
        )
        coalesced = coalesce_groups(graph, self.kb)
        self.assertEqual(list(coalesced.nodes), [1])
        self.assertEqual(coalesced.nodes[1].named_entity, "shut down")

    def test_conjunction(self):
        graph = load_dep_graph(FIXTURES / "newcastle_brighton.json")
        coalesced = coalesce_groups(graph, self.kb)
        groups = [n for n in coalesced.nodes.values() if isinstance(n, SetOfSingletons)]
        self.assertEqual(len(groups), 1)
        self.assertEqual(groups[0].group_type, GroupType.AND)
        self.assertEqual([e.named_entity for e in groups[0].entities], ["Newcastle", "Brighton"])
        subject = coalesced.children(4, "nsubj")[0]
        self.assertEqual(subject.target, groups[0].id)
        self.assertEqual(coalesced.nodes[4].lemma, "has")
        self.assertEqual(len(graph.nodes), 5)

    def test_negated_grouping_in_coordination(self):
        coalesced = coalesce_groups(build_dep_graph(BUT_NOT), self.kb)
        conjunction = coalesced.nodes[coalesced.children(2, "nsubj")[0].target]
        self.assertEqual(conjunction.group_type, GroupType.AND)
        traffic, negation = conjunction.entities
        self.assertEqual(traffic.named_entity, "traffic")
        self.assertEqual(negation.group_type, GroupType.NOT)
        newcastle = negation.entities[0]
        self.assertEqual(newcastle.named_entity, "Newcastle")
        self.assertEqual(newcastle.properties["extra"], ["city centre"])
        self.assertEqual(newcastle.properties["det"], ["the"])
        self.assertEqual(newcastle.prepositions(), {"in"})

    def test_leaf_words_preserved(self):
        coalesced = coalesce_groups(build_dep_graph(BUT_NOT), self.kb)
        words = Counter()
        for entity in coalesced.nodes.values():
            for leaf in entity.leaves():
                words.update(leaf.lemma.split())
                words.update(" ".join(leaf.properties.get("extra", [])).split())
        self.assertEqual(
            words,
            Counter(["There", "be", "traffic", "Newcastle", "city", "centre"]),
        )

    def test_without_apriori(self):
        coalesced = coalesce_groups(build_dep_graph(BUT_NOT), self.kb, resolve=False)
        self.assertEqual(len(coalesced.nodes), 8)
        self.assertEqual(len(coalesced.children(9, "compound")), 2)
        self.assertFalse(any(isinstance(n, SetOfSingletons) for n in coalesced.nodes.values()))

    def test_verb_match_kept_nominal(self):
        graph = build_dep_graph(
            {
                "text": "the run",
                "nodes": [
                    {"id": 1, "name": "run", "pos": "NN", "type": "NOUN", "properties": {"det": ["the"]}},
                ],
                "edges": [],
                "meu": [{"start": 4, "end": 7, "text": "run", "type": "VERB", "source": "Stanza", "confidence": 1.0}],
            }
        )
        self.assertEqual(coalesce_groups(graph, self.kb).nodes[1].type, "NOUN")
        del graph.nodes[1].properties["det"]
        self.assertEqual(coalesce_groups(graph, self.kb).nodes[1].type, "VERB")
