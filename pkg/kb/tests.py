import copy
import json
import random
import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from FactoidEntailment_project.exceptions import (
    ExpansionBudgetExceeded,
    ParseError,
    ValidationError,
)
from fol.models import Proposition, Term

from .models import ExpansionMode, KbVerdict, KernelContext, NodeContext
from .utils import build_knowledge_base, expand, kb_relation, load_kb, match_logical_rule


def kb_document(**sections) -> dict:
    document = {
        "lexicon": [{"lemma": "has", "entity_class": "VERB", "surface_forms": ["have"]}],
        "rewrite_rules": [],
        "functions": [],
        "relations": [],
        "expansions": [],
    }
    document.update(sections)
    return document


def relations(*triples) -> list[dict]:
    return [{"kind": kind, "left": left, "right": right} for kind, left, right in triples]


class LoadKbTests(SimpleTestCase):
    def test_fixture_loads(self):
        kb = load_kb(settings.KB_PATH)
        rule = kb.rule_by_order(12)
        self.assertEqual(rule.construct_name, "space")
        self.assertEqual(rule.construct_property, "stay in place")
        self.assertEqual(rule.prepositions, frozenset({"in", "into"}))
        self.assertEqual(kb.lemmatize("center"), "centre")
        self.assertEqual(kb.lemmatize("have"), "has")
        self.assertEqual(kb.lemmatize("Saturdays"), "Saturdays")

    def test_minimal_kb(self):
        kb = build_knowledge_base(kb_document())
        self.assertEqual(len(kb.lexicon), 1)

    def test_duplicate_rule_order(self):
        rule = {
            "rule_order": 3,
            "prepositions": ["in"],
            "construct_name": "space",
            "construct_property": "stay in place",
        }
        with self.assertRaisesMessage(ValidationError, "duplicate rule_order 3"):
            build_knowledge_base(kb_document(rewrite_rules=[rule, dict(rule)]))

    def test_unknown_key_rejected(self):
        document = kb_document()
        document["lexicon"][0]["colour"] = "red"
        with self.assertRaisesMessage(ValidationError, "lexicon/0"):
            build_knowledge_base(document)

    def test_verb_fields_on_noun(self):
        document = kb_document(
            lexicon=[{"lemma": "cat", "entity_class": "NOUN", "transitive": True}]
        )
        with self.assertRaisesMessage(ValidationError, "lexicon[0]"):
            build_knowledge_base(document)

    def test_empty_prepositions_need_source(self):
        rule = {"rule_order": 1, "construct_name": "time", "construct_property": "defined"}
        with self.assertRaises(ValidationError):
            build_knowledge_base(kb_document(rewrite_rules=[rule]))

    def test_inconsistent_self_loop(self):
        document = kb_document(relations=relations(("INCONSISTENT", "a", "a")))
        with self.assertRaisesMessage(ValidationError, "relations[0]"):
            build_knowledge_base(document)

    def test_unbound_template_variable(self):
        expansion = {
            "mode": "ENTAILING",
            "pattern": {"name": "has", "args": ["$x", "$y"]},
            "rewrite": {"name": "be", "args": ["$y"], "properties": {"SPACE": "$x[of]$z"}},
        }
        with self.assertRaisesMessage(ValidationError, "$z"):
            build_knowledge_base(kb_document(expansions=[expansion]))

    def test_malformed_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "kb.json"
            path.write_text('{"lexicon": [', encoding="utf-8")
            with self.assertRaisesMessage(ParseError, "line 1"):
                load_kb(path)

    def test_missing_file(self):
        with self.assertRaises(ParseError):
            load_kb("/nonexistent/kb.json")


class MatchLogicalRuleTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = load_kb(settings.KB_PATH)

    def match(self, prepositions, source=None, abstract=False, verb=None):
        node = NodeContext(frozenset(prepositions), source, abstract)
        return match_logical_rule(KernelContext(verb), node, self.kb)

    def test_concrete_place(self):
        rule = self.match({"in"})
        self.assertEqual((rule.construct_name, rule.construct_property), ("space", "stay in place"))

    def test_temporal_tagger(self):
        rule = self.match({"on"}, source="SUTime")
        self.assertEqual((rule.construct_name, rule.construct_property), ("time", "defined"))

    def test_no_premise(self):
        self.assertIsNone(self.match(set()))

    def test_on_without_source(self):
        self.assertIsNone(self.match({"on"}))

    def test_movement_verb_takes_lower_order(self):
        self.assertEqual(self.match({"into"}, verb="flowing").rule_order, 11)
        self.assertEqual(self.match({"into"}, verb="eat").rule_order, 12)

    def test_abstract_entity_blocks_place(self):
        self.assertIsNone(self.match({"in"}, abstract=True))

    def test_order_stable_under_file_permutation(self):
        with open(settings.KB_PATH, encoding="utf-8") as kb_file:
            document = json.load(kb_file)
        shuffled = copy.deepcopy(document)
        random.Random(7).shuffle(shuffled["rewrite_rules"])
        kb = build_knowledge_base(shuffled)
        for prepositions, source in [({"in"}, None), ({"on"}, "SUTime"), ({"for"}, None)]:
            node = NodeContext(frozenset(prepositions), source, False)
            self.assertEqual(
                match_logical_rule(KernelContext("flow"), node, kb),
                match_logical_rule(KernelContext("flow"), node, self.kb),
            )


class KbRelationTests(SimpleTestCase):
    def test_reflexive(self):
        kb = build_knowledge_base(kb_document())
        self.assertEqual(kb_relation("x", "x", kb), KbVerdict.EQUIV)
        self.assertEqual(kb_relation("x", "y", kb), KbVerdict.NONE)

    def test_equiv_transitive(self):
        kb = build_knowledge_base(
            kb_document(relations=relations(("EQUIV", "a", "b"), ("EQUIV", "b", "c")))
        )
        self.assertEqual(kb_relation("a", "c", kb), KbVerdict.EQUIV)
        self.assertEqual(kb_relation("c", "a", kb), KbVerdict.EQUIV)

    def test_part_of_implies(self):
        kb = build_knowledge_base(
            kb_document(
                relations=relations(
                    ("IS_A", "city centre", "newcastle-part"),
                    ("PART_OF", "newcastle-part", "newcastle"),
                )
            )
        )
        self.assertEqual(kb_relation("city centre", "Newcastle-part", kb), KbVerdict.IMPLIES)
        self.assertEqual(kb_relation("city centre", "newcastle", kb), KbVerdict.IMPLIES)
        self.assertEqual(kb_relation("newcastle", "city centre", kb), KbVerdict.NONE)

    def test_inconsistency_through_closure(self):
        kb = build_knowledge_base(
            kb_document(
                relations=relations(
                    ("IMPLIES", "a", "b"),
                    ("EQUIV", "c", "d"),
                    ("INCONSISTENT", "b", "d"),
                )
            )
        )
        self.assertEqual(kb_relation("a", "c", kb), KbVerdict.INCONSISTENT)
        self.assertEqual(kb_relation("c", "a", kb), KbVerdict.INCONSISTENT)

    def test_inconsistency_stops_at_part_of(self):
        kb = build_knowledge_base(
            kb_document(
                relations=relations(
                    ("PART_OF", "city centre", "newcastle"),
                    ("IS_A", "reindeer", "animal"),
                    ("INCONSISTENT", "newcastle", "brighton"),
                    ("INCONSISTENT", "animal", "plant"),
                )
            )
        )
        self.assertEqual(kb_relation("newcastle", "brighton", kb), KbVerdict.INCONSISTENT)
        self.assertEqual(kb_relation("city centre", "brighton", kb), KbVerdict.NONE)
        self.assertEqual(kb_relation("brighton", "city centre", kb), KbVerdict.NONE)
        self.assertEqual(kb_relation("reindeer", "plant", kb), KbVerdict.NONE)
        self.assertEqual(kb_relation("city centre", "newcastle", kb), KbVerdict.IMPLIES)

    def test_equiv_beats_inconsistent(self):
        kb = build_knowledge_base(
            kb_document(
                relations=relations(("EQUIV", "a", "b"), ("INCONSISTENT", "a", "b"))
            )
        )
        self.assertEqual(kb_relation("a", "b", kb), KbVerdict.EQUIV)

    def test_equiv_is_an_equivalence_relation(self):
        generator = random.Random(2024)
        names = list("abcdef")
        for _ in range(50):
            triples = [
                ("EQUIV", *generator.sample(names, 2))
                for _ in range(generator.randint(0, 5))
            ]
            kb = build_knowledge_base(kb_document(relations=relations(*triples)))

            def equiv(x, y):
                return kb_relation(x, y, kb) == KbVerdict.EQUIV

            for x in names:
                self.assertTrue(equiv(x, x))
                for y in names:
                    self.assertEqual(equiv(x, y), equiv(y, x))
                    for z in names:
                        if equiv(x, y) and equiv(y, z):
                            self.assertTrue(equiv(x, z))


class ExpandTests(SimpleTestCase):
    def test_no_matching_rule(self):
        kb = build_knowledge_base(kb_document())
        p = Proposition("play", (Term("Alice"), Term("football")))
        self.assertEqual(expand(p, ExpansionMode.ENTAILING, kb), frozenset())

    def test_predicate_phrase_equivalence(self):
        kb = build_knowledge_base(
            kb_document(relations=relations(("EQUIV", "trafficked", "has traffic")))
        )
        newcastle = Term("Newcastle", specification="city centre")
        p = Proposition("be", (newcastle, Term("trafficked")))
        expected = Proposition("has", (newcastle, Term("traffic")))
        self.assertIn(expected, expand(p, ExpansionMode.EQUIVALENT, kb))
        self.assertIn(p, expand(expected, ExpansionMode.EQUIVALENT, kb))

    def test_implication_chain(self):
        kb = build_knowledge_base(
            kb_document(relations=relations(("IMPLIES", "a", "b"), ("IMPLIES", "b", "c")))
        )
        p = Proposition("be", (Term("a"),))
        self.assertEqual(
            expand(p, ExpansionMode.ENTAILING, kb),
            {Proposition("be", (Term("b"),)), Proposition("be", (Term("c"),))},
        )
        self.assertEqual(expand(p, ExpansionMode.EQUIVALENT, kb), frozenset())
        self.assertEqual(expand(p.negate(), ExpansionMode.ENTAILING, kb), frozenset())

    def test_budget(self):
        kb = build_knowledge_base(
            kb_document(relations=relations(("IMPLIES", "a", "b"), ("IMPLIES", "b", "c")))
        )
        p = Proposition("be", (Term("a"),))
        with self.assertRaises(ExpansionBudgetExceeded):
            expand(p, ExpansionMode.ENTAILING, kb, bound=1)

    def test_fixture_rules(self):
        kb = load_kb(settings.KB_PATH)
        newcastle, traffic = Term("Newcastle"), Term("traffic")
        has = Proposition("has", (newcastle, traffic))
        be = Proposition("be", (traffic,), {"SPACE": [newcastle]})
        self.assertEqual(expand(has, ExpansionMode.EQUIVALENT, kb), {be})
        self.assertEqual(expand(be, ExpansionMode.EQUIVALENT, kb), {has})
        self.assertEqual(
            expand(has.negate(), ExpansionMode.EQUIVALENT, kb), {be.negate()}
        )

        centre = Term("city centre", negated=True)
        spaced = Proposition("has", (newcastle, traffic), {"SPACE": [centre]})
        self.assertEqual(expand(spaced, ExpansionMode.EQUIVALENT, kb), frozenset())
        located = Term("Newcastle", specification="city centre", negated=True)
        entailed = expand(spaced, ExpansionMode.ENTAILING, kb)
        self.assertIn(Proposition("be", (traffic,), {"SPACE": [located]}), entailed)
        self.assertIn(Proposition("has", (located, traffic)), entailed)
        self.assertNotIn(spaced, entailed)

    def test_negated_rewrite(self):
        kb = load_kb(settings.KB_PATH)
        centre = Term("Newcastle")
        p = Proposition("close", (Term.var("?1"), centre), {"AIM_OBJECTIVE": [Term("traffic")]})
        derived = expand(p, ExpansionMode.ENTAILING, kb)
        self.assertIn(Proposition("has", (centre, Term("traffic")), negated=True), derived)
        self.assertIn(
            Proposition("flow", (Term("traffic"),), {"SPACE": [centre.negate()]}), derived
        )
        self.assertIn(
            Proposition("be", (Term("traffic"),), {"SPACE": [centre]}, negated=True),
            derived,
        )

    def test_monotone_in_rules(self):
        small = build_knowledge_base(
            kb_document(relations=relations(("IMPLIES", "a", "b")))
        )
        large = build_knowledge_base(
            kb_document(relations=relations(("IMPLIES", "a", "b"), ("IS_A", "a", "d")))
        )
        p = Proposition("be", (Term("x"), Term("a")))
        self.assertLessEqual(
            expand(p, ExpansionMode.ENTAILING, small),
            expand(p, ExpansionMode.ENTAILING, large),
        )
