import itertools
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from apriori.models import GroupType, SetOfSingletons, Singleton
from apriori.utils import build_dep_graph, coalesce_groups, load_dep_graph
from FactoidEntailment_project.exceptions import UnboundStructure
from kb.utils import load_kb
from kernel.models import Relationship, variable
from kernel.utils import construct_final_kernel
from rewrite.utils import build_intermediate

from .models import Formula, FormulaKind, Proposition, Quantity, Term
from .parser import parse
from .utils import render, render_term, to_fol

APRIORI_FIXTURES = Path(settings.BASE_DIR) / "apriori" / "fixtures"


def word(node_id, name, **fields):
    return Singleton(id=node_id, named_entity=name, **fields)


def kernel(verb, source, target=None, negated=False, **properties):
    return Relationship(
        source=source,
        target=target,
        edge_label=word(0, verb, type="VERB"),
        negated=negated,
        properties={key: list(values) for key, values in properties.items()},
    )


def group(group_type, *entities, node_id=50):
    return SetOfSingletons(id=node_id, entities=list(entities), group_type=group_type)


class ToFolTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = load_kb(settings.KB_PATH)

    def formula(self, graph):
        intermediate = build_intermediate(coalesce_groups(graph, self.kb), self.kb)
        return to_fol(construct_final_kernel(intermediate, self.kb))

    def test_coordinated_subject(self):
        formula = self.formula(load_dep_graph(APRIORI_FIXTURES / "newcastle_brighton.json"))
        self.assertEqual(render(formula), "has(◇Newcastle, ◇traffic) ∧ has(◇Brighton, ◇traffic)")

    def test_relative_clause(self):
        graph = build_dep_graph(
            {
                "text": "Music that is not classical",
                "nodes": [
                    {"id": 1, "name": "Music", "pos": "NN", "type": "NOUN"},
                    {"id": 2, "name": "that", "pos": "WDT"},
                    {"id": 3, "name": "is", "pos": "VBZ", "type": "VERB"},
                    {"id": 4, "name": "not", "pos": "RB"},
                    {"id": 5, "name": "classical", "pos": "JJ"},
                ],
                "edges": [
                    {"source": 1, "target": 5, "label": "acl_relcl"},
                    {"source": 5, "target": 2, "label": "nsubj"},
                    {"source": 5, "target": 3, "label": "cop"},
                    {"source": 5, "target": 4, "label": "neg"},
                ],
            }
        )
        self.assertEqual(render(self.formula(graph)), "¬(be(◇music, ◇classical)) ∧ be(◇music)")

    def test_semi_modal(self):
        able = variable(1)
        able.properties["JJ"] = [word(2, "able", pos="JJ")]
        inner = kernel(
            "to answer",
            able,
            word(6, "questions", properties={"JJ": [word(5, "more", pos="JJR")]}),
        )
        outer = kernel("become", able, SENTENCE=[inner])
        self.assertEqual(
            render(to_fol(outer)),
            "∃?1.(to answer(◇?1[JJ: able], ◇questions[JJ: more]) ∧ become(◇?1[JJ: able]))",
        )

    def test_binders_in_discovery_order(self):
        husband = word(6, "husband", properties={"extra": ["someone"]})
        outer = kernel("attempt", variable(2), SENTENCE=[kernel("to steal", variable(1), husband)])
        formula = to_fol(outer)
        self.assertEqual(formula.binders(), ["?1", "?2"])
        self.assertEqual(
            render(formula),
            "∃?1.(∃?2.(to steal(◇?1, ◇[husband [of] someone]) ∧ attempt(◇?2)))",
        )

    def test_negated_kernel(self):
        formula = to_fol(kernel("play", word(1, "Alice"), word(3, "football"), negated=True))
        self.assertEqual(render(formula), "¬(play(◇Alice, ◇football))")

    def test_universal_determiner(self):
        cats = word(1, "cats", lemma="cat", properties={"det": ["all"]})
        formula = to_fol(kernel("eat", cats, word(3, "mice", lemma="mouse")))
        self.assertEqual(formula.proposition.args[0].quantity, Quantity.ALL)
        self.assertEqual(render(formula), "eat(□cat, ◇mouse)")

    def test_disjunction_and_neither(self):
        choices = (word(3, "football"), word(5, "tennis"))
        either = to_fol(kernel("play", word(1, "Alice"), group(GroupType.OR, *choices)))
        self.assertEqual(render(either), "play(◇Alice, ◇football) ∨ play(◇Alice, ◇tennis)")
        neither = to_fol(kernel("play", word(1, "Alice"), group(GroupType.NEITHER, *choices)))
        self.assertEqual(render(neither), "¬(play(◇Alice, ◇football) ∨ play(◇Alice, ◇tennis))")

    def test_negated_property(self):
        place = word(7, "Newcastle", properties={"extra": ["city centre"], "type": ["stay in place"]})
        formula = to_fol(kernel("be", word(3, "traffic"), SPACE=[group(GroupType.NOT, place)]))
        self.assertEqual(render(formula), "be(◇traffic)[SPACE: ¬◇[Newcastle [of] city centre]]")
        self.assertTrue(formula.proposition.property_map()["SPACE"][0].negated)

    def test_adjectives_on_proper_names_describe(self):
        busy = word(2, "busy", pos="JJ")
        centre = word(3, "Newcastle", type="GPE", properties={"extra": ["city centre"], "JJ": [busy]})
        city = word(4, "city", type="NOUN", properties={"JJ": [busy]})
        formula = to_fol(kernel("close", variable(1), centre, AIM_OBJECTIVE=[word(9, "traffic")]))
        self.assertEqual(
            render(formula), "∃?1.(close(◇?1, ◇[Newcastle [of] city centre])[AIM_OBJECTIVE: ◇traffic])"
        )
        self.assertEqual(render(to_fol(kernel("be", city))), "be(◇city[JJ: busy])")

    def test_properties_distribute_over_alternatives(self):
        places = (word(4, "Newcastle"), word(6, "Brighton"))
        both = to_fol(kernel("flow", word(1, "traffic"), SPACE=[group(GroupType.AND, *places)]))
        self.assertEqual(render(both), "flow(◇traffic)[SPACE: [◇Newcastle, ◇Brighton]]")
        either = to_fol(kernel("flow", word(1, "traffic"), SPACE=[group(GroupType.OR, *places)]))
        self.assertEqual(
            render(either), "flow(◇traffic)[SPACE: ◇Newcastle] ∨ flow(◇traffic)[SPACE: ◇Brighton]"
        )

    def test_unbound_grouping(self):
        grouping = group(GroupType.GROUPING, word(1, "city"), word(2, "centre"))
        with self.assertRaises(UnboundStructure):
            to_fol(kernel("be", grouping))

    def test_variables_carry_nothing(self):
        formula = to_fol(kernel("work", variable(1), RB=[word(2, "alone", pos="RB")]))
        for proposition in formula.atoms():
            for term in proposition.args:
                if term.is_var:
                    self.assertEqual((term.specification, term.properties), (None, ()))


class RenderTests(SimpleTestCase):
    formulas = [
        Formula.atom(Proposition("be", [Term("traffic")], {"SPACE": [Term("Newcastle", specification="city centre")]})),
        Formula.atom(Proposition("has", [Term("Newcastle"), Term("traffic")])),
        Formula.not_(Formula.atom(Proposition("has", [Term("Newcastle"), Term("traffic")]))),
        Formula.atom(Proposition("has", [Term("Newcastle"), Term("traffic")], negated=True)),
        Formula.exists(
            "?1",
            Formula.atom(
                Proposition(
                    "close",
                    [Term.var("?1"), Term("Newcastle", properties={"JJ": [Term("busy")]})],
                    {"AIM_OBJECTIVE": [Term("traffic")]},
                )
            ),
        ),
        Formula.or_(
            Formula.and_(
                Formula.atom(Proposition("play", [Term("Alice"), Term("football")])),
                Formula.atom(Proposition("play", [Term("Bob"), Term("football")])),
            ),
            Formula.atom(Proposition("play", [Term("Dan", quantity=Quantity.ALL), Term("football").negate()])),
        ),
        Formula.atom(
            Proposition("flow", [Term("traffic")], {"TIME": [Term("Saturdays")], "SPACE": [Term("a"), Term("b")]})
        ),
    ]

    def test_terms(self):
        self.assertEqual(render_term(Term("Newcastle", specification="city centre")), "◇[Newcastle [of] city centre]")
        self.assertEqual(render_term(Term("foo")), "◇foo")
        self.assertEqual(render_term(Term("foo", quantity=Quantity.ALL).negate()), "¬□foo")

    def test_modifiers_render_without_quantity(self):
        city = Term("city", properties={"JJ": [Term("busy")], "SPACE": [Term("Newcastle")]})
        self.assertEqual(render_term(city), "◇city[JJ: busy, SPACE: ◇Newcastle]")
        self.assertEqual(parse(f"be({render_term(city)})").proposition.args[0], city)

    def test_sorted_property_keys(self):
        self.assertEqual(
            render(self.formulas[-1]), "flow(◇traffic)[SPACE: [◇a, ◇b], TIME: ◇Saturdays]"
        )

    def test_round_trip(self):
        for formula in self.formulas:
            with self.subTest(formula=render(formula)):
                self.assertEqual(parse(render(formula)), formula)

    def test_injective(self):
        for first, second in itertools.combinations(self.formulas, 2):
            self.assertNotEqual(render(first), render(second))

    def test_nested_connectives_parenthesised(self):
        self.assertEqual(
            render(self.formulas[5]),
            "(play(◇Alice, ◇football) ∧ play(◇Bob, ◇football)) ∨ play(□Dan, ¬◇football)",
        )
        self.assertEqual(self.formulas[5].kind, FormulaKind.OR)
