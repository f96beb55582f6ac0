import itertools
import random
from fractions import Fraction

from django.conf import settings
from django.test import SimpleTestCase

from FactoidEntailment_project.exceptions import AtomBudgetExceeded
from fol.models import Formula, Proposition, Quantity, Term
from kb.utils import build_knowledge_base, load_kb

from .models import CmpOutcome, Verdict, WorldTable
from .utils import (
    atom_labels,
    classify_pair,
    cmp_binary,
    cmp_prop,
    cmp_term,
    cmp_unary,
    confidence,
    eta,
    join_all,
    kappa_i,
    kappa_r,
    motivate,
    natural_join,
    pair_table,
    sigma,
    sigma_prime,
    support,
    tabular_semantics,
)

EQ, NEQ, OMEGA = CmpOutcome.EQ, CmpOutcome.NEQ, CmpOutcome.OMEGA
IMPL_NSPEC, IMPL_NONE = CmpOutcome.IMPL_NSPEC, CmpOutcome.IMPL_NONE
IMPL_DOWN, IMPL_GEN = CmpOutcome.IMPL_DOWN, CmpOutcome.IMPL_GEN

SATISFIES = {
    EQ: lambda a, b: a == b,
    NEQ: lambda a, b: a != b,
    OMEGA: lambda a, b: True,
}


def satisfies(outcome, a, b):
    if outcome.is_implication:
        return not (a and not b)
    return SATISFIES[outcome](a, b)


def kb_with(*triples):
    return build_knowledge_base(
        {
            "lexicon": [],
            "rewrite_rules": [],
            "functions": [],
            "relations": [
                {"kind": kind, "left": left, "right": right} for kind, left, right in triples
            ],
            "expansions": [],
        }
    )


def unary(name, arg="x"):
    return Proposition(name, (Term(arg),))


def atom(name):
    return Formula.atom(unary(name))


def random_formula(generator, atoms, depth=3):
    if depth == 0 or generator.random() < 0.3:
        return Formula.atom(generator.choice(atoms))
    kind = generator.choice(("and", "or", "not"))
    if kind == "not":
        return Formula.not_(random_formula(generator, atoms, depth - 1))
    children = [random_formula(generator, atoms, depth - 1) for _ in range(2)]
    return Formula.and_(*children) if kind == "and" else Formula.or_(*children)


def brute_confidence(first, second, constraints):
    """Confidence by enumerating every assignment and filtering by the constraints."""
    labels_a, labels_b = atom_labels(first, "A"), atom_labels(second, "B")
    columns = [*labels_a.values(), *labels_b.values()]
    holding = both = 0
    for bits in itertools.product((0, 1), repeat=len(columns)):
        world = dict(zip(columns, bits))
        if not all(satisfies(o, world[a], world[b]) for (a, b), o in constraints.items()):
            continue
        a_true = first.evaluate({p: world[label] for p, label in labels_a.items()})
        b_true = second.evaluate({p: world[label] for p, label in labels_b.items()})
        holding += a_true
        both += a_true and b_true
    return Fraction(both, holding) if holding else Fraction(0)


def semantic_column(formula, pool):
    return [
        formula.evaluate(dict(zip(pool, bits)))
        for bits in itertools.product((False, True), repeat=len(pool))
    ]


class OutcomeTests(SimpleTestCase):
    def test_eta(self):
        self.assertEqual(eta(EQ), NEQ)
        self.assertEqual(eta(NEQ), EQ)
        self.assertEqual(eta(IMPL_GEN), OMEGA)
        self.assertEqual(eta(OMEGA), OMEGA)

    def test_sigma(self):
        self.assertEqual(sigma([]), OMEGA)
        self.assertEqual(sigma([NEQ, EQ]), NEQ)
        self.assertEqual(sigma([EQ, IMPL_GEN, OMEGA]), EQ)
        self.assertEqual(sigma([IMPL_NSPEC, OMEGA]), IMPL_NSPEC)
        self.assertEqual(sigma([IMPL_NONE]), IMPL_NONE)
        self.assertEqual(sigma([IMPL_DOWN, OMEGA]), IMPL_DOWN)
        self.assertEqual(sigma([IMPL_NONE, IMPL_DOWN]), IMPL_GEN)
        self.assertEqual(sigma([OMEGA]), OMEGA)

    def test_sigma_prime(self):
        self.assertEqual(sigma_prime([]), EQ)
        self.assertEqual(sigma_prime([OMEGA, NEQ]), OMEGA)
        self.assertEqual(sigma_prime([NEQ, EQ]), NEQ)
        self.assertEqual(sigma_prime([IMPL_NONE]), IMPL_NONE)
        self.assertEqual(sigma_prime([IMPL_NONE, IMPL_NSPEC]), IMPL_GEN)
        self.assertEqual(sigma_prime([EQ, IMPL_GEN]), EQ)

    def test_verdict_from_confidence(self):
        self.assertEqual(Verdict.from_confidence(Fraction(1)), Verdict.IMPLICATION)
        self.assertEqual(Verdict.from_confidence(Fraction(0)), Verdict.INCONSISTENCY)
        self.assertEqual(Verdict.from_confidence(Fraction(1, 3)), Verdict.INDIFFERENCE)


class CmpTermTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = kb_with(
            ("IS_A", "cat", "animal"),
            ("INCONSISTENT", "classical", "modern"),
        )

    def cmp(self, a, b):
        return cmp_term(a, b, self.kb)

    def test_identical(self):
        self.assertEqual(self.cmp(Term("foo"), Term("foo")), EQ)
        self.assertEqual(self.cmp(None, None), EQ)

    def test_missing(self):
        self.assertEqual(self.cmp(None, Term("foo")), IMPL_NONE)
        self.assertEqual(self.cmp(Term("foo"), None), OMEGA)

    def test_negation(self):
        foo = Term("foo")
        self.assertEqual(self.cmp(foo, foo.negate()), NEQ)
        self.assertEqual(self.cmp(foo.negate(), foo), NEQ)
        self.assertEqual(self.cmp(foo.negate(), foo.negate()), EQ)
        self.assertEqual(self.cmp(foo.negate(), Term("bar")), OMEGA)

    def test_specification_implies_general(self):
        centre = Term("Newcastle", specification="city centre")
        self.assertEqual(self.cmp(centre, Term("Newcastle")), IMPL_NONE)
        self.assertEqual(self.cmp(Term("Newcastle"), centre), OMEGA)

    def test_copula_loses_specification(self):
        busy = Term("city", properties={"JJ": [Term("busy")]})
        self.assertEqual(self.cmp(busy, Term("city")), IMPL_NSPEC)
        self.assertEqual(self.cmp(Term("city"), busy), OMEGA)

    def test_universal(self):
        every_cat = Term("cat", quantity=Quantity.ALL)
        self.assertEqual(self.cmp(every_cat, Term("animal")), IMPL_GEN)
        self.assertEqual(self.cmp(Term("cat"), Term("animal")), OMEGA)
        self.assertEqual(self.cmp(Term("cat"), every_cat), EQ)

    def test_inconsistent_names(self):
        self.assertEqual(self.cmp(Term("classical"), Term("modern")), NEQ)

    def test_variables(self):
        self.assertEqual(self.cmp(Term.var("?1"), Term.var("?1")), EQ)
        self.assertEqual(self.cmp(Term.var("?1"), Term("Alice")), OMEGA)
        self.assertEqual(self.cmp(Term("Alice"), Term.var("?2")), OMEGA)


class CmpPredicateTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = kb_with()

    def binary(self, name, source, target):
        return Proposition(name, (source, target))

    def test_unary(self):
        self.assertEqual(cmp_unary(unary("be", "a"), unary("be", "a"), self.kb), EQ)
        self.assertEqual(cmp_unary(unary("be", "a"), unary("go", "a"), self.kb), OMEGA)

    def test_different_subjects(self):
        alice = self.binary("play", Term("Alice"), Term("football"))
        bob = self.binary("play", Term("Bob"), Term("football"))
        self.assertEqual(cmp_binary(alice, bob, self.kb), OMEGA)
        self.assertEqual(cmp_binary(alice, alice, self.kb), EQ)

    def test_swapped_arguments(self):
        eats = self.binary("eat", Term("cat"), Term("mouse"))
        eaten = self.binary("eat", Term("mouse"), Term("cat"))
        self.assertEqual(cmp_binary(eats, eaten, self.kb), OMEGA)

    def test_negated_slot_is_inconsistent(self):
        plays = self.binary("play", Term("Alice"), Term("football"))
        other = self.binary("play", Term("Alice"), Term("football").negate())
        self.assertEqual(cmp_binary(plays, other, self.kb), NEQ)
        self.assertEqual(cmp_binary(other, plays, self.kb), NEQ)

    def test_inconsistent_slot_cascade(self):
        plays = self.binary("play", Term("Alice"), Term("football"))
        negated_source = self.binary("play", Term("Alice").negate(), Term("football"))
        both_negated = self.binary("play", Term("Alice").negate(), Term("football").negate())
        bob = self.binary("play", Term("Bob"), Term("football").negate())
        unspecified = self.binary("play", Term("Alice", specification="club"), Term("football").negate())
        self.assertEqual(cmp_binary(plays, negated_source, self.kb), NEQ)
        self.assertEqual(cmp_binary(plays, both_negated, self.kb), OMEGA)
        self.assertEqual(cmp_binary(plays, bob, self.kb), OMEGA)
        self.assertEqual(cmp_binary(unspecified, plays, self.kb), NEQ)

    def test_specific_source(self):
        specific = self.binary("has", Term("Newcastle", specification="city centre"), Term("traffic"))
        general = self.binary("has", Term("Newcastle"), Term("traffic"))
        self.assertEqual(cmp_binary(specific, general, self.kb), IMPL_NONE)


class KappaTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = kb_with(("INCONSISTENT", "classical", "modern"))

    def test_disjoint_keys(self):
        p, q = {"SPACE": [Term("x")]}, {"TIME": [Term("y")]}
        self.assertEqual(kappa_r(p, q, self.kb), {"SPACE": OMEGA, "TIME": IMPL_GEN})
        self.assertEqual(kappa_i(p, q, self.kb), {"SPACE": IMPL_GEN, "TIME": OMEGA})

    def test_equal_maps(self):
        p = {"SPACE": [Term("x")]}
        self.assertEqual(kappa_r(p, dict(p), self.kb), {"SPACE": EQ})

    def test_inconsistent_terms(self):
        p, q = {"JJ": [Term("classical")]}, {"JJ": [Term("modern")]}
        self.assertEqual(kappa_r(p, q, self.kb), {"JJ": NEQ})


class CmpPropTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = load_kb(settings.KB_PATH)

    def test_identical(self):
        p = Proposition("has", (Term("Newcastle"), Term("traffic")))
        self.assertEqual(cmp_prop(p, p, self.kb), EQ)

    def test_explicit_negation(self):
        p = Proposition("has", (Term("Newcastle"), Term("traffic")))
        self.assertEqual(cmp_prop(p, p.negate(), self.kb), NEQ)

    def test_negated_target(self):
        plays = Proposition("play", (Term("Alice"), Term("football")))
        other = Proposition("play", (Term("Alice"), Term("football").negate()))
        self.assertEqual(cmp_prop(plays, other, self.kb), NEQ)

    def test_equivalent_expansion(self):
        has = Proposition("has", (Term("Newcastle"), Term("traffic")))
        be = Proposition("be", (Term("traffic"),), {"SPACE": [Term("Newcastle")]})
        self.assertEqual(cmp_prop(has, be, self.kb), EQ)

    def test_specific_place_implies_general(self):
        specific = Proposition("has", (Term("Newcastle", specification="city centre"), Term("traffic")))
        general = Proposition("has", (Term("Newcastle"), Term("traffic")))
        self.assertEqual(cmp_prop(specific, general, self.kb), IMPL_NONE)
        self.assertEqual(cmp_prop(general, specific, self.kb), OMEGA)

    def test_entailed_by_rule(self):
        outside = Term("city centre", negated=True)
        has = Proposition("has", (Term("Newcastle"), Term("traffic")), {"SPACE": [outside]})
        located = Term("Newcastle", specification="city centre", negated=True)
        be = Proposition("be", (Term("traffic"),), {"SPACE": [located]})
        motivation = motivate(has, be, self.kb)
        self.assertEqual(motivation.outcome, IMPL_GEN)
        self.assertEqual(motivation.case, "expansion entails")
        self.assertEqual(cmp_prop(be, has, self.kb), OMEGA)

    def test_inconsistent_by_expansion(self):
        closed = Proposition(
            "close", (Term.var("?1"), Term("Newcastle")), {"AIM_OBJECTIVE": [Term("traffic")]}
        )
        has = Proposition("has", (Term("Newcastle"), Term("traffic")))
        self.assertEqual(cmp_prop(closed, has, self.kb), NEQ)

    def test_relation_chain(self):
        kb = kb_with(("IMPLIES", "a", "b"))
        self.assertEqual(cmp_prop(unary("be", "a"), unary("be", "b"), kb), IMPL_GEN)
        self.assertEqual(cmp_prop(unary("be", "b"), unary("be", "a"), kb), OMEGA)


class TabularSemanticsTests(SimpleTestCase):
    def test_truth_tables(self):
        both = Formula.and_(atom("p1"), atom("p2"))
        either = Formula.or_(atom("p1"), atom("p2"))
        self.assertEqual(
            tabular_semantics(both, "A").row_set(),
            {(0, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 1)},
        )
        table = tabular_semantics(either, "B")
        self.assertEqual(table.columns, ("B0", "B1", "B"))
        self.assertEqual(table.row_set(), {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)})

    def test_single_atom(self):
        self.assertEqual(len(tabular_semantics(atom("p")).rows), 2)

    def test_contradiction(self):
        table = tabular_semantics(Formula.and_(atom("p"), Formula.not_(atom("p"))))
        self.assertEqual(table.column("A"), [0, 0])

    def test_existential_is_transparent(self):
        table = tabular_semantics(Formula.exists("?1", atom("p")))
        self.assertEqual(table.row_set(), {(0, 0), (1, 1)})

    def test_atom_budget(self):
        formula = Formula.and_(atom("p"), atom("q"), atom("r"))
        with self.assertRaises(AtomBudgetExceeded) as raised:
            tabular_semantics(formula, cap=2)
        self.assertEqual(raised.exception.atom_count, 3)
        self.assertEqual(raised.exception.exit_code, 2)


class JoinTests(SimpleTestCase):
    def test_pair_tables(self):
        self.assertEqual(pair_table(EQ, "a", "b").row_set(), {(0, 0), (1, 1)})
        self.assertEqual(pair_table(NEQ, "a", "b").row_set(), {(0, 1), (1, 0)})
        self.assertEqual(pair_table(IMPL_GEN, "a", "b").row_set(), {(0, 0), (0, 1), (1, 1)})
        self.assertEqual(pair_table(IMPL_DOWN, "a", "b"), pair_table(IMPL_NONE, "a", "b"))
        self.assertEqual(len(pair_table(OMEGA, "a", "b").rows), 4)

    def test_cross_product(self):
        first, second = tabular_semantics(atom("p"), "A"), tabular_semantics(atom("q"), "B")
        self.assertEqual(len(join_all(first, second, []).rows), 4)
        self.assertEqual(len(join_all(first, second, [pair_table(OMEGA, "A0", "B0")]).rows), 4)

    def test_inconsistent_pair_drops_worlds(self):
        first, second = tabular_semantics(atom("p"), "A"), tabular_semantics(atom("q"), "B")
        joined = join_all(first, second, [pair_table(NEQ, "A0", "B0")])
        pairs = set(joined.project("A0", "B0").rows)
        self.assertNotIn((1, 1), pairs)
        self.assertNotIn((0, 0), pairs)

    def test_equal_pair_keeps_columns_equal(self):
        first, second = tabular_semantics(atom("p"), "A"), tabular_semantics(atom("q"), "B")
        joined = join_all(first, second, [pair_table(EQ, "A0", "B0")])
        self.assertEqual(joined.column("A0"), joined.column("B0"))

    def test_natural_join_on_shared_column(self):
        left = WorldTable(("a", "b"), [(0, 1), (1, 1)])
        right = WorldTable(("b", "c"), [(1, 0), (0, 1)])
        self.assertEqual(natural_join(left, right).row_set(), {(0, 1, 0), (1, 1, 0)})


class ConfidenceTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = kb_with()

    def test_conjunction_and_disjunction(self):
        both = Formula.and_(atom("p1"), atom("p2"))
        either = Formula.or_(atom("p1"), atom("p2"))
        verdict = classify_pair(both, either, self.kb)
        self.assertEqual(verdict.confidence_ab, Fraction(1))
        self.assertEqual(verdict.confidence_ba, Fraction(1, 3))
        self.assertEqual(verdict.class_ab, Verdict.IMPLICATION)
        self.assertEqual(verdict.class_ba, Verdict.INDIFFERENCE)
        self.assertEqual(
            verdict.to_dict()["confidence_ba"], {"numerator": 1, "denominator": 3}
        )

    def test_self_confidence(self):
        formula = Formula.or_(atom("p1"), Formula.not_(atom("p2")))
        verdict = classify_pair(formula, formula, self.kb)
        self.assertEqual(verdict.confidence_ab, 1)
        self.assertEqual(verdict.confidence_ba, 1)

    def test_negation_is_inconsistent(self):
        formula = Formula.and_(atom("p1"), atom("p2"))
        verdict = classify_pair(formula, Formula.not_(formula), self.kb)
        self.assertEqual(verdict.confidence_ab, 0)
        self.assertEqual(verdict.class_ab, Verdict.INCONSISTENCY)

    def test_unsatisfiable_premise(self):
        table = tabular_semantics(Formula.and_(atom("p"), Formula.not_(atom("p"))), "A")
        self.assertEqual(confidence("A", "A0", table), 0)

    def test_support_matches_confidence(self):
        comparison = classify_pair(
            Formula.or_(atom("p1"), atom("p2")), Formula.and_(atom("p1"), atom("p2")), self.kb
        ).comparison_ab
        self.assertEqual(
            support("A", "B", comparison.table), confidence("A", "B", comparison.table)
        )

    def test_specific_place_implies_outside_centre(self):
        kb = load_kb(settings.KB_PATH)
        outside = Term("city centre", negated=True)
        has = Formula.atom(
            Proposition("has", (Term("Newcastle"), Term("traffic")), {"SPACE": [outside]})
        )
        located = Term("Newcastle", specification="city centre", negated=True)
        be = Formula.atom(Proposition("be", (Term("traffic"),), {"SPACE": [located]}))
        verdict = classify_pair(has, be, kb)
        self.assertEqual(verdict.confidence_ab, 1)
        self.assertEqual(verdict.class_ab, Verdict.IMPLICATION)
        self.assertEqual(verdict.confidence_ba, Fraction(1, 2))
        self.assertEqual(verdict.class_ba, Verdict.INDIFFERENCE)


class WorldPropertyTests(SimpleTestCase):
    outcomes = list(CmpOutcome)

    def test_join_matches_enumeration(self):
        generator = random.Random(7)
        pool_a = [unary(f"a{i}") for i in range(3)]
        pool_b = [unary(f"b{i}") for i in range(3)]
        for _ in range(1000):
            first = random_formula(generator, pool_a)
            second = random_formula(generator, pool_b)
            labels_a, labels_b = atom_labels(first, "A"), atom_labels(second, "B")
            constraints = {
                (a, b): generator.choice(self.outcomes)
                for a in labels_a.values()
                for b in labels_b.values()
                if generator.random() < 0.5
            }
            tables = [pair_table(outcome, a, b) for (a, b), outcome in constraints.items()]
            joined = join_all(
                tabular_semantics(first, "A"), tabular_semantics(second, "B"), tables
            )
            self.assertEqual(
                confidence("A", "B", joined), brute_confidence(first, second, constraints)
            )

    def test_equivalence_iff_mutual_confidence(self):
        kb = kb_with()
        generator = random.Random(11)
        pool = [unary(f"p{i}") for i in range(3)]
        for _ in range(200):
            first = random_formula(generator, pool)
            second = random_formula(generator, pool)
            column_a, column_b = semantic_column(first, pool), semantic_column(second, pool)
            if not any(column_a) or not any(column_b):
                continue
            verdict = classify_pair(first, second, kb)
            mutual = verdict.confidence_ab == 1 and verdict.confidence_ba == 1
            self.assertEqual(mutual, column_a == column_b)
            counterexample = any(a and not b for a, b in zip(column_a, column_b))
            if counterexample:
                self.assertLess(verdict.confidence_ab, 1)

    def test_inconsistent_pair_removes_shared_truth(self):
        generator = random.Random(3)
        pool_a, pool_b = [unary("a0"), unary("a1")], [unary("b0"), unary("b1")]
        for _ in range(200):
            first = random_formula(generator, pool_a)
            second = random_formula(generator, pool_b)
            a, b = next(iter(atom_labels(first, "A").values())), next(
                iter(atom_labels(second, "B").values())
            )
            joined = join_all(
                tabular_semantics(first, "A"),
                tabular_semantics(second, "B"),
                [pair_table(NEQ, a, b)],
            )
            self.assertNotIn((1, 1), joined.project(a, b).row_set())

    def test_confidence_is_asymmetric(self):
        verdict = classify_pair(
            Formula.and_(atom("p1"), atom("p2")), Formula.or_(atom("p1"), atom("p2")), kb_with()
        )
        self.assertNotEqual(verdict.confidence_ab, verdict.confidence_ba)
