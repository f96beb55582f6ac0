import csv
import json
import tempfile
from collections import Counter
from fractions import Fraction
from io import StringIO
from pathlib import Path

from attrs import evolve
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from apriori.utils import load_dep_graph
from FactoidEntailment_project.exceptions import ParseError, ValidationError
from fol.utils import render
from kb.utils import load_kb
from kernel.utils import render_kernel
from reason.models import Verdict

from .models import Clustering, Method
from .utils import (
    STAGES,
    bench,
    build_dataset,
    evaluate,
    explain_pair,
    formula_edges,
    load_dataset,
    parse_formula,
    render_report,
    run_pipeline,
    sentence_formula,
    trace,
)

FIXTURES = Path(settings.BASE_DIR) / "explain" / "fixtures"
GRAPHS = FIXTURES / "graphs"
GOLDENS = FIXTURES / "goldens"


def dataset_path(name):
    return str(FIXTURES / f"{name}.yaml")


class ExplainTestCase(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.kb = load_kb(settings.KB_PATH)
        cls.datasets = {
            name: load_dataset(dataset_path(name)) for name in ("connectives", "voice", "space_time")
        }


class DatasetTests(ExplainTestCase):
    def test_class_splits(self):
        splits = {"connectives": (15, 16, 33), "voice": (10, 8, 18), "space_time": (32, 27, 110)}
        for name, (implications, inconsistencies, indifferences) in splits.items():
            with self.subTest(dataset=name):
                counts = Counter(self.datasets[name].gold())
                self.assertEqual(counts[Verdict.IMPLICATION], implications)
                self.assertEqual(counts[Verdict.INCONSISTENCY], inconsistencies)
                self.assertEqual(counts[Verdict.INDIFFERENCE], indifferences)

    def test_graph_paths_resolved(self):
        sentence = self.datasets["voice"].sentences[1]
        self.assertEqual(sentence.graph, GRAPHS / "voice_1.json")
        self.assertEqual(self.datasets["space_time"].sentences[2].graph, GRAPHS / "rewriting_3.json")

    def test_conflict_pairs(self):
        self.assertEqual(
            self.datasets["voice"].conflict_pairs(),
            [(0, 4), (1, 4), (2, 5), (3, 5), (4, 0), (4, 1), (5, 2), (5, 3)],
        )

    def test_unlisted_pairs_are_indifferent(self):
        document = {"sentences": [{"text": "a", "formula": "be(◇a)"}], "expected_clusters": [[0]]}
        dataset = build_dataset(document)
        self.assertEqual(dataset.expected_pairs, {(0, 0): Verdict.INDIFFERENCE})

    def test_clusters_must_partition(self):
        document = {
            "sentences": [{"text": "a", "formula": "be(◇a)"}, {"text": "b", "formula": "be(◇b)"}],
            "expected_clusters": [[0], [0, 1]],
        }
        with self.assertRaisesMessage(ValidationError, "partition"):
            build_dataset(document)

    def test_pair_out_of_range(self):
        document = {
            "sentences": [{"text": "a", "formula": "be(◇a)"}],
            "expected_clusters": [[0]],
            "expected_pairs": {"IMPLICATION": [[0, 3]]},
        }
        with self.assertRaisesMessage(ValidationError, "outside"):
            build_dataset(document)

    def test_pair_with_two_classes(self):
        document = {
            "sentences": [{"text": "a", "formula": "be(◇a)"}],
            "expected_clusters": [[0]],
            "expected_pairs": {"IMPLICATION": [[0, 0]], "INCONSISTENCY": [[0, 0]]},
        }
        with self.assertRaises(ValidationError):
            build_dataset(document)

    def test_schema_violations(self):
        documents = [
            {"sentences": [{"text": "a"}], "expected_clusters": [[0]]},
            {"sentences": [{"text": "a", "formula": "be(◇a)"}], "expected_clusters": [[0]], "extra": 1},
            {
                "sentences": [{"text": "a", "formula": "be(◇a)"}],
                "expected_clusters": [[0]],
                "expected_pairs": {"MAYBE": []},
            },
            ["not", "a", "mapping"],
        ]
        for document in documents:
            with self.subTest(document=document):
                with self.assertRaises(ParseError):
                    build_dataset(document)

    def test_missing_and_malformed_files(self):
        with self.assertRaises(ParseError):
            load_dataset(FIXTURES / "missing.yaml")
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "broken.yaml"
            path.write_text("sentences: [unclosed\n", encoding="utf-8")
            with self.assertRaisesMessage(ParseError, "line"):
                load_dataset(path)


class PipelineTests(ExplainTestCase):
    def test_goldens(self):
        for line in (GOLDENS / "parse_graphs.txt").read_text(encoding="utf-8").splitlines():
            name, expected = line.split("\t")
            with self.subTest(graph=name):
                formula = run_pipeline(load_dep_graph(GRAPHS / name), self.kb).formula
                self.assertEqual(render(formula), expected)

    def test_rewriting_goldens(self):
        for line in (GOLDENS / "rewriting.txt").read_text(encoding="utf-8").splitlines():
            name, stage, expected = line.split("\t")
            with self.subTest(graph=name, stage=stage):
                run = run_pipeline(load_dep_graph(GRAPHS / name), self.kb)
                emitted = render_kernel(run.kernel) if stage == "kernel" else render(run.formula)
                self.assertEqual(emitted, expected)

    def test_compiled_graphs_match_reviewed_formulas(self):
        for name in ("connectives", "voice", "space_time"):
            for sentence in self.datasets[name].sentences:
                with self.subTest(sentence=sentence.text):
                    compiled = run_pipeline(load_dep_graph(sentence.graph), self.kb).formula
                    self.assertEqual(render(compiled), sentence.formula)

    def test_trace(self):
        run = run_pipeline(load_dep_graph(GRAPHS / "connectives_2.json"), self.kb)
        steps = trace(run)
        self.assertEqual([stage for stage, _ in steps], ["graph", "apriori", "rewrite", "kernel", "fol"])
        self.assertIn("conj(Alice, Bob)", steps[0][1])
        self.assertEqual(steps[-1][1], "play(◇Alice, ◇football) ∧ play(◇Bob, ◇football)")

    def test_compiled_formula_used(self):
        sentence = self.datasets["space_time"].sentences[9]
        reviewed = evolve(sentence, formula="has(◇Newcastle, ◇traffic)")
        with self.assertLogs("explain.utils", "WARNING") as logs:
            formula = sentence_formula(reviewed, self.kb)
        self.assertEqual(render(formula), sentence.formula)
        self.assertIn("differs from reviewed", logs.output[0])

    def test_formula_only_sentence(self):
        dataset = build_dataset({"sentences": [{"text": "a", "formula": "be(◇a)"}], "expected_clusters": [[0]]})
        self.assertEqual(render(sentence_formula(dataset.sentences[0], self.kb)), "be(◇a)")

    def test_malformed_formula(self):
        with self.assertRaises(ParseError) as caught:
            parse_formula("play(◇Alice")
        self.assertEqual(caught.exception.stage, "fol")

    def test_formula_edges(self):
        (negated,) = formula_edges(parse_formula("¬(eat(◇cat, ◇mouse))"))
        self.assertEqual((negated.label, negated.negated), ("eat", True))
        self.assertEqual(negated.target.name, "mouse")
        (unary,) = formula_edges(parse_formula("be(◇traffic)[SPACE: ¬◇city centre]"))
        self.assertFalse(unary.negated)
        self.assertIsNone(unary.target)


class ExplanationTests(ExplainTestCase):
    def explain(self, first, second):
        sentences = self.datasets["space_time"].sentences
        return explain_pair(
            sentence_formula(sentences[first], self.kb),
            sentence_formula(sentences[second], self.kb),
            self.kb,
            texts=(sentences[first].text, sentences[second].text),
        )

    def assertMatchesGolden(self, explanation, name):
        golden = json.loads((GOLDENS / name).read_text(encoding="utf-8"))
        emitted = explanation.to_dict()
        for key, value in golden.items():
            self.assertEqual(emitted[key], value, key)

    def test_specific_outside_implies_general_outside(self):
        explanation = self.explain(11, 2)
        self.assertEqual(explanation.confidence, 1)
        self.assertEqual(explanation.verdict, Verdict.IMPLICATION)
        self.assertMatchesGolden(explanation, "compare_11_2.json")

    def test_reverse_is_indifferent(self):
        explanation = self.explain(2, 11)
        self.assertEqual(explanation.confidence, Fraction(1, 2))
        self.assertEqual(explanation.verdict, Verdict.INDIFFERENCE)
        self.assertMatchesGolden(explanation, "compare_2_11.json")

    def test_self_implication(self):
        for index in range(self.datasets["space_time"].n):
            with self.subTest(sentence=index):
                self.assertEqual(self.explain(index, index).confidence, 1)
        explanation = self.explain(11, 11)
        self.assertEqual(explanation.motivation_rows()[0]["outcome"], "Eq")

    def test_world_table_covers_atoms(self):
        explanation = self.explain(12, 6)
        for label in explanation.atoms:
            self.assertIn(label, explanation.world_table.columns)
        self.assertEqual(explanation.support, explanation.confidence)
        self.assertEqual(explanation.verdict, Verdict.INCONSISTENCY)

    def test_report(self):
        html = render_report(self.explain(11, 2))
        self.assertIn("IMPLICATION: confidence 1", html)
        self.assertIn("expansion entails", html)
        self.assertIn("Newcastle has traffic but not in the city centre", html)
        self.assertIn('<th class="sentence">B</th>', html)


class EvaluateTests(ExplainTestCase):
    def test_logical_connectives(self):
        with self.assertLogs("evaluation.utils", "WARNING"):
            report = evaluate(self.datasets["connectives"], Method.LOGICAL, self.kb)
        self.assertEqual(report.classification.accuracy, 1.0)
        self.assertEqual(report.classification.macro_f1, 1.0)
        self.assertEqual(report.classification.weighted_f1, 1.0)
        self.assertEqual(report.classification.support[Verdict.INCONSISTENCY], 16)
        self.assertIsNone(report.thresholds)
        self.assertEqual(report.confidences[2][3], 1)
        self.assertEqual(report.confidences[3][2], Fraction(1, 3))

    def test_active_and_passive(self):
        report = evaluate(self.datasets["voice"], Method.LOGICAL, self.kb)
        self.assertEqual(report.classification.accuracy, 1.0)
        self.assertEqual(report.clusters, [[0, 1], [2, 3], [4], [5]])
        scores = report.clustering_scores
        self.assertEqual((scores.alignment, scores.purity), (1.0, 1.0))
        self.assertAlmostEqual(scores.ari, 1.0)
        self.assertEqual(len(report.linkage), 5)
        self.assertEqual(report.linkage[0][2], 0.0)

    def test_space_and_time(self):
        report = evaluate(self.datasets["space_time"], Method.LOGICAL, self.kb, k=9)
        self.assertEqual(report.classification.accuracy, 1.0)
        self.assertEqual(report.classification.macro_f1, 1.0)
        self.assertEqual(
            report.clusters, [[0, 1, 9], [2], [3], [4], [5], [6, 7, 8], [10], [11], [12]]
        )
        scores = report.clustering_scores
        self.assertEqual((scores.alignment, scores.purity), (1.0, 1.0))
        self.assertAlmostEqual(scores.ari, 1.0)

    def test_only_the_logical_matrix_is_asymmetric(self):
        dataset = self.datasets["space_time"]
        logical = evaluate(dataset, Method.LOGICAL, self.kb, k=8)
        self.assertFalse(logical.similarity.is_symmetric())
        self.assertEqual(logical.similarity.values[11, 2], 1.0)
        self.assertEqual(logical.similarity.values[2, 11], 0.5)
        for method in (Method.COSINE, Method.SG, Method.LG):
            with self.subTest(method=method):
                report = evaluate(dataset, method, self.kb, k=8)
                self.assertTrue(report.similarity.is_symmetric())
                self.assertIsNotNone(report.thresholds)

    def test_bag_of_words_ignores_structure(self):
        report = evaluate(self.datasets["voice"], Method.COSINE, self.kb)
        self.assertAlmostEqual(report.similarity.values[0, 2], 1.0)
        self.assertLess(report.classification.accuracy, 1.0)

    def test_graph_baselines_on_compiled_graphs(self):
        for method in (Method.SG, Method.LG):
            with self.subTest(method=method):
                report = evaluate(self.datasets["voice"], method, self.kb)
                self.assertEqual(len(report.classes), 6)
                self.assertLessEqual(report.thresholds.vartheta, report.thresholds.theta)

    def test_k_medoids(self):
        report = evaluate(
            self.datasets["voice"], Method.LOGICAL, self.kb, clustering=Clustering.KMEDOIDS, seed=3
        )
        self.assertEqual(len(report.clusters), 4)
        self.assertEqual(sorted(i for cluster in report.clusters for i in cluster), list(range(6)))

    def test_deterministic(self):
        first = evaluate(self.datasets["voice"], Method.LG, self.kb)
        second = evaluate(self.datasets["voice"], Method.LG, self.kb)
        self.assertEqual(
            json.dumps(first.to_dict(), sort_keys=True), json.dumps(second.to_dict(), sort_keys=True)
        )


class BenchTests(ExplainTestCase):
    def test_stage_order(self):
        timings = bench(self.datasets["voice"], self.kb, repetitions=1)
        self.assertEqual(len(timings), 6 * len(STAGES))
        self.assertEqual([t.stage for t in timings[: len(STAGES)]], list(STAGES))
        self.assertTrue(all(t.median_seconds >= 0 for t in timings))
        self.assertEqual(timings[0].tokens, 5)

    def test_compiled_sentences(self):
        timings = bench(self.datasets["space_time"], self.kb, repetitions=1)
        self.assertEqual(len(timings), 13 * len(STAGES))

    def test_formula_only_sentences(self):
        document = {
            "sentences": [{"text": f"s{i}", "formula": "be(◇a)"} for i in range(13)],
            "expected_clusters": [list(range(13))],
        }
        timings = bench(build_dataset(document), self.kb, repetitions=1)
        self.assertEqual([t.stage for t in timings[:2]], ["fol", "reason"])
        self.assertEqual(len(timings), 2 * 13)

    def test_repetitions(self):
        with self.assertRaises(ValidationError):
            bench(self.datasets["voice"], self.kb, repetitions=0)


class CommandTests(SimpleTestCase):
    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO(), **options)
        return out.getvalue()

    def test_parse(self):
        self.assertEqual(self.call("parse", str(GRAPHS / "connectives_7.json")).strip(), "¬(play(◇Alice, ◇football) ∨ play(◇Bob, ◇football))")

    def test_parse_trace(self):
        lines = self.call("parse", str(GRAPHS / "voice_1.json"), trace=True).splitlines()
        self.assertEqual([line.split(":")[0] for line in lines], ["graph", "apriori", "rewrite", "kernel", "fol"])
        self.assertEqual(lines[-1], "fol: eat(◇cat, ◇mouse)")

    def test_parse_malformed_graph(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "broken.json"
            path.write_text('{"nodes": [', encoding="utf-8")
            with self.assertRaises(CommandError) as caught:
                self.call("parse", str(path))
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn("[apriori]", str(caught.exception))
        self.assertIn("offset", str(caught.exception))

    def test_compare(self):
        with tempfile.TemporaryDirectory() as directory:
            output = self.call("compare", "11", "2", dataset=dataset_path("space_time"), html=directory)
            self.assertTrue((Path(directory) / "report.html").exists())
        explanation = json.loads(output)
        self.assertEqual(explanation["confidence"], {"numerator": 1, "denominator": 1})
        self.assertEqual(explanation["class"], "IMPLICATION")

    def test_compare_graph_files(self):
        output = self.call("compare", str(GRAPHS / "connectives_2.json"), str(GRAPHS / "connectives_3.json"))
        self.assertEqual(json.loads(output)["class"], "IMPLICATION")
        output = self.call("compare", str(GRAPHS / "connectives_3.json"), str(GRAPHS / "connectives_2.json"))
        self.assertEqual(json.loads(output)["confidence"], {"numerator": 1, "denominator": 3})

    def test_compare_bad_index(self):
        with self.assertRaises(CommandError) as caught:
            self.call("compare", "0", "13", dataset=dataset_path("space_time"))
        self.assertEqual(caught.exception.returncode, 1)
        self.assertIn("[explain]", str(caught.exception))

    @override_settings(ATOM_CAP=1)
    def test_atom_budget(self):
        with self.assertRaises(CommandError) as caught:
            self.call("compare", "2", "3", dataset=dataset_path("connectives"))
        self.assertEqual(caught.exception.returncode, 2)
        self.assertIn("2 atoms", str(caught.exception))

    def test_classify(self):
        classes = json.loads(self.call("classify", dataset=dataset_path("voice")))["classes"]
        self.assertEqual(
            classes[0],
            ["IMPLICATION", "IMPLICATION", "INDIFFERENCE", "INDIFFERENCE", "INCONSISTENCY", "INDIFFERENCE"],
        )

    def test_evaluate(self):
        report = json.loads(self.call("evaluate", "--dataset", dataset_path("voice"), "--stage", "logical"))
        self.assertEqual(report["classification"]["accuracy"], 1.0)
        self.assertEqual(report["clusters"], [[0, 1], [2, 3], [4], [5]])
        report = json.loads(self.call("evaluate", dataset=dataset_path("voice"), method="cosine", k=2))
        self.assertEqual(report["method"], "cosine")
        self.assertEqual(len(report["clusters"]), 2)

    def test_evaluate_without_apriori(self):
        report = json.loads(
            self.call("evaluate", dataset=dataset_path("connectives"), method="sg", no_apriori=True)
        )
        self.assertEqual(len(report["similarity"]), 8)

    def test_bench(self):
        rows = list(csv.reader(StringIO(self.call("bench", dataset=dataset_path("voice"), repetitions=1))))
        self.assertEqual(rows[0], ["sentence", "stage", "tokens", "median_seconds"])
        self.assertEqual(len(rows), 1 + 6 * len(STAGES))
        self.assertEqual([row[1] for row in rows[1:6]], list(STAGES))
