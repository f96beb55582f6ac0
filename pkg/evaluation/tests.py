import numpy as np
from django.test import SimpleTestCase

from apriori.models import DepEdge, GroupType, SetOfSingletons, Singleton
from FactoidEntailment_project.exceptions import LengthMismatch, ValidationError
from reason.models import Verdict
from rewrite.models import IntermediateGraph

from .models import AlignmentEdge, AlignmentNode, NodeKind, SimilarityMatrix, Thresholds
from .utils import (
    ahc_complete,
    alignment_edges,
    classification_metrics,
    clustering_metrics,
    complete_partition,
    derive_thresholds,
    graph_alignment,
    k_medoids,
    node_distance,
    pairwise,
    symmetrize,
    three_way_from_score,
    token_cosine,
    token_overlap,
)

# Two tight pairs far from each other.
BLOCKS = np.array(
    [
        [0.0, 0.1, 0.9, 0.9],
        [0.1, 0.0, 0.9, 0.9],
        [0.9, 0.9, 0.0, 0.1],
        [0.9, 0.9, 0.1, 0.0],
    ]
)


def leaf(name):
    return AlignmentNode.singleton(name)


def group(kind, *names):
    return AlignmentNode(kind, children=[leaf(name) for name in names])


def edge(source, label, target=None, negated=False):
    return AlignmentEdge(source=source, label=label, target=target, negated=negated)


class TokenCosineTests(SimpleTestCase):
    def test_word_order_ignored(self):
        self.assertAlmostEqual(token_cosine("the cat eats the mouse", "the mouse eats the cat"), 1.0)

    def test_disjoint(self):
        self.assertEqual(token_cosine("cats purr", "dogs bark"), 0.0)

    def test_empty_side(self):
        self.assertEqual(token_cosine("", "dogs bark"), 0.0)

    def test_case_insensitive(self):
        self.assertAlmostEqual(token_cosine("Newcastle", "newcastle"), 1.0)

    def test_symmetric_matrix(self):
        sentences = ["the cat eats the mouse", "the mouse eats", "there is traffic", "no traffic"]
        values = pairwise(sentences, token_cosine, workers=2)
        self.assertTrue(SimilarityMatrix(values).is_symmetric())


class TokenOverlapTests(SimpleTestCase):
    def test_partial(self):
        self.assertEqual(token_overlap("city centre", "centre"), 0.5)

    def test_empty_names(self):
        self.assertEqual(token_overlap("", ""), 1.0)


class NodeDistanceTests(SimpleTestCase):
    def test_singletons(self):
        self.assertEqual(node_distance(leaf("cat"), leaf("cat"), token_overlap), 0.0)
        self.assertEqual(node_distance(leaf("cat"), leaf("dog"), token_overlap), 1.0)

    def test_conjunction_against_member(self):
        self.assertEqual(node_distance(group(NodeKind.AND, "cat", "dog"), leaf("cat"), token_overlap), 0.0)

    def test_member_against_disjunction(self):
        self.assertEqual(node_distance(leaf("cat"), group(NodeKind.OR, "dog", "cat"), token_overlap), 0.0)

    def test_disjunction_against_member_is_far(self):
        self.assertEqual(node_distance(group(NodeKind.OR, "dog", "cat"), leaf("cat"), token_overlap), 1.0)

    def test_negation_one_side(self):
        self.assertEqual(node_distance(group(NodeKind.NOT, "cat"), leaf("cat"), token_overlap), 1.0)
        self.assertEqual(node_distance(leaf("cat"), group(NodeKind.NOT, "cat"), token_overlap), 1.0)

    def test_negation_both_sides(self):
        self.assertEqual(node_distance(group(NodeKind.NOT, "cat"), group(NodeKind.NOT, "cat"), token_overlap), 0.0)

    def test_sets_average_closest_members(self):
        distance = node_distance(
            group(NodeKind.AND, "cat", "owl"), group(NodeKind.AND, "cat", "dog"), token_overlap
        )
        self.assertEqual(distance, 0.5)


class GraphAlignmentTests(SimpleTestCase):
    def setUp(self):
        self.eats = edge(leaf("cat"), "eat", leaf("mouse"))

    def test_identity(self):
        self.assertEqual(graph_alignment([self.eats], [self.eats]), 1.0)
        self.assertEqual(graph_alignment([self.eats], [self.eats], logical=True), 1.0)

    def test_swapped_arguments(self):
        swapped = edge(leaf("mouse"), "eat", leaf("cat"))
        self.assertEqual(graph_alignment([self.eats], [swapped]), 0.0)

    def test_negation_flip(self):
        negated = edge(leaf("cat"), "eat", leaf("mouse"), negated=True)
        self.assertEqual(graph_alignment([self.eats], [negated]), 0.0)

    def test_unmatched_edges_penalised(self):
        other = edge(leaf("dog"), "bark")
        self.assertEqual(graph_alignment([self.eats], [self.eats, other]), 0.5)

    def test_missing_endpoints(self):
        intransitive = edge(leaf("dog"), "bark")
        self.assertEqual(graph_alignment([intransitive], [intransitive]), 1.0)
        self.assertEqual(graph_alignment([intransitive], [edge(leaf("dog"), "bark", leaf("cat"))]), 0.0)

    def test_logical_nodes_beat_flattening(self):
        a = [edge(group(NodeKind.AND, "cat", "dog"), "eat")]
        b = [edge(leaf("cat"), "eat")]
        self.assertEqual(graph_alignment(a, b), 0.5)
        self.assertEqual(graph_alignment(a, b, logical=True), 1.0)

    def test_empty_edges(self):
        with self.assertRaises(ValidationError):
            graph_alignment([], [self.eats])


class AlignmentEdgesTests(SimpleTestCase):
    def test_graph_edges(self):
        nodes = {
            1: Singleton(1, "Cats"),
            2: Singleton(2, "eat", pos="VBP", type="VERB"),
            3: SetOfSingletons(3, [Singleton(4, "mice"), Singleton(5, "rats")], GroupType.NEITHER),
            6: Singleton(6, "the"),
        }
        edges = [
            DepEdge(1, 3, "eat", label_type="verb", verb_id=2),
            DepEdge(4, 6, "det"),
        ]
        graph = IntermediateGraph("Cats eat neither mice nor rats", nodes, edges)
        [found] = alignment_edges(graph)
        self.assertEqual(found.source, leaf("Cats"))
        self.assertEqual(found.label, "eat")
        self.assertEqual(found.target.kind, NodeKind.NOT)
        self.assertEqual(found.target.children[0], group(NodeKind.OR, "mice", "rats"))


class SymmetrizeTests(SimpleTestCase):
    def test_average(self):
        symmetric = symmetrize([[0.0, 0.0], [2 / 3, 0.0]])
        self.assertAlmostEqual(symmetric[0, 1], 1 / 3)
        self.assertAlmostEqual(symmetric[1, 0], 1 / 3)

    def test_not_square(self):
        with self.assertRaises(ValidationError):
            symmetrize([[0.0, 1.0]])


class AhcCompleteTests(SimpleTestCase):
    def test_blocks(self):
        self.assertEqual(ahc_complete(BLOCKS, 2), [[0, 1], [2, 3]])

    def test_one_cluster_per_sentence(self):
        self.assertEqual(ahc_complete(BLOCKS, 4), [[0], [1], [2], [3]])

    def test_single_cluster(self):
        self.assertEqual(ahc_complete(BLOCKS, 1), [[0, 1, 2, 3]])

    def test_too_many_clusters(self):
        with self.assertRaises(ValidationError):
            ahc_complete(BLOCKS, 5)

    def test_zero_ties_merge_identical_rows_first(self):
        # 0 and 1 are at distance 0 but relate differently to 5; 2, 3 and 4 are interchangeable.
        distances = np.array(
            [
                [0.0, 0.0, 1.0, 1.0, 1.0, 0.5],
                [0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
                [1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                [1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                [1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
                [0.5, 1.0, 1.0, 1.0, 1.0, 0.0],
            ]
        )
        self.assertEqual(ahc_complete(distances, 4), [[0], [1], [2, 3, 4], [5]])
        self.assertEqual(ahc_complete(distances[::-1, ::-1], 4), [[0], [1, 2, 3], [4], [5]])


class KMedoidsTests(SimpleTestCase):
    def test_blocks(self):
        self.assertEqual(k_medoids(BLOCKS, 2, seed=0), [[0, 1], [2, 3]])

    def test_seeded_determinism(self):
        generator = np.random.default_rng(3)
        points = generator.random((12, 2))
        distances = np.linalg.norm(points[:, None] - points[None, :], axis=-1)
        self.assertEqual(k_medoids(distances, 3, seed=5), k_medoids(distances, 3, seed=5))

    def test_partition(self):
        clusters = k_medoids(BLOCKS, 3, seed=1)
        self.assertEqual(sorted(i for cluster in clusters for i in cluster), [0, 1, 2, 3])
        self.assertEqual(len(clusters), 3)


class CompletePartitionTests(SimpleTestCase):
    def test_adds_singletons(self):
        self.assertEqual(complete_partition([[2, 0]], 4), [[0, 2], [1], [3]])


class ThresholdTests(SimpleTestCase):
    def setUp(self):
        self.similarity = SimilarityMatrix([[1.0, 0.8, 0.2], [0.8, 1.0, 0.3], [0.2, 0.3, 1.0]])

    def test_derived(self):
        thresholds = derive_thresholds(self.similarity, [[0, 1], [2]], [(0, 2)])
        self.assertEqual(thresholds, Thresholds(theta=0.8, vartheta=0.2))

    def test_no_conflicts(self):
        thresholds = derive_thresholds(self.similarity, [[0, 1], [2]], [])
        self.assertEqual(thresholds.vartheta, 0.0)

    def test_singletons_only(self):
        thresholds = derive_thresholds(self.similarity, [[0], [1], [2]], [(1, 2)])
        self.assertEqual(thresholds, Thresholds(theta=1.0, vartheta=0.3))

    def test_conflict_capped(self):
        with self.assertLogs("evaluation.utils", "WARNING"):
            thresholds = derive_thresholds(self.similarity, [[0, 1, 2]], [(0, 1)])
        self.assertEqual(thresholds, Thresholds(theta=0.2, vartheta=0.2))

    def test_three_way(self):
        thresholds = Thresholds(theta=0.8, vartheta=0.2)
        self.assertEqual(three_way_from_score(0.9, thresholds), Verdict.IMPLICATION)
        self.assertEqual(three_way_from_score(0.8, thresholds), Verdict.INDIFFERENCE)
        self.assertEqual(three_way_from_score(0.1, thresholds), Verdict.INCONSISTENCY)
        self.assertEqual(three_way_from_score(1.0, thresholds), Verdict.IMPLICATION)

    def test_three_way_boundaries(self):
        clusters = Thresholds(theta=0.8, vartheta=0.3)
        self.assertEqual(three_way_from_score(0.8, clusters), Verdict.INDIFFERENCE)
        self.assertEqual(three_way_from_score(0.81, clusters), Verdict.IMPLICATION)
        singletons = Thresholds(theta=1.0, vartheta=0.3)
        self.assertEqual(three_way_from_score(0.99, singletons), Verdict.INDIFFERENCE)
        self.assertEqual(three_way_from_score(1.0, singletons), Verdict.IMPLICATION)
        self.assertEqual(three_way_from_score(0.3, singletons), Verdict.INDIFFERENCE)
        self.assertEqual(three_way_from_score(0.29, singletons), Verdict.INCONSISTENCY)


class ClassificationMetricsTests(SimpleTestCase):
    def test_perfect(self):
        gold = [Verdict.IMPLICATION, Verdict.INDIFFERENCE, Verdict.INCONSISTENCY]
        report = classification_metrics(gold, gold)
        self.assertEqual(report.accuracy, 1.0)
        self.assertEqual(report.macro_f1, 1.0)
        self.assertEqual(report.weighted_f1, 1.0)

    def test_partial(self):
        gold = [Verdict.IMPLICATION, Verdict.IMPLICATION, Verdict.INDIFFERENCE]
        predicted = [Verdict.IMPLICATION, Verdict.INDIFFERENCE, Verdict.INDIFFERENCE]
        report = classification_metrics(predicted, gold)
        self.assertAlmostEqual(report.accuracy, 2 / 3)
        self.assertAlmostEqual(report.macro_precision, 0.75)
        self.assertAlmostEqual(report.macro_recall, 0.75)
        self.assertEqual(report.support, {"IMPLICATION": 2, "INDIFFERENCE": 1})

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            classification_metrics([Verdict.IMPLICATION], [])


class ClusteringMetricsTests(SimpleTestCase):
    def test_exact(self):
        report = clustering_metrics([[0, 1], [2, 3]], [[0, 1], [2, 3]], BLOCKS)
        self.assertEqual(report.alignment, 1.0)
        self.assertEqual(report.purity, 1.0)
        self.assertAlmostEqual(report.ari, 1.0)
        self.assertGreater(report.silhouette, 0.8)

    def test_cluster_order_ignored(self):
        report = clustering_metrics([[2, 3], [0, 1]], [[0, 1], [2, 3]], BLOCKS)
        self.assertAlmostEqual(report.ari, 1.0)

    def test_singletons(self):
        with self.assertLogs("evaluation.utils", "WARNING"):
            report = clustering_metrics([[0], [1], [2], [3]], [[0, 1], [2, 3]], BLOCKS)
        self.assertEqual(report.alignment, 0.0)
        self.assertEqual(report.purity, 1.0)
        self.assertAlmostEqual(report.ari, 0.0)
        self.assertIsNone(report.silhouette)

    def test_silhouette_needs_two_to_n_minus_one_clusters(self):
        with self.assertLogs("evaluation.utils", "WARNING") as logs:
            whole = clustering_metrics([[0, 1, 2, 3]], [[0, 1], [2, 3]], BLOCKS)
        self.assertIsNone(whole.silhouette)
        self.assertIn("no silhouette for 1 clusters over 4 sentences", logs.output[0])
        self.assertEqual(whole.purity, 0.5)
        with self.assertLogs("evaluation.utils", "WARNING"):
            apart = clustering_metrics([[0], [1], [2], [3]], [[0, 1], [2, 3]], BLOCKS)
        self.assertIsNone(apart.silhouette)
        self.assertEqual(apart.purity, 1.0)
        three =clustering_metrics([[0, 1], [2], [3]], [[0, 1], [2, 3]], BLOCKS)
        self.assertIsNotNone(three.silhouette)
        self.assertEqual(three.alignment, 0.5)

    def test_coverage_mismatch(self):
        with self.assertRaises(LengthMismatch):
            clustering_metrics([[0, 1]], [[0, 1], [2, 3]], BLOCKS)


class PairwiseTests(SimpleTestCase):
    def test_ordered_pairs(self):
        values = pairwise([1, 2, 3], lambda a, b: a * 10 + b, workers=2)
        self.assertEqual(values, [[11, 12, 13], [21, 22, 23], [31, 32, 33]])
