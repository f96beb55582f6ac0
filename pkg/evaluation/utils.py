import logging
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np
from django.conf import settings
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.spatial.distance import pdist, squareform
from sklearn.metrics import (
    accuracy_score,
    adjusted_rand_score,
    precision_recall_fscore_support,
    silhouette_score,
)

from apriori.models import GroupType, SetOfSingletons, Singleton
from FactoidEntailment_project.exceptions import (
    LengthMismatch,
    NoConflictPairs,
    ValidationError,
)
from reason.models import Verdict
from rewrite.models import FOLDED_LABELS, IntermediateGraph

from .models import (
    AlignmentEdge,
    AlignmentNode,
    ClassificationReport,
    ClusteringReport,
    NodeKind,
    SimilarityMatrix,
    Thresholds,
)

logger = logging.getLogger(__name__)

TOKEN_RE = re.compile(r"[\w']+")
# Far below any gap between two distinct confidences.
TIE_BREAK = 1e-9


def tokens(text: str) -> list[str]:
    return TOKEN_RE.findall(text.lower())


# Baselines


def token_cosine(a: str, b: str) -> float:
    """
    Cosine between the term-frequency vectors of two texts, negative values cut to 0.

    Word order is ignored, so a sentence and its argument-swapped variant
    score 1.
    """
    counts_a, counts_b = Counter(tokens(a)), Counter(tokens(b))
    vocabulary = sorted(counts_a.keys() | counts_b.keys())
    if not vocabulary:
        return 1.0
    u = np.array([counts_a[word] for word in vocabulary], dtype=float)
    v = np.array([counts_b[word] for word in vocabulary], dtype=float)
    norm = np.linalg.norm(u) * np.linalg.norm(v)
    if norm == 0:
        return 0.0
    return float(np.clip(u @ v / norm, 0.0, 1.0))


def token_overlap(a: str, b: str) -> float:
    """Jaccard index of the name tokens; two empty names are identical."""
    left, right = set(tokens(a)), set(tokens(b))
    if not left and not right:
        return 1.0
    return len(left & right) / len(left | right)


def alignment_node(entity) -> AlignmentNode | None:
    if entity is None:
        return None
    if isinstance(entity, Singleton):
        return AlignmentNode.singleton(entity.lemma or entity.named_entity)
    children = [alignment_node(member) for member in entity.entities]
    if entity.group_type == GroupType.OR:
        return AlignmentNode(NodeKind.OR, children=children)
    if entity.group_type == GroupType.NOT:
        return AlignmentNode(NodeKind.NOT, children=children)
    if entity.group_type == GroupType.NEITHER:
        return AlignmentNode(NodeKind.NOT, children=[AlignmentNode(NodeKind.OR, children=children)])
    return AlignmentNode(NodeKind.AND, children=children)


def alignment_edges(graph: IntermediateGraph) -> list[AlignmentEdge]:
    """
    The labelled edges of an intermediate graph: verb edges and the
    dependency edges not folded into a label or a property.
    """
    edges = []
    for edge in graph.edges:
        if edge.label_type != "verb" and edge.label in FOLDED_LABELS:
            continue
        source, target = graph.find(edge.source), graph.find(edge.target)
        if edge.label_type != "verb" and (source is None or target is None):
            continue
        edges.append(
            AlignmentEdge(
                source=alignment_node(source),
                label=edge.label,
                target=alignment_node(target),
                negated=edge.negated,
            )
        )
    return edges


def node_distance(u: AlignmentNode, v: AlignmentNode, similarity: Callable) -> float:
    """
    Distance between two logical nodes, one when neither can entail the other.

    A conjunction matches a singleton through its closest member, a
    singleton matches a disjunction through its closest alternative and a
    negation on one side only complements the distance. Between two sets
    every member of the first is matched to its closest member in the second
    and the distances averaged.
    """
    if u.is_singleton and v.is_singleton:
        return 1.0 - similarity(u.name, v.name)
    if u.kind == NodeKind.AND and v.is_singleton:
        return min(node_distance(x, v, similarity) for x in u.children)
    if u.kind == NodeKind.NOT and v.is_singleton:
        return 1.0 - node_distance(u.children[0], v, similarity)
    if u.is_singleton and v.kind == NodeKind.NOT:
        return 1.0 - node_distance(u, v.children[0], similarity)
    if u.is_singleton and v.kind == NodeKind.OR:
        return min(node_distance(u, y, similarity) for y in v.children)
    if u.kind == NodeKind.NOT and v.kind == NodeKind.NOT:
        return node_distance(u.children[0], v.children[0], similarity)
    if (u.kind, v.kind) in (
        (NodeKind.AND, NodeKind.AND),
        (NodeKind.AND, NodeKind.OR),
        (NodeKind.OR, NodeKind.OR),
    ):
        return float(
            np.mean([min(node_distance(x, y, similarity) for y in v.children) for x in u.children])
        )
    return 1.0


def _node_similarity(u, v, similarity: Callable, logical: bool) -> float:
    if u is None or v is None:
        return 1.0 if u is None and v is None else 0.0
    if logical:
        return 1.0 / (1.0 + node_distance(u, v, similarity))
    return similarity(u.flattened().name, v.flattened().name)


def edge_similarity(
    e: AlignmentEdge,
    f: AlignmentEdge,
    node_sim: Callable = token_overlap,
    edge_sim: Callable = token_overlap,
    logical: bool = False,
) -> float:
    """Product of the source, target and label similarities; 0 when only one edge is negated."""
    if e.negated != f.negated:
        return 0.0
    return (
        _node_similarity(e.source, f.source, node_sim, logical)
        * _node_similarity(e.target, f.target, node_sim, logical)
        * edge_sim(e.label, f.label)
    )


def graph_alignment(
    a: Sequence[AlignmentEdge],
    b: Sequence[AlignmentEdge],
    node_sim: Callable = token_overlap,
    edge_sim: Callable = token_overlap,
    logical: bool = False,
) -> float:
    """
    Edge-matching similarity of two sentence graphs.

    Every edge of ``a`` is matched to its closest edge in ``b``; the mean
    match distance lowers the score and every edge of ``b`` left unmatched
    divides it further.

    Args:
        a (Sequence[AlignmentEdge]): Edges of the first sentence.
        b (Sequence[AlignmentEdge]): Edges of the second sentence.
        node_sim (Callable): Similarity of two node names in [0, 1].
        edge_sim (Callable): Similarity of two edge labels in [0, 1].
        logical (bool): Compare nodes through their logical structure (LG)
            instead of flattening them (SG).

    Returns:
        float: The similarity in [0, 1].

    Raises:
        ValidationError: If either edge set is empty.
    """
    if not a or not b:
        raise ValidationError("graph alignment needs two nonempty edge sets", stage="evaluation")
    total, matched = 0.0, set()
    for e in a:
        distances = [1.0 - edge_similarity(e, f, node_sim, edge_sim, logical) for f in b]
        best = int(np.argmin(distances))
        total += distances[best]
        matched.add(best)
    unmatched = len(b) - len(matched)
    return (1.0 - total / len(a)) / (1.0 + unmatched)


# Matrices


def pairwise(items: Sequence, score: Callable, workers: int | None = None) -> list[list]:
    """Scores every ordered pair of items on a bounded thread pool; row ``i`` holds ``score(items[i], ·)``."""
    n = len(items)
    pairs = [(i, j) for i in range(n) for j in range(n)]
    with ThreadPoolExecutor(max_workers=workers or settings.EVALUATION_WORKERS) as pool:
        results = list(pool.map(lambda pair: score(items[pair[0]], items[pair[1]]), pairs))
    return [results[i * n:(i + 1) * n] for i in range(n)]


def symmetrize(distances: np.ndarray) -> np.ndarray:
    """Averages each distance with its transpose."""
    distances = np.asarray(distances, dtype=float)
    if distances.ndim != 2 or distances.shape[0] != distances.shape[1]:
        raise ValidationError(f"distance matrix must be square, got {distances.shape}", stage="evaluation")
    return (distances + distances.T) / 2.0


# Clustering


def _zero_diagonal(distances: np.ndarray) -> np.ndarray:
    distances = np.array(distances, dtype=float)
    np.fill_diagonal(distances, 0.0)
    return distances


def _clusters(labels) -> list[list[int]]:
    groups = {}
    for index, label in enumerate(labels):
        groups.setdefault(int(label), []).append(index)
    return sorted(groups.values(), key=lambda members: members[0])


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise ValidationError(f"cannot form {k} clusters out of {n} sentences", stage="evaluation")


def _tie_broken(distances: np.ndarray) -> np.ndarray:
    """
    Offsets every distance by a tiny share of how differently the two sentences relate to the rest.

    Equal distances then merge sentences with identical rows first, so ties
    no longer depend on index order.
    """
    distances = _zero_diagonal(distances)
    profiles = squareform(pdist(distances))
    if profiles.max() > 0:
        distances = distances + TIE_BREAK * profiles / profiles.max()
    return distances


def complete_linkage(distances: np.ndarray) -> np.ndarray:
    """The complete-link merge sequence in scipy linkage format."""
    return linkage(squareform(_tie_broken(distances), checks=False), method="complete")


def ahc_complete(distances: np.ndarray, k: int) -> list[list[int]]:
    """
    Agglomerative clustering, complete link, stopped at ``k`` clusters.

    Returns:
        list[list[int]]: Clusters of sentence indices, ordered by their first member.
    """
    n = len(distances)
    _check_k(n, k)
    if n == 1:
        return [[0]]
    labels = cut_tree(complete_linkage(distances), n_clusters=k).ravel()
    return _clusters(labels)


def _seed_medoids(distances: np.ndarray, k: int, rng: np.random.Generator) -> list[int]:
    n = len(distances)
    medoids = [int(rng.integers(n))]
    while len(medoids) < k:
        weights = distances[:, medoids].min(axis=1) ** 2
        weights[medoids] = 0.0
        if weights.sum() == 0:
            candidates = [i for i in range(n) if i not in medoids]
            medoids.append(int(rng.choice(candidates)))
        else:
            medoids.append(int(rng.choice(n, p=weights / weights.sum())))
    return medoids


def k_medoids(
    distances: np.ndarray, k: int, seed: int, max_iter: int | None = None
) -> list[list[int]]:
    """
    k-medoids over a precomputed distance matrix.

    Medoids are seeded by sampling proportionally to the squared distance
    from the medoids already chosen, then assignment and medoid update
    alternate until the medoids stop changing.

    Args:
        distances (np.ndarray): Square distance matrix.
        k (int): Number of clusters.
        seed (int): Seed of the sampling generator.
        max_iter (int, optional): Defaults to ``settings.KMEDOIDS_MAX_ITER``.
    """
    distances = _zero_diagonal(distances)
    n = len(distances)
    _check_k(n, k)
    rng = np.random.default_rng(seed)
    medoids = _seed_medoids(distances, k, rng)
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter or settings.KMEDOIDS_MAX_ITER):
        labels = np.argmin(distances[:, medoids], axis=1)
        labels[medoids] = np.arange(k)
        updated = []
        for cluster in range(k):
            members = np.flatnonzero(labels == cluster)
            costs = distances[np.ix_(members, members)].sum(axis=1)
            updated.append(int(members[np.argmin(costs)]))
        if updated == medoids:
            break
        medoids = updated
    return _clusters(labels)


def complete_partition(clusters: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Adds a singleton cluster for every index no cluster mentions."""
    seen = {index for cluster in clusters for index in cluster}
    full = [sorted(cluster) for cluster in clusters] + [[i] for i in range(n) if i not in seen]
    return sorted(full, key=lambda members: members[0])


# Thresholds and classification


def conflict_ceiling(similarity: SimilarityMatrix, conflict_pairs: Sequence[tuple[int, int]]) -> float:
    if not conflict_pairs:
        raise NoConflictPairs("no contradictory pairs annotated", stage="evaluation")
    return max(float(similarity.values[i, j]) for i, j in conflict_pairs)


def derive_thresholds(
    similarity: SimilarityMatrix,
    clusters: Sequence[Sequence[int]],
    conflict_pairs: Sequence[tuple[int, int]],
) -> Thresholds:
    """
    Derives the implication and inconsistency thresholds of a symmetric baseline.

    ``theta`` is the lowest similarity within a mined cluster (1 when every
    cluster is a singleton), ``vartheta`` the highest similarity of a pair
    annotated as contradictory (0 without such pairs), capped at ``theta``.
    """
    if not clusters:
        raise ValidationError("thresholds need at least one cluster", stage="evaluation")
    within = [
        float(similarity.values[i, j])
        for cluster in clusters
        for i in cluster
        for j in cluster
        if i != j
    ]
    theta = min(within, default=1.0)
    try:
        vartheta = conflict_ceiling(similarity, conflict_pairs)
    except NoConflictPairs:
        vartheta = 0.0
    if vartheta > theta:
        logger.warning("conflict threshold %.4f above entailment threshold %.4f, capped", vartheta, theta)
        vartheta = theta
    return Thresholds(theta=theta, vartheta=vartheta)


def three_way_from_score(score: float, thresholds: Thresholds) -> Verdict:
    """
    Strictly above theta implies, strictly below vartheta conflicts.

    A score of exactly 1 still implies when theta is 1, as it is for all-singleton clusters.
    """
    if score > thresholds.theta or score >= 1.0:
        return Verdict.IMPLICATION
    if score < thresholds.vartheta:
        return Verdict.INCONSISTENCY
    return Verdict.INDIFFERENCE


# Metrics


def _values(labels: Sequence) -> list[str]:
    return [label.value if isinstance(label, Verdict) else str(label) for label in labels]


def classification_metrics(predicted: Sequence, gold: Sequence) -> ClassificationReport:
    """
    Accuracy with macro and weighted precision, recall and F1.

    Raises:
        LengthMismatch: If the sequences differ in length.
    """
    if len(predicted) != len(gold):
        raise LengthMismatch(
            f"{len(predicted)} predictions for {len(gold)} gold labels", stage="evaluation"
        )
    predicted, gold = _values(predicted), _values(gold)
    macro = precision_recall_fscore_support(gold, predicted, average="macro", zero_division=0)
    weighted = precision_recall_fscore_support(gold, predicted, average="weighted", zero_division=0)
    return ClassificationReport(
        accuracy=float(accuracy_score(gold, predicted)),
        macro_precision=float(macro[0]),
        macro_recall=float(macro[1]),
        macro_f1=float(macro[2]),
        weighted_precision=float(weighted[0]),
        weighted_recall=float(weighted[1]),
        weighted_f1=float(weighted[2]),
        support=dict(sorted(Counter(gold).items())),
    )


def _labels(clusters: Sequence[Sequence[int]], n: int) -> np.ndarray:
    labels = np.full(n, -1)
    for label, cluster in enumerate(clusters):
        labels[list(cluster)] = label
    return labels


def clustering_metrics(
    clusters: Sequence[Sequence[int]],
    gold: Sequence[Sequence[int]],
    distances: np.ndarray,
) -> ClusteringReport:
    """
    Alignment, purity, adjusted Rand index and silhouette of a clustering.

    Alignment is the share of expected clusters mined exactly. The silhouette
    needs between 2 and n - 1 clusters and is None otherwise.

    Raises:
        LengthMismatch: If the two partitions cover different numbers of sentences.
    """
    n = sum(len(cluster) for cluster in gold)
    if sum(len(cluster) for cluster in clusters) != n:
        raise LengthMismatch("clusters and expected clusters cover different sentences", stage="evaluation")
    mined = {frozenset(cluster) for cluster in clusters}
    alignment = sum(1 for cluster in gold if frozenset(cluster) in mined) / len(gold)
    purity = sum(
        max(len(set(cluster) & set(expected)) for expected in gold) for cluster in clusters
    ) / n
    predicted, expected = _labels(clusters, n), _labels(gold, n)
    silhouette = None
    if 2 <= len(clusters) <= n - 1:
        silhouette = float(silhouette_score(_zero_diagonal(distances), predicted, metric="precomputed"))
    else:
        logger.warning("no silhouette for %d clusters over %d sentences", len(clusters), n)
    return ClusteringReport(
        alignment=alignment,
        purity=purity,
        ari=float(adjusted_rand_score(expected, predicted)),
        silhouette=silhouette,
    )
