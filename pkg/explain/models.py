"""
Datasets, pipeline traces, explanations and evaluation reports.
"""

from enum import Enum
from fractions import Fraction
from pathlib import Path

from attrs import field, frozen

from apriori.models import DepGraph
from evaluation.models import (
    ClassificationReport,
    ClusteringReport,
    SimilarityMatrix,
    Thresholds,
)
from fol.models import Formula
from kernel.models import Relationship
from reason.models import Verdict, WorldTable, fraction_dict
from rewrite.models import IntermediateGraph


class Method(str, Enum):
    LOGICAL = "logical"
    SG = "sg"
    LG = "lg"
    COSINE = "cosine"


class Clustering(str, Enum):
    AHC = "ahc"
    KMEDOIDS = "kmedoids"


@frozen
class Sentence:
    """
    A dataset sentence: its text, its canonical formula and its dependency graph.

    At least one of ``formula`` and ``graph`` is set. The logical method
    reasons on the compiled graph; the reviewed formula stands in for a
    missing graph and cross-checks a present one.
    """

    text: str
    formula: str | None = None
    graph: Path | None = None


@frozen(eq=False)
class Dataset:
    """
    Sentences with their expected clusters and the gold class of every ordered pair.

    Attributes:
        name (str): The dataset name.
        sentences (tuple): :class:`Sentence` entries, by index.
        expected_clusters (tuple): A partition of the sentence indices.
        expected_pairs (dict): ``(i, j)`` to :class:`Verdict`, for every ordered pair.
    """

    name: str
    sentences: tuple = field(converter=tuple)
    expected_clusters: tuple = field(
        converter=lambda clusters: tuple(tuple(cluster) for cluster in clusters)
    )
    expected_pairs: dict = field(factory=dict)

    @property
    def n(self) -> int:
        return len(self.sentences)

    def gold(self) -> list[Verdict]:
        """Gold classes in row-major order of the ordered pairs."""
        return [self.expected_pairs[i, j] for i in range(self.n) for j in range(self.n)]

    def conflict_pairs(self) -> list[tuple[int, int]]:
        return [
            pair
            for pair, verdict in sorted(self.expected_pairs.items())
            if verdict == Verdict.INCONSISTENCY
        ]


@frozen(eq=False)
class PipelineRun:
    """Every stage a dependency graph went through on its way to a formula."""

    graph: DepGraph
    coalesced: DepGraph
    intermediate: IntermediateGraph
    kernel: Relationship
    formula: Formula


@frozen
class Explanation:
    """
    Why one sentence implies, contradicts or is indifferent to another.

    Attributes:
        sentences (tuple): The two sentence texts.
        formulas (tuple): Their canonical renderings.
        atoms (dict): Column label to rendered atom, for both sentences.
        motivations (dict): ``(label_a, label_b)`` to the :class:`Motivation` of the pair.
        world_table (WorldTable): The joined possible worlds.
        confidence (Fraction): Share of the worlds where the first holds in which the second does.
        support (Fraction): Average of the second sentence over the worlds where the first holds.
    """

    sentences: tuple
    formulas: tuple
    atoms: dict
    motivations: dict
    world_table: WorldTable
    confidence: Fraction
    support: Fraction

    @property
    def verdict(self) -> Verdict:
        return Verdict.from_confidence(self.confidence)

    def motivation_rows(self) -> list[dict]:
        return [
            {
                "atoms": [label_a, label_b],
                "outcome": motivation.outcome.value,
                "case": motivation.case,
            }
            for (label_a, label_b), motivation in self.motivations.items()
        ]

    def to_dict(self) -> dict:
        return {
            "sentences": list(self.sentences),
            "formulas": list(self.formulas),
            "atoms": dict(self.atoms),
            "motivations": self.motivation_rows(),
            "world_table": self.world_table.to_dict(),
            "confidence": fraction_dict(self.confidence),
            "support": fraction_dict(self.support),
            "class": self.verdict.value,
        }


@frozen(eq=False)
class EvaluationReport:
    """
    Everything one method produced on a dataset.

    ``confidences`` is only set for the logical method, ``thresholds`` only for
    the others: the logical method classifies from confidence directly.
    """

    dataset: str
    method: Method
    clustering: Clustering
    k: int
    seed: int
    similarity: SimilarityMatrix
    clusters: list
    linkage: list
    classes: list
    classification: ClassificationReport
    clustering_scores: ClusteringReport
    thresholds: Thresholds | None = None
    confidences: list | None = None

    def to_dict(self) -> dict:
        report = {
            "dataset": self.dataset,
            "method": self.method.value,
            "clustering": self.clustering.value,
            "k": self.k,
            "seed": self.seed,
            "similarity": self.similarity.to_list(),
            "clusters": [list(cluster) for cluster in self.clusters],
            "linkage": self.linkage,
            "thresholds": self.thresholds.to_dict() if self.thresholds else None,
            "classes": [[verdict.value for verdict in row] for row in self.classes],
            "classification": self.classification.to_dict(),
            "clustering_scores": self.clustering_scores.to_dict(),
        }
        if self.confidences is not None:
            report["confidences"] = [[fraction_dict(value) for value in row] for row in self.confidences]
        return report


@frozen
class StageTiming:
    sentence: int
    stage: str
    tokens: int
    median_seconds: float

    def to_row(self) -> list:
        return [self.sentence, self.stage, self.tokens, f"{self.median_seconds:.6f}"]
