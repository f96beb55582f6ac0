"""
Baseline representations, similarity matrices and evaluation reports.
"""

from enum import Enum

import numpy as np
from attrs import field, frozen


class NodeKind(str, Enum):
    SINGLETON = "Singleton"
    AND = "AND"
    OR = "OR"
    NOT = "NOT"


@frozen
class AlignmentNode:
    """
    A graph node as the alignment baselines see it.

    Logical nodes keep their AND/OR/NOT structure; simple graphs flatten
    every node into a singleton.
    """

    kind: NodeKind
    name: str = ""
    children: tuple = field(default=(), converter=tuple)

    @classmethod
    def singleton(cls, name: str) -> "AlignmentNode":
        return cls(NodeKind.SINGLETON, name=name)

    @property
    def is_singleton(self) -> bool:
        return self.kind == NodeKind.SINGLETON

    def flattened(self) -> "AlignmentNode":
        if self.is_singleton:
            return self
        return AlignmentNode.singleton(" ".join(child.flattened().name for child in self.children))


@frozen
class AlignmentEdge:
    source: AlignmentNode | None
    label: str
    target: AlignmentNode | None = None
    negated: bool = False


@frozen(eq=False)
class SimilarityMatrix:
    """
    Pairwise sentence similarities in [0, 1]; row ``i`` column ``j`` scores ``i`` against ``j``.
    """

    values: np.ndarray = field(converter=lambda values: np.asarray(values, dtype=float))

    def __attrs_post_init__(self):
        rows, columns = self.values.shape
        if rows != columns:
            raise ValueError(f"similarity matrix must be square, got {rows}x{columns}")
        if ((self.values < 0) | (self.values > 1)).any():
            raise ValueError("similarities must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def distances(self) -> np.ndarray:
        return 1.0 - self.values

    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.values, self.values.T))

    def to_list(self) -> list:
        return self.values.round(6).tolist()


@frozen
class Thresholds:
    """Scores above ``theta`` are implications, scores below ``vartheta`` inconsistencies."""

    theta: float
    vartheta: float

    def to_dict(self) -> dict:
        return {"theta": self.theta, "vartheta": self.vartheta}


@frozen
class ClassificationReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    support: dict = field(factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
            "support": dict(self.support),
        }


@frozen
class ClusteringReport:
    """Silhouette is None when the clustering has too few or too many labels for it."""

    alignment: float
    purity: float
    ari: float
    silhouette: float | None

    def to_dict(self) -> dict:
        return {
            "alignment": self.alignment,
            "purity": self.purity,
            "ari": self.ari,
            "silhouette": self.silhouette,
        }
