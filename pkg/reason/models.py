"""
Comparison outcomes, possible-world tables and pair verdicts.
"""

from enum import Enum
from fractions import Fraction

from attrs import field, frozen


class CmpOutcome(str, Enum):
    EQ = "Eq"
    NEQ = "NEq"
    IMPL_NSPEC = "⇒nspec"
    IMPL_NONE = "⇒None"
    IMPL_DOWN = "⇒↓"
    IMPL_GEN = "↠"
    OMEGA = "ω"

    @property
    def is_implication(self) -> bool:
        return self in IMPLICATIONS


IMPLICATIONS = frozenset(
    {CmpOutcome.IMPL_NSPEC, CmpOutcome.IMPL_NONE, CmpOutcome.IMPL_DOWN, CmpOutcome.IMPL_GEN}
)


class Verdict(str, Enum):
    IMPLICATION = "IMPLICATION"
    INCONSISTENCY = "INCONSISTENCY"
    INDIFFERENCE = "INDIFFERENCE"

    @classmethod
    def from_confidence(cls, confidence: Fraction) -> "Verdict":
        if confidence == 1:
            return cls.IMPLICATION
        if confidence == 0:
            return cls.INCONSISTENCY
        return cls.INDIFFERENCE


def _distinct_rows(rows) -> tuple:
    return tuple(dict.fromkeys(tuple(row) for row in rows))


@frozen
class WorldTable:
    """
    A set of possible worlds, one bit per column.

    Rows keep their insertion order and are deduplicated on construction.

    Attributes:
        columns (tuple): Column labels: atom labels, optionally sentence labels.
        rows (tuple): Bit tuples, one per world.
    """

    columns: tuple = field(converter=tuple)
    rows: tuple = field(default=(), converter=_distinct_rows)

    def __attrs_post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise ValueError(f"duplicate columns in {self.columns}")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row} does not match columns {self.columns}")

    def index(self, column: str) -> int:
        return self.columns.index(column)

    def column(self, column: str) -> list[int]:
        position = self.index(column)
        return [row[position] for row in self.rows]

    def select(self, column: str, value: int = 1) -> "WorldTable":
        position = self.index(column)
        return WorldTable(self.columns, [row for row in self.rows if row[position] == value])

    def project(self, *columns: str) -> "WorldTable":
        positions = [self.index(column) for column in columns]
        return WorldTable(columns, [tuple(row[p] for p in positions) for row in self.rows])

    def row_set(self) -> frozenset:
        return frozenset(self.rows)

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(row) for row in self.rows]}


@frozen
class Motivation:
    """Why two atoms compare as they do: the outcome and the case that produced it."""

    outcome: CmpOutcome
    case: str


@frozen
class Comparison:
    """
    The joined worlds of an ordered sentence pair.

    Attributes:
        atoms_a (tuple): Atom propositions of the first formula, by column order.
        atoms_b (tuple): Atom propositions of the second formula.
        labels_a (tuple): Column labels of ``atoms_a``.
        labels_b (tuple): Column labels of ``atoms_b``.
        motivations (dict): ``(label_a, label_b)`` to :class:`Motivation`.
        table (WorldTable): The joined table, with the sentence columns.
        sentence_a (str): Column label of the first sentence.
        sentence_b (str): Column label of the second sentence.
    """

    atoms_a: tuple
    atoms_b: tuple
    labels_a: tuple
    labels_b: tuple
    motivations: dict
    table: WorldTable
    sentence_a: str = "A"
    sentence_b: str = "B"


@frozen
class PairVerdict:
    """
    Confidences of an ordered pair in both directions and the class of the first.

    The classes derive from the confidences: 1 is an implication, 0 an
    inconsistency, anything else indifference.
    """

    confidence_ab: Fraction
    confidence_ba: Fraction
    comparison_ab: Comparison | None = field(default=None, eq=False, repr=False)
    comparison_ba: Comparison | None = field(default=None, eq=False, repr=False)

    @property
    def class_ab(self) -> Verdict:
        return Verdict.from_confidence(self.confidence_ab)

    @property
    def class_ba(self) -> Verdict:
        return Verdict.from_confidence(self.confidence_ba)

    def to_dict(self) -> dict:
        return {
            "confidence_ab": fraction_dict(self.confidence_ab),
            "confidence_ba": fraction_dict(self.confidence_ba),
            "class_ab": self.class_ab.value,
            "class_ba": self.class_ba.value,
        }


def fraction_dict(value: Fraction) -> dict:
    return {"numerator": value.numerator, "denominator": value.denominator}
