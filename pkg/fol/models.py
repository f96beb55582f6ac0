"""
Terms, propositions and formulae of the extended first-order logic.

All three are frozen attrs classes, so they hash and compare structurally;
property multimaps are stored as key-sorted tuples of ``(key, (term, ...))``.
"""

from enum import Enum
from typing import Iterator

from attrs import evolve, field, frozen


class Quantity(str, Enum):
    SOME = "◇"
    ALL = "□"


class TermKind(str, Enum):
    VAR = "Var"
    FUNC = "Func"


class Arity(str, Enum):
    UNARY = "Unary"
    BINARY = "Binary"


class FormulaKind(str, Enum):
    ATOM = "Atom"
    NOT = "Not"
    AND = "And"
    OR = "Or"
    EXISTS = "Exists"


def freeze_properties(properties: dict | tuple | None) -> tuple:
    """
    Normalise a property multimap into its hashable form.

    Args:
        properties (dict | tuple | None): Key to list of terms, or an already frozen tuple.

    Returns:
        tuple: ``((key, (term, ...)), ...)`` sorted by key, empty keys dropped.
    """
    if not properties:
        return ()
    items = properties.items() if isinstance(properties, dict) else properties
    return tuple(sorted((key, tuple(values)) for key, values in items if values))


@frozen
class Term:
    """
    A term: a variable or a function symbol with its annotations.

    Attributes:
        name (str): The entity lemma, or ``?k`` for variables.
        kind (TermKind): Var or Func.
        quantity (Quantity): ◇ (some) or □ (all).
        specification (str | None): What qualifies the name ("Newcastle [of] city centre").
        properties (tuple): Frozen property multimap.
        negated (bool): Term-level negation, any entity other than this one.
    """

    name: str
    kind: TermKind = TermKind.FUNC
    quantity: Quantity = Quantity.SOME
    specification: str | None = None
    properties: tuple = field(default=(), converter=freeze_properties)
    negated: bool = False

    @classmethod
    def var(cls, name: str, properties: dict | tuple | None = None) -> "Term":
        return cls(name=name, kind=TermKind.VAR, properties=properties)

    @property
    def is_var(self) -> bool:
        return self.kind == TermKind.VAR

    def negate(self) -> "Term":
        return evolve(self, negated=not self.negated)

    def positive(self) -> "Term":
        return evolve(self, negated=False) if self.negated else self

    def property_map(self) -> dict:
        return {key: list(values) for key, values in self.properties}


@frozen
class Proposition:
    """
    A unary or binary predicate with its properties.

    ``negated`` is only ever set on propositions derived by expansion rules;
    propositions extracted from sentences carry negation in the formula.
    """

    name: str
    args: tuple = field(converter=tuple)
    properties: tuple = field(default=(), converter=freeze_properties)
    negated: bool = False

    def __attrs_post_init__(self):
        if len(self.args) not in (1, 2):
            raise ValueError(f"proposition {self.name} needs 1 or 2 arguments")

    @property
    def arity(self) -> Arity:
        return Arity.UNARY if len(self.args) == 1 else Arity.BINARY

    @property
    def is_binary(self) -> bool:
        return self.arity == Arity.BINARY

    def property_map(self) -> dict:
        return {key: list(values) for key, values in self.properties}

    def negate(self) -> "Proposition":
        return evolve(self, negated=not self.negated)

    def positive(self) -> "Proposition":
        return evolve(self, negated=False) if self.negated else self


@frozen
class Formula:
    """
    A formula tree.

    Atoms hold a proposition, Not one child, And/Or two or more children and
    Exists a binder with one child.
    """

    kind: FormulaKind
    children: tuple = field(default=(), converter=tuple)
    proposition: Proposition | None = None
    binder: str | None = None

    @classmethod
    def atom(cls, proposition: Proposition) -> "Formula":
        return cls(FormulaKind.ATOM, proposition=proposition)

    @classmethod
    def not_(cls, child: "Formula") -> "Formula":
        return cls(FormulaKind.NOT, children=(child,))

    @classmethod
    def and_(cls, *children: "Formula") -> "Formula":
        return cls._nary(FormulaKind.AND, children)

    @classmethod
    def or_(cls, *children: "Formula") -> "Formula":
        return cls._nary(FormulaKind.OR, children)

    @classmethod
    def exists(cls, binder: str, child: "Formula") -> "Formula":
        return cls(FormulaKind.EXISTS, children=(child,), binder=binder)

    @classmethod
    def _nary(cls, kind: FormulaKind, children) -> "Formula":
        flat = []
        for child in children:
            flat.extend(child.children if child.kind == kind else (child,))
        if len(flat) == 1:
            return flat[0]
        return cls(kind, children=flat)

    def iter_atoms(self) -> Iterator[Proposition]:
        if self.kind == FormulaKind.ATOM:
            yield self.proposition
        for child in self.children:
            yield from child.iter_atoms()

    def atoms(self) -> list[Proposition]:
        """Distinct atoms in order of first appearance."""
        return list(dict.fromkeys(self.iter_atoms()))

    def evaluate(self, valuation: dict) -> bool:
        """
        Classical Boolean valuation; existential binders are transparent.

        Args:
            valuation (dict): Proposition to truth value.

        Returns:
            bool: The truth value of the formula.
        """
        if self.kind == FormulaKind.ATOM:
            return bool(valuation[self.proposition])
        if self.kind == FormulaKind.NOT:
            return not self.children[0].evaluate(valuation)
        if self.kind == FormulaKind.AND:
            return all(child.evaluate(valuation) for child in self.children)
        if self.kind == FormulaKind.OR:
            return any(child.evaluate(valuation) for child in self.children)
        return self.children[0].evaluate(valuation)

    def binders(self) -> list[str]:
        found = [self.binder] if self.kind == FormulaKind.EXISTS else []
        for child in self.children:
            found.extend(child.binders())
        return found
