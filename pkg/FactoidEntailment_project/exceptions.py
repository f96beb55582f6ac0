"""
Errors raised by the sentence-to-logic pipeline and the entailment engine.

Every error carries a stable ``exit_code`` used by the management commands:
validation problems exit with 1, exhausted budgets exit with 2.
"""


class EntailmentError(Exception):
    """
    Base class for all pipeline errors.

    Attributes:
        exit_code (int): The process exit code a command reports for this error.
        stage (str | None): The pipeline stage that raised the error, when known.
    """

    exit_code = 1

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class ParseError(EntailmentError):
    """Malformed input file (JSON or YAML)."""


class ValidationError(EntailmentError):
    """A well-formed input violates a type invariant."""


class CyclicGraphError(EntailmentError):
    """A dependency or intermediate graph contains a cycle."""


class EmptyGroupError(EntailmentError):
    """A GROUPING set has no entities to resolve."""


class NoKernelConstructible(EntailmentError):
    """No verb edge or verb node is available to build a kernel."""


class UnboundStructure(EntailmentError):
    """A group type has no first-order logic counterpart."""


class LengthMismatch(EntailmentError):
    """Predicted and gold label sequences differ in length."""


class NoConflictPairs(EntailmentError):
    """No annotated contradictory pairs are available for a threshold."""


class ExpansionBudgetExceeded(EntailmentError):
    """The expansion fixpoint derived more propositions than allowed."""

    exit_code = 2


class AtomBudgetExceeded(EntailmentError):
    """A formula mentions more distinct atoms than the configured cap."""

    exit_code = 2

    def __init__(self, message: str, atom_count: int = 0, stage: str | None = None):
        super().__init__(message, stage=stage)
        self.atom_count = atom_count
