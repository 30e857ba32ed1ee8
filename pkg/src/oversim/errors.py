"""Exception types shared across the package.

Every error raised by library code derives from OversimError so callers
(and the CLI) can distinguish precondition violations from genuine bugs.
"""


class OversimError(Exception):
    """Base class for all package errors."""


class ParseError(OversimError):
    """A CSV cell could not be parsed; message carries row/column location."""


class MissingColumn(OversimError):
    """A named column is absent from the table."""


class DimensionMismatch(OversimError):
    """Vector/matrix shapes disagree with the operation's contract."""


class EmptySide(OversimError):
    """A train/test split would leave one side without any rows."""


class SingleClassData(OversimError):
    """Fitting requires at least two rows with both classes present."""


class NonFiniteIterate(OversimError):
    """The solver produced a non-finite objective or parameter vector."""


class InvalidParameters(OversimError):
    """A numeric argument is outside its documented range."""


class EmptyPolicySet(OversimError):
    """Robust selection needs at least one override policy per candidate."""


class EmptySubpopulation(OversimError):
    """A locally-refit strategy found no training rows for a subpopulation
    whose test rows still need decisions."""


class MissingContext(OversimError):
    """An explanation scope needs context (policy, weights) that was not given."""


class ValidationError(OversimError):
    """CLI-level precondition violation; message names the offending parameter."""
