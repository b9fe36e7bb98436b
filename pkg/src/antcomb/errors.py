"""Error taxonomy.

Every error carries a machine-readable ``category`` string; the CLI maps it to
a structured stderr line and a nonzero exit code.
"""


class SimulationError(Exception):
    """Base class for all package errors."""

    category = "error"


class ValidationError(SimulationError):
    """Invalid scenario/config input; the message names the violated invariant."""

    category = "validation"


class UnsupportedConfigurationError(ValidationError):
    """Structurally unsupported parameter combination (e.g. N >= M)."""

    category = "unsupported-configuration"


class CodebookSizeError(ValidationError):
    """Explicit codebook too large to materialize."""

    category = "codebook-size"


class CodebookModeError(ValidationError):
    """Operation incompatible with the codebook mode (e.g. MRC needs explicit)."""

    category = "codebook-mode"


class DegenerateChannelError(SimulationError):
    """Rank-deficient / ill-conditioned channel matrix."""

    category = "degenerate-channel"


class NotInSpanError(SimulationError):
    """Vector handed to the pseudo-inverse is not in the column span."""

    category = "not-in-span"


class NonHermitianError(SimulationError):
    """Eigen-solver input is not Hermitian."""

    category = "non-hermitian"


class SchedulingError(SimulationError):
    """Ill-conditioned set of quantized directions; caller must drop a user."""

    category = "scheduling"


class InfeasibleGapError(SimulationError):
    """Target rate gap too small for the feedback scaling rule (c <= 0)."""

    category = "infeasible-gap"


class EmitError(SimulationError):
    """Output write failure, with path context."""

    category = "io"
