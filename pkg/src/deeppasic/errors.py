"""Exception taxonomy shared across the testbed.

Every named failure mode raised by the public API derives from
:class:`DeepPasicError`, so callers (and the CLI) can catch one base class
and still report the specific condition by type name.
"""


class DeepPasicError(Exception):
    """Base class for all testbed errors."""


class ShapeMismatch(DeepPasicError):
    """Array dimensions disagree with the governing plan or signature."""


class InvalidNoise(DeepPasicError):
    """Noise specification is unusable (nonpositive variance, bad SNR)."""


class InvalidUserCount(DeepPasicError):
    """Fewer than two users where an interference channel is required."""


class InfeasibleBudget(DeepPasicError):
    """Resource budget too small for the requested encoding length."""


class NonIntegralSplit(DeepPasicError):
    """Private-part length does not come out integral in layer units."""


class PlanInconsistent(DeepPasicError):
    """A resource-plan identity is violated (the message names it)."""


class InvalidSplit(DeepPasicError):
    """Private layer count outside [0, E]."""


class DegenerateZeroPower(DeepPasicError):
    """All-zero features cannot be power normalized."""


class EmptyCommon(DeepPasicError):
    """Separation requested for a plan with no common part (C = 0)."""


class InvalidScore(DeepPasicError):
    """Discriminator score outside the open interval (0, 1)."""


class EmptyDataset(DeepPasicError):
    """No usable images were found."""


class TrainingDiverged(DeepPasicError):
    """Loss became non-finite during training."""


class PhaseOrderViolation(DeepPasicError):
    """Training phases invoked out of order."""


class BudgetInfeasible(DeepPasicError):
    """Even the lowest JPEG quality exceeds the bit budget."""


class InvalidConfig(DeepPasicError):
    """Malformed configuration (turbo polynomials, checkpoint version...)."""


class PaddingRequired(DeepPasicError):
    """Bit-stream length not divisible by the modulation order."""


class MissingArtifact(DeepPasicError):
    """A sweep cell needs a checkpoint that does not exist."""


class IoError(DeepPasicError):
    """Output location is not writable."""


class SkippedImageWarning(UserWarning):
    """An ingested image was skipped (e.g. smaller than the crop)."""
