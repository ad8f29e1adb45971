"""Structured exceptions shared across the package."""


class DelayFilterError(Exception):
    """Base class for every error raised by this package."""


# --- model validation ---

class DimensionMismatch(DelayFilterError):
    """Matrix or vector shapes are inconsistent with each other."""


class RankDeficientH(DelayFilterError):
    """Unknown-input map has linearly dependent columns."""


class TooManyOutputs(DelayFilterError):
    """More outputs than states (l > n) is not supported."""


class TooManyInputs(DelayFilterError):
    """Unknown-input dimension must satisfy p < n."""


class NotSymmetric(DelayFilterError):
    pass


class QIndefinite(DelayFilterError):
    """Process-noise covariance has a significantly negative eigenvalue."""


class RNotPositiveDefinite(DelayFilterError):
    pass


class ModelFileError(DelayFilterError):
    """Model file missing, unparseable, or carrying unknown keys."""


# --- delay / rank analysis ---

class DelayOutOfRange(DelayFilterError):
    """Requested delay r outside 0 <= r <= n-1."""


# --- invariant zeros ---

class PencilDegenerate(DelayFilterError):
    """System pencil has normal rank below n + p; zero analysis and the
    unbiasedness theory make no claims for such systems."""


# --- gain synthesis ---

class NotSquare(DelayFilterError):
    """Operation requires equally many outputs and unknown inputs."""


class SingularMarkovParameter(DelayFilterError):
    """CA^rH is numerically singular where an inverse is required."""


class LowerMarkovNonzero(DelayFilterError):
    """A square system with CA^dH != 0 for some d < r admits no unbiased
    gain at delay r, so the square-inverse formula must not be used."""


class NoUnbiasedGainExists(DelayFilterError):
    pass


class InnovationCovarianceSingular(DelayFilterError):
    pass


class PreconditionViolated(DelayFilterError):
    pass


class ConstraintViolated(DelayFilterError):
    """Gain does not satisfy the unbiasedness constraint to tolerance."""


# --- filtering ---

class InfeasibleDelay(DelayFilterError):
    """No unbiased gain exists at the requested delay."""


class GainSingular(DelayFilterError):
    pass


# --- simulation / registry ---

class BadCoefficient(DelayFilterError):
    pass


class BadIndices(DelayFilterError):
    pass


class UnknownExample(DelayFilterError):
    pass
