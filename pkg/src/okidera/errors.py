"""Exception hierarchy shared by all okidera modules."""


class OkidEraError(Exception):
    """Base class for all errors raised by this package."""


# --- signal ingestion -------------------------------------------------------


class MissingChannel(OkidEraError):
    """A declared input/output channel is absent from the data file."""


class NonUniformSampling(OkidEraError):
    """Time stamps are not uniformly spaced."""


class EmptyFile(OkidEraError):
    """Data file contains no samples."""


class BadDimension(OkidEraError):
    """A requested size (channel count, length, ...) is invalid."""


class DimensionMismatch(OkidEraError):
    """Two objects that must agree in shape do not."""


# --- state-space models -----------------------------------------------------


class UnstableSystem(OkidEraError):
    """Operation requires a stable system (spectral radius < 1)."""


# --- realization ------------------------------------------------------------


class InsufficientData(OkidEraError):
    """Not enough Markov blocks to fill the Hankel matrix and its shift."""


class ZeroMatrix(OkidEraError):
    """Matrix is identically zero where a nonzero one is required."""


class RankPolicyUnsatisfiable(OkidEraError):
    """The requested rank policy cannot be met by the given matrix."""


# --- observer identification ------------------------------------------------


class TooFewSamples(OkidEraError):
    """Data record is too short for the requested observer horizon."""


class RankDeficientData(OkidEraError):
    """The regression data matrix has no usable rank (e.g. zero input)."""


# --- analysis ---------------------------------------------------------------


class ZeroNominal(OkidEraError):
    """A nominal value needed for relative error metrics is zero."""


class ShapeMismatch(OkidEraError):
    """Trajectory matrices to be compared have different shapes."""


class DegeneratePencil(OkidEraError):
    """The system pencil is identically singular; zeros are undefined."""


class FrequencyOutOfRange(OkidEraError):
    """A requested frequency lies outside (0, pi/dt]."""


# --- benchmark plants -------------------------------------------------------


class InfeasibleSpec(OkidEraError):
    """The requested plant specification cannot be realized."""


class HorizonTooLong(OkidEraError):
    """Simulating an unstable plant this long would overflow the outputs."""
