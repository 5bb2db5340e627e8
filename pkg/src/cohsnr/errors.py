"""Exception types shared across the package."""

import numpy as np


class NonPowerOfTwoError(ValueError):
    """Grid size is not a power of two."""


class UndersampledPulseError(ValueError):
    """Oversampling factor too low to represent the shaped pulse without aliasing."""


class GridMismatchError(ValueError):
    """Operands are sampled on incompatible frequency grids."""


class MalformedFileError(ValueError):
    """Channel file violates the expected column/header layout."""


class IllConditionedError(ValueError):
    """Channel matrix is singular or near-singular inside the signal band.

    Carries the offending grid frequencies in ``frequencies``.
    """

    def __init__(self, frequencies):
        self.frequencies = np.atleast_1d(np.asarray(frequencies, dtype=float))
        n = self.frequencies.size
        f0 = self.frequencies[0] if n else float("nan")
        super().__init__(
            f"channel not invertible at {n} in-band frequencies (first: {f0:.6g} Hz)"
        )


class NonFiniteResultError(ArithmeticError):
    """A spectral quantity came out non-finite (unhandled ill-conditioned bins)."""


class NonPositiveResultError(ArithmeticError):
    """An SNR figure came out non-positive; inputs are degenerate."""


class AlignmentFailedError(RuntimeError):
    """Equalized stream could not be aligned to the reference sequence."""


class ConfigError(ValueError):
    """Experiment configuration is invalid."""
