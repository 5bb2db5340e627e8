"""Frequency-grid bookkeeping, pulse spectra, and spectral folding.

These are the scalar-spectrum primitives the channel, analytic-SNR and
simulator layers all share. Everything here is an immutable value; all
functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, NonPowerOfTwoError, UndersampledPulseError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=True)
class FrequencyGrid:
    """Uniform FFT-compatible frequency axis.

    The axis has ``n_points`` samples spaced ``df = baud_rate *
    samples_per_symbol / n_points`` apart, spanning ``[-sps/(2T),
    +sps/(2T))`` with f = 0 exactly on a sample. ``samples_per_symbol >= 2``
    guarantees the span covers the full shaped-pulse bandwidth for any
    roll-off up to 1.
    """

    baud_rate: float
    samples_per_symbol: int
    n_points: int

    def __post_init__(self):
        if self.baud_rate <= 0:
            raise ValueError(f"baud_rate must be > 0, got {self.baud_rate}")
        if int(self.samples_per_symbol) != self.samples_per_symbol or self.samples_per_symbol < 2:
            raise UndersampledPulseError(
                f"samples_per_symbol must be an integer >= 2, got {self.samples_per_symbol}"
            )
        if not _is_power_of_two(self.n_points):
            raise NonPowerOfTwoError(f"n_points must be a power of two, got {self.n_points}")

    @property
    def df(self) -> float:
        """Frequency step in Hz."""
        return self.baud_rate * self.samples_per_symbol / self.n_points

    @property
    def sample_rate(self) -> float:
        """Time-domain sample rate implied by the grid span, Hz."""
        return self.baud_rate * self.samples_per_symbol

    @property
    def symbol_period(self) -> float:
        return 1.0 / self.baud_rate

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Ascending frequency values; f = 0 sits at index n_points // 2."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.df


def build_grid(baud_rate: float, samples_per_symbol: int, n_points: int) -> FrequencyGrid:
    """Construct a validated :class:`FrequencyGrid`."""
    return FrequencyGrid(baud_rate, samples_per_symbol, n_points)


@dataclass(frozen=True)
class ScalarSpectrum:
    """Per-frequency samples (real for PSD/SNR roles, complex for transfer functions)."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values))
        if v.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"expected {self.grid.n_points} samples, got shape {v.shape}"
            )
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class FoldedSpectrum:
    """A real spectrum restricted to one symbol-rate period [-1/(2T), +1/(2T))."""

    df: float
    symbol_period: float
    values: np.ndarray

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        n = self.n_points
        return (np.arange(n) - n // 2) * self.df


@dataclass(frozen=True)
class PulseShape:
    """Square-root raised-cosine transmit pulse (the only kind supported)."""

    roll_off: float
    kind: str = "srrc"

    def __post_init__(self):
        if not 0.0 <= self.roll_off <= 1.0:
            raise ValueError(f"roll_off must be in [0, 1], got {self.roll_off}")
        if self.kind != "srrc":
            raise ValueError(f"unsupported pulse kind {self.kind!r}")


def rrc_amplitude(f, T: float, roll_off: float):
    """Root-raised-cosine amplitude response, normalized to 1 at f = 0.

    Returns sqrt(RC(f)) where RC is the raised cosine: 1 inside
    |f| <= (1-b)/(2T), the cos^2 taper across the roll-off band, 0 beyond
    (1+b)/(2T). Even in f. At b = 0 the taper is empty and the response is
    an ideal brick wall whose edge samples carry the half-power value, so
    symbol-rate aliases still sum to exactly 1.
    """
    if T <= 0:
        raise ValueError(f"symbol period must be > 0, got {T}")
    if not 0.0 <= roll_off <= 1.0:
        raise ValueError(f"roll_off must be in [0, 1], got {roll_off}")
    x = np.abs(np.asarray(f, dtype=float)) * T
    if roll_off == 0.0:
        amp = np.where(x < 0.5, 1.0, 0.0)
        amp = np.where(np.abs(x - 0.5) <= 1e-12, np.sqrt(0.5), amp)
    else:
        f1 = (1.0 - roll_off) / 2.0
        amp = np.cos(0.5 * np.pi * np.clip((x - f1) / roll_off, 0.0, 1.0))
    if np.ndim(f) == 0:
        return float(amp)
    return amp


def pulse_power_spectrum(grid: FrequencyGrid, pulse: PulseShape) -> ScalarSpectrum:
    """|H_T(f)|^2 of the transmit pulse on the grid (peak 1 at f = 0)."""
    amp = rrc_amplitude(grid.frequencies, grid.symbol_period, pulse.roll_off)
    return ScalarSpectrum(grid, amp * amp)


def fold_spectrum(s: ScalarSpectrum, T: float) -> FoldedSpectrum:
    """Sum all symbol-rate aliases s(f - mu/T) onto one period [-1/(2T), +1/(2T)).

    The alias shift 1/T must be a whole (even) number of grid bins, which
    holds whenever samples_per_symbol divides n_points; the sum is then an
    exact reindexing of grid samples, not an interpolation.
    """
    if np.iscomplexobj(s.values):
        raise ValueError("folding is defined for real-valued spectra only")
    if T <= 0:
        raise ValueError(f"symbol period must be > 0, got {T}")
    grid = s.grid
    bins_per_period = 1.0 / (T * grid.df)
    m = int(round(bins_per_period))
    if m < 2 or abs(bins_per_period - m) > 1e-9 * m:
        raise GridMismatchError(
            f"1/T = {1.0 / T:.6g} Hz is not a whole number of grid bins (df = {grid.df:.6g} Hz)"
        )
    if m % 2:
        raise GridMismatchError(
            f"period of {m} bins has no sample at -1/(2T); use an even oversampling"
        )
    n = grid.n_points
    idx = (np.arange(n) - n // 2 + m // 2) % m
    folded = np.bincount(idx, weights=np.asarray(s.values, dtype=float), minlength=m)
    return FoldedSpectrum(df=grid.df, symbol_period=T, values=folded)
