"""Analytic post-equalizer SNR for single- and dual-polarization QAM links.

The chain is: per-frequency spectral SNR at the receiver input (with
channel-inversion noise enhancement in the dual-polarization case), folding
of all symbol-rate aliases onto one period, and the infinite-length MMSE
equalizer output SNR

    SNR = 1 / (T * integral over one period of df / (folded_snr(f) + 1)),

evaluated with the rectangle rule on the uniform grid. The folded integral
returns the biased MMSE figure (flat folded SNR S gives S + 1); the
``unbias`` flag subtracts the +1 in linear units, which is the convention
used when comparing against error-vector measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv

from .channel import ChannelSpectrum
from .errors import (
    GridMismatchError,
    NonFiniteResultError,
    NonPositiveResultError,
)
from .spectral import (
    FrequencyGrid,
    PulseShape,
    ScalarSpectrum,
    fold_spectrum,
    rrc_amplitude,
)

UNBIASED_SNR_FLOOR = 1e-12

_QAM_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class SnrSpectrum(ScalarSpectrum):
    """Per-frequency linear SNR samples; real, finite, non-negative."""

    def __post_init__(self):
        super().__post_init__()
        v = self.values
        if np.iscomplexobj(v):
            raise ValueError("SNR spectra are real-valued")
        if not np.all(np.isfinite(v)):
            raise NonFiniteResultError("SNR spectrum contains non-finite samples")
        if np.any(v < 0):
            raise ValueError("SNR spectrum contains negative samples")


@dataclass(frozen=True)
class SnrPair:
    """Linear SNR of the two polarization tributaries, with dB views."""

    snr_x: float
    snr_y: float

    def __post_init__(self):
        for name, v in (("snr_x", self.snr_x), ("snr_y", self.snr_y)):
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")

    @property
    def snr_x_db(self) -> float:
        return 10.0 * math.log10(self.snr_x)

    @property
    def snr_y_db(self) -> float:
        return 10.0 * math.log10(self.snr_y)


@dataclass(frozen=True)
class NoiseModel:
    """Equivalent noise PSD at the receiver input, per polarization branch.

    Each branch is either a flat scalar in W/Hz or a :class:`ScalarSpectrum`;
    ``y=None`` reuses the x branch. Spectra sampled on a different grid are
    linearly interpolated (edge-held) onto the target grid.
    """

    x: float | ScalarSpectrum
    y: float | ScalarSpectrum | None = None

    @classmethod
    def flat(cls, n0: float) -> "NoiseModel":
        return cls(x=float(n0))

    def values_on(self, grid: FrequencyGrid) -> tuple[np.ndarray, np.ndarray]:
        vx = _noise_branch_on(self.x, grid)
        vy = vx if self.y is None else _noise_branch_on(self.y, grid)
        return vx, vy


def _noise_branch_on(branch, grid: FrequencyGrid) -> np.ndarray:
    if isinstance(branch, ScalarSpectrum):
        vals = np.asarray(branch.values)
        if np.iscomplexobj(vals):
            raise ValueError("noise PSD must be real-valued")
        if branch.grid == grid:
            return vals.astype(float)
        return np.interp(grid.frequencies, branch.grid.frequencies, vals.astype(float))
    n0 = float(branch)
    return np.full(grid.n_points, n0)


@dataclass(frozen=True)
class TxSpec:
    """Transmit side: symbol rate, pulse, per-polarization power, QAM order."""

    baud_rate: float
    pulse: PulseShape
    sigma_a2_x: float = 1.0
    sigma_a2_y: float = 1.0
    m_qam: int = 16

    def __post_init__(self):
        if self.baud_rate <= 0:
            raise ValueError(f"baud_rate must be > 0, got {self.baud_rate}")
        if self.sigma_a2_x <= 0 or self.sigma_a2_y <= 0:
            raise ValueError("transmit powers must be > 0")
        if self.m_qam not in _QAM_ORDERS:
            raise ValueError(f"m_qam must be one of {_QAM_ORDERS}, got {self.m_qam}")

    @property
    def symbol_period(self) -> float:
        return 1.0 / self.baud_rate

    def band_edge_hz(self) -> float:
        """Outer edge of the shaped pulse, (1 + roll_off) / (2 T)."""
        return (1.0 + self.pulse.roll_off) / (2.0 * self.symbol_period)


def _check_noise_in_band(n0: np.ndarray, mask: np.ndarray, label: str) -> None:
    if np.any(n0[mask] <= 0):
        raise ValueError(f"noise PSD ({label}) must be strictly positive in the signal band")


def spectral_snr_single_pol(
    tx: TxSpec, h_c: ScalarSpectrum, noise: NoiseModel
) -> SnrSpectrum:
    """Spectral SNR(f) = T sigma_a^2 |H_T(f) H_C(f)|^2 / N0(f) on the full grid."""
    grid = h_c.grid
    if not np.isclose(grid.baud_rate, tx.baud_rate, rtol=1e-9):
        raise GridMismatchError(
            f"grid baud rate {grid.baud_rate:.6g} != tx baud rate {tx.baud_rate:.6g}"
        )
    T = tx.symbol_period
    amp = rrc_amplitude(grid.frequencies, T, tx.pulse.roll_off)
    n0, _ = noise.values_on(grid)
    mask = amp > 0
    _check_noise_in_band(n0, mask, "x")
    snr = np.zeros(grid.n_points)
    num = T * tx.sigma_a2_x * (amp[mask] ** 2) * np.abs(np.asarray(h_c.values)[mask]) ** 2
    snr[mask] = num / n0[mask]
    return SnrSpectrum(grid, snr)


def spectral_snr_dual_pol(
    tx: TxSpec, k: ChannelSpectrum, noise: NoiseModel
) -> tuple[SnrSpectrum, SnrSpectrum]:
    """Per-tributary spectral SNR after exact channel inversion.

    ``k`` is the inverted channel K(f) = H(f)^-1. The transmitted PSD on
    each tributary is sigma_a^2 T |H_T(f)|^2; inverting the channel restores
    the signal but scales the noise by the K row power, so

        SNR_x(f) = P_x(f) / ((|K_xx|^2 + |K_xy|^2) N0_x(f))

    and the y-analogue with the bottom row.
    """
    grid = k.grid
    if not np.isclose(grid.baud_rate, tx.baud_rate, rtol=1e-9):
        raise GridMismatchError(
            f"grid baud rate {grid.baud_rate:.6g} != tx baud rate {tx.baud_rate:.6g}"
        )
    T = tx.symbol_period
    amp = rrc_amplitude(grid.frequencies, T, tx.pulse.roll_off)
    mask = amp > 0
    if k.ill_conditioned is not None and np.any(k.ill_conditioned & mask):
        raise NonFiniteResultError(
            "inverted channel is flagged ill-conditioned inside the pulse band"
        )
    n0x, n0y = noise.values_on(grid)
    _check_noise_in_band(n0x, mask, "x")
    _check_noise_in_band(n0y, mask, "y")

    m = k.matrices
    row_x = np.abs(m[:, 0, 0]) ** 2 + np.abs(m[:, 0, 1]) ** 2
    row_y = np.abs(m[:, 1, 0]) ** 2 + np.abs(m[:, 1, 1]) ** 2
    shape2 = amp[mask] ** 2

    snr_x = np.zeros(grid.n_points)
    snr_y = np.zeros(grid.n_points)
    snr_x[mask] = tx.sigma_a2_x * T * shape2 / (row_x[mask] * n0x[mask])
    snr_y[mask] = tx.sigma_a2_y * T * shape2 / (row_y[mask] * n0y[mask])
    if not (np.all(np.isfinite(snr_x)) and np.all(np.isfinite(snr_y))):
        raise NonFiniteResultError("spectral SNR came out non-finite")
    return SnrSpectrum(grid, snr_x), SnrSpectrum(grid, snr_y)


def equalizer_output_snr(s: SnrSpectrum, T: float, unbias: bool = True) -> float:
    """Output SNR of an infinitely long MMSE equalizer fed with spectral SNR ``s``.

    ``s`` lives on the full grid; it is folded at the symbol rate and
    integrated with the rectangle rule. Biased and unbiased figures differ
    by exactly 1 in linear units; the unbiased value is floored at a tiny
    positive epsilon so dB views stay finite.
    """
    if not np.isclose(T * s.grid.baud_rate, 1.0, rtol=1e-9):
        raise GridMismatchError(
            f"T = {T:.6g} s does not match the grid baud rate {s.grid.baud_rate:.6g}"
        )
    folded = fold_spectrum(s, T)
    integral = float(np.sum(1.0 / (folded.values + 1.0))) * folded.df
    value = 1.0 / (T * integral)
    if not (math.isfinite(value) and value > 0):
        raise NonPositiveResultError(f"equalizer output SNR is degenerate: {value}")
    if unbias:
        value = max(value - 1.0, UNBIASED_SNR_FLOOR)
    return value


def output_snr_pair(
    tx: TxSpec, k: ChannelSpectrum, noise: NoiseModel, unbias: bool = True
) -> SnrPair:
    """Dual-polarization spectral SNR folded down to one output SNR per tributary."""
    sx, sy = spectral_snr_dual_pol(tx, k, noise)
    T = tx.symbol_period
    return SnrPair(
        snr_x=equalizer_output_snr(sx, T, unbias=unbias),
        snr_y=equalizer_output_snr(sy, T, unbias=unbias),
    )


def noise_for_target_snr(tx: TxSpec, target_snr_db: float) -> NoiseModel:
    """Flat noise PSD that puts the identity-channel folded SNR at the target.

    With the unit-peak pulse normalization the folded identity-channel SNR
    is T sigma_a^2 / N0, so N0 = T sigma_a^2 / target per tributary.
    """
    s = 10.0 ** (target_snr_db / 10.0)
    T = tx.symbol_period
    n0x = T * tx.sigma_a2_x / s
    n0y = T * tx.sigma_a2_y / s
    return NoiseModel(x=n0x, y=None if n0y == n0x else n0y)


def ber_from_snr_qam(snr: float, m_qam: int) -> float:
    """Gray-coded square-QAM bit error rate at the given linear symbol SNR."""
    if m_qam not in _QAM_ORDERS:
        raise ValueError(f"m_qam must be one of {_QAM_ORDERS}, got {m_qam}")
    if snr <= 0:
        raise ValueError(f"snr must be > 0, got {snr}")
    k = math.log2(m_qam)
    coeff = (4.0 / k) * (1.0 - 1.0 / math.sqrt(m_qam))
    arg = math.sqrt(3.0 * snr / (m_qam - 1.0))
    q = 0.5 * erfc(arg / math.sqrt(2.0))
    return coeff * q


def snr_from_ber_qam(ber: float, m_qam: int) -> float:
    """Inverse of :func:`ber_from_snr_qam` on its achievable range."""
    if m_qam not in _QAM_ORDERS:
        raise ValueError(f"m_qam must be one of {_QAM_ORDERS}, got {m_qam}")
    if not 0.0 < ber <= 0.5:
        raise ValueError(f"ber must be in (0, 0.5], got {ber}")
    k = math.log2(m_qam)
    coeff = (4.0 / k) * (1.0 - 1.0 / math.sqrt(m_qam))
    q = ber / coeff
    if q >= 0.5:
        raise ValueError(
            f"ber {ber} is not achievable at any positive SNR for {m_qam}-QAM"
        )
    arg = math.sqrt(2.0) * erfcinv(2.0 * q)
    return (m_qam - 1.0) / 3.0 * arg * arg
