"""Construction, inversion and serialization of 2x2 frequency-dependent channels.

A channel is a 2x2 complex Jones-type matrix sampled at every grid
frequency. The modal builder synthesizes the multipath transfer function of
a single-mode -> multimode -> single-mode link: each guided mode
contributes its coupling product, a delay phase ramp, and a per-mode random
unitary accounting for birefringence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, IllConditionedError, MalformedFileError
from .seeding import derive_seed
from .spectral import FrequencyGrid

# A Jones matrix is a plain (2, 2) complex ndarray.
JonesMatrix = np.ndarray

_CHANNEL_FILE_HEADER = (
    "f_hz,re_hxx,im_hxx,re_hxy,im_hxy,re_hyx,im_hyx,re_hyy,im_hyy"
)


def sample_haar_jones(rng: np.random.Generator) -> JonesMatrix:
    """Draw a Haar-uniform random 2x2 unitary.

    QR of a complex Ginibre matrix with the R diagonal phase-normalized,
    which makes the distribution exactly Haar rather than merely unitary.
    """
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class ModeCoupling:
    """One guided mode: coupling coefficients, relative delay, birefringence.

    ``jones`` may be an explicit (2, 2) matrix, an integer overriding the
    mode index in the seed derivation, or None to sample a Haar unitary
    keyed by (channel seed, mode index).
    """

    rho_in: complex
    rho_out: complex
    delay_s: float
    jones: np.ndarray | int | None = None


@dataclass(frozen=True)
class ModalChannelSpec:
    """Mode list defining a single-mode -> multimode -> single-mode channel."""

    modes: tuple[ModeCoupling, ...]
    mmf_length_m: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) < 1:
            raise ValueError("at least one mode is required")
        if self.modes[0].delay_s != 0.0:
            raise ValueError(
                f"delays are relative to the first mode, so modes[0].delay_s must "
                f"be 0, got {self.modes[0].delay_s}"
            )


@dataclass(frozen=True)
class ChannelSpectrum:
    """A 2x2 complex matrix per grid frequency.

    ``ill_conditioned`` is set by :func:`invert_channel` to mark frequencies
    where the inverse was regularized instead of exact.
    """

    grid: FrequencyGrid
    matrices: np.ndarray
    ill_conditioned: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.shape != (self.grid.n_points, 2, 2):
            raise GridMismatchError(
                f"expected matrices of shape ({self.grid.n_points}, 2, 2), got {m.shape}"
            )
        object.__setattr__(self, "matrices", m)


def identity_channel(grid: FrequencyGrid) -> ChannelSpectrum:
    """Frequency-flat identity channel."""
    mats = np.broadcast_to(np.eye(2, dtype=complex), (grid.n_points, 2, 2)).copy()
    return ChannelSpectrum(grid, mats)


def flat_channel(grid: FrequencyGrid, matrix: np.ndarray) -> ChannelSpectrum:
    """Frequency-flat channel with the given 2x2 matrix at every frequency."""
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a (2, 2) matrix, got shape {m.shape}")
    return ChannelSpectrum(grid, np.broadcast_to(m, (grid.n_points, 2, 2)).copy())


def _mode_jones(mode: ModeCoupling, seed: int, index: int) -> JonesMatrix:
    if isinstance(mode.jones, np.ndarray):
        j = np.asarray(mode.jones, dtype=complex)
        if j.shape != (2, 2):
            raise ValueError(f"explicit Jones matrix must be (2, 2), got {j.shape}")
        return j
    key = index if mode.jones is None else int(mode.jones)
    rng = np.random.default_rng(derive_seed("jones", seed, key))
    return sample_haar_jones(rng)


def build_mmf_channel(spec: ModalChannelSpec, grid: FrequencyGrid, seed: int) -> ChannelSpectrum:
    """Synthesize H(f) = sum_j rho_in_j * rho_out_j * exp(-i 2 pi f tau_j) * J_j.

    Per-mode unitaries come from independent sub-streams keyed by
    (seed, mode index), so appending a mode never perturbs earlier ones.
    """
    f = grid.frequencies
    h = np.zeros((grid.n_points, 2, 2), dtype=complex)
    for j, mode in enumerate(spec.modes):
        jones = _mode_jones(mode, seed, j)
        coeff = (
            complex(mode.rho_in)
            * complex(mode.rho_out)
            * np.exp(-2j * np.pi * f * mode.delay_s)
        )
        h += coeff[:, None, None] * jones
    return ChannelSpectrum(grid, h)


def singular_values(matrices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(s_min, s_max) of each 2x2 matrix in a stack, via the closed form."""
    m = np.asarray(matrices, dtype=complex)
    g = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    absdet = np.abs(det)
    disc = np.sqrt(np.maximum(g * g - 4.0 * absdet**2, 0.0))
    s_max = np.sqrt((g + disc) / 2.0)
    # s_min via |det| / s_max avoids the cancellation in (g - disc) / 2.
    s_min = np.where(s_max > 0.0, absdet / np.where(s_max > 0.0, s_max, 1.0), 0.0)
    return s_min, s_max


def invert_channel(
    h: ChannelSpectrum,
    cond_limit: float = 1e8,
    band_edge_hz: float | None = None,
) -> ChannelSpectrum:
    """Per-frequency inverse K(f) = H(f)^-1 with singularity screening.

    A frequency is flagged when its smallest singular value drops below
    (global largest singular value) / cond_limit; this catches both
    classically ill-conditioned matrices and overall notches where the
    whole matrix collapses toward zero. Flagged frequencies inside the
    signal band |f| <= band_edge_hz raise :class:`IllConditionedError`;
    outside it they get a Tikhonov-regularized pseudo-inverse and stay
    marked in ``ill_conditioned``.

    ``band_edge_hz`` defaults to the baud rate, the widest band any
    roll-off <= 1 can occupy; pass (1 + roll_off) / (2 T) for the exact
    pulse band.
    """
    if cond_limit <= 1.0:
        raise ValueError(f"cond_limit must be > 1, got {cond_limit}")
    grid = h.grid
    edge = grid.baud_rate if band_edge_hz is None else float(band_edge_hz)

    s_min, s_max = singular_values(h.matrices)
    s_ref = float(s_max.max())
    flagged = s_min <= s_ref / cond_limit

    in_band = np.abs(grid.frequencies) <= edge * (1.0 + 1e-12)
    bad = flagged & in_band
    if np.any(bad):
        raise IllConditionedError(grid.frequencies[bad])

    safe = h.matrices.copy()
    safe[flagged] = np.eye(2)
    k = np.linalg.inv(safe)

    if np.any(flagged):
        eps = 1e-12 * s_ref
        hf = h.matrices[flagged]
        hermitian = np.conj(np.swapaxes(hf, -2, -1))
        gram = hermitian @ hf + (eps * eps + 1e-300) * np.eye(2)
        k[flagged] = np.linalg.inv(gram) @ hermitian

    return ChannelSpectrum(grid, k, ill_conditioned=flagged)


def save_channel(h: ChannelSpectrum, path) -> None:
    """Write a channel to the 9-column CSV interchange format."""
    f = h.grid.frequencies
    m = h.matrices
    cols = np.column_stack(
        [
            f,
            m[:, 0, 0].real, m[:, 0, 0].imag,
            m[:, 0, 1].real, m[:, 0, 1].imag,
            m[:, 1, 0].real, m[:, 1, 0].imag,
            m[:, 1, 1].real, m[:, 1, 1].imag,
        ]
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_CHANNEL_FILE_HEADER + "\n")
        for row in cols:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_channel(path, grid: FrequencyGrid) -> ChannelSpectrum:
    """Read a 9-column channel CSV and sample it onto ``grid``.

    Frequencies matching the grid within 1e-6 relative are taken verbatim;
    otherwise entries are linearly interpolated per real/imag part.
    Extrapolation beyond the file span is refused.
    """
    data_lines = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line
                continue
            data_lines.append(line)
    if header is None or header.replace(" ", "") != _CHANNEL_FILE_HEADER:
        raise MalformedFileError(f"missing or wrong header row in {path}")
    if not data_lines:
        raise MalformedFileError(f"no data rows in {path}")

    rows = []
    for line in data_lines:
        parts = line.split(",")
        if len(parts) != 9:
            raise MalformedFileError(
                f"expected 9 columns, got {len(parts)} in row {line[:60]!r}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise MalformedFileError(f"non-numeric value in row {line[:60]!r}") from exc
    table = np.asarray(rows, dtype=float)

    f_file = table[:, 0]
    if np.any(np.diff(f_file) <= 0):
        raise MalformedFileError("file frequencies must be strictly increasing")

    entries = table[:, 1::2] + 1j * table[:, 2::2]  # columns: hxx, hxy, hyx, hyy
    f_grid = grid.frequencies

    same_axis = f_file.shape == f_grid.shape and np.allclose(
        f_file, f_grid, rtol=1e-6, atol=1e-6 * grid.df
    )
    if same_axis:
        sampled = entries
    else:
        if f_grid[0] < f_file[0] - 1e-6 * grid.df or f_grid[-1] > f_file[-1] + 1e-6 * grid.df:
            raise GridMismatchError(
                f"grid span [{f_grid[0]:.6g}, {f_grid[-1]:.6g}] Hz exceeds file span "
                f"[{f_file[0]:.6g}, {f_file[-1]:.6g}] Hz"
            )
        sampled = np.empty((grid.n_points, 4), dtype=complex)
        for c in range(4):
            sampled[:, c] = np.interp(f_grid, f_file, entries[:, c].real) + 1j * np.interp(
                f_grid, f_file, entries[:, c].imag
            )

    mats = sampled.reshape(grid.n_points, 2, 2)
    return ChannelSpectrum(grid, mats)
