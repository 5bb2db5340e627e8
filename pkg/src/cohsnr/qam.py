"""Gray-coded square-QAM bit/symbol mapping.

Symbols are indexed by the packed bit word (I-axis bits high, Q-axis bits
low); each axis is an independent Gray-coded PAM, so neighboring levels
differ in exactly one bit. Constellations are scaled to a requested average
symbol power.
"""

from __future__ import annotations

import math

import numpy as np

_ORDERS = (4, 16, 64)


def bits_per_symbol(m_qam: int) -> int:
    if m_qam not in _ORDERS:
        raise ValueError(f"m_qam must be one of {_ORDERS}, got {m_qam}")
    return int(math.log2(m_qam))


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


def _gray_inverse(g: np.ndarray) -> np.ndarray:
    n = g.copy()
    shift = 1
    while shift < 16:
        n ^= n >> shift
        shift <<= 1
    return n


def _axis_levels(n_levels: int) -> np.ndarray:
    return 2.0 * np.arange(n_levels) - (n_levels - 1)


def constellation(m_qam: int, sigma_a2: float = 1.0) -> np.ndarray:
    """Complex points indexed by packed bit word, average power ``sigma_a2``."""
    k = bits_per_symbol(m_qam)
    kb = k // 2
    n_levels = 1 << kb
    levels = _axis_levels(n_levels)
    scale = math.sqrt(sigma_a2 * 3.0 / (2.0 * (m_qam - 1.0)))
    idx = np.arange(m_qam)
    g_i = idx >> kb
    g_q = idx & (n_levels - 1)
    p_i = _gray_inverse(g_i)
    p_q = _gray_inverse(g_q)
    return scale * (levels[p_i] + 1j * levels[p_q])


def bits_to_symbols(bits: np.ndarray, m_qam: int, sigma_a2: float = 1.0) -> np.ndarray:
    """Map an (n, k) bit array to n complex symbols."""
    k = bits_per_symbol(m_qam)
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.shape[1] != k:
        raise ValueError(f"expected bits of shape (n, {k}), got {bits.shape}")
    weights = 1 << np.arange(k - 1, -1, -1)
    words = (bits.astype(np.int64) * weights).sum(axis=1)
    return constellation(m_qam, sigma_a2)[words]


def symbols_to_bits(symbols: np.ndarray, m_qam: int, sigma_a2: float = 1.0) -> np.ndarray:
    """Hard-decide symbols to the nearest point and return the (n, k) bit array."""
    k = bits_per_symbol(m_qam)
    kb = k // 2
    n_levels = 1 << kb
    scale = math.sqrt(sigma_a2 * 3.0 / (2.0 * (m_qam - 1.0)))
    z = np.asarray(symbols) / scale
    p_i = np.clip(np.round((z.real + (n_levels - 1)) / 2.0), 0, n_levels - 1).astype(np.int64)
    p_q = np.clip(np.round((z.imag + (n_levels - 1)) / 2.0), 0, n_levels - 1).astype(np.int64)
    words = (_gray(p_i) << kb) | _gray(p_q)
    out = np.empty((z.shape[0], k), dtype=np.uint8)
    for b in range(k):
        out[:, b] = (words >> (k - 1 - b)) & 1
    return out
