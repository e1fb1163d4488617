"""PN-ASK modulation: M-PSK phase for the primary stream, radius for the covert stream.

Samples are ``complex`` / ``complex128`` arrays on the unit-energy constellation.
Every function accepts scalars or arrays and broadcasts like numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

# Margin kept between a displaced radius and its decision boundary so that
# rounding in |x| can never push a sample into a neighbouring region.
_DISPLACEMENT_GUARD = 1e-12


class ModemError(ValueError):
    """Invalid constellation parameters or symbol indices."""


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def gray(n):
    """Binary-reflected Gray code of ``n``."""
    n = np.asarray(n, dtype=np.int64)
    return n ^ (n >> 1)


def gray_inverse(g):
    g = np.asarray(g, dtype=np.int64)
    n = g.copy()
    shift = g >> 1
    while np.any(shift):
        n ^= shift
        shift >>= 1
    return n


@dataclass(frozen=True)
class CovertCodingMap:
    """Radii ``levels`` (outermost first) and the midpoints between them.

    Build instances with :func:`build_coding_map`, which validates ``d``.
    """

    m_c: int
    d: float
    levels: np.ndarray = field(repr=False)
    thresholds: np.ndarray = field(repr=False)

    @property
    def bits(self) -> int:
        return int(self.m_c).bit_length() - 1

    def region(self, index: int) -> tuple[float, float]:
        """Radius interval ``(inner, outer)`` that decodes to ``index``.

        The missing bounds of the edge levels are mirrored about the level:
        ``2k(1) - tau(1)`` outside and ``max(0, 2k(M_c) - tau(M_c-1))`` inside.
        """
        k = self.levels
        if self.m_c == 1:
            return 0.0, 2.0 * k[0]
        tau = self.thresholds
        outer = 2.0 * k[0] - tau[0] if index == 0 else tau[index - 1]
        if index == self.m_c - 1:
            inner = max(0.0, 2.0 * k[index] - tau[index - 1])
        else:
            inner = tau[index]
        return float(inner), float(outer)


def build_coding_map(m_c: int, d: float | None = None) -> CovertCodingMap:
    """Return the covert coding map ``k(i) = 1 - (i-1) d`` for ``i = 1..m_c``.

    ``d`` must satisfy ``0 < d < 1/(m_c - 1)`` so every radius is strictly
    positive; it is ignored when ``m_c == 1``.
    """
    if not is_power_of_two(m_c):
        raise ModemError(f"m_c must be a power of two >= 1, got {m_c!r}")
    m_c = int(m_c)
    if m_c == 1:
        return CovertCodingMap(1, 0.0, np.ones(1), np.empty(0))
    if d is None or not np.isfinite(d) or d <= 0:
        raise ModemError(f"amplitude step d must be > 0 when m_c > 1, got {d!r}")
    if d * (m_c - 1) >= 1:
        raise ModemError(
            f"d < 1/(M_c-1) violated: d={d} with M_c={m_c} requires d < {1 / (m_c - 1):.6g}"
        )
    levels = 1.0 - np.arange(m_c) * float(d)
    thresholds = 0.5 * (levels[:-1] + levels[1:])
    levels.setflags(write=False)
    thresholds.setflags(write=False)
    return CovertCodingMap(m_c, float(d), levels, thresholds)


class PnAskSymbolPair(NamedTuple):
    primary_index: int
    covert_index: int


def phase_offset(m: int) -> float:
    # BPSK sits on the real axis; higher orders are centred in the sectors.
    return 0.0 if m == 2 else np.pi / m


def _check_order(m: int) -> None:
    if not is_power_of_two(m) or m < 2:
        raise ModemError(f"PSK order must be a power of two >= 2, got {m!r}")


def _check_range(index, upper: int, what: str) -> np.ndarray:
    index = np.asarray(index)
    if index.dtype.kind not in "iu":
        raise ModemError(f"{what} must be integers")
    if np.any(index < 0) or np.any(index >= upper):
        raise ModemError(f"{what} out of range [0, {upper})")
    return index.astype(np.int64)


def _scalar_or_array(x):
    if isinstance(x, np.generic) or (isinstance(x, np.ndarray) and x.ndim == 0):
        return x.item()
    return x


def psk_modulate(symbol_index, m: int):
    """Map data value(s) to unit-magnitude M-PSK points.

    Value ``v`` is placed at sector ``gray_inverse(v)`` so that neighbouring
    sectors carry labels differing in one bit.
    """
    _check_order(m)
    idx = _check_range(symbol_index, m, "primary symbol index")
    position = gray_inverse(idx)
    out = np.exp(1j * (2.0 * np.pi * position / m + phase_offset(m)))
    return _scalar_or_array(out)


def psk_demodulate(received, m: int):
    """Nearest-phase decision, returning the Gray-decoded data value."""
    _check_order(m)
    y = np.asarray(received, dtype=np.complex128)
    angle = np.angle(y) - phase_offset(m)
    position = np.mod(np.rint(angle * m / (2.0 * np.pi)).astype(np.int64), m)
    return _scalar_or_array(gray(position))


def pnask_modulate(primary_index, covert_index, m: int, cmap: CovertCodingMap):
    """Scale the M-PSK point of ``primary_index`` by ``cmap.levels[covert_index]``."""
    c = _check_range(covert_index, cmap.m_c, "covert symbol index")
    return _scalar_or_array(np.asarray(psk_modulate(primary_index, m)) * cmap.levels[c])


def covert_decide(magnitude, cmap: CovertCodingMap):
    """Quantize radii to level indices; a radius equal to a threshold takes the outer level."""
    r = np.asarray(magnitude, dtype=np.float64)
    if cmap.m_c == 1:
        return _scalar_or_array(np.zeros(r.shape, dtype=np.int64))
    ascending = cmap.thresholds[::-1]
    below = len(ascending) - np.searchsorted(ascending, r, side="right")
    return _scalar_or_array(below.astype(np.int64))


def pnask_demodulate(received, m: int, cmap: CovertCodingMap):
    """Return ``(primary_index, covert_index)`` for each received sample."""
    y = np.asarray(received, dtype=np.complex128)
    primary = psk_demodulate(y, m)
    covert = covert_decide(np.abs(y), cmap)
    if np.ndim(primary) == 0:
        return PnAskSymbolPair(int(primary), int(covert))
    return primary, covert


def displacement_bounds(covert_index, cmap: CovertCodingMap) -> tuple[np.ndarray, np.ndarray]:
    """Per-index ``(low, high)`` interval that the displaced radius is drawn from.

    Two levels use a symmetric jitter of half-width ``min(1 - d, d/2)``; more
    levels use the full decision region of each level.
    """
    idx = np.asarray(covert_index, dtype=np.int64)
    k = cmap.levels[idx]
    if cmap.m_c == 1:
        return k.copy(), k.copy()
    if cmap.m_c == 2:
        half = min(1.0 - cmap.d, cmap.d / 2.0)
        return k - half, k + half
    regions = np.array([cmap.region(i) for i in range(cmap.m_c)])
    return regions[idx, 0], regions[idx, 1]


def apply_displacement(sample, covert_index, cmap: CovertCodingMap, rng: np.random.Generator):
    """Move each sample's radius uniformly inside its covert decision region.

    Phase is untouched. A zero-width interval leaves the sample as is.
    """
    x = np.asarray(sample, dtype=np.complex128)
    idx = np.broadcast_to(np.asarray(covert_index, dtype=np.int64), x.shape)
    low, high = displacement_bounds(idx, cmap)
    width = high - low
    low = np.where(width > 4 * _DISPLACEMENT_GUARD, low + _DISPLACEMENT_GUARD, low)
    high = np.where(width > 4 * _DISPLACEMENT_GUARD, high - _DISPLACEMENT_GUARD, high)
    radius = low + (high - low) * rng.random(x.shape)
    radius = np.where(width > 0, radius, cmap.levels[idx])
    magnitude = np.abs(x)
    unit = np.divide(x, magnitude, out=np.ones_like(x), where=magnitude > 0)
    out = np.where(width > 0, unit * radius, x)
    return _scalar_or_array(out)


def bits_to_symbols(bits, bits_per_symbol: int) -> np.ndarray:
    """Pack a 0/1 array MSB-first into integers; length must be a multiple."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits_per_symbol == 0:
        return np.zeros(0, dtype=np.int64)
    if bits.size % bits_per_symbol:
        raise ModemError(f"{bits.size} bits is not a multiple of {bits_per_symbol}")
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1)
    return bits.reshape(-1, bits_per_symbol) @ weights


def symbols_to_bits(symbols, bits_per_symbol: int) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    shifts = np.arange(bits_per_symbol - 1, -1, -1)
    return ((symbols[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def covert_value_to_index(value, m_c: int):
    """Covert data value -> level index (0 = outermost radius).

    Labels run as a Gray sequence from the innermost radius outward, so for two
    levels the outer radius carries ``1`` and for four it carries ``10``.
    """
    return _scalar_or_array(m_c - 1 - gray_inverse(value))


def covert_index_to_value(index, m_c: int):
    return _scalar_or_array(gray(m_c - 1 - np.asarray(index, dtype=np.int64)))
