"""Closed-form symbol error rates, energy and goodput of PN-ASK.

All ratios are linear (not dB) and refer to a primary constellation with unit
symbol energy, so ``N0 = 1 / es_n0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .channel import ChannelKind, ChannelModel, GainDensity
from .marcum import marcum_q1, noncentral_chi2_cdf
from .modem import CovertCodingMap, is_power_of_two

__all__ = [
    "QuadratureError",
    "SerPoint",
    "RatePair",
    "marcum_q1",
    "noncentral_chi2_cdf",
    "covert_ser_awgn",
    "mpsk_ser_awgn",
    "primary_ser_awgn",
    "ser_fading",
    "covert_ser",
    "primary_ser",
    "energy_per_symbol",
    "goodput",
    "symbol_goodput",
]


class QuadratureError(RuntimeError):
    """Adaptive integration did not reach the requested tolerance."""


@dataclass(frozen=True)
class SerPoint:
    es_n0_db: float
    ser: float
    channel: ChannelKind


@dataclass(frozen=True)
class RatePair:
    """Per-subcarrier symbol goodput in symbols/s."""

    r_p: float
    r_c: float


def _check_snr(es_n0: float) -> None:
    if not es_n0 > 0:
        raise ValueError(f"Es/N0 must be positive, got {es_n0!r}")


def covert_ser_awgn(es_n0: float, cmap: CovertCodingMap) -> float:
    """Average covert SER over equiprobable radii in AWGN.

    Level ``k`` is received with ``|y|^2 / sigma^2`` non-central chi-squared, so
    the mass outside ``(tau_lo, tau_hi)`` follows from two Marcum-Q terms.
    """
    _check_snr(es_n0)
    if cmap.m_c == 1:
        return 0.0
    if math.isinf(es_n0):
        return 0.0
    scale = math.sqrt(2.0 * es_n0)
    k, tau = cmap.levels, cmap.thresholds
    total = 0.0
    for i in range(cmap.m_c):
        a = k[i] * scale
        if i < cmap.m_c - 1:
            total += 1.0 - marcum_q1(a, tau[i] * scale)
        if i > 0:
            total += marcum_q1(a, tau[i - 1] * scale)
    return min(max(total / cmap.m_c, 0.0), 1.0)


def _craig_mpsk(gamma: float, m: int) -> float:
    s2 = math.sin(math.pi / m) ** 2

    def integrand(theta):
        st = math.sin(theta)
        return math.exp(-gamma * s2 / (st * st)) if st > 0 else 0.0

    value, _ = integrate.quad(integrand, 0.0, math.pi * (m - 1) / m, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value / math.pi


def mpsk_ser_awgn(gamma: float, m: int) -> float:
    """Exact M-PSK SER at symbol SNR ``gamma``.

    BPSK and QPSK use their Gaussian-tail forms; higher orders integrate the
    single finite-range (Craig) representation.
    """
    if not is_power_of_two(m) or m < 2:
        raise ValueError(f"m must be a power of two >= 2, got {m!r}")
    if not gamma >= 0 or math.isnan(gamma):
        raise ValueError(f"gamma must be >= 0, got {gamma!r}")
    if math.isinf(gamma):
        return 0.0
    if m == 2:
        return 0.5 * erfc(math.sqrt(gamma))
    if m == 4:
        q = 0.5 * erfc(math.sqrt(gamma / 2.0))
        return 2.0 * q - q * q
    return _craig_mpsk(gamma, m)


def primary_ser_awgn(es_n0: float, m: int, cmap: CovertCodingMap) -> float:
    """M-PSK SER averaged over the radii, each scaling the symbol energy by ``k^2``."""
    _check_snr(es_n0)
    return float(np.mean([mpsk_ser_awgn(k * k * es_n0, m) for k in cmap.levels]))


def ser_fading(
    es_n0: float,
    model: ChannelModel | GainDensity,
    ser_awgn_fn: Callable[[float], float],
    rtol: float = 1e-6,
    tail: float = 1e-9,
) -> float:
    """Average ``ser_awgn_fn(es_n0 * z)`` over the density of ``z = |h|^2``.

    The range is cut where the density tail mass drops below ``tail`` and split
    around the bulk of the mass; each piece must converge or QuadratureError is
    raised.
    """
    _check_snr(es_n0)
    density = model if isinstance(model, GainDensity) else GainDensity(model)
    z_max = density.upper_limit(tail)
    mean, std = density.mean, density.std
    cuts = {0.0, z_max}
    for c in (mean - 8 * std, mean - 2 * std, mean - 0.5 * std, mean, mean + 0.5 * std, mean + 2 * std, mean + 8 * std):
        if 0.0 < c < z_max:
            cuts.add(c)
    cuts = sorted(cuts)

    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, err, info = integrate.quad(
                lambda z: _safe_eval(ser_awgn_fn, es_n0 * z) * float(density.pdf(z)),
                lo,
                hi,
                epsabs=1e-13,
                epsrel=rtol,
                limit=400,
                full_output=True,
            )[:3]
        if err > max(1e-12, rtol * abs(value)) * 10:
            raise QuadratureError(f"fading integral on [{lo:.4g}, {hi:.4g}] did not converge: value={value}, err={err}")
        total += value
    return min(max(total, 0.0), 1.0)


def _safe_eval(fn: Callable[[float], float], gamma: float) -> float:
    # Every SER is continuous at zero SNR; evaluate just above it.
    return fn(gamma if gamma > 0 else 1e-300)


def covert_ser(es_n0: float, cmap: CovertCodingMap, model: ChannelModel | None = None) -> float:
    """Covert SER under AWGN (``model`` None or AWGN) or averaged over fading."""
    if model is None or not model.is_fading:
        return covert_ser_awgn(es_n0, cmap)
    return ser_fading(es_n0, model, partial(covert_ser_awgn, cmap=cmap))


def primary_ser(es_n0: float, m: int, cmap: CovertCodingMap, model: ChannelModel | None = None) -> float:
    if model is None or not model.is_fading:
        return primary_ser_awgn(es_n0, m, cmap)
    return ser_fading(es_n0, model, partial(primary_ser_awgn, m=m, cmap=cmap))


def energy_per_symbol(es: float, cmap: CovertCodingMap) -> float:
    """Mean transmitted energy ``es * mean(k^2)`` with equiprobable radii."""
    return float(es * np.mean(np.square(cmap.levels)))


def goodput(ser: float, t_s: float) -> float:
    """Error-discounted symbol rate ``(1 - SER) / T_s``."""
    if not t_s > 0:
        raise ValueError("symbol period must be positive")
    return (1.0 - ser) / t_s


def symbol_goodput(
    es_n0: float,
    m: int,
    cmap: CovertCodingMap,
    t_s: float,
    model: ChannelModel | None = None,
) -> RatePair:
    if not t_s > 0:
        raise ValueError("symbol period must be positive")
    p_p = primary_ser(es_n0, m, cmap, model)
    p_c = covert_ser(es_n0, cmap, model) if cmap.m_c > 1 else 0.0
    return RatePair(goodput(p_p, t_s), goodput(p_c, t_s))
