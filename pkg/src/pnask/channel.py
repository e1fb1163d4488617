"""Flat-fading channel models with AWGN.

A transmitted sample ``x`` becomes ``h * x + n``. ``n`` is circularly-symmetric
complex Gaussian with ``E|n|^2 = N0`` (variance ``N0/2`` per dimension) for a
unit symbol energy, and ``h`` is drawn independently for every symbol.

Fading kinds also expose the density of the power gain ``z = |h|^2`` so that the
analytic SER can be averaged over it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
from scipy import special

from .marcum import marcum_q1


class ChannelKind(str, Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"
    LOGNORMAL = "lognormal"


@dataclass(frozen=True)
class ChannelModel:
    """Flat channel description.

    ``sigma_h`` is the RMS envelope of the Rayleigh gain, ``E|h|^2 = sigma_h^2``,
    so the default fades around the AWGN operating point without changing the
    mean SNR. Rician uses the same mean power with a line-of-sight to scatter
    power ratio ``k_factor``. Log-normal draws the gain
    amplitude as ``exp(N(ln_mu, ln_sigma^2))``.
    """

    kind: ChannelKind = ChannelKind.AWGN
    sigma_h: float = 1.0
    k_factor: float = 0.0
    ln_mu: float = 0.0
    ln_sigma: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if not self.sigma_h > 0 or not self.ln_sigma > 0:
            raise ValueError("channel scale parameters must be strictly positive")
        if not self.k_factor >= 0:
            raise ValueError("Rician K factor must be >= 0")
        if not all(map(math.isfinite, (self.sigma_h, self.k_factor, self.ln_mu, self.ln_sigma))):
            raise ValueError("channel parameters must be finite")

    @classmethod
    def awgn(cls) -> ChannelModel:
        return cls(ChannelKind.AWGN)

    @classmethod
    def rayleigh(cls, sigma_h: float = 1.0) -> ChannelModel:
        return cls(ChannelKind.RAYLEIGH, sigma_h=sigma_h)

    @classmethod
    def rician(cls, k_factor: float, sigma_h: float = 1.0) -> ChannelModel:
        return cls(ChannelKind.RICIAN, sigma_h=sigma_h, k_factor=k_factor)

    @classmethod
    def lognormal(cls, ln_mu: float = 0.0, ln_sigma: float = 0.5) -> ChannelModel:
        return cls(ChannelKind.LOGNORMAL, ln_mu=ln_mu, ln_sigma=ln_sigma)

    @property
    def is_fading(self) -> bool:
        return self.kind is not ChannelKind.AWGN

    @property
    def mean_power(self) -> float:
        """``E|h|^2`` under this model."""
        if self.kind is ChannelKind.AWGN:
            return 1.0
        if self.kind is ChannelKind.LOGNORMAL:
            return math.exp(2 * self.ln_mu + 2 * self.ln_sigma**2)
        return self.sigma_h**2

    def metadata(self) -> dict:
        meta = asdict(self)
        meta["kind"] = self.kind.value
        meta["mean_power"] = self.mean_power
        return meta


@dataclass(frozen=True)
class NoiseSpec:
    """Operating point; ``es_n0_db = inf`` means a noiseless channel."""

    es_n0_db: float

    def __post_init__(self):
        if math.isnan(self.es_n0_db) or self.es_n0_db == -math.inf:
            raise ValueError(f"invalid Es/N0: {self.es_n0_db}")

    @property
    def es_n0(self) -> float:
        return 10.0 ** (self.es_n0_db / 10.0)

    @property
    def n0(self) -> float:
        """Noise spectral density for unit symbol energy."""
        return 0.0 if math.isinf(self.es_n0_db) else 1.0 / self.es_n0


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian with ``E|z|^2 = variance``."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_gain(model: ChannelModel, shape, rng: np.random.Generator) -> np.ndarray:
    """Draw complex gains ``h`` (all ones for AWGN)."""
    if model.kind is ChannelKind.AWGN:
        return np.ones(shape, dtype=np.complex128)
    if model.kind is ChannelKind.RAYLEIGH:
        return complex_normal(rng, shape, model.mean_power)
    if model.kind is ChannelKind.RICIAN:
        omega = model.mean_power
        k = model.k_factor
        los = math.sqrt(k * omega / (k + 1.0))
        return los + complex_normal(rng, shape, omega / (k + 1.0))
    amplitude = np.exp(model.ln_mu + model.ln_sigma * rng.standard_normal(shape))
    return amplitude * np.exp(2j * np.pi * rng.random(shape))


def add_noise(samples, noise: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(samples, dtype=np.complex128)
    if noise.n0 == 0.0:
        return x.copy()
    return x + complex_normal(rng, x.shape, noise.n0)


def apply_channel(
    samples,
    model: ChannelModel,
    noise: NoiseSpec,
    rng: np.random.Generator,
    return_gain: bool = False,
):
    """Return ``h * x + n`` with i.i.d. per-symbol ``h``; optionally also ``h``."""
    x = np.asarray(samples, dtype=np.complex128)
    if x.size == 0:
        raise ValueError("apply_channel needs at least one sample")
    h = draw_gain(model, x.shape, rng)
    y = add_noise(h * x, noise, rng)
    return (y, h) if return_gain else y


class GainDensity:
    """Density of ``z = |h|^2`` for one fading model.

    ``pdf`` and ``sf`` are vectorized; ``mean``/``std`` locate the bulk of the
    mass for quadrature splitting and ``sample`` draws ``z`` directly.
    """

    def __init__(self, model: ChannelModel):
        if not model.is_fading:
            raise ValueError("AWGN has no fading gain density")
        self.model = model

    @property
    def mean(self) -> float:
        return self.model.mean_power

    @property
    def std(self) -> float:
        m = self.model
        if m.kind is ChannelKind.RAYLEIGH:
            return self.mean
        if m.kind is ChannelKind.RICIAN:
            var_c = self.mean / (2.0 * (m.k_factor + 1.0))
            return var_c * math.sqrt(4.0 + 8.0 * m.k_factor)
        s2 = (2 * m.ln_sigma) ** 2
        return math.sqrt(math.expm1(s2)) * self.mean

    def pdf(self, z):
        z = np.asarray(z, dtype=np.float64)
        m = self.model
        with np.errstate(divide="ignore", invalid="ignore"):
            if m.kind is ChannelKind.RAYLEIGH:
                out = np.exp(-z / self.mean) / self.mean
            elif m.kind is ChannelKind.RICIAN:
                var_c = self.mean / (2.0 * (m.k_factor + 1.0))
                u = np.sqrt(np.maximum(z, 0.0) / var_c)
                nu = math.sqrt(2.0 * m.k_factor)
                out = np.exp(-0.5 * (u - nu) ** 2) * special.i0e(u * nu) / (2.0 * var_c)
            else:
                mu, sig = 2 * m.ln_mu, 2 * m.ln_sigma
                zp = np.where(z > 0, z, 1.0)
                out = np.exp(-((np.log(zp) - mu) ** 2) / (2 * sig**2)) / (zp * sig * math.sqrt(2 * math.pi))
        return np.where(z > 0, out, 0.0) if m.kind is ChannelKind.LOGNORMAL else np.where(z >= 0, out, 0.0)

    def sf(self, z: float) -> float:
        """``P(|h|^2 > z)``."""
        m = self.model
        if z <= 0:
            return 1.0
        if m.kind is ChannelKind.RAYLEIGH:
            return math.exp(-z / self.mean)
        if m.kind is ChannelKind.RICIAN:
            var_c = self.mean / (2.0 * (m.k_factor + 1.0))
            return marcum_q1(math.sqrt(2.0 * m.k_factor), math.sqrt(z / var_c))
        mu, sig = 2 * m.ln_mu, 2 * m.ln_sigma
        return 0.5 * math.erfc((math.log(z) - mu) / (sig * math.sqrt(2)))

    def upper_limit(self, tail: float = 1e-9) -> float:
        """Smallest found ``z`` with ``sf(z) < tail`` (doubling then bisection)."""
        hi = max(self.mean + 10 * self.std, 1.0)
        while self.sf(hi) >= tail:
            hi *= 2.0
        lo = 0.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.sf(mid) >= tail:
                lo = mid
            else:
                hi = mid
        return hi

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.abs(draw_gain(self.model, n, rng)) ** 2


def squared_gain_pdf(model: ChannelModel) -> GainDensity:
    return GainDensity(model)
