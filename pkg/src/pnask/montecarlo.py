"""Monte Carlo link simulation of PN-ASK.

Trials are split into fixed-size blocks; block ``b`` draws from a generator
seeded with ``(seed, stream, b)`` and counts are reduced in block order, so an
estimate depends on the seed only and never on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .channel import ChannelModel, NoiseSpec, apply_channel
from .modem import (
    apply_displacement,
    build_coding_map,
    pnask_demodulate,
    pnask_modulate,
)

BLOCK_SIZE = 1 << 16

# Stream tags keep the reference (pure M-PSK) draws independent of the
# PN-ASK draws made under the same seed.
_STREAM_MAIN = 0
_STREAM_REFERENCE = 1


@dataclass(frozen=True)
class SimConfig:
    m: int
    m_c: int
    d: float | None
    channel: ChannelModel = field(default_factory=ChannelModel.awgn)
    es_n0_db: float = 10.0
    n_symbols: int = 100_000
    seed: int = 0
    displacement_enabled: bool = False

    def __post_init__(self):
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        # Raises on infeasible (m_c, d).
        build_coding_map(self.m_c, self.d)
        if self.m < 2 or self.m & (self.m - 1):
            raise ValueError(f"m must be a power of two >= 2, got {self.m}")

    @property
    def coding_map(self):
        return build_coding_map(self.m_c, self.d)

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.es_n0_db)


@dataclass(frozen=True)
class SerEstimate:
    """Error counts of one simulation run.

    Primary and covert errors are tracked jointly per trial; the four counts
    ``n_ok + n_primary_only + n_covert_only + n_both`` sum to ``n``.
    """

    n: int
    n_primary_only: int
    n_covert_only: int
    n_both: int

    @property
    def n_ok(self) -> int:
        return self.n - self.n_primary_only - self.n_covert_only - self.n_both

    @property
    def errors_primary(self) -> int:
        return self.n_primary_only + self.n_both

    @property
    def errors_covert(self) -> int:
        return self.n_covert_only + self.n_both

    @property
    def ser_primary(self) -> float:
        return self.errors_primary / self.n

    @property
    def ser_covert(self) -> float:
        return self.errors_covert / self.n

    @property
    def sigma_primary(self) -> float:
        return binomial_sigma(self.ser_primary, self.n)

    @property
    def sigma_covert(self) -> float:
        return binomial_sigma(self.ser_covert, self.n)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)


@dataclass(frozen=True)
class DetectabilityReport:
    bin_edges: np.ndarray
    density: np.ndarray
    ks_statistic: float
    n: int


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), stream, block]))


def _block_sizes(n: int) -> list[int]:
    full, rest = divmod(n, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def simulate_block(config: SimConfig, n: int, rng: np.random.Generator):
    """Run ``n`` trials; returns sent primary/covert indices and equalized samples.

    Equalization divides by the true gain ``h``.
    """
    cmap = config.coding_map
    primary = rng.integers(0, config.m, n)
    covert = rng.integers(0, config.m_c, n)
    x = pnask_modulate(primary, covert, config.m, cmap)
    if config.displacement_enabled:
        x = apply_displacement(x, covert, cmap, rng)
    y, h = apply_channel(x, config.channel, config.noise, rng, return_gain=True)
    return primary, covert, y / h


def _count_block(config: SimConfig, block: int, n: int, stream: int = _STREAM_MAIN):
    rng = _block_rng(config.seed, stream, block)
    primary, covert, y_eq = simulate_block(config, n, rng)
    p_hat, c_hat = pnask_demodulate(y_eq, config.m, config.coding_map)
    ep = p_hat != primary
    ec = c_hat != covert
    both = int(np.count_nonzero(ep & ec))
    return int(np.count_nonzero(ep)) - both, int(np.count_nonzero(ec)) - both, both


def _map_blocks(fn, sizes, workers: int):
    jobs = list(enumerate(sizes))
    if workers <= 1 or len(jobs) == 1:
        return [fn(b, n) for b, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def estimate_ser(config: SimConfig, workers: int = 1) -> SerEstimate:
    """Simulate ``config.n_symbols`` symbol pairs and count errors per channel."""
    parts = _map_blocks(lambda b, n: _count_block(config, b, n), _block_sizes(config.n_symbols), workers)
    p_only, c_only, both = (sum(col) for col in zip(*parts))
    return SerEstimate(config.n_symbols, p_only, c_only, both)


def equalized_samples(config: SimConfig, n: int | None = None, stream: int = _STREAM_MAIN, workers: int = 1) -> np.ndarray:
    n = config.n_symbols if n is None else n
    parts = _map_blocks(
        lambda b, size: simulate_block(config, size, _block_rng(config.seed, stream, b))[2],
        _block_sizes(n),
        workers,
    )
    return np.concatenate(parts)


def scatter_export(config: SimConfig, n: int) -> np.ndarray:
    """Equalized received samples of an ``n``-symbol run under ``config``'s seed.

    Draws are vectorized per block, so this is not a prefix of a longer run.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return equalized_samples(config, n)


def reference_config(config: SimConfig) -> SimConfig:
    """Same link without a covert channel (pure M-PSK)."""
    return SimConfig(
        m=config.m,
        m_c=1,
        d=None,
        channel=config.channel,
        es_n0_db=config.es_n0_db,
        n_symbols=config.n_symbols,
        seed=config.seed,
        displacement_enabled=False,
    )


def amplitude_statistics(config: SimConfig, bins: int = 100, workers: int = 1) -> DetectabilityReport:
    """Histogram of ``|equalized sample|`` plus its KS distance to pure M-PSK.

    The reference stream uses an independent random stream under the same seed,
    channel and Es/N0. KS compares amplitudes divided by their median: an
    observer does not know the absolute received level, and the median stays
    stable where ``n / h`` has no finite variance.
    """
    if bins < 10:
        raise ValueError("bins must be >= 10")
    amp = np.abs(equalized_samples(config, workers=workers))
    ref = np.abs(equalized_samples(reference_config(config), stream=_STREAM_REFERENCE, workers=workers))
    upper = max(np.quantile(amp, 0.999), np.quantile(ref, 0.999))
    density, edges = np.histogram(amp, bins=bins, range=(0.0, float(upper)), density=True)
    ks = stats.ks_2samp(amp / np.median(amp), ref / np.median(ref)).statistic
    return DetectabilityReport(edges, density, float(ks), amp.size)
