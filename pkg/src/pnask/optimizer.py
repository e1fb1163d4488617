"""Grid search for the PN-ASK setting that maximizes weighted goodput.

The objective weights the bit goodput of each stream,

    beta * log2(M) * R_p + (1 - beta) * log2(M_c) * R_c,

where ``R_p``/``R_c`` are the symbol goodputs ``(1 - SER) / T_s``. ``T_s`` and the
subcarrier count are common positive factors and do not move the argmax.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from .analytic import covert_ser, goodput, primary_ser
from .channel import ChannelModel
from .modem import build_coding_map

DEFAULT_T_S = 4e-6
DEFAULT_SUBCARRIERS = 1


@dataclass(frozen=True)
class SearchSpace:
    """Candidate (M, M_c, d) grid.

    ``d`` candidates are ``fraction / (M_c - 1)`` unless absolute ``d_values``
    are given; every candidate must satisfy ``d < 1/(M_c - 1)``.
    """

    m_values: tuple[int, ...] = (2, 4, 8, 16)
    m_c_values: tuple[int, ...] = (2, 4, 8)
    d_fractions: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(1, 10))
    d_values: tuple[float, ...] | None = None

    def d_candidates(self, m_c: int) -> list[float | None]:
        if m_c == 1:
            return [None]
        if self.d_values is not None:
            ds = list(self.d_values)
        else:
            ds = [f / (m_c - 1) for f in self.d_fractions]
        for d in ds:
            if not 0 < d < 1.0 / (m_c - 1):
                raise ValueError(f"infeasible d={d} for M_c={m_c}: need 0 < d < {1.0 / (m_c - 1):.6g}")
        return ds

    def triples(self) -> list[tuple[int, int, float | None]]:
        out = [(m, m_c, d) for m_c in self.m_c_values for d in self.d_candidates(m_c) for m in self.m_values]
        if not out:
            raise ValueError("empty search space")
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> SearchSpace:
        kwargs = {}
        for key in ("m_values", "m_c_values", "d_fractions", "d_values"):
            if raw.get(key) is not None:
                kwargs[key] = tuple(raw[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class GridPoint:
    m: int
    m_c: int
    d: float | None
    ser_primary: float
    ser_covert: float
    r_p: float
    r_c: float
    objective: float


@dataclass
class OptimizationResult:
    m: int
    m_c: int
    d: float | None
    objective: float
    beta: float
    es_n0_db: float
    ser_primary: float
    ser_covert: float
    grid: list[GridPoint] = field(default_factory=list, repr=False)

    def to_dict(self, include_grid: bool = False) -> dict:
        out = asdict(self)
        if include_grid:
            out["grid"] = [asdict(g) for g in self.grid]
        else:
            out.pop("grid")
        return out


def weighted_rate(beta: float, m: int, m_c: int, r_p: float, r_c: float, subcarriers: int = DEFAULT_SUBCARRIERS) -> float:
    return subcarriers * (beta * math.log2(m) * r_p + (1.0 - beta) * math.log2(m_c) * r_c)


def evaluate_grid(
    es_n0_db: float,
    beta: float,
    space: SearchSpace | None = None,
    channel: ChannelModel | None = None,
    t_s: float = DEFAULT_T_S,
    workers: int = 1,
) -> list[GridPoint]:
    """Objective at every triple of ``space``, in the space's enumeration order."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    space = space or SearchSpace()
    triples = space.triples()
    es_n0 = 10.0 ** (es_n0_db / 10.0)

    covert_cache: dict[tuple[int, float | None], float] = {}
    for _, m_c, d in triples:
        if (m_c, d) not in covert_cache:
            covert_cache[(m_c, d)] = covert_ser(es_n0, build_coding_map(m_c, d), channel)

    def point(triple):
        m, m_c, d = triple
        p_p = primary_ser(es_n0, m, build_coding_map(m_c, d), channel)
        p_c = covert_cache[(m_c, d)]
        r_p, r_c = goodput(p_p, t_s), goodput(p_c, t_s)
        return GridPoint(m, m_c, d, p_p, p_c, r_p, r_c, weighted_rate(beta, m, m_c, r_p, r_c))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, triples))
    return [point(t) for t in triples]


def select_optimum(grid: list[GridPoint]) -> GridPoint:
    """Argmax of the objective; ties go to smaller M_c, then smaller d, then smaller M."""
    if not grid:
        raise ValueError("empty feasible set")
    return min(grid, key=lambda g: (-g.objective, g.m_c, g.d or 0.0, g.m))


def optimize(
    es_n0_db: float,
    beta: float,
    space: SearchSpace | None = None,
    channel: ChannelModel | None = None,
    t_s: float = DEFAULT_T_S,
    workers: int = 1,
) -> OptimizationResult:
    grid = evaluate_grid(es_n0_db, beta, space, channel, t_s, workers)
    best = select_optimum(grid)
    return OptimizationResult(
        m=best.m,
        m_c=best.m_c,
        d=best.d,
        objective=best.objective,
        beta=beta,
        es_n0_db=es_n0_db,
        ser_primary=best.ser_primary,
        ser_covert=best.ser_covert,
        grid=grid,
    )
