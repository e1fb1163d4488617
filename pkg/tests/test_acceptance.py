"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the summary lines are
also repeated at the end of the pytest report.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, special

from conftest import record
from pnask.analytic import covert_ser, energy_per_symbol, goodput, primary_ser
from pnask.channel import ChannelModel, NoiseSpec
from pnask.marcum import marcum_q1
from pnask.modem import build_coding_map, pnask_modulate
from pnask.montecarlo import SimConfig, amplitude_statistics, binomial_sigma, estimate_ser
from pnask.ofdm import PacketFormat, transfer
from pnask.optimizer import SearchSpace, optimize

ARTIFACTS = Path(__file__).resolve().parent.parent / "acceptance_artifacts"
T_S = 4e-6


def deviation(analytic: float, est: float, n: int) -> float:
    """|analytic - est| in binomial sigmas.

    Sigma comes from the larger of the two probabilities so a zero count is
    not overconfident.
    """
    sigma = max(binomial_sigma(analytic, n), binomial_sigma(est, n), 1.0 / n)
    return abs(analytic - est) / sigma


def within_sigma(analytic: float, est: float, n: int, k: float = 3.0) -> bool:
    return deviation(analytic, est, n) <= k


def bessel_oracle(a: float, b: float) -> float:
    """Marcum Q1 from its defining integral, with i0e for overflow safety."""

    def f(x):
        return x * math.exp(-0.5 * (x - a) ** 2) * special.i0e(a * x)

    lo = max(b, a - 40.0)
    head = 0.0
    if lo > b:
        head = integrate.quad(f, b, lo, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    # integrand beyond a + 40 is below 1e-300
    hi = max(lo, a) + 40.0
    pts = [a] if lo < a < hi else None
    body = integrate.quad(f, lo, hi, points=pts, epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    return head + body


def ser_grid():
    for m in (2, 4, 8):
        for m_c in (2, 4):
            for frac in (0.1, 0.3, 0.5):
                yield m, m_c, frac / (m_c - 1)


class TestAnalyticValidation:
    """Criterion 1: closed-form AWGN SER vs Monte Carlo."""

    def test_awgn_grid(self):
        worst = 0.0
        failures = []
        for m, m_c, d in ser_grid():
            cmap = build_coding_map(m_c, d)
            for db in (0, 5, 10, 15, 20):
                es_n0 = 10 ** (db / 10)
                est = estimate_ser(SimConfig(m, m_c, d, ChannelModel.awgn(), db, 100_000, seed=11), workers=4)
                for label, a, s in (
                    ("covert", covert_ser(es_n0, cmap), est.ser_covert),
                    ("primary", primary_ser(es_n0, m, cmap), est.ser_primary),
                ):
                    worst = max(worst, deviation(a, s, est.n))
                    if not within_sigma(a, s, est.n):
                        failures.append((m, m_c, round(d, 4), db, label, a, s))
        record("1 analytic-vs-MC AWGN", not failures, f"90 configs x 2 streams, worst |dev| = {worst:.2f} sigma")
        assert not failures, failures


class TestFadingValidation:
    """Criterion 2: Rayleigh fading integral vs Monte Carlo and vs AWGN."""

    def test_rayleigh_m4_mc4(self):
        m, m_c, d = 4, 4, 0.2
        cmap = build_coding_map(m_c, d)
        ray = ChannelModel.rayleigh(1.0)
        problems = []
        for db in (0, 5, 10, 15, 20, 25):
            es_n0 = 10 ** (db / 10)
            est = estimate_ser(SimConfig(m, m_c, d, ray, db, 100_000, seed=5), workers=4)
            fc, fp = covert_ser(es_n0, cmap, ray), primary_ser(es_n0, m, cmap, ray)
            if not within_sigma(fc, est.ser_covert, est.n):
                problems.append((db, "covert MC", fc, est.ser_covert))
            if not within_sigma(fp, est.ser_primary, est.n):
                problems.append((db, "primary MC", fp, est.ser_primary))
            if db >= 5:
                if not fc > covert_ser(es_n0, cmap):
                    problems.append((db, "covert fading <= awgn"))
                if not fp > primary_ser(es_n0, m, cmap):
                    problems.append((db, "primary fading <= awgn"))
        record("2 Rayleigh fading SER", not problems, f"0-25 dB, d={d}; issues: {problems or 'none'}")
        assert not problems


REFERENCE_OPTIMA = {
    (0.0, 0.1): (4, 4, 0.2333),
    (0.0, 0.5): (4, 4, 0.0333),
    (0.0, 0.9): (4, 4, 0.0333),
    (15.0, 0.1): (8, 8, 0.1286),
    (15.0, 0.5): (8, 8, 0.1000),
    (15.0, 0.9): (8, 8, 0.0143),
}


class TestTableReproduction:
    """Criterion 3: optimizer vs the reference optimum table.

    On failure the full evaluated grid of every cell is written to
    ``acceptance_artifacts/optimum_grid.json`` and the mismatches are listed.
    """

    def test_optimum_table(self):
        space = SearchSpace()
        rows, mismatches = [], []
        for (db, beta), (pm, pmc, pd) in REFERENCE_OPTIMA.items():
            res = optimize(db, beta, space, t_s=T_S)
            step = 0.1 / (pmc - 1)
            ok = res.m == pm and res.m_c == pmc and abs(res.d - pd) <= step + 5e-4
            rows.append({"expected": [pm, pmc, pd], **res.to_dict(include_grid=True)})
            if not ok:
                mismatches.append(f"({db:g} dB, b={beta}): got ({res.m},{res.m_c},{res.d:.4f}) want ({pm},{pmc},{pd})")
        ARTIFACTS.mkdir(exist_ok=True)
        (ARTIFACTS / "optimum_grid.json").write_text(json.dumps(rows, indent=1))
        detail = "6/6 cells" if not mismatches else f"{6 - len(mismatches)}/6 cells; " + "; ".join(mismatches)
        record("3 optimum table", not mismatches, detail + " (grid: acceptance_artifacts/optimum_grid.json)")
        assert not mismatches, mismatches


class TestEnergyModel:
    """Criterion 4: mean symbol energy vs the closed form."""

    SETTINGS = [(1, None), (2, 0.6), (4, 0.2), (8, 0.6 / 7), (4, 0.1)]

    def test_energy(self):
        rng = np.random.default_rng(4)
        n = 1_000_000
        errs = {}
        for m_c, d in self.SETTINGS:
            cmap = build_coding_map(m_c, d)
            s = pnask_modulate(rng.integers(0, 8, n), rng.integers(0, m_c, n), 8, cmap)
            measured = float(np.mean(np.abs(s) ** 2))
            errs[(m_c, d)] = abs(measured / energy_per_symbol(1.0, cmap) - 1)
        # fixed d-fraction 0.6: levels span [0.4, 1] for every M_c
        closed = [energy_per_symbol(1.0, build_coding_map(mc, None if mc == 1 else 0.6 / (mc - 1))) for mc in (1, 2, 4, 8)]
        decreasing = all(a > b for a, b in zip(closed, closed[1:]))
        ok = max(errs.values()) <= 5e-3 and decreasing
        record("4 energy model", ok, f"max rel err {max(errs.values()):.2e}, E(M_c=1,2,4,8) = {np.round(closed, 4).tolist()}")
        assert ok


class TestMarcumKernel:
    """Criterion 5: Marcum Q1 identities and quadrature-oracle agreement."""

    def test_identities_and_oracle(self):
        grid = np.linspace(0.0, 10.0, 100)
        e_a0 = max(abs(marcum_q1(a, 0.0) - 1.0) for a in grid)
        e_0b = max(abs(marcum_q1(0.0, b) - math.exp(-b * b / 2)) for b in grid)
        rng = np.random.default_rng(55)
        pts = rng.uniform(0, 10, size=(200, 2))
        e_or = max(abs(marcum_q1(a, b) - bessel_oracle(a, b)) for a, b in pts)
        ok = e_a0 <= 1e-12 and e_0b <= 1e-12 and e_or <= 1e-8
        record("5 Marcum Q1", ok, f"Q(a,0) {e_a0:.1e}, Q(0,b) {e_0b:.1e}, oracle {e_or:.1e}")
        assert ok


class TestDetectability:
    """Criterion 6: amplitude KS trend over d and the M_c = 1 null case."""

    def test_ks_trend(self):
        ray = ChannelModel.rayleigh(1.0)
        ks = []
        for d in (0.7, 0.4, 0.2):
            rep = amplitude_statistics(SimConfig(8, 2, d, ray, 20.0, 1_000_000, seed=9), workers=4)
            ks.append(rep.ks_statistic)
        null = amplitude_statistics(SimConfig(8, 1, None, ray, 20.0, 1_000_000, seed=9), workers=4).ks_statistic
        ok = ks[0] > ks[1] > ks[2] and null < 0.01
        record("6 detectability KS", ok, f"d=0.7/0.4/0.2 -> {np.round(ks, 4).tolist()}, null {null:.4f}")
        assert ok


class TestOfdmLoopback:
    """Criterion 7: file transfer through the OFDM packet layer."""

    def test_loopback(self):
        rng = np.random.default_rng(7)
        primary, covert = rng.bytes(1 << 20), rng.bytes(1 << 20)
        clean = transfer(primary, covert, ChannelModel.awgn(), NoiseSpec(math.inf), seed=1, fmt=PacketFormat())
        exact = clean.primary_bytes == primary and clean.covert_bytes == covert
        noisy = transfer(rng.bytes(92_000), rng.bytes(92_000), ChannelModel.awgn(), NoiseSpec(25.0), seed=2)
        ok = exact and noisy.primary_success_rate > 0.99 and noisy.covert_success_rate > 0.99
        record(
            "7 OFDM loopback",
            ok,
            f"1 MB x2 byte-exact={exact} ({clean.packets} packets); 25 dB success "
            f"{noisy.primary_success_rate:.4f}/{noisy.covert_success_rate:.4f} over {noisy.packets} packets",
        )
        assert ok


class TestGoodputTrend:
    """Criterion 8: symbol goodput trade-off in d under Rayleigh fading."""

    @pytest.mark.parametrize("m", [4, 8])
    def test_goodput_trend(self, m):
        ray = ChannelModel.rayleigh(1.0)
        bad = []
        for db in (5, 10, 15, 20, 25):
            es_n0 = 10 ** (db / 10)
            rp, rc = [], []
            for d in (0.2, 0.4, 0.7):
                cmap = build_coding_map(2, d)
                rp.append(goodput(primary_ser(es_n0, m, cmap, ray), T_S))
                rc.append(goodput(covert_ser(es_n0, cmap, ray), T_S))
            if not (rp[0] > rp[1] > rp[2] and rc[0] < rc[1] < rc[2]):
                bad.append(db)
        record(f"8 goodput trend (M={m})", not bad, f"5-25 dB, d=0.2/0.4/0.7; violations at {bad or 'none'}")
        assert not bad
