import math

import numpy as np
import pytest

from pnask.analytic import covert_ser, primary_ser
from pnask.channel import ChannelModel
from pnask.modem import ModemError, build_coding_map
from pnask.montecarlo import (
    BLOCK_SIZE,
    SerEstimate,
    SimConfig,
    amplitude_statistics,
    binomial_sigma,
    equalized_samples,
    estimate_ser,
    reference_config,
    scatter_export,
)


@pytest.fixture
def config():
    return SimConfig(4, 2, 0.5, ChannelModel.awgn(), 10.0, 50_000, seed=3)


class TestSimConfig:
    def test_infeasible_rejected(self):
        with pytest.raises(ModemError, match="d < 1/"):
            SimConfig(4, 4, 0.4)

    @pytest.mark.parametrize("kwargs", [dict(m=3), dict(m=1), dict(n_symbols=0)])
    def test_bad_fields(self, kwargs):
        base = dict(m=4, m_c=2, d=0.5)
        with pytest.raises(ValueError):
            SimConfig(**{**base, **kwargs})

    def test_reference(self, config):
        ref = reference_config(config)
        assert (ref.m, ref.m_c, ref.d, ref.seed) == (4, 1, None, 3)


class TestSerEstimate:
    def test_counts_partition(self):
        est = SerEstimate(100, 5, 7, 3)
        assert est.n_ok == 85
        assert est.errors_primary == 8
        assert est.errors_covert == 10
        assert est.ser_covert == pytest.approx(0.10)
        assert est.sigma_covert == pytest.approx(binomial_sigma(0.1, 100))


class TestEstimate:
    def test_deterministic_and_worker_independent(self):
        cfg = SimConfig(8, 4, 0.2, ChannelModel.rayleigh(), 12.0, 3 * BLOCK_SIZE + 17, seed=42)
        a = estimate_ser(cfg, workers=1)
        assert estimate_ser(cfg, workers=4) == a
        assert estimate_ser(cfg, workers=1) == a

    def test_seed_changes_draws(self, config):
        other = SimConfig(4, 2, 0.5, ChannelModel.awgn(), 10.0, 50_000, seed=4)
        assert estimate_ser(config) != estimate_ser(other)

    @pytest.mark.parametrize(
        "m,m_c,d,model",
        [
            (4, 2, 0.5, ChannelModel.awgn()),
            (8, 4, 0.2, ChannelModel.awgn()),
            (2, 2, 0.3, ChannelModel.rician(4.0)),
            (4, 2, 0.4, ChannelModel.lognormal(-0.09, 0.3)),
        ],
        ids=["qpsk-awgn", "8psk-awgn", "bpsk-rician", "qpsk-lognormal"],
    )
    def test_agrees_with_analytic(self, m, m_c, d, model):
        db = 10.0
        est = estimate_ser(SimConfig(m, m_c, d, model, db, 200_000, seed=8), workers=2)
        g = 10 ** (db / 10)
        cmap = build_coding_map(m_c, d)
        for analytic, simulated in ((covert_ser(g, cmap, model), est.ser_covert), (primary_ser(g, m, cmap, model), est.ser_primary)):
            sigma = max(binomial_sigma(analytic, est.n), 1 / est.n)
            assert abs(analytic - simulated) <= 4 * sigma

    def test_noiseless_is_error_free(self):
        est = estimate_ser(SimConfig(16, 8, 0.1, ChannelModel.rayleigh(), math.inf, 20_000, displacement_enabled=True))
        assert est.errors_primary == est.errors_covert == 0

    def test_displacement_keeps_ser_close(self):
        off = estimate_ser(SimConfig(4, 2, 0.5, ChannelModel.awgn(), 15.0, 100_000, seed=1))
        on = estimate_ser(SimConfig(4, 2, 0.5, ChannelModel.awgn(), 15.0, 100_000, seed=1, displacement_enabled=True))
        # jitter moves symbols toward thresholds, so covert SER can only rise
        assert on.ser_covert >= off.ser_covert


class TestSamples:
    def test_scatter_deterministic(self, config):
        pts = scatter_export(config, 100)
        assert pts.shape == (100,)
        np.testing.assert_array_equal(pts, equalized_samples(config, 100))
        np.testing.assert_array_equal(pts, scatter_export(config, 100))

    def test_scatter_rejects_empty(self, config):
        with pytest.raises(ValueError):
            scatter_export(config, 0)


class TestDetectability:
    def test_report_shapes(self, config):
        rep = amplitude_statistics(config, bins=40)
        assert rep.bin_edges.shape == (41,)
        assert rep.density.shape == (40,)
        assert rep.n == config.n_symbols
        widths = np.diff(rep.bin_edges)
        assert np.sum(rep.density * widths) == pytest.approx(1.0)

    def test_null_case_small(self):
        rep = amplitude_statistics(SimConfig(8, 1, None, ChannelModel.rayleigh(), 20.0, 200_000, seed=2))
        assert rep.ks_statistic < 0.01

    def test_bins_validated(self, config):
        with pytest.raises(ValueError):
            amplitude_statistics(config, bins=5)

    def test_deterministic(self, config):
        a = amplitude_statistics(config)
        b = amplitude_statistics(config, workers=3)
        assert a.ks_statistic == b.ks_statistic
        np.testing.assert_array_equal(a.density, b.density)
