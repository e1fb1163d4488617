import pytest

from pnask.channel import ChannelModel
from pnask.optimizer import (
    GridPoint,
    SearchSpace,
    evaluate_grid,
    optimize,
    select_optimum,
    weighted_rate,
)


class TestSearchSpace:
    def test_default_grid_size(self):
        assert len(SearchSpace().triples()) == 4 * 3 * 9

    def test_d_scaled_by_levels(self):
        ds = SearchSpace().d_candidates(4)
        assert ds[0] == pytest.approx(0.1 / 3)
        assert ds[-1] == pytest.approx(0.3)

    def test_absolute_d_values(self):
        space = SearchSpace(m_values=(4,), m_c_values=(2,), d_values=(0.25, 0.5))
        assert [t[2] for t in space.triples()] == [0.25, 0.5]

    def test_infeasible_absolute_d(self):
        with pytest.raises(ValueError, match="infeasible"):
            SearchSpace(m_c_values=(4,), d_values=(0.4,)).triples()

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            SearchSpace(m_values=()).triples()

    def test_from_dict_ignores_none(self):
        space = SearchSpace.from_dict({"m_values": [2, 4], "d_values": None})
        assert space.m_values == (2, 4)
        assert space.d_values is None

    def test_single_level_has_no_d(self):
        assert SearchSpace().d_candidates(1) == [None]


class TestObjective:
    def test_weighted_rate(self):
        assert weighted_rate(0.5, 4, 2, 100.0, 50.0) == pytest.approx(0.5 * 2 * 100 + 0.5 * 1 * 50)
        assert weighted_rate(1.0, 8, 4, 10.0, 99.0, subcarriers=48) == pytest.approx(48 * 30.0)

    def test_tie_break_prefers_smaller_mc_then_d_then_m(self):
        pts = [
            GridPoint(8, 4, 0.1, 0, 0, 0, 0, 1.0),
            GridPoint(4, 2, 0.3, 0, 0, 0, 0, 1.0),
            GridPoint(2, 2, 0.3, 0, 0, 0, 0, 1.0),
            GridPoint(16, 2, 0.2, 0, 0, 0, 0, 1.0),
        ]
        best = select_optimum(pts)
        assert (best.m, best.m_c, best.d) == (16, 2, 0.2)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            select_optimum([])

    @pytest.mark.parametrize("beta", [-0.1, 1.5])
    def test_beta_range(self, beta):
        with pytest.raises(ValueError):
            evaluate_grid(0.0, beta)


class TestOptimize:
    # regression values of the bit-weighted objective on the default grid
    @pytest.mark.parametrize(
        "db,beta,expected",
        [
            (0.0, 0.1, (4, 4, 0.2)),
            (0.0, 0.5, (4, 4, 0.1 / 3)),
            (0.0, 0.9, (4, 4, 0.1 / 3)),
            (0.0, 0.0, (2, 4, 0.8 / 3)),
            (0.0, 1.0, (4, 8, 0.1 / 7)),
            (15.0, 1.0, (16, 8, 0.1 / 7)),
        ],
    )
    def test_default_grid(self, db, beta, expected):
        res = optimize(db, beta)
        assert (res.m, res.m_c) == expected[:2]
        assert res.d == pytest.approx(expected[2])

    @pytest.mark.parametrize("db", [0.0, 15.0])
    def test_extremes_order_d(self, db):
        # covert-only favours wide spacing, primary-only favours narrow spacing
        assert optimize(db, 0.0).d > optimize(db, 1.0).d

    def test_optimum_is_grid_max(self):
        res = optimize(5.0, 0.5)
        assert res.objective == max(g.objective for g in res.grid)
        assert len(res.to_dict(include_grid=True)["grid"]) == len(res.grid)
        assert "grid" not in res.to_dict()

    def test_threads_do_not_change_result(self):
        space = SearchSpace(m_values=(2, 4), m_c_values=(2, 4))
        assert evaluate_grid(10.0, 0.5, space, workers=4) == evaluate_grid(10.0, 0.5, space)

    def test_fading_channel(self):
        res = optimize(15.0, 0.5, SearchSpace(m_values=(4, 8), m_c_values=(2,)), channel=ChannelModel.rayleigh())
        assert res.m in (4, 8) and res.m_c == 2
