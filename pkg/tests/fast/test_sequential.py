"""Fast unit tests for the robust sequential probability ratio tests."""

from math import inf
from unittest import TestCase

import colander as c
import numpy as np

from robustlr.exceptions import TruncationExceeded
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.llr import MixedDensity, llr_distribution
from robustlr.sequential import (
    ScanPoint,
    SprtConfig,
    SprtResult,
    ThresholdGrid,
    family_solution,
    minimax_scan,
    observation_pair,
    scan_rows,
    sprt_exact,
    sprt_monte_carlo,
    wald_expected_samples,
)
from .. import mean_shifted


def coin_walk(p_up: float) -> MixedDensity:
    """Increments of +1 with probability ``p_up``, -1 otherwise."""
    return MixedDensity(np.empty(0), np.empty(0), ((-1.0, 1 - p_up), (1.0, p_up)))


class TestSprtConfig(TestCase):  # noqa
    def test_thresholds_bracket_zero(self):  # noqa
        with self.assertRaises(ValueError):
            SprtConfig(0.5, 2.0)
        with self.assertRaises(ValueError):
            SprtConfig(-1.0, 1.0, max_n=0)
        cfg = SprtConfig(-1.0, 1.0).with_thresholds(-2.0, 3.0)
        assert (cfg.log_t_l, cfg.log_t_u, cfg.max_n) == (-2.0, 3.0, 10_000)

    def test_schema_defaults(self):  # noqa
        settings = SprtConfig.get_config({})
        assert settings["family"] == "m"
        assert settings["alternative"] is None
        assert settings["method"] == "exact"
        assert settings["step"] == 0.1
        assert settings["mc_runs"] == 100_000

    def test_schema_rejects(self):  # noqa
        with self.assertRaises(c.Invalid) as cm:
            SprtConfig.get_config({"mc_runs": 10, "family": "z", "log_tl_min": 1})
        assert set(cm.exception.asdict()) == {"mc_runs", "family", "log_tl_min"}


class TestThresholdGrid(TestCase):  # noqa
    def test_default_grid(self):  # noqa
        grid = ThresholdGrid.from_range()
        assert len(grid) == 3600
        assert grid.log_tl[0] == -0.1 and grid.log_tl[-1] == -6.0
        assert grid.log_tu[0] == 0.1 and grid.log_tu[-1] == 6.0
        assert next(grid.pairs()) == (-0.1, 0.1)

    def test_ratios(self):  # noqa
        own = SprtResult(0.1, 0.0, 2.0, 3.0, {}, 0.0)
        alt = SprtResult(0.05, 0.0, 4.0, 3.0, {}, 0.0)
        ratios = ScanPoint(-1.0, 1.0, own, alt).ratios()
        assert ratios == {"alpha": 0.5, "beta": 1.0, "en0": 2.0, "en1": 1.0}
        worse = SprtResult(0.1, 0.2, 2.0, 3.0, {}, 0.0)
        assert ScanPoint(-1.0, 1.0, own, worse).ratios()["beta"] == inf


class TestExactWalk(TestCase):  # noqa
    def test_fair_coin(self):  # noqa
        result = sprt_exact(coin_walk(0.5), coin_walk(0.5), SprtConfig(-2.0, 2.0))
        assert abs(result.alpha - 0.5) < 1e-12
        assert abs(result.beta - 0.5) < 1e-12
        # gambler's ruin between -2 and 2 lasts 2 * 2 steps on average
        assert abs(result.en0 - 4.0) < 1e-9
        assert result.truncated_mass < 1e-13
        assert result.mass_defect < 1e-12
        assert abs(result.stop_dist[0].sum() - 1) < 1e-12

    def test_biased_coin(self):  # noqa
        # ruin probability with ratio r = 2 / 3 over a band of 6 from the middle
        r = 2 / 3
        result = sprt_exact(coin_walk(0.6), coin_walk(0.4), SprtConfig(-3.0, 3.0))
        assert abs(result.alpha - 1 / (1 + r**3)) < 1e-12
        assert abs(result.beta - 1 / (1 + r**3)) < 1e-12

    def test_reaching_the_upper_threshold_rejects(self):  # noqa
        result = sprt_exact(coin_walk(1.0), coin_walk(0.0), SprtConfig(-1.0, 1.0))
        assert result.alpha == 1.0 and result.beta == 1.0
        assert result.en0 == result.en1 == 1.0

    def test_truncation(self):  # noqa
        with self.assertRaises(TruncationExceeded) as cm:
            sprt_exact(coin_walk(0.5), coin_walk(0.5), SprtConfig(-5.0, 5.0, max_n=3))
        assert cm.exception.diagnostics["truncated_mass"] > 0.1
        with self.assertRaises(TruncationExceeded):
            sprt_exact(coin_walk(0.5), coin_walk(0.5), SprtConfig(-inf, 2.0))

    def test_continuous_increments(self):  # noqa
        model = mean_shifted()
        llr = PiecewiseLLR.nominal(model)
        d0, d1 = (llr_distribution(llr, model.nominal(j)) for j in (0, 1))
        result = sprt_exact(d0, d1, SprtConfig(-3.0, 3.0))
        # Wald's bounds, with a little room for overshoot and discretization
        assert 0 < result.alpha < np.exp(-3.0)
        assert abs(result.alpha - result.beta) < 1e-4
        assert abs(result.en0 - result.en1) < 1e-3
        assert result.en0 > wald_expected_samples(llr, model.nominal(0), -3.0) * (1 - result.alpha)
        assert result.mass_defect < 1e-8


class TestMonteCarlo(TestCase):  # noqa
    def test_agrees_with_exact(self):  # noqa
        model = mean_shifted()
        llr = PiecewiseLLR.nominal(model)
        config = SprtConfig(-2.0, 2.0, mc_runs=4000, seed=11)
        d0, d1 = (llr_distribution(llr, model.nominal(j)) for j in (0, 1))
        exact = sprt_exact(d0, d1, config)
        simulated = sprt_monte_carlo(llr, (model.nominal(0), model.nominal(1)), config)
        assert simulated.method == "monte-carlo"
        for key in ("alpha", "beta", "en0", "en1"):
            se = simulated.std_errors[key]
            assert abs(getattr(simulated, key) - getattr(exact, key)) < 5 * se + 1e-3
        again = sprt_monte_carlo(llr, (model.nominal(0), model.nominal(1)), config)
        assert again.as_row() == simulated.as_row()


class TestScan(TestCase):  # noqa
    eps = {"eps0": 0.05, "eps1": 0.05, "eps0_c": 0.02, "eps1_c": 0.02}

    def test_family_solution(self):  # noqa
        model = mean_shifted()
        assert family_solution(model, "h", self.eps).c_l < 1
        assert observation_pair(model, "n", self.eps)[1] is model.nominal(1)
        with self.assertRaises(ValueError):
            family_solution(model, "x", self.eps)

    def test_scan(self):  # noqa
        grid = ThresholdGrid(np.array([-1.0, -2.0]), np.array([1.5]))
        points = minimax_scan(mean_shifted(), "h", self.eps, grid, SprtConfig(-1.0, 1.0))
        assert [(p.log_tl, p.log_tu) for p in points] == [(-1.0, 1.5), (-2.0, 1.5)]
        for p in points:
            # contaminated LFDs are the least favorable: nominal errors are smaller
            assert p.alt.alpha <= p.own.alpha + 1e-9
            assert p.alt.beta <= p.own.beta + 1e-9
        rows = scan_rows(points, "h", "n")
        assert len(rows) == 8
        assert rows[0][6] == "alpha_h^n"

    def test_scan_arguments(self):  # noqa
        grid = ThresholdGrid.from_range(-0.1, 0.1, 0.1)
        with self.assertRaises(ValueError):
            minimax_scan(mean_shifted(), "z", self.eps, grid, SprtConfig(-1.0, 1.0))
        with self.assertRaises(ValueError):
            minimax_scan(
                mean_shifted(), "h", self.eps, grid, SprtConfig(-1.0, 1.0), method="guess"
            )
