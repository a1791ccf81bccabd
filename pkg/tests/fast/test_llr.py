"""Fast unit tests for the distribution and rate functions of ln l_hat."""

from unittest import TestCase

import numpy as np
from scipy.stats import norm

from robustlr.exceptions import OutOfRange
from robustlr.lfd import solve_a_test, solve_h_test, solve_m_test, solve_m_test_symmetric
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.lfd.probe import decision_error
from robustlr.limits import eps_at, tilt_moments
from robustlr.llr import (
    MixedDensity,
    admissible_interval,
    error_probabilities,
    llr_density_h,
    llr_density_m,
    llr_distribution,
    log_mgf,
    mean_llr,
    rate_curve,
    rate_function,
    std_llr,
)
from .. import mean_and_variance_shifted, mean_shifted


class TestMixedDensity(TestCase):  # noqa
    def _make_one(self):
        grid = np.array([0.5, 1.5])
        return MixedDensity(grid, np.array([0.25, 0.25]), ((1.0, 0.25), (3.0, 0.25)), {1.0: 0.4})

    def test_masses(self):  # noqa
        d = self._make_one()
        assert d.step == 1.0
        assert d.edges.tolist() == [0.0, 1.0, 2.0]
        assert d.continuous_mass == 0.5
        assert d.total_mass == 1.0

    def test_cdf_counts_atoms_at_the_point(self):  # noqa
        d = self._make_one()
        assert d.cdf(0.5) == 0.125
        assert d.cdf(1.0) == 0.5
        assert d.cdf(5.0) == 1.0

    def test_atom_at(self):  # noqa
        d = self._make_one()
        assert d.atom_at(1.0) == (0.25, 0.4)
        assert d.atom_at(3.0) == (0.25, 0.0)
        assert d.atom_at(2.0) == (0.0, 0.0)

    def test_mean(self):  # noqa
        assert abs(self._make_one().mean() - (0.125 + 0.375 + 0.25 + 0.75)) < 1e-15

    def test_rejects_negative_mass(self):  # noqa
        with self.assertRaises(ValueError):
            MixedDensity(np.array([0.0, 1.0]), np.array([0.5, -0.1]))
        with self.assertRaises(ValueError):
            MixedDensity(np.empty(0), np.empty(0), ((0.0, -1.0),))


class TestNominalStatistic(TestCase):  # noqa
    """ln l = 2 Y, so ln l(Y) ~ N(-2, 4) under f0 and N(2, 4) under f1."""

    def test_distribution(self):  # noqa
        model = mean_shifted()
        llr = PiecewiseLLR.nominal(model)
        d0 = llr_distribution(llr, model.nominal(0))
        assert d0.atoms == ()
        assert abs(d0.total_mass - 1) < 1e-8
        assert abs(d0.mean() + 2) < 1e-3
        d1 = llr_distribution(llr, model.nominal(1))
        alpha, beta = error_probabilities(d0, d1, 0.0)
        assert abs(alpha - norm.sf(1)) < 1e-4
        assert abs(beta - norm.sf(1)) < 1e-4

    def test_moments(self):  # noqa
        model = mean_shifted()
        llr = PiecewiseLLR.nominal(model)
        assert abs(mean_llr(llr, model.nominal(0)) + 2) < 1e-8
        assert abs(std_llr(llr, model.nominal(1)) - 2) < 1e-7
        lo, hi = admissible_interval(llr, model.nominal(0), model.nominal(1))
        assert abs(lo + 2) < 1e-8 and abs(hi - 2) < 1e-8

    def test_rate_functions(self):  # noqa
        # ln M0(u) = 2u^2 - 2u, so I0(t) = (t + 2)^2 / 8 and I1(t) = (t - 2)^2 / 8
        model = mean_shifted()
        llr = PiecewiseLLR.nominal(model)
        assert abs(log_mgf(llr, model.nominal(0), 0.5) + 0.5) < 1e-8
        i0, u = rate_function(llr, model.nominal(0), 1.0)
        assert abs(i0 - 9 / 8) < 1e-7 and abs(u - 0.75) < 1e-4
        point, = rate_curve(llr, model.nominal(0), model.nominal(1), [0.0])
        assert abs(point.I0 - 0.5) < 1e-7 and abs(point.I1 - 0.5) < 1e-7
        assert abs(point.argmax_u - 0.5) < 1e-4 and abs(point.argmax_u1 + 0.5) < 1e-4

    def test_rate_function_outside_its_range(self):  # noqa
        model = mean_shifted()
        llr = PiecewiseLLR.nominal(model)
        f0, f1 = model.nominal(0), model.nominal(1)
        with self.assertRaises(OutOfRange):
            rate_function(llr, f0, 10.0, admissible=(-2.0, 2.0))
        with self.assertRaises(OutOfRange):
            rate_curve(llr, f0, f1, [0.0, 10.0])
        # I0(3) is attained at u = 5 / 4
        with self.assertRaises(OutOfRange):
            rate_function(llr, f0, 3.0, u_bound=1.0)
        i0, u = rate_function(llr, f0, 1.0, admissible=(-2.0, 2.0))
        assert abs(i0 - 9 / 8) < 1e-7 and abs(u - 0.75) < 1e-4

    def test_rates_on_the_limit_curve(self):  # noqa
        # I0(t(u)) = eps0(u) and I1(t(u)) = eps1(u) with t(u) the tilted mean of ln l
        model = mean_and_variance_shifted()
        llr = PiecewiseLLR.nominal(model)
        for u in (0.3, 0.6):
            _, t = tilt_moments(model, u)
            e0, e1 = eps_at(model, u)
            assert abs(rate_function(llr, model.nominal(0), t)[0] - e0) < 1e-6
            assert abs(rate_function(llr, model.nominal(1), t)[0] - e1) < 1e-6


class TestHTestStatistic(TestCase):  # noqa
    def test_closed_form_matches_generic(self):  # noqa
        model = mean_shifted()
        solution = solve_h_test(model, 0.1, 0.02)
        llr = solution.robust_llr()
        for j in (0, 1):
            closed = llr_density_h(model, solution, j)
            generic = llr_distribution(llr, solution.density(j))
            assert len(closed.atoms) == len(generic.atoms) == 2
            for (x, m), (y, n) in zip(closed.atoms, generic.atoms):
                assert abs(x - y) < 1e-12
                assert abs(m - n) < 1e-8
            assert abs(closed.total_mass - 1) < 1e-7
            assert abs(generic.total_mass - 1) < 1e-7

    def test_error_probabilities(self):  # noqa
        model = mean_shifted()
        solution = solve_h_test(model, 0.1, 0.02)
        llr = solution.robust_llr()
        d0, d1 = (llr_density_h(model, solution, j) for j in (0, 1))
        alpha, beta = error_probabilities(d0, d1, llr.log_threshold)
        assert abs(alpha - decision_error(llr, solution.density(0), 0)) < 1e-4
        assert abs(beta - decision_error(llr, solution.density(1), 1)) < 1e-4

    def test_mgf_of_the_lfds(self):  # noqa
        solution = solve_h_test(mean_shifted(), 0.1, 0.02)
        llr = solution.robust_llr()
        q0, q1 = solution.densities()
        assert abs(log_mgf(llr, q0, 0.0)) < 1e-9
        # E_Q0[l_hat] = integral of q1 = 1
        assert abs(log_mgf(llr, q0, 1.0)) < 1e-8
        assert abs(log_mgf(llr, q1, -1.0)) < 1e-8

    def test_log_mgf_is_convex(self):  # noqa
        solution = solve_h_test(mean_shifted(), 0.1, 0.02)
        llr = solution.robust_llr()
        for density in solution.densities():
            values = np.array([log_mgf(llr, density, u) for u in np.linspace(-1.0, 2.0, 31)])
            assert np.min(np.diff(values, 2)) >= -1e-8

    def test_error_probabilities_are_monotone_in_the_threshold(self):  # noqa
        model = mean_shifted()
        solution = solve_h_test(model, 0.1, 0.02)
        lo, hi = solution.robust_llr().log_range
        d0, d1 = (llr_density_h(model, solution, j) for j in (0, 1))
        pairs = [error_probabilities(d0, d1, t) for t in np.linspace(lo - 1, hi + 1, 401)]
        alpha, beta = np.array(pairs).T
        assert np.all(np.diff(alpha) <= 1e-12)
        assert np.all(np.diff(beta) >= -1e-12)
        assert abs(alpha[0] - 1) < 1e-6 and beta[0] < 1e-6
        assert alpha[-1] < 1e-6 and abs(beta[-1] - 1) < 1e-6


class TestMTestStatistic(TestCase):  # noqa
    def test_closed_form_matches_generic(self):  # noqa
        model = mean_and_variance_shifted()
        solution = solve_m_test(model, 0.15, 0.05)
        llr = solution.robust_llr()
        for j in (0, 1):
            closed = llr_density_m(model, solution, j)
            generic = llr_distribution(llr, solution.density(j))
            (x, m), = closed.atoms
            (y, n), = generic.atoms
            assert x == y == 0.0
            assert abs(m - n) < 1e-7
            assert abs(closed.randomization[0.0] - generic.randomization[0.0]) < 1e-6
            assert abs(closed.total_mass - 1) < 1e-6

    def test_symmetric_errors_are_equal(self):  # noqa
        model = mean_shifted()
        solution = solve_m_test_symmetric(model, 0.1)
        d0, d1 = (llr_density_m(model, solution, j) for j in (0, 1))
        assert abs(d0.randomization[0.0] - 0.5) < 1e-9
        alpha, beta = error_probabilities(d0, d1, 0.0)
        assert abs(alpha - beta) < 1e-5
        assert abs(alpha - decision_error(solution.robust_llr(), solution.density(0), 0)) < 1e-4

    def test_trivial_solution_is_nominal(self):  # noqa
        model = mean_shifted()
        d0 = llr_density_m(model, solve_m_test(model, 0.0, 0.0), 0)
        assert d0.atoms == ()
        assert abs(d0.mean() + 2) < 1e-3

    def test_any_statistic_under_any_density(self):  # noqa
        model = mean_shifted()
        m = solve_m_test_symmetric(model, 0.1)
        a = solve_a_test(model, 0.08, 0.08)
        d = llr_distribution(m.robust_llr(), a.density(0))
        assert abs(d.total_mass - 1) < 1e-7
        assert d.atoms[0][0] == 0.0
