"""Fast unit tests for the nominal model, regions and quadrature."""

from math import exp, log
from unittest import TestCase

import numpy as np

from robustlr.exceptions import InvalidRegion, UnknownFamily
from robustlr.model import (
    BranchDensity,
    Density,
    IntervalUnion,
    NominalModel,
    Quadrature,
    divergence_suite,
    integrate,
    kl_divergence,
    nominal_distribution,
)
from .. import mean_and_variance_shifted, mean_shifted


class TestQuadrature(TestCase):  # noqa
    def test_rejects_bad_settings(self):  # noqa
        with self.assertRaises(ValueError):
            Quadrature(node_count=10)
        with self.assertRaises(ValueError):
            Quadrature(rule="simpson")
        with self.assertRaises(ValueError):
            Quadrature(abs_tol=0)

    def test_polynomial_over_region(self):  # noqa
        model = mean_shifted()
        value = integrate(lambda y: y**2, IntervalUnion(((0.0, 1.0),)), model)
        assert abs(value - 1 / 3) < 1e-12

    def test_trapezoid_rule(self):  # noqa
        model = mean_shifted()
        q = Quadrature(rule="trapezoid", abs_tol=1e-8, rel_tol=1e-8, max_refinements=6)
        value = integrate(lambda y: np.exp(model.f0_logpdf(y)), None, model, q)
        assert abs(value - 1) < 1e-7

    def test_vector_valued_integrand(self):  # noqa
        model = mean_shifted()
        f0 = model.nominal(0)
        mass, mean = integrate(lambda y: np.stack([f0.pdf(y), y * f0.pdf(y)]), None, model)
        assert abs(mass - 1) < 1e-9
        assert abs(mean + 1) < 1e-9

    def test_requires_model(self):  # noqa
        with self.assertRaises(ValueError):
            integrate(lambda y: y)


class TestIntervalUnion(TestCase):  # noqa
    def test_of_merges_and_sorts(self):  # noqa
        u = IntervalUnion.of([(3, 4), (0, 1), (1, 2), (5, 5)])
        assert u.intervals == ((0.0, 2.0), (3.0, 4.0))
        assert u.measure == 3.0

    def test_set_operations(self):  # noqa
        a = IntervalUnion.of([(0, 2), (3, 5)])
        b = IntervalUnion.of([(1, 4)])
        assert (a & b).intervals == ((1.0, 2.0), (3.0, 4.0))
        assert (a | b).intervals == ((0.0, 5.0),)
        assert a.complement((-1, 6)).intervals == ((-1.0, 0.0), (2.0, 3.0), (5.0, 6.0))
        assert a.minus(b).intervals == ((0.0, 1.0), (4.0, 5.0))
        assert IntervalUnion().is_empty

    def test_cut_and_contains(self):  # noqa
        a = IntervalUnion.of([(0, 2)])
        assert a.cut([1, 5]) == [(0.0, 1.0), (1.0, 2.0)]
        assert a.contains(np.array([-1, 0, 1.5, 3])).tolist() == [False, True, True, False]


class TestNominalModel(TestCase):  # noqa
    def test_unknown_family(self):  # noqa
        with self.assertRaises(UnknownFamily):
            nominal_distribution("cauchy", {})

    def test_support_holds_the_mass(self):  # noqa
        model = mean_and_variance_shifted()
        for j in (0, 1):
            assert abs(model.nominal_mass(j) - 1) < 1e-9
            assert abs(model.nominal(j).mass() - 1) < 1e-9

    def test_logpdf_checks_hypothesis(self):  # noqa
        with self.assertRaises(ValueError):
            mean_shifted().logpdf(2, 0.0)

    def test_level_set_of_linear_log_lr(self):  # noqa
        model = mean_shifted()
        region = model.level_set(1.0)
        assert len(region.intervals) == 1
        lo, hi = region.intervals[0]
        assert lo == model.support[0]
        assert abs(hi - 0.5) < 1e-10

    def test_level_set_of_quadratic_log_lr(self):  # noqa
        model = mean_and_variance_shifted()
        region = model.level_set(-1.0)
        assert len(region.intervals) == 1
        for y in region.intervals[0]:
            assert abs(float(model.log_lr(y)) + 1.0) < 1e-9

    def test_band_splits_the_support(self):  # noqa
        model = mean_shifted()
        band = model.band(-1.0, 1.0)
        assert len(band.intervals) == 1
        assert np.allclose(band.intervals[0], (-0.5, 0.5), atol=1e-10)

    def test_log_lr_range(self):  # noqa
        model = mean_and_variance_shifted()
        lo, hi = model.log_lr_range
        # ln l = -ln 2 + (3 y^2 + 10 y + 3) / 8, smallest at y = -5 / 3
        assert abs(lo - (-log(2) - 2 / 3)) < 1e-8
        assert hi >= float(np.max(model.scan[1])) > 10

    def test_monotone(self):  # noqa
        assert mean_shifted().is_monotone
        assert not mean_and_variance_shifted().is_monotone

    def test_symmetry(self):  # noqa
        assert mean_shifted().symmetry_error() < 1e-12
        assert mean_and_variance_shifted().symmetry_error() > 1e-3

    def test_swapped(self):  # noqa
        model = mean_shifted()
        y = np.linspace(-2, 2, 5)
        assert np.allclose(model.swapped().log_lr(y), -model.log_lr(y))

    def test_resolve_predicate(self):  # noqa
        model = mean_shifted()
        region = model.resolve(lambda y: y > 0)
        (lo, hi), = region.intervals
        assert abs(lo) < 1e-12 and hi == model.support[1]
        with self.assertRaises(InvalidRegion):
            model.resolve(lambda y: np.sin(1000 * y) > 0)
        with self.assertRaises(InvalidRegion):
            model.resolve(3)

    def test_custom_model_without_distributions(self):  # noqa
        ref = mean_shifted()
        model = NominalModel(ref.f0_logpdf, ref.f1_logpdf, ref.support)
        assert abs(model.nominal_mass(0, model.level_set(0.0)) - 0.5 - 0.3413447) < 1e-6


class TestBranchDensity(TestCase):  # noqa
    def test_tilted_branch_mass(self):  # noqa
        model = mean_shifted()
        # f0 * l^(1/2) / k(1/2) with k(1/2) = exp(-1/2)
        g = BranchDensity(model, (), [(0.5, 0, 0.5)])
        assert abs(g.mass() - 1) < 1e-9

    def test_spliced(self):  # noqa
        model = mean_shifted()
        f0, f1 = model.nominal(0), model.nominal(1)
        g = f0.spliced(f1, 0.0, 0.0, 0.0)
        y = np.array([-1.0, 1.0])
        assert np.allclose(g.logpdf(y), [model.f0_logpdf(-1.0), model.f1_logpdf(1.0)])
        assert abs(g.mass() - 2 * 0.8413447460685429) < 1e-9
        assert len(g.breakpoints) == 1
        assert abs(g.breakpoints[0]) < 1e-10

    def test_sampler(self):  # noqa
        model = mean_shifted()
        draw = model.nominal(1).sampler()
        y = draw(np.random.default_rng(1), 20000)
        assert abs(y.mean() - 1) < 0.05
        draw = Density.sampler(model.nominal(1))
        y = draw(np.random.default_rng(1), 20000)
        assert abs(y.mean() - 1) < 0.05


class TestDivergences(TestCase):  # noqa
    def test_kl_between_gaussians(self):  # noqa
        model = mean_and_variance_shifted()
        f0, f1 = model.nominal(0), model.nominal(1)
        assert abs(kl_divergence(f0, f1) - (log(2) + 5 / 8 - 1 / 2)) < 1e-8
        assert abs(kl_divergence(f1, f0) - (-log(2) + 4 - 1 / 2)) < 1e-8

    def test_suite(self):  # noqa
        suite = divergence_suite(mean_shifted())
        assert abs(suite["kl_01"] - 2) < 1e-8
        assert abs(suite["kl_10"] - 2) < 1e-8
        assert abs(suite["hellinger2"] - (1 - exp(-0.5))) < 1e-8
        # chi2(f0, f1) = exp(d^2) - 1 with d = 2; the tails are truncated
        assert abs(suite["chi2_sym"] / (2 * (exp(4) - 1)) - 1) < 1e-3
