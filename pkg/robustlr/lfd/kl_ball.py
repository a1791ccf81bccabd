"""Least favorable densities for KL-divergence balls (the m-test).

Given thresholds l_l <= 1 <= l_u on the nominal likelihood ratio, the LFDs
scale f0 below l_l and above l_u by constants and follow a geometric
interpolation between f0 and f1 in the middle band.  The thresholds are
found by solving D(g0_hat, f0) = eps0 and D(g1_hat, f1) = eps1.
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property
import logging
from math import exp, inf, log as ln
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from robustlr.exceptions import Infeasible, NoConvergence, NotSymmetric
from robustlr.lfd import BaseSolution
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.limits import bhattacharyya_distance, m_feasible
from robustlr.model import (
    DEFAULT_QUADRATURE,
    BranchDensity,
    NominalModel,
    Quadrature,
    integrate,
)

log = logging.getLogger(__name__)
TOLERANCE = 1e-10  # on the divergence residuals
ACCEPTABLE = 1e-8


@dataclass(frozen=True, eq=False)
class MTestSolution(BaseSolution):
    """Solved thresholds of the m-test and the constants they imply."""

    model: NominalModel
    l_l: float
    l_u: float
    k: float
    z: float
    exponent: float
    eps0: float
    eps1: float
    residuals: tuple[float, float] = (0.0, 0.0)
    iterations: int = 0
    method: str = "newton"

    @property
    def log_l_l(self) -> float:
        return ln(self.l_l)

    @property
    def log_l_u(self) -> float:
        return ln(self.l_u)

    @property
    def is_trivial(self) -> bool:
        return self.l_l == self.l_u == 1.0

    @cached_property
    def _densities(self) -> tuple[BranchDensity, BranchDensity]:
        if self.is_trivial:
            return self.model.nominal(0), self.model.nominal(1)
        a, b, lz, lk = self.log_l_l, self.log_l_u, ln(self.z), ln(self.k)
        middle = (-lz - self.exponent * a, 1, self.exponent)
        cuts = (a, b)
        return (
            BranchDensity(self.model, cuts, [(a - lz, 0, 0.0), middle, (lk + b - lz, 0, 0.0)]),
            BranchDensity(self.model, cuts, [(-lz, 1, 0.0), middle, (lk - lz, 1, 0.0)]),
        )

    def density(self, hypothesis: int) -> BranchDensity:
        return self._densities[hypothesis]

    @cached_property
    def _llr(self) -> PiecewiseLLR:
        if self.is_trivial:
            return PiecewiseLLR.nominal(self.model)
        a, b = self.log_l_l, self.log_l_u
        # In the middle band delta_hat interpolates ln l linearly from 0 to 1.
        return PiecewiseLLR(
            self.model,
            (a, b),
            [(-a, 1.0), (0.0, 0.0), (-b, 1.0)],
            ties=[None, (-a / (b - a), 1.0 / (b - a)), None],
        )

    def robust_llr(self) -> PiecewiseLLR:
        return self._llr

    def middle_mass(self, q: Quadrature = DEFAULT_QUADRATURE) -> float:
        """r: the integral of w f1 over the middle band, i.e. z times the LFD mass there."""
        if self.is_trivial:
            return 0.0
        a, e = self.log_l_l, self.exponent
        return integrate(
            lambda y: np.exp(e * (self.model.log_lr(y) - a) + self.model.f1_logpdf(y)),
            self.model.band(a, self.log_l_u),
            self.model,
            q,
        )


@dataclass(frozen=True)
class _Evaluation:
    d0: float
    d1: float
    k: float
    z: float
    exponent: float


def _evaluate(
    model: NominalModel, a: float, b: float, q: Quadrature
) -> Optional[_Evaluation]:
    """Divergences of the LFDs built on ln l_l = a, ln l_u = b."""
    pl, pu = exp(a), exp(b)
    low = model.level_set(a)
    high = model.domain.minus(model.level_set(b))
    f0_low, f1_low = model.nominal_mass(0, low, q), model.nominal_mass(1, low, q)
    f0_high, f1_high = model.nominal_mass(0, high, q), model.nominal_mass(1, high, q)
    num = pl * f0_low - f1_low
    den = f1_high - pu * f0_high
    if not (num > 0 and den > 0):
        return None
    k = num / den
    lk = ln(k)
    e = lk / (b - a)

    def g(y: np.ndarray) -> np.ndarray:
        lr = model.log_lr(y)
        w = np.exp(e * (lr - a) + model.f1_logpdf(y))
        return np.stack([w, w * lr])

    middle = model.band(a, b)
    mass, moment = integrate(g, middle, model, q) if not middle.is_empty else (0.0, 0.0)
    z = f1_low + mass + k * f1_high
    lz = ln(z)
    tilt = e * (moment - a * mass)  # integral of w f1 ln w
    d0 = -lz + (pl * a * f0_low + tilt + moment + k * pu * (lk + b) * f0_high) / z
    d1 = -lz + (tilt + k * lk * f1_high) / z
    return _Evaluation(d0, d1, k, z, e)


class _Residuals:
    """Residual map (ln l_l, ln l_u) -> divergences minus radii."""

    def __init__(self, model: NominalModel, eps0: float, eps1: float, q: Quadrature):  # noqa
        self.model, self.eps, self.q = model, np.array([eps0, eps1]), q
        self.lo, self.hi = model.log_lr_range
        self.calls = 0

    def inside(self, x: np.ndarray) -> bool:
        return bool(self.lo < x[0] < 0 < x[1] < self.hi)

    def evaluate(self, x: np.ndarray) -> Optional[_Evaluation]:
        if not self.inside(x):
            return None
        self.calls += 1
        return _evaluate(self.model, float(x[0]), float(x[1]), self.q)

    def __call__(self, x: np.ndarray) -> Optional[np.ndarray]:
        ev = self.evaluate(x)
        if ev is None:
            return None
        return np.array([ev.d0, ev.d1]) - self.eps


def _initial_guess(res: _Residuals) -> np.ndarray:
    """Bracket the sum of divergences along the ray (-s, s)."""
    top = min(-res.lo, res.hi) * (1 - 1e-6)

    def total(s: float) -> float:
        r = res(np.array([-s, s]))
        return inf if r is None else float(r.sum())

    try:
        s = brentq(total, 1e-6, top, xtol=1e-8)
    except ValueError:
        s = 0.5 * top
    return np.array([-s, s])


def _newton(res: _Residuals, x: np.ndarray, max_iter: int = 60):
    r = res(x)
    if r is None:
        raise NoConvergence("Newton start point is invalid.", last_iterate=x)
    for it in range(max_iter):
        norm = np.max(np.abs(r))
        log.debug("newton %d: x=%s residuals=%s", it, x, r)
        if norm < TOLERANCE:
            return x, r, it
        jac = np.empty((2, 2))
        for i in range(2):
            h = 1e-6 * max(1.0, abs(x[i]))
            step = np.zeros(2)
            step[i] = h
            r_plus = res(x + step)
            if r_plus is None:
                r_plus, h = res(x - step), -h
            if r_plus is None:
                raise NoConvergence("Jacobian stencil left the domain.", last_iterate=x)
            jac[:, i] = (r_plus - r) / h
        try:
            direction = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-4:
            candidate = x + t * direction
            r_new = res(candidate)
            if r_new is not None and np.max(np.abs(r_new)) < (1 - 1e-4 * t) * norm:
                x, r = candidate, r_new
                break
            t *= 0.5
        else:
            break  # no descent; accept if already close
    if np.max(np.abs(r)) < ACCEPTABLE:
        return x, r, max_iter
    raise NoConvergence(
        "Newton iteration stalled.", residuals=r.tolist(), last_iterate=x.tolist()
    )


def _nested_bisection(res: _Residuals):
    """Solve eps1 for ln l_u at each ln l_l, then eps0 for ln l_l."""
    lo, hi = res.lo * (1 - 1e-9), res.hi * (1 - 1e-9)

    def upper_for(a: float) -> float:
        def r1(b: float) -> float:
            r = res(np.array([a, b]))
            return 1.0 if r is None else float(r[1])

        return brentq(r1, 1e-9, hi, xtol=1e-14)

    def r0(a: float) -> float:
        r = res(np.array([a, upper_for(a)]))
        return 1.0 if r is None else float(r[0])

    try:
        a = brentq(r0, lo, -1e-9, xtol=1e-14)
    except ValueError as e:
        raise NoConvergence(f"Nested bisection failed: {e}") from e
    x = np.array([a, upper_for(a)])
    return x, res(x)


def _build(
    model: NominalModel, x: np.ndarray, eps0: float, eps1: float, res: _Residuals, **kw
) -> MTestSolution:
    ev = res.evaluate(x)
    return MTestSolution(
        model=model,
        l_l=exp(x[0]),
        l_u=exp(x[1]),
        k=ev.k,
        z=ev.z,
        exponent=ev.exponent,
        eps0=eps0,
        eps1=eps1,
        residuals=(ev.d0 - eps0, ev.d1 - eps1),
        **kw,
    )


def trivial_solution(model: NominalModel) -> MTestSolution:
    """The zero-radius solution: LFDs are the nominals."""
    return MTestSolution(model, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, method="trivial")


def solve_m_test(
    model: NominalModel,
    eps0: float,
    eps1: float,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> MTestSolution:
    """Solve for the m-test thresholds (l_l, l_u) at radii (eps0, eps1)."""
    if eps0 == 0 and eps1 == 0:
        return trivial_solution(model)
    if eps0 <= 0 or eps1 <= 0:
        raise ValueError("KL radii must be both positive or both zero.")
    feasible, partner = m_feasible(model, eps0, eps1, q)
    if not feasible:
        raise Infeasible(
            f"(eps0, eps1) = ({eps0}, {eps1}) is beyond the limit curve.",
            eps0=eps0,
            eps1=eps1,
            max_eps1=partner,
        )
    res = _Residuals(model, eps0, eps1, q)
    try:
        x, _, iterations = _newton(res, _initial_guess(res))
        method = "newton"
    except NoConvergence as e:
        log.warning("Newton failed (%s); falling back to nested bisection.", e)
        x, _ = _nested_bisection(res)
        iterations, method = res.calls, "nested-bisection"
    solution = _build(model, x, eps0, eps1, res, iterations=iterations, method=method)
    if max(abs(r) for r in solution.residuals) >= ACCEPTABLE:
        raise NoConvergence(
            "m-test residuals above tolerance.",
            residuals=solution.residuals,
            last_iterate=x.tolist(),
        )
    return solution


def solve_m_test_symmetric(
    model: NominalModel, eps: float, q: Quadrature = DEFAULT_QUADRATURE
) -> MTestSolution:
    """One-dimensional solve for l_u when f0(y) == f1(-y), so that l_l = 1 / l_u."""
    if model.symmetry_error() > 1e-8:
        raise NotSymmetric("f0(y) and f1(-y) differ.", error=model.symmetry_error())
    if eps == 0:
        return trivial_solution(model)
    limit = bhattacharyya_distance(model, q)
    if not 0 < eps < limit:
        raise Infeasible(f"eps={eps} is not below the limit {limit}.", limit=limit)

    def divergence(s: float) -> float:
        # Integrals over the half band 1 < l < l_u count twice by symmetry.
        half = integrate(
            lambda y: np.exp(0.5 * (model.f0_logpdf(y) + model.f1_logpdf(y))),
            model.band(0.0, s),
            model,
            q,
        )
        tail = model.nominal_mass(1, model.domain.minus(model.level_set(s)), q)
        z = (
            model.nominal_mass(1, model.level_set(-s), q)
            + 2 * exp(-0.5 * s) * half
            + exp(-s) * tail
        )
        return -ln(z) - (exp(-0.5 * s) * s * half + exp(-s) * s * tail) / z

    top = min(-model.log_lr_range[0], model.log_lr_range[1]) * (1 - 1e-9)
    s = brentq(lambda s: divergence(s) - eps, 1e-12, top, xtol=1e-14)
    res = _Residuals(model, eps, eps, q)
    ev = res.evaluate(np.array([-s, s]))
    return MTestSolution(
        model=model,
        l_l=exp(-s),
        l_u=exp(s),
        k=exp(-s),
        z=ev.z,
        exponent=-0.5,
        eps0=eps,
        eps1=eps,
        residuals=(ev.d0 - eps, ev.d1 - eps),
        method="symmetric",
    )
