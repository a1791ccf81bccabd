"""Huber's clipped likelihood ratio test for epsilon-contamination (the h-test).

The same clipping applies to any pair of densities whose ratio is a
non-decreasing function of l; the composite tests reuse it with the
KL-ball or tilted LFDs in place of the nominals.
"""

from __future__ import annotations
from abc import abstractmethod
from dataclasses import dataclass
from functools import cached_property
import logging
from math import exp, log as ln
import warnings

from scipy.optimize import brentq

from robustlr.exceptions import Degenerate, Infeasible, NonMonotoneLikelihoodRatio
from robustlr.lfd import BaseSolution
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.model import DEFAULT_QUADRATURE, BranchDensity, NominalModel, Quadrature

log = logging.getLogger(__name__)


class ClippedSolution(BaseSolution):
    """A solution obtained by clipping the ratio of an inner pair at (c_l, c_u).

    Subclasses are dataclasses providing ``c_l``, ``c_u``, ``b``,
    ``eps0_c`` and ``eps1_c``.
    """

    c_l: float
    c_u: float
    b: float
    eps0_c: float
    eps1_c: float

    @abstractmethod
    def inner_parts(self) -> tuple[BranchDensity, BranchDensity, PiecewiseLLR]:
        """Return the inner densities and their likelihood ratio."""
        raise NotImplementedError()

    @cached_property
    def _clipped(self) -> tuple[BranchDensity, BranchDensity, PiecewiseLLR]:
        p0, p1, inner = self.inner_parts()
        lcl, lcu = ln(self.c_l), ln(self.c_u)
        keep0, keep1 = ln(1 - self.eps0_c), ln(1 - self.eps1_c)
        up = inner.log_lr_threshold(lcu)
        low = inner.log_lr_threshold(lcl)
        return (
            p0.spliced(p1, up, keep0, keep0 - lcu),
            p0.spliced(p1, low, lcl + keep1, keep1),
            inner.clipped(lcl, lcu, ln(self.b)),
        )

    def density(self, hypothesis: int) -> BranchDensity:
        return self._clipped[hypothesis]

    def robust_llr(self) -> PiecewiseLLR:
        return self._clipped[2]


@dataclass(frozen=True, eq=False)
class HTestSolution(ClippedSolution):
    """Clip thresholds of Huber's test; l_hat = b * clip(l, c_l, c_u)."""

    model: NominalModel
    c_l: float
    c_u: float
    b: float
    eps0_c: float
    eps1_c: float
    residuals: tuple[float, float] = (0.0, 0.0)

    def inner_parts(self) -> tuple[BranchDensity, BranchDensity, PiecewiseLLR]:
        return (
            self.model.nominal(0),
            self.model.nominal(1),
            PiecewiseLLR.nominal(self.model),
        )


def clipping_thresholds(
    p0: BranchDensity,
    p1: BranchDensity,
    llr: PiecewiseLLR,
    eps0_c: float,
    eps1_c: float,
) -> tuple[float, float, tuple[float, float]]:
    """Solve for (c_l, c_u) on the ratio r = p1 / p0 described by ``llr``.

    c_l solves h1(c) = P1[r > c] + c P0[r <= c] = 1 / (1 - eps1_c), an
    increasing function; c_u solves h2(c) = P0[r < c] + P1[r >= c] / c =
    1 / (1 - eps0_c), a decreasing one.
    """
    for eps in (eps0_c, eps1_c):
        if not 0 <= eps < 1:
            raise ValueError("Contamination ratios live in [0, 1).")
    lo, hi = llr.log_range
    total0, total1 = p0.mass(), p1.mass()

    def below(density: BranchDensity, t: float) -> float:
        return density.mass(llr.level_set(t))

    def h1(t: float) -> float:
        return total1 - below(p1, t) + exp(t) * below(p0, t)

    def h2(t: float) -> float:
        return below(p0, t) + (total1 - below(p1, t)) / exp(t)

    target1, target0 = 1 / (1 - eps1_c), 1 / (1 - eps0_c)
    residuals = [0.0, 0.0]
    if eps1_c == 0:
        warnings.warn("eps1_c = 0: c_l sits at the essential infimum.", Degenerate)
        t_l = lo
    else:
        if h1(hi) <= target1:
            raise Infeasible("eps1_c is too large to clip below.", eps1_c=eps1_c)
        t_l = brentq(lambda t: h1(t) - target1, lo, hi, xtol=1e-14)
        residuals[0] = h1(t_l) - target1
    if eps0_c == 0:
        warnings.warn("eps0_c = 0: c_u sits at the essential supremum.", Degenerate)
        t_u = hi
    else:
        if h2(lo) <= target0:
            raise Infeasible("eps0_c is too large to clip above.", eps0_c=eps0_c)
        t_u = brentq(lambda t: h2(t) - target0, lo, hi, xtol=1e-14)
        residuals[1] = h2(t_u) - target0
    if t_l >= t_u:
        raise Infeasible(
            "The contaminated hypotheses overlap (c_l >= c_u).",
            c_l=exp(t_l),
            c_u=exp(t_u),
        )
    log.debug("clip thresholds ln c_l=%g ln c_u=%g", t_l, t_u)
    return exp(t_l), exp(t_u), (residuals[0], residuals[1])


def warn_if_not_monotone(model: NominalModel) -> None:
    if not model.is_monotone:
        warnings.warn(
            "l = f1/f0 is not monotone; the clipped construction is applied as is.",
            NonMonotoneLikelihoodRatio,
        )


def solve_h_test(
    model: NominalModel,
    eps0_c: float,
    eps1_c: float,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> HTestSolution:
    """Solve Huber's minimax test for contamination ratios (eps0_c, eps1_c)."""
    warn_if_not_monotone(model)
    c_l, c_u, residuals = clipping_thresholds(
        model.nominal(0), model.nominal(1), PiecewiseLLR.nominal(model), eps0_c, eps1_c
    )
    return HTestSolution(
        model=model,
        c_l=c_l,
        c_u=c_u,
        b=(1 - eps1_c) / (1 - eps0_c),
        eps0_c=eps0_c,
        eps1_c=eps1_c,
        residuals=residuals,
    )
