"""The asymptotically robust test (a-test).

Its LFDs are the geometric mixtures w(y; u) / k(u) and w(y; 1 - v) / k(1 - v)
with w(y; u) = f1^u f0^(1-u), so the robust statistic is a power of l.
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property
from math import exp, log as ln

from scipy.optimize import brentq

from robustlr.exceptions import Infeasible
from robustlr.lfd import BaseSolution
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.limits import U_TOL, eps_at, log_k
from robustlr.model import DEFAULT_QUADRATURE, BranchDensity, NominalModel, Quadrature


@dataclass(frozen=True, eq=False)
class ATestSolution(BaseSolution):
    """Tilting parameters (u, v) and the per-sample threshold on ln l."""

    model: NominalModel
    u: float
    v: float
    ku: float
    k1v: float
    threshold: float
    eps0: float = 0.0
    eps1: float = 0.0
    residuals: tuple[float, float] = (0.0, 0.0)

    @cached_property
    def _densities(self) -> tuple[BranchDensity, BranchDensity]:
        return (
            BranchDensity(self.model, (), [(-ln(self.ku), 0, self.u)]),
            BranchDensity(self.model, (), [(-ln(self.k1v), 0, 1 - self.v)]),
        )

    def density(self, hypothesis: int) -> BranchDensity:
        return self._densities[hypothesis]

    @cached_property
    def _llr(self) -> PiecewiseLLR:
        return PiecewiseLLR(
            self.model, (), [(ln(self.ku) - ln(self.k1v), 1 - self.u - self.v)]
        )

    def robust_llr(self) -> PiecewiseLLR:
        return self._llr


def solve_a_test(
    model: NominalModel,
    eps0: float,
    eps1: float,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> ATestSolution:
    """Find u with D(g0_bar, f0) = eps0 and v with D(g1_bar, f1) = eps1.

    Both divergences are monotone in the tilt, so each is a bracketed root.
    """
    top0, top1 = eps_at(model, 1.0, q)[0], eps_at(model, 0.0, q)[1]
    if not (0 <= eps0 < top0 and 0 <= eps1 < top1):
        raise Infeasible(
            "A radius exceeds the divergence between the nominals.",
            eps0=eps0,
            eps1=eps1,
            max_eps0=top0,
            max_eps1=top1,
        )
    u = 0.0
    if eps0 > 0:
        u = brentq(lambda t: eps_at(model, t, q)[0] - eps0, 0.0, 1.0, xtol=U_TOL)
    tilt1 = 1.0
    if eps1 > 0:
        tilt1 = brentq(lambda t: eps_at(model, t, q)[1] - eps1, 0.0, 1.0, xtol=U_TOL)
    v = 1.0 - tilt1
    if u + v >= 1:
        raise Infeasible("The tilted LFDs coincide (u + v >= 1).", u=u, v=v)
    lku, lk1v = log_k(model, u, q), log_k(model, 1 - v, q)
    return ATestSolution(
        model=model,
        u=u,
        v=v,
        ku=exp(lku),
        k1v=exp(lk1v),
        threshold=(lk1v - lku) / (1 - u - v),
        eps0=eps0,
        eps1=eps1,
        residuals=(
            eps_at(model, u, q)[0] - eps0 if eps0 else 0.0,
            eps_at(model, 1 - v, q)[1] - eps1 if eps1 else 0.0,
        ),
    )
