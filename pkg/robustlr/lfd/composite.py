"""Composite uncertainty: epsilon-contamination around a KL-ball.

The KL-ball LFDs play the role of nominals for Huber's clipping, which
yields a five-branch robust likelihood ratio bounded by b c_l and b c_u.
"""

from __future__ import annotations
from dataclasses import dataclass

from robustlr.lfd import BaseSolution
from robustlr.lfd.contamination import (
    ClippedSolution,
    clipping_thresholds,
    warn_if_not_monotone,
)
from robustlr.lfd.kl_ball import solve_m_test
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.lfd.tilted import solve_a_test
from robustlr.model import DEFAULT_QUADRATURE, BranchDensity, NominalModel, Quadrature


@dataclass(frozen=True, eq=False)
class CompositeSolution(ClippedSolution):
    """An inner solution (m-test, or a-test for the c* variant) clipped at (c_l, c_u)."""

    inner: BaseSolution
    c_l: float
    c_u: float
    b: float
    eps0_c: float = 0.0
    eps1_c: float = 0.0
    residuals: tuple[float, float] = (0.0, 0.0)

    @property
    def model(self) -> NominalModel:  # type: ignore[override]
        return self.inner.model

    def inner_parts(self) -> tuple[BranchDensity, BranchDensity, PiecewiseLLR]:
        return self.inner.density(0), self.inner.density(1), self.inner.robust_llr()


def contaminate(
    inner: BaseSolution, eps0_c: float, eps1_c: float
) -> CompositeSolution:
    """Clip the likelihood ratio of ``inner`` for contamination ratios (eps0_c, eps1_c)."""
    warn_if_not_monotone(inner.model)
    c_l, c_u, residuals = clipping_thresholds(
        inner.density(0), inner.density(1), inner.robust_llr(), eps0_c, eps1_c
    )
    return CompositeSolution(
        inner=inner,
        c_l=c_l,
        c_u=c_u,
        b=(1 - eps1_c) / (1 - eps0_c),
        eps0_c=eps0_c,
        eps1_c=eps1_c,
        residuals=residuals,
    )


def solve_c_test(
    model: NominalModel,
    eps0: float,
    eps1: float,
    eps0_c: float,
    eps1_c: float,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> CompositeSolution:
    """KL radii (eps0, eps1) inside, contamination (eps0_c, eps1_c) outside."""
    return contaminate(solve_m_test(model, eps0, eps1, q), eps0_c, eps1_c)


def solve_cstar_test(
    model: NominalModel,
    eps0: float,
    eps1: float,
    eps0_c: float,
    eps1_c: float,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> CompositeSolution:
    """Like :func:`solve_c_test` with the a-test LFDs as the inner pair."""
    return contaminate(solve_a_test(model, eps0, eps1, q), eps0_c, eps1_c)
