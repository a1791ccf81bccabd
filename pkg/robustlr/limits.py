"""Maximum robustness parameters for which the hypotheses stay distinct.

For the KL-ball test the boundary is the parametric curve

    eps_j(u) = -ln k(u) + (u - j) / k(u) * integral of w(y; u) ln l(y)

with w(y; u) = f1(y)^u f0(y)^(1-u) and k(u) its integral, u in [0, 1].
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
import logging
from math import inf, log as ln

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import logsumexp

from robustlr.exceptions import NoRoot, OutOfRange
from robustlr.model import DEFAULT_QUADRATURE, NominalModel, Quadrature

log = logging.getLogger(__name__)
U_TOL = 1e-10
ENDPOINT_SLACK = 1e3  # in units of the quadrature relative tolerance


@dataclass(frozen=True)
class LimitCurve:
    """Samples (u, eps0, eps1) of the feasibility boundary of the m-test."""

    samples: tuple[tuple[float, float, float], ...]

    @property
    def u(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def eps0(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    @property
    def eps1(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])

    def equal_eps(self) -> float:
        """The radius where the sampled curve crosses eps0 == eps1."""
        gap = self.eps0 - self.eps1
        i = int(np.flatnonzero(np.diff(np.sign(gap)) != 0)[0])
        if gap[i] == 0:
            return float(self.eps0[i])
        t = gap[i] / (gap[i] - gap[i + 1])
        return float(self.eps0[i] + t * (self.eps0[i + 1] - self.eps0[i]))


@lru_cache(maxsize=64)
def _nodes(model: NominalModel, q: Quadrature) -> tuple:
    y, w = q.nodes(model.domain.intervals, model.width)
    f0 = model.f0_logpdf(y)
    return f0 + np.log(w), model.log_lr(y)


def tilt_moments(model: NominalModel, u: float, q: Quadrature = DEFAULT_QUADRATURE):
    """Return (ln k(u), mean of ln l under w(.; u) / k(u))."""
    base, lr = _nodes(model, q)
    logw = base + u * lr
    log_k = float(logsumexp(logw))
    return log_k, float(np.sum(np.exp(logw - log_k) * lr))


def log_k(model: NominalModel, u: float, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    return tilt_moments(model, u, q)[0]


def eps_at(
    model: NominalModel, u: float, q: Quadrature = DEFAULT_QUADRATURE
) -> tuple[float, float]:
    """(eps0(u), eps1(u)) on the m-test limit curve."""
    lk, mean = tilt_moments(model, u, q)
    return max(-lk + u * mean, 0.0), max(-lk + (u - 1) * mean, 0.0)


def m_limit_curve(
    model: NominalModel, grid_size: int = 201, q: Quadrature = DEFAULT_QUADRATURE
) -> LimitCurve:
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16.")
    us = np.linspace(0.0, 1.0, grid_size)
    return LimitCurve(tuple((float(u), *eps_at(model, u, q)) for u in us))


def m_max_partner(
    model: NominalModel,
    eps_known: float,
    which: int = 0,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> float:
    """Largest feasible radius for hypothesis ``1 - which`` when hypothesis
    ``which`` has radius ``eps_known``.
    """
    if which not in (0, 1):
        raise ValueError("which must be 0 or 1")
    endpoint = eps_at(model, 1.0 - which, q)[which]
    # the endpoint is itself a quadrature result
    slack = ENDPOINT_SLACK * q.rel_tol * max(1.0, endpoint)
    if eps_known < 0 or eps_known > endpoint + slack:
        raise OutOfRange(
            f"eps{which}={eps_known} is beyond the curve endpoint {endpoint}.",
            eps_known=eps_known,
            endpoint=endpoint,
        )
    if eps_known == 0:
        return eps_at(model, float(which), q)[1 - which]
    if eps_known >= endpoint:
        return 0.0
    u = brentq(
        lambda u: eps_at(model, u, q)[which] - eps_known, 0.0, 1.0, xtol=U_TOL
    )
    return eps_at(model, u, q)[1 - which]


def m_equal_limit(model: NominalModel, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """The largest common radius eps0 == eps1 the m-test can handle."""

    def gap(u: float) -> float:
        e0, e1 = eps_at(model, u, q)
        return e0 - e1

    if gap(0.0) >= 0 or gap(1.0) <= 0:  # identical nominals
        return 0.0
    return eps_at(model, brentq(gap, 0.0, 1.0, xtol=U_TOL), q)[0]


def chernoff_distance(model: NominalModel, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """max over u in [0, 1] of -ln k(u)."""
    res = minimize_scalar(
        lambda u: log_k(model, u, q),
        bounds=(0.0, 1.0),
        method="bounded",
        options={"xatol": U_TOL},
    )
    return max(-float(res.fun), -log_k(model, 0.0, q), -log_k(model, 1.0, q), 0.0)


def bhattacharyya_distance(
    model: NominalModel, q: Quadrature = DEFAULT_QUADRATURE
) -> float:
    return max(-log_k(model, 0.5, q), 0.0)


def contamination_overlap(
    model: NominalModel, k: float, u: float, q: Quadrature = DEFAULT_QUADRATURE
) -> float:
    """f(u) = k u P0[l <= ku] - P1[l <= ku] - u + 1.

    Its root in u >= 1 marks the largest contamination the h-test tolerates.
    """
    region = model.level_set(ln(k * u))
    return (
        k * u * model.nominal_mass(0, region, q)
        - model.nominal_mass(1, region, q)
        - u
        + 1.0
    )


def h_limit(
    model: NominalModel,
    eps_known: float,
    which: int = 0,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> float:
    """Largest contamination ratio for hypothesis ``1 - which`` given the
    ratio ``eps_known`` of hypothesis ``which``.
    """
    if which == 1:
        return h_limit(model.swapped(), eps_known, 0, q)
    if which != 0:
        raise ValueError("which must be 0 or 1")
    if not 0 <= eps_known < 1:
        raise OutOfRange("Contamination ratios live in [0, 1).", eps_known=eps_known)
    k = 1.0 - eps_known
    if k == 1.0:
        raise NoRoot(
            "With an uncontaminated H0 the overlap function only tends to zero.",
            boundary=1.0,
        )
    hi = 2.0
    while contamination_overlap(model, k, hi, q) > 0:
        hi *= 2
        if hi > 2.0**60:
            raise NoRoot("No sign change of the overlap function.", k=k)
    u = brentq(lambda u: contamination_overlap(model, k, u, q), 1.0, hi, xtol=1e-12)
    return 1.0 - 1.0 / u


def h_limit_curve(
    model: NominalModel, grid_size: int = 101, q: Quadrature = DEFAULT_QUADRATURE
) -> list[tuple[float, float]]:
    """Pairs (eps0_c, largest eps1_c) on a grid of eps0_c in (0, 1)."""
    grid = np.linspace(0.0, 0.99, grid_size)[1:]
    return [(float(e), h_limit(model, float(e), 0, q)) for e in grid]


def m_feasible(
    model: NominalModel, eps0: float, eps1: float, q: Quadrature = DEFAULT_QUADRATURE
) -> tuple[bool, float]:
    """Whether (eps0, eps1) lies strictly inside the m-test limit curve,
    and the largest eps1 allowed alongside eps0.
    """
    try:
        partner = m_max_partner(model, eps0, 0, q)
    except OutOfRange:
        return False, -inf
    return eps1 < partner, partner
