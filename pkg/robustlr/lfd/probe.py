"""Random members of KL uncertainty balls, for checking saddle values."""

from __future__ import annotations
import logging
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from robustlr.exceptions import NoConvergence
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.model import DEFAULT_QUADRATURE, Array, Density, Quadrature, integrate

log = logging.getLogger(__name__)


class TiltedDensity(Density):
    """base(y) * exp(t * score(y)) / Z."""

    def __init__(
        self, base: Density, score: Callable[[Array], Array], t: float, log_norm: float
    ) -> None:  # noqa
        super().__init__(base.model)
        self.base, self.score, self.t, self.log_norm = base, score, t, log_norm

    def logpdf(self, y: Array) -> Array:
        return self.base.logpdf(y) + self.t * self.score(y) - self.log_norm

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.base.breakpoints


def random_score(
    rng: np.random.Generator, support: tuple[float, float], terms: int = 4
) -> Callable[[Array], Array]:
    """A smooth random function bounded by 3 in absolute value."""
    lo, hi = support
    amplitude = rng.normal(size=terms)
    frequency = rng.uniform(0.5, 4.0, size=terms) * np.pi / (hi - lo)
    phase = rng.uniform(0, 2 * np.pi, size=terms)

    def score(y: Array) -> Array:
        y = np.asarray(y, dtype=float)
        waves = amplitude[:, None] * np.sin(frequency[:, None] * (y - lo) + phase[:, None])
        return 3.0 * np.tanh(waves.sum(axis=0).reshape(y.shape))

    return score


def random_ball_member(
    density: Density,
    eps: float,
    rng: np.random.Generator,
    q: Quadrature = DEFAULT_QUADRATURE,
    attempts: int = 20,
) -> TiltedDensity:
    """Tilt ``density`` in a random direction until its divergence from it is ``eps``."""
    model = density.model
    intervals = model.domain.cut(density.breakpoints)
    y, w = q.nodes(intervals, model.width)
    base = density.logpdf(y) + np.log(w)
    for _ in range(attempts):
        score = random_score(rng, model.support)
        s = score(y)
        sign = rng.choice((-1.0, 1.0))

        def divergence(t: float) -> float:
            weights = base + sign * t * s
            log_z = logsumexp(weights)
            tilted = np.exp(weights - log_z)
            return float(np.sum(tilted * (sign * t * s)) - log_z + logsumexp(base))

        top = 1.0
        while divergence(top) < eps and top < 1e3:
            top *= 2
        if divergence(top) < eps:
            continue
        t = sign * brentq(lambda t: divergence(t) - eps, 0.0, top, xtol=1e-13)
        log_z = float(logsumexp(base + t * s))
        return TiltedDensity(density, score, t, log_z)
    raise NoConvergence(
        "Could not reach the ball boundary with random tilts.", eps=eps, attempts=attempts
    )


def decision_error(
    llr: PiecewiseLLR,
    density: Density,
    hypothesis: int,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> float:
    """Error probability of the single-sample rule delta_hat when Y ~ ``density``.

    Under hypothesis 0 this is the false alarm probability, under 1 the miss.
    """

    def integrand(y: Array) -> Array:
        d = llr.delta(y)
        return (d if hypothesis == 0 else 1.0 - d) * density.pdf(y)

    return integrate(
        integrand, None, density.model, q, llr.decision_breakpoints + density.breakpoints
    )
