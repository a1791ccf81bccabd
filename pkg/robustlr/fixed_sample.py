"""Robust tests on a fixed number n of independent observations."""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
import logging
from math import sqrt
from typing import Optional

import numpy as np

from robustlr.lfd import (
    ATestSolution,
    BaseSolution,
    CompositeSolution,
    HTestSolution,
    MTestSolution,
)
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.model import Array, Density, NominalModel
from robustlr.streams import CHUNK, map_chunks, stream

log = logging.getLogger(__name__)
FORMS = ("m", "h", "c", "a", "nominal", "soft_sign", "sign")
ERRORS = ("false_alarm", "miss")
TIE_TOL = 1e-12


class Decision(str, Enum):
    ACCEPT = "accept H0"
    REJECT = "reject H0"


@dataclass(frozen=True, eq=False)
class FixedSampleTest:
    """Reject H0 when the sum of ln l_hat(y_i) - tau over n samples is
    positive; a tie is broken at random with probability mean(delta_hat).

    The ``soft_sign`` form counts delta_hat(y_i) against n / 2, the limit
    of the m-test when l_l = 1 / l_u tends to one; ``sign`` counts l > 1.
    """

    llr: PiecewiseLLR
    n: int
    form: str = "nominal"
    solution: Optional[BaseSolution] = None

    def __post_init__(self) -> None:  # noqa
        if self.n < 1:
            raise ValueError("A test needs at least one observation.")
        if self.form not in FORMS:
            raise ValueError(f"Unknown test form: {self.form}")
        expected = _SOLUTION_TYPES.get(self.form)
        if expected and not isinstance(self.solution, expected):
            raise ValueError(f"The {self.form}-form needs a {expected.__name__}.")

    @classmethod
    def for_solution(cls, solution: BaseSolution, n: int) -> FixedSampleTest:
        for form, kind in _SOLUTION_TYPES.items():
            if isinstance(solution, kind):
                return cls(solution.robust_llr(), n, form, solution)
        raise ValueError(f"No fixed-sample form for {type(solution).__name__}")

    @classmethod
    def nominal(cls, model: NominalModel, n: int, form: str = "nominal") -> FixedSampleTest:
        return cls(PiecewiseLLR.nominal(model), n, form)

    def statistic(self, observations: Array) -> tuple[Array, Array]:
        """Return the test statistic (positive rejects) and the probability
        of rejecting on a tie, along the last axis of ``observations``.
        """
        y = np.asarray(observations, dtype=float)
        if self.form == "sign":
            above = (self.llr.model.log_lr(y) > 0).sum(axis=-1)
            return above - 0.5 * self.n, np.full(above.shape, 0.5)
        delta = self.llr.delta(y)
        if self.form == "soft_sign":
            return delta.sum(axis=-1) - 0.5 * self.n, np.full(delta.shape[:-1], 0.5)
        value = (self.llr.log_value(y) - self.llr.log_threshold).sum(axis=-1)
        return value, delta.mean(axis=-1)

    def decide_many(self, observations: Array, rng: np.random.Generator) -> Array:
        """Reject flags for a batch of shape (runs, n); one uniform per run."""
        value, tie = self.statistic(observations)
        coin = rng.random(np.shape(value))
        tied = np.abs(value) <= TIE_TOL * self.n
        return np.where(tied, coin < tie, value > 0)

    def nominal_form(self, observations: Array) -> tuple[float, float]:
        """The decision written on the nominal likelihood ratio:
        reject iff the left side exceeds the right side.
        """
        y = np.asarray(observations, dtype=float).reshape(-1)
        n = y.size
        model = self.llr.model
        lr = model.log_lr(y)
        if self.form == "m":
            s: MTestSolution = self.solution  # type: ignore[assignment]
            shift = s.log_l_l - s.log_l_u
            return float(np.sum(lr + self.llr.delta(y) * shift)), n * s.log_l_l
        if self.form in ("h", "c"):
            s = self.solution  # type: ignore[assignment]
            inner = s.inner_parts()[2]
            r = inner.log_value(y)
            lcl, lcu = np.log(s.c_l), np.log(s.c_u)
            n1 = int(np.count_nonzero(r >= lcu))
            n2 = int(np.count_nonzero(r <= lcl))
            free = (r > lcl) & (r < lcu)
            rhs = n * inner.log_threshold - (n1 * lcu + n2 * lcl)
            return float(np.sum(r[free])), float(rhs)
        if self.form == "a":
            return float(np.sum(lr)), n * self.solution.threshold  # type: ignore[union-attr]
        if self.form == "soft_sign":
            return float(np.sum(self.llr.delta(y))), 0.5 * n
        if self.form == "sign":
            return float(np.count_nonzero(lr > 0)), 0.5 * n
        return float(np.sum(lr)), 0.0


_SOLUTION_TYPES: dict = {
    "m": MTestSolution,
    "h": HTestSolution,
    "c": CompositeSolution,
    "a": ATestSolution,
}


def decide(test: FixedSampleTest, observations: Array, rng_seed: int) -> Decision:
    y = np.asarray(observations, dtype=float).reshape(1, -1)
    if y.shape[1] != test.n:
        raise ValueError(f"Expected {test.n} observations, got {y.shape[1]}.")
    reject = bool(test.decide_many(y, stream(rng_seed))[0])
    return Decision.REJECT if reject else Decision.ACCEPT


def limiting_m_statistic(solution: MTestSolution, observations: Array) -> float:
    """Sum of delta_hat(y_i): the m-test statistic in the limit l_u -> 1."""
    return float(np.sum(solution.delta(np.asarray(observations, dtype=float))))


def empirical_error(
    test: FixedSampleTest,
    density: Density,
    runs: int,
    seed: int,
    error: str = "false_alarm",
    workers: int = 1,
    chunk: int = CHUNK,
) -> tuple[float, float]:
    """Monte Carlo rate of ``error`` for observations drawn from ``density``,
    with its binomial standard error.
    """
    if runs < 1000:
        raise ValueError("Use at least 1000 Monte Carlo runs.")
    if error not in ERRORS:
        raise ValueError(f"error must be one of {ERRORS}")
    draw = density.sampler()

    def count(index: int, length: int) -> int:
        rng = stream(seed, index)
        reject = test.decide_many(draw(rng, (length, test.n)), rng)
        return int(np.count_nonzero(reject if error == "false_alarm" else ~reject))

    rate = sum(map_chunks(count, runs, workers, chunk)) / runs
    return rate, sqrt(rate * (1 - rate) / runs)


def empirical_pe(
    test: FixedSampleTest,
    q0: Density,
    q1: Density,
    runs: int,
    seed: int,
    workers: int = 1,
) -> tuple[float, float, float]:
    """(P_E, P_E0, P_E1) with equal priors."""
    pe0, _ = empirical_error(test, q0, runs, seed, "false_alarm", workers)
    pe1, _ = empirical_error(test, q1, runs, seed + 1, "miss", workers)
    return 0.5 * (pe0 + pe1), pe0, pe1
