"""The robust likelihood ratio as an evaluable piecewise object."""

from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property
from math import inf, isfinite
from typing import Optional, Sequence

import numpy as np

from robustlr.model import Array, IntervalUnion, NominalModel, _representative

Tie = tuple[float, float]
RANDOM_TIE: Tie = (0.5, 0.0)  # a fair coin


@dataclass(frozen=True)
class Branch:
    """One branch: on ``log_lo <= ln l < log_hi``,
    ln l_hat = ``log_scale + slope * ln l``.
    """

    log_lo: float
    log_hi: float
    log_scale: float
    slope: float
    tie: Tie
    region: IntervalUnion

    @property
    def kind(self) -> str:
        if self.slope == 0:
            return "constant"
        if self.slope == 1:
            return "scaled"
        return "power"


class PiecewiseLLR:
    """The robust likelihood ratio l_hat(y) and its decision rule delta_hat.

    l_hat is a non-decreasing function of the nominal l, described by
    ``cuts`` (in ln l) and one ``(log_scale, slope)`` pair per band.
    The decision rule rejects H0 when ln l_hat exceeds ``log_threshold``,
    accepts below it, and on equality rejects with probability
    ``clip(offset + slope * ln l, 0, 1)`` taken from the band's ``tie``.
    """

    def __init__(
        self,
        model: NominalModel,
        cuts: Sequence[float],
        pieces: Sequence[tuple[float, float]],
        log_threshold: float = 0.0,
        ties: Optional[Sequence[Optional[Tie]]] = None,
    ) -> None:  # noqa
        assert len(pieces) == len(cuts) + 1, "need one piece per band"
        self.model = model
        self.cuts = np.asarray(cuts, dtype=float)
        self.pieces = [(float(s), float(k)) for s, k in pieces]
        self.log_threshold = float(log_threshold)
        ties = ties or [None] * len(pieces)
        self.ties = [t or RANDOM_TIE for t in ties]
        self._scales = np.array([p[0] for p in self.pieces])
        self._slopes = np.array([p[1] for p in self.pieces])
        self._tie_offsets = np.array([t[0] for t in self.ties])
        self._tie_slopes = np.array([t[1] for t in self.ties])

    @classmethod
    def nominal(cls, model: NominalModel) -> PiecewiseLLR:
        """The nominal likelihood ratio l itself."""
        return cls(model, (), [(0.0, 1.0)])

    @cached_property
    def branches(self) -> list[Branch]:
        bounds = [-inf, *self.cuts, inf]
        return [
            Branch(lo, hi, s, k, tie, self.model.band(lo, hi))
            for (s, k), tie, lo, hi in zip(self.pieces, self.ties, bounds[:-1], bounds[1:])
        ]

    @cached_property
    def breakpoints(self) -> tuple[float, ...]:
        lo, hi = self.model.support
        points = set()
        for c in self.cuts:
            points.update(self.model.level_set(c).boundaries)
        return tuple(sorted(p for p in points if lo < p < hi))

    @cached_property
    def decision_breakpoints(self) -> tuple[float, ...]:
        """``breakpoints`` plus the points where ``delta`` jumps."""
        lo, hi = self.model.support
        points = set(self.breakpoints)
        cut = self.log_lr_threshold(self.log_threshold)
        if isfinite(cut):
            points.update(self.model.level_set(cut).boundaries)
        return tuple(sorted(p for p in points if lo < p < hi))

    def at_log_lr(self, log_lr: Array) -> Array:
        """ln l_hat as a function of ln l."""
        log_lr = np.asarray(log_lr, dtype=float)
        i = np.searchsorted(self.cuts, log_lr, side="right")
        slope = self._slopes[i]
        return self._scales[i] + np.where(slope == 0, 0.0, slope * log_lr)

    def log_value(self, y: Array) -> Array:
        return self.at_log_lr(self.model.log_lr(np.asarray(y, dtype=float)))

    def value(self, y: Array) -> Array:
        return np.exp(self.log_value(y))

    def delta(self, y: Array) -> Array:
        """Probability of rejecting H0 after observing ``y``."""
        lr = self.model.log_lr(np.asarray(y, dtype=float))
        i = np.searchsorted(self.cuts, lr, side="right")
        v = self.at_log_lr(lr)
        tie = np.clip(self._tie_offsets[i] + self._tie_slopes[i] * lr, 0.0, 1.0)
        return np.where(
            v > self.log_threshold, 1.0, np.where(v < self.log_threshold, 0.0, tie)
        )

    @property
    def log_range(self) -> tuple[float, float]:
        """(ln essinf l_hat, ln esssup l_hat) over the support."""
        lo, hi = self.model.log_lr_range
        return float(self.at_log_lr(lo)), float(self.at_log_lr(hi))

    def log_lr_threshold(self, log_c: float) -> float:
        """sup {ln l : ln l_hat <= log_c}."""
        bounds = [-inf, *self.cuts, inf]
        found = -inf
        for (scale, slope), lo, hi in zip(self.pieces, bounds[:-1], bounds[1:]):
            if slope == 0:
                v_lo = v_hi = scale
            else:
                v_lo, v_hi = scale + slope * lo, scale + slope * hi
            if v_hi <= log_c:
                found = hi
                continue
            if v_lo > log_c:
                return found
            return (log_c - scale) / slope
        return found

    def level_set(self, log_c: float) -> IntervalUnion:
        """{y : ln l_hat(y) <= log_c}."""
        return self.model.level_set(self.log_lr_threshold(log_c))

    def clipped(self, log_c_l: float, log_c_u: float, log_b: float) -> PiecewiseLLR:
        """Return ``b * clip(l_hat, c_l, c_u)``, deciding against ``b`` times
        the current threshold.
        """
        low, high = self.log_lr_threshold(log_c_l), self.log_lr_threshold(log_c_u)
        cuts = sorted({*self.cuts, low, high} - {inf, -inf})
        bounds = [-inf, *cuts, inf]
        pieces, ties = [], []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi <= low:
                pieces.append((log_c_l + log_b, 0.0))
                ties.append(None)
            elif lo >= high:
                pieces.append((log_c_u + log_b, 0.0))
                ties.append(None)
            else:
                i = int(np.searchsorted(self.cuts, _representative(lo, hi), side="right"))
                scale, slope = self.pieces[i]
                pieces.append((scale + log_b, slope))
                ties.append(self.ties[i])
        return PiecewiseLLR(
            self.model, cuts, pieces, self.log_threshold + log_b, ties
        )

    def __repr__(self) -> str:
        return f"<PiecewiseLLR cuts={self.cuts.tolist()} pieces={self.pieces}>"
