"""The nominal density pair, quadrature over level sets of the likelihood
ratio, and divergences between densities.

Everything in robustlr happens on a truncated interval of the real line
equipped with the Lebesgue measure.  The truncation is chosen so that each
nominal density leaves less than ``mass_tol`` outside of it.
"""

from __future__ import annotations  # allows forward references; python 3.7+
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import logging
from math import ceil, inf, isnan, sqrt
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from kerno.typing import DictStr
import numpy as np
import reg
from scipy import stats
from scipy.optimize import brentq, minimize_scalar
from scipy.special import logsumexp

from robustlr.exceptions import (
    InvalidRegion,
    NonConvergence,
    SupportMismatch,
    UnknownFamily,
)

log = logging.getLogger(__name__)
Array = np.ndarray


@dataclass(frozen=True)
class Quadrature:
    """Settings for every integral computed in the library.

    ``node_count`` nodes are spread over the whole support; an interval gets
    a share of panels proportional to its length.  The error of a result is
    estimated by comparing against the same rule with half the panels.
    """

    node_count: int = 4096
    rule: str = "gauss-legendre"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    order: int = 8  # nodes per Gauss-Legendre panel
    max_refinements: int = 3

    def __post_init__(self) -> None:  # noqa
        if self.node_count < 64:
            raise ValueError("Quadrature.node_count must be at least 64.")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("Quadrature tolerances must be positive.")
        if self.rule not in RULES:
            raise ValueError(f"Unknown quadrature rule: {self.rule}")

    @property
    def panel_count(self) -> int:
        return max(2, self.node_count // self.order)

    def nodes(
        self, intervals: Sequence[tuple[float, float]], width: float, scale: float = 1
    ) -> tuple[Array, Array]:
        """Return the nodes and weights covering ``intervals``."""
        total = self.panel_count * scale
        ys, ws = [], []
        for a, b in intervals:
            panels = max(2, int(ceil(total * (b - a) / width)))
            if self.rule == "gauss-legendre":
                x, wx = _legendre(self.order)
                edges = np.linspace(a, b, panels + 1)
                half = 0.5 * np.diff(edges)
                mid = 0.5 * (edges[1:] + edges[:-1])
                ys.append((mid[:, None] + half[:, None] * x).ravel())
                ws.append((half[:, None] * wx).ravel())
            else:
                y = np.linspace(a, b, panels * self.order + 1)
                w = np.full(y.size, y[1] - y[0])
                w[0] = w[-1] = 0.5 * w[0]
                ys.append(y)
                ws.append(w)
        if not ys:
            return np.empty(0), np.empty(0)
        return np.concatenate(ys), np.concatenate(ws)


RULES = ("gauss-legendre", "trapezoid")
DEFAULT_QUADRATURE = Quadrature()


@lru_cache(maxsize=8)
def _legendre(order: int) -> tuple[Array, Array]:
    return np.polynomial.legendre.leggauss(order)


@dataclass(frozen=True)
class IntervalUnion:
    """A finite union of disjoint closed intervals, kept sorted."""

    intervals: tuple[tuple[float, float], ...] = ()

    @classmethod
    def of(cls, pairs: Iterable[tuple[float, float]]) -> IntervalUnion:
        """Normalize: sort, drop empty pieces and merge touching ones."""
        merged: list[list[float]] = []
        for a, b in sorted((float(a), float(b)) for a, b in pairs if b > a):
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    def __and__(self, other: IntervalUnion) -> IntervalUnion:
        out = []
        i = j = 0
        while i < len(self.intervals) and j < len(other.intervals):
            a1, b1 = self.intervals[i]
            a2, b2 = other.intervals[j]
            a, b = max(a1, a2), min(b1, b2)
            if b > a:
                out.append((a, b))
            if b1 < b2:
                i += 1
            else:
                j += 1
        return IntervalUnion(tuple(out))

    def __or__(self, other: IntervalUnion) -> IntervalUnion:
        return IntervalUnion.of(self.intervals + other.intervals)

    def complement(self, span: tuple[float, float]) -> IntervalUnion:
        """Return ``span`` minus this union."""
        lo, hi = span
        out, start = [], lo
        for a, b in self.intervals:
            if a > start:
                out.append((start, min(a, hi)))
            start = max(start, b)
        if hi > start:
            out.append((start, hi))
        return IntervalUnion.of(out)

    def minus(self, other: IntervalUnion) -> IntervalUnion:
        if not self.intervals:
            return self
        span = (self.intervals[0][0], self.intervals[-1][1])
        return self & other.complement(span)

    def cut(self, points: Iterable[float]) -> list[tuple[float, float]]:
        """Split the intervals at ``points``; pieces are not merged back."""
        points = sorted(set(points))
        out = []
        for a, b in self.intervals:
            inner = [p for p in points if a < p < b]
            edges = [a, *inner, b]
            out.extend(zip(edges[:-1], edges[1:]))
        return out

    def contains(self, y: Array) -> Array:
        y = np.asarray(y, dtype=float)
        inside = np.zeros(y.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (y >= a) & (y <= b)
        return inside

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def boundaries(self) -> tuple[float, ...]:
        return tuple(p for pair in self.intervals for p in pair)


Region = Union[None, IntervalUnion, Callable[[Array], Array]]


@reg.dispatch(  # Dispatch on the value of *family*.
    reg.match_key("family", lambda family, params: family)
)
def nominal_distribution(family: str, params: DictStr) -> Any:
    """Return a frozen scipy.stats distribution for a nominal descriptor.

    Families are registered per name; to add your own::

        nominal_distribution.register(my_factory, family="student")

    where ``my_factory(family, params)`` returns a frozen distribution.
    """
    raise UnknownFamily(f"Unknown nominal family: {family}", family=family)


def _gaussian(family: str, params: DictStr) -> Any:
    return stats.norm(loc=params["mean"], scale=sqrt(params["var"]))


def _laplace(family: str, params: DictStr) -> Any:
    return stats.laplace(loc=params["loc"], scale=params["scale"])


def _logistic(family: str, params: DictStr) -> Any:
    return stats.logistic(loc=params["loc"], scale=params["scale"])


nominal_distribution.register(_gaussian, family="gaussian")
nominal_distribution.register(_laplace, family="laplace")
nominal_distribution.register(_logistic, family="logistic")
FAMILY_PARAMETERS = {
    "gaussian": ("mean", "var"),
    "laplace": ("loc", "scale"),
    "logistic": ("loc", "scale"),
}


@dataclass(frozen=True, eq=False)
class NominalModel:
    """The pair of nominal densities (f0, f1) and their likelihood ratio.

    ``distributions`` optionally holds the frozen scipy distributions behind
    the log-densities; when present, masses are computed from exact CDFs
    and samples from exact quantile functions.
    """

    f0_logpdf: Callable[[Array], Array]
    f1_logpdf: Callable[[Array], Array]
    support: tuple[float, float]
    family_tag: Optional[tuple] = None
    distributions: tuple = ()
    scan_nodes: int = 4096
    _level_sets: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_families(
        cls, f0: DictStr, f1: DictStr, mass_tol: float = 1e-10, **kw: Any
    ) -> NominalModel:
        """Build a model from two descriptors like
        ``{"family": "gaussian", "mean": -1, "var": 1}``.
        """
        dists = []
        for descriptor in (f0, f1):
            params = {k: v for k, v in descriptor.items() if k != "family"}
            dists.append(nominal_distribution(descriptor["family"], params))
        lo = min(d.ppf(0.5 * mass_tol) for d in dists)
        hi = max(d.isf(0.5 * mass_tol) for d in dists)
        return cls(
            f0_logpdf=dists[0].logpdf,
            f1_logpdf=dists[1].logpdf,
            support=(float(lo), float(hi)),
            family_tag=(dict(f0), dict(f1)),
            distributions=tuple(dists),
            **kw,
        )

    def logpdf(self, hypothesis: int, y: Array) -> Array:
        if hypothesis == 0:
            return self.f0_logpdf(y)
        if hypothesis == 1:
            return self.f1_logpdf(y)
        raise ValueError(f"hypothesis must be 0 or 1, not {hypothesis}")

    def log_lr(self, y: Array) -> Array:
        """ln l(y) = ln f1(y) - ln f0(y)."""
        return self.f1_logpdf(y) - self.f0_logpdf(y)

    def swapped(self) -> NominalModel:
        """The model with the roles of the hypotheses exchanged."""
        return NominalModel(
            f0_logpdf=self.f1_logpdf,
            f1_logpdf=self.f0_logpdf,
            support=self.support,
            family_tag=self.family_tag[::-1] if self.family_tag else None,
            distributions=self.distributions[::-1],
            scan_nodes=self.scan_nodes,
        )

    @property
    def width(self) -> float:
        return self.support[1] - self.support[0]

    @property
    def domain(self) -> IntervalUnion:
        return IntervalUnion((self.support,))

    @cached_property
    def scan(self) -> tuple[Array, Array]:
        """Grid of the support and ln l on it, for level-set resolution."""
        y = np.linspace(self.support[0], self.support[1], self.scan_nodes)
        return y, self.log_lr(y)

    @cached_property
    def log_lr_range(self) -> tuple[float, float]:
        """(ln essinf l, ln esssup l) over the support."""
        y, v = self.scan

        def refine(i: int, sign: float) -> float:
            a, b = y[max(i - 1, 0)], y[min(i + 1, y.size - 1)]
            res = minimize_scalar(
                lambda s: sign * float(self.log_lr(s)),
                bounds=(a, b),
                method="bounded",
                options={"xatol": 1e-12},
            )
            return sign * min(sign * v[i], float(res.fun))

        return refine(int(np.argmin(v)), 1.0), refine(int(np.argmax(v)), -1.0)

    @cached_property
    def is_monotone(self) -> bool:
        """Whether l is non-decreasing on the scan grid."""
        return bool(np.all(np.diff(self.scan[1]) >= -1e-12))

    def symmetry_error(self) -> float:
        """sup |f0(y) - f1(-y)| over the part of the scan grid mirrored in the support."""
        y = self.scan[0]
        y = y[(-y >= self.support[0]) & (-y <= self.support[1])]
        if y.size == 0:
            return inf
        return float(np.max(np.abs(np.exp(self.f0_logpdf(y)) - np.exp(self.f1_logpdf(-y)))))

    def level_set(self, log_c: float) -> IntervalUnion:
        """Return {y in support : ln l(y) <= log_c} as an interval union."""
        if isnan(log_c):
            raise ValueError("Level-set threshold is NaN.")
        key = float(log_c)
        found = self._level_sets.get(key)
        if found is None:
            found = self._level_sets[key] = self._resolve_level(key)
        return found

    def band(self, log_lo: float, log_hi: float) -> IntervalUnion:
        """Return {y : log_lo < ln l(y) <= log_hi}."""
        return self.level_set(log_hi).minus(self.level_set(log_lo))

    def _resolve_level(self, log_c: float) -> IntervalUnion:
        if log_c == inf:
            return self.domain
        if log_c == -inf:
            return IntervalUnion()
        y, v = self.scan

        def root(a: float, b: float) -> float:
            return brentq(lambda s: float(self.log_lr(s)) - log_c, a, b, xtol=1e-14)

        return _mask_to_union(y, v <= log_c, root)

    def resolve(self, region: Region) -> IntervalUnion:
        """Turn a region argument into intervals inside the support."""
        if region is None:
            return self.domain
        if isinstance(region, IntervalUnion):
            return region & self.domain
        if callable(region):
            return _resolve_predicate(region, self.scan[0])
        raise InvalidRegion(f"Cannot resolve region {region!r}")

    def nominal(self, hypothesis: int) -> BranchDensity:
        """The nominal density f_j as a :class:`Density`."""
        return self._nominals[hypothesis]

    @cached_property
    def _nominals(self) -> tuple[BranchDensity, BranchDensity]:
        return (
            BranchDensity(self, (), [(0.0, 0, 0.0)]),
            BranchDensity(self, (), [(0.0, 1, 0.0)]),
        )

    def nominal_mass(
        self, hypothesis: int, region: Region = None, q: Quadrature = DEFAULT_QUADRATURE
    ) -> float:
        """F_j mass of ``region`` (intersected with the support)."""
        intervals = self.resolve(region).intervals
        if not intervals:
            return 0.0
        if self.distributions:
            d = self.distributions[hypothesis]
            a, b = np.array(intervals).T
            median = d.median()
            span = np.where(a > median, d.sf(a) - d.sf(b), d.cdf(b) - d.cdf(a))
            return float(np.sum(span))
        return integrate(
            lambda y: np.exp(self.logpdf(hypothesis, y)), IntervalUnion(intervals), self, q
        )

    def __repr__(self) -> str:
        return f"<NominalModel {self.family_tag or 'custom'} on {self.support}>"


def _mask_to_union(
    y: Array, inside: Array, root: Callable[[float, float], float]
) -> IntervalUnion:
    """Intervals where ``inside`` holds, refining each switch with ``root``."""
    switches = np.flatnonzero(inside[1:] != inside[:-1])
    out, start = [], (y[0] if inside[0] else None)
    for i in switches:
        x = root(y[i], y[i + 1])
        if start is None:
            start = x
        else:
            out.append((start, x))
            start = None
    if start is not None:
        out.append((start, y[-1]))
    return IntervalUnion.of(out)


def _resolve_predicate(predicate: Callable[[Array], Array], y: Array) -> IntervalUnion:
    inside = np.asarray(predicate(y))
    if inside.shape != y.shape or inside.dtype != bool:
        raise InvalidRegion("A region predicate must return one boolean per point.")
    if np.count_nonzero(inside[1:] != inside[:-1]) > y.size // 4:
        raise InvalidRegion("The region switches too often to be resolved.")

    def root(a: float, b: float) -> float:
        left = bool(predicate(np.array([a]))[0])
        for _ in range(60):
            mid = 0.5 * (a + b)
            if bool(predicate(np.array([mid]))[0]) == left:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    return _mask_to_union(y, inside, root)


def integrate(
    g: Callable[[Array], Array],
    region: Region = None,
    model: Optional[NominalModel] = None,
    q: Quadrature = DEFAULT_QUADRATURE,
    breakpoints: Iterable[float] = (),
) -> Any:
    """Return the integral of ``g`` over ``region`` intersected with the support.

    ``g`` is vectorized; it may return several rows, in which case an array
    of integrals comes back.  ``breakpoints`` are points where ``g`` has a
    kink; panels never straddle them.
    """
    if model is None:
        raise ValueError("integrate() needs the model that owns the support.")
    intervals = model.resolve(region).cut(breakpoints)
    if not intervals:
        return 0.0

    def apply(scale: float) -> Any:
        y, w = q.nodes(intervals, model.width, scale)
        return np.sum(np.asarray(g(y)) * w, axis=-1)

    scale = 1.0
    coarse, fine = apply(0.5), apply(1.0)
    for _ in range(q.max_refinements + 1):
        err = np.max(np.abs(fine - coarse))
        tol = max(q.abs_tol, q.rel_tol * float(np.max(np.abs(fine))))
        if err <= tol:
            return float(fine) if np.ndim(fine) == 0 else fine
        scale *= 2
        coarse, fine = fine, apply(scale)
    raise NonConvergence(
        "Quadrature refinement stalled.", value=fine, error=err, intervals=intervals
    )


def log_integrate(
    log_g: Callable[[Array], Array],
    region: Region,
    model: NominalModel,
    q: Quadrature = DEFAULT_QUADRATURE,
    breakpoints: Iterable[float] = (),
) -> float:
    """Return ln of the integral of exp(log_g), summing in log space.

    Used for moment generating functions, whose integrands can be extremely
    peaked; a stalled refinement is logged rather than raised.
    """
    intervals = model.resolve(region).cut(breakpoints)
    if not intervals:
        return -inf

    def apply(scale: float) -> float:
        y, w = q.nodes(intervals, model.width, scale)
        return float(logsumexp(log_g(y) + np.log(w)))

    coarse, fine, scale = apply(0.5), apply(1.0), 1.0
    for _ in range(q.max_refinements):
        if abs(fine - coarse) <= max(q.rel_tol, 1e-9):
            break
        scale *= 2
        coarse, fine = fine, apply(scale)
    else:
        log.debug("log_integrate kept a log-error of %g", abs(fine - coarse))
    return fine


class Density(metaclass=ABCMeta):
    """Abstract base class for probability densities on a model's support."""

    def __init__(self, model: NominalModel) -> None:
        """Just store the model."""
        self.model = model

    @abstractmethod
    def logpdf(self, y: Array) -> Array:
        raise NotImplementedError()

    def pdf(self, y: Array) -> Array:
        return np.exp(self.logpdf(y))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Points of the support where the density is not smooth."""
        return ()

    def mass(self, region: Region = None, q: Quadrature = DEFAULT_QUADRATURE) -> float:
        return integrate(self.pdf, region, self.model, q, self.breakpoints)

    def expect(
        self,
        g: Callable[[Array], Array],
        region: Region = None,
        q: Quadrature = DEFAULT_QUADRATURE,
        breakpoints: Iterable[float] = (),
    ) -> Any:
        """Integral of g times this density."""
        return integrate(
            lambda y: g(y) * self.pdf(y),
            region,
            self.model,
            q,
            tuple(breakpoints) + self.breakpoints,
        )

    def sampler(self, cells: int = 1 << 16) -> Callable[[np.random.Generator, Any], Array]:
        """Return ``draw(rng, size)`` sampling through a tabulated inverse CDF."""
        lo, hi = self.model.support
        y = np.union1d(np.linspace(lo, hi, cells + 1), self.breakpoints)
        p = self.pdf(y)
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(y))))
        cdf /= cdf[-1]

        def draw(rng: np.random.Generator, size: Any) -> Array:
            return np.interp(rng.random(size), cdf, y)

        return draw


Piece = tuple[float, int, float]


class BranchDensity(Density):
    """A density defined branch by branch over bands of ln l.

    On the band ``cuts[i-1] <= ln l < cuts[i]`` the log-density is
    ``log_scale + slope * ln l(y) + ln f_base(y)``: a nominal density scaled
    by a constant (``slope == 0``) or by a power of the likelihood ratio.
    Every least favorable density of this library has this form.
    """

    def __init__(
        self, model: NominalModel, cuts: Sequence[float], pieces: Sequence[Piece]
    ) -> None:  # noqa
        super().__init__(model)
        assert len(pieces) == len(cuts) + 1, "need one piece per band"
        self.cuts = np.asarray(cuts, dtype=float)
        self.pieces = [(float(s), int(b), float(k)) for s, b, k in pieces]
        self._scales = np.array([p[0] for p in self.pieces])
        self._bases = np.array([p[1] for p in self.pieces])
        self._slopes = np.array([p[2] for p in self.pieces])

    def piece_index(self, log_lr: Array) -> Array:
        return np.searchsorted(self.cuts, log_lr, side="right")

    def piece_at(self, log_lr: float) -> Piece:
        return self.pieces[int(self.piece_index(log_lr))]

    def logpdf(self, y: Array) -> Array:
        y = np.asarray(y, dtype=float)
        f0, f1 = self.model.f0_logpdf(y), self.model.f1_logpdf(y)
        lr = f1 - f0
        i = self.piece_index(lr)
        slope = self._slopes[i]
        tilt = np.where(slope == 0, 0.0, slope * lr)
        return self._scales[i] + tilt + np.where(self._bases[i] == 0, f0, f1)

    @cached_property
    def breakpoints(self) -> tuple[float, ...]:  # type: ignore[override]
        lo, hi = self.model.support
        points = set()
        for c in self.cuts:
            points.update(self.model.level_set(c).boundaries)
        return tuple(sorted(p for p in points if lo < p < hi))

    @cached_property
    def branch_regions(self) -> list[IntervalUnion]:
        """The y-intervals of each band, in order."""
        bounds = [-inf, *self.cuts, inf]
        return [self.model.band(a, b) for a, b in zip(bounds[:-1], bounds[1:])]

    def mass(self, region: Region = None, q: Quadrature = DEFAULT_QUADRATURE) -> float:
        """Exact CDF arithmetic on constant branches, quadrature on the others."""
        target = self.model.resolve(region)
        total = 0.0
        for (scale, base, slope), where in zip(self.pieces, self.branch_regions):
            part = where & target
            if part.is_empty:
                continue
            if slope == 0:
                total += np.exp(scale) * self.model.nominal_mass(base, part, q)
            else:
                total += integrate(self.pdf, part, self.model, q)
        return float(total)

    def spliced(
        self, other: BranchDensity, log_cut: float, below: float, above: float
    ) -> BranchDensity:
        """Return ``exp(below) * self`` where ln l < log_cut, else ``exp(above) * other``."""
        cuts = sorted({*self.cuts, *other.cuts, log_cut} - {inf, -inf})
        bounds = [-inf, *cuts, inf]
        pieces = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            inner = _representative(lo, hi)
            if hi <= log_cut:
                scale, base, slope = self.piece_at(inner)
                pieces.append((scale + below, base, slope))
            else:
                scale, base, slope = other.piece_at(inner)
                pieces.append((scale + above, base, slope))
        return BranchDensity(self.model, cuts, pieces)

    def sampler(self, cells: int = 1 << 16) -> Callable[[np.random.Generator, Any], Array]:
        """Exact quantiles for a bare nominal, tabulated otherwise."""
        if self.model.distributions and self.pieces in ([(0.0, 0, 0.0)], [(0.0, 1, 0.0)]):
            d = self.model.distributions[self.pieces[0][1]]
            lo, hi = d.cdf(self.model.support[0]), d.cdf(self.model.support[1])

            def draw(rng: np.random.Generator, size: Any) -> Array:
                return d.ppf(lo + (hi - lo) * rng.random(size))

            return draw
        return super().sampler(cells)

    def __repr__(self) -> str:
        return f"<BranchDensity cuts={self.cuts.tolist()} pieces={self.pieces}>"


def _representative(lo: float, hi: float) -> float:
    if lo == -inf and hi == inf:
        return 0.0
    if lo == -inf:
        return hi - 1.0
    if hi == inf:
        return lo + 1.0
    return 0.5 * (lo + hi)


def kl_divergence(g: Density, f: Density, q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """D(g, f): the integral of g ln(g/f) over the support."""
    model = g.model
    y = model.scan[0]
    lg, lf = g.logpdf(y), f.logpdf(y)
    bad = (np.exp(lg) > 1e-12) & (lf == -inf)
    if np.any(bad):
        raise SupportMismatch(
            "g has mass where f vanishes.", first_point=float(y[np.argmax(bad)])
        )

    def integrand(y: Array) -> Array:
        lg, lf = g.logpdf(y), f.logpdf(y)
        return np.where(lg > -inf, np.exp(lg) * (lg - lf), 0.0)

    value = integrate(integrand, None, model, q, g.breakpoints + f.breakpoints)
    return max(float(value), 0.0)


def divergence_suite(model: NominalModel, q: Quadrature = DEFAULT_QUADRATURE) -> DictStr:
    """Divergences between the nominals: both KL directions, symmetrized
    chi-squared and the squared Hellinger distance.
    """
    f0, f1 = model.nominal(0), model.nominal(1)

    def chi2(p: Density, r: Density) -> float:
        return integrate(
            lambda y: np.exp(2 * p.logpdf(y) - r.logpdf(y)) - 2 * p.pdf(y) + r.pdf(y),
            None,
            model,
            q,
        )

    overlap = integrate(
        lambda y: np.exp(0.5 * (model.f0_logpdf(y) + model.f1_logpdf(y))), None, model, q
    )
    return {
        "kl_01": kl_divergence(f0, f1, q),
        "kl_10": kl_divergence(f1, f0, q),
        "chi2_sym": max(chi2(f0, f1) + chi2(f1, f0), 0.0),
        "hellinger2": min(max(1.0 - overlap, 0.0), 1.0),
    }
