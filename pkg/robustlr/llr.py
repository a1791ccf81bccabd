"""Distribution of the robust log-likelihood ratio ln l_hat(Y).

Constant branches of l_hat turn into point masses, the other branches into
a histogram on a regular grid.  From those mixed densities come exact
single-sample error probabilities; from the moment generating function of
ln l_hat come the large-deviation rate functions.
"""

from __future__ import annotations
from collections import defaultdict
from dataclasses import dataclass, field
import logging
from math import ceil, inf, isfinite, log as ln
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from robustlr.exceptions import MGFInfinite, OutOfRange
from robustlr.lfd import HTestSolution, MTestSolution
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.model import (
    DEFAULT_QUADRATURE,
    Array,
    Density,
    IntervalUnion,
    NominalModel,
    Quadrature,
    integrate,
    log_integrate,
)

log = logging.getLogger(__name__)
GRID_SIZE = 4096
NODES = 1 << 18
ATOM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MixedDensity:
    """A histogram on a regular grid plus point masses.

    ``pdf`` holds the average density of each grid cell; ``randomization``
    maps an atom location to the probability of rejecting H0 there.
    """

    grid: Array
    pdf: Array
    atoms: tuple[tuple[float, float], ...] = ()
    randomization: dict = field(default_factory=dict)

    def __post_init__(self) -> None:  # noqa
        if np.any(self.pdf < 0):
            raise ValueError("A density cannot be negative.")
        if any(m < 0 for _, m in self.atoms):
            raise ValueError("Atom masses cannot be negative.")

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0]) if self.grid.size > 1 else 0.0

    @property
    def edges(self) -> Array:
        if self.grid.size == 0:
            return np.empty(0)
        return np.append(self.grid - 0.5 * self.step, self.grid[-1] + 0.5 * self.step)

    @property
    def cell_masses(self) -> Array:
        return self.pdf * self.step

    @property
    def continuous_mass(self) -> float:
        return float(self.cell_masses.sum())

    @property
    def total_mass(self) -> float:
        return self.continuous_mass + sum(m for _, m in self.atoms)

    def continuous_cdf(self, x: Array) -> Array:
        """Mass of the continuous part below ``x``, linear inside a cell."""
        x = np.asarray(x, dtype=float)
        if self.grid.size == 0:
            return np.zeros(x.shape)
        cum = np.concatenate(([0.0], np.cumsum(self.cell_masses)))
        return np.interp(x, self.edges, cum)

    def atom_at(self, x: float) -> tuple[float, float]:
        """Return (mass, rejection fraction) of the atom at ``x``, if any."""
        for loc, mass in self.atoms:
            if abs(loc - x) <= ATOM_TOL * max(1.0, abs(x)):
                return mass, self.randomization.get(loc, 0.0)
        return 0.0, 0.0

    def cdf(self, x: float) -> float:
        """P[X <= x]."""
        return float(self.continuous_cdf(x)) + sum(m for loc, m in self.atoms if loc <= x)

    def mean(self) -> float:
        return float(np.sum(self.grid * self.cell_masses)) + sum(
            loc * m for loc, m in self.atoms
        )

    def __repr__(self) -> str:
        return (
            f"<MixedDensity cells={self.grid.size} "
            f"continuous={self.continuous_mass:.6g} atoms={list(self.atoms)}>"
        )


def _midpoints(
    density: Density, region: IntervalUnion, nodes: int
) -> tuple[Array, Array]:
    """Midpoint nodes over ``region`` and the probability each one carries."""
    model = density.model
    ys, ws = [], []
    for a, b in region.cut(density.breakpoints):
        count = max(16, int(nodes * (b - a) / model.width))
        edges = np.linspace(a, b, count + 1)
        ys.append(0.5 * (edges[1:] + edges[:-1]))
        ws.append(np.diff(edges))
    if not ys:
        return np.empty(0), np.empty(0)
    y = np.concatenate(ys)
    return y, np.concatenate(ws) * density.pdf(y)


def _rescaled(weights: Array, mass: float) -> Array:
    total = weights.sum()
    return weights * (mass / total) if total > 0 else weights


def _histogram(
    values: list[Array],
    weights: list[Array],
    lo: float,
    hi: float,
    grid_size: int,
    anchor: Optional[float] = None,
) -> tuple[Array, Array]:
    """Cell averages on a regular grid; ``anchor`` is kept on a cell edge."""
    if not values:
        return np.empty(0), np.empty(0)
    hi = max(hi, lo + 1e-9)
    step = (hi - lo) / grid_size
    bins = grid_size
    if anchor is not None and lo < anchor < hi:
        lo = anchor - ceil((anchor - lo) / step) * step
        bins = int(ceil((hi - lo) / step - 1e-9))
        hi = lo + bins * step
    masses, edges = np.histogram(
        np.concatenate(values),
        bins=bins,
        range=(lo, hi),
        weights=np.concatenate(weights),
    )
    return 0.5 * (edges[1:] + edges[:-1]), masses / step


def _merge(atoms: dict) -> tuple[tuple[float, float], ...]:
    return tuple(sorted((loc, m) for loc, m in atoms.items() if m > 0))


def llr_distribution(
    llr: PiecewiseLLR,
    density: Density,
    grid_size: int = GRID_SIZE,
    nodes: int = NODES,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> MixedDensity:
    """Distribution of ln l_hat(Y) for Y ~ ``density``.

    Works for any piecewise robust likelihood ratio and any observation
    density, e.g. the m-test statistic under the a-test LFDs.
    """
    model = llr.model
    lo_lr, hi_lr = model.log_lr_range
    atoms: dict = defaultdict(float)
    tied: dict = defaultdict(float)
    values, weights = [], []
    lo, hi = inf, -inf
    for br in llr.branches:
        if br.region.is_empty:
            continue
        mass = density.mass(br.region, q)
        if br.slope == 0:
            atoms[br.log_scale] += mass
            if abs(br.log_scale - llr.log_threshold) <= ATOM_TOL and mass > 0:
                tied[br.log_scale] += density.expect(
                    llr.delta, br.region, q, llr.breakpoints
                )
            continue
        y, w = _midpoints(density, br.region, nodes)
        if y.size == 0:
            continue
        values.append(br.log_scale + br.slope * model.log_lr(y))
        weights.append(_rescaled(w, mass))
        ends = [
            br.log_scale + br.slope * max(br.log_lo, lo_lr),
            br.log_scale + br.slope * min(br.log_hi, hi_lr),
        ]
        lo, hi = min(lo, *ends), max(hi, *ends)
    grid, pdf = _histogram(values, weights, lo, hi, grid_size, llr.log_threshold)
    randomization = {
        loc: min(max(tied[loc] / atoms[loc], 0.0), 1.0) for loc in tied if atoms[loc] > 0
    }
    return MixedDensity(grid, pdf, _merge(atoms), randomization)


def llr_density_h(
    model: NominalModel,
    solution: HTestSolution,
    hypothesis: int,
    grid_size: int = GRID_SIZE,
    nodes: int = NODES,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> MixedDensity:
    """Distribution of ln l_hat under the h-test LFD of ``hypothesis``.

    Between the clipping points it is the nominal log-likelihood-ratio
    density shifted by ln b and scaled by 1 - eps; the clipped tails
    collapse onto atoms at ln(b c_l) and ln(b c_u).
    """
    lcl, lcu, lb = ln(solution.c_l), ln(solution.c_u), ln(solution.b)
    keep = 1.0 - (solution.eps0_c, solution.eps1_c)[hypothesis]
    nominal = model.nominal(hypothesis)
    middle = model.band(lcl, lcu)
    low = model.level_set(lcl)
    high = model.domain.minus(model.level_set(lcu))
    y, w = _midpoints(nominal, middle, nodes)
    x = model.log_lr(y) + lb
    w = _rescaled(w, keep * model.nominal_mass(hypothesis, middle, q))
    grid, pdf = _histogram(
        [x] if y.size else [], [w], lb + lcl, lb + lcu, grid_size, lb
    )
    f0_low = model.nominal_mass(0, low, q)
    f1_high = model.nominal_mass(1, high, q)
    if hypothesis == 0:
        masses = (keep * f0_low, keep * f1_high / solution.c_u)
    else:
        masses = (keep * solution.c_l * f0_low, keep * f1_high)
    atoms = {lb + lcl: masses[0], lb + lcu: masses[1]}
    randomization = {loc: 0.5 for loc in atoms if loc == lb}
    return MixedDensity(grid, pdf, _merge(atoms), randomization)


def llr_density_m(
    model: NominalModel,
    solution: MTestSolution,
    hypothesis: int,
    grid_size: int = GRID_SIZE,
    nodes: int = NODES,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> MixedDensity:
    """Distribution of ln l_hat under the m-test LFD of ``hypothesis``.

    The nominal log-likelihood-ratio density is shifted left by ln l_l below
    the middle band and by ln l_u above it; the middle band's mass r / z is
    stacked on an atom at zero.
    """
    if solution.is_trivial:
        return llr_distribution(
            PiecewiseLLR.nominal(model), model.nominal(hypothesis), grid_size, nodes, q
        )
    a, b, z, k = solution.log_l_l, solution.log_l_u, solution.z, solution.k
    if hypothesis == 0:
        factors = (solution.l_l / z, k * solution.l_u / z)
    else:
        factors = (1.0 / z, k / z)
    nominal = model.nominal(hypothesis)
    lo_lr, hi_lr = model.log_lr_range
    values, weights = [], []
    for region, shift, factor in (
        (model.level_set(a), a, factors[0]),
        (model.domain.minus(model.level_set(b)), b, factors[1]),
    ):
        y, w = _midpoints(nominal, region, nodes)
        if y.size:
            values.append(model.log_lr(y) - shift)
            weights.append(
                _rescaled(w, factor * model.nominal_mass(hypothesis, region, q))
            )
    grid, pdf = _histogram(values, weights, lo_lr - a, hi_lr - b, grid_size, 0.0)

    middle = model.band(a, b)
    e = solution.exponent

    def tilted(y: Array) -> Array:
        lr = model.log_lr(y)
        w = np.exp(e * (lr - a) + model.f1_logpdf(y))
        return np.stack([w, w * lr])

    r, moment = integrate(tilted, middle, model, q) if not middle.is_empty else (0.0, 0.0)
    fraction = (moment / r - a) / (b - a) if r > 0 else 0.5
    return MixedDensity(
        grid,
        pdf,
        _merge({0.0: r / z}),
        {0.0: min(max(fraction, 0.0), 1.0)},
    )


def error_probabilities(
    d0: MixedDensity, d1: MixedDensity, threshold: float
) -> tuple[float, float]:
    """(alpha, beta) of the single-sample test rejecting when ln l_hat > threshold.

    An atom sitting at the threshold rejects with its randomization fraction.
    """
    atom0, frac0 = d0.atom_at(threshold)
    atom1, frac1 = d1.atom_at(threshold)
    above = d0.total_mass - d0.cdf(threshold)
    below = d1.cdf(threshold) - atom1
    alpha = above + frac0 * atom0
    beta = below + (1.0 - frac1) * atom1
    return min(max(alpha, 0.0), 1.0), min(max(beta, 0.0), 1.0)


@dataclass(frozen=True)
class RatePoint:
    """Rate functions at ``t`` under both observation densities.

    ``argmax_u`` maximizes t u - ln M0(u); ``argmax_u1`` does so for M1.
    """

    t: float
    I0: float
    I1: float
    argmax_u: float
    argmax_u1: float = 0.0


def log_mgf(
    llr: PiecewiseLLR, density: Density, u: float, q: Quadrature = DEFAULT_QUADRATURE
) -> float:
    """ln M(u) = ln E[exp(u ln l_hat(Y))]."""
    if u == 0:
        return ln(density.mass(None, q))
    value = log_integrate(
        lambda y: u * llr.log_value(y) + density.logpdf(y),
        None,
        density.model,
        q,
        llr.breakpoints + density.breakpoints,
    )
    if not isfinite(value):
        raise MGFInfinite("The moment generating function diverged.", u=u, value=value)
    return value


def rate_function(
    llr: PiecewiseLLR,
    density: Density,
    t: float,
    q: Quadrature = DEFAULT_QUADRATURE,
    u_bound: float = 10.0,
    admissible: Optional[tuple[float, float]] = None,
) -> tuple[float, float]:
    """I(t) = sup over u of t u - ln M(u), and the maximizing u.

    Outside the ``admissible`` interval, when given, and wherever the
    maximizer reaches ``u_bound``, the supremum is not a reliable number
    and :py:class:`OutOfRange` is raised.
    """
    if admissible is not None and not admissible[0] <= t <= admissible[1]:
        raise OutOfRange(
            f"t={t} is outside the admissible interval {admissible}.",
            t=t,
            admissible=admissible,
        )
    res = minimize_scalar(
        lambda u: log_mgf(llr, density, u, q) - t * u,
        bounds=(-u_bound, u_bound),
        method="bounded",
        options={"xatol": 1e-10},
    )
    u = float(res.x)
    if abs(u) > u_bound * (1 - 1e-4):
        raise OutOfRange(
            f"The rate function at t={t} is maximized beyond |u| = {u_bound}.",
            t=t,
            u=u,
        )
    return max(-float(res.fun), 0.0), u


def rate_curve(
    llr: PiecewiseLLR,
    q0: Density,
    q1: Density,
    ts: Sequence[float],
    q: Quadrature = DEFAULT_QUADRATURE,
) -> list[RatePoint]:
    """Both rate functions over ``ts``, which must lie in the admissible interval."""
    admissible = admissible_interval(llr, q0, q1, q)
    points = []
    for t in ts:
        i0, u0 = rate_function(llr, q0, t, q, admissible=admissible)
        i1, u1 = rate_function(llr, q1, t, q, admissible=admissible)
        points.append(RatePoint(float(t), i0, i1, u0, u1))
    return points


def mean_llr(
    llr: PiecewiseLLR, density: Density, q: Quadrature = DEFAULT_QUADRATURE
) -> float:
    """E[ln l_hat(Y)] for Y ~ ``density``."""
    return density.expect(llr.log_value, None, q, llr.breakpoints)


def std_llr(
    llr: PiecewiseLLR, density: Density, q: Quadrature = DEFAULT_QUADRATURE
) -> float:
    mean = mean_llr(llr, density, q)
    second = density.expect(lambda y: llr.log_value(y) ** 2, None, q, llr.breakpoints)
    return max(second - mean * mean, 0.0) ** 0.5


def admissible_interval(
    llr: PiecewiseLLR,
    q0: Density,
    q1: Density,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> tuple[float, float]:
    """(E_Q0[ln l_hat], E_Q1[ln l_hat]): where both rate functions are informative."""
    return mean_llr(llr, q0, q), mean_llr(llr, q1, q)