"""Robust sequential probability ratio tests.

The walk S_n = sum of ln l_hat(y_i) continues while ln t_l < S_n < ln t_u;
it rejects H0 once S_n >= ln t_u and accepts once S_n <= ln t_l.  Its
stopping-time distribution is computed exactly by propagating the density
of S_n over the continuation band, or estimated by simulation.
"""

from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import logging
from math import ceil, inf, isfinite, sqrt
from typing import Any, Iterator, Optional, Sequence

import colander as c
from kerno.typing import DictStr
import numpy as np
from scipy.signal import fftconvolve

from robustlr.exceptions import TruncationExceeded
from robustlr.lfd import (
    BaseSolution,
    solve_a_test,
    solve_c_test,
    solve_cstar_test,
    solve_h_test,
    solve_m_test,
)
from robustlr.lfd.piecewise import PiecewiseLLR
from robustlr.llr import MixedDensity, llr_distribution, mean_llr
from robustlr.model import DEFAULT_QUADRATURE, Density, NominalModel, Quadrature
from robustlr.streams import map_chunks, stream

log = logging.getLogger(__name__)
TRUNCATION_LIMIT = 1e-3
NEGLIGIBLE = 1e-14  # undecided mass at which the exact recursion stops
PRUNE = 1e-15  # exact atom states lighter than this join the lattice
MAX_ATOM_STATES = 4096
FAMILIES = ("m", "a", "h", "c")
OBSERVATIONS = ("n", "m", "a", "h", "c", "c*")
DEFAULT_ALTERNATIVE = {"m": "a", "a": "m", "h": "n", "c": "n"}


@dataclass(frozen=True)
class SprtConfig:
    """Thresholds (in the log domain) and effort of one sequential test."""

    log_t_l: float
    log_t_u: float
    max_n: int = 10_000
    mc_runs: int = 100_000
    seed: int = 0
    grid_step: float = 0.005
    workers: int = 1

    class Config(c.Schema):
        """Validated ``sprt`` section of an experiment configuration.

        - ``family``: the sequential test to scan, one of m, a, h, c.
        - ``alternative``: observation model compared against the test's own
          LFDs; defaults to a for m, m for a and the nominals otherwise.
        - ``method``: ``exact`` (lattice recursion) or ``monte-carlo``.
        - ``log_tl_min``, ``log_tu_max``, ``step``: the threshold grid.
        """

        family = c.SchemaNode(c.Str(), validator=c.OneOf(FAMILIES), missing="m")
        alternative = c.SchemaNode(
            c.Str(), validator=c.OneOf(OBSERVATIONS), missing=None
        )
        method = c.SchemaNode(
            c.Str(), validator=c.OneOf(("exact", "monte-carlo")), missing="exact"
        )
        log_tl_min = c.SchemaNode(c.Float(), validator=c.Range(max=0), missing=-6.0)
        log_tu_max = c.SchemaNode(c.Float(), validator=c.Range(min=0), missing=6.0)
        step = c.SchemaNode(c.Float(), validator=c.Range(min=1e-3), missing=0.1)
        max_n = c.SchemaNode(c.Int(), validator=c.Range(min=1), missing=10_000)
        mc_runs = c.SchemaNode(c.Int(), validator=c.Range(min=1000), missing=100_000)
        grid_step = c.SchemaNode(
            c.Float(), validator=c.Range(min=1e-4, max=0.5), missing=0.005
        )

    @classmethod
    def get_config(cls, settings: DictStr) -> DictStr:
        return cls.Config().deserialize(settings)

    def __post_init__(self) -> None:  # noqa
        if not self.log_t_l <= 0 <= self.log_t_u:
            raise ValueError("Thresholds must satisfy ln t_l <= 0 <= ln t_u.")
        if self.max_n < 1:
            raise ValueError("max_n must be at least 1.")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive.")

    def with_thresholds(self, log_t_l: float, log_t_u: float) -> SprtConfig:
        return replace(self, log_t_l=log_t_l, log_t_u=log_t_u)


@dataclass(frozen=True)
class SprtResult:
    """Error probabilities and expected sample numbers of one threshold pair.

    ``en0`` and ``en1`` count truncated walks as stopping at ``max_n``, so
    they are lower bounds when ``truncated_mass`` is not negligible.
    """

    alpha: float
    beta: float
    en0: float
    en1: float
    stop_dist: dict
    truncated_mass: float
    std_errors: Optional[DictStr] = None
    mass_defect: float = 0.0
    method: str = "exact"

    def as_row(self) -> DictStr:
        return {"alpha": self.alpha, "beta": self.beta, "en0": self.en0, "en1": self.en1}


@dataclass
class _Walk:
    accept: list = field(default_factory=list)
    reject: list = field(default_factory=list)
    remaining: float = 1.0
    defect: float = 0.0

    @property
    def stop_dist(self) -> np.ndarray:
        return np.asarray(self.accept) + np.asarray(self.reject)


class _Lattice:
    """The band (ln t_l, ln t_u) cut into K equal cells, and the transition
    of one increment with distribution ``d`` from each cell center.
    """

    def __init__(self, d: MixedDensity, config: SprtConfig) -> None:  # noqa
        self.d, self.lo, self.hi = d, config.log_t_l, config.log_t_u
        width = self.hi - self.lo
        self.K = int(ceil(width / config.grid_step)) if width > 0 else 0
        if self.K == 0:
            return
        h = self.h = width / self.K
        K = self.K
        self.centers = self.lo + h * (np.arange(K) + 0.5)
        self.edges = self.lo + h * np.arange(K + 1)
        total = d.continuous_mass
        # continuous increments: exits from each center and cell-to-cell kernel
        self.accept_c = d.continuous_cdf(self.lo - self.centers)
        self.reject_c = total - d.continuous_cdf(self.hi - self.centers)
        offsets = h * (np.arange(-(K - 1), K) + 0.5)
        cdf = d.continuous_cdf(np.concatenate(([offsets[0] - h], offsets)))
        self.kernel = np.diff(cdf)
        # atom increments: exits and a linear split between neighbouring cells
        self.shifts = []
        for a, w in d.atoms:
            pos = self.centers + a
            up, down = pos >= self.hi, pos <= self.lo
            inside = ~(up | down)
            where = np.clip((pos - self.lo) / h - 0.5, 0.0, K - 1.0)
            left = np.floor(where).astype(int)
            frac = where - left
            right = np.minimum(left + 1, K - 1)
            self.shifts.append((w, up, down, inside, left, right, frac))

    def step(self, p: np.ndarray) -> tuple[np.ndarray, float, float]:
        """Advance lattice masses ``p``; return new masses and exit masses."""
        K = self.K
        accept = float(p @ self.accept_c)
        reject = float(p @ self.reject_c)
        new = fftconvolve(p, self.kernel)[K - 1 : 2 * K - 1]
        np.maximum(new, 0.0, out=new)
        for w, up, down, inside, left, right, frac in self.shifts:
            reject += w * float(p[up].sum())
            accept += w * float(p[down].sum())
            mass = w * p[inside]
            new += np.bincount(left[inside], mass * (1 - frac[inside]), K)
            new += np.bincount(right[inside], mass * frac[inside], K)
        return new, accept, reject

    def deposit(self, where: np.ndarray, mass: np.ndarray) -> np.ndarray:
        """Spread point masses at positions ``where`` over the cells."""
        out = np.zeros(self.K)
        if self.K == 0 or where.size == 0:
            return out
        x = np.clip((where - self.lo) / self.h - 0.5, 0.0, self.K - 1.0)
        left = np.floor(x).astype(int)
        frac = x - left
        out += np.bincount(left, mass * (1 - frac), self.K)
        out += np.bincount(np.minimum(left + 1, self.K - 1), mass * frac, self.K)
        return out


def _walk(d: MixedDensity, config: SprtConfig) -> _Walk:
    """Exact stopping-time distribution of the walk with increments ``d``.

    The state is a lattice histogram plus exact point masses reached only
    through atom increments, so paths made of clipped observations hit the
    thresholds exactly.
    """
    if not (isfinite(config.log_t_l) and isfinite(config.log_t_u)):
        raise TruncationExceeded(
            "Infinite thresholds: the walk never stops.", truncated_mass=1.0
        )
    lat = _Lattice(d, config)
    lo, hi, total = config.log_t_l, config.log_t_u, d.continuous_mass
    p = np.zeros(lat.K)
    atoms = {0.0: 1.0}
    out = _Walk()
    for n in range(1, config.max_n + 1):
        accept = reject = 0.0
        new_p = np.zeros(lat.K)
        if lat.K and p.any():
            new_p, accept, reject = lat.step(p)
        new_atoms: dict = {}
        if atoms:
            s = np.array(list(atoms))
            m = np.array(list(atoms.values()))
            accept += float(m @ d.continuous_cdf(lo - s))
            reject += float(m @ (total - d.continuous_cdf(hi - s)))
            if lat.K:
                cells = d.continuous_cdf(lat.edges[None, :] - s[:, None])
                new_p += m @ np.diff(cells, axis=1)
            for a, w in d.atoms:
                for loc, mass in zip(s + a, m * w):
                    if loc >= hi:
                        reject += mass
                    elif loc <= lo:
                        accept += mass
                    else:
                        key = round(float(loc), 12)
                        new_atoms[key] = new_atoms.get(key, 0.0) + mass
        if new_atoms:
            light = [k for k, v in new_atoms.items() if v < PRUNE]
            if len(new_atoms) - len(light) > MAX_ATOM_STATES:
                ranked = sorted(new_atoms, key=new_atoms.get)
                light = ranked[: len(new_atoms) - MAX_ATOM_STATES]
            if light:
                new_p += lat.deposit(
                    np.array(light), np.array([new_atoms.pop(k) for k in light])
                )
        p, atoms = new_p, new_atoms
        out.accept.append(accept)
        out.reject.append(reject)
        before = out.remaining
        out.remaining = float(p.sum()) + sum(atoms.values())
        out.defect += abs(before - accept - reject - out.remaining)
        if out.remaining < NEGLIGIBLE:
            break
    log.debug(
        "walk stopped after %d steps with %.3g undecided", len(out.accept), out.remaining
    )
    return out


def _expected_n(walk: _Walk, max_n: int) -> float:
    dist = walk.stop_dist
    n = np.arange(1, dist.size + 1)
    return float(dist @ n) + max_n * max(walk.remaining, 0.0)


def sprt_exact(d0: MixedDensity, d1: MixedDensity, config: SprtConfig) -> SprtResult:
    """Exact SPRT characteristics from the single-sample distributions of
    ln l_hat under H0 (``d0``) and H1 (``d1``).
    """
    walks = {0: _walk(d0, config), 1: _walk(d1, config)}
    truncated = max(w.remaining for w in walks.values())
    if truncated >= TRUNCATION_LIMIT:
        raise TruncationExceeded(
            f"{truncated:.3g} of the mass is undecided after {config.max_n} steps.",
            truncated_mass=truncated,
            log_t_l=config.log_t_l,
            log_t_u=config.log_t_u,
        )
    return SprtResult(
        alpha=min(sum(walks[0].reject), 1.0),
        beta=min(sum(walks[1].accept), 1.0),
        en0=_expected_n(walks[0], config.max_n),
        en1=_expected_n(walks[1], config.max_n),
        stop_dist={j: w.stop_dist for j, w in walks.items()},
        truncated_mass=truncated,
        mass_defect=max(w.defect for w in walks.values()),
    )


def _simulate(
    llr: PiecewiseLLR, density: Density, hypothesis: int, config: SprtConfig
) -> np.ndarray:
    """Counts [accepts, rejects, truncated, sum N, sum N^2, per-n stops...]."""
    draw = density.sampler()
    lo, hi = config.log_t_l, config.log_t_u

    def run(index: int, length: int) -> np.ndarray:
        rng = stream(config.seed, hypothesis, index)
        s = np.zeros(length)
        stopped = np.zeros(length, dtype=int)
        rejected = np.zeros(length, dtype=bool)
        active = np.arange(length)
        for n in range(1, config.max_n + 1):
            s[active] += llr.log_value(draw(rng, active.size))
            up = s[active] >= hi
            down = s[active] <= lo
            done = up | down
            stopped[active[done]] = n
            rejected[active[up]] = True
            active = active[~done]
            if active.size == 0:
                break
        halted = stopped > 0
        counts = np.bincount(stopped[halted], minlength=config.max_n + 1)[1:]
        n_used = np.where(halted, stopped, config.max_n).astype(float)
        head = [
            np.count_nonzero(halted & ~rejected),
            np.count_nonzero(rejected),
            np.count_nonzero(~halted),
            n_used.sum(),
            (n_used**2).sum(),
        ]
        return np.concatenate((head, counts)).astype(float)

    return np.sum(map_chunks(run, config.mc_runs, config.workers), axis=0)


def sprt_monte_carlo(
    llr: PiecewiseLLR,
    observation_densities: tuple[Density, Density],
    config: SprtConfig,
) -> SprtResult:
    """Simulate ``config.mc_runs`` walks under each hypothesis."""
    runs = config.mc_runs
    totals = {j: _simulate(llr, observation_densities[j], j, config) for j in (0, 1)}
    truncated = max(t[2] for t in totals.values()) / runs
    if truncated >= TRUNCATION_LIMIT:
        raise TruncationExceeded(
            f"{truncated:.3g} of the walks did not stop within {config.max_n} steps.",
            truncated_mass=truncated,
        )
    alpha, beta = totals[0][1] / runs, totals[1][0] / runs

    def mean_and_se(t: np.ndarray) -> tuple[float, float]:
        mean = t[3] / runs
        var = max(t[4] / runs - mean * mean, 0.0)
        return mean, sqrt(var / runs)

    en0, se0 = mean_and_se(totals[0])
    en1, se1 = mean_and_se(totals[1])
    return SprtResult(
        alpha=alpha,
        beta=beta,
        en0=en0,
        en1=en1,
        stop_dist={j: t[5:] / runs for j, t in totals.items()},
        truncated_mass=truncated,
        std_errors={
            "alpha": sqrt(alpha * (1 - alpha) / runs),
            "beta": sqrt(beta * (1 - beta) / runs),
            "en0": se0,
            "en1": se1,
        },
        method="monte-carlo",
    )


def wald_expected_samples(
    llr: PiecewiseLLR,
    density: Density,
    log_threshold: float,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> float:
    """Drift approximation of E[N]: the threshold the walk heads for over
    the mean increment.
    """
    return log_threshold / mean_llr(llr, density, q)


@dataclass(frozen=True)
class ThresholdGrid:
    log_tl: np.ndarray
    log_tu: np.ndarray

    @classmethod
    def from_range(
        cls, tl_min: float = -6.0, tu_max: float = 6.0, step: float = 0.1
    ) -> ThresholdGrid:
        """Points step, 2 step, ... up to the bounds on either side of zero."""
        below = int(round(-tl_min / step))
        above = int(round(tu_max / step))
        return cls(
            np.round(-step * np.arange(1, below + 1), 12),
            np.round(step * np.arange(1, above + 1), 12),
        )

    def pairs(self) -> Iterator[tuple[float, float]]:
        for tl in self.log_tl:
            for tu in self.log_tu:
                yield float(tl), float(tu)

    def __len__(self) -> int:
        return self.log_tl.size * self.log_tu.size


@dataclass(frozen=True)
class ScanPoint:
    """One threshold pair evaluated under the test's own LFDs (``own``) and
    under the alternative observation model (``alt``).
    """

    log_tl: float
    log_tu: float
    own: SprtResult
    alt: SprtResult

    def ratios(self) -> DictStr:
        """alt / own for alpha, beta, E0[N] and E1[N]."""
        out = {}
        for key, mine in self.own.as_row().items():
            theirs = self.alt.as_row()[key]
            out[key] = theirs / mine if mine > 0 else (inf if theirs > 0 else 1.0)
        return out


def family_solution(
    model: NominalModel,
    family: str,
    eps: DictStr,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> BaseSolution:
    """Solve the robust test named by ``family`` (or observation tag)."""
    e0, e1 = eps.get("eps0", 0.0), eps.get("eps1", 0.0)
    c0, c1 = eps.get("eps0_c", 0.0), eps.get("eps1_c", 0.0)
    if family == "m":
        return solve_m_test(model, e0, e1, q)
    if family == "a":
        return solve_a_test(model, e0, e1, q)
    if family == "h":
        return solve_h_test(model, c0, c1, q)
    if family == "c":
        return solve_c_test(model, e0, e1, c0, c1, q)
    if family == "c*":
        return solve_cstar_test(model, e0, e1, c0, c1, q)
    raise ValueError(f"Unknown test family: {family}")


def observation_pair(
    model: NominalModel,
    tag: str,
    eps: DictStr,
    q: Quadrature = DEFAULT_QUADRATURE,
) -> tuple[Density, Density]:
    """The densities generating observations under H0 and H1 for ``tag``."""
    if tag == "n":
        return model.nominal(0), model.nominal(1)
    return family_solution(model, tag, eps, q).densities()


def minimax_scan(
    model: NominalModel,
    test_family: str,
    eps: DictStr,
    grid: ThresholdGrid,
    config: SprtConfig,
    alternative: Optional[str] = None,
    method: str = "exact",
    q: Quadrature = DEFAULT_QUADRATURE,
) -> list[ScanPoint]:
    """Evaluate the sequential ``test_family`` test at every grid pair under
    its own LFDs and under the ``alternative`` observations.
    """
    if test_family not in FAMILIES:
        raise ValueError(f"test_family must be one of {FAMILIES}")
    alternative = alternative or DEFAULT_ALTERNATIVE[test_family]
    llr = family_solution(model, test_family, eps, q).robust_llr()
    own = observation_pair(model, test_family, eps, q)
    alt = observation_pair(model, alternative, eps, q)
    if method == "exact":
        dists = {
            tag: tuple(llr_distribution(llr, d, q=q) for d in pair)
            for tag, pair in (("own", own), ("alt", alt))
        }

        def evaluate(tag: str, cfg: SprtConfig) -> SprtResult:
            return sprt_exact(*dists[tag], cfg)

    elif method == "monte-carlo":
        pairs = {"own": own, "alt": alt}

        def evaluate(tag: str, cfg: SprtConfig) -> SprtResult:
            return sprt_monte_carlo(llr, pairs[tag], replace(cfg, workers=1))

    else:
        raise ValueError(f"Unknown method: {method}")

    def point(thresholds: tuple[float, float]) -> ScanPoint:
        cfg = config.with_thresholds(*thresholds)
        return ScanPoint(*thresholds, evaluate("own", cfg), evaluate("alt", cfg))

    log.info(
        "scanning %d threshold pairs of the %s-test against %s observations",
        len(grid),
        test_family,
        alternative,
    )
    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        return list(pool.map(point, grid.pairs()))


def scan_rows(points: Sequence[ScanPoint], family: str, alternative: str) -> list[Any]:
    """Rows (log_tl, log_tu, alpha, beta, en0, en1, ratio_tag, ratio) for sprt.csv."""
    rows = []
    for p in points:
        for key, ratio in p.ratios().items():
            rows.append(
                (
                    p.log_tl,
                    p.log_tu,
                    p.own.alpha,
                    p.own.beta,
                    p.own.en0,
                    p.own.en1,
                    f"{key}_{family}^{alternative}",
                    ratio,
                )
            )
    return rows
