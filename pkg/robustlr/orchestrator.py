"""The *ExperimentRunner* turns a validated configuration into result files."""

from __future__ import annotations  # allows forward references; python 3.7+
import csv
from hashlib import sha256
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from bag.settings import resolve_path
from bag.text import strip_lower_preparer, strip_preparer
import colander as c
from kerno.typing import DictStr
import numpy as np
import reg

from robustlr.exceptions import InvalidConfiguration, UnknownExperiment
from robustlr.fixed_sample import FixedSampleTest, empirical_pe
from robustlr.lfd import BaseSolution, solve_a_test, solve_m_test
from robustlr.lfd.composite import contaminate
from robustlr.limits import (
    bhattacharyya_distance,
    chernoff_distance,
    h_limit_curve,
    m_equal_limit,
    m_limit_curve,
)
from robustlr.llr import admissible_interval, rate_curve
from robustlr.model import FAMILY_PARAMETERS, RULES, NominalModel, Quadrature
from robustlr.sequential import (
    DEFAULT_ALTERNATIVE,
    OBSERVATIONS,
    SprtConfig,
    ThresholdGrid,
    minimax_scan,
    observation_pair,
    scan_rows,
)

log = logging.getLogger(__name__)
EXPERIMENTS = (
    "lfd-plot",
    "llr-ratio",
    "limit-curves",
    "rate-curves",
    "fss-sweep",
    "sprt-scan",
)
OPTIONAL_SECTIONS = ("eps", "quadrature", "monte_carlo", "sprt", "sweep", "rates", "plot")


def _fraction(node: c.SchemaNode, value: float) -> None:
    if not 0 <= value < 1:
        raise c.Invalid(node, f"{value} is not in [0, 1)")


def _positive(node: c.SchemaNode, value: float) -> None:
    if not value > 0:
        raise c.Invalid(node, f"{value} is not positive")


def _validate_nominal(node: c.SchemaNode, value: DictStr) -> None:
    wanted = FAMILY_PARAMETERS[value["family"]]
    missing = [p for p in wanted if p not in value]
    if missing:
        raise c.Invalid(
            node, f"{value['family']} needs the parameters {', '.join(missing)}"
        )
    extra = sorted(set(value) - set(wanted) - {"family"})
    if extra:
        raise c.Invalid(node, f"{value['family']} takes no {', '.join(extra)}")


class NominalSchema(c.Schema):
    family = c.SchemaNode(
        c.Str(), preparer=strip_lower_preparer, validator=c.OneOf(tuple(FAMILY_PARAMETERS))
    )
    mean = c.SchemaNode(c.Float(), missing=c.drop)
    var = c.SchemaNode(c.Float(), validator=_positive, missing=c.drop)
    loc = c.SchemaNode(c.Float(), missing=c.drop)
    scale = c.SchemaNode(c.Float(), validator=_positive, missing=c.drop)


class NominalsSchema(c.Schema):
    f0 = NominalSchema(validator=_validate_nominal)
    f1 = NominalSchema(validator=_validate_nominal)


class EpsSchema(c.Schema):
    """KL radii (eps0, eps1) and contamination ratios (eps0_c, eps1_c)."""

    eps0 = c.SchemaNode(c.Float(), validator=_fraction, missing=0.0)
    eps1 = c.SchemaNode(c.Float(), validator=_fraction, missing=0.0)
    eps0_c = c.SchemaNode(c.Float(), validator=_fraction, missing=0.0)
    eps1_c = c.SchemaNode(c.Float(), validator=_fraction, missing=0.0)


class QuadratureSchema(c.Schema):
    node_count = c.SchemaNode(c.Int(), validator=c.Range(min=64), missing=4096)
    rule = c.SchemaNode(
        c.Str(),
        preparer=strip_lower_preparer,
        validator=c.OneOf(RULES),
        missing="gauss-legendre",
    )
    abs_tol = c.SchemaNode(c.Float(), validator=_positive, missing=1e-10)
    rel_tol = c.SchemaNode(c.Float(), validator=_positive, missing=1e-10)


class MonteCarloSchema(c.Schema):
    runs = c.SchemaNode(c.Int(), validator=c.Range(min=1000), missing=100_000)
    workers = c.SchemaNode(c.Int(), validator=c.Range(min=1), missing=1)


class SweepSchema(c.Schema):
    """``eps_max`` defaults to 95% of the equal-radius limit."""

    points = c.SchemaNode(c.Int(), validator=c.Range(min=2), missing=26)
    eps_max = c.SchemaNode(c.Float(), validator=_fraction, missing=None)
    samples = c.SchemaNode(c.Int(), validator=c.Range(min=1), missing=1)


class RatesSchema(c.Schema):
    sources = c.SchemaNode(
        c.List(),
        validator=c.ContainsOnly(OBSERVATIONS),
        missing=list(OBSERVATIONS),
    )
    points = c.SchemaNode(c.Int(), validator=c.Range(min=3), missing=50)


class PlotSchema(c.Schema):
    points = c.SchemaNode(c.Int(), validator=c.Range(min=11), missing=801)


def validate_config(raw: str) -> DictStr:
    """Parse JSON text into a validated configuration with defaults filled.

    Every problem is reported, each prefixed by the line it was found on.
    """
    text = raw if raw.strip() else "{}"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidConfiguration([f"line {e.lineno}: {e.msg}"]) from e
    if not isinstance(data, dict):
        raise InvalidConfiguration(["line 1: the configuration must be a JSON object"])
    for name in OPTIONAL_SECTIONS:
        data.setdefault(name, {})
    try:
        return ExperimentRunner.Config().deserialize(data)
    except c.Invalid as e:
        lines = raw.splitlines()
        errors = [
            _anchored(lines, path, message) for path, message in sorted(e.asdict().items())
        ]
        raise InvalidConfiguration(errors) from e


def _anchored(lines: Sequence[str], path: str, message: str) -> str:
    line, start = 1, 0
    for key in path.split("."):
        if key.isdigit():
            continue
        for i in range(start, len(lines)):
            if f'"{key}"' in lines[i]:
                line, start = i + 1, i
                break
        else:
            break
    if message == "Required":
        return f"line {line}: {path} required"
    return f"line {line}: {path}: {message}"


def echo_config(config: DictStr) -> str:
    """Canonical JSON of a validated configuration."""
    return json.dumps(config, sort_keys=True, indent=2) + "\n"


def config_hash(config: DictStr) -> str:
    return sha256(echo_config(config).encode("utf-8")).hexdigest()


def output_path(spec: str) -> Path:
    """``package:dir`` resource specs resolve inside the package;
    anything else is a plain filesystem path.
    """
    if ":" in spec and not Path(spec).is_absolute():
        return Path(resolve_path(spec))
    return Path(spec)


class ExperimentRunner:
    """Builds the nominal model from configuration and writes the files of
    one experiment, plus ``manifest.json`` describing the run.
    """

    class Config(c.Schema):
        """Validated configuration of one run.

        - ``nominals``: descriptors ``f0`` and ``f1``, e.g.
          ``{"family": "gaussian", "mean": -1, "var": 1}``.
        - ``eps``: robustness parameters, each in [0, 1).
        - ``experiment``: one of the registered experiment identifiers.
        - ``output_dir``: where files go; ``package:dir`` resource specs work.
        - ``seed``: root of every random stream.
        """

        nominals = NominalsSchema()
        eps = EpsSchema()
        experiment = c.SchemaNode(
            c.Str(),
            preparer=strip_lower_preparer,
            validator=c.OneOf(EXPERIMENTS),
            missing="lfd-plot",
        )
        output_dir = c.SchemaNode(c.Str(), preparer=strip_preparer, missing="out")
        seed = c.SchemaNode(c.Int(), validator=c.Range(min=0), missing=0)
        quadrature = QuadratureSchema()
        monte_carlo = MonteCarloSchema()
        sprt = SprtConfig.Config()
        sweep = SweepSchema()
        rates = RatesSchema()
        plot = PlotSchema()

    def __init__(self, config: DictStr) -> None:
        """Instantiate from a validated configuration dictionary."""
        self.config = config
        self.hash = config_hash(config)
        self.eps: DictStr = config["eps"]
        self.seed: int = config["seed"]
        self.q = Quadrature(**config["quadrature"])
        self.model = NominalModel.from_families(
            config["nominals"]["f0"], config["nominals"]["f1"]
        )
        self.output_dir = output_path(config["output_dir"])
        self.files: list[str] = []
        self.residuals: DictStr = {}
        self.summary: DictStr = {}

    @classmethod
    def instantiate_validating(cls, raw: str) -> ExperimentRunner:
        """Validate JSON text and return the runner."""
        return cls(validate_config(raw))

    @classmethod
    def from_file(cls, path: Path, **overrides: Any) -> ExperimentRunner:
        """Read a configuration file; ``overrides`` replace top-level keys."""
        raw = Path(path).read_text(encoding="utf-8") if path else ""
        if not any(v is not None for v in overrides.values()):
            return cls.instantiate_validating(raw)
        config = validate_config(raw)
        config.update({k: v for k, v in overrides.items() if v is not None})
        return cls(validate_config(echo_config(config)))

    def run(self) -> DictStr:
        """Perform the configured experiment and write the manifest."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        experiment = self.config["experiment"]
        log.info("running %s into %s", experiment, self.output_dir)
        perform(experiment, self)
        manifest = {
            "config": self.config,
            "config_hash": self.hash,
            "experiment": experiment,
            "files": self.files,
            "residuals": self.residuals,
            "seed": self.seed,
            "summary": self.summary,
        }
        self.write_json("manifest.json", manifest)
        return manifest

    def record(self, tag: str, solution: BaseSolution) -> BaseSolution:
        """Keep the solver residuals of ``solution`` for the manifest."""
        residuals = getattr(solution, "residuals", None)
        if residuals is not None:
            self.residuals[tag] = [float(r) for r in residuals]
        return solution

    def write_csv(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        path = self.output_dir / name
        with open(path, "w", newline="", encoding="utf-8") as stream:
            stream.write(f"# config-hash: {self.hash}\n")
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        self.files.append(name)
        log.info("wrote %s", path)
        return path

    def write_json(self, name: str, content: DictStr) -> Path:
        path = self.output_dir / name
        path.write_text(json.dumps(content, sort_keys=True, indent=2) + "\n")
        log.info("wrote %s", path)
        return path

    def grid(self, points: Optional[int] = None) -> np.ndarray:
        lo, hi = self.model.support
        return np.linspace(lo, hi, points or self.config["plot"]["points"])

    def composite(self) -> tuple[BaseSolution, BaseSolution]:
        """The inner m-test solution and the contaminated one around it.

        Without contamination both are the same object.
        """
        eps = self.eps
        inner = self.record("m", solve_m_test(self.model, eps["eps0"], eps["eps1"], self.q))
        if eps["eps0_c"] == 0 and eps["eps1_c"] == 0:
            return inner, inner
        return inner, self.record("c", contaminate(inner, eps["eps0_c"], eps["eps1_c"]))


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return value


@reg.dispatch(  # Dispatch on the value of *experiment*.
    reg.match_key("experiment", lambda experiment, runner: experiment)
)
def perform(experiment: str, runner: ExperimentRunner) -> None:
    """Write the result files of ``experiment``.

    Register more experiments with
    ``perform.register(my_function, experiment="my-id")``.
    """
    raise UnknownExperiment(f"Unknown experiment: {experiment}", experiment=experiment)


def lfd_plot(experiment: str, runner: ExperimentRunner) -> None:
    """Nominal densities, m-test LFDs and composite LFDs on a grid of y."""
    model = runner.model
    inner, outer = runner.composite()
    y = runner.grid()
    columns = [
        np.exp(model.f0_logpdf(y)),
        np.exp(model.f1_logpdf(y)),
        inner.density(0).pdf(y),
        inner.density(1).pdf(y),
        outer.density(0).pdf(y),
        outer.density(1).pdf(y),
    ]
    runner.write_csv(
        "lfd.csv",
        ("y", "f0", "f1", "g0_hat", "g1_hat", "q0_hat", "q1_hat"),
        zip(y, *columns),
    )


def llr_ratio(experiment: str, runner: ExperimentRunner) -> None:
    """The nominal and robust likelihood ratios and their quotient."""
    _, outer = runner.composite()
    y = runner.grid()
    log_l = runner.model.log_lr(y)
    log_hat = outer.robust_llr().log_value(y)
    runner.write_csv(
        "llr.csv",
        ("y", "l", "l_hat", "ratio"),
        zip(y, np.exp(log_l), np.exp(log_hat), np.exp(log_hat - log_l)),
    )


def limit_curves(experiment: str, runner: ExperimentRunner) -> None:
    model, q = runner.model, runner.q
    curve = m_limit_curve(model, 201, q)
    runner.write_csv(
        "limits.csv", ("u", "eps0", "eps1"), zip(curve.u, curve.eps0, curve.eps1)
    )
    runner.write_csv("h_limits.csv", ("eps0_c", "eps1_c"), h_limit_curve(model, 101, q))
    runner.summary.update(
        equal_eps=curve.equal_eps(),
        m_equal_limit=m_equal_limit(model, q),
        chernoff=chernoff_distance(model, q),
        bhattacharyya=bhattacharyya_distance(model, q),
    )


def rate_curves(experiment: str, runner: ExperimentRunner) -> None:
    """Rate functions of the composite test under several observation models."""
    model, q, eps = runner.model, runner.q, runner.eps
    _, outer = runner.composite()
    llr = outer.robust_llr()
    count = runner.config["rates"]["points"]
    rows = []
    for tag in runner.config["rates"]["sources"]:
        q0, q1 = observation_pair(model, tag, eps, q)
        lo, hi = admissible_interval(llr, q0, q1, q)
        ts = np.linspace(lo, hi, count + 2)[1:-1]
        for p in rate_curve(llr, q0, q1, ts, q):
            rows.append((p.t, p.I0, p.I1, tag))
    runner.write_csv("rates.csv", ("t", "I0", "I1", "source_tag"), rows)


def fss_sweep(experiment: str, runner: ExperimentRunner) -> None:
    """Error probability of the m-test over a grid of equal radii, observing
    either its own LFDs or those of the a-test.
    """
    model, q = runner.model, runner.q
    sweep, mc = runner.config["sweep"], runner.config["monte_carlo"]
    top = sweep["eps_max"] or 0.95 * m_equal_limit(model, q)
    rows = []
    for i, eps in enumerate(np.linspace(0.0, top, sweep["points"])):
        eps = float(eps)
        m_sol = solve_m_test(model, eps, eps, q)
        test = FixedSampleTest.for_solution(m_sol, sweep["samples"])
        observed = {"m": m_sol, "a": solve_a_test(model, eps, eps, q)}
        for tag, solution in observed.items():
            pe, pe0, pe1 = empirical_pe(
                test,
                *solution.densities(),
                runs=mc["runs"],
                seed=runner.seed + 2 * i,
                workers=mc["workers"],
            )
            rows.append((eps, pe, pe0, pe1, tag))
    runner.summary["fss_points"] = len(rows)
    runner.write_csv("fss.csv", ("eps", "pe", "pe0", "pe1", "observation_tag"), rows)


def sprt_scan(experiment: str, runner: ExperimentRunner) -> None:
    """Minimax diagnostics of a sequential test over a threshold grid."""
    settings = runner.config["sprt"]
    family = settings["family"]
    alternative = settings["alternative"] or DEFAULT_ALTERNATIVE[family]
    grid = ThresholdGrid.from_range(
        settings["log_tl_min"], settings["log_tu_max"], settings["step"]
    )
    config = SprtConfig(
        log_t_l=-settings["step"],
        log_t_u=settings["step"],
        max_n=settings["max_n"],
        mc_runs=settings["mc_runs"],
        seed=runner.seed,
        grid_step=settings["grid_step"],
        workers=runner.config["monte_carlo"]["workers"],
    )
    points = minimax_scan(
        runner.model,
        family,
        runner.eps,
        grid,
        config,
        alternative,
        settings["method"],
        runner.q,
    )
    runner.write_csv(
        "sprt.csv",
        ("log_tl", "log_tu", "alpha", "beta", "en0", "en1", "ratio_tag", "ratio"),
        scan_rows(points, family, alternative),
    )


perform.register(lfd_plot, experiment="lfd-plot")
perform.register(llr_ratio, experiment="llr-ratio")
perform.register(limit_curves, experiment="limit-curves")
perform.register(rate_curves, experiment="rate-curves")
perform.register(fss_sweep, experiment="fss-sweep")
perform.register(sprt_scan, experiment="sprt-scan")


def run_experiment(config: DictStr) -> DictStr:
    """Run a validated configuration; return the manifest."""
    return ExperimentRunner(config).run()
