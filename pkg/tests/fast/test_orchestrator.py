"""Fast unit tests for configuration handling and the experiment runner."""

import csv
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import TestCase
import warnings

import numpy as np
from scipy.integrate import trapezoid

import robustlr
from robustlr.exceptions import (
    InvalidConfiguration,
    NonMonotoneLikelihoodRatio,
    UnknownExperiment,
)
from robustlr.orchestrator import (
    ExperimentRunner,
    config_hash,
    echo_config,
    output_path,
    perform,
    run_experiment,
    validate_config,
)
from .. import MEAN_SHIFTED, config_text


def read_csv(path: Path) -> tuple[str, list[str], list[list[str]]]:
    """Return the hash comment, the header and the rows."""
    with open(path, newline="", encoding="utf-8") as stream:
        comment = stream.readline().rstrip("\n")
        reader = csv.reader(stream)
        header = next(reader)
        rows = list(reader)
    return comment, header, rows


def line_of(text: str, key: str) -> int:
    return next(i for i, line in enumerate(text.splitlines(), 1) if f'"{key}"' in line)


class TestOutputPath(TestCase):  # noqa
    def test_plain_paths(self):  # noqa
        assert output_path("out") == Path("out")
        assert output_path("results/run-1") == Path("results/run-1")
        assert output_path("/tmp/a:b") == Path("/tmp/a:b")

    def test_package_resource_spec(self):  # noqa
        assert output_path("robustlr:runs") == Path(robustlr.__path__[0], "runs")


class TestValidateConfig(TestCase):  # noqa
    def test_empty_file_needs_nominals(self):  # noqa
        with self.assertRaises(InvalidConfiguration) as cm:
            validate_config("")
        assert cm.exception.errors == ["line 1: nominals required"]

    def test_bad_json(self):  # noqa
        with self.assertRaises(InvalidConfiguration) as cm:
            validate_config('{\n  "seed": ,\n  "experiment": "lfd-plot"\n}')
        error, = cm.exception.errors
        assert error.startswith("line 2: ")
        with self.assertRaises(InvalidConfiguration):
            validate_config("[1, 2]")

    def test_defaults_are_filled(self):  # noqa
        config = validate_config(config_text())
        assert config["seed"] == 0
        assert config["output_dir"] == "out"
        assert config["quadrature"]["rule"] == "gauss-legendre"
        assert config["monte_carlo"] == {"runs": 100_000, "workers": 1}
        assert config["sprt"]["family"] == "m"
        assert config["sweep"]["eps_max"] is None
        assert config["rates"]["sources"] == ["n", "m", "a", "h", "c", "c*"]
        assert config["nominals"]["f1"] == {"family": "gaussian", "mean": 1.0, "var": 4.0}

    def test_every_error_is_reported_on_its_line(self):  # noqa
        text = config_text(
            experiment="nope",
            nominals=({"family": "gaussian", "mean": 0.0}, MEAN_SHIFTED[1]),
        ).replace('"eps0": 0.15', '"eps0": 1.5')
        with self.assertRaises(InvalidConfiguration) as cm:
            validate_config(text)
        errors = cm.exception.errors
        assert len(errors) == 3
        assert f"line {line_of(text, 'eps0')}: eps.eps0: 1.5 is not in [0, 1)" in errors
        assert f"line {line_of(text, 'experiment')}: experiment: " in " ".join(errors)
        assert any(e.endswith("gaussian needs the parameters var") for e in errors)

    def test_family_parameters_are_checked(self):  # noqa
        extra = dict(MEAN_SHIFTED[0], scale=1.0)
        with self.assertRaises(InvalidConfiguration) as cm:
            validate_config(config_text(nominals=(extra, MEAN_SHIFTED[1])))
        assert cm.exception.errors[0].endswith("gaussian takes no scale")

    def test_echo_is_a_fixed_point(self):  # noqa
        config = validate_config(config_text(seed=4))
        echoed = echo_config(config)
        assert validate_config(echoed) == config
        assert echo_config(validate_config(echoed)) == echoed
        assert config_hash(config) == config_hash(validate_config(echoed))
        assert len(config_hash(config)) == 64


class TestExperimentRunner(TestCase):  # noqa
    def setUp(self):  # noqa
        self.tmp = TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):  # noqa
        self.tmp.cleanup()

    def _make_one(self, out="run", **kw):
        kw.setdefault("nominals", MEAN_SHIFTED)
        return ExperimentRunner.instantiate_validating(
            config_text(output_dir=str(self.out / out), **kw)
        )

    def test_lfd_plot(self):  # noqa
        runner = self._make_one(nominals=MEAN_SHIFTED)
        manifest = runner.run()
        assert manifest["files"] == ["lfd.csv"]
        assert set(manifest["residuals"]) == {"m", "c"}
        comment, header, rows = read_csv(runner.output_dir / "lfd.csv")
        assert comment == f"# config-hash: {runner.hash}"
        assert header == ["y", "f0", "f1", "g0_hat", "g1_hat", "q0_hat", "q1_hat"]
        assert len(rows) == 801
        table = np.array(rows, dtype=float)
        for column in range(1, 7):
            assert abs(trapezoid(table[:, column], table[:, 0]) - 1) < 1e-3
        assert (runner.output_dir / "manifest.json").exists()

    def test_output_is_reproducible(self):  # noqa
        first = self._make_one("again")
        first.run()
        before = (first.output_dir / "lfd.csv").read_bytes()
        self._make_one("again").run()
        assert (first.output_dir / "lfd.csv").read_bytes() == before

    def test_non_monotone_pair_still_runs(self):  # noqa
        runner = self._make_one(nominals=(
            {"family": "gaussian", "mean": -1.0, "var": 1.0},
            {"family": "gaussian", "mean": 1.0, "var": 4.0},
        ))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            runner.run()
        assert any(issubclass(w.category, NonMonotoneLikelihoodRatio) for w in caught)

    def test_llr_ratio(self):  # noqa
        runner = self._make_one(experiment="llr-ratio", plot={"points": 21})
        runner.run()
        _, header, rows = read_csv(runner.output_dir / "llr.csv")
        assert header == ["y", "l", "l_hat", "ratio"]
        table = np.array(rows, dtype=float)
        assert np.allclose(table[:, 3], table[:, 2] / table[:, 1], rtol=1e-9)

    def test_limit_curves(self):  # noqa
        runner = self._make_one(experiment="limit-curves")
        manifest = runner.run()
        assert manifest["files"] == ["limits.csv", "h_limits.csv"]
        summary = manifest["summary"]
        assert abs(summary["m_equal_limit"] - 0.5) < 1e-8
        assert abs(summary["equal_eps"] - 0.5) < 1e-3
        assert abs(summary["chernoff"] - 0.5) < 1e-8
        _, header, rows = read_csv(runner.output_dir / "limits.csv")
        assert header == ["u", "eps0", "eps1"] and len(rows) == 201

    def test_rate_curves(self):  # noqa
        runner = self._make_one(
            experiment="rate-curves", rates={"sources": ["n", "h"], "points": 5}
        )
        runner.run()
        _, header, rows = read_csv(runner.output_dir / "rates.csv")
        assert header == ["t", "I0", "I1", "source_tag"]
        assert [r[3] for r in rows] == ["n"] * 5 + ["h"] * 5
        assert all(float(r[1]) >= 0 and float(r[2]) >= 0 for r in rows)

    def test_fss_sweep(self):  # noqa
        runner = self._make_one(
            experiment="fss-sweep",
            sweep={"points": 2, "eps_max": 0.1},
            monte_carlo={"runs": 2000},
        )
        manifest = runner.run()
        assert manifest["summary"]["fss_points"] == 4
        _, header, rows = read_csv(runner.output_dir / "fss.csv")
        assert header == ["eps", "pe", "pe0", "pe1", "observation_tag"]
        assert [(r[0], r[4]) for r in rows] == [
            ("0", "m"), ("0", "a"), ("0.1", "m"), ("0.1", "a"),
        ]

    def test_from_file_with_overrides(self):  # noqa
        path = self.out / "run.json"
        path.write_text(config_text(nominals=MEAN_SHIFTED))
        runner = ExperimentRunner.from_file(
            path, experiment="llr-ratio", output_dir=str(self.out / "x"), seed=None
        )
        assert runner.config["experiment"] == "llr-ratio"
        assert runner.config["seed"] == 0
        assert runner.output_dir.name == "x"
        plain = ExperimentRunner.from_file(path)
        assert plain.config["output_dir"] == "out"
        assert plain.output_dir == Path("out")

    def test_unknown_experiment(self):  # noqa
        with self.assertRaises(UnknownExperiment):
            perform("not-registered", self._make_one())

    def test_run_experiment(self):  # noqa
        config = validate_config(
            config_text(
                nominals=MEAN_SHIFTED,
                experiment="llr-ratio",
                output_dir=str(self.out / "direct"),
                plot={"points": 11},
            )
        )
        manifest = run_experiment(config)
        assert manifest["config_hash"] == config_hash(config)
        assert manifest["seed"] == 0
