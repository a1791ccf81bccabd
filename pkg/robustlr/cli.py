"""Command line interface: ``robustlr <subcommand> --config run.json``.

Exit status is 0 on success, 1 when a test is infeasible or a numerical
method fails, and 2 for usage and configuration errors.
"""

from __future__ import annotations
import argparse
import json
import logging
from pathlib import Path
import sys
from typing import Optional, Sequence

from robustlr.exceptions import InvalidConfiguration, RobustTestError, UnknownExperiment
from robustlr.orchestrator import ExperimentRunner

log = logging.getLogger(__name__)
SUBCOMMANDS = {
    "lfd": "lfd-plot",
    "limits": "limit-curves",
    "rate": "rate-curves",
    "fss": "fss-sweep",
    "sprt": "sprt-scan",
    "experiment": None,  # whatever the configuration says
}
LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustlr",
        description="Minimax robust likelihood ratio tests: LFDs, error "
        "probabilities, rate functions and sequential tests.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name, experiment in SUBCOMMANDS.items():
        p = sub.add_parser(
            name,
            help=f"run the {experiment} experiment"
            if experiment
            else "run the experiment named in the configuration",
        )
        p.add_argument("--config", type=Path, help="JSON configuration file")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="root random seed (overrides seed)")
        p.add_argument(
            "-v", "--verbose", action="count", default=0, help="-v info, -vv debug"
        )
    return parser


def _report(error: RobustTestError, out: Optional[Path]) -> None:
    record = json.dumps(error.to_record(), sort_keys=True, indent=2)
    print(record, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(record + "\n")
        except OSError as e:
            log.warning("Could not write error.json: %s", e)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=LEVELS[min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        runner = ExperimentRunner.from_file(
            args.config,
            experiment=SUBCOMMANDS[args.command],
            output_dir=args.out,
            seed=args.seed,
        )
    except (InvalidConfiguration, UnknownExperiment) as e:
        for line in getattr(e, "errors", [str(e)]):
            print(f"robustlr: {line}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ImportError) as e:
        print(f"robustlr: {e}", file=sys.stderr)
        return 2
    except RobustTestError as e:
        _report(e, Path(args.out) if args.out else None)
        return 1
    try:
        runner.run()
    except (UnknownExperiment, ValueError) as e:
        print(f"robustlr: {e}", file=sys.stderr)
        return 2
    except RobustTestError as e:
        _report(e, runner.output_dir)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
