"""Command-line entry point.

Subcommands:
  validate            run the invariant self-checks (exit 1 on any failure)
  advise              print admissible chirp values and the security-risk range
  run <spec-file>     run an experiment described by a key = value file
  sweep-fig5a|fig5b|fig6|fig7
                      run a built-in preset experiment

Exit codes: 0 success, 1 invariant/acceptance failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .design import admissible_c1, security_risk_range
from .errors import ConfigError
from .experiment import (
    parse_spec_file,
    preset_specs,
    run_experiment,
    write_csv,
    write_gnuplot_script,
)
from .validate import run_all_checks

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory for CSV and plot script")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel worker processes for sweep points")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afdm",
        description="AFDM waveform simulation and security experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", help="run the invariant self-check suites")

    advise = sub.add_parser("advise", help="print parameter-design guidance")
    advise.add_argument("--n", type=int, required=True)
    advise.add_argument("--alpha-c-max", type=int, required=True,
                        help="actual maximum |Doppler| bin in the channel")
    advise.add_argument("--alpha-max", type=int, required=True,
                        help="preset Doppler guard bound")
    advise.add_argument("--l-c-max", type=int, required=True,
                        help="actual maximum delay in the channel")
    advise.add_argument("--l-max", type=int, required=True,
                        help="preset delay guard bound")

    run = sub.add_parser("run", help="run an experiment from a spec file")
    run.add_argument("spec_file", type=Path)
    _add_run_options(run)

    for preset in ("fig5a", "fig5b", "fig6", "fig7"):
        sweep = sub.add_parser(f"sweep-{preset}", help=f"run the {preset} preset")
        sweep.add_argument("--seed", type=int, default=1)
        sweep.add_argument("--trials", type=int, default=200)
        _add_run_options(sweep)

    return parser


def _cmd_validate() -> int:
    results = run_all_checks()
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _cmd_advise(args: argparse.Namespace) -> int:
    c1_set = admissible_c1(args.n, args.alpha_c_max, args.alpha_max)
    risk = security_risk_range(args.l_c_max, args.l_max)
    if c1_set.values:
        rendered = ", ".join(str(v) for v in c1_set.values)
        print(f"admissible c1 values ({len(c1_set.values)}): {rendered}")
        print(f"admissible alpha_c1 integers: {c1_set.alpha_lo}..{c1_set.alpha_hi}")
    else:
        print(
            "no admissible c1: channel Doppler bound exceeds the preset guard"
        )
    print("c2: any value in [0, 1); integer shifts leave the waveform unchanged")
    print(
        f"security-risk range for estimation depth: [{risk.lo}, {risk.hi}]"
        f" (width {risk.width}{', optimal' if risk.optimal else ''})"
    )
    if not risk.optimal:
        print(
            f"advice: lower the preset delay guard to {risk.lo} to make the "
            "range a single point"
        )
    return EXIT_OK


def _run_specs(specs, name: str, out_dir: Path, jobs: int) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(specs, jobs=jobs, progress=True)
    csv_path = out_dir / f"{name}.csv"
    write_csv(records, csv_path)
    write_gnuplot_script(csv_path.name, records, out_dir / f"{name}.gp")
    for rec in records:
        print(
            f"{rec.scenario_id} [{rec.role}] {rec.sweep_param}="
            f"{rec.sweep_value}: ber={rec.ber:.4g} "
            f"({rec.bit_errors}/{rec.bits_total} bits)"
        )
    print(f"wrote {csv_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate()
        if args.command == "advise":
            return _cmd_advise(args)
        if args.command == "run":
            spec = parse_spec_file(args.spec_file)
            return _run_specs(spec, spec.scenario_id, args.out, args.jobs)
        preset = args.command.removeprefix("sweep-")
        specs = preset_specs(preset, master_seed=args.seed, trials=args.trials)
        return _run_specs(specs, preset, args.out, args.jobs)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
