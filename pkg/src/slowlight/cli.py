"""Command line entry point: ``slowlight simulate | predict | verify | compare``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input
(configuration, parameters outside a formula's domain), 3 solver error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import acceptance, adiabatic, revival
from .diagnostics import compare
from .errors import (ConfigError, DomainError, EscapeError, NoMatchedR, RefinementRequired,
                     SlowlightError)
from .model import load_config, validate_config
from .output import RunManifest, read_grid_csv, write_grid_csv, write_json
from .solver import SolverOptions, solve

log = logging.getLogger("slowlight")

OUT_ENV = "SLOWLIGHT_OUT"
DEFAULT_OUT = "slowlight-out"

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT))


def _options(cfg, refine) -> SolverOptions:
    try:
        return SolverOptions(refine=refine, **cfg.solver)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver options {cfg.solver}: {exc}") from None


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    report = validate_config(cfg.pair, cfg.medium, cfg.grid)
    for check in report.failures():
        if check.name == "window_covers_pulses":
            raise ConfigError(f"validation failed: {check.name}: {check.detail}")
        log.warning("applicability check %s not met (%.4g vs %.4g): %s",
                    check.name, check.ratio, check.threshold, check.detail)
    options = _options(cfg, args.refine)
    name = cfg.name or Path(args.config).stem
    out = Path(args.out) if args.out else default_out()
    out.mkdir(parents=True, exist_ok=True)

    manifest = RunManifest(config=cfg.to_dict(), engine=args.engine,
                           options=dataclasses.asdict(options))
    start = time.perf_counter()
    solutions = {}
    summary = {"name": name, "validation": report.to_dict()}
    if args.engine in ("adiabatic", "both"):
        sol = adiabatic.solve_adiabatic(cfg.pair, cfg.medium, cfg.grid)
        solutions["adiabatic"] = sol
        peak, t_peak = sol.exit_peak()
        summary["adiabatic"] = {"mode": sol.tables.mode.value, "S": sol.tables.S,
                                "exit_peak_wp": peak, "exit_peak_x": t_peak}
        manifest.outputs["tables"] = sol.tables.to_csv(out / f"{name}_tables.csv")
    if args.engine in ("numeric", "both"):
        sol = solve(cfg.pair, cfg.medium, cfg.grid, options)
        solutions["numeric"] = sol
        summary["numeric"] = sol.summary()
    for engine, sol in solutions.items():
        manifest.outputs[f"grid_{engine}"] = write_grid_csv(sol.fields, sol.amps,
                                                            out / f"{name}_{engine}.csv")
    if len(solutions) == 2:
        pair = cfg.pair
        rep = compare(solutions["adiabatic"], solutions["numeric"],
                      plateau=(2.0, pair.x0 - 3.0) if pair.custom is None else None)
        summary["comparison"] = rep.to_dict()
        manifest.outputs["comparison"] = write_json(rep.to_dict(), out / f"{name}_comparison.json")
    if not args.no_figures:
        from . import plotting

        for engine, sol in solutions.items():
            manifest.outputs[f"maps_{engine}"] = plotting.plot_maps(
                sol, out / f"{name}_maps_{engine}.png", label=f"({engine})")
        manifest.outputs["exit"] = plotting.plot_exit(solutions, out / f"{name}_exit.png")
        manifest.outputs["coherence"] = plotting.plot_coherence_profile(
            solutions, out / f"{name}_coherence.png")
    manifest.outputs["summary"] = write_json(summary, out / f"{name}_summary.json")
    manifest.wall_time_s = time.perf_counter() - start
    manifest.write(out / f"{name}_manifest.json")
    print(json.dumps({k: str(v) for k, v in manifest.outputs.items()}, indent=2))
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = load_config(args.config)
    pair, medium = cfg.pair, cfg.medium
    if args.matched_r:
        r = revival.matched_R(pair, medium)
        print(json.dumps({"matched_R": r}, indent=2))
        return EXIT_OK
    est = revival.predict(pair, medium)
    print(json.dumps(est.to_dict(), indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    criteria = acceptance.SUITES[args.suite]
    if args.suite == "convergence" and args.coarse:
        rows = [acceptance.at_most(5, f"coarse lattice, change in {k}", v, 1e-5)
                for k, v in acceptance.max_rel_change(
                    acceptance.numeric("weak", coarse=True),
                    acceptance.numeric("weak", refine=2, coarse=True)).items() if k != "max"]
    else:
        rows = acceptance.run(criteria)
    for row in rows:
        print(row.line())
    failed = [r for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_OK if not failed else EXIT_FAILED


def cmd_compare(args) -> int:
    a, b = read_grid_csv(args.first), read_grid_csv(args.second)
    rep = compare(a, b, mask_frac=args.mask)
    print(json.dumps(rep.to_dict(), indent=2))
    if args.out:
        write_json(rep.to_dict(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slowlight", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configuration and write grids, summary and figures")
    p.add_argument("config")
    p.add_argument("--engine", choices=("adiabatic", "numeric", "both"), default="both")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--refine", type=int, choices=(1, 2, 4), default=1)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict", help="closed-form revival estimate, no simulation")
    p.add_argument("config")
    p.add_argument("--matched-r", action="store_true", help="only report the matched recurrence ratio")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("verify", help="run an acceptance suite")
    p.add_argument("--suite", choices=sorted(acceptance.SUITES), required=True)
    p.add_argument("--coarse", action="store_true",
                   help="convergence suite only: check the deliberately coarse lattice instead")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="compare two grid CSV dumps")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--mask", type=float, default=0.05)
    p.add_argument("--out", help="also write the report to this JSON file")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EscapeError as exc:
        hint = f" (minimum R: {exc.r_min:.6g})" if exc.r_min is not None else ""
        print(f"error: {exc}{hint}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, DomainError, NoMatchedR) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RefinementRequired, SlowlightError, FloatingPointError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
