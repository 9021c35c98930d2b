"""Command-line front end.

    cutin-coverage run --scenario scenarios/table1.scenario --algorithm proposed \\
        --trials 100 --seed 42 --out results/
    cutin-coverage replay --manifest results/summary.json --out replay/

Exit codes: 0 success, 1 numerical failure or I/O error, 2 usage or scenario error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .core import ConfigError
from .engine import run_campaign
from .io import (EMIT_KINDS, RunManifest, ScenarioError, export_outputs, file_sha256, parse_scenario_file,
                 scenario_from_dict, scenario_to_dict)
from .protocol import ALGORITHMS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cutin-coverage", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a campaign of independent trials")
    run.add_argument("--scenario", required=True, type=Path)
    run.add_argument("--algorithm", choices=ALGORITHMS, default="proposed")
    run.add_argument("--seed", type=int, default=0, help="base seed; trial k uses seed+k")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--duration", type=float, default=None, help="override t_L in seconds")
    run.add_argument("--out", type=Path, default=None)
    run.add_argument("--emit", choices=EMIT_KINDS, action="append", default=None,
                     help="outputs to write (repeatable; default: all)")
    run.add_argument("--workers", type=int, default=1, help="processes for trials")
    run.add_argument("--quiet", action="store_true")

    rep = sub.add_parser("replay", help="repeat a run from its manifest")
    rep.add_argument("--manifest", required=True, type=Path, help="summary.json written by `run`")
    rep.add_argument("--out", required=True, type=Path)
    rep.add_argument("--quiet", action="store_true")
    return p


def _seed(value: int) -> int:
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _execute(scenario, manifest: RunManifest, out: Path | None, emit, quiet: bool) -> int:
    t0 = time.perf_counter()
    result = run_campaign(scenario, manifest.algorithm, manifest.n_trials, manifest.base_seed, manifest.workers)
    manifest.seeds = result.seeds
    manifest.runtime_seconds = round(time.perf_counter() - t0, 3)
    summary = result.summary()
    if not quiet:
        print(f"{manifest.algorithm}: {summary['n_trials']} trials, "
              f"fraction_converged = {summary['fraction_converged']:.3f}, "
              f"safe_fraction = {summary['safe_fraction']:.4f}, "
              f"min distance = {min(summary['global_min_distance']):.4f} m")
    if out is not None:
        try:
            export_outputs(result, out, emit, manifest)
        except OSError as e:
            print(f"error: cannot write outputs to {out}: {e}", file=sys.stderr)
            return 1
    if summary["n_failed"]:
        for seed, msg in summary["failures"].items():
            print(f"error: trial seed {seed}: {msg}", file=sys.stderr)
        return 1
    return 0


def cmd_run(args) -> int:
    try:
        _seed(args.seed)
        if args.trials < 1:
            raise argparse.ArgumentTypeError("--trials must be >= 1")
    except argparse.ArgumentTypeError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    try:
        scenario = parse_scenario_file(args.scenario)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.duration is not None:
        try:
            scenario = scenario.with_duration(args.duration)
        except ConfigError as e:
            print(f"usage error: --duration: {e}", file=sys.stderr)
            return 2
    emit = args.emit or list(EMIT_KINDS)
    manifest = RunManifest(
        algorithm=args.algorithm, base_seed=args.seed, n_trials=args.trials, seeds=[],
        scenario=scenario_to_dict(scenario), scenario_path=str(args.scenario),
        scenario_sha256=file_sha256(args.scenario), duration_override=args.duration,
        workers=args.workers, emit=emit)
    return _execute(scenario, manifest, args.out, emit, args.quiet)


def cmd_replay(args) -> int:
    try:
        doc = json.loads(args.manifest.read_text())
        manifest = RunManifest.from_dict(doc["manifest"] if "manifest" in doc else doc)
        scenario = scenario_from_dict(manifest.scenario, args.manifest)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as e:
        print(f"error: unreadable manifest {args.manifest}: {e}", file=sys.stderr)
        return 2
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return _execute(scenario, manifest, args.out, manifest.emit, args.quiet)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return cmd_replay(args)


if __name__ == "__main__":
    sys.exit(main())
