"""Run the Table 1 campaigns and the Table 2 switching run, writing plot-ready data.

    python3 scripts/run_experiments.py --trials 100 --out results/
"""
import argparse
import time
from pathlib import Path

from cutin_coverage.engine import run_campaign
from cutin_coverage.io import RunManifest, export_outputs, file_sha256, parse_scenario_file, scenario_to_dict

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def run(name, algorithm, trials, seed, out, workers):
    path = SCENARIOS / f"{name}.scenario"
    sc = parse_scenario_file(path)
    t0 = time.perf_counter()
    res = run_campaign(sc, algorithm, trials, seed, workers)
    s = res.summary()
    m = RunManifest(algorithm=algorithm, base_seed=seed, n_trials=trials, seeds=res.seeds,
                    scenario=scenario_to_dict(sc), scenario_path=str(path), scenario_sha256=file_sha256(path),
                    workers=workers, runtime_seconds=round(time.perf_counter() - t0, 3))
    export_outputs(res, out / f"{name}_{algorithm}", manifest=m)
    print(f"{name:17s} {algorithm:8s} converged {s['fraction_converged']:.2f}  "
          f"safe {s['safe_fraction']:.4f}  min dist {min(s['global_min_distance']):.3f} m  "
          f"({m.runtime_seconds:.0f} s)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    for alg in ("proposed", "lloyd"):
        run("table1", alg, args.trials, args.seed, args.out, args.workers)
    run("table2_switching", "proposed", 1, 0, args.out, 1)


if __name__ == "__main__":
    main()
