"""Fraction of Table 1 trials fully covered as a function of elapsed time.

One long campaign is run; convergence by time T is read off each trial's
coverage trace, so every horizon comes from the same trajectories.

    python3 scripts/horizon_sweep.py --trials 40 --horizon 20
"""
import argparse
from pathlib import Path

import numpy as np

from cutin_coverage.engine import run_campaign
from cutin_coverage.io import parse_scenario_file

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--horizon", type=float, default=20.0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    sc = parse_scenario_file(SCENARIOS / "table1.scenario").with_duration(args.horizon)
    res = run_campaign(sc, "proposed", args.trials, args.seed, args.workers)
    # same rule as convergence: coverage is read at T itself
    for T in np.arange(5.0, args.horizon + 1e-9, 1.0):
        done = 0
        for t in res.trials:
            k = int(np.searchsorted(t.t, T - 1e-9))
            done += bool(t.p_cov[k] == 1.0)
        print(f"t = {T:5.1f} s  full coverage in {done}/{len(res.trials)} trials")


if __name__ == "__main__":
    main()
