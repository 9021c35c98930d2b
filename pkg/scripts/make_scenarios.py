"""Regenerate the shipped scenario files under scenarios/."""
from pathlib import Path

from cutin_coverage.io import write_scenario
from cutin_coverage.scenarios import Scenario, switching_scenario, table1_config, table2_config

OUT = Path(__file__).resolve().parents[1] / "scenarios"


def main():
    OUT.mkdir(exist_ok=True)
    write_scenario(Scenario(table1_config(), name="table1"), OUT / "table1.scenario")
    # 1.25 m cells keep random targets farther apart than the 1.0 m repulsion radius
    write_scenario(Scenario(table2_config(), grid=(8, 4), name="table2"), OUT / "table2.scenario")
    write_scenario(switching_scenario(cycles=3), OUT / "table2_switching.scenario")
    for p in sorted(OUT.glob("*.scenario")):
        print(p)


if __name__ == "__main__":
    main()
