import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cutin_coverage.core import Region, SensorFootprint, TargetSet, WorldConfig
from cutin_coverage.engine import run_campaign, run_trial
from cutin_coverage.io import (METRICS_COLUMNS, tomllib, TRAJECTORY_COLUMNS, RunManifest, ScenarioError, dumps_scenario,
                               export_outputs, metrics_csv, parse_scenario_file, scenario_from_dict, scenario_to_dict,
                               trajectory_csv, write_scenario)
from cutin_coverage.scenarios import (FixedDuration, OnFullCoverage, Scenario, generate_random_scenario,
                                      switching_scenario, table1_config, table2_config)

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def test_table1_file():
    sc = parse_scenario_file(SCENARIOS / "table1.scenario")
    c = sc.config
    assert (c.n_agents, c.n_targets, c.dt, c.v_max, c.d_c, c.d_k, c.K_d, c.K_s) == \
        (100, 100, 0.02, 5.0, 10.0, 0.55, 800.0, 0.35)
    assert c.footprint == SensorFootprint(1.0, 1.0) and c.collision_distance == 0.3
    assert c.region == Region(-10, 10, -10, 10) and c.t_last == 10.0
    assert sc.grid == (20, 20) and not sc.is_realized
    assert c == table1_config()


def test_table2_file():
    sc = parse_scenario_file(SCENARIOS / "table2.scenario")
    c = sc.config
    assert (c.n_agents, c.n_targets, c.v_max, c.d_c, c.d_k, c.K_d, c.K_s) == (8, 8, 1.5, 5.0, 1.0, 50.0, 0.35)
    assert (c.region.width, c.region.height) == (10.0, 5.0)
    assert c == table2_config()


def test_switching_file():
    sc = parse_scenario_file(SCENARIOS / "table2_switching.scenario")
    assert sc.n_phases == 12 and sc.phase_trigger == OnFullCoverage(2.0)
    assert sc == switching_scenario()


@pytest.mark.parametrize("name", ["table1", "table2", "table2_switching"])
def test_shipped_files_round_trip(name, tmp_path):
    sc = parse_scenario_file(SCENARIOS / f"{name}.scenario")
    out = tmp_path / "x.scenario"
    write_scenario(sc, out)
    assert parse_scenario_file(out) == sc
    assert out.read_text() == (SCENARIOS / f"{name}.scenario").read_text()


configs = st.builds(
    lambda w, h, n, dt, vmax, dc, dk, kd, ks, tl: WorldConfig(
        Region(-w, w, -h, h), n, n, dt=dt, v_max=vmax, d_c=dc, d_k=dk, K_d=kd, K_s=ks,
        collision_distance=dk / 3, t_last=tl),
    st.floats(2, 50), st.floats(2, 50), st.integers(1, 20), st.floats(1e-3, 0.1), st.floats(0.1, 10),
    st.floats(0.5, 30), st.floats(0.1, 2), st.floats(0, 1000), st.floats(0.01, 1), st.floats(0.1, 60))


@settings(max_examples=50)
@given(configs, st.integers(0, 1000), st.booleans())
def test_generated_round_trip(cfg, seed, realize):
    sc = Scenario(cfg)
    if realize:
        sc = sc.realize(seed)
    assert scenario_from_dict(scenario_to_dict(sc)) == sc
    assert scenario_from_dict(tomllib.loads(dumps_scenario(sc))) == sc


def write(tmp_path, text):
    p = tmp_path / "bad.scenario"
    p.write_text(text)
    return p


def test_region_error_names_region(tmp_path):
    text = (SCENARIOS / "table1.scenario").read_text().replace("x_min = -10.0", "x_min = 10.0")
    with pytest.raises(ScenarioError) as e:
        parse_scenario_file(write(tmp_path, text))
    assert e.value.where == "world.region"


@pytest.mark.parametrize("old, new, where", [
    ("dt = 0.02", "dt = 0.0", "world.dt"),
    ("dt = 0.02", "dt = \"fast\"", "world.dt"),
    ("d_c = 10.0", "d_cc = 10.0", "world.d_c"),
    ("K_s = 0.35", "K_s = 0.35\nK_x = 1.0", "world.K_x"),
    ("n = 100", "n = 100.5", "world.n"),
    ("grid = [20, 20]", "grid = [20, 20]\nspacing = 1", "targets.spacing"),
    ("kind = \"fixed_duration\"", "kind = \"sometimes\"", "phase_trigger.kind"),
    ("format = \"cutin-coverage-scenario/1\"", "format = \"v0\"", "format"),
])
def test_validation_errors_locate_field(tmp_path, old, new, where):
    text = (SCENARIOS / "table1.scenario").read_text()
    assert old in text
    with pytest.raises(ScenarioError) as e:
        parse_scenario_file(write(tmp_path, text.replace(old, new, 1)))
    assert e.value.where == where


def test_target_outside_region(tmp_path):
    text = (SCENARIOS / "table2_switching.scenario").read_text().replace("[-3.75, 0.0]", "[-30.0, 0.0]", 1)
    with pytest.raises(ScenarioError) as e:
        parse_scenario_file(write(tmp_path, text))
    assert e.value.where == "targets.phases" and "outside" in str(e.value)


def test_syntax_error_reports_line(tmp_path):
    text = (SCENARIOS / "table1.scenario").read_text().replace("dt = 0.02", "dt = = 0.02")
    with pytest.raises(ScenarioError) as e:
        parse_scenario_file(write(tmp_path, text))
    line = 1 + text.splitlines().index("dt = = 0.02")
    assert e.value.where == "syntax" and f"line {line}" in str(e.value)


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError) as e:
        parse_scenario_file(tmp_path / "nope.scenario")
    assert e.value.where == "file"


def test_csv_headers_are_pinned():
    assert TRAJECTORY_COLUMNS == ("t", "agent_id", "x", "y", "ref_target", "tier")
    assert METRICS_COLUMNS == ("t", "p_cov", "p_cov_lower", "min_pairwise_dist")


def fixed_point_trial():
    cfg = WorldConfig(Region(-1, 1, -1, 1), 1, 1, t_last=0.1)
    sc = Scenario(cfg, initial_agent_positions=[[0.0, 0.0]], target_phases=(TargetSet([[0.0, 0.0]]),))
    return run_trial(sc, "proposed", 0)


def test_fixed_point_metrics_file():
    text = metrics_csv(fixed_point_trial())
    lines = text.splitlines()
    assert lines[0] == "t,p_cov,p_cov_lower,min_pairwise_dist"
    assert len(lines) == 7
    assert lines[1] == "0.000000000,1.000000000,1.000000000,inf"
    assert all(l.split(",")[1] == "1.000000000" for l in lines[1:])


def test_trajectory_rows_match_arrays():
    cfg = table1_config(n_agents=4, n_targets=4, t_last=0.1)
    t = run_trial(Scenario(cfg), "proposed", 2)
    lines = trajectory_csv(t).splitlines()
    assert lines[0] == ",".join(TRAJECTORY_COLUMNS)
    assert len(lines) == 1 + 6 * 4
    tt, aid, x, y, ref, tier = lines[1 + 4 * 5 + 3].split(",")
    assert float(tt) == pytest.approx(0.1) and aid == "3"
    assert float(x) == pytest.approx(t.positions[5, 3, 0], abs=1e-9)
    assert int(ref) == t.references[5, 3]
    assert tier in ("assigned", "uncovered", "unknown", "hold")


def test_export_is_byte_identical(tmp_path):
    sc = Scenario(table1_config(n_agents=6, n_targets=6, t_last=0.3))
    for d in ("a", "b"):
        export_outputs(run_campaign(sc, "proposed", 2, base_seed=3), tmp_path / d)
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) == 5
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_export_respects_emit(tmp_path):
    sc = Scenario(table1_config(n_agents=3, n_targets=3, t_last=0.1))
    res = run_campaign(sc, "lloyd", 1)
    written = export_outputs(res, tmp_path, ["metrics"])
    assert [p.relative_to(tmp_path).as_posix() for p in written] == ["metrics/lloyd_seed0.csv"]
    with pytest.raises(ValueError):
        export_outputs(res, tmp_path, ["plots"])


def test_summary_document(tmp_path):
    sc = Scenario(table1_config(n_agents=3, n_targets=3, t_last=0.1))
    res = run_campaign(sc, "proposed", 2)
    m = RunManifest(algorithm="proposed", base_seed=0, n_trials=2, seeds=[0, 1], scenario=scenario_to_dict(sc))
    export_outputs(res, tmp_path, ["summary"], m)
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["summary"]["n_trials"] == 2 and doc["manifest"]["seeds"] == [0, 1]
    assert RunManifest.from_dict(doc["manifest"]) == m
    assert scenario_from_dict(doc["manifest"]["scenario"]) == sc
    assert set(doc["phases"]) == {"0", "1"}
