"""End-to-end tests of the command line interface and config validation."""

import csv
import json
import os

import numpy as np
import pytest

from rsg.cli import main
from rsg.config import ConfigError, load_config, parse_config

FLAT_SOLVE_CONFIG = {
    "metric": {"kind": "euclidean"},
    "variant": "path",
    "source_gait": {"period": 1.0, "joints": [[0.0], [0.0]]},
    "target_gait": {"period": 1.0, "joints": [[3.0], [4.0]]},
    "limits": None,
    "solver": {"fixed_tf": 0.0, "nm_starts": 1, "nm_maxiter": 80,
               "search_steps": 32, "steps": 96, "polish_max_nfev": 8},
}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_default_config_builds():
    cfg = parse_config({})
    assert cfg.metric_kind == "drag"
    assert cfg.source_gait.label == "forward"
    assert cfg.target_gait.label == "turning"
    problem = cfg.build_problem()
    assert problem.dim == 2


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown key 'solverr'"):
        parse_config({"solverr": {}})


def test_unknown_nested_key_rejected():
    with pytest.raises(ConfigError, match="solver: unknown key"):
        parse_config({"solver": {"stepss": 10}})
    with pytest.raises(ConfigError, match="metric.params"):
        parse_config({"metric": {"kind": "drag", "params": {"mass": 1.0}}})


def test_bad_values_rejected():
    with pytest.raises(ConfigError, match="variant"):
        parse_config({"variant": "fastest"})
    with pytest.raises(ConfigError, match="metric.kind"):
        parse_config({"metric": {"kind": "flat"}})
    with pytest.raises(ConfigError, match="expected float"):
        parse_config({"phase": "zero"})
    with pytest.raises(ConfigError, match="drag ratio"):
        parse_config({"metric": {"kind": "drag", "params": {"drag_ratio": 0.5}}})
    with pytest.raises(ConfigError, match="phase_count"):
        parse_config({"sweep": {"phase_count": 0}})


def test_named_and_inline_gaits():
    cfg = parse_config({"source_gait": "turning", "target_gait": "forward"})
    assert cfg.source_gait.label == "turning"
    cfg = parse_config({"source_gait": {"period": 2.0,
                                        "joints": [[0.1], [0.2]]}})
    assert cfg.source_gait.period == 2.0
    with pytest.raises(ConfigError, match="source_gait"):
        parse_config({"source_gait": "sideways"})


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "variant": "path",\n  oops\n}\n')
    with pytest.raises(ConfigError, match=r"bad\.json:3:"):
        load_config(str(path))


def test_missing_file_is_config_error():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.json")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def test_solve_writes_solution_files(tmp_path):
    cfg = write_config(tmp_path, FLAT_SOLVE_CONFIG)
    out = str(tmp_path / "out")
    code = main(["solve", "--config", cfg, "--out", out])
    assert code == 0
    with open(os.path.join(out, "solution.json")) as fh:
        sol = json.load(fh)
    assert sol["status"] == "converged"
    assert sol["residual_norm"] < 1e-6
    rows = read_csv(os.path.join(out, "trajectory.csv"))
    assert rows[0] == ["t", "r1", "r2", "dr1", "dr2", "cost_accum"]
    last = [float(v) for v in rows[-1]]
    assert last[1] == pytest.approx(3.0, abs=1e-6)
    assert last[2] == pytest.approx(4.0, abs=1e-6)


def test_solve_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope}")
    assert main(["solve", "--config", str(bad)]) == 2

    infeasible = dict(FLAT_SOLVE_CONFIG)
    infeasible["limits"] = {"joint": 1.0, "acceleration": None}
    cfg = write_config(tmp_path, infeasible, "strict.json")
    out = str(tmp_path / "strict_out")
    assert main(["solve", "--config", cfg, "--out", out, "--strict"]) == 3
    assert main(["solve", "--config", cfg, "--out", out]) == 0


def test_variant_and_phase_overrides(tmp_path):
    data = dict(FLAT_SOLVE_CONFIG)
    data["source_gait"] = {"period": 1.0,
                           "joints": [[0.0, 0.3, 0.0], [0.0, 0.0, 0.3]]}
    data["target_gait"] = {"period": 1.0,
                           "joints": [[1.0, 0.3, 0.0], [1.0, 0.0, 0.3]]}
    data["solver"] = {"fixed_tf": 0.0, "fixed_T": 1.0, "nm_starts": 1,
                      "nm_maxiter": 60, "search_steps": 32, "steps": 96,
                      "polish_max_nfev": 8}
    cfg = write_config(tmp_path, data)
    out = str(tmp_path / "accel_out")
    code = main(["solve", "--config", cfg, "--variant", "accel",
                 "--phase", "0.25", "--out", out])
    assert code == 0
    with open(os.path.join(out, "solution.json")) as fh:
        sol = json.load(fh)
    assert sol["variant"] == "accel"
    assert sol["t0"] == pytest.approx(0.25)
    rows = read_csv(os.path.join(out, "trajectory.csv"))
    assert rows[0] == ["t", "r1", "r2", "dr1", "dr2", "a1", "a2", "cost_accum"]


def test_sweep_summary(tmp_path):
    data = dict(FLAT_SOLVE_CONFIG)
    data["sweep"] = {"phase_count": 3}
    cfg = write_config(tmp_path, data)
    out = str(tmp_path / "sweep_out")
    assert main(["sweep", "--config", cfg, "--out", out]) == 0
    rows = read_csv(os.path.join(out, "summary.csv"))
    assert rows[0] == ["phase", "t0", "status", "T", "t_f", "cost",
                       "net_fwd_disp", "net_turn_disp"]
    assert len(rows) == 4
    assert all(r[2] == "converged" for r in rows[1:])
    for idx in range(3):
        assert os.path.isfile(
            os.path.join(out, f"phase_{idx:02d}", "solution.json"))


def test_scenario_csv_and_round_trip(tmp_path):
    cfg = write_config(tmp_path, FLAT_SOLVE_CONFIG)
    out = str(tmp_path / "scen_out")
    assert main(["scenario", "--config", cfg, "--out", out]) == 0
    rows = read_csv(os.path.join(out, "scenario.csv"))
    assert rows[0] == ["t", "r1", "r2", "x", "y", "theta",
                       "fwd_disp", "turn_disp", "cost_accum", "segment"]
    segments = [r[-1] for r in rows[1:]]
    assert segments[0] == "source"
    assert segments[-1] == "target"
    assert "transition" in segments
    # numeric columns round-trip bit-exactly through repr-precision text
    for row in rows[1:10]:
        for val in row[:-1]:
            if val != "nan":
                assert "%.17g" % float(val) == val


def test_scenario_determinism(tmp_path):
    cfg = write_config(tmp_path, FLAT_SOLVE_CONFIG)
    out1, out2 = str(tmp_path / "d1"), str(tmp_path / "d2")
    assert main(["scenario", "--config", cfg, "--out", out1]) == 0
    assert main(["scenario", "--config", cfg, "--out", out2]) == 0
    for name in ("scenario.csv", "solution.json", "trajectory.csv"):
        with open(os.path.join(out1, name), "rb") as fh:
            b1 = fh.read()
        with open(os.path.join(out2, name), "rb") as fh:
            b2 = fh.read()
        assert b1 == b2


def test_validate_metric_euclidean_identity(tmp_path):
    cfg = write_config(tmp_path, {"metric": {"kind": "euclidean"}})
    out = str(tmp_path / "vm_out")
    assert main(["validate-metric", "--config", cfg, "--out", out,
                 "--grid", "5"]) == 0
    rows = read_csv(os.path.join(out, "metric_grid.csv"))
    assert len(rows) == 26
    for row in rows[1:]:
        vals = dict(zip(rows[0], map(float, row)))
        assert vals["m11"] == 1.0 and vals["m22"] == 1.0 and vals["m12"] == 0.0
        assert vals["eig_min"] == 1.0 and vals["eig_max"] == 1.0


def test_validate_metric_swimmer_spd_and_symmetry(tmp_path):
    cfg = write_config(tmp_path, {"metric": {"kind": "drag"}})
    out = str(tmp_path / "vm_swim")
    assert main(["validate-metric", "--config", cfg, "--out", out,
                 "--grid", "9"]) == 0
    rows = read_csv(os.path.join(out, "metric_grid.csv"))[1:]
    table = {}
    for row in rows:
        r1, r2, m11, m12, m22, emin, emax, _ = map(float, row)
        assert emin > 0.0
        table[(round(r1, 9), round(r2, 9))] = (m11, m12, m22)
    # relabeling symmetry: swapping the joints transposes the components
    for (r1, r2), (m11, m12, m22) in table.items():
        s11, s12, s22 = table[(r2, r1)]
        assert np.allclose([m11, m12, m22], [s22, s12, s11], atol=1e-10)
