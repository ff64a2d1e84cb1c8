import json

import numpy as np
import pytest

from fsdg.cli import main

BASE = {
    "system": {"kind": "adr-smooth"},
    "mesh": {"nx": 4, "ny": 4},
    "degree": 1,
    "samples": {"count": 10, "seed": 5},
    "rom": {"r": 2},
    "partition": {"K": 2},
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(cmd, cfg_path, out, *extra):
    return main([cmd, "--config", cfg_path, "--out", str(out), *extra])


def test_snapshots_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert run("snapshots", cfg, tmp_path / "a") == 0
    assert run("snapshots", cfg, tmp_path / "b") == 0
    a = (tmp_path / "a" / "snapshots.bin").read_bytes()
    b = (tmp_path / "b" / "snapshots.bin").read_bytes()
    assert a == b
    split = json.loads((tmp_path / "a" / "split.json").read_text())
    assert split["train"] == [0, 5]
    assert len(split["test"]) == 8
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert set(manifest["files"]) == {"snapshots.bin", "split.json"}
    assert manifest["config_hash"] == json.loads(
        (tmp_path / "b" / "manifest.json").read_text())["config_hash"]


def test_seed_flag_changes_snapshots(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert run("snapshots", cfg, tmp_path / "a") == 0
    assert run("snapshots", cfg, tmp_path / "c", "--seed", "9") == 0
    a = (tmp_path / "a" / "snapshots.bin").read_bytes()
    c = (tmp_path / "c" / "snapshots.bin").read_bytes()
    assert a != c


def test_jobs_flag_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert run("snapshots", cfg, tmp_path / "a") == 0
    assert run("snapshots", cfg, tmp_path / "d", "--jobs", "4") == 0
    assert (tmp_path / "a" / "snapshots.bin").read_bytes() == \
        (tmp_path / "d" / "snapshots.bin").read_bytes()


def test_rom_eval_output(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    out = tmp_path / "rom"
    assert run("rom-eval", cfg, out) == 0
    lines = (out / "estimators.csv").read_text().splitlines()
    assert lines[0] == ("param_index,is_train,err_l2,err_r,err_energy,"
                        "eta_r,eta_r_energy,eta_l,eta_l_energy")
    assert len(lines) == 11
    # 17 significant digits round-trip exactly
    for token in lines[1].split(",")[2:]:
        assert float(format(float(token), ".17g")) == float(token)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["violations"] == 0


def test_rom_eval_from_snapshot_file(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert run("snapshots", cfg, tmp_path / "snap") == 0
    cfg2 = dict(BASE, snapshots_file=str(tmp_path / "snap" / "snapshots.bin"))
    out = tmp_path / "rom2"
    assert run("rom-eval", write_cfg(tmp_path, cfg2, "cfg2.json"), out) == 0
    assert run("rom-eval", cfg, tmp_path / "rom3") == 0
    assert (out / "estimators.csv").read_text() == \
        (tmp_path / "rom3" / "estimators.csv").read_text()


def test_rom_eval_mismatched_snapshots(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert run("snapshots", cfg, tmp_path / "snap") == 0
    bad = dict(BASE, degree=2,
               snapshots_file=str(tmp_path / "snap" / "snapshots.bin"))
    assert run("rom-eval", write_cfg(tmp_path, bad, "bad.json"),
               tmp_path / "x") == 2


def test_ddrom_eval_k1_matches_monodomain(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert run("rom-eval", cfg, tmp_path / "mono") == 0
    cfg1 = dict(BASE, partition={"K": 1})
    assert run("ddrom-eval", write_cfg(tmp_path, cfg1, "k1.json"),
               tmp_path / "dd") == 0
    mono = np.loadtxt(tmp_path / "mono" / "estimators.csv", delimiter=",",
                      skiprows=1)
    dd = np.loadtxt(tmp_path / "dd" / "ddrom_estimators.csv", delimiter=",",
                    skiprows=1, usecols=range(9))
    assert np.max(np.abs(mono[:, 2:5] - dd[:, 2:5])) <= 1e-12


def test_converge_command(tmp_path):
    cfg = {"convergence": {"kind": "polynomial", "degrees": [1],
                           "sizes": [2, 3, 4]}}
    out = tmp_path / "conv"
    assert run("converge", write_cfg(tmp_path, cfg), out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["1"]["status"] == "exact"
    assert summary["1"]["passed"]
    rows = (out / "rates.csv").read_text().splitlines()
    assert rows[0] == "degree,h,dofs,err_l2,err_energy,err_triple"
    assert len(rows) == 4


def test_converge_needs_three_levels(tmp_path):
    cfg = {"convergence": {"kind": "polynomial", "degrees": [1],
                           "sizes": [2, 4]}}
    assert run("converge", write_cfg(tmp_path, cfg), tmp_path / "x") == 2


def test_indicators_command(tmp_path):
    cfg = dict(BASE)
    cfg["repartition"] = {"indicator": "grassmannian", "p_low": 50.0,
                          "p_grid": [20, 50, 80]}
    out = tmp_path / "ind"
    assert run("indicators", write_cfg(tmp_path, cfg), out) == 0
    for kind in ("variance", "grassmannian"):
        lines = (out / f"indicators_{kind}.csv").read_text().splitlines()
        assert lines[0] == "cell_id,barycenter_x,barycenter_y,value,label"
        assert len(lines) == 17
    scan = (out / "reconstruction_scan.csv").read_text().splitlines()
    assert scan[0] == "p_low,err_low,err_high,err_global,indicator_kind"
    assert len(scan) == 7    # 3 thresholds x 2 indicator kinds


def test_check_axioms_command(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    out = tmp_path / "ax"
    assert run("check-axioms", cfg, out) == 0
    report = json.loads((out / "axioms.json").read_text())
    assert report["ok"]


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"unknown_key": 1}')
    assert main(["converge", "--config", str(bad),
                 "--out", str(tmp_path / "x")]) == 2
    notjson = tmp_path / "nj.json"
    notjson.write_text("not json")
    assert main(["snapshots", "--config", str(notjson),
                 "--out", str(tmp_path / "x")]) == 2
    missing = dict(BASE, snapshots_file=str(tmp_path / "nope.bin"))
    assert run("rom-eval", write_cfg(tmp_path, missing, "m.json"),
               tmp_path / "x") == 4
    # numeric failure: more modes than training snapshots
    toomany = dict(BASE, rom={"r": 50})
    assert run("rom-eval", write_cfg(tmp_path, toomany, "t.json"),
               tmp_path / "x") == 3
