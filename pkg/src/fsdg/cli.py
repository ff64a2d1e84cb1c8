"""Batch command-line driver: FOM solves, convergence studies, snapshot
generation, ROM/DD-ROM evaluation, indicator studies. Emits CSV/JSON only."""

import argparse
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, config_hash, load_config, require
from .dg import DGSpace, assemble, convergence_study, solve
from .ddrom import (block_assemble, block_solve, indicator_grassmannian,
                    indicator_variance, local_pod, repartition,
                    reconstruction_scan)
from .families import get_family, manufactured_adr
from .mesh import partition_from_labels, partition_stripes
from .rom import (SnapshotSet, estimate, online_solve, pod, project,
                  read_snapshots, train_test_split, write_snapshots)
from .systems import check_axioms

log = logging.getLogger("fsdg")

ESTIMATOR_COLUMNS = ("param_index", "is_train", "err_l2", "err_r",
                     "err_energy", "eta_r", "eta_r_energy", "eta_l",
                     "eta_l_energy")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _build_space(cfg):
    family = get_family(cfg["system"]["kind"])
    mesh_cfg = cfg.get("mesh", {})
    mesh = family.mesh(mesh_cfg.get("nx"), mesh_cfg.get("ny"))
    degree = cfg.get("degree", family.degree)
    space = DGSpace(mesh, degree, family.m)
    return family, mesh, space


def _sample_params(cfg, family, seed):
    samples = cfg.get("samples", {})
    if "list" in samples:
        params = np.asarray(samples["list"], dtype=float)
        if params.shape[1] != family.n_params:
            raise ConfigError(f"{family.name} expects {family.n_params} "
                              f"parameters per sample")
        return params
    count = samples.get("count", 20)
    return family.sample(count, seed)


def _solve_samples(family, space, params, jobs):
    X = np.empty((space.N, len(params)))

    def work(j):
        asm = assemble(family.make_system(params[j]), space)
        X[:, j] = solve(asm)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, range(len(params))))
    else:
        for j in range(len(params)):
            work(j)
    return X


def _get_snapshots(cfg, family, space, seed, jobs):
    """Snapshot set from the configured file, or generated on the fly."""
    if "snapshots_file" in cfg:
        snaps = read_snapshots(cfg["snapshots_file"])
        if snaps.matrix.shape[0] != space.N:
            raise ConfigError(
                f"snapshot file has {snaps.matrix.shape[0]} rows but the "
                f"configured space has {space.N} dofs")
        if snaps.params.shape[1] != family.n_params:
            raise ConfigError("snapshot parameter count does not match family")
        return snaps
    params = _sample_params(cfg, family, seed)
    log.info("solving %d full-order samples", len(params))
    X = _solve_samples(family, space, params, jobs)
    return SnapshotSet(matrix=X, params=params, system=family.name)


def _estimate_rows(family, space, snaps, solutions, is_train, partition=None):
    """Per-parameter error/estimator rows; FOM snapshots give the true errors."""
    rows = []
    violations = 0
    for j in range(snaps.n):
        asm = assemble(family.make_system(snaps.params[j]), space,
                       partition=partition)
        rec = estimate(asm, solutions[:, j], z_h=snaps.matrix[:, j])
        if rec.err_r > rec.eta_r + 1e-10 or rec.err_l2 > rec.eta_l + 1e-10:
            violations += 1
        rows.append((j, int(is_train[j]), rec.err_l2, rec.err_r,
                     rec.err_energy, rec.eta_r, rec.eta_r_energy, rec.eta_l,
                     rec.eta_l_energy))
    return rows, violations


def _mean_test_err(rows):
    errs = [r[2] for r in rows if not r[1]]
    return float(np.mean(errs)) if errs else float("nan")


def cmd_converge(cfg, out, seed, jobs):
    require(cfg, "convergence")
    conv = cfg["convergence"]
    if len(conv["sizes"]) < 3:
        raise ConfigError("convergence needs at least 3 mesh levels")
    table = convergence_study(manufactured_adr(conv["kind"]),
                              conv["degrees"], conv["sizes"])
    rows = []
    summary = {}
    for k, data in table.items():
        for h, dofs, l2, energy, triple in data["rows"]:
            rows.append((k, h, dofs, l2, energy, triple))
        threshold = k + 0.5 - 0.2
        passed = data["status"] == "exact" or (data["slope"] is not None
                                               and data["slope"] >= threshold)
        summary[str(k)] = {"slope": data["slope"], "threshold": threshold,
                           "status": data["status"], "passed": bool(passed),
                           "monotone": data["monotone"]}
    _write_csv(out / "rates.csv",
               ("degree", "h", "dofs", "err_l2", "err_energy", "err_triple"),
               rows)
    _write_json(out / "summary.json", summary)
    return ["rates.csv", "summary.json"]


def cmd_snapshots(cfg, out, seed, jobs):
    require(cfg, "system")
    family, mesh, space = _build_space(cfg)
    params = _sample_params(cfg, family, seed)
    X = _solve_samples(family, space, params, jobs)
    snaps = SnapshotSet(matrix=X, params=params, system=family.name)
    write_snapshots(out / "snapshots.bin", snaps)
    train, test = train_test_split(snaps.n)
    _write_json(out / "split.json", {
        "count": snaps.n, "train": train.tolist(), "test": test.tolist()})
    return ["snapshots.bin", "split.json"]


def cmd_rom_eval(cfg, out, seed, jobs):
    require(cfg, "system", "rom")
    family, mesh, space = _build_space(cfg)
    snaps = _get_snapshots(cfg, family, space, seed, jobs)
    train, _ = train_test_split(snaps.n)
    is_train = np.isin(np.arange(snaps.n), train)
    rom = cfg["rom"]
    basis = pod(snaps.matrix[:, train], r=rom.get("r"), tol=rom.get("tol"))

    sols = np.empty_like(snaps.matrix)
    for j in range(snaps.n):
        asm = assemble(family.make_system(snaps.params[j]), space)
        sols[:, j] = online_solve(project(asm, basis), basis)
    rows, violations = _estimate_rows(family, space, snaps, sols, is_train)

    _write_csv(out / "estimators.csv", ESTIMATOR_COLUMNS, rows)
    _write_json(out / "summary.json", {
        "r": basis.r, "violations": violations,
        "mean_test_err_l2": _mean_test_err(rows)})
    return ["estimators.csv", "summary.json"]


def cmd_ddrom_eval(cfg, out, seed, jobs):
    require(cfg, "system", "rom", "partition")
    family, mesh, space = _build_space(cfg)
    snaps = _get_snapshots(cfg, family, space, seed, jobs)
    train, _ = train_test_split(snaps.n)
    is_train = np.isin(np.arange(snaps.n), train)
    train_set = SnapshotSet(matrix=snaps.matrix[:, train],
                            params=snaps.params[train], system=family.name)
    rom = cfg["rom"]

    def eval_partition(partition, r_list, variant):
        bases = local_pod(train_set, space, partition, r_list)
        sols = np.empty_like(snaps.matrix)
        for j in range(snaps.n):
            asm = assemble(family.make_system(snaps.params[j]), space,
                           partition=partition)
            sols[:, j] = block_solve(block_assemble(asm), bases)
        rows, violations = _estimate_rows(family, space, snaps, sols,
                                          is_train, partition=partition)
        tag = ";".join(str(r) for r in bases.rs)
        rows = [row + (partition.K, tag, variant) for row in rows]
        return rows, violations

    K = cfg["partition"]["K"]
    r_list = rom.get("r_list", rom.get("r", 1))
    rows, violations = eval_partition(partition_stripes(mesh, K), r_list,
                                      "stripes")
    summary = {"K": K, "violations": violations,
               "mean_test_err_l2": _mean_test_err(rows)}

    if "repartition" in cfg:
        rep = cfg["repartition"]
        kind = rep.get("indicator", "grassmannian")
        if kind == "grassmannian":
            ind = indicator_grassmannian(train_set, space,
                                         n_neigh=rep.get("n_neigh", 3),
                                         r_T=rep.get("r_T", 1))
        else:
            ind = indicator_variance(train_set, space)
        labels = repartition(ind, rep.get("p_low", 50.0), rep.get("k", 2))
        part2 = partition_from_labels(mesh, labels)
        rep_rows, rep_violations = eval_partition(
            part2, rep.get("r_list", rom.get("r", 1)), "repartitioned")
        rows += rep_rows
        summary["repartitioned"] = {
            "violations": rep_violations,
            "mean_test_err_l2": _mean_test_err(rep_rows)}

    _write_csv(out / "ddrom_estimators.csv",
               ESTIMATOR_COLUMNS + ("K", "r_list", "variant"), rows)
    _write_json(out / "summary.json", summary)
    return ["ddrom_estimators.csv", "summary.json"]


def cmd_indicators(cfg, out, seed, jobs):
    require(cfg, "system")
    family, mesh, space = _build_space(cfg)
    snaps = _get_snapshots(cfg, family, space, seed, jobs)
    rep = cfg.get("repartition", {})
    p_low = rep.get("p_low", 50.0)
    n_neigh = rep.get("n_neigh", 3)
    r_t = rep.get("r_T", 1)
    p_grid = rep.get("p_grid", list(range(10, 100, 10)))

    files = []
    scan_rows = []
    indicators = {
        "variance": indicator_variance(snaps, space),
        "grassmannian": indicator_grassmannian(snaps, space,
                                               n_neigh=n_neigh, r_T=r_t),
    }
    for kind, ind in indicators.items():
        labels = repartition(ind, p_low)
        rows = [(c, mesh.barycenters[c, 0], mesh.barycenters[c, 1],
                 ind.values[c], labels[c]) for c in range(mesh.n_cells)]
        name = f"indicators_{kind}.csv"
        _write_csv(out / name,
                   ("cell_id", "barycenter_x", "barycenter_y", "value",
                    "label"), rows)
        files.append(name)
        scan_rows += reconstruction_scan(snaps, space, kind, p_grid,
                                         rep.get("r_list", [1, 1])[0],
                                         n_neigh=n_neigh, r_T=r_t)
    _write_csv(out / "reconstruction_scan.csv",
               ("p_low", "err_low", "err_high", "err_global",
                "indicator_kind"), scan_rows)
    files.append("reconstruction_scan.csv")
    return files


def cmd_check_axioms(cfg, out, seed, jobs):
    require(cfg, "system")
    family, mesh, space = _build_space(cfg)
    rho = family.param_ranges.mean(axis=1)
    sys = family.make_system(rho)
    result = check_axioms(sys, mesh=mesh, rng=np.random.default_rng(seed))
    _write_json(out / "axioms.json", {
        "system": family.name, "parameters": rho.tolist(),
        "symmetric": result.symmetric, "positive": result.positive,
        "monotone": result.monotone,
        "strictly_adjoint": result.strictly_adjoint,
        "max_asymmetry": result.max_asymmetry,
        "min_positivity_eig": result.min_positivity_eig,
        "min_monotonicity_eig": result.min_monotonicity_eig,
        "ok": result.ok})
    if not result.ok:
        raise RuntimeError("axiom check failed; see axioms.json")
    return ["axioms.json"]


_COMMANDS = {
    "converge": cmd_converge,
    "snapshots": cmd_snapshots,
    "rom-eval": cmd_rom_eval,
    "ddrom-eval": cmd_ddrom_eval,
    "indicators": cmd_indicators,
    "check-axioms": cmd_check_axioms,
}


def _parser():
    p = argparse.ArgumentParser(prog="fsdg", description=__doc__)
    p.add_argument("command", choices=sorted(_COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads for snapshot solves")
    p.add_argument("--seed", type=int, default=None,
                   help="override the configured sampling seed")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=os.environ.get("DDROM_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else \
            cfg.get("samples", {}).get("seed", 0)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        files = _COMMANDS[args.command](cfg, out, seed, args.jobs)
        manifest = {
            "command": args.command,
            "config_hash": config_hash(cfg, seed),
            "version": __version__,
            "files": sorted(files),
            "started": started,
            "finished": time.time(),
        }
        _write_json(out / "manifest.json", manifest)
    except ConfigError as e:
        log.error("config error: %s", e)
        return 2
    except OSError as e:
        log.error("I/O error: %s", e)
        return 4
    except Exception as e:
        log.error("numeric failure: %s", e)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
