"""Command-line front end: run a scenario config and write reports and plot data."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import base_dynamics as bd
from .conditions import continuity_experiment, iid_demo, run_check, unique_ergodic_analysis
from .errors import AmbiguityError, CapacityError, ConfigError, FlagDynError
from .lie_structure import ThetaSet
from .morse_chain import build_chain_graph, morse_sets, morse_spectrum, theta_mo, weyl_defect
from .oseledets import estimate_polar_exponent, periodic_spectrum
from .scenarios import SCHEMA_VERSION, Scenario, load

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_NONCONVERGED = 0, 1, 2, 3
COMMANDS = ("spectrum", "morse", "check", "unique-ergodic", "iid-demo", "perturb")


# --------------------------------------------------------------------------- serialization


def clean(obj):
    """JSON-ready copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items() if not str(k).startswith("_")}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, ThetaSet):
        return list(obj.blocks)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _fmt(x) -> str:
    return format(float(x), ".17g") if isinstance(x, (float, np.floating)) else str(x)


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


# --------------------------------------------------------------------------- subcommands


def _convergence_rows(sc: Scenario):
    c, s = sc.system, sc.settings
    rows = []
    for n in sorted({max(1, s.n >> j) for j in (3, 2, 1, 0)}):
        est = estimate_polar_exponent(c, sc.measure, n, s.k, seed=s.seed, gap_tol=s.gap_tol)
        rows.append([n, *np.asarray(est.H), *est.stderr])
    return rows


def cmd_spectrum(sc: Scenario, out: Path, workers: int) -> dict:
    c, s = sc.system, sc.settings
    est = estimate_polar_exponent(c, sc.measure, s.n, s.k, seed=s.seed, gap_tol=s.gap_tol)
    result = {"spectrum": est.to_dict()}
    if isinstance(c.base, bd.PeriodicOrbit):
        result["exact"] = periodic_spectrum(c, sc.measure, sc.jordan_tol).to_dict()
    d = c.d
    write_csv(
        out / "spectrum_convergence.csv",
        ["n", *[f"H{i + 1}" for i in range(d)], *[f"stderr{i + 1}" for i in range(d)]],
        _convergence_rows(sc),
    )
    return {"result": result, "nonconverged": [] if est.converged else ["spectrum"]}


def cmd_morse(sc: Scenario, out: Path, workers: int) -> dict:
    c, s = sc.system, sc.settings
    g = build_chain_graph(c, ThetaSet.from_dims((1,), c.d), s.eps, s.resolution)
    dec = morse_sets(g)
    rows, sets = [], []
    for M in dec.sets:
        hull = morse_spectrum(g, M, sc.directions)
        for j, v in enumerate(hull.vertices):
            rows.append([M.index, j, *v])
        sets.append(
            {
                "index": M.index,
                "size": len(M.nodes),
                "fiber_rank": M.fiber_rank,
                "attractor": M.is_attractor,
                "repeller": M.is_repeller,
                "hull_vertices": hull.vertices,
                "hull_diameter": hull.diameter,
                "grid_tolerance": hull.tolerance,
                "convexity_defect": hull.convexity_defect(),
                "weyl_defect": weyl_defect(hull, ThetaSet.empty(c.d)),
            }
        )
    write_csv(out / "hull_vertices.csv", ["morse_set", "vertex", *[f"x{i + 1}" for i in range(c.d)]], rows)
    result = {"graph": g.summary(), "decomposition": dec.summary(), "morse_sets": sets}
    try:
        tm = theta_mo(c, s.eps, s.resolution)
        result["theta_mo"] = {"blocks": list(tm.theta.blocks), "dual_checked": tm.dual_checked}
    except AmbiguityError as e:
        result["theta_mo"] = {"ambiguous": str(e), "candidates": [list(t.blocks) for t in e.candidates]}
    return {"result": result, "nonconverged": ["morse"] if dec.resolution_artifact else []}


def _check_outputs(report, out: Path):
    write_csv(out / "margins.csv", ["sample", "margin"], [[i, m] for i, m in enumerate(report.bounded_section.margins)])
    flags = [] if report.spectrum.converged else ["spectrum"]
    if report.bounded_section.excluded:
        flags.append("section_samples")
    return flags


def cmd_check(sc: Scenario, out: Path, workers: int) -> dict:
    report = run_check(sc.system, sc.measure, sc.settings, sc.names, workers)
    flags = _check_outputs(report, out)
    return {"result": report.to_dict(), "nonconverged": flags}


def cmd_unique_ergodic(sc: Scenario, out: Path, workers: int) -> dict:
    r = unique_ergodic_analysis(sc.system, sc.settings, sc.directions)
    write_csv(out / "hull_vertices.csv", ["morse_set", "vertex", *[f"x{i + 1}" for i in range(sc.system.d)]],
              [[0, j, *v] for j, v in enumerate(r["_hull"].vertices)])
    b = r["_bounded"]
    write_csv(out / "margins.csv", ["sample", "margin"], [[i, m] for i, m in enumerate(b.margins)])
    flags = [] if r["_spectrum"].converged else ["spectrum"]
    if b.excluded:
        flags.append("section_samples")
    return {"result": r, "nonconverged": flags}


def cmd_iid_demo(sc: Scenario, out: Path, workers: int) -> dict:
    r = iid_demo(sc.system, sc.settings, sc.names)
    flags = _check_outputs(r["_report"], out)
    return {"result": r, "nonconverged": flags}


def cmd_perturb(sc: Scenario, out: Path, workers: int) -> dict:
    p = sc.perturbation
    if p is None:
        raise ConfigError("perturb needs a 'perturbation' section")
    s = sc.settings
    tab = continuity_experiment(sc.system, p.sigma, p.eps, p.js, sc.measure, s.n, s.k, p.ks, s.seed)
    return {"result": {"continuity": tab.to_dict(), "n": s.n, "k": s.k}, "nonconverged": []}


HANDLERS = {
    "spectrum": cmd_spectrum,
    "morse": cmd_morse,
    "check": cmd_check,
    "unique-ergodic": cmd_unique_ergodic,
    "iid-demo": cmd_iid_demo,
    "perturb": cmd_perturb,
}


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flagdyn", description="Lyapunov and Morse flag types of matrix cocycles.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="scenario JSON file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    ap.add_argument("--strict", action="store_true", help="exit 3 when non-convergence flags are present")
    return ap


def run(command: str, config, out, seed=None, threads: int = 1, strict: bool = False) -> int:
    out = Path(out)
    try:
        sc = load(config, seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = HANDLERS[command](sc, out, max(1, threads))
    except CapacityError as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "scenario": sc.name,
        "seed": sc.settings.seed,
        "config": sc.config,
        "settings": {
            "n": sc.settings.n,
            "k": sc.settings.k,
            "m": sc.settings.m,
            "section_samples": sc.settings.section_samples,
            "max_period": sc.settings.max_period,
            "tau": sc.settings.tau,
            "delta": sc.settings.delta,
            "eps": sc.settings.eps,
            "gap_tol": sc.settings.gap_tol,
            "jordan_tol": sc.jordan_tol,
            "resolution": {
                "cylinder": sc.settings.resolution.cylinder,
                "circle": sc.settings.resolution.circle,
                "fiber": sc.settings.resolution.fiber_cells(sc.system.d),
            },
        },
        "nonconverged": res["nonconverged"],
        "result": res["result"],
    }
    write_json(out / "report.json", report)
    _summary(command, report)
    if strict and res["nonconverged"]:
        return EXIT_NONCONVERGED
    return EXIT_OK


def _summary(command, report):
    r = report["result"]
    line = f"{command}: {report['scenario'] or 'scenario'}"
    spec = r.get("spectrum")
    if isinstance(spec, dict) and "H" in spec:
        line += " H=[" + ", ".join(format(float(h), ".6g") for h in spec["H"]) + "]"
    v = r.get("verdict")
    if isinstance(v, dict):
        line += f" equal={v['equal']}"
        if v.get("falsification_alarm"):
            line += " ALARM"
    print(line)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args.command, args.config, args.out, args.seed, args.threads, args.strict)
    except FlagDynError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
