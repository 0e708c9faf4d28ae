"""Command-line driver.

    greedy-energy run CONFIG [--output-dir DIR] [--threads T]
    greedy-energy compare CONFIG_A CONFIG_B [--output-dir DIR]
    greedy-energy equilibrium CONFIG [--samples K] [--output-dir DIR]
    greedy-energy brute CONFIG [--output-dir DIR]

Exit codes: 0 ok, 1 selection failure, 2 invalid config or incomparable
configs, 3 brute-force guard exceeded, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .conductor import (CandidateSet, ball_grid, box_grid, format_float, interval_grid,
                        load_points, save_points, sphere_points)
from .config import ConfigError, RunConfig, load_config
from .equilibrium import (EquilibriumReference, ReferenceKind, discrete_equilibrium,
                          jacobi_reference, radial_newtonian_reference, radial_shell,
                          riesz_interval_reference)
from .field import FieldSpec, growth_admissible
from .kernel import KernelSpec
from .selector import (GuardExceeded, SelectionError, block_greedy_run, greedy_run,
                       optimal_configuration)

log = logging.getLogger("greedy_energy")

EXIT_OK, EXIT_SELECTION, EXIT_CONFIG, EXIT_GUARD, EXIT_IO = 0, 1, 2, 3, 4


# -- building blocks from a config --------------------------------------------

def _dimension(cfg: RunConfig) -> int:
    kind = cfg["conductor.kind"]
    if kind == "interval":
        return 1
    if kind == "box":
        return len(cfg["conductor.lower"])
    if kind == "sphere":
        return 3
    if kind == "ball":
        return cfg["conductor.dimension"]
    return load_points(cfg["conductor.path"]).dimension


def build_kernel_field(cfg: RunConfig) -> tuple[KernelSpec, FieldSpec]:
    return KernelSpec(cfg["kernel.s"]), cfg.field_spec(_dimension(cfg))


def build_conductor(cfg: RunConfig, field: FieldSpec, M: int | None = None) -> CandidateSet:
    kind = cfg["conductor.kind"]
    M = cfg["conductor.M"] if M is None else M
    try:
        if kind == "interval":
            return interval_grid(cfg["conductor.a"], cfg["conductor.b"], M)
        if kind == "box":
            return box_grid(cfg["conductor.lower"], cfg["conductor.upper"], M)
        if kind == "sphere":
            return sphere_points(3, M)
        if kind == "ball":
            radius = cfg["conductor.radius"]
            if radius is None:
                _, R0 = radial_shell(cfg["conductor.dimension"], field)
                radius = cfg["conductor.radius_factor"] * R0
            return ball_grid(radius, cfg["conductor.dimension"], M)
    except ValueError as exc:
        raise cfg.error("conductor.kind", str(exc)) from None
    return load_points(cfg["conductor.path"])


def build_reference(cfg: RunConfig, kernel: KernelSpec, field: FieldSpec,
                    cand: CandidateSet) -> EquilibriumReference | None:
    kind = cfg["analysis.reference"]
    ladder = tuple(cfg["analysis.ladder"])
    tol = cfg["analysis.tol"]
    if kind == "none":
        return None
    if kind == "riesz":
        return riesz_interval_reference(kernel.s, ladder=ladder, tol=tol)
    if kind == "jacobi":
        return jacobi_reference(field.lambda1, field.lambda2, ladder=ladder, tol=tol)
    if kind == "radial":
        p = cfg["conductor.dimension"]
        if kernel.s != p - 2:
            raise cfg.error("analysis.reference", f"radial reference needs kernel.s = p - 2 = {p - 2}")
        try:
            return radial_newtonian_reference(p, field)
        except ValueError as exc:
            raise cfg.error("analysis.reference", str(exc)) from None
    solver_M = cfg["analysis.solver_M"]
    grid = cand if solver_M is None else build_conductor(cfg, field, solver_M)
    try:
        return discrete_equilibrium(kernel, field, grid, tol=tol)
    except ValueError as exc:
        raise cfg.error("analysis.solver_M", str(exc)) from None


# -- a run ---------------------------------------------------------------------

@dataclass
class RunResult:
    cfg: RunConfig
    cand: CandidateSet
    points: np.ndarray
    rows: list  # (N, normalized_energy, robin_value, ks_distance)
    report: dict
    energies: dict = field(default_factory=dict)  # N -> E_f of the N-point configuration


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _reference_summary(ref: EquilibriumReference | None) -> dict | None:
    if ref is None:
        return None
    out = {"kind": ref.kind.value, "V_f": _num(ref.V_f), "W_f": _num(ref.W_f),
           "params": {k: (_num(v) if isinstance(v, (int, float)) else v)
                      for k, v in ref.params.items()}}
    if ref.kind is not ReferenceKind.DISCRETE:
        out["support"] = [_num(v) for v in ref.support]
    if ref.ladder is not None:
        out["ladder"] = {"sizes": list(ref.ladder.sizes), "V": [_num(v) for v in ref.ladder.V],
                         "W": [_num(v) for v in ref.ladder.W]}
    if ref.solver is not None:
        out["solver"] = {"iterations": ref.solver.iterations, "gap": _num(ref.solver.gap),
                         "converged": ref.solver.converged}
    return out


def execute(cfg: RunConfig, threads: int = 1) -> RunResult:
    kernel, fld = build_kernel_field(cfg)
    cand = build_conductor(cfg, fld)
    ok, msg = growth_admissible(fld, kernel)
    if not ok:
        log.warning(msg)
    ref = build_reference(cfg, kernel, fld, cand)
    N = cfg["run.N"]
    if cfg["run.method"] == "optimal":
        return _execute_optimal(cfg, kernel, fld, cand, ref)

    start = cfg["run.start"]
    if start != "auto" and not 0 <= start < len(cand):
        raise cfg.error("run.start", f"index {start} out of range for {len(cand)} candidates")
    m = cfg["run.m"]
    if m == 1:
        trace = greedy_run(kernel, fld, cand, N, start=start, threads=threads)
    else:
        trace = block_greedy_run(kernel, fld, cand, m, N // m, strategy=cfg["run.strategy"],
                                 restarts=cfg["run.restarts"], seed=cfg["seed"])
    rep = analysis.convergence_report(trace, kernel, fld, cand, ref)
    rows = list(zip(rep.N_values.tolist(), rep.normalized_energy.tolist(),
                    rep.robin_values.tolist(), rep.ks_distances.tolist()))
    final = {k: (_num(v) if not isinstance(v, int) or isinstance(v, bool) else v)
             for k, v in rep.final().items()}
    report = {
        "method": "greedy" if m == 1 else f"block(m={m},{cfg['run.strategy']})",
        "candidates": _cand_summary(cand),
        "final": final,
        "reference": _reference_summary(ref),
        "energy_identity_error": _num(analysis.energy_identity_error(trace)),
        "growth_condition": msg,
    }
    if m > 1:
        _, bvals = analysis.block_trajectory(trace)
        report["block_diagnostic_tail_mean"] = _num(analysis.tail_mean(bvals))
    if ref is not None and ref.kind is ReferenceKind.DISCRETE and cand.dimension >= 2 \
            and cfg["conductor.kind"] == "box":
        report["cell_discrepancy"] = _num(analysis.cell_discrepancy(
            trace.points(cand), ref, cfg["conductor.lower"], cfg["conductor.upper"],
            cfg["analysis.cells"]))
    energies = {int(n): float(e) for n, e in
                zip(range(1, len(trace) + 1), trace.energy_prefix) if n >= 2}
    return RunResult(cfg, cand, trace.points(cand), rows, report, energies)


def _cand_summary(cand: CandidateSet) -> dict:
    return {"label": cand.label, "count": len(cand), "dimension": cand.dimension,
            "mesh_scale": _num(cand.mesh_scale)}


def _execute_optimal(cfg, kernel, fld, cand, ref) -> RunResult:
    N = cfg["run.N"]
    energies, rows, best = {}, [], None
    for n in range(2, N + 1):
        best = optimal_configuration(kernel, fld, cand, n)
        energies[n] = best.energy
        ks = np.nan
        if ref is not None and ref.cdf is not None:
            measure = analysis.ks_distance_radial \
                if ref.kind is ReferenceKind.RADIAL_NEWTONIAN else analysis.ks_distance_1d
            ks = measure(best.points, ref)
        rows.append((n, best.energy / n ** 2, np.nan, ks))
    report = {
        "method": "optimal",
        "candidates": _cand_summary(cand),
        "final": {"N": N, "energy": _num(best.energy), "normalized_energy": _num(rows[-1][1]),
                  "indices": best.indices.tolist()},
        "reference": _reference_summary(ref),
    }
    return RunResult(cfg, cand, best.points, rows, report, energies)


# -- output --------------------------------------------------------------------

def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else format_float(v)


def write_outputs(result: RunResult, outdir: Path, formats) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if "points-csv" in formats:
        path = outdir / "points.csv"
        save_points(path, result.points)
        written.append(path)
    if "trajectory-csv" in formats:
        path = outdir / "trajectory.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "normalized_energy", "robin_value", "ks_distance"])
            for row in result.rows:
                w.writerow([_csv_value(v) for v in row])
        written.append(path)
    if "report-json" in formats:
        path = outdir / "report.json"
        payload = dict(result.report)
        payload["config"] = {k: v if not isinstance(v, tuple) else list(v)
                             for k, v in sorted(result.cfg.values.items())}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written


def _outdir(cfg: RunConfig, override: str | None) -> Path:
    return Path(override if override else cfg["output.dir"])


# -- subcommands ---------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = load_config(args.config)
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    result = execute(cfg, threads=threads)
    paths = write_outputs(result, _outdir(cfg, args.output_dir), cfg["output.formats"])
    final = result.report["final"]
    print(f"{cfg.source}: N={final.get('N')} normalized_energy={final.get('normalized_energy')}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg_a, cfg_b = load_config(args.config_a), load_config(args.config_b)
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    res_a, res_b = execute(cfg_a, threads), execute(cfg_b, threads)
    pa, pb = res_a.cand.points, res_b.cand.points
    if pa.shape != pb.shape or not np.array_equal(pa, pb):
        raise ConfigError(f"{cfg_a.source} and {cfg_b.source} use different candidate sets; "
                          "nothing to compare")
    common = sorted(set(res_a.energies) & set(res_b.energies))
    outdir = Path(args.output_dir) if args.output_dir else Path(cfg_a["output.dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "compare.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "energy_a", "energy_b", "difference", "ratio"])
        for n in common:
            ea, eb = res_a.energies[n], res_b.energies[n]
            ratio = ea / eb if eb != 0 else math.nan
            w.writerow([n, _csv_value(ea), _csv_value(eb), _csv_value(ea - eb), _csv_value(ratio)])
    same_points = res_a.points.shape == res_b.points.shape and \
        np.array_equal(res_a.points, res_b.points)
    summary = {"a": {"config": cfg_a.source, "final": res_a.report["final"]},
               "b": {"config": cfg_b.source, "final": res_b.report["final"]},
               "identical_point_sets": bool(same_points), "common_N": len(common)}
    (outdir / "compare.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{'':>22}{'a':>22}{'b':>22}")
    for key in sorted(set(res_a.report["final"]) | set(res_b.report["final"])):
        if key == "indices":
            continue
        print(f"{key:>22}{str(res_a.report['final'].get(key)):>22}"
              f"{str(res_b.report['final'].get(key)):>22}")
    print(f"point sets {'identical' if same_points else 'differ'}; wrote {path}")
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    cfg = load_config(args.config)
    kernel, fld = build_kernel_field(cfg)
    cand = build_conductor(cfg, fld)
    ref = build_reference(cfg, kernel, fld, cand)
    if ref is None:
        raise cfg.error("analysis.reference", "equilibrium needs analysis.reference != none")
    outdir = _outdir(cfg, args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "equilibrium.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if ref.kind is ReferenceKind.DISCRETE:
            dim = cand.dimension
            w.writerow([f"x{j}" for j in range(dim)] + ["weight"])
            for pt, wt in zip(ref.candidates.points, ref.weights):
                w.writerow([_csv_value(v) for v in pt] + [_csv_value(wt)])
        else:
            lo, hi = float(ref.support[0]), float(ref.support[1])
            xs = np.linspace(lo, hi, args.samples)
            name = "r" if ref.kind is ReferenceKind.RADIAL_NEWTONIAN else "x"
            w.writerow([name, "density", "cdf"])
            for x, d, c in zip(xs, ref.density(xs), ref.cdf(xs)):
                w.writerow([_csv_value(x), _csv_value(d), _csv_value(c)])
    (outdir / "equilibrium.json").write_text(
        json.dumps(_reference_summary(ref), indent=2, sort_keys=True) + "\n")
    print(f"V_f={ref.V_f} W_f={ref.W_f}; wrote {path}")
    return EXIT_OK


def cmd_brute(args) -> int:
    cfg = load_config(args.config)
    kernel, fld = build_kernel_field(cfg)
    cand = build_conductor(cfg, fld)
    best = optimal_configuration(kernel, fld, cand, cfg["run.N"])
    outdir = _outdir(cfg, args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    save_points(outdir / "optimal_points.csv", best.points)
    payload = {"N": cfg["run.N"], "energy": _num(best.energy), "indices": best.indices.tolist(),
               "candidates": _cand_summary(cand)}
    (outdir / "optimal.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"optimal weighted energy for N={cfg['run.N']}: {best.energy!r}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="greedy-energy",
                                 description="Greedy energy points with external fields.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="generate a sequence and its diagnostics")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.add_argument("--threads", type=int, default=1, help="scoring threads (0 = auto)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run two configs on the same candidate set")
    p.add_argument("config_a")
    p.add_argument("config_b")
    p.add_argument("--output-dir")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("equilibrium", help="dump reference density/CDF samples")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=1001)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("brute", help="brute-force optimal configuration for run.N")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_brute)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except SelectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SELECTION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
