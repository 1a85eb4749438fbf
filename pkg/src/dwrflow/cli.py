"""Command-line entry points: solve, adapt, baseline, gen-mesh, export."""

import argparse
import json
import os
import sys
import time

import numpy as np

from .assembly import freestream_field
from .config import load_config
from .driver import adapt_loop, single_mesh_baseline
from .errors import (BudgetExceeded, ConfigError, DwrflowError, IoError,
                     NewtonDiverged, NoConvergence, NonphysicalState)
from .leafmesh import LeafMesh
from .meshgen import builtin_airfoil_omesh, builtin_channel_bump
from .meshio import read_meshfile, write_meshfile
from .newton import solve_steady
from .vtkio import export_vtk, solution_cell_data

EXIT_CODES = (
    (ConfigError, 3),
    (NonphysicalState, 4),
    (NewtonDiverged, 5),
    (NoConvergence, 6),
    (BudgetExceeded, 7),
    (IoError, 8),
)


def _outdir(cfg):
    path = cfg.output_dir()
    os.makedirs(path, exist_ok=True)
    return path


def _write_manifest(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _history_csv(records, n_targets, names):
    cols = ["k"]
    cols += [f"cells_{n}" for n in names]
    cols += ["union_cells"]
    cols += [f"F_{n}" for n in names]
    cols += ["composite"]
    cols += [f"estimate_{n}" for n in names]
    cols += ["wallclock"]
    lines = [",".join(cols)]
    for r in records:
        row = [str(r.k)]
        row += [str(c) for c in r.cells_per_target]
        row += [str(r.union_cells)]
        row += [f"{v:.17g}" for v in r.values] or []
        if not r.values:
            row += ["nan"] * n_targets
        row += [f"{r.composite:.17g}"]
        ests = r.estimates if r.estimates else [float("nan")] * n_targets
        row += [f"{e:.17g}" for e in ests]
        row += [f"{r.wallclock:.6f}"]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _record_payload(records):
    return [r.row() | {"wallclock": r.wallclock} for r in records]


def cmd_solve(args):
    cfg = load_config(args.config)
    fs = cfg.freestream()
    tree = cfg.build_tree()
    mesh = LeafMesh(tree)
    t0 = time.perf_counter()
    u, hist = solve_steady(mesh, freestream_field(mesh, fs), fs, cfg.newton())
    wall = time.perf_counter() - t0
    out = _outdir(cfg)
    with open(os.path.join(out, "history.csv"), "w") as fh:
        fh.write("\n".join(hist.csv_lines()) + "\n")
    write_meshfile(os.path.join(out, "mesh.msh"), mesh, tree.geometry)
    np.savez(os.path.join(out, "fields.npz"), u=u.values)
    if cfg.sections["output"]["vtk"]:
        export_vtk(os.path.join(out, "solution.vtk"), mesh,
                   solution_cell_data(mesh, u, fs))
    _write_manifest(os.path.join(out, "manifest.json"), {
        "command": "solve", "seed": args.seed, "config": cfg.echo(),
        "cells": mesh.n_cells, "converged": hist.converged,
        "newton_iterations": len(hist.rows) - 1,
        "final_residual": hist.residuals()[-1],
        "timing": {"wallclock_total": wall},
    })
    if not hist.converged:
        raise NoConvergence(f"steady solve stalled at {hist.residuals()[-1]:.3e}")
    print(f"solve: {mesh.n_cells} cells, {len(hist.rows) - 1} Newton iterations, "
          f"residual {hist.residuals()[-1]:.3e} -> {out}")
    return 0


def _run_adaptive(args, baseline):
    cfg = load_config(args.config)
    fs = cfg.freestream()
    tree = cfg.build_tree()
    targets = cfg.targets()
    if not targets:
        raise ConfigError([(None, "at least one [target] block is required")])
    names = [t.name.replace(":", "_") for t in targets]
    acfg = cfg.adaptation()
    t0 = time.perf_counter()
    if baseline:
        state = single_mesh_baseline(tree, targets, cfg.weights(), fs, acfg)
    else:
        state = adapt_loop(tree, cfg.composite(), fs, acfg)
    wall = time.perf_counter() - t0
    out = _outdir(cfg)
    tag = "baseline" if baseline else "adapt"
    with open(os.path.join(out, f"{tag}_history.csv"), "w") as fh:
        fh.write(_history_csv(state.records, len(targets), names))
    _write_manifest(os.path.join(out, f"{tag}_manifest.json"), {
        "command": tag, "seed": args.seed, "config": cfg.echo(),
        "records": _record_payload(state.records),
        "timing": {"wallclock_total": wall},
    })
    if cfg.sections["output"]["vtk"] and state.u_union is not None:
        union_mesh = state.u_union.mesh
        export_vtk(os.path.join(out, f"{tag}_solution.vtk"), union_mesh,
                   solution_cell_data(union_mesh, state.u_union, fs))
        for name, dual in zip(names, state.duals):
            export_vtk(os.path.join(out, f"{tag}_dual_{name}.vtk"), dual.mesh,
                       {"dual": dual.values})
        for name, ind in zip(names, state.indicators):
            export_vtk(os.path.join(out, f"{tag}_indicator_{name}.vtk"), ind.mesh,
                       {"eta": ind.eta, "signed": ind.signed})
    last = state.records[-1]
    print(f"{tag}: {len(state.records)} rounds, union {last.union_cells} cells, "
          f"composite {last.composite:.8g} -> {out}")
    return 0


def cmd_adapt(args):
    return _run_adaptive(args, baseline=False)


def cmd_baseline(args):
    return _run_adaptive(args, baseline=True)


def cmd_gen_mesh(args):
    if args.case == "bump":
        tree = builtin_channel_bump(args.nx, args.ny, args.bump_height)
    else:
        tree = builtin_airfoil_omesh(args.code, args.n_around, args.n_radial,
                                     args.outer_radius, chord=args.chord)
    if args.refine:
        tree = tree.uniform_refine(args.refine)
    mesh = LeafMesh(tree)
    write_meshfile(args.output, mesh, tree.geometry)
    print(f"gen-mesh: wrote {mesh.n_cells} cells to {args.output}")
    return 0


def cmd_export(args):
    tree = read_meshfile(args.mesh)
    mesh = LeafMesh(tree)
    fields = {}
    if args.fields:
        data = np.load(args.fields)
        for name in data.files:
            fields[name] = data[name]
    export_vtk(args.output, mesh, fields)
    print(f"export: wrote {mesh.n_cells} cells to {args.output}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="dwrflow",
                                     description="Steady Euler FV solver with "
                                     "multi-mesh goal-oriented adaptation")
    parser.add_argument("--seed", type=int, default=0,
                        help="recorded in the run manifest (runs are deterministic)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="steady solve on the configured mesh")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("adapt", help="multi-mesh adaptation loop")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("baseline", help="single-mesh combined-functional baseline")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("gen-mesh", help="write a builtin mesh to a mesh file")
    p.add_argument("--case", choices=("bump", "naca"), required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--nx", type=int, default=16)
    p.add_argument("--ny", type=int, default=8)
    p.add_argument("--bump-height", type=float, default=0.05)
    p.add_argument("--code", default="0012")
    p.add_argument("--n-around", type=int, default=64)
    p.add_argument("--n-radial", type=int, default=12)
    p.add_argument("--outer-radius", type=float, default=35.0)
    p.add_argument("--chord", type=float, default=1.0)
    p.add_argument("--refine", type=int, default=0)
    p.set_defaults(func=cmd_gen_mesh)

    p = sub.add_parser("export", help="convert a saved mesh/fields pair to VTK")
    p.add_argument("--mesh", required=True)
    p.add_argument("--fields")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return args.func(args)
    except DwrflowError as e:
        for cls, code in EXIT_CODES:
            if isinstance(e, cls):
                print(f"error: {e}", file=sys.stderr)
                return code
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
