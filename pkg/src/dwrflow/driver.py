"""Multi-mesh adaptation driver and the single-mesh baseline.

Each target functional owns a mesh. Every round the per-target trees are
merged into the union tree, the primal is solved there, all duals come
from one simultaneous transposed solve on the uniformly refined union
(the merge of the targets' refined spaces), and each target marks and
refines its own mesh from its own dual-weighted indicators. Duals must
live on that strictly richer space: weighted against states on any
target's own space, a converged residual returns zero indicators
(Galerkin orthogonality), and the bare union coincides with the target
meshes wherever the targets agree, which starves the marking there.

The baseline path adapts one shared mesh with a single dual whose
right-hand side is the weighted sum of the target gradients.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .adjoint import DualField, dwr_indicator, error_estimate, solve_duals
from .assembly import assemble_jacobian, freestream_field
from .errors import BudgetExceeded, NewtonDiverged, NoConvergence
from .functionals import composite_evaluate, evaluate, gradient
from .gmg import GmgHierarchy, gmg_solve
from .leafmesh import LeafMesh, project_to_finer, restrict_to_coarser
from .newton import NewtonConfig, solve_steady
from .tree import union_all


@dataclass
class AdaptationConfig:
    theta: float = 0.2
    max_iterations: int = 5
    tol: float = 0.0                 # stop when |composite_k - composite_{k-1}| < tol
    max_cells: int = 500_000
    dual_tol: float = 1e-9
    dual_state: str = "resolve"      # "resolve" or "project" on the union mesh
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must be in (0, 1)")
        if self.tol < 0.0:
            raise ValueError("tol must be >= 0")
        if self.dual_state not in ("resolve", "project"):
            raise ValueError("dual_state must be 'resolve' or 'project'")


@dataclass
class IterationRecord:
    k: int
    cells_per_target: list
    union_cells: int
    values: list
    composite: float
    estimates: list
    estimate_total: float
    marked: list
    newton_iterations: int
    wallclock: float
    diverged: bool = False

    def row(self):
        out = {"k": self.k, "cells_per_target": self.cells_per_target,
               "union_cells": self.union_cells, "values": self.values,
               "composite": self.composite, "estimates": self.estimates,
               "estimate_total": self.estimate_total,
               "marked": [list(m) for m in self.marked],
               "newton_iterations": self.newton_iterations,
               "diverged": self.diverged}
        return out


@dataclass
class AdaptationState:
    """Final loop state plus the per-iteration history."""

    iteration: int
    trees: list
    union_tree: object
    u_union: object
    duals: list
    indicators: list
    records: list

    def composites(self):
        return [r.composite for r in self.records]

    def values_per_target(self):
        return list(map(list, zip(*[r.values for r in self.records])))


def mark_elements(indicators, theta):
    """Cell indices carrying the top-``theta`` fraction of indicator mass.

    Cells are taken in decreasing indicator order (ties broken by lowest
    cell id) until their cumulative mass reaches theta * total.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must be in (0, 1)")
    eta = indicators.eta
    total = float(eta.sum())
    if total <= 0.0:
        return []
    order = np.lexsort((np.arange(len(eta)), -eta))
    csum = np.cumsum(eta[order])
    cut = int(np.searchsorted(csum, theta * total, side="left"))
    return sorted(int(c) for c in order[:cut + 1])


def _marked_node_ids(mesh, cells):
    return [mesh.cell_nodes[c] for c in cells]


def _solve_required(mesh, u0, fs, cfg):
    u, hist = solve_steady(mesh, u0, fs, cfg)
    if not hist.converged:
        raise NoConvergence(
            f"Newton did not reach {cfg.newton_tol} in {cfg.max_newton} iterations "
            f"({mesh.n_cells} cells, final {hist.residuals()[-1]:.3e})")
    return u, hist


def initial_per_target_refine(root_tree, targets, fs, cfg):
    """Stage 0: one root solve, per-target duals on the refined root,
    independent marking; returns the per-target trees plus the root
    solution and composite-ready values."""
    root_mesh = LeafMesh(root_tree)
    u_root, hist = _solve_required(root_mesh, freestream_field(root_mesh, fs), fs, cfg.newton)
    fine_mesh = LeafMesh(root_tree.uniform_refine(1))
    u_proj = project_to_finer(u_root, fine_mesh)
    duals = solve_duals(fine_mesh, u_proj, fs, targets, tol=cfg.dual_tol)
    trees = []
    for dual in duals:
        ind = dwr_indicator(root_mesh, dual, u_root, fs)
        cells = mark_elements(ind, cfg.theta)
        trees.append(root_tree.refine_cells(_marked_node_ids(root_mesh, cells)))
    return trees, root_mesh, u_root




def adapt_loop(root_tree, comp, fs, cfg=None):
    """Multi-mesh adaptation of a composite functional (Algorithm 1 shape).

    Returns the AdaptationState whose records hold one row per round.
    Stops on the functional-change test, the iteration cap, or the cell
    budget; a Newton divergence ends the loop with the history so far.
    """
    cfg = cfg or AdaptationConfig()
    targets = comp.targets
    trees, root_mesh, u_root = initial_per_target_refine(root_tree, targets, fs, cfg)

    prev_composite = composite_evaluate(
        [evaluate(root_mesh, u_root, t) for t in targets], comp)
    u_prev = u_root
    records = []
    state = None

    for k in range(cfg.max_iterations):
        t0 = time.perf_counter()
        union_tree = union_all(trees)
        union_mesh = LeafMesh(union_tree)
        if union_mesh.n_cells > cfg.max_cells:
            raise BudgetExceeded(f"union mesh has {union_mesh.n_cells} cells "
                                 f"(budget {cfg.max_cells})")
        for t in trees:
            assert union_tree.refines(t)

        u0 = project_to_finer(u_prev, union_mesh)
        newton_iters = 0
        diverged = False
        if cfg.dual_state == "resolve":
            try:
                u_union, hist = _solve_required(union_mesh, u0, fs, cfg.newton)
                newton_iters = len(hist.rows) - 1
            except NewtonDiverged as e:
                records.append(IterationRecord(
                    k, [LeafMesh(t).n_cells for t in trees], union_mesh.n_cells,
                    [], float("nan"), [], float("nan"), [], 0,
                    time.perf_counter() - t0, diverged=True))
                break
        else:
            u_union = u0

        dual_mesh = LeafMesh(union_tree.uniform_refine(1))
        u_dual = project_to_finer(u_union, dual_mesh)
        duals = solve_duals(dual_mesh, u_dual, fs, targets, tol=cfg.dual_tol)

        indicators = []
        marked = []
        target_meshes = [LeafMesh(t) for t in trees]
        for i, dual in enumerate(duals):
            u_i = restrict_to_coarser(u_union, target_meshes[i])
            ind = dwr_indicator(target_meshes[i], dual, u_i, fs)
            indicators.append(ind)
            marked.append(mark_elements(ind, cfg.theta))

        values = [evaluate(union_mesh, u_union, t) for t in targets]
        composite = composite_evaluate(values, comp)
        est_total, est_terms = error_estimate(values, [ind.signed_total for ind in indicators],
                                              comp)
        records.append(IterationRecord(
            k, [m.n_cells for m in target_meshes], union_mesh.n_cells,
            values, composite, est_terms, est_total, marked, newton_iters,
            time.perf_counter() - t0))
        state = AdaptationState(k, trees, union_tree, u_union, duals, indicators, records)

        if abs(composite - prev_composite) < cfg.tol:
            break
        prev_composite = composite
        if k == cfg.max_iterations - 1:
            break
        trees = [trees[i].refine_cells(_marked_node_ids(target_meshes[i], marked[i]))
                 for i in range(len(trees))]
        u_prev = u_union

    if state is None:
        state = AdaptationState(len(records) - 1, trees, None, None, [], [], records)
    return state


def single_mesh_baseline(root_tree, targets, weights, fs, cfg=None):
    """Classic single-mesh DWR with the combined functional sum_i w_i F_i.

    One mesh for all targets and one dual per round, solved on the
    uniformly refined mesh with the weighted-sum right-hand side.
    """
    if len(weights) != len(targets):
        raise ValueError("one weight per target required")
    cfg = cfg or AdaptationConfig()
    tree = root_tree
    u_prev = None
    prev_combined = None
    records = []
    state = None

    for k in range(cfg.max_iterations):
        t0 = time.perf_counter()
        mesh = LeafMesh(tree)
        if mesh.n_cells > cfg.max_cells:
            raise BudgetExceeded(f"mesh has {mesh.n_cells} cells (budget {cfg.max_cells})")
        u0 = freestream_field(mesh, fs) if u_prev is None else project_to_finer(u_prev, mesh)
        try:
            u, hist = _solve_required(mesh, u0, fs, cfg.newton)
        except NewtonDiverged:
            records.append(IterationRecord(
                k, [mesh.n_cells] * len(targets), mesh.n_cells, [], float("nan"),
                [], float("nan"), [], 0, time.perf_counter() - t0, diverged=True))
            break

        fine_mesh = LeafMesh(tree.uniform_refine(1))
        u_proj = project_to_finer(u, fine_mesh)
        J = assemble_jacobian(fine_mesh, u_proj, fs, alpha=0.0)
        rhs = np.zeros(4 * fine_mesh.n_cells)
        for w, t in zip(weights, targets):
            rhs -= w * gradient(fine_mesh, u_proj, t).values.ravel()
        z, _ = gmg_solve(J, rhs, GmgHierarchy(fine_mesh), tol=cfg.dual_tol, transpose=True)
        dual = DualField(fine_mesh, z.reshape(-1, 4), None)
        ind = dwr_indicator(mesh, dual, u, fs)
        cells = mark_elements(ind, cfg.theta)

        values = [evaluate(mesh, u, t) for t in targets]
        combined = float(sum(w * v for w, v in zip(weights, values)))
        records.append(IterationRecord(
            k, [mesh.n_cells] * len(targets), mesh.n_cells, values, combined,
            [ind.signed_total], ind.signed_total, [cells], len(hist.rows) - 1,
            time.perf_counter() - t0))
        state = AdaptationState(k, [tree], tree, u, [dual], [ind], records)

        if prev_combined is not None and abs(combined - prev_combined) < cfg.tol:
            break
        prev_combined = combined
        if k == cfg.max_iterations - 1:
            break
        tree = tree.refine_cells(_marked_node_ids(mesh, cells))
        u_prev = u

    return state
