"""Dual solves and dual-weighted-residual machinery.

All duals for a batch of targets are obtained from one transposed
multigrid solve on the union mesh (they share the left-hand operator).
Indicators weight the union-mesh residual of an injected coarse state by
each dual and accumulate onto the target's own cells through tree
ancestry, which keeps the duals on a strictly richer space than the
states whose residual they weight; weighting a converged residual on its
own space would collapse the estimate (the Galerkin-orthogonality trap,
demonstrated by :func:`galerkin_orthogonality_check`).
"""

import numpy as np

from .assembly import assemble_jacobian, assemble_residual
from .errors import NoConvergence
from .functionals import composite_weights, gradient
from .gmg import GmgHierarchy, gmg_solve
from .leafmesh import ancestor_map, project_to_finer


class DualField:
    """Dual (adjoint) weights for one target, tied to its mesh."""

    __slots__ = ("mesh", "values", "target")

    def __init__(self, mesh, values, target):
        self.mesh = mesh
        self.values = np.asarray(values, dtype=float)
        self.target = target


class IndicatorField:
    """Per-cell refinement indicators for one target.

    ``eta`` accumulates |z . R| per cell (nonnegative, used for marking);
    ``signed`` keeps the signed sums whose total is the raw global
    estimate term z^T R.
    """

    __slots__ = ("mesh", "eta", "signed", "signed_total", "target")

    def __init__(self, mesh, eta, signed, signed_total, target):
        self.mesh = mesh
        self.eta = eta
        self.signed = signed
        self.signed_total = signed_total
        self.target = target


def solve_duals(union_mesh, u_union, fs, targets, tol=1e-8, hierarchy=None,
                max_cycles=200):
    """Simultaneous dual solves: one transposed multi-RHS GMG call.

    Solves J^T z_i = -g_i for every target's gradient g_i at ``u_union``;
    raises NoConvergence with the per-target residual report if any
    column stalls.
    """
    if not targets:
        raise ValueError("targets must be nonempty")
    J = assemble_jacobian(union_mesh, u_union, fs, alpha=0.0)
    rhs = np.column_stack([-gradient(union_mesh, u_union, t).values.ravel()
                           for t in targets])
    if hierarchy is None:
        hierarchy = GmgHierarchy(union_mesh)
    Z, _ = gmg_solve(J, rhs, hierarchy, tol=tol, transpose=True, max_cycles=max_cycles)
    return [DualField(union_mesh, Z[:, k].reshape(-1, 4), t)
            for k, t in enumerate(targets)]


def dwr_indicator(target_mesh, union_dual, u_on_target, fs):
    """Dual-weighted residual indicators on the target's own mesh.

    The coarse state is injected into the dual's (union) mesh, the
    residual is assembled there, each union cell contributes z . R, and
    contributions accumulate onto their ancestor cells of
    ``target_mesh`` (absolute values for eta, signed for the estimate).
    """
    union_mesh = union_dual.mesh
    amap = ancestor_map(union_mesh, target_mesh)
    u_proj = project_to_finer(u_on_target, union_mesh)
    R = assemble_residual(union_mesh, u_proj, fs)
    s = np.einsum("ij,ij->i", union_dual.values, R.values)
    eta = np.zeros(target_mesh.n_cells)
    signed = np.zeros(target_mesh.n_cells)
    np.add.at(eta, amap, np.abs(s))
    np.add.at(signed, amap, s)
    return IndicatorField(target_mesh, eta, signed, float(s.sum()), union_dual.target)


def error_estimate(values, residual_terms, comp):
    """Composite error estimate sum_i C_i * (z_i^T R_i).

    values: per-component functional values (fixing the weights C_i);
    residual_terms: the raw z^T R term per component. Returns the total
    and the per-component contributions.
    """
    C = composite_weights(values, comp)
    terms = [c * r for c, r in zip(C, residual_terms)]
    return float(sum(terms)), terms


def galerkin_orthogonality_check(mesh, u, fs, target, tol=1e-9):
    """|z^T R(u)| with the dual solved on the SAME mesh as ``u``.

    For a converged primal this contracts a converged residual and must
    be tiny; it is the negative control for why duals live on the union
    or refined space.
    """
    R = assemble_residual(mesh, u, fs)
    J = assemble_jacobian(mesh, u, fs, alpha=0.0)
    g = gradient(mesh, u, target)
    try:
        z, _ = gmg_solve(J, -g.values.ravel(), GmgHierarchy(mesh), tol=tol,
                         transpose=True)
    except NoConvergence as e:
        z = e.report.solution
    return abs(float(z @ R.values.ravel()))


def dual_jump_norm(mesh, z_values, marker):
    """L2 norm of inter-cell dual jumps in the ring around a wall.

    The ring is the wall-face cells plus their face neighbors (the wall
    cells alone share no faces on a structured triangulation). Decreasing
    values under uniform refinement are the operational sign of a
    dual-consistent discretization (smooth discrete duals).
    """
    wall_cells = set(mesh.b_cell[mesh.boundary_faces(marker)].tolist())
    ring = set(wall_cells)
    for k in range(len(mesh.f_left)):
        i, j = int(mesh.f_left[k]), int(mesh.f_right[k])
        if i in wall_cells or j in wall_cells:
            ring.add(i)
            ring.add(j)
    acc = 0.0
    for k in range(len(mesh.f_left)):
        i, j = int(mesh.f_left[k]), int(mesh.f_right[k])
        if i in ring and j in ring:
            d = z_values[i] - z_values[j]
            acc += float(d @ d) * mesh.f_length[k]
    return np.sqrt(acc)
