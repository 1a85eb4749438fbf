"""Residual and Jacobian assembly for the piecewise-constant FV scheme.

The steady residual of cell i is the sum of numerical fluxes over its
faces times the face lengths. Interior faces use the two adjacent cell
states; wall faces a mirror ghost; far-field faces a characteristic
ghost. The Jacobian differentiates the same fluxes with the dissipation
coefficient frozen, folds the ghost-state chain rule into the boundary
blocks, and adds ``alpha * ||R||_L1`` to the diagonal.
"""

import numpy as np
import scipy.sparse as sp

from . import euler
from .errors import NonphysicalState, UnknownBoundaryMarker
from .leafmesh import CellField

WALL = "wall"
FARFIELD = "farfield"


def freestream_field(mesh, fs):
    return CellField.constant(mesh, fs.state())


def residual_l1(R):
    values = R.values if isinstance(R, CellField) else R
    return float(np.abs(values).sum())


def _check_field(mesh, u):
    if u.mesh is not mesh:
        raise ValueError("field does not belong to this mesh")
    return u.values


def _boundary_kind(marker):
    # prefix match so multi-body meshes can tag walls per body
    # ("wall_main", "wall_flap", ...) and still get the mirror condition
    if marker.startswith(WALL):
        return WALL
    if marker.startswith(FARFIELD):
        return FARFIELD
    raise UnknownBoundaryMarker(f"no boundary treatment for marker {marker!r}")


def face_lambdas(mesh, u, fs):
    """Dissipation coefficients per (interior, wall, far-field) face.

    Used to freeze the LF dissipation in finite-difference checks.
    """
    uv = _check_field(mesh, u)
    lam_int = euler.dissipation_speed(uv[mesh.f_left], uv[mesh.f_right],
                                      mesh.f_normal, fs.gamma)
    lams = {}
    for marker in mesh.markers:
        idx = mesh.boundary_faces(marker)
        ub = uv[mesh.b_cell[idx]]
        nb = mesh.b_normal[idx]
        if _boundary_kind(marker) == WALL:
            ghost = euler.wall_ghost(ub, nb)
        else:
            ghost = euler.farfield_ghost(ub, nb, fs)
        lams[marker] = euler.dissipation_speed(ub, ghost, nb, fs.gamma)
    return lam_int, lams


def assemble_residual(mesh, u, fs, frozen=None):
    """Face-flux sums per cell as a CellField.

    ``frozen`` (from :func:`face_lambdas`) pins the dissipation
    coefficients; the default recomputes them from the current states.
    """
    uv = _check_field(mesh, u)
    gamma = fs.gamma
    try:
        euler.pressure(uv, gamma)
    except NonphysicalState as e:
        raise NonphysicalState(f"invalid state in cell {e.cell}", cell=e.cell) from None

    R = np.zeros((mesh.n_cells, 4))
    lam_int = frozen[0] if frozen is not None else None
    flux = euler.lax_friedrichs_flux(uv[mesh.f_left], uv[mesh.f_right],
                                     mesh.f_normal, gamma, lam=lam_int)
    w = flux * mesh.f_length[:, None]
    np.add.at(R, mesh.f_left, w)
    np.add.at(R, mesh.f_right, -w)

    for marker in mesh.markers:
        idx = mesh.boundary_faces(marker)
        ub = uv[mesh.b_cell[idx]]
        nb = mesh.b_normal[idx]
        if _boundary_kind(marker) == WALL:
            ghost = euler.wall_ghost(ub, nb)
        else:
            ghost = euler.farfield_ghost(ub, nb, fs)
        lam = frozen[1][marker] if frozen is not None else None
        bflux = euler.lax_friedrichs_flux(ub, ghost, nb, gamma, lam=lam)
        np.add.at(R, mesh.b_cell[idx], bflux * mesh.b_length[idx][:, None])
    return CellField(mesh, R)


class SparseJacobian:
    """Block-sparse residual Jacobian plus the diagonal regularization.

    ``reg_weight`` records the largest per-cell regularization weight.
    """

    __slots__ = ("mesh", "matrix", "reg_weight")

    def __init__(self, mesh, matrix, reg_weight):
        self.mesh = mesh
        self.matrix = matrix
        self.reg_weight = reg_weight

    @property
    def shape(self):
        return self.matrix.shape


def assemble_jacobian(mesh, u, fs, alpha=0.0, frozen=None):
    """Frozen-dissipation Jacobian of :func:`assemble_residual`.

    Cell i's diagonal block gets ``alpha * |R_i(u)|_L1`` added (per-cell
    residual scaling; the weights vanish as the residual converges).
    """
    uv = _check_field(mesh, u)
    gamma = fs.gamma
    n = mesh.n_cells

    diag = np.zeros((n, 4, 4))
    rows = [np.arange(n, dtype=np.int64)]
    cols = [np.arange(n, dtype=np.int64)]

    lam_int = frozen[0] if frozen is not None else None
    JL, JR = euler.flux_jacobians(uv[mesh.f_left], uv[mesh.f_right],
                                  mesh.f_normal, gamma, lam=lam_int)
    lf = mesh.f_length[:, None, None]
    np.add.at(diag, mesh.f_left, JL * lf)
    np.add.at(diag, mesh.f_right, -JR * lf)
    blocks = [JR * lf, -JL * lf]
    rows += [mesh.f_left, mesh.f_right]
    cols += [mesh.f_right, mesh.f_left]

    for marker in mesh.markers:
        idx = mesh.boundary_faces(marker)
        if idx.size == 0:
            continue
        ub = uv[mesh.b_cell[idx]]
        nb = mesh.b_normal[idx]
        lb = mesh.b_length[idx][:, None, None]
        lam = frozen[1][marker] if frozen is not None else None
        if _boundary_kind(marker) == WALL:
            ghost = euler.wall_ghost(ub, nb)
            BL, BR = euler.flux_jacobians(ub, ghost, nb, gamma, lam=lam)
            G = euler.wall_ghost_jacobian(nb)
            block = (BL + np.einsum("fij,fjk->fik", BR, G)) * lb
        else:
            ghost = euler.farfield_ghost(ub, nb, fs)
            BL, BR = euler.flux_jacobians(ub, ghost, nb, gamma, lam=lam)
            G = np.empty((idx.size, 4, 4))
            for k in range(idx.size):
                G[k] = euler.farfield_ghost_jacobian(ub[k], nb[k], fs)
            block = (BL + np.einsum("fij,fjk->fik", BR, G)) * lb
        np.add.at(diag, mesh.b_cell[idx], block)

    reg = 0.0
    if alpha:
        Rv = assemble_residual(mesh, u, fs, frozen=frozen).values
        w = alpha * np.abs(Rv).sum(axis=1)
        diag[:, range(4), range(4)] += w[:, None]
        reg = float(w.max())

    all_rows = np.concatenate(rows)
    all_cols = np.concatenate(cols)
    all_blocks = np.concatenate([diag] + blocks)

    shape = all_blocks.shape
    ar = np.broadcast_to(4 * all_rows[:, None, None] + np.arange(4)[None, :, None], shape).ravel()
    ac = np.broadcast_to(4 * all_cols[:, None, None] + np.arange(4)[None, None, :], shape).ravel()
    mat = sp.coo_matrix((all_blocks.ravel(), (ar, ac)), shape=(4 * n, 4 * n))
    bsr = mat.tocsr().tobsr((4, 4))
    bsr.sort_indices()
    return SparseJacobian(mesh, bsr, reg)
