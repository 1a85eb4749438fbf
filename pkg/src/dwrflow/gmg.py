"""Geometric multigrid on the tree-generation hierarchy.

Levels are depth-capped views of the tree; transfers are the
conservative pair (piecewise-constant injection down-up, volume-weighted
averaging up-down). Coarse operators are Galerkin triple products, the
smoother is lexicographic block Gauss-Seidel on 4x4 blocks, and the
coarsest level is solved directly. Any number of right-hand sides share
the level operators and are smoothed in the same sweeps; the transposed
system (dual solves) reuses the identical machinery on A^T.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NoConvergence
from .kernels import bgs_sweep
from .leafmesh import LeafMesh, ancestor_map


class GmgHierarchy:
    """Sequence of mesh levels (finest first) with transfer matrices."""

    def __init__(self, mesh):
        depth = max(len(p) - 1 for p in mesh.cell_paths)
        self.levels = [mesh]
        for d in range(depth - 1, -1, -1):
            self.levels.append(LeafMesh(mesh.tree, max_level=d))
        self.prolong = []
        self.restrict = []
        eye4 = sp.identity(4, format="csr")
        for k in range(len(self.levels) - 1):
            fine, coarse = self.levels[k], self.levels[k + 1]
            amap = ancestor_map(fine, coarse)
            P = sp.coo_matrix((np.ones(fine.n_cells), (np.arange(fine.n_cells), amap)),
                              shape=(fine.n_cells, coarse.n_cells)).tocsr()
            wsum = np.asarray(P.T @ fine.areas)
            R = sp.diags(1.0 / wsum) @ P.T @ sp.diags(fine.areas)
            self.prolong.append(sp.kron(P, eye4).tocsr())
            self.restrict.append(sp.kron(R.tocsr(), eye4).tocsr())

    @property
    def n_levels(self):
        return len(self.levels)


class GmgReport:
    def __init__(self, cycles, rel_residuals, history, solution=None):
        self.cycles = cycles
        self.rel_residuals = rel_residuals
        self.history = history
        self.solution = solution

    def __repr__(self):
        return f"GmgReport(cycles={self.cycles}, rel_residuals={self.rel_residuals})"


def _diag_blocks(bsr):
    n = bsr.shape[0] // 4
    rowids = np.repeat(np.arange(n), np.diff(bsr.indptr))
    mask = bsr.indices == rowids
    if int(mask.sum()) != n:
        raise ValueError("matrix is missing diagonal blocks")
    return bsr.data[mask]


def _to_bsr(mat):
    out = mat.tocsr().tobsr((4, 4))
    out.sort_indices()
    return out


class _LevelOps:
    def __init__(self, A_fine, hierarchy):
        self.mats = [A_fine]
        for k in range(hierarchy.n_levels - 1):
            coarse = hierarchy.restrict[k] @ self.mats[k].tocsr() @ hierarchy.prolong[k]
            self.mats.append(_to_bsr(coarse))
        self.diag_inv = [np.linalg.inv(_diag_blocks(m)) for m in self.mats[:-1]]
        self.coarse_lu = spla.splu(self.mats[-1].tocsc())
        self.hierarchy = hierarchy

    def vcycle(self, b, x, pre, post):
        self._vcycle(0, b, x, pre, post)
        return x

    def _vcycle(self, k, b, x, pre, post):
        A = self.mats[k]
        nk = A.shape[0] // 4
        ncol = b.shape[1]
        if k == len(self.mats) - 1:
            x[:] = self.coarse_lu.solve(b)
            return
        xb = np.ascontiguousarray(x.reshape(nk, 4, ncol))
        bb = np.ascontiguousarray(b.reshape(nk, 4, ncol))
        for _ in range(pre):
            bgs_sweep(A.indptr, A.indices, A.data, self.diag_inv[k], xb, bb)
        x[:] = xb.reshape(-1, ncol)
        r = b - A @ x
        rc = self.hierarchy.restrict[k] @ r
        ec = np.zeros_like(rc)
        self._vcycle(k + 1, rc, ec, pre, post)
        x += self.hierarchy.prolong[k] @ ec
        xb = np.ascontiguousarray(x.reshape(nk, 4, ncol))
        for _ in range(post):
            bgs_sweep(A.indptr, A.indices, A.data, self.diag_inv[k], xb, bb)
        x[:] = xb.reshape(-1, ncol)


def gmg_solve(J, rhs, hierarchy, tol=1e-8, transpose=False, max_cycles=200,
              pre_sweeps=3, post_sweeps=3):
    """Solve J x = rhs (or J^T x = rhs) for one or more right-hand sides.

    rhs: array of shape (4n,) or (4n, k). Returns (x, GmgReport); raises
    NoConvergence (with the partial solution in the report) once every
    column has not reached ``tol`` within ``max_cycles`` V-cycles.
    """
    A = J.matrix if hasattr(J, "matrix") else J
    if transpose:
        A = _to_bsr(A.transpose())
    else:
        A = _to_bsr(A)

    b = np.asarray(rhs, dtype=float)
    squeeze = b.ndim == 1
    if squeeze:
        b = b[:, None]
    bnorm = np.linalg.norm(b, axis=0)
    if np.all(bnorm == 0.0):
        x = np.zeros_like(b)
        return (x[:, 0] if squeeze else x), GmgReport(0, bnorm, [bnorm])

    scale = np.where(bnorm > 0.0, bnorm, 1.0)
    ops = _LevelOps(A, hierarchy)
    x = np.zeros_like(b)
    history = []
    for cycle in range(1, max_cycles + 1):
        ops.vcycle(b, x, pre_sweeps, post_sweeps)
        rel = np.linalg.norm(b - A @ x, axis=0) / scale
        history.append(rel)
        if np.all(rel < tol):
            report = GmgReport(cycle, rel, history)
            return (x[:, 0] if squeeze else x), report
    report = GmgReport(max_cycles, history[-1], history,
                       solution=(x[:, 0] if squeeze else x))
    raise NoConvergence(f"multigrid stalled at rel residuals {history[-1]}", report=report)
