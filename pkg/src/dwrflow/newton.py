"""Regularized Newton iteration for the steady FV system."""

from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble_jacobian, assemble_residual, residual_l1
from .errors import NewtonDiverged, NoConvergence, NonphysicalState
from .gmg import GmgHierarchy, gmg_solve
from .leafmesh import CellField


@dataclass
class NewtonConfig:
    newton_tol: float = 1e-10
    max_newton: int = 200
    alpha: float = 2.0           # per-cell regularization: alpha * |R_i|_L1
    gmg_tol: float = 1e-6
    gmg_max_cycles: int = 200
    max_halvings: int = 8
    divergence_factor: float = 10.0
    divergence_window: int = 5


@dataclass
class NewtonHistory:
    rows: list = field(default_factory=list)  # (iteration, ||R||_L1, damping)
    converged: bool = False

    def residuals(self):
        return [r[1] for r in self.rows]

    def csv_lines(self):
        out = ["iteration,residual_l1,damping"]
        out += [f"{it},{r:.17g},{s:.17g}" for it, r, s in self.rows]
        return out


def solve_steady(mesh, u0, fs, cfg=None, hierarchy=None):
    """Newton/GMG loop from ``u0`` until ||R||_L1 < cfg.newton_tol.

    Returns (u, NewtonHistory). Raises NewtonDiverged when the residual
    grows tenfold over five consecutive accepted steps or no valid step
    can be found; a NonphysicalState trial state just deepens the
    damping.
    """
    cfg = cfg or NewtonConfig()
    u = u0.copy()
    R = assemble_residual(mesh, u, fs)
    r1 = residual_l1(R)
    hist = NewtonHistory(rows=[(0, r1, 1.0)])
    if r1 < cfg.newton_tol:
        hist.converged = True
        return u, hist

    if hierarchy is None:
        hierarchy = GmgHierarchy(mesh)

    for it in range(1, cfg.max_newton + 1):
        J = assemble_jacobian(mesh, u, fs, alpha=cfg.alpha)
        rhs = -R.values.ravel()
        try:
            du, _ = gmg_solve(J, rhs, hierarchy, tol=cfg.gmg_tol,
                              max_cycles=cfg.gmg_max_cycles)
        except NoConvergence:
            try:
                du, _ = gmg_solve(J, rhs, hierarchy, tol=cfg.gmg_tol,
                                  max_cycles=5 * cfg.gmg_max_cycles)
            except NoConvergence as e2:
                du = e2.report.solution  # best effort; damping limits the risk
        du = du.reshape(-1, 4)

        s = 1.0
        accepted = None
        best = None
        for _ in range(cfg.max_halvings + 1):
            trial = CellField(mesh, u.values + s * du)
            try:
                Rt = assemble_residual(mesh, trial, fs)
            except NonphysicalState:
                s *= 0.5
                continue
            rt = residual_l1(Rt)
            if rt < (1.0 - 1e-4 * s) * r1:
                accepted = (trial, Rt, rt, s)
                break
            if best is None or rt < best[2]:
                best = (trial, Rt, rt, s)
            s *= 0.5
        if accepted is None:
            if best is None:
                raise NewtonDiverged("no physical state along the Newton direction",
                                     history=hist)
            accepted = best

        u, R, r1, s = accepted
        hist.rows.append((it, r1, s))
        if r1 < cfg.newton_tol:
            hist.converged = True
            return u, hist

        w = cfg.divergence_window
        if len(hist.rows) > w:
            if r1 > cfg.divergence_factor * hist.rows[-w - 1][1]:
                raise NewtonDiverged(
                    f"residual grew {cfg.divergence_factor}x over {w} steps", history=hist)

    return u, hist
