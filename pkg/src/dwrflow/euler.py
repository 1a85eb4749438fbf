"""Compressible Euler physics: states, fluxes, exact Jacobians, ghost states.

Conservative states are plain numpy arrays with components
``(rho, rho*ux, rho*uy, E)`` on the last axis; every function accepts a
single state ``(4,)`` or a batch ``(n, 4)``.  All operations are pure.
"""

import numpy as np

from .errors import NonphysicalState

GAMMA_DEFAULT = 1.4

# States below these floors are treated as nonphysical rather than clipped;
# silent clipping would corrupt adjoint consistency.
RHO_FLOOR = 1e-12
P_FLOOR = 1e-12


class FreestreamSpec:
    """Far-field flow description: Mach number, attack angle (radians),
    static pressure, density and heat-capacity ratio."""

    def __init__(self, mach, attack_angle=0.0, p_inf=1.0, rho_inf=1.4, gamma=GAMMA_DEFAULT):
        if mach <= 0 or p_inf <= 0 or rho_inf <= 0 or gamma <= 1:
            raise ValueError("freestream requires mach, p_inf, rho_inf > 0 and gamma > 1")
        self.mach = float(mach)
        self.attack_angle = float(attack_angle)
        self.p_inf = float(p_inf)
        self.rho_inf = float(rho_inf)
        self.gamma = float(gamma)

    @property
    def sound_speed(self):
        return np.sqrt(self.gamma * self.p_inf / self.rho_inf)

    @property
    def velocity(self):
        v = self.mach * self.sound_speed
        return np.array([v * np.cos(self.attack_angle), v * np.sin(self.attack_angle)])

    def state(self):
        """Conservative 4-vector of the uniform far-field flow."""
        vx, vy = self.velocity
        E = self.p_inf / (self.gamma - 1.0) + 0.5 * self.rho_inf * (vx * vx + vy * vy)
        return np.array([self.rho_inf, self.rho_inf * vx, self.rho_inf * vy, E])

    def __repr__(self):
        return (f"FreestreamSpec(mach={self.mach}, attack_angle={self.attack_angle}, "
                f"p_inf={self.p_inf}, rho_inf={self.rho_inf}, gamma={self.gamma})")


def _bad_index(mask):
    idx = np.nonzero(np.atleast_1d(mask))[0]
    return int(idx[0]) if idx.size else None


def pressure(u, gamma=GAMMA_DEFAULT):
    """Static pressure from the ideal-gas closure.

    Raises NonphysicalState when density or the resulting pressure falls
    below the vacuum floor.
    """
    u = np.asarray(u, dtype=float)
    rho = u[..., 0]
    if np.any(rho < RHO_FLOOR):
        raise NonphysicalState("nonpositive density", cell=_bad_index(rho < RHO_FLOOR))
    ke = 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho
    p = (gamma - 1.0) * (u[..., 3] - ke)
    if np.any(p < P_FLOOR):
        raise NonphysicalState("nonpositive pressure", cell=_bad_index(p < P_FLOOR))
    return p if p.ndim else float(p)


def primitives(u, gamma=GAMMA_DEFAULT):
    """(rho, vx, vy, p) with the same validation as :func:`pressure`."""
    u = np.asarray(u, dtype=float)
    p = pressure(u, gamma)
    rho = u[..., 0]
    return rho, u[..., 1] / rho, u[..., 2] / rho, np.asarray(p)


def sound_speed(u, gamma=GAMMA_DEFAULT):
    rho, _, _, p = primitives(u, gamma)
    return np.sqrt(gamma * p / rho)


def physical_flux(u, gamma=GAMMA_DEFAULT):
    """Flux tensor F(u), shape ``(..., 4, 2)``: columns are x- and y-fluxes."""
    u = np.asarray(u, dtype=float)
    rho, vx, vy, p = primitives(u, gamma)
    F = np.empty(u.shape[:-1] + (4, 2))
    F[..., 0, 0] = u[..., 1]
    F[..., 0, 1] = u[..., 2]
    F[..., 1, 0] = u[..., 1] * vx + p
    F[..., 1, 1] = u[..., 1] * vy
    F[..., 2, 0] = u[..., 2] * vx
    F[..., 2, 1] = u[..., 2] * vy + p
    F[..., 3, 0] = vx * (u[..., 3] + p)
    F[..., 3, 1] = vy * (u[..., 3] + p)
    return F


def normal_flux(u, n, gamma=GAMMA_DEFAULT):
    """F(u)·n without forming the full tensor."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    rho, vx, vy, p = primitives(u, gamma)
    vn = vx * n[..., 0] + vy * n[..., 1]
    H = np.empty(np.broadcast_shapes(u.shape[:-1], n.shape[:-1]) + (4,))
    H[..., 0] = rho * vn
    H[..., 1] = u[..., 1] * vn + p * n[..., 0]
    H[..., 2] = u[..., 2] * vn + p * n[..., 1]
    H[..., 3] = vn * (u[..., 3] + p)
    return H


def max_wave_speed(u, n, gamma=GAMMA_DEFAULT):
    """|v·n| + c, the fastest signal speed through a face of normal n."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    rho, vx, vy, p = primitives(u, gamma)
    vn = vx * n[..., 0] + vy * n[..., 1]
    s = np.abs(vn) + np.sqrt(gamma * p / rho)
    return s if s.ndim else float(s)


def dissipation_speed(uL, uR, n, gamma=GAMMA_DEFAULT):
    """Dissipation coefficient of the Lax-Friedrichs flux.

    Upper bound on both states' signal speeds, split into normal-velocity
    and acoustic parts: max(|vnL|, |vnR|) + max(cL, cR).
    """
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    n = np.asarray(n, dtype=float)
    rhoL, vxL, vyL, pL = primitives(uL, gamma)
    rhoR, vxR, vyR, pR = primitives(uR, gamma)
    vnL = np.abs(vxL * n[..., 0] + vyL * n[..., 1])
    vnR = np.abs(vxR * n[..., 0] + vyR * n[..., 1])
    c = np.maximum(np.sqrt(gamma * pL / rhoL), np.sqrt(gamma * pR / rhoR))
    lam = np.maximum(vnL, vnR) + c
    return lam if lam.ndim else float(lam)


def lax_friedrichs_flux(uL, uR, n, gamma=GAMMA_DEFAULT, lam=None):
    """Lax-Friedrichs numerical flux H(uL, uR, n).

    ``lam`` overrides the dissipation coefficient (used by the
    finite-difference Jacobian checks, which freeze it).
    """
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    if lam is None:
        lam = dissipation_speed(uL, uR, n, gamma)
    lam = np.asarray(lam, dtype=float)
    central = 0.5 * (normal_flux(uL, n, gamma) + normal_flux(uR, n, gamma))
    return central - 0.5 * lam[..., None] * (uR - uL)


def normal_flux_jacobian(u, n, gamma=GAMMA_DEFAULT):
    """Exact Jacobian A = d(F(u)·n)/du, shape ``(..., 4, 4)``."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    rho, vx, vy, p = primitives(u, gamma)
    nx, ny = n[..., 0], n[..., 1]
    g1 = gamma - 1.0
    vn = vx * nx + vy * ny
    V2 = vx * vx + vy * vy
    phi = 0.5 * g1 * V2
    Ht = (u[..., 3] + p) / rho
    A = np.empty(np.broadcast_shapes(u.shape[:-1], n.shape[:-1]) + (4, 4))
    A[..., 0, 0] = 0.0
    A[..., 0, 1] = nx
    A[..., 0, 2] = ny
    A[..., 0, 3] = 0.0
    A[..., 1, 0] = phi * nx - vx * vn
    A[..., 1, 1] = vn + (2.0 - gamma) * vx * nx
    A[..., 1, 2] = vx * ny - g1 * vy * nx
    A[..., 1, 3] = g1 * nx
    A[..., 2, 0] = phi * ny - vy * vn
    A[..., 2, 1] = vy * nx - g1 * vx * ny
    A[..., 2, 2] = vn + (2.0 - gamma) * vy * ny
    A[..., 2, 3] = g1 * ny
    A[..., 3, 0] = (phi - Ht) * vn
    A[..., 3, 1] = Ht * nx - g1 * vx * vn
    A[..., 3, 2] = Ht * ny - g1 * vy * vn
    A[..., 3, 3] = gamma * vn
    return A


def flux_jacobians(uL, uR, n, gamma=GAMMA_DEFAULT, lam=None):
    """Frozen-dissipation Jacobians (dH/duL, dH/duR) of the LF flux.

    The dissipation coefficient is treated as a constant; only the central
    and jump terms are differentiated.
    """
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    if lam is None:
        lam = dissipation_speed(uL, uR, n, gamma)
    lam = np.asarray(lam, dtype=float)
    eye = np.eye(4)
    JL = 0.5 * normal_flux_jacobian(uL, n, gamma) + 0.5 * lam[..., None, None] * eye
    JR = 0.5 * normal_flux_jacobian(uR, n, gamma) - 0.5 * lam[..., None, None] * eye
    return JL, JR


def pressure_gradient(u, gamma=GAMMA_DEFAULT):
    """dp/du = (gamma-1) * (|v|^2/2, -vx, -vy, 1), shape ``(..., 4)``."""
    u = np.asarray(u, dtype=float)
    rho, vx, vy, _ = primitives(u, gamma)
    g1 = gamma - 1.0
    out = np.empty(u.shape)
    out[..., 0] = 0.5 * g1 * (vx * vx + vy * vy)
    out[..., 1] = -g1 * vx
    out[..., 2] = -g1 * vy
    out[..., 3] = g1
    return out


def wall_ghost(u, n):
    """Mirror-reflection ghost state: velocity reflected about the wall plane."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    mn = u[..., 1] * n[..., 0] + u[..., 2] * n[..., 1]
    g = u.copy()
    g[..., 1] -= 2.0 * mn * n[..., 0]
    g[..., 2] -= 2.0 * mn * n[..., 1]
    return g


def wall_ghost_jacobian(n):
    """d(wall_ghost)/du; the reflection is linear so this is state-free."""
    n = np.asarray(n, dtype=float)
    nx, ny = n[..., 0], n[..., 1]
    G = np.zeros(n.shape[:-1] + (4, 4))
    G[..., 0, 0] = 1.0
    G[..., 3, 3] = 1.0
    G[..., 1, 1] = 1.0 - 2.0 * nx * nx
    G[..., 1, 2] = -2.0 * nx * ny
    G[..., 2, 1] = -2.0 * nx * ny
    G[..., 2, 2] = 1.0 - 2.0 * ny * ny
    return G


def _conservative(rho, vx, vy, p, gamma):
    E = p / (gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy)
    return np.stack([rho, rho * vx, rho * vy, E], axis=-1)


def farfield_ghost(u, n, fs):
    """Characteristic far-field ghost state.

    Regimes split on the interior normal velocity vn against the interior
    sound speed: supersonic outflow keeps the interior state, supersonic
    inflow imposes the freestream, and the subsonic cases combine the
    outgoing interior Riemann invariant with the incoming freestream one.
    Subsonic outflow carries interior entropy and tangential velocity,
    subsonic inflow the freestream's.
    """
    gamma = fs.gamma
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    single = u.ndim == 1
    u2 = np.atleast_2d(u)
    n2 = np.atleast_2d(n)
    if n2.shape[0] == 1 and u2.shape[0] > 1:
        n2 = np.broadcast_to(n2, (u2.shape[0], 2))

    rho, vx, vy, p = primitives(u2, gamma)
    c = np.sqrt(gamma * p / rho)
    nx, ny = n2[:, 0], n2[:, 1]
    vn = vx * nx + vy * ny

    vinf_x, vinf_y = fs.velocity
    c_inf = fs.sound_speed
    vn_inf = vinf_x * nx + vinf_y * ny

    ghost = u2.copy()
    sup_in = vn <= -c
    sup_out = vn >= c
    sub = ~(sup_in | sup_out)

    if np.any(sup_in):
        ghost[sup_in] = fs.state()

    if np.any(sub):
        idx = np.nonzero(sub)[0]
        g1 = gamma - 1.0
        Rp = vn[idx] + 2.0 * c[idx] / g1
        Rm = vn_inf[idx] - 2.0 * c_inf / g1
        vnb = 0.5 * (Rp + Rm)
        cb = 0.25 * g1 * (Rp - Rm)
        if np.any(cb <= 0):
            raise NonphysicalState("far-field ghost has nonpositive sound speed",
                                   cell=_bad_index(cb <= 0))
        outflow = vn[idx] >= 0.0
        s = np.where(outflow, p[idx] / rho[idx] ** gamma,
                     fs.p_inf / fs.rho_inf ** gamma)
        vtx = np.where(outflow, vx[idx] - vn[idx] * nx[idx], vinf_x - vn_inf[idx] * nx[idx])
        vty = np.where(outflow, vy[idx] - vn[idx] * ny[idx], vinf_y - vn_inf[idx] * ny[idx])
        rho_b = (cb * cb / (gamma * s)) ** (1.0 / g1)
        p_b = rho_b * cb * cb / gamma
        ghost[idx] = _conservative(rho_b, vtx + vnb * nx[idx], vty + vnb * ny[idx], p_b, gamma)

    # validate the result
    pressure(ghost, gamma)
    return ghost[0] if single else ghost


def farfield_ghost_jacobian(u, n, fs):
    """Analytic d(farfield_ghost)/du for one interior state, shape (4, 4)."""
    gamma = fs.gamma
    g1 = gamma - 1.0
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    rho, vx, vy, p = primitives(u, gamma)
    rho, vx, vy, p = float(rho), float(vx), float(vy), float(p)
    c = np.sqrt(gamma * p / rho)
    nx, ny = float(n[0]), float(n[1])
    vn = vx * nx + vy * ny

    if vn >= c:
        return np.eye(4)
    if vn <= -c:
        return np.zeros((4, 4))

    vinf_x, vinf_y = fs.velocity
    c_inf = fs.sound_speed
    vn_inf = vinf_x * nx + vinf_y * ny

    # derivatives w.r.t. interior primitives W = (rho, vx, vy, p)
    d_vn = np.array([0.0, nx, ny, 0.0])
    d_c = np.array([-c / (2.0 * rho), 0.0, 0.0, c / (2.0 * p)])
    d_Rp = d_vn + (2.0 / g1) * d_c
    Rp = vn + 2.0 * c / g1
    Rm = vn_inf - 2.0 * c_inf / g1
    vnb = 0.5 * (Rp + Rm)
    cb = 0.25 * g1 * (Rp - Rm)
    d_vnb = 0.5 * d_Rp
    d_cb = 0.25 * g1 * d_Rp

    if vn >= 0.0:  # subsonic outflow: interior entropy / tangential velocity
        s = p / rho ** gamma
        d_s = np.array([-gamma * p / rho ** (gamma + 1.0), 0.0, 0.0, rho ** -gamma])
        vtx = vx - vn * nx
        vty = vy - vn * ny
        d_vtx = np.array([0.0, 1.0 - nx * nx, -nx * ny, 0.0])
        d_vty = np.array([0.0, -nx * ny, 1.0 - ny * ny, 0.0])
    else:  # subsonic inflow: freestream entropy / tangential velocity
        s = fs.p_inf / fs.rho_inf ** gamma
        d_s = np.zeros(4)
        vtx = vinf_x - vn_inf * nx
        vty = vinf_y - vn_inf * ny
        d_vtx = np.zeros(4)
        d_vty = np.zeros(4)

    rho_b = (cb * cb / (gamma * s)) ** (1.0 / g1)
    d_rho_b = rho_b / g1 * (2.0 * d_cb / cb - d_s / s)
    d_p_b = (cb * cb / gamma) * d_rho_b + (2.0 * rho_b * cb / gamma) * d_cb
    vbx = vtx + vnb * nx
    vby = vty + vnb * ny
    d_vbx = d_vtx + nx * d_vnb
    d_vby = d_vty + ny * d_vnb

    dWb_dW = np.vstack([d_rho_b, d_vbx, d_vby, d_p_b])

    dW_dU = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [-vx / rho, 1.0 / rho, 0.0, 0.0],
        [-vy / rho, 0.0, 1.0 / rho, 0.0],
        [0.5 * g1 * (vx * vx + vy * vy), -g1 * vx, -g1 * vy, g1],
    ])
    dU_dW = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [vbx, rho_b, 0.0, 0.0],
        [vby, 0.0, rho_b, 0.0],
        [0.5 * (vbx * vbx + vby * vby), rho_b * vbx, rho_b * vby, 1.0 / g1],
    ])
    return dU_dW @ dWb_dW @ dW_dU
