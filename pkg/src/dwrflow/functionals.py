"""Target functionals: wall-pressure lift/drag/moment and composites.

Values are boundary integrals of the adjacent-cell pressure (the
piecewise-constant trace), normalized by C_inf = gamma*p_inf*Ma^2*l/2.
Composites are separable products with optional inverses (lift-drag
ratio) or linear combinations (the single-mesh baseline form).
"""

import numpy as np

from . import euler
from .errors import DivisionByZero, UnknownBoundaryMarker
from .leafmesh import CellField

KINDS = ("lift", "drag", "moment")


class TargetFunctional:
    """One scalar target tied to a boundary marker."""

    def __init__(self, kind, marker, attack_angle=0.0, gamma=1.4, p_inf=1.0,
                 mach=0.5, chord=1.0, x_ref=None, scale=1.0, name=None):
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        self.kind = kind
        self.marker = marker
        self.attack_angle = float(attack_angle)
        self.gamma = float(gamma)
        self.p_inf = float(p_inf)
        self.mach = float(mach)
        self.chord = float(chord)
        self.x_ref = None if x_ref is None else np.asarray(x_ref, dtype=float)
        self.scale = float(scale)
        self.name = name or f"{kind}:{marker}"
        if self.c_inf <= 0:
            raise ValueError("C_inf must be positive")
        if kind == "moment" and self.x_ref is None:
            raise ValueError("moment functional needs x_ref")

    @property
    def c_inf(self):
        return self.gamma * self.p_inf * self.mach**2 * self.chord / 2.0

    @classmethod
    def from_freestream(cls, kind, marker, fs, chord=1.0, x_ref=None, scale=1.0, name=None):
        return cls(kind, marker, attack_angle=fs.attack_angle, gamma=fs.gamma,
                   p_inf=fs.p_inf, mach=fs.mach, chord=chord, x_ref=x_ref,
                   scale=scale, name=name)

    def __repr__(self):
        return f"TargetFunctional({self.name})"


def beta_vector(kind, attack_angle, c_inf):
    """Force-projection direction over C_inf: drag along the flow, lift
    perpendicular to it."""
    ca, sa = np.cos(attack_angle), np.sin(attack_angle)
    if kind == "drag":
        return np.array([ca, sa]) / c_inf
    if kind == "lift":
        return np.array([-sa, ca]) / c_inf
    raise ValueError(f"no beta vector for kind {kind!r}")


def _wall_faces(mesh, spec):
    idx = mesh.boundary_faces(spec.marker)
    if spec.marker not in mesh.markers:
        raise UnknownBoundaryMarker(f"marker {spec.marker!r} not on this mesh")
    return idx


def _face_weights(mesh, idx, spec):
    """Per-face weight w_f such that J = sum_f w_f * p(cell_f)."""
    n = mesh.b_normal[idx]
    ln = mesh.b_length[idx]
    if spec.kind in ("lift", "drag"):
        beta = beta_vector(spec.kind, spec.attack_angle, spec.c_inf)
        return spec.scale * ln * (n @ beta)
    arm = mesh.b_mid[idx] - spec.x_ref
    cross = arm[:, 0] * n[:, 1] - arm[:, 1] * n[:, 0]
    return spec.scale * ln * cross / spec.c_inf


def evaluate(mesh, u, spec):
    """Value of one target functional at state ``u``."""
    idx = _wall_faces(mesh, spec)
    if idx.size == 0:
        return 0.0
    cells = mesh.b_cell[idx]
    p = euler.pressure(u.values[cells], spec.gamma)
    return float(_face_weights(mesh, idx, spec) @ p)


def gradient(mesh, u, spec):
    """d(evaluate)/du as a CellField; zero away from the marked wall."""
    idx = _wall_faces(mesh, spec)
    out = np.zeros((mesh.n_cells, 4))
    if idx.size == 0:
        return CellField(mesh, out)
    cells = mesh.b_cell[idx]
    w = _face_weights(mesh, idx, spec)
    dp = euler.pressure_gradient(u.values[cells], spec.gamma)
    np.add.at(out, cells, w[:, None] * dp)
    return CellField(mesh, out)


class CompositeFunctional:
    """Separable product (exponents +-1) or linear combination of targets."""

    def __init__(self, components, form="product"):
        if form not in ("product", "linear"):
            raise ValueError("form must be 'product' or 'linear'")
        self.form = form
        self.components = []
        for spec, coeff in components:
            coeff = float(coeff)
            if form == "product" and coeff not in (1.0, -1.0):
                raise ValueError("product exponents must be +1 or -1")
            self.components.append((spec, coeff))

    @property
    def targets(self):
        return [spec for spec, _ in self.components]

    @classmethod
    def single(cls, spec):
        return cls([(spec, 1.0)], form="product")

    @classmethod
    def ratio(cls, numerator, denominator):
        return cls([(numerator, 1.0), (denominator, -1.0)], form="product")

    @classmethod
    def weighted_sum(cls, specs, weights):
        return cls(list(zip(specs, weights)), form="linear")

    def describe(self):
        if self.form == "linear":
            return " + ".join(f"{w:g}*{s.name}" for s, w in self.components)
        return " * ".join(s.name if e > 0 else f"{s.name}^-1" for s, e in self.components)


def composite_evaluate(values, comp):
    """Combine per-component values into the composite value."""
    values = list(values)
    if len(values) != len(comp.components):
        raise ValueError("one value per component required")
    if comp.form == "linear":
        return float(sum(w * v for (_, w), v in zip(comp.components, values)))
    out = 1.0
    for (_, e), v in zip(comp.components, values):
        if e < 0:
            if v == 0.0:
                raise DivisionByZero("inverse component is zero")
            out /= v
        else:
            out *= v
    return float(out)


def composite_weights(values, comp):
    """Partial derivatives C_i of the composite w.r.t. each component."""
    values = list(values)
    if len(values) != len(comp.components):
        raise ValueError("one value per component required")
    if comp.form == "linear":
        return [float(w) for _, w in comp.components]
    out = []
    for i, ((_, ei), vi) in enumerate(zip(comp.components, values)):
        rest = 1.0
        for j, ((_, ej), vj) in enumerate(zip(comp.components, values)):
            if j == i:
                continue
            if ej < 0:
                if vj == 0.0:
                    raise DivisionByZero("inverse component is zero")
                rest /= vj
            else:
                rest *= vj
        if ei > 0:
            out.append(rest)
        else:
            if vi == 0.0:
                raise DivisionByZero("inverse component is zero")
            out.append(-rest / (vi * vi))
    return out
