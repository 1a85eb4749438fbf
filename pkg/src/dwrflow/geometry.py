"""Analytic boundary curves used to place refined boundary midpoints.

Each curve offers project(xy) -> xy snapping a point onto the curve, and
optionally a one-line serialization for the mesh-file GEOMETRY block.
"""

import numpy as np


class Circle:
    def __init__(self, cx, cy, r):
        self.cx = float(cx)
        self.cy = float(cy)
        self.r = float(r)

    def project(self, xy):
        dx = xy[0] - self.cx
        dy = xy[1] - self.cy
        d = np.hypot(dx, dy)
        if d == 0.0:
            return (self.cx + self.r, self.cy)
        return (self.cx + self.r * dx / d, self.cy + self.r * dy / d)

    def geometry_line(self):
        return f"circle {self.cx:.17g} {self.cy:.17g} {self.r:.17g}"


class VerticalGraph:
    """Wall described by y = f(x); projection drops the point vertically."""

    def __init__(self, f):
        self.f = f

    def project(self, xy):
        return (xy[0], float(self.f(xy[0])))

    def geometry_line(self):
        return None


class Polyline:
    """Open or closed polyline; projection finds the nearest segment point."""

    def __init__(self, points, source=None):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2 or len(self.points) < 2:
            raise ValueError("polyline needs an (n, 2) point array with n >= 2")
        self.source = source

    def project(self, xy):
        q = np.asarray(xy, dtype=float)
        a = self.points[:-1]
        b = self.points[1:]
        d = b - a
        denom = np.einsum("ij,ij->i", d, d)
        t = np.clip(np.einsum("ij,ij->i", q - a, d) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
        proj = a + t[:, None] * d
        k = int(np.argmin(np.einsum("ij,ij->i", proj - q, proj - q)))
        return (float(proj[k, 0]), float(proj[k, 1]))

    def geometry_line(self):
        return f"polyline {self.source}" if self.source else None


class Naca4:
    """Standard NACA 4-digit airfoil with a closed trailing edge.

    The surface is parameterized by an angle running from the trailing
    edge over the upper surface to the leading edge and back along the
    lower surface.
    """

    def __init__(self, code="0012", chord=1.0, x0=0.0, y0=0.0):
        code = str(code)
        if len(code) != 4 or not code.isdigit():
            raise ValueError(f"not a 4-digit NACA code: {code!r}")
        self.code = code
        self.m = int(code[0]) / 100.0
        self.p = int(code[1]) / 10.0
        self.t = int(code[2:]) / 100.0
        self.chord = float(chord)
        self.x0 = float(x0)
        self.y0 = float(y0)
        self._dense = None

    def _thickness(self, x):
        # closed trailing-edge variant (last coefficient -0.1036)
        return 5.0 * self.t * (0.2969 * np.sqrt(x) - 0.1260 * x - 0.3516 * x**2
                               + 0.2843 * x**3 - 0.1036 * x**4)

    def _camber(self, x):
        m, p = self.m, self.p
        if m == 0.0 or p == 0.0:
            z = np.zeros_like(x)
            return z, z
        x = np.asarray(x)
        yc = np.where(x < p, m / p**2 * (2 * p * x - x**2),
                      m / (1 - p)**2 * ((1 - 2 * p) + 2 * p * x - x**2))
        dyc = np.where(x < p, 2 * m / p**2 * (p - x), 2 * m / (1 - p)**2 * (p - x))
        return yc, dyc

    def point(self, theta):
        """Surface point for parameter theta in [0, 2*pi)."""
        theta = np.asarray(theta, dtype=float)
        x = 0.5 * (1.0 + np.cos(theta))
        yt = self._thickness(x)
        yc, dyc = self._camber(x)
        ang = np.arctan(dyc)
        upper = np.sin(theta) >= 0.0
        xs = np.where(upper, x - yt * np.sin(ang), x + yt * np.sin(ang))
        ys = np.where(upper, yc + yt * np.cos(ang), yc - yt * np.cos(ang))
        return np.stack([self.x0 + self.chord * xs, self.y0 + self.chord * ys], axis=-1)

    def _dense_samples(self, n=4096):
        if self._dense is None or len(self._dense[0]) != n:
            th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
            self._dense = (th, self.point(th))
        return self._dense

    def project(self, xy):
        q = np.asarray(xy, dtype=float)
        th, pts = self._dense_samples()
        d2 = np.einsum("ij,ij->i", pts - q, pts - q)
        k = int(np.argmin(d2))
        step = th[1] - th[0]
        lo, hi = th[k] - step, th[k] + step
        # golden-section refinement of the squared distance
        gr = (np.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - gr * (b - a)
        d = a + gr * (b - a)
        fc = np.sum((self.point(c) - q) ** 2)
        fd = np.sum((self.point(d) - q) ** 2)
        for _ in range(60):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - gr * (b - a)
                fc = np.sum((self.point(c) - q) ** 2)
            else:
                a, c, fc = c, d, fd
                d = a + gr * (b - a)
                fd = np.sum((self.point(d) - q) ** 2)
        best = self.point(0.5 * (a + b))
        return (float(best[0]), float(best[1]))

    def geometry_line(self):
        return f"naca4 {self.code} {self.chord:.17g} {self.x0:.17g} {self.y0:.17g}"
