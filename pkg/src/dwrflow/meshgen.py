"""Built-in desk-scale meshes: a channel with a Gaussian wall bump and an
O-mesh around a NACA 4-digit airfoil."""

import numpy as np

from .geometry import Circle, Naca4, VerticalGraph
from .tree import HierarchicalTree

WALL = "wall"
FARFIELD = "farfield"


def builtin_channel_bump(nx, ny, bump_height=0.05):
    """Channel [-2,2] x [0,1] with a Gaussian bump on the lower wall.

    The lower wall carries marker "wall" (with vertical projection onto
    the bump curve); inlet, outlet and top are "farfield". Cell count is
    2*nx*ny.
    """
    if nx < 4 or ny < 4:
        raise ValueError("channel bump needs nx, ny >= 4")
    h = float(bump_height)

    def bump(x):
        return h * np.exp(-4.0 * x * x)

    xs = np.linspace(-2.0, 2.0, nx + 1)
    vid = np.empty((nx + 1, ny + 1), dtype=np.int64)
    vertices = []
    for i, x in enumerate(xs):
        yb = bump(x)
        for j in range(ny + 1):
            vid[i, j] = len(vertices)
            vertices.append((x, yb + (1.0 - yb) * j / ny))

    triangles = []
    for i in range(nx):
        for j in range(ny):
            a, b = vid[i, j], vid[i + 1, j]
            c, d = vid[i + 1, j + 1], vid[i, j + 1]
            triangles.append((a, b, c))
            triangles.append((a, c, d))

    markers = {}
    for i in range(nx):
        markers[(vid[i, 0], vid[i + 1, 0])] = WALL
        markers[(vid[i, ny], vid[i + 1, ny])] = FARFIELD
    for j in range(ny):
        markers[(vid[0, j], vid[0, j + 1])] = FARFIELD
        markers[(vid[nx, j], vid[nx, j + 1])] = FARFIELD

    geometry = {WALL: VerticalGraph(bump)}
    return HierarchicalTree(vertices, triangles, markers, geometry)


def builtin_airfoil_omesh(code="0012", n_around=64, n_radial=12, outer_radius=35.0,
                          chord=1.0, x0=0.0, y0=0.0, stretch=5.0):
    """O-grid between a NACA 4-digit airfoil and an outer circle.

    The airfoil surface is marker "wall" with the analytic airfoil as the
    refinement-projection handle; the outer circle is "farfield". Radial
    spacing clusters geometrically toward the airfoil.
    """
    if n_around < 32 or n_around % 2:
        raise ValueError("n_around must be even and >= 32")
    if n_radial < 8:
        raise ValueError("n_radial must be >= 8")
    airfoil = Naca4(code, chord, x0, y0)
    center = (x0 + 0.5 * chord, y0)
    circle = Circle(center[0], center[1], outer_radius)

    theta = 2.0 * np.pi * np.arange(n_around) / n_around
    surf = airfoil.point(theta)
    phi = np.arctan2(surf[:, 1] - center[1], surf[:, 0] - center[0])
    outer = np.column_stack([center[0] + outer_radius * np.cos(phi),
                             center[1] + outer_radius * np.sin(phi)])
    rho = (np.exp(stretch * np.arange(n_radial + 1) / n_radial) - 1.0) / (np.exp(stretch) - 1.0)

    vid = np.empty((n_around, n_radial + 1), dtype=np.int64)
    vertices = []
    for k in range(n_around):
        for j in range(n_radial + 1):
            vid[k, j] = len(vertices)
            p = surf[k] + rho[j] * (outer[k] - surf[k])
            vertices.append((float(p[0]), float(p[1])))

    triangles = []
    for k in range(n_around):
        k1 = (k + 1) % n_around
        for j in range(n_radial):
            a, b = vid[k, j], vid[k1, j]
            c, d = vid[k1, j + 1], vid[k, j + 1]
            triangles.append((a, c, b))
            triangles.append((a, d, c))

    markers = {}
    for k in range(n_around):
        k1 = (k + 1) % n_around
        markers[(vid[k, 0], vid[k1, 0])] = WALL
        markers[(vid[k, n_radial], vid[k1, n_radial])] = FARFIELD

    geometry = {WALL: airfoil, FARFIELD: circle}
    return HierarchicalTree(vertices, triangles, markers, geometry)
