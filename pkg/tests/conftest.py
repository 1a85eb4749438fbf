import numpy as np
import pytest

from dwrflow.tree import HierarchicalTree


def unit_square_tree(marker="farfield"):
    """Two CCW triangles covering [0,1]^2, all boundary edges one marker."""
    vertices = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    triangles = [(0, 1, 2), (0, 2, 3)]
    edge_markers = {(0, 1): marker, (1, 2): marker, (2, 3): marker, (3, 0): marker}
    return HierarchicalTree(vertices, triangles, edge_markers)


def single_triangle_tree(marker="wall"):
    vertices = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    triangles = [(0, 1, 2)]
    edge_markers = {(0, 1): marker, (1, 2): marker, (2, 0): marker}
    return HierarchicalTree(vertices, triangles, edge_markers)


def split_wall_channel(nx=8, ny=4, bump_height=0.06):
    """Channel bump variant whose lower wall carries two markers split
    at x=0 (disjoint targets for multi-mesh tests)."""
    import numpy as np

    from dwrflow.geometry import VerticalGraph

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
        side = "wall_left" if xs[i] < 0 else "wall_right"
        markers[(vid[i, 0], vid[i + 1, 0])] = side
        markers[(vid[i, ny], vid[i + 1, ny])] = "farfield"
    for j in range(ny):
        markers[(vid[0, j], vid[0, j + 1])] = "farfield"
        markers[(vid[nx, j], vid[nx, j + 1])] = "farfield"
    geometry = {"wall_left": VerticalGraph(bump), "wall_right": VerticalGraph(bump)}
    return HierarchicalTree(vertices, triangles, markers, geometry)


def random_refined_tree(rng, rounds=3, base=None, frac=0.4):
    tree = base if base is not None else unit_square_tree()
    for _ in range(rounds):
        leaves = tree.leaf_ids()
        pick = [nid for nid in leaves if rng.random() < frac]
        if not pick:
            pick = [leaves[int(rng.integers(len(leaves)))]]
        tree = tree.refine_cells(pick)
    return tree


def random_states(rng, n, vmax=2.0):
    """Valid conservative states bounded away from vacuum."""
    rho = rng.uniform(0.3, 3.0, n)
    vx = rng.uniform(-vmax, vmax, n)
    vy = rng.uniform(-vmax, vmax, n)
    p = rng.uniform(0.2, 4.0, n)
    E = p / 0.4 + 0.5 * rho * (vx**2 + vy**2)
    return np.column_stack([rho, rho * vx, rho * vy, E])


def random_normals(rng, n):
    ang = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([np.cos(ang), np.sin(ang)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
