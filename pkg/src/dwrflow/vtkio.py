"""Legacy-ASCII VTK export of leaf meshes with cell data (plus a minimal
reader used by the round-trip tests)."""

import numpy as np

from . import euler
from .errors import IoError


def solution_cell_data(mesh, u, fs):
    """Standard scalar fields for a flow state: density, pressure, Mach."""
    rho, vx, vy, p = euler.primitives(u.values, fs.gamma)
    c = np.sqrt(fs.gamma * p / rho)
    return {
        "density": rho,
        "pressure": p,
        "mach": np.hypot(vx, vy) / c,
    }


def export_vtk(path, mesh, fields=None, title="dwrflow"):
    """Write an unstructured-grid legacy VTK file.

    fields: {name: (n_cells,) or (n_cells, m) array}; vector-valued
    arrays are split into one scalar per component.
    """
    fields = fields or {}
    used = sorted(set(int(v) for v in mesh.cell_verts.ravel()))
    remap = {v: i for i, v in enumerate(used)}
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {len(used)} double"]
    for v in used:
        x, y = mesh.vertices[v]
        lines.append(f"{x:.17g} {y:.17g} 0")
    lines.append(f"CELLS {mesh.n_cells} {4 * mesh.n_cells}")
    for a, b, c in mesh.cell_verts:
        lines.append(f"3 {remap[int(a)]} {remap[int(b)]} {remap[int(c)]}")
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines.extend(["5"] * mesh.n_cells)

    flat = {}
    for name, arr in fields.items():
        arr = np.asarray(arr, dtype=float)
        if arr.shape[0] != mesh.n_cells:
            raise IoError(f"field {name!r} has {arr.shape[0]} values for "
                          f"{mesh.n_cells} cells")
        if arr.ndim == 1:
            flat[name] = arr
        else:
            for comp in range(arr.shape[1]):
                flat[f"{name}_{comp}"] = arr[:, comp]
    if flat:
        lines.append(f"CELL_DATA {mesh.n_cells}")
        for name in flat:
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(f"{v:.17g}" for v in flat[name])

    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from None


def read_vtk(path):
    """Parse files written by :func:`export_vtk`: returns (points, cells,
    cell_data)."""
    try:
        with open(path) as fh:
            tokens = fh.read().split("\n")
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from None
    i = 0

    def expect(prefix):
        nonlocal i
        while i < len(tokens) and not tokens[i].strip():
            i += 1
        if i >= len(tokens) or not tokens[i].startswith(prefix):
            raise IoError(f"expected {prefix!r} at line {i + 1}")
        line = tokens[i]
        i += 1
        return line

    expect("# vtk DataFile")
    i += 1  # title
    expect("ASCII")
    expect("DATASET UNSTRUCTURED_GRID")
    n = int(expect("POINTS").split()[1])
    points = np.array([[float(x) for x in tokens[i + k].split()] for k in range(n)])
    i += n
    m = int(expect("CELLS").split()[1])
    cells = np.array([[int(x) for x in tokens[i + k].split()[1:]] for k in range(m)])
    i += m
    expect("CELL_TYPES")
    i += m
    data = {}
    while i < len(tokens):
        line = tokens[i].strip()
        i += 1
        if not line:
            continue
        if line.startswith("CELL_DATA"):
            continue
        if line.startswith("SCALARS"):
            name = line.split()[1]
            i += 1  # LOOKUP_TABLE
            vals = np.array([float(tokens[i + k]) for k in range(m)])
            i += m
            data[name] = vals
        else:
            raise IoError(f"unexpected content {line!r}")
    return points[:, :2], cells, data
