"""ASCII mesh-file import/export.

Block format, one record per line, ``#`` starts a comment:

    VERTICES <n>
    <id> <x> <y>
    TRIANGLES <m>
    <id> <v1> <v2> <v3>
    BOUNDARY <k>
    <id> <va> <vb> <marker>
    GEOMETRY <g>                    # optional
    <marker> circle <cx> <cy> <r>
    <marker> naca4 <code> <chord> <x0> <y0>
    <marker> polyline <file>

Coordinates are written with 17 significant digits so a write/read round
trip is exact. Triangles must be counterclockwise and every boundary
edge must belong to exactly one triangle.
"""

import os

import numpy as np

from .errors import IoError
from .geometry import Circle, Naca4, Polyline
from .tree import HierarchicalTree, _ekey


def _fmt(x):
    return f"{x:.17g}"


def write_meshfile(path, mesh, geometry=None):
    """Write the leaf cells of ``mesh`` as a flat root-level mesh file.

    geometry: {marker: curve}; curves without a one-line serialization
    are skipped.
    """
    used = sorted(set(int(v) for v in mesh.cell_verts.ravel()))
    remap = {v: i for i, v in enumerate(used)}
    lines = [f"VERTICES {len(used)}"]
    for v in used:
        x, y = mesh.vertices[v]
        lines.append(f"{remap[v]} {_fmt(x)} {_fmt(y)}")
    lines.append(f"TRIANGLES {mesh.n_cells}")
    for i, (a, b, c) in enumerate(mesh.cell_verts):
        lines.append(f"{i} {remap[int(a)]} {remap[int(b)]} {remap[int(c)]}")
    lines.append(f"BOUNDARY {len(mesh.b_cell)}")
    for k in range(len(mesh.b_cell)):
        a, b = mesh.b_verts[k]
        lines.append(f"{k} {remap[int(a)]} {remap[int(b)]} {mesh.b_marker[k]}")
    geo_lines = []
    for marker, curve in (geometry or {}).items():
        line = curve.geometry_line()
        if line is not None:
            geo_lines.append(f"{marker} {line}")
    if geo_lines:
        lines.append(f"GEOMETRY {len(geo_lines)}")
        lines.extend(sorted(geo_lines))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_block_header(tok, want, ln):
    if len(tok) != 2 or tok[0] != want:
        raise IoError(f"line {ln}: expected '{want} <count>'")
    try:
        return int(tok[1])
    except ValueError:
        raise IoError(f"line {ln}: bad count {tok[1]!r}") from None


def read_meshfile(path):
    """Parse a mesh file into a HierarchicalTree."""
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from None

    rows = []
    for ln, line in enumerate(raw, start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            rows.append((ln, body.split()))

    pos = 0

    def take():
        nonlocal pos
        if pos >= len(rows):
            raise IoError("unexpected end of file")
        out = rows[pos]
        pos += 1
        return out

    ln, tok = take()
    nv = _parse_block_header(tok, "VERTICES", ln)
    vertices = np.empty((nv, 2))
    for _ in range(nv):
        ln, tok = take()
        if len(tok) != 3:
            raise IoError(f"line {ln}: vertex rows are '<id> <x> <y>'")
        i = int(tok[0])
        vertices[i] = (float(tok[1]), float(tok[2]))

    ln, tok = take()
    nt = _parse_block_header(tok, "TRIANGLES", ln)
    triangles = np.empty((nt, 3), dtype=np.int64)
    for _ in range(nt):
        ln, tok = take()
        if len(tok) != 4:
            raise IoError(f"line {ln}: triangle rows are '<id> <v1> <v2> <v3>'")
        triangles[int(tok[0])] = [int(tok[1]), int(tok[2]), int(tok[3])]

    ln, tok = take()
    nb = _parse_block_header(tok, "BOUNDARY", ln)
    edge_markers = {}
    for _ in range(nb):
        ln, tok = take()
        if len(tok) != 4:
            raise IoError(f"line {ln}: boundary rows are '<id> <va> <vb> <marker>'")
        edge_markers[(int(tok[1]), int(tok[2]))] = tok[3]

    geometry = {}
    if pos < len(rows):
        ln, tok = take()
        ng = _parse_block_header(tok, "GEOMETRY", ln)
        base = os.path.dirname(os.path.abspath(path))
        for _ in range(ng):
            ln, tok = take()
            marker, kind, args = tok[0], tok[1], tok[2:]
            if kind == "circle" and len(args) == 3:
                geometry[marker] = Circle(*(float(a) for a in args))
            elif kind == "naca4" and len(args) == 4:
                geometry[marker] = Naca4(args[0], float(args[1]), float(args[2]), float(args[3]))
            elif kind == "polyline" and len(args) == 1:
                pfile = os.path.join(base, args[0])
                try:
                    pts = np.loadtxt(pfile, ndmin=2)
                except OSError as e:
                    raise IoError(f"line {ln}: cannot read polyline {pfile}: {e}") from None
                geometry[marker] = Polyline(pts, source=args[0])
            else:
                raise IoError(f"line {ln}: unknown geometry '{kind}'")
    if pos < len(rows):
        ln, tok = rows[pos]
        raise IoError(f"line {ln}: trailing content {' '.join(tok)!r}")

    _validate(vertices, triangles, edge_markers)
    return HierarchicalTree(vertices, triangles, edge_markers, geometry)


def _validate(vertices, triangles, edge_markers):
    problems = []
    p = vertices
    for i, (a, b, c) in enumerate(triangles):
        cross = ((p[b, 0] - p[a, 0]) * (p[c, 1] - p[a, 1])
                 - (p[c, 0] - p[a, 0]) * (p[b, 1] - p[a, 1]))
        if cross <= 0:
            problems.append(f"triangle {i} is not counterclockwise")
    edge_count = {}
    for a, b, c in triangles:
        for e in ((a, b), (b, c), (c, a)):
            key = _ekey(int(e[0]), int(e[1]))
            edge_count[key] = edge_count.get(key, 0) + 1
    for (a, b) in edge_markers:
        if edge_count.get(_ekey(a, b), 0) != 1:
            problems.append(f"boundary edge ({a}, {b}) does not belong to exactly one triangle")
    for key, cnt in edge_count.items():
        if cnt == 1 and key not in {_ekey(a, b) for a, b in edge_markers}:
            problems.append(f"edge {key} is on the boundary but has no marker")
        if cnt > 2:
            problems.append(f"edge {key} is shared by {cnt} triangles")
    if problems:
        raise IoError("; ".join(problems))
