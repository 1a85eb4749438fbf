"""Finite-volume view of a hierarchical tree.

A LeafMesh lists the control volumes (tree leaves, or the leaves of a
depth-capped view used by the multigrid hierarchy) together with the
face connectivity. A leaf carrying a hanging point becomes a twin
triangle: its split edge contributes two half-faces against the finer
neighbors, so the cell has four faces.
"""

import numpy as np

from .errors import NotARefinement
from .tree import _ekey


class CellField:
    """Per-cell value vectors tied to the mesh they live on."""

    __slots__ = ("mesh", "values")

    def __init__(self, mesh, values):
        values = np.asarray(values, dtype=float)
        if values.shape[0] != mesh.n_cells:
            raise ValueError(f"field length {values.shape[0]} != cell count {mesh.n_cells}")
        self.mesh = mesh
        self.values = values

    @classmethod
    def constant(cls, mesh, vec):
        return cls(mesh, np.tile(np.asarray(vec, dtype=float), (mesh.n_cells, 1)))

    def copy(self):
        return CellField(self.mesh, self.values.copy())

    def integrate(self):
        """Cell-volume weighted integral over the domain."""
        return self.mesh.areas @ self.values


class LeafMesh:
    """Control volumes and faces extracted from a tree (or a depth cap)."""

    def __init__(self, tree, max_level=None):
        self.tree = tree
        self.max_level = max_level
        self._collect_cells()
        self._build_geometry()
        self._build_faces()

    # -- construction ---------------------------------------------------------

    def _collect_cells(self):
        tree = self.tree
        cap = self.max_level
        nodes = []

        def visit(nid):
            nd = tree.nodes[nid]
            if nd.children is None or (cap is not None and nd.level >= cap):
                nodes.append(nd)
            else:
                for c in nd.children:
                    visit(c)

        for r in tree.roots:
            visit(r)
        nodes.sort(key=lambda nd: nd.path)
        self.cell_nodes = [nd.id for nd in nodes]
        self.cell_paths = [nd.path for nd in nodes]
        self.path_index = {nd.path: i for i, nd in enumerate(nodes)}
        self._node_list = nodes
        self.n_cells = len(nodes)

    def _build_geometry(self):
        self.vertices = np.asarray(self.tree.vertices, dtype=float)
        tri = np.array([nd.verts for nd in self._node_list], dtype=np.int64)
        self.cell_verts = tri
        p0 = self.vertices[tri[:, 0]]
        p1 = self.vertices[tri[:, 1]]
        p2 = self.vertices[tri[:, 2]]
        cross = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) \
            - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
        if np.any(cross <= 0):
            bad = int(np.nonzero(cross <= 0)[0][0])
            raise ValueError(f"cell {bad} is degenerate or clockwise")
        self.areas = 0.5 * cross
        self.centroids = (p0 + p1 + p2) / 3.0
        self.total_area = float(self.areas.sum())

    def _build_faces(self):
        tree = self.tree
        segs = {}
        for i, nd in enumerate(self._node_list):
            v = nd.verts
            for e in range(3):
                a, b = v[e], v[(e + 1) % 3]
                segs.setdefault(_ekey(a, b), []).append((i, a, b, nd.markers[e]))

        int_faces = []   # (left, right, a, b)
        bnd_faces = []   # (cell, a, b, marker)
        consumed = set()

        for i, nd in enumerate(self._node_list):
            v = nd.verts
            for e in range(3):
                a, b = v[e], v[(e + 1) % 3]
                key = _ekey(a, b)
                if key in consumed:
                    continue
                entries = segs[key]
                if len(entries) == 2:
                    first, second = entries
                    left = first if first[0] <= second[0] else second
                    right = second if first[0] <= second[0] else first
                    int_faces.append((left[0], right[0], left[1], left[2]))
                    consumed.add(key)
                elif nd.markers[e] is not None:
                    bnd_faces.append((i, a, b, nd.markers[e]))
                    consumed.add(key)
                else:
                    m = tree.edge_mid.get(key)
                    halves = None
                    if m is not None:
                        k1, k2 = _ekey(a, m), _ekey(m, b)
                        if len(segs.get(k1, ())) == 1 and len(segs.get(k2, ())) == 1:
                            halves = (k1, (a, m)), (k2, (m, b))
                    if halves is None:
                        continue  # fine side; the coarse neighbor emits it
                    for hk, (ha, hb) in halves:
                        fine = segs[hk][0]
                        int_faces.append((i, fine[0], ha, hb))
                        consumed.add(hk)
                    consumed.add(key)

        for key, entries in segs.items():
            if key not in consumed:
                raise ValueError(f"unmatched face segment {key}; mesh view is inconsistent")

        def seg_geom(a, b):
            pa = self.vertices[a]
            pb = self.vertices[b]
            t = pb - pa
            ln = float(np.hypot(t[0], t[1]))
            return np.array([t[1] / ln, -t[0] / ln]), ln, 0.5 * (pa + pb)

        nf = len(int_faces)
        self.f_left = np.empty(nf, dtype=np.int64)
        self.f_right = np.empty(nf, dtype=np.int64)
        self.f_verts = np.empty((nf, 2), dtype=np.int64)
        self.f_normal = np.empty((nf, 2))
        self.f_length = np.empty(nf)
        self.f_mid = np.empty((nf, 2))
        for k, (lc, rc, a, b) in enumerate(int_faces):
            n, ln, mid = seg_geom(a, b)
            self.f_left[k] = lc
            self.f_right[k] = rc
            self.f_verts[k] = (a, b)
            self.f_normal[k] = n
            self.f_length[k] = ln
            self.f_mid[k] = mid

        nb = len(bnd_faces)
        self.b_cell = np.empty(nb, dtype=np.int64)
        self.b_verts = np.empty((nb, 2), dtype=np.int64)
        self.b_normal = np.empty((nb, 2))
        self.b_length = np.empty(nb)
        self.b_mid = np.empty((nb, 2))
        self.b_marker = []
        for k, (c, a, b, marker) in enumerate(bnd_faces):
            n, ln, mid = seg_geom(a, b)
            self.b_cell[k] = c
            self.b_verts[k] = (a, b)
            self.b_normal[k] = n
            self.b_length[k] = ln
            self.b_mid[k] = mid
            self.b_marker.append(marker)
        self.markers = sorted(set(self.b_marker))
        self._marker_faces = {m: np.array([k for k, mk in enumerate(self.b_marker) if mk == m],
                              dtype=np.int64) for m in self.markers}

    # -- queries ----------------------------------------------------------------

    def boundary_faces(self, marker):
        """Indices into the boundary-face arrays for one marker."""
        return self._marker_faces.get(marker, np.empty(0, dtype=np.int64))

    def face_closure(self):
        """Per-cell sum of length*normal over all faces (zero for closed cells)."""
        out = np.zeros((self.n_cells, 2))
        w = self.f_normal * self.f_length[:, None]
        np.add.at(out, self.f_left, w)
        np.add.at(out, self.f_right, -w)
        np.add.at(out, self.b_cell, self.b_normal * self.b_length[:, None])
        return out

    def describe(self):
        return (f"LeafMesh(cells={self.n_cells}, interior_faces={len(self.f_left)}, "
                f"boundary_faces={len(self.b_cell)}, markers={self.markers})")


def ancestor_map(fine, coarse):
    """Map each cell of ``fine`` to its covering cell in ``coarse``.

    Raises NotARefinement when some fine cell has no ancestor-or-equal
    among the coarse cells.
    """
    if fine.tree.root_key != coarse.tree.root_key:
        raise NotARefinement("meshes do not derive from the same initial mesh")
    out = np.empty(fine.n_cells, dtype=np.int64)
    for i, path in enumerate(fine.cell_paths):
        p = path
        while p not in coarse.path_index:
            if len(p) == 1:
                raise NotARefinement(f"cell {path} has no ancestor in the coarse mesh")
            p = p[:-1]
        out[i] = coarse.path_index[p]
    return out


def project_to_finer(field, target):
    """Piecewise-constant injection onto a refining mesh."""
    amap = ancestor_map(target, field.mesh)
    return CellField(target, field.values[amap])


def restrict_to_coarser(field, target):
    """Volume-weighted averaging onto a coarsened mesh."""
    amap = ancestor_map(field.mesh, target)
    k = field.values.shape[1]
    num = np.zeros((target.n_cells, k))
    den = np.zeros(target.n_cells)
    np.add.at(num, amap, field.values * field.mesh.areas[:, None])
    np.add.at(den, amap, field.mesh.areas)
    return CellField(target, num / den[:, None])
