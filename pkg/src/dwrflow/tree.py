"""Hierarchical geometry tree over triangles.

Triangles refine into 4 children by edge-midpoint (red) subdivision;
children 0..2 sit at the parent's corners, child 3 is the central
triangle. One-sided refinement leaves hanging points on neighbors; the
closure rule keeps at most one hanging point per leaf, refining any leaf
that would carry two or more. The union of two trees derived from the
same initial mesh is the merge of their refinement sets followed by
closure.

Trees are immutable through the public API: mutating operations return
new trees. Vertex coordinates live in a per-tree table; edge midpoints
are deduplicated through an (endpoint, endpoint) -> vertex map so that
identical refinement sets always produce identical geometry.
"""

import numpy as np

from .errors import RootMismatch, UnknownCell


def _ekey(a, b):
    return (a, b) if a < b else (b, a)


class TreeNode:
    __slots__ = ("id", "verts", "parent", "children", "level", "path", "markers")

    def __init__(self, id, verts, parent, level, path, markers):
        self.id = id
        self.verts = verts
        self.parent = parent
        self.children = None
        self.level = level
        self.path = path
        self.markers = markers

    @property
    def is_leaf(self):
        return self.children is None

    def __repr__(self):
        return f"TreeNode(id={self.id}, path={self.path}, verts={self.verts})"


class HierarchicalTree:
    """Forest of refinement trees rooted at the initial mesh elements."""

    def __init__(self, vertices, triangles, edge_markers=None, geometry=None):
        """Build the root-level tree.

        vertices: (n, 2) array-like of coordinates.
        triangles: (m, 3) vertex-index triples, counterclockwise.
        edge_markers: {(va, vb): marker} for boundary edges (unordered keys).
        geometry: {marker: curve} where curve.project(xy) snaps new
            boundary midpoints onto the analytic boundary.
        """
        self.vertices = [tuple(map(float, v)) for v in np.asarray(vertices, dtype=float)]
        self.nodes = []
        self.roots = []
        self.edge_mid = {}
        self.geometry = dict(geometry) if geometry else {}
        markers = {}
        if edge_markers:
            markers = {_ekey(a, b): m for (a, b), m in edge_markers.items()}
        for t, tri in enumerate(triangles):
            v0, v1, v2 = (int(v) for v in tri)
            m = (markers.get(_ekey(v0, v1)), markers.get(_ekey(v1, v2)), markers.get(_ekey(v2, v0)))
            node = TreeNode(len(self.nodes), (v0, v1, v2), None, 0, (t,), m)
            self.nodes.append(node)
            self.roots.append(node.id)
        self._n_root_vertices = len(self.vertices)
        self.root_key = (
            tuple(self.vertices),
            tuple(self.nodes[r].verts for r in self.roots),
            tuple(sorted((k, v) for k, v in markers.items())),
        )

    # -- construction helpers -------------------------------------------------

    def _clone(self):
        new = object.__new__(HierarchicalTree)
        new.vertices = list(self.vertices)
        new.nodes = []
        for nd in self.nodes:
            cp = TreeNode(nd.id, nd.verts, nd.parent, nd.level, nd.path, nd.markers)
            cp.children = nd.children
            new.nodes.append(cp)
        new.roots = list(self.roots)
        new.edge_mid = dict(self.edge_mid)
        new.geometry = self.geometry
        new._n_root_vertices = self._n_root_vertices
        new.root_key = self.root_key
        return new

    def _midpoint(self, a, b, marker):
        key = _ekey(a, b)
        vid = self.edge_mid.get(key)
        if vid is not None:
            return vid
        xa, ya = self.vertices[a]
        xb, yb = self.vertices[b]
        xy = (0.5 * (xa + xb), 0.5 * (ya + yb))
        if marker is not None and marker in self.geometry:
            xy = tuple(self.geometry[marker].project(xy))
        vid = len(self.vertices)
        self.vertices.append(xy)
        self.edge_mid[key] = vid
        return vid

    def _refine_node(self, nid):
        nd = self.nodes[nid]
        if nd.children is not None:
            return
        v0, v1, v2 = nd.verts
        m0, m1, m2 = nd.markers
        m01 = self._midpoint(v0, v1, m0)
        m12 = self._midpoint(v1, v2, m1)
        m20 = self._midpoint(v2, v0, m2)
        spec = (
            ((v0, m01, m20), (m0, None, m2)),
            ((m01, v1, m12), (m0, m1, None)),
            ((m20, m12, v2), (None, m1, m2)),
            ((m01, m12, m20), (None, None, None)),
        )
        kids = []
        for c, (verts, marks) in enumerate(spec):
            child = TreeNode(len(self.nodes), verts, nid, nd.level + 1, nd.path + (c,), marks)
            self.nodes.append(child)
            kids.append(child.id)
        nd.children = tuple(kids)

    # -- queries ---------------------------------------------------------------

    def leaves(self):
        """Leaf nodes in path order."""
        out = [nd for nd in self.nodes if nd.children is None]
        out.sort(key=lambda nd: nd.path)
        return out

    def leaf_ids(self):
        return [nd.id for nd in self.leaves()]

    def node_by_path(self, path):
        nd = self.nodes[self.roots[path[0]]]
        for c in path[1:]:
            if nd.children is None:
                return None
            nd = self.nodes[nd.children[c]]
        return nd

    def _edge_splits(self, a, b):
        vid = self.edge_mid.get(_ekey(a, b))
        if vid is None:
            return 0
        return 1 + self._edge_splits(a, vid) + self._edge_splits(vid, b)

    def hanging_count(self, nid):
        """Number of hanging points on the edges of leaf ``nid``.

        Midpoints on a leaf's edges can only have been created by finer
        neighbors, so counting registered splits is exact.
        """
        nd = self.nodes[nid]
        v0, v1, v2 = nd.verts
        return (self._edge_splits(v0, v1) + self._edge_splits(v1, v2)
                + self._edge_splits(v2, v0))

    def max_level(self):
        return max(nd.level for nd in self.nodes)

    def refined_paths(self):
        return {nd.path for nd in self.nodes if nd.children is not None}

    def leaf_signature(self):
        """Hashable structural identity of the leaf set: (path, coords)."""
        return tuple(
            (nd.path, tuple(self.vertices[v] for v in nd.verts)) for nd in self.leaves()
        )

    def refines(self, other):
        """True when every refinement of ``other`` is present here."""
        if self.root_key != other.root_key:
            return False
        return other.refined_paths() <= self.refined_paths()

    # -- mutations (return new trees) -------------------------------------------

    def _closure(self):
        while True:
            pending = [nd.id for nd in self.leaves() if self.hanging_count(nd.id) >= 2]
            if not pending:
                return
            for nid in pending:
                if self.nodes[nid].children is None:
                    self._refine_node(nid)

    def refine_cells(self, marked):
        """Refine the marked leaves (plus hanging-rule closure)."""
        new = self._clone()
        marked = sorted(set(int(m) for m in marked), key=lambda i: new.nodes[i].path)
        for nid in marked:
            if nid < 0 or nid >= len(new.nodes) or new.nodes[nid].children is not None:
                raise UnknownCell(f"node {nid} is not a leaf")
            new._refine_node(nid)
        new._closure()
        return new

    def uniform_refine(self, times=1):
        tree = self
        for _ in range(times):
            tree = tree.refine_cells(tree.leaf_ids())
        return tree

    def enforce_hanging_rule(self):
        new = self._clone()
        new._closure()
        return new

    def union(self, other):
        """Coarsest tree refining both inputs, rebuilt canonically.

        The refinement sets are merged and re-applied in breadth-first
        path order, so the result is independent of the operand order.
        """
        if self.root_key != other.root_key:
            raise RootMismatch("trees do not derive from the same initial mesh")
        paths = self.refined_paths() | other.refined_paths()
        new = self._root_copy()
        for path in sorted(paths, key=lambda p: (len(p), p)):
            nd = new.node_by_path(path)
            new._refine_node(nd.id)
        new._closure()
        return new

    def _root_copy(self):
        """Fresh tree with only the root level (canonical ids)."""
        new = object.__new__(HierarchicalTree)
        new.vertices = list(self.vertices[: self._n_root_vertices])
        new.nodes = []
        new.roots = []
        for r in self.roots:
            src = self.nodes[r]
            node = TreeNode(len(new.nodes), src.verts, None, 0, src.path, src.markers)
            new.nodes.append(node)
            new.roots.append(node.id)
        new.edge_mid = {}
        new.geometry = self.geometry
        new._n_root_vertices = self._n_root_vertices
        new.root_key = self.root_key
        return new

    def rebuild_from_paths(self, paths):
        """Canonical tree with exactly the given refined paths (no closure)."""
        new = self._root_copy()
        for path in sorted(paths, key=lambda p: (len(p), p)):
            nd = new.node_by_path(path)
            if nd is None:
                raise UnknownCell(f"refinement path {path} skips a level")
            new._refine_node(nd.id)
        return new


def union_trees(a, b):
    return a.union(b)


def union_all(trees):
    """Left fold of pairwise unions (order independent by construction)."""
    out = trees[0]
    for t in trees[1:]:
        out = out.union(t)
    return out
