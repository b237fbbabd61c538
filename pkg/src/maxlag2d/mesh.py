"""Triangulations of polygonal domains.

A :class:`Mesh` stores vertex coordinates and counterclockwise vertex
triples, and derives edges, boundary orientation and corner vertices on
demand.  Meshes are immutable: generators and perturbations return new
objects.

Examples
--------
>>> m = generate_structured(1, "criss-cross")
>>> m.n_vertices, m.n_triangles
(5, 4)
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Mesh",
    "MeshError",
    "MeshWarning",
    "VertexStar",
    "generate_structured",
    "generate_jittered",
    "perturb_vertices",
    "plant_near_singular_vertex",
    "mesh_size",
    "vertex_star",
    "read_mesh",
    "write_mesh",
    "CORNER_TURN_TOL",
]

#: A boundary vertex is a corner when the boundary turns by more than this.
CORNER_TURN_TOL = 1e-9

PATTERNS = {"right-split": "right-split", "right": "right-split",
            "criss-cross": "criss-cross", "crisscross": "criss-cross"}
DOMAINS = ("unit-square", "L-shape")


class MeshError(ValueError):
    """Raised for invalid or non-manifold triangulations."""


class MeshWarning(UserWarning):
    pass


def _signed_areas(points, triangles):
    p0 = points[triangles[:, 0]]
    d1 = points[triangles[:, 1]] - p0
    d2 = points[triangles[:, 2]] - p0
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


class Mesh:
    """Conforming triangulation of a simply connected polygon.

    Parameters
    ----------
    points : array_like, shape (nv, 2)
    triangles : array_like of int, shape (nt, 3)
        Vertex indices, counterclockwise.
    boundary_edges : array_like of int, shape (nb, 2), optional
        Boundary edges as stored in a mesh file.  Computed when omitted.
    boundary_markers : array_like of int, shape (nb,), optional
    corners : iterable of int, optional
        Corner vertices of the domain.  Detected from the boundary turn
        angle when omitted.
    """

    def __init__(self, points, triangles, boundary_edges=None,
                 boundary_markers=None, corners=None):
        points = np.array(points, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise MeshError("points must have shape (nv, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshError("triangles must have shape (nt, 3)")
        if not np.all(np.isfinite(points)):
            raise MeshError("non-finite vertex coordinates")
        nv = len(points)
        if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
            bad = int(np.flatnonzero(((triangles < 0) | (triangles >= nv)).any(1))[0])
            raise MeshError(f"dangling index in triangle {bad}: {triangles[bad].tolist()} "
                            f"with {nv} vertices")
        points.flags.writeable = False
        triangles.flags.writeable = False
        self._points = points
        self._triangles = triangles

        areas = _signed_areas(points, triangles)
        bad = np.flatnonzero(~(areas > 0))
        if bad.size:
            raise MeshError(f"triangle {int(bad[0])} is not counterclockwise with positive "
                            f"area (signed area {areas[bad[0]]:.3e})")
        self._check_topology()

        computed = self._computed_boundary_edges()
        if boundary_edges is None:
            bedges = computed
            markers = np.ones(len(bedges), dtype=np.int64)
        else:
            bedges = np.array(boundary_edges, dtype=np.int64).reshape(-1, 2)
            markers = (np.ones(len(bedges), dtype=np.int64) if boundary_markers is None
                       else np.array(boundary_markers, dtype=np.int64).reshape(-1))
            if len(markers) != len(bedges):
                raise MeshError("boundary_markers length differs from boundary_edges")
            if {tuple(sorted(e)) for e in bedges.tolist()} != \
                    {tuple(sorted(e)) for e in computed.tolist()}:
                raise MeshError("boundary edges do not match the edges with one incident triangle")
        bedges.flags.writeable = False
        markers.flags.writeable = False
        self._boundary_edges = bedges
        self._boundary_markers = markers

        if corners is None:
            self._corners = self._detect_corners()
        else:
            c = np.unique(np.asarray(list(corners), dtype=np.int64))
            if c.size and not np.all(self.is_boundary_vertex[c]):
                raise MeshError("corner vertices must be boundary vertices")
            self._corners = c
        self._corners.flags.writeable = False

    # -- basic data ---------------------------------------------------
    points = property(lambda self: self._points)
    triangles = property(lambda self: self._triangles)
    boundary_edges = property(lambda self: self._boundary_edges)
    boundary_markers = property(lambda self: self._boundary_markers)
    corners = property(lambda self: self._corners)

    @property
    def n_vertices(self) -> int:
        return len(self._points)

    @property
    def n_triangles(self) -> int:
        return len(self._triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def __repr__(self):
        return (f"Mesh(n_vertices={self.n_vertices}, n_triangles={self.n_triangles}, "
                f"n_boundary_edges={len(self._boundary_edges)})")

    def with_points(self, points) -> "Mesh":
        """Same connectivity and corners with new coordinates."""
        return Mesh(points, self._triangles, self._boundary_edges,
                    self._boundary_markers, self._corners)

    # -- topology -----------------------------------------------------
    def _directed_edges(self):
        t = self._triangles
        # local edge i is opposite local vertex i
        return np.stack([t[:, [1, 2, 0]], t[:, [2, 0, 1]]], axis=-1)

    def _check_topology(self):
        de = self._directed_edges().reshape(-1, 2)
        if len(np.unique(de[:, 0] * max(self.n_vertices, 1) + de[:, 1])) != len(de):
            raise MeshError("non-manifold or inconsistently oriented triangulation")
        nv, nt, ne = self.n_vertices, self.n_triangles, len(self.edges)
        counts = np.bincount(self.triangle_edges.ravel(), minlength=ne)
        if counts.max(initial=0) > 2:
            raise MeshError("an edge is shared by more than two triangles")
        if nv - ne + nt != 1:
            raise MeshError(f"Euler characteristic V - E + T = {nv - ne + nt}, expected 1 "
                            "(domain must be simply connected with no unused vertices)")

    @cached_property
    def _edge_data(self):
        de = np.sort(self._directed_edges().reshape(-1, 2), axis=1)
        nv = max(self.n_vertices, 1)
        keys, inverse = np.unique(de[:, 0] * nv + de[:, 1], return_inverse=True)
        inverse = inverse.reshape(-1)
        edges = np.column_stack([keys // nv, keys % nv])
        tri_edges = inverse.reshape(-1, 3)
        edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
        tri_index = np.repeat(np.arange(self.n_triangles), 3)
        order = np.argsort(inverse, kind="stable")
        se = inverse[order]
        first = np.ones(len(se), dtype=bool)
        first[1:] = se[1:] != se[:-1]
        edge_tris[se[first], 0] = tri_index[order[first]]
        edge_tris[se[~first], 1] = tri_index[order[~first]]
        return edges, tri_edges, edge_tris

    @property
    def edges(self) -> np.ndarray:
        """Unique edges ``(ne, 2)`` with sorted endpoints, lexicographic order."""
        return self._edge_data[0]

    @property
    def triangle_edges(self) -> np.ndarray:
        """Edge index of local edge ``i`` (opposite local vertex ``i``)."""
        return self._edge_data[1]

    @property
    def edge_triangles(self) -> np.ndarray:
        """Incident triangles per edge; second column is -1 on the boundary."""
        return self._edge_data[2]

    @cached_property
    def is_boundary_edge(self) -> np.ndarray:
        return self.edge_triangles[:, 1] < 0

    def _computed_boundary_edges(self):
        de = self._directed_edges().reshape(-1, 2)
        flags = self.is_boundary_edge[self.triangle_edges.reshape(-1)]
        return de[flags]

    @cached_property
    def boundary_oriented(self) -> np.ndarray:
        """Boundary edges oriented counterclockwise around the domain."""
        return self._computed_boundary_edges()

    @cached_property
    def is_boundary_vertex(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.is_boundary_edge].ravel()] = True
        return mask

    @cached_property
    def _boundary_links(self):
        """Incoming and outgoing boundary edge per boundary vertex."""
        be = self.boundary_oriented
        inc = np.full(self.n_vertices, -1, dtype=np.int64)
        out = np.full(self.n_vertices, -1, dtype=np.int64)
        if np.any(np.bincount(be[:, 0], minlength=self.n_vertices) > 1):
            raise MeshError("boundary is pinched at a vertex (non-manifold)")
        out[be[:, 0]] = np.arange(len(be))
        inc[be[:, 1]] = np.arange(len(be))
        return inc, out

    def boundary_turn_angles(self) -> np.ndarray:
        """Signed turn angle of the boundary at each vertex (0 for interior)."""
        inc, out = self._boundary_links
        be = self.boundary_oriented
        p = self._points
        turn = np.zeros(self.n_vertices)
        b = np.flatnonzero(inc >= 0)
        d1 = p[be[inc[b], 1]] - p[be[inc[b], 0]]
        d2 = p[be[out[b], 1]] - p[be[out[b], 0]]
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        dot = (d1 * d2).sum(1)
        turn[b] = np.arctan2(cross, dot)
        return turn

    def _detect_corners(self):
        turn = self.boundary_turn_angles()
        return np.flatnonzero(self.is_boundary_vertex & (np.abs(turn) > CORNER_TURN_TOL))

    def boundary_normals(self) -> np.ndarray:
        """Outward unit normal per oriented boundary edge."""
        be = self.boundary_oriented
        d = self._points[be[:, 1]] - self._points[be[:, 0]]
        d /= np.linalg.norm(d, axis=1)[:, None]
        return np.column_stack([d[:, 1], -d[:, 0]])

    @cached_property
    def _vertex_triangles(self):
        flat = self._triangles.ravel()
        order = np.argsort(flat, kind="stable")
        starts = np.searchsorted(flat[order], np.arange(self.n_vertices + 1))
        return order // 3, starts

    def triangles_of_vertex(self, z: int) -> np.ndarray:
        tri, starts = self._vertex_triangles
        return tri[starts[z]:starts[z + 1]]

    @cached_property
    def valence(self) -> np.ndarray:
        """Number of triangles incident to each vertex."""
        return np.bincount(self._triangles.ravel(), minlength=self.n_vertices)

    # -- geometry -----------------------------------------------------
    @cached_property
    def areas(self) -> np.ndarray:
        return _signed_areas(self._points, self._triangles)

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    def edge_lengths(self) -> np.ndarray:
        e = self.edges
        return np.linalg.norm(self._points[e[:, 1]] - self._points[e[:, 0]], axis=1)


@dataclass(frozen=True)
class VertexStar:
    """Triangles around a vertex in counterclockwise order.

    For boundary vertices ``triangles[0]`` and ``triangles[-1]`` carry
    the boundary edges through ``center``.
    """
    center: int
    triangles: tuple
    angles: np.ndarray
    is_boundary: bool
    #: ``neighbors[j]`` is the vertex on the first edge of ``triangles[j]``
    neighbors: tuple = ()

    @property
    def size(self) -> int:
        return len(self.triangles)


def vertex_star(mesh: Mesh, z: int) -> VertexStar:
    """Enumerate the triangles around ``z`` so consecutive ones share an edge."""
    if not 0 <= z < mesh.n_vertices:
        raise IndexError(f"vertex {z} out of range")
    tris = mesh.triangles_of_vertex(z)
    t = mesh.triangles[tris]
    loc = np.argmax(t == z, axis=1)
    nxt = t[np.arange(len(t)), (loc + 1) % 3]
    prv = t[np.arange(len(t)), (loc + 2) % 3]
    by_first = {}
    for i, a in enumerate(nxt.tolist()):
        if a in by_first:
            raise MeshError(f"non-manifold star at vertex {z}")
        by_first[a] = i
    boundary = bool(mesh.is_boundary_vertex[z])
    if boundary:
        starts = set(nxt.tolist()) - set(prv.tolist())
        if len(starts) != 1:
            raise MeshError(f"non-manifold star at boundary vertex {z}")
        start = by_first[starts.pop()]
    else:
        start = int(np.argmin(tris))
    order = [start]
    while len(order) < len(tris):
        b = int(prv[order[-1]])
        if b not in by_first:
            break
        i = by_first[b]
        if i == start:
            break
        order.append(i)
    if len(order) != len(tris):
        raise MeshError(f"non-manifold star at vertex {z}")
    p = mesh.points
    d1 = p[nxt[order]] - p[z]
    d2 = p[prv[order]] - p[z]
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    angles = np.arctan2(cross, (d1 * d2).sum(1))
    return VertexStar(center=int(z), triangles=tuple(int(tris[i]) for i in order),
                      angles=angles, is_boundary=boundary,
                      neighbors=tuple(int(nxt[i]) for i in order))


def mesh_size(mesh: Mesh) -> float:
    """Largest triangle diameter."""
    return float(mesh.edge_lengths().max())


# -- generators -------------------------------------------------------
def _grid_mesh(nx, ny, origin, spacing, keep, split):
    """Mesh from a grid of cells, each split along a diagonal or both."""
    ox, oy = origin
    dx, dy = spacing
    gid = -np.ones((ny + 1, nx + 1), dtype=np.int64)
    cells = [(i, j) for j in range(ny) for i in range(nx) if keep(i, j)]
    for i, j in cells:
        gid[j:j + 2, i:i + 2] = 0
    used = np.argwhere(gid == 0)  # (j, i) lexicographic
    gid[used[:, 0], used[:, 1]] = np.arange(len(used))
    pts = [(ox + i * dx, oy + j * dy) for j, i in used.tolist()]
    tris = []
    for i, j in cells:
        v00, v10 = gid[j, i], gid[j, i + 1]
        v01, v11 = gid[j + 1, i], gid[j + 1, i + 1]
        kind = split(i, j)
        if kind == "anti":
            tris += [(v00, v10, v01), (v10, v11, v01)]
        elif kind == "main":
            tris += [(v00, v10, v11), (v00, v11, v01)]
        else:
            c = len(pts)
            pts.append((ox + (i + 0.5) * dx, oy + (j + 0.5) * dy))
            tris += [(v00, v10, c), (v10, v11, c), (v11, v01, c), (v01, v00, c)]
    return np.array(pts, dtype=float), np.array(tris, dtype=np.int64), gid


def _domain_grid(n, domain):
    if domain == "unit-square":
        return n, n, (0.0, 0.0), (1.0 / n, 1.0 / n), (lambda i, j: True)
    if domain == "L-shape":
        if n % 2:
            raise ValueError("L-shape meshes need an even number of cells across")
        d = 2 * math.pi / n
        half = n // 2
        return n, n, (-math.pi, -math.pi), (d, d), (lambda i, j: not (i >= half and j < half))
    raise ValueError(f"unknown domain {domain!r}; expected one of {DOMAINS}")


def generate_structured(n: int, pattern: str = "right-split", domain: str = "unit-square") -> Mesh:
    """Structured triangulation with ``n`` cells across the domain.

    ``right-split`` cuts every grid cell along its SE-NW diagonal,
    ``criss-cross`` along both diagonals with a new center vertex.  The
    L-shape is ``[-pi, pi]^2`` minus ``[0, pi] x [-pi, 0]``; ``n`` must be
    even there.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    try:
        pattern = PATTERNS[pattern]
    except KeyError:
        raise ValueError(f"unknown pattern {pattern!r}") from None
    nx, ny, origin, spacing, keep = _domain_grid(n, domain)
    kind = "anti" if pattern == "right-split" else "cross"
    pts, tris, _ = _grid_mesh(nx, ny, origin, spacing, keep, lambda i, j: kind)
    return Mesh(pts, tris)


def generate_jittered(n: int, seed: int, jitter: float = 0.2, diagonals: str = "right",
                      domain: str = "unit-square", force_valence4: Sequence = ()) -> Mesh:
    """Grid triangulation with interior vertices moved uniformly at random.

    Each interior grid vertex moves by up to ``jitter`` times the grid
    spacing in each coordinate.  ``diagonals="random"`` picks the
    diagonal of each cell at random, which produces interior vertices
    with only four triangles.  Grid vertices ``(i, j)`` listed in
    ``force_valence4`` get four triangles by construction.

    Draws from ``PCG64(seed)``: one integer per cell (random diagonals
    only, cell order), then two uniforms per interior vertex in vertex
    order.
    """
    if not 0 <= jitter < 0.25:
        raise ValueError("jitter must lie in [0, 0.25)")
    nx, ny, origin, spacing, keep = _domain_grid(int(n), domain)
    rng = np.random.Generator(np.random.PCG64(seed))
    if diagonals == "random":
        choice = rng.integers(0, 2, size=(ny, nx))
    elif diagonals == "right":
        choice = np.zeros((ny, nx), dtype=np.int64)
    else:
        raise ValueError("diagonals must be 'right' or 'random'")
    for gi, gj in force_valence4:
        if not (0 < gi < nx and 0 < gj < ny):
            raise ValueError(f"grid vertex {(gi, gj)} is not interior")
        # cells around (gi, gj) take the diagonal avoiding it
        for ci, cj, d in ((gi - 1, gj - 1, 0), (gi, gj, 0), (gi, gj - 1, 1), (gi - 1, gj, 1)):
            choice[cj, ci] = d
    split = lambda i, j: "anti" if choice[j, i] == 0 else "main"  # noqa: E731
    pts, tris, _ = _grid_mesh(nx, ny, origin, spacing, keep, split)
    base = Mesh(pts, tris)
    interior = np.flatnonzero(~base.is_boundary_vertex)
    shift = rng.uniform(-1.0, 1.0, size=(len(interior), 2)) * jitter * np.asarray(spacing)
    pts = pts.copy()
    pts[interior] += shift
    return _checked(base, pts, "jitter")


def _checked(mesh, pts, what):
    areas = _signed_areas(pts, mesh.triangles)
    bad = np.flatnonzero(~(areas > 0))
    if bad.size:
        raise MeshError(f"{what} inverts or degenerates triangle {int(bad[0])}")
    return mesh.with_points(pts)


def _select(mesh, selector, tol_singular):
    if isinstance(selector, str):
        if selector == "singular-vertices":
            from .singular import classify
            cls = classify(mesh, tol_singular=tol_singular)
            return np.union1d(cls.singular_interior, cls.singular_boundary)
        if selector == "interior-valence-4":
            return np.flatnonzero((mesh.valence == 4) & ~mesh.is_boundary_vertex)
        raise ValueError(f"unknown selector {selector!r}")
    sel = np.unique(np.asarray(list(selector), dtype=np.int64))
    if sel.size and (sel.min() < 0 or sel.max() >= mesh.n_vertices):
        raise IndexError("selected vertex out of range")
    return sel


def perturb_vertices(mesh: Mesh, selector, alpha: float, seed: int, *, h: float | None = None,
                     include_boundary: bool = False, tol_singular: float = 1e-8) -> Mesh:
    """Move selected vertices to ``z + (s1 * alpha * h, s2 * alpha * h)``.

    Parameters
    ----------
    selector : {"singular-vertices", "interior-valence-4"} or iterable of int
    alpha : float
        Relative perturbation size, ``0 <= alpha <= 0.25``.
    seed : int
        Seed of ``PCG64``; exactly two sign draws are consumed per selected
        vertex, in increasing vertex index.
    h : float, optional
        Length scale, default :func:`mesh_size`.
    include_boundary : bool
        Slide selected non-corner boundary vertices along their boundary
        line by ``s1 * alpha * h`` instead of skipping them.
    """
    if not 0 <= alpha <= 0.25:
        raise ValueError("alpha must lie in [0, 0.25]")
    sel = _select(mesh, selector, tol_singular)
    h = mesh_size(mesh) if h is None else float(h)
    rng = np.random.Generator(np.random.PCG64(seed))
    signs = 2.0 * rng.integers(0, 2, size=(len(sel), 2)) - 1.0
    if alpha == 0:
        return mesh
    pts = np.array(mesh.points)
    normals = mesh.boundary_normals()
    _, out = mesh._boundary_links
    corners = set(mesh.corners.tolist())
    for z, s in zip(sel.tolist(), signs):
        if not mesh.is_boundary_vertex[z]:
            pts[z] += alpha * h * s
        elif include_boundary and z not in corners:
            n = normals[out[z]]
            pts[z] += s[0] * alpha * h * np.array([-n[1], n[0]])
    return _checked(mesh, pts, "perturbation")


def plant_near_singular_vertex(mesh: Mesh, z: int, offset: float, *, h: float | None = None) -> Mesh:
    """Move an interior four-triangle vertex close to a singular position.

    The vertex is placed at the crossing of the two lines joining
    opposite star neighbours and then shifted by ``offset * h`` along the
    first line, so one pair of edges stays collinear and the other misses
    collinearity by an angle of order ``offset``.
    """
    star = vertex_star(mesh, z)
    if star.is_boundary or star.size != 4:
        raise MeshError(f"vertex {z} is not an interior vertex with four triangles")
    p = mesh.points
    w = p[list(star.neighbors)]
    d1, d2 = w[2] - w[0], w[3] - w[1]
    a = np.column_stack([d1, -d2])
    s, _ = np.linalg.solve(a, w[1] - w[0])
    h = mesh_size(mesh) if h is None else float(h)
    pts = np.array(p)
    pts[z] = w[0] + s * d1 + offset * h * d1 / np.linalg.norm(d1)
    return _checked(mesh, pts, "planting")


# -- file I/O ---------------------------------------------------------
class MeshFormatError(MeshError):
    pass


def read_mesh(path) -> Mesh:
    """Read a ``.tri`` file.

    Layout: ``nv nt nb`` on the first line, then ``nv`` lines ``x y``,
    ``nt`` lines ``i j k`` (0-based, counterclockwise) and ``nb`` lines
    ``i j marker``; with ``nb = 0`` the boundary is computed.  Clockwise
    triangles are reoriented with a warning.
    """
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        nv, nt, nb = (int(x) for x in lines[0])
    except (ValueError, IndexError):
        raise MeshFormatError("first line must hold 'nv nt nb'") from None
    if len(lines) != 1 + nv + nt + nb:
        raise MeshFormatError(f"malformed counts: header announces {nv + nt + nb} records, "
                              f"file has {len(lines) - 1}")
    try:
        pts = np.array([[float(x) for x in ln] for ln in lines[1:1 + nv]], dtype=float)
        tris = np.array([[int(x) for x in ln] for ln in lines[1 + nv:1 + nv + nt]], dtype=np.int64)
        bnd = np.array([[int(x) for x in ln] for ln in lines[1 + nv + nt:]], dtype=np.int64)
    except ValueError as exc:
        raise MeshFormatError(f"unparsable record: {exc}") from None
    if pts.shape != (nv, 2) or tris.shape != (nt, 3) or (nb and bnd.shape != (nb, 3)):
        raise MeshFormatError("wrong number of fields in a record")
    bnd = bnd.reshape(-1, 3)
    for arr in (tris, bnd[:, :2]):
        if arr.size and (arr.min() < 0 or arr.max() >= nv):
            raise MeshFormatError(f"dangling index {int(arr.max())} with {nv} vertices")
    areas = _signed_areas(pts, tris)
    flip = areas < 0
    if flip.any():
        warnings.warn(f"reoriented {int(flip.sum())} clockwise triangles", MeshWarning)
        tris[flip] = tris[flip][:, [0, 2, 1]]
    if nb == 0:
        return Mesh(pts, tris)
    return Mesh(pts, tris, bnd[:, :2], bnd[:, 2])


def write_mesh(mesh: Mesh, path) -> None:
    """Write ``mesh`` in ``.tri`` format with round-trip exact coordinates."""
    out = [f"{mesh.n_vertices} {mesh.n_triangles} {len(mesh.boundary_edges)}"]
    out += [f"{float(x)!r} {float(y)!r}" for x, y in mesh.points.tolist()]
    out += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    out += [f"{i} {j} {m}" for (i, j), m in zip(mesh.boundary_edges.tolist(),
                                                mesh.boundary_markers.tolist())]
    Path(path).write_text("\n".join(out) + "\n")
