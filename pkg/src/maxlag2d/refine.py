"""Macro-element refinements of a triangulation.

Vertex numbering of a refined mesh is canonical: parent vertices first,
then one interior point per parent triangle in parent order, then (for
Powell-Sabin) one split point per parent edge in sorted edge order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mesh import Mesh, MeshError

__all__ = ["RefinedMesh", "incenter", "powell_sabin", "clough_tocher", "refine",
           "write_provenance", "read_provenance"]


@dataclass(frozen=True)
class RefinedMesh:
    """A refined triangulation with its provenance.

    Attributes
    ----------
    mesh : Mesh
    parent : ndarray of int
        Parent triangle of every refined triangle.
    split_kind : {"powell-sabin", "clough-tocher", "none"}
    constructed_singular_points : ndarray of int
        Split points on parent edges (Powell-Sabin only).  They lie on
        exactly two straight lines by construction.
    interior_points : ndarray of int
        Incenter or barycenter vertex of each parent triangle.
    """
    mesh: Mesh
    parent: np.ndarray
    split_kind: str
    constructed_singular_points: np.ndarray = field(
        default_factory=lambda: np.zeros(0, dtype=np.int64))
    interior_points: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def incenter(p0, p1, p2) -> np.ndarray:
    """Incenter ``(a p0 + b p1 + c p2) / (a + b + c)``, side ``a`` opposite ``p0``."""
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    a = np.linalg.norm(p2 - p1)
    b = np.linalg.norm(p0 - p2)
    c = np.linalg.norm(p1 - p0)
    d1, d2 = p1 - p0, p2 - p0
    if abs(d1[0] * d2[1] - d1[1] * d2[0]) <= 1e-14 * max(a, b, c) ** 2:
        raise ValueError("degenerate triangle has no incenter")
    return (a * p0 + b * p1 + c * p2) / (a + b + c)


def _incenters(mesh):
    p = mesh.points[mesh.triangles]  # (nt, 3, 2)
    side = np.linalg.norm(p[:, [2, 0, 1]] - p[:, [1, 2, 0]], axis=2)  # opposite each vertex
    return (side[:, :, None] * p).sum(1) / side.sum(1)[:, None]


def _edge_points(mesh, centers):
    """Crossing of the center-center segment with each interior edge, midpoints on the boundary."""
    p = mesh.points
    e = mesh.edges
    et = mesh.edge_triangles
    a, b = p[e[:, 0]], p[e[:, 1]]
    out = 0.5 * (a + b)
    inner = np.flatnonzero(et[:, 1] >= 0)
    c1, c2 = centers[et[inner, 0]], centers[et[inner, 1]]
    d = c2 - c1
    f = b[inner] - a[inner]
    rhs = a[inner] - c1
    det = d[:, 0] * (-f[:, 1]) - d[:, 1] * (-f[:, 0])
    s = (rhs[:, 0] * (-f[:, 1]) - rhs[:, 1] * (-f[:, 0])) / det
    t = (d[:, 0] * rhs[:, 1] - d[:, 1] * rhs[:, 0]) / det
    eps = 1e-12
    bad = ~((t > eps) & (t < 1 - eps) & (s > eps) & (s < 1 - eps))
    if bad.any():
        raise MeshError(f"degenerate PS geometry at edge {int(inner[np.argmax(bad)])}")
    out[inner] = a[inner] + t[:, None] * f
    return out


def _split_boundary(mesh, edge_vertex):
    """Boundary edges of the refined mesh: each parent boundary edge halves."""
    nv = max(mesh.n_vertices, 1)
    lookup = {int(k): i for i, k in enumerate((mesh.edges[:, 0] * nv + mesh.edges[:, 1]).tolist())}
    be, markers = [], []
    for (i, j), m in zip(mesh.boundary_edges.tolist(), mesh.boundary_markers.tolist()):
        k = edge_vertex[lookup[min(i, j) * nv + max(i, j)]]
        be += [(i, k), (k, j)]
        markers += [m, m]
    return np.array(be, dtype=np.int64), np.array(markers, dtype=np.int64)


def powell_sabin(mesh: Mesh) -> RefinedMesh:
    """Split every triangle into six around its incenter.

    Incenters are joined to the triangle vertices, to the neighbouring
    incenters across interior edges (through a new vertex on the edge) and
    to the midpoints of boundary edges.
    """
    nv, nt, ne = mesh.n_vertices, mesh.n_triangles, mesh.n_edges
    centers = _incenters(mesh)
    epts = _edge_points(mesh, centers)
    pts = np.vstack([mesh.points, centers, epts])
    cidx = nv + np.arange(nt)
    eidx = nv + nt + np.arange(ne)
    t = mesh.triangles
    te = eidx[mesh.triangle_edges]  # split vertex on the edge opposite local vertex i
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    m_ab, m_bc, m_ca = te[:, 2], te[:, 0], te[:, 1]
    children = np.stack([
        np.column_stack([a, m_ab, cidx]), np.column_stack([m_ab, b, cidx]),
        np.column_stack([b, m_bc, cidx]), np.column_stack([m_bc, c, cidx]),
        np.column_stack([c, m_ca, cidx]), np.column_stack([m_ca, a, cidx]),
    ], axis=1).reshape(-1, 3)
    be, markers = _split_boundary(mesh, eidx)
    refined = Mesh(pts, children, be, markers, corners=mesh.corners)
    return RefinedMesh(mesh=refined, parent=np.repeat(np.arange(nt), 6),
                       split_kind="powell-sabin", constructed_singular_points=eidx,
                       interior_points=cidx)


def clough_tocher(mesh: Mesh) -> RefinedMesh:
    """Split every triangle into three around its barycenter."""
    nv, nt = mesh.n_vertices, mesh.n_triangles
    bary = mesh.points[mesh.triangles].mean(axis=1)
    pts = np.vstack([mesh.points, bary])
    g = nv + np.arange(nt)
    a, b, c = mesh.triangles.T
    children = np.stack([np.column_stack([a, b, g]), np.column_stack([b, c, g]),
                         np.column_stack([c, a, g])], axis=1).reshape(-1, 3)
    refined = Mesh(pts, children, mesh.boundary_edges, mesh.boundary_markers,
                   corners=mesh.corners)
    return RefinedMesh(mesh=refined, parent=np.repeat(np.arange(nt), 3),
                       split_kind="clough-tocher", interior_points=g)


SPLITS = {"ps": powell_sabin, "powell-sabin": powell_sabin,
          "ct": clough_tocher, "clough-tocher": clough_tocher}


def refine(mesh: Mesh, split: str) -> RefinedMesh:
    """Dispatch on ``split`` in ``{"ps", "ct", "none"}``."""
    if split in (None, "none"):
        return RefinedMesh(mesh=mesh, parent=np.arange(mesh.n_triangles), split_kind="none")
    try:
        return SPLITS[split](mesh)
    except KeyError:
        raise ValueError(f"unknown split {split!r}") from None


def write_provenance(refined: RefinedMesh, path) -> None:
    data = {
        "split_kind": refined.split_kind,
        "parent": refined.parent.tolist(),
        "constructed_singular_points": refined.constructed_singular_points.tolist(),
        "interior_points": refined.interior_points.tolist(),
    }
    Path(path).write_text(json.dumps(data, indent=1))


def read_provenance(mesh: Mesh, path) -> RefinedMesh:
    data = json.loads(Path(path).read_text())
    parent = np.asarray(data["parent"], dtype=np.int64)
    if len(parent) != mesh.n_triangles:
        raise ValueError("provenance does not match the mesh")
    return RefinedMesh(
        mesh=mesh, parent=parent, split_kind=data["split_kind"],
        constructed_singular_points=np.asarray(data["constructed_singular_points"], dtype=np.int64),
        interior_points=np.asarray(data["interior_points"], dtype=np.int64))
