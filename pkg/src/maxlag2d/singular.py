"""Singular and nearly singular vertices.

A vertex is singular when the edges meeting there lie on exactly two
straight lines.  The measure ``Theta(z)`` is the largest ``|sin|`` of the
sum of two angles of consecutive triangles around ``z``; it vanishes at
singular vertices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

__all__ = ["VertexClassification", "corner_angles", "theta", "theta_all", "classify",
           "jump_theta", "alternating_sum", "NEARLY_SINGULAR"]

NEARLY_SINGULAR = 0.05


def corner_angles(mesh: Mesh) -> np.ndarray:
    """Interior angle of every triangle at each of its three vertices, shape ``(nt, 3)``."""
    p = mesh.points[mesh.triangles]
    u = np.roll(p, -1, axis=1) - p
    v = np.roll(p, 1, axis=1) - p
    cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    dot = (u * v).sum(-1)
    return np.arctan2(np.abs(cross), dot)


def theta_all(mesh: Mesh) -> np.ndarray:
    """``Theta`` at every vertex.

    Consecutive triangles in a vertex star are exactly the pairs sharing an
    interior edge through that vertex, so the maximum runs over interior
    edges.  Boundary vertices with one triangle have no such edge and get 0.
    """
    ang = corner_angles(mesh)
    tris = mesh.triangles
    e = mesh.edges
    et = mesh.edge_triangles
    inner = np.flatnonzero(et[:, 1] >= 0)
    out = np.zeros(mesh.n_vertices)
    for end in (0, 1):
        z = e[inner, end]
        s = np.zeros(len(inner))
        for side in (0, 1):
            t = et[inner, side]
            local = np.argmax(tris[t] == z[:, None], axis=1)
            s += ang[t, local]
        np.maximum.at(out, z, np.abs(np.sin(s)))
    return out


def theta(mesh: Mesh, z: int) -> float:
    """``Theta(z)`` for a single vertex."""
    from .mesh import vertex_star

    star = vertex_star(mesh, int(z))
    a = np.asarray(star.angles)
    if star.is_boundary:
        if len(a) == 1:
            return 0.0
        pairs = a[:-1] + a[1:]
    else:
        pairs = a + np.roll(a, -1)
    return float(np.max(np.abs(np.sin(pairs))))


@dataclass(frozen=True)
class VertexClassification:
    """Singular sets of a mesh.

    Attributes
    ----------
    theta : ndarray
        ``Theta`` per vertex.
    singular_interior, singular_boundary, singular_corner : ndarray of int
        Sorted vertex indices.  Corner singular vertices have a single
        triangle and are also boundary singular.
    theta_min : float
        Minimum of ``Theta`` over non-singular vertices (``inf`` if none).
    nearly_singular : ndarray of int
        Non-singular vertices with ``Theta < 0.05``.
    """
    theta: np.ndarray
    singular_interior: np.ndarray
    singular_boundary: np.ndarray
    singular_corner: np.ndarray
    theta_min: float
    nearly_singular: np.ndarray

    @property
    def singular(self) -> np.ndarray:
        return np.union1d(self.singular_interior, self.singular_boundary)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "singular_interior": self.singular_interior.tolist(),
            "singular_boundary": self.singular_boundary.tolist(),
            "singular_corner": self.singular_corner.tolist(),
            "theta_min": None if not np.isfinite(self.theta_min) else self.theta_min,
            "nearly_singular": self.nearly_singular.tolist(),
        }


def classify(mesh: Mesh, tol_singular: float = 1e-8, constructed=None) -> VertexClassification:
    """Classify vertices as singular by tolerance or by construction."""
    th = theta_all(mesh)
    sing = th < tol_singular
    if constructed is not None:
        sing[np.asarray(list(constructed) if isinstance(constructed, (set, frozenset))
                        else constructed, dtype=np.int64)] = True
    val = mesh.valence
    bnd = mesh.is_boundary_vertex
    interior = np.flatnonzero(sing & ~bnd)
    bad = interior[val[interior] != 4]
    if len(bad):
        raise ValueError(f"interior singular vertex {int(bad[0])} has {int(val[bad[0]])} triangles")
    boundary = np.flatnonzero(sing & bnd)
    corner = boundary[val[boundary] == 1]
    rest = th[~sing]
    theta_min = float(rest.min()) if len(rest) else float("inf")
    nearly = np.flatnonzero(~sing & (th < NEARLY_SINGULAR))
    return VertexClassification(th, interior, boundary, corner, theta_min, nearly)


def alternating_sum(values) -> float:
    """``v1 - v2 + v3 - ...`` for an even number of one-sided values."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or len(v) == 0 or len(v) % 2:
        raise ValueError("alternating sum needs an even, nonzero number of values")
    return float(v[0::2].sum() - v[1::2].sum())


def jump_theta(piecewise_values) -> float:
    """Alternating sum of the four one-sided values at a singular vertex."""
    v = np.asarray(piecewise_values, dtype=float)
    if v.shape != (4,):
        raise ValueError(f"expected 4 one-sided values, got {v.size}")
    return float(v[0] - v[1] + v[2] - v[3])
