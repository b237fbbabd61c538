"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .mesh import Mesh
from .refine import RefinedMesh

__all__ = ["check_mesh", "check_refined", "check_degree", "check_positive", "check_choice",
           "check_int"]


def check_mesh(obj, name: str = "mesh") -> Mesh:
    """Return the triangulation behind a ``Mesh`` or ``RefinedMesh``."""
    if isinstance(obj, RefinedMesh):
        return obj.mesh
    if isinstance(obj, Mesh):
        return obj
    raise TypeError(f"{name} must be a Mesh or RefinedMesh, got {type(obj).__name__}")


def check_refined(obj, name: str = "mesh") -> RefinedMesh:
    """Wrap a plain mesh as an unsplit ``RefinedMesh``."""
    if isinstance(obj, RefinedMesh):
        return obj
    mesh = check_mesh(obj, name)
    return RefinedMesh(mesh=mesh, parent=np.arange(mesh.n_triangles), split_kind="none")


def check_int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, bool) or not (isinstance(value, numbers.Real)
                                           and float(value).is_integer()):
            raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return value


def check_degree(degree, minimum: int = 1) -> int:
    return check_int(degree, "degree", minimum)


def check_positive(value, name: str, allow_zero: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be {'nonnegative' if allow_zero else 'positive'}, got {value}")
    return value


def check_choice(value, name: str, choices) -> str:
    if value not in choices:
        raise ValueError(f"{name} must be one of {tuple(choices)}, got {value!r}")
    return value
