from pathlib import Path

import numpy as np
import pytest

from maxlag2d.mesh import Mesh, generate_structured, read_mesh

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def crisscross6():
    return read_mesh(DATA / "crisscross6.tri")


@pytest.fixture
def square2():
    return generate_structured(1, "right-split")


@pytest.fixture
def unit_triangle():
    return Mesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])


def fan_mesh(directions):
    """Interior vertex at the origin with neighbours on the unit circle."""
    d = np.asarray(directions, dtype=float)
    pts = np.vstack([[0.0, 0.0], np.column_stack([np.cos(d), np.sin(d)])])
    n = len(d)
    tris = [[0, 1 + i, 1 + (i + 1) % n] for i in range(n)]
    return Mesh(pts, tris)
