import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgfem1d.linalg import EPS
from sgfem1d.mesh import hat_eval, patch, uniform_mesh


def test_uniform_mesh_vertices():
    m = uniform_mesh(4)
    assert m.N == 4 and m.h == 0.25
    assert np.array_equal(m.vertices, [0, 0.25, 0.5, 0.75, 1.0])
    assert m.vertices[-1] == 1.0
    with pytest.raises(ValueError):
        m.vertices[0] = 1.0


@pytest.mark.parametrize("N", [0, 1, 2.5])
def test_uniform_mesh_rejects(N):
    with pytest.raises(ValueError):
        uniform_mesh(N)


def test_patches():
    m = uniform_mesh(4)
    p = patch(m, 0)
    assert p.interval == (0.0, 0.25) and p.elements == (1,) and p.vertex_indices == (0, 1)
    p = patch(m, 2)
    assert p.interval == (0.25, 0.75) and p.elements == (2, 3) and p.center == 0.5
    assert p.element_bounds() == [(0.25, 0.5), (0.5, 0.75)]
    assert patch(m, 4).elements == (4,)
    with pytest.raises(IndexError):
        patch(m, 5)


def test_element_and_locate():
    m = uniform_mesh(10)
    assert m.element(1) == (0.0, 0.1)
    assert m.locate(0.0) == 1 and m.locate(1.0) == 10 and m.locate(0.55) == 6
    with pytest.raises(IndexError):
        m.element(0)


def test_hat_values():
    m = uniform_mesh(4)
    assert hat_eval(m, 1, 0.25) == (1.0, -4.0)
    assert hat_eval(m, 1, 0.125) == (0.5, 4.0)
    assert hat_eval(m, 4, 1.0) == (1.0, 4.0)
    assert hat_eval(m, 3, 1.0) == (0.0, -4.0)
    with pytest.raises(ValueError):
        hat_eval(m, 0, 1.5)


@settings(max_examples=50, deadline=None)
@given(N=st.integers(2, 60), x=st.floats(0, 1))
def test_partition_of_unity(N, x):
    m = uniform_mesh(N)
    vals = [hat_eval(m, i, x) for i in range(N + 1)]
    assert abs(sum(v for v, _ in vals) - 1.0) <= EPS
    assert abs(sum(d for _, d in vals)) <= 1e-12 * N


@pytest.mark.parametrize("i", [0, 3, 7])
def test_hat_derivative_matches_difference_quotient(i):
    m = uniform_mesh(7)
    x = np.linspace(0.01, 0.99, 37)
    x = x[np.min(np.abs(x[:, None] - m.vertices[None, :]), axis=1) > 1e-3]
    step = 1e-7
    fd = (hat_eval(m, i, x + step)[0] - hat_eval(m, i, x - step)[0]) / (2 * step)
    assert np.allclose(fd, hat_eval(m, i, x)[1], atol=1e-6)
