import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from chemolog.grid import (
    Grid, cell_grad_sq, divergence, gradient_faces, grad_sq_integral, integrate,
    laplacian_neumann, read_field, sup_norm, write_field,
)


def fields(ny, nx):
    return arrays(float, (ny, nx), elements=st.floats(-1e3, 1e3, allow_nan=False))


def test_cell_centres():
    g = Grid(4, 2, 2.0, 1.0)
    assert g.hx == 0.5 and g.hy == 0.5
    np.testing.assert_allclose(g.x, [0.25, 0.75, 1.25, 1.75])
    np.testing.assert_allclose(g.y, [0.25, 0.75])
    assert g.area == 2.0
    assert g.cell_index(1.3, 0.9) == (1, 2)


@pytest.mark.parametrize("bad", [dict(nx=0, ny=4), dict(nx=2.5, ny=4), dict(nx=4, ny=4, lx=-1.0)])
def test_grid_rejects_bad_sizes(bad):
    with pytest.raises(ValueError):
        Grid(**bad)


def test_laplacian_of_constant_is_zero():
    g = Grid(16, 8)
    assert np.all(laplacian_neumann(g.full(3.7), g) == 0.0)


def test_cosine_is_discrete_eigenfunction():
    # oracle: closed-form eigenvalue of the mirrored three-point stencil
    g = Grid(32, 8, 2.0, 1.0)
    X, _ = g.mesh()
    f = np.cos(math.pi * X / g.lx)
    lam = -(2.0 - 2.0 * math.cos(math.pi * g.hx / g.lx)) / g.hx**2
    np.testing.assert_allclose(laplacian_neumann(f, g), lam * f, atol=1e-10)


def test_linear_profile_on_strip():
    # hand-applied stencil: interior cells see zero, the end cells see the
    # missing ghost gradient of +-1/hx
    g = Grid(4, 1)
    X, _ = g.mesh()
    lap = laplacian_neumann(X.copy(), g)
    np.testing.assert_allclose(lap[0], [1 / g.hx, 0.0, 0.0, -1 / g.hx], atol=1e-12)


def test_gradient_faces_examples():
    g = Grid(16, 4)
    X, _ = g.mesh()
    gr = gradient_faces(X, g)
    np.testing.assert_allclose(gr.fx[:, 1:-1], 1.0, rtol=1e-12)
    assert np.all(gr.fx[:, [0, -1]] == 0) and np.all(gr.fy == 0)

    g2 = Grid(2, 1, 1.0, 1.0)
    assert g2.hx == 0.5
    assert gradient_faces(np.array([[0.0, 3.0]]), g2).fx[0, 1] == 6.0


def test_integrate_examples():
    g = Grid(128, 128)
    assert integrate(g.full(2.0), g) == 2.0
    assert integrate(g.zeros(), g) == 0.0

    def gauss(grid):
        X, Y = grid.mesh()
        return integrate(np.exp(-50 * ((X - 0.5) ** 2 + (Y - 0.5) ** 2)), grid)

    fine = gauss(Grid(512, 512))
    assert abs(gauss(g) - fine) <= 1e-4 * fine


def test_norm_examples():
    g = Grid(8, 8)
    assert sup_norm(g.full(-2.5)) == 2.5
    assert grad_sq_integral(g.full(4.0), g) == 0.0
    f = g.zeros()
    f[3, 4] = -5.0
    assert sup_norm(f) == 5.0


def test_grad_sq_of_x_converges_to_one():
    errs = []
    for n in (16, 32, 64):
        g = Grid(n, n)
        X, _ = g.mesh()
        errs.append(abs(grad_sq_integral(X, g) - 1.0))
        # per-cell reconstruction of the same quantity
        assert abs(integrate(cell_grad_sq(X, g), g) - 1.0) <= 2.0 / n
    assert errs[0] > errs[1] > errs[2] and errs[2] <= 1.0 / 64


@settings(max_examples=50, deadline=None)
@given(fields(6, 9))
def test_divergence_theorem(f):
    g = Grid(9, 6, 1.3, 0.7)
    lap = laplacian_neumann(f, g)
    scale = max(1.0, float(np.abs(f).max())) / min(g.hx, g.hy) ** 2
    assert abs(np.sum(lap) * g.cell_area) <= 1e-12 * g.nx * g.ny * scale


@settings(max_examples=50, deadline=None)
@given(fields(5, 7), fields(5, 7), st.floats(-10, 10), st.floats(-10, 10))
def test_laplacian_is_linear(f, h, a, b):
    g = Grid(7, 5)
    lhs = laplacian_neumann(a * f + b * h, g)
    rhs = a * laplacian_neumann(f, g) + b * laplacian_neumann(h, g)
    scale = (abs(a) + abs(b) + 1) * (np.abs(f).max() + np.abs(h).max() + 1) / g.hx**2
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * scale)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_gradient_of_constant_exactly_zero(c):
    g = Grid(5, 4)
    gr = gradient_faces(g.full(c), g)
    assert np.all(gr.fx == 0) and np.all(gr.fy == 0)


@settings(max_examples=50, deadline=None)
@given(fields(4, 6))
def test_mirror_symmetry(f):
    g = Grid(6, 4)
    np.testing.assert_array_equal(laplacian_neumann(f[:, ::-1], g), laplacian_neumann(f, g)[:, ::-1])


def test_divergence_of_zero_faces():
    g = Grid(4, 4)
    assert np.all(divergence(gradient_faces(g.zeros(), g), g) == 0)


@settings(max_examples=25, deadline=None)
@given(fields(3, 4), st.floats(0, 1e3, allow_nan=False))
def test_snapshot_round_trip(tmp_path_factory, f, t):
    g = Grid(4, 3, 0.1, 7.0)
    path = tmp_path_factory.mktemp("snap") / "f.txt"
    write_field(path, f, g, t)
    back, g2, t2 = read_field(path)
    assert g2 == g and t2 == t
    np.testing.assert_array_equal(back, f)
    assert path.read_text().splitlines()[0] == f"4 3 0.1 7.0 {t!r}"


def test_read_field_rejects_bad_shape(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2 2 1.0 1.0 0.0\n1 2\n")
    with pytest.raises(ValueError, match="expected 2 rows"):
        read_field(p)
