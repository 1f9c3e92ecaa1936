import os
import subprocess
import sys

import numpy as np
import pytest

from chemolog import kernels

nb = kernels.get_backend("numba")
npk = kernels.get_backend("numpy")
SHAPES = [(1, 5), (7, 3), (16, 16), (9, 24)]


def coeffs(rng, ny, nx):
    kx = np.zeros((ny, nx + 1))
    ky = np.zeros((ny + 1, nx))
    kx[:, 1:-1] = rng.uniform(0.0, 2.0, (ny, nx - 1))
    ky[1:-1, :] = rng.uniform(0.0, 2.0, (ny - 1, nx))
    return kx, ky


@pytest.mark.parametrize("shape", SHAPES)
def test_operator_agreement(shape):
    rng = np.random.default_rng(sum(shape))
    x = rng.normal(size=shape)
    kx, ky = coeffs(rng, *shape)
    a = nb.apply_operator(x, 1.3, kx, ky, 0.1, 0.2)
    b = npk.apply_operator(x, 1.3, kx, ky, 0.1, 0.2)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-12)
    np.testing.assert_allclose(nb.operator_diagonal(1.3, kx, ky, 0.1, 0.2),
                               npk.operator_diagonal(1.3, kx, ky, 0.1, 0.2), rtol=1e-14)


@pytest.mark.parametrize("shape", SHAPES)
@pytest.mark.parametrize("jacobi", [False, True])
def test_cg_agreement(shape, jacobi):
    rng = np.random.default_rng(7)
    b = rng.uniform(0, 3, shape)
    kx, ky = coeffs(rng, *shape)
    x0 = np.zeros(shape)
    ra = nb.cg(b, x0, 1.0, kx, ky, 0.1, 0.1, 1e-12, 2000, jacobi)
    rb = npk.cg(b, x0, 1.0, kx, ky, 0.1, 0.1, 1e-12, 2000, jacobi)
    assert ra[3] and rb[3]
    assert ra[2] <= 1e-12 and rb[2] <= 1e-12
    np.testing.assert_allclose(ra[0], rb[0], atol=1e-10)


@pytest.mark.parametrize("alpha", [0.0, 0.25, 1.0])
def test_upwind_flux_agreement(alpha):
    rng = np.random.default_rng(11)
    u = rng.uniform(0, 10, (12, 9))
    v = rng.uniform(0, 3, (12, 9))
    sx, sy = coeffs(rng, 12, 9)
    fa = nb.upwind_flux(u, v, sx, sy, alpha, 0.1, 0.15)
    fb = npk.upwind_flux(u, v, sx, sy, alpha, 0.1, 0.15)
    for a, b in zip(fa, fb):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(nb.flux_divergence(*fa, 0.1, 0.15),
                               npk.flux_divergence(*fb, 0.1, 0.15), rtol=1e-12, atol=1e-11)


@pytest.mark.parametrize("backend", [nb, npk])
def test_single_face_flux_value(backend):
    # one interior x-face, grad v = 2, S = 1, alpha = 1, upwind u = 1
    u = np.array([[1.0, 0.0]])
    v = np.array([[0.0, 1.0]])
    sx = np.array([[0.0, 1.0, 0.0]])
    sy = np.zeros((2, 2))
    fx, fy = backend.upwind_flux(u, v, sx, sy, 1.0, 0.5, 1.0)
    assert fx[0, 1] == pytest.approx(2.0 * np.log(1.0 + np.e), rel=1e-14)
    assert fx[0, 1] == pytest.approx(2.6265, abs=1e-4)
    assert np.all(fy == 0)


@pytest.mark.parametrize("backend", [nb, npk])
def test_trivial_fluxes_vanish(backend):
    rng = np.random.default_rng(0)
    sx, sy = coeffs(rng, 6, 6)
    u = rng.uniform(0, 5, (6, 6))
    for uu, vv in ((u, np.full((6, 6), 2.0)), (np.zeros((6, 6)), rng.uniform(0, 1, (6, 6)))):
        fx, fy = backend.upwind_flux(uu, vv, sx, sy, 0.5, 0.1, 0.1)
        assert np.all(fx == 0) and np.all(fy == 0)


def test_backend_env_flag():
    code = "from chemolog import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, CHEMOLOG_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["CHEMOLOG_BACKEND"] = "fortran"
    bad = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert bad.returncode != 0 and "CHEMOLOG_BACKEND" in bad.stderr
    with pytest.raises(ValueError):
        kernels.get_backend("cuda")
