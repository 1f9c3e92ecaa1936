"""Vectorised numpy implementations of the hot kernels.

Arrays are cell-centred with shape ``(ny, nx)``; x-face arrays have shape
``(ny, nx + 1)`` and y-face arrays ``(ny + 1, nx)``.  Boundary faces of the
coefficient arrays are expected to hold zero (no-flux).
"""

import math

import numpy as np

E = math.e


def apply_operator(x, a, kx, ky, hx, hy):
    """Return ``a*x - div(K grad x)`` with face coefficients ``kx``, ``ky``."""
    ny, nx = x.shape
    fx = np.zeros((ny, nx + 1))
    fy = np.zeros((ny + 1, nx))
    fx[:, 1:-1] = kx[:, 1:-1] * (x[:, 1:] - x[:, :-1]) / hx
    fy[1:-1, :] = ky[1:-1, :] * (x[1:, :] - x[:-1, :]) / hy
    return a * x - ((fx[:, 1:] - fx[:, :-1]) / hx + (fy[1:, :] - fy[:-1, :]) / hy)


def operator_diagonal(a, kx, ky, hx, hy):
    return a + (kx[:, :-1] + kx[:, 1:]) / hx**2 + (ky[:-1, :] + ky[1:, :]) / hy**2


def cg(b, x0, a, kx, ky, hx, hy, tol, max_iter, jacobi):
    """Conjugate gradients for ``A x = b`` with the constant mode split off.

    ``A`` maps constants to ``a`` times themselves, so the mean of ``b`` is
    solved exactly and CG only iterates on the mean-free part.

    Returns ``(x, iterations, true_relative_residual, converged)``.
    """
    bnorm = math.sqrt(float(np.vdot(b, b)))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0, True
    bmean = b.mean()
    xmean = bmean / a
    bp = b - bmean
    x = x0 - x0.mean()
    dinv = 1.0 / operator_diagonal(a, kx, ky, hx, hy) if jacobi else None
    target = tol * bnorm

    r = bp - apply_operator(x, a, kx, ky, hx, hy)
    r -= r.mean()
    z = r * dinv if jacobi else r.copy()
    z -= z.mean()
    p = z.copy()
    rz = float(np.vdot(r, z))
    it = 0
    converged = False
    restarted = False
    while True:
        if math.sqrt(float(np.vdot(r, r))) <= target:
            rt = b - apply_operator(x + xmean, a, kx, ky, hx, hy)
            if math.sqrt(float(np.vdot(rt, rt))) <= target or restarted:
                converged = True
                break
            # recursive residual drifted: restart from the true one
            restarted = True
            r = rt - rt.mean()
            z = r * dinv if jacobi else r.copy()
            z -= z.mean()
            p = z.copy()
            rz = float(np.vdot(r, z))
            continue
        if it >= max_iter:
            break
        ap = apply_operator(p, a, kx, ky, hx, hy)
        pap = float(np.vdot(p, ap))
        if pap <= 0.0:
            break
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        z = r * dinv if jacobi else r.copy()
        z -= z.mean()
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
        restarted = False
        it += 1

    x = x + xmean
    rt = b - apply_operator(x, a, kx, ky, hx, hy)
    rtnorm = math.sqrt(float(np.vdot(rt, rt)))
    # same unnormalised test as the loop, so rounding in the division cannot flip it
    return x, it, rtnorm / bnorm, converged and rtnorm <= target


def upwind_flux(u, v, sx, sy, alpha, hx, hy):
    """Upwind chemotactic face fluxes ``S(v_face) grad v * u_up ln^alpha(u_up + e)``.

    ``sx``/``sy`` hold S evaluated at the face-averaged signal.
    """
    ny, nx = u.shape
    g = u * np.log(u + E) ** alpha if alpha != 0.0 else u
    fx = np.zeros((ny, nx + 1))
    fy = np.zeros((ny + 1, nx))
    wx = sx[:, 1:-1] * (v[:, 1:] - v[:, :-1]) / hx
    wy = sy[1:-1, :] * (v[1:, :] - v[:-1, :]) / hy
    fx[:, 1:-1] = np.where(wx > 0.0, wx * g[:, :-1], wx * g[:, 1:])
    fy[1:-1, :] = np.where(wy > 0.0, wy * g[:-1, :], wy * g[1:, :])
    return fx, fy


def flux_divergence(fx, fy, hx, hy):
    return (fx[:, 1:] - fx[:, :-1]) / hx + (fy[1:, :] - fy[:-1, :]) / hy
