"""Loop kernels compiled with numba.

Same contracts as :mod:`chemolog.kernels._numpy`; results agree with the
numpy path up to floating-point summation order.
"""

import math

import numpy as np
from numba import njit

E = math.e

_OPTS = {"cache": True, "fastmath": False}


@njit(**_OPTS)
def _apply(x, a, kx, ky, hx, hy, out):
    ny, nx = x.shape
    ihx2 = 1.0 / (hx * hx)
    ihy2 = 1.0 / (hy * hy)
    for j in range(ny):
        for i in range(nx):
            xc = x[j, i]
            acc = a * xc
            if i > 0:
                acc += kx[j, i] * (xc - x[j, i - 1]) * ihx2
            if i < nx - 1:
                acc += kx[j, i + 1] * (xc - x[j, i + 1]) * ihx2
            if j > 0:
                acc += ky[j, i] * (xc - x[j - 1, i]) * ihy2
            if j < ny - 1:
                acc += ky[j + 1, i] * (xc - x[j + 1, i]) * ihy2
            out[j, i] = acc


@njit(**_OPTS)
def apply_operator(x, a, kx, ky, hx, hy):
    out = np.empty_like(x)
    _apply(x, a, kx, ky, hx, hy, out)
    return out


@njit(**_OPTS)
def operator_diagonal(a, kx, ky, hx, hy):
    ny = kx.shape[0]
    nx = ky.shape[1]
    d = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            d[j, i] = (a + (kx[j, i] + kx[j, i + 1]) / (hx * hx)
                       + (ky[j, i] + ky[j + 1, i]) / (hy * hy))
    return d


@njit(**_OPTS)
def _dot(p, q):
    s = 0.0
    ny, nx = p.shape
    for j in range(ny):
        for i in range(nx):
            s += p[j, i] * q[j, i]
    return s


@njit(**_OPTS)
def _mean(p):
    s = 0.0
    ny, nx = p.shape
    for j in range(ny):
        for i in range(nx):
            s += p[j, i]
    return s / (nx * ny)


@njit(**_OPTS)
def _precondition(r, dinv, jacobi, z):
    ny, nx = r.shape
    if jacobi:
        for j in range(ny):
            for i in range(nx):
                z[j, i] = r[j, i] * dinv[j, i]
    else:
        for j in range(ny):
            for i in range(nx):
                z[j, i] = r[j, i]
    m = _mean(z)
    for j in range(ny):
        for i in range(nx):
            z[j, i] -= m


@njit(**_OPTS)
def cg(b, x0, a, kx, ky, hx, hy, tol, max_iter, jacobi):
    ny, nx = b.shape
    bnorm = math.sqrt(_dot(b, b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0, True
    bmean = _mean(b)
    xmean = bmean / a
    bp = b - bmean
    x = x0 - _mean(x0)
    if jacobi:
        dinv = 1.0 / operator_diagonal(a, kx, ky, hx, hy)
    else:
        dinv = np.empty((1, 1))
    target = tol * bnorm

    ap = np.empty_like(b)
    _apply(x, a, kx, ky, hx, hy, ap)
    r = bp - ap
    rm = _mean(r)
    for j in range(ny):
        for i in range(nx):
            r[j, i] -= rm
    z = np.empty_like(b)
    _precondition(r, dinv, jacobi, z)
    p = z.copy()
    rz = _dot(r, z)
    it = 0
    converged = False
    restarted = False
    xf = np.empty_like(b)
    while True:
        if math.sqrt(_dot(r, r)) <= target:
            for j in range(ny):
                for i in range(nx):
                    xf[j, i] = x[j, i] + xmean
            _apply(xf, a, kx, ky, hx, hy, ap)
            rt = b - ap
            if math.sqrt(_dot(rt, rt)) <= target or restarted:
                converged = True
                break
            restarted = True
            rm = _mean(rt)
            for j in range(ny):
                for i in range(nx):
                    r[j, i] = rt[j, i] - rm
            _precondition(r, dinv, jacobi, z)
            for j in range(ny):
                for i in range(nx):
                    p[j, i] = z[j, i]
            rz = _dot(r, z)
            continue
        if it >= max_iter:
            break
        _apply(p, a, kx, ky, hx, hy, ap)
        pap = _dot(p, ap)
        if pap <= 0.0:
            break
        alpha = rz / pap
        for j in range(ny):
            for i in range(nx):
                x[j, i] += alpha * p[j, i]
                r[j, i] -= alpha * ap[j, i]
        _precondition(r, dinv, jacobi, z)
        rz_new = _dot(r, z)
        beta = rz_new / rz
        rz = rz_new
        for j in range(ny):
            for i in range(nx):
                p[j, i] = z[j, i] + beta * p[j, i]
        restarted = False
        it += 1

    for j in range(ny):
        for i in range(nx):
            x[j, i] += xmean
    _apply(x, a, kx, ky, hx, hy, ap)
    rt = b - ap
    rtnorm = math.sqrt(_dot(rt, rt))
    # same unnormalised test as the loop, so rounding in the division cannot flip it
    return x, it, rtnorm / bnorm, converged and rtnorm <= target


@njit(**_OPTS)
def upwind_flux(u, v, sx, sy, alpha, hx, hy):
    ny, nx = u.shape
    g = np.empty_like(u)
    for j in range(ny):
        for i in range(nx):
            if alpha != 0.0:
                g[j, i] = u[j, i] * math.log(u[j, i] + E) ** alpha
            else:
                g[j, i] = u[j, i]
    fx = np.zeros((ny, nx + 1))
    fy = np.zeros((ny + 1, nx))
    for j in range(ny):
        for i in range(1, nx):
            w = sx[j, i] * (v[j, i] - v[j, i - 1]) / hx
            fx[j, i] = w * g[j, i - 1] if w > 0.0 else w * g[j, i]
    for j in range(1, ny):
        for i in range(nx):
            w = sy[j, i] * (v[j, i] - v[j - 1, i]) / hy
            fy[j, i] = w * g[j - 1, i] if w > 0.0 else w * g[j, i]
    return fx, fy


@njit(**_OPTS)
def flux_divergence(fx, fy, hx, hy):
    ny = fx.shape[0]
    nx = fy.shape[1]
    out = np.empty((ny, nx))
    for j in range(ny):
        for i in range(nx):
            out[j, i] = (fx[j, i + 1] - fx[j, i]) / hx + (fy[j + 1, i] - fy[j, i]) / hy
    return out
