"""Matrix-free CG solves of shifted Neumann problems ``a w - div(K grad w) = f``.

The Helmholtz problem ``-Lap w + w = f`` is the case ``a = 1, K = 1``.  All
operators here map constants to constants, which the CG kernel exploits to
solve the mean exactly.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .errors import SolverDivergenceError


@dataclass(frozen=True)
class EllipticConfig:
    tol: float = 1.0e-10
    max_iter: int | None = None  # None -> 10 * (nx + ny)
    jacobi: bool = False

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol!r}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def iteration_cap(self, grid):
        return self.max_iter if self.max_iter is not None else 10 * (grid.nx + grid.ny)


@dataclass
class SolveInfo:
    iterations: int
    residual: float


def solve_shifted(f, grid, a, kx, ky, cfg=EllipticConfig(), x0=None):
    """Solve ``a w - div(K grad w) = f`` and return ``(w, SolveInfo)``.

    Raises :class:`SolverDivergenceError` if the true relative residual does
    not reach ``cfg.tol`` within the iteration cap.
    """
    b = np.ascontiguousarray(f, dtype=float)
    guess = np.zeros_like(b) if x0 is None else np.ascontiguousarray(x0, dtype=float)
    cap = cfg.iteration_cap(grid)
    # the problem is linear: scale to unit size so ||b||^2 cannot under- or overflow;
    # a power of two keeps the scaling exact
    peak = float(np.abs(b).max()) if b.size else 0.0
    scale = 2.0 ** math.frexp(peak)[1] if peak > 0.0 and math.isfinite(peak) else 1.0
    w, it, res, ok = kernels.cg(b / scale, guess / scale, float(a), kx, ky, grid.hx, grid.hy,
                                float(cfg.tol), int(cap), bool(cfg.jacobi))
    if not ok:
        raise SolverDivergenceError("CG did not converge", res, it)
    if scale != 1.0:
        w *= scale
    return w, SolveInfo(it, res)


def solve_helmholtz(f, grid, cfg=EllipticConfig(), x0=None, return_info=False):
    """Solve ``-Lap_h w + w = f`` with homogeneous Neumann conditions."""
    kx, ky = grid.unit_face_coefficients()
    w, info = solve_shifted(f, grid, 1.0, kx, ky, cfg, x0)
    return (w, info) if return_info else w


def helmholtz_residual(w, f, grid):
    """``||(-Lap_h + I) w - f||_2 / ||f||_2`` (plain Euclidean norms)."""
    kx, ky = grid.unit_face_coefficients()
    r = f - kernels.apply_operator(np.ascontiguousarray(w, dtype=float), 1.0, kx, ky, grid.hx, grid.hy)
    fn = math.sqrt(float(np.vdot(f, f)))
    return math.sqrt(float(np.vdot(r, r))) / fn if fn > 0 else math.sqrt(float(np.vdot(r, r)))


def discrete_delta(grid, source_cell):
    j, i = source_cell
    if not (0 <= j < grid.ny and 0 <= i < grid.nx):
        raise IndexError(f"source cell {source_cell} outside {grid.ny}x{grid.nx} grid")
    d = grid.zeros()
    d[j, i] = 1.0 / grid.cell_area
    return d


def discrete_green_column(grid, source_cell, cfg=EllipticConfig()):
    """Green's function of ``-Lap_h + 1`` for a unit-mass source in ``source_cell``."""
    return solve_helmholtz(discrete_delta(grid, source_cell), grid, cfg)
