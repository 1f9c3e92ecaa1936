"""Cell-centred rectangular grid, Neumann stencils and midpoint quadrature.

Fields are plain ``float64`` arrays of shape ``(ny, nx)``; ``f[j, i]`` lives at
the cell centre ``((i + 1/2) hx, (j + 1/2) hy)``.  Ghost cells mirror their
interior neighbour, so every boundary face carries zero gradient and zero
flux.
"""

from dataclasses import dataclass
from functools import cached_property
import math
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ValueError("nx and ny must be integers")
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"grid needs nx, ny >= 1, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0) or not math.isfinite(self.lx * self.ly):
            raise ValueError(f"domain size must be positive, got {self.lx}x{self.ly}")

    @property
    def hx(self):
        return self.lx / self.nx

    @property
    def hy(self):
        return self.ly / self.ny

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def cell_area(self):
        return self.hx * self.hy

    @property
    def area(self):
        return self.lx * self.ly

    @property
    def diameter(self):
        return math.hypot(self.lx, self.ly)

    @cached_property
    def x(self):
        return (np.arange(self.nx) + 0.5) * self.hx

    @cached_property
    def y(self):
        return (np.arange(self.ny) + 0.5) * self.hy

    def mesh(self):
        """Cell-centre coordinates ``(X, Y)``, each of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def zeros(self):
        return np.zeros(self.shape)

    def full(self, value):
        return np.full(self.shape, float(value))

    def unit_face_coefficients(self):
        """Face coefficient arrays equal to 1 inside and 0 on the boundary."""
        kx = np.ones((self.ny, self.nx + 1))
        ky = np.ones((self.ny + 1, self.nx))
        kx[:, 0] = kx[:, -1] = 0.0
        ky[0, :] = ky[-1, :] = 0.0
        return kx, ky

    def cell_index(self, x, y):
        """Index ``(j, i)`` of the cell containing the point ``(x, y)``."""
        i = min(max(int(x / self.hx), 0), self.nx - 1)
        j = min(max(int(y / self.hy), 0), self.ny - 1)
        return j, i


@dataclass
class FaceVector:
    """Values on x-faces ``(ny, nx+1)`` and y-faces ``(ny+1, nx)``."""

    fx: np.ndarray
    fy: np.ndarray

    @classmethod
    def zeros(cls, grid):
        return cls(np.zeros((grid.ny, grid.nx + 1)), np.zeros((grid.ny + 1, grid.nx)))

    def max_abs(self):
        return max(float(np.abs(self.fx).max()), float(np.abs(self.fy).max()))


def gradient_faces(f, grid):
    """One-sided differences on interior faces; boundary faces are 0."""
    g = FaceVector.zeros(grid)
    g.fx[:, 1:-1] = (f[:, 1:] - f[:, :-1]) / grid.hx
    g.fy[1:-1, :] = (f[1:, :] - f[:-1, :]) / grid.hy
    return g


def divergence(faces, grid):
    return (faces.fx[:, 1:] - faces.fx[:, :-1]) / grid.hx + (faces.fy[1:, :] - faces.fy[:-1, :]) / grid.hy


def laplacian_neumann(f, grid):
    """Five-point Laplacian with mirror ghosts (zero normal derivative)."""
    return divergence(gradient_faces(f, grid), grid)


def face_average(f, grid):
    """Arithmetic mean of the two cells adjacent to each interior face."""
    a = FaceVector.zeros(grid)
    a.fx[:, 1:-1] = 0.5 * (f[:, 1:] + f[:, :-1])
    a.fy[1:-1, :] = 0.5 * (f[1:, :] + f[:-1, :])
    return a


def integrate(f, grid):
    """Midpoint rule."""
    return float(np.sum(f)) * grid.cell_area


def sup_norm(f):
    return float(np.max(np.abs(f)))


def grad_sq_integral(f, grid):
    """Sum over interior faces of the squared face gradient times ``hx*hy``."""
    g = gradient_faces(f, grid)
    return (float(np.sum(g.fx**2)) + float(np.sum(g.fy**2))) * grid.cell_area


def cell_grad_sq(f, grid):
    """Per-cell |grad f|^2: mean of squared differences on each cell's two x-faces plus two y-faces."""
    g = gradient_faces(f, grid)
    gx2 = g.fx**2
    gy2 = g.fy**2
    return 0.5 * (gx2[:, :-1] + gx2[:, 1:]) + 0.5 * (gy2[:-1, :] + gy2[1:, :])


# --- snapshot files -------------------------------------------------------

def format_float(x):
    # repr is the shortest round-tripping form and is locale independent
    return repr(float(x))


def write_field(path, f, grid, t):
    path = Path(path)
    lines = [" ".join((str(grid.nx), str(grid.ny), format_float(grid.lx), format_float(grid.ly), format_float(t)))]
    for row in np.asarray(f, dtype=float):
        lines.append(" ".join(format_float(val) for val in row))
    path.write_text("\n".join(lines) + "\n")


def read_field(path):
    """Return ``(field, grid, t)`` from a snapshot file."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty snapshot")
    head = lines[0].split()
    if len(head) != 5:
        raise ValueError(f"{path}: header must be 'nx ny lx ly t'")
    grid = Grid(int(head[0]), int(head[1]), float(head[2]), float(head[3]))
    t = float(head[4])
    rows = [ln.split() for ln in lines[1:] if ln.strip()]
    if len(rows) != grid.ny or any(len(r) != grid.nx for r in rows):
        raise ValueError(f"{path}: expected {grid.ny} rows of {grid.nx} values")
    return np.array(rows, dtype=float), grid, t
