"""Desk-scale numerical checks of the interpolation and elliptic estimates.

Everything here evaluates both sides of an inequality on the same discrete
grid, reports the empirical constant, and never asserts a continuum value.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from .elliptic import EllipticConfig, discrete_green_column, solve_helmholtz
from .errors import FamilyConstructionError
from .grid import grad_sq_integral, integrate
from .simulator import initial_condition

E = math.e
FLOOR = 1.0e-8


def _log_pow(f, gamma):
    return np.log(f + E) ** gamma if gamma != 0 else np.ones_like(f)


# --- corpus ---------------------------------------------------------------

@dataclass
class FunctionCorpus:
    grid: object
    seed: int
    ids: list = field(default_factory=list)
    members: list = field(default_factory=list)

    def add(self, name, f):
        f = np.asarray(f, dtype=float) + FLOOR
        if not (np.all(np.isfinite(f)) and f.min() > 0):
            raise ValueError(f"corpus member {name} is not strictly positive and finite")
        self.ids.append(name)
        self.members.append(f)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(zip(self.ids, self.members))


def _bump(grid, amp, width, cx, cy):
    X, Y = grid.mesh()
    return amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * width**2))


def default_corpus(grid, seed=0):
    """Positive test functions: constants, Gaussians down to 3-cell spikes,
    multi-bump sums, smooth random fields, plateau-plus-spike composites.

    Random members are drawn in physical coordinates, so the same seed gives
    the same functions on every resolution (except the grid-scaled spikes).
    """
    c = FunctionCorpus(grid, seed)
    lx, ly = grid.lx, grid.ly
    spike = 3.0 * min(grid.hx, grid.hy)
    widths = [0.2, 0.1, 0.05, 0.025]
    for val in (0.1, 1.0, 10.0, 100.0):
        c.add(f"const_{val:g}", grid.full(val))
    for amp in (1.0, 50.0):
        for w in widths:
            c.add(f"gauss_a{amp:g}_w{w:g}", _bump(grid, amp, w * lx, 0.5 * lx, 0.5 * ly))
        c.add(f"gauss_a{amp:g}_w3cells", _bump(grid, amp, spike, 0.5 * lx, 0.5 * ly))
    for w in widths:
        c.add(f"gauss_off_w{w:g}", _bump(grid, 10.0, w * lx, 0.25 * lx, 0.7 * ly))
    c.add("gauss_off_w3cells", _bump(grid, 10.0, spike, 0.25 * lx, 0.7 * ly))

    rng = np.random.default_rng(seed)
    for n in range(8):
        f = grid.zeros()
        for _ in range(2 + n % 4):
            f += _bump(grid, rng.uniform(1.0, 30.0), rng.uniform(0.03, 0.15) * lx,
                       rng.uniform(0.1, 0.9) * lx, rng.uniform(0.1, 0.9) * ly)
        c.add(f"multi_{n}", f)
    for n in range(8):
        c.add(f"smooth_{n}", initial_condition("random_smooth", grid, mass=1.0 + 4.0 * n,
                                               modes=2 + n % 4, seed=seed * 1000 + n))
    for level in (0.5, 5.0):
        for w, tag in ((0.05 * lx, "w0.05"), (spike, "w3cells")):
            c.add(f"plateau{level:g}_spike_{tag}", level + _bump(grid, 20.0, w, 0.6 * lx, 0.4 * ly))
    c.add("corner_spike", _bump(grid, 20.0, 0.05 * lx, 0.5 * grid.hx, 0.5 * grid.hy))
    c.add("corner_spike_w3cells", 1.0 + _bump(grid, 20.0, spike, 0.5 * grid.hx, 0.5 * grid.hy))
    return c


# --- log-refined Gagliardo-Nirenberg -------------------------------------

def _lgn_parts(phi, grid, p, gamma):
    weighted = integrate(phi * _log_pow(phi, gamma), grid)
    grad = grad_sq_integral(phi ** (0.5 * p), grid)
    mass = integrate(phi, grid)
    return weighted, grad, mass


def lgn_ratio(phi, grid, p, gamma):
    """``LHS / RHS0`` for the log-refined interpolation inequality.

    LHS = int phi^(p+1) ln^gamma(phi+e);
    RHS0 = (int phi ln^gamma(phi+e)) (int |grad phi^(p/2)|^2 + (int phi)^p).
    """
    if p <= 0 or gamma < 0:
        raise ValueError("need p > 0 and gamma >= 0")
    if np.any(phi <= 0):
        raise ValueError("phi must be strictly positive")
    lhs = integrate(phi ** (p + 1) * _log_pow(phi, gamma), grid)
    weighted, grad, mass = _lgn_parts(phi, grid, p, gamma)
    rhs = weighted * grad + mass**p * weighted
    assert rhs > 0, "second right-hand term is positive for positive phi"
    return lhs / rhs


def lgn_epsilon_check(phi, grid, p, xi, gamma, epsilon):
    """Smallest additive constant making the epsilon-form hold for ``phi``.

    Returns ``(holds, needed_C)`` with
    ``needed_C = max(0, int phi^(p+1) ln^xi(phi+e) - epsilon * RHS0_gamma)``.
    """
    if not gamma > xi >= 0:
        raise ValueError(f"need gamma > xi >= 0, got gamma={gamma!r}, xi={xi!r}")
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    lhs = integrate(phi ** (p + 1) * _log_pow(phi, xi), grid)
    weighted, grad, mass = _lgn_parts(phi, grid, p, gamma)
    needed = max(0.0, lhs - epsilon * (weighted * grad + mass**p * weighted))
    return math.isfinite(needed), needed


def lgn_sweep(corpus, ps=(0.5, 1.0, 2.0), gammas=(0.0, 1.0, 2.0)):
    """Rows ``(member_id, p, gamma, ratio)`` over the corpus."""
    rows = []
    for name, phi in corpus:
        for p in ps:
            for g in gammas:
                rows.append((name, p, g, lgn_ratio(phi, corpus.grid, p, g)))
    return rows


def empirical_constants(rows):
    """Max ratio per ``(p, gamma)``."""
    out = {}
    for _, p, g, ratio in rows:
        out[(p, g)] = max(out.get((p, g), 0.0), ratio)
    return out


# --- Green's function bound ----------------------------------------------

@dataclass
class GreenFit:
    K_hat: float
    violations: int
    A: float
    sources: list
    diagonal: list
    mass_error: float
    symmetry_error: float
    per_source_K: list = field(default_factory=list)


def source_lattice(grid, n):
    """``n`` cells on a regular lattice in physical coordinates."""
    m = math.ceil(math.sqrt(n))
    cells = []
    for b in range(m):
        for a in range(m):
            if len(cells) == n:
                return cells
            cells.append(grid.cell_index((a + 0.5) / m * grid.lx, (b + 0.5) / m * grid.ly))
    return cells


def green_bound_fit(grid, sample_sources, cfg=EllipticConfig()):
    """Fit ``K`` in ``G(x, y) <= K ln(A / |x - y|)`` with ``A = 2 diam``.

    Diagonal entries are excluded from the fit and returned separately.
    """
    if sample_sources < 1:
        raise ValueError("sample_sources must be >= 1")
    A = 2.0 * grid.diameter
    X, Y = grid.mesh()
    sources = source_lattice(grid, sample_sources)
    columns = []
    k_hat = 0.0
    violations = 0
    diagonal = []
    per_source = []
    mass_err = 0.0
    for (j, i) in sources:
        g = discrete_green_column(grid, (j, i), cfg)
        columns.append(g)
        mass_err = max(mass_err, abs(integrate(g, grid) - 1.0))
        diagonal.append(float(g[j, i]))
        dist = np.hypot(X - grid.x[i], Y - grid.y[j])
        off = dist > 0
        logf = np.log(A / dist[off])
        violations += int(np.count_nonzero(logf <= 0))
        per_source.append(float(np.max(np.abs(g[off]) / logf)))
        k_hat = max(k_hat, per_source[-1])
    sym = 0.0
    for a, (ja, ia) in enumerate(sources):
        for b, (jb, ib) in enumerate(sources):
            sym = max(sym, abs(columns[a][jb, ib] - columns[b][ja, ia]))
    return GreenFit(k_hat, violations, A, sources, diagonal, mass_err, sym, per_source)


# --- L-infinity bound under an L log L constraint ------------------------

def entropy_integral(f, grid):
    return integrate(f * np.log(f + E), grid)


def constant_with_entropy(M, grid):
    """Constant ``c`` with ``c ln(c + e) |Omega| = M``."""
    return brentq(lambda c: c * math.log(c + E) * grid.area - M, 0.0, max(1.0, M), xtol=1e-15, rtol=1e-15)


def spike_with_entropy(grid, M, width, center=None):
    """Gaussian of the given width rescaled so that ``int f ln(f+e) = M``."""
    if not M > 0:
        raise ValueError("M must be > 0")
    cx, cy = center if center is not None else (0.5 * grid.lx, 0.5 * grid.ly)
    shape = _bump(grid, 1.0, width, cx, cy)

    def excess(a):
        return entropy_integral(a * shape, grid) - M

    hi = 1.0
    for _ in range(200):
        if excess(hi) > 0:
            break
        hi *= 2.0
    else:
        raise FamilyConstructionError(f"amplitude bracket exhausted for width {width!r}")
    amp = brentq(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    f = amp * shape
    if abs(entropy_integral(f, grid) - M) > 1e-6 * M:
        raise FamilyConstructionError(f"entropy constraint missed for width {width!r}")
    return f, amp


@dataclass
class LlnLReport:
    grid: object
    M: float
    sharpness: list
    widths: list
    amplitudes: list
    sup_w: list

    @property
    def growth(self):
        return self.sup_w[-1] / self.sup_w[0]

    @property
    def monotone(self):
        return all(b >= a for a, b in zip(self.sup_w, self.sup_w[1:]))


def linfty_under_LlnL(grid, M, family_sharpness, cfg=EllipticConfig(), base_width=0.2, center=None):
    """Sup of the Helmholtz solution for spikes of increasing sharpness at
    fixed ``int f ln(f + e) = M``; spike width is ``base_width / sharpness``."""
    sharp = sorted(float(s) for s in family_sharpness)
    widths, amps, sups = [], [], []
    for s in sharp:
        w = base_width * min(grid.lx, grid.ly) / s
        f, amp = spike_with_entropy(grid, M, w, center)
        widths.append(w)
        amps.append(amp)
        sups.append(float(np.max(np.abs(solve_helmholtz(f, grid, cfg)))))
    return LlnLReport(grid, M, sharp, widths, amps, sups)


def legendre_gap(a, b):
    """``a ln a + e^(b-1) - a b`` (with ``0 ln 0 = 0``); nonnegative for a, b >= 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    alog = np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0)), 0.0)
    return alog + np.exp(b - 1.0) - a * b
