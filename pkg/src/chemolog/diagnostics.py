"""Functionals tracked along a trajectory, ODE-inequality monitors and the
blow-up detector."""

from dataclasses import dataclass, field, fields
import math
import warnings

import numpy as np

from .errors import ConfigError, InsufficientDataError
from .grid import cell_grad_sq, grad_sq_integral, integrate

E = math.e


def _log_pow(u, k):
    if k == 0:
        return np.ones_like(u)
    return np.log(u + E) ** k


def entropy_functional(u, grid, k):
    """Integral of ``u ln^k(u + e)``."""
    if k == 0:
        return integrate(u, grid)
    return integrate(u * _log_pow(u, k), grid)


def u2_log_integral(u, grid, k):
    return integrate(u * u * _log_pow(u, k), grid)


def grad_energy(v, grid, p):
    """Integral of ``|grad v|^(2p)`` using the per-cell face reconstruction."""
    g2 = cell_grad_sq(v, grid)
    if p == 1:
        return integrate(g2, grid)
    return integrate(g2**p, grid)


def lyapunov_y(u, v, grid, k):
    return entropy_functional(u, grid, k) + 0.5 * grad_sq_integral(v, grid)


def phi_functional(u, v, grid, p):
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p!r}")
    return integrate(u**p, grid) / p + grad_energy(v, grid, p) / (2.0 * p)


def detect_blowup(u, threshold):
    """True if any value is non-finite or ``max u`` exceeds ``threshold``."""
    u = np.asarray(u)
    if not np.all(np.isfinite(u)):
        return True
    return float(u.max()) > threshold


# --- exponent selection ---------------------------------------------------

def admissible_k_interval(alpha, p):
    """Open interval for k that makes both the entropy and the L^p estimates work
    in the fully parabolic case."""
    return max(2.0 * alpha * (p + 1.0) / p, 1.0), 2.0 - 2.0 * alpha


def select_exponents(eta, alpha, p=None, in_regime=True):
    """Default ``(k, p, warning)`` for a run.

    eta = 0: k = 1, p = 2.  eta = 1: p = 2 unless that is too small for alpha,
    then k is the midpoint of the admissible interval.  An empty interval is
    an error for in-regime runs; exploratory runs fall back to k = 1.
    """
    if p is None:
        p = 2.0
        if eta == 1 and 0.0 < alpha < 0.5 and p <= alpha / (1.0 - 2.0 * alpha):
            p = alpha / (1.0 - 2.0 * alpha) + 1.0
    if eta == 0:
        return 1.0, p, None
    lo, hi = admissible_k_interval(alpha, p)
    if lo < hi:
        return 0.5 * (lo + hi), p, None
    msg = f"k interval ({lo:g}, {hi:g}) is empty for alpha = {alpha!r}, p = {p!r}"
    if in_regime:
        raise ConfigError([msg])
    return 1.0, p, msg + "; using k = 1"


# --- records --------------------------------------------------------------

@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    entropy_k: dict
    lp: dict
    grad_v_sq: float
    grad_v_2p: dict
    sup_u: float
    sup_v: float
    sup_grad_v: float
    y_k: dict
    phi_p: dict
    dt: float
    min_u: float = 0.0
    u2_log_k: dict = field(default_factory=dict)

    def values(self):
        """Flat ``name -> value`` view, excluding ``t``."""
        out = {}
        for f in fields(self):
            if f.name == "t":
                continue
            val = getattr(self, f.name)
            if isinstance(val, dict):
                for key, x in val.items():
                    out[f"{f.name}[{key:g}]"] = x
            else:
                out[f.name] = val
        return out


def compute_record(t, u, v, grid, ks, ps, dt):
    gsq = grad_sq_integral(v, grid)
    g2 = cell_grad_sq(v, grid)
    entropy = {k: entropy_functional(u, grid, k) for k in ks}
    lp = {p: integrate(u**p, grid) for p in ps}
    g2p = {p: integrate(g2**p, grid) for p in ps}
    return DiagnosticsRecord(
        t=float(t),
        mass=integrate(u, grid),
        entropy_k=entropy,
        lp=lp,
        grad_v_sq=gsq,
        grad_v_2p=g2p,
        sup_u=float(np.max(np.abs(u))),
        sup_v=float(np.max(np.abs(v))),
        sup_grad_v=math.sqrt(float(g2.max())),
        y_k={k: entropy[k] + 0.5 * gsq for k in ks},
        phi_p={p: lp[p] / p + g2p[p] / (2.0 * p) for p in ps},
        dt=float(dt),
        min_u=float(np.min(u)),
        u2_log_k={k: u2_log_integral(u, grid, k) for k in ks},
    )


def csv_header(ks, ps):
    cols = ["t", "mass"]
    cols += [f"entropy_k{k:g}" for k in ks]
    cols += [f"lp{p:g}" for p in ps]
    cols += ["grad_v_sq", "sup_u", "sup_v", "sup_grad_v"]
    cols += [f"y_k{k:g}" for k in ks]
    cols += [f"phi_p{p:g}" for p in ps]
    cols.append("dt")
    return cols


def csv_row(rec, ks, ps):
    vals = [rec.t, rec.mass]
    vals += [rec.entropy_k[k] for k in ks]
    vals += [rec.lp[p] for p in ps]
    vals += [rec.grad_v_sq, rec.sup_u, rec.sup_v, rec.sup_grad_v]
    vals += [rec.y_k[k] for k in ks]
    vals += [rec.phi_p[p] for p in ps]
    vals.append(rec.dt)
    return [repr(float(x)) for x in vals]


# --- time-series analysis -------------------------------------------------

@dataclass
class WindowedIntegral:
    times: np.ndarray
    values: np.ndarray
    sup: float
    truncated: bool


def _cumulative(times, q):
    c = np.zeros_like(q)
    c[1:] = np.cumsum(0.5 * (q[1:] + q[:-1]) * np.diff(times))
    return c


def _cum_at(s, times, q, c):
    m = int(np.searchsorted(times, s, side="right")) - 1
    m = min(max(m, 0), len(times) - 2)
    frac = (s - times[m]) / (times[m + 1] - times[m])
    qs = q[m] + frac * (q[m + 1] - q[m])
    return c[m] + 0.5 * (s - times[m]) * (q[m] + qs)


def windowed_integral_series(times, q, tau):
    """Trapezoidal integrals of ``q`` over sliding windows ``[t, t + tau]``."""
    times = np.asarray(times, dtype=float)
    q = np.asarray(q, dtype=float)
    if len(times) < 2:
        raise InsufficientDataError("need at least two records")
    if tau <= 0:
        raise ValueError("tau must be > 0")
    c = _cumulative(times, q)
    end = times[-1]
    full = times[times + tau <= end * (1 + 1e-12) + 1e-14]
    if len(full) == 0:
        return WindowedIntegral(times[:1].copy(), c[-1:].copy(), float(c[-1]), True)
    vals = np.array([_cum_at(min(s + tau, end), times, q, c) - _cum_at(s, times, q, c) for s in full])
    return WindowedIntegral(full, vals, float(vals.max()), False)


def windowed_integral(records, k, tau):
    """Windowed space-time integral of ``u^2 ln^k(u + e)`` from records."""
    records = getattr(records, "records", records)
    times = np.array([r.t for r in records])
    if len(times) > 1 and np.max(np.diff(times)) > tau / 10 * (1 + 1e-9):
        warnings.warn("records are coarser than tau/10; windowed integral is under-resolved")
    q = np.array([r.u2_log_k[k] for r in records])
    return windowed_integral_series(times, q, tau)


@dataclass
class OdeInequalityReport:
    c_star: float
    bound: float
    passed: bool
    max_excess: float


def ode_inequality_report(times, values, rtol=1e-6):
    """Empirical constant for ``F' + F <= c`` and the Gronwall consequence.

    ``c_star = sup(F' + F)`` with F' from second-order finite differences;
    the check is ``F <= max(F(0), c_star)`` up to ``rtol``.
    """
    times = np.asarray(times, dtype=float)
    f = np.asarray(values, dtype=float)
    if len(times) < 3:
        raise InsufficientDataError(f"need at least 3 records, got {len(times)}")
    df = np.gradient(f, times, edge_order=2)
    c_star = float(np.max(df + f))
    bound = max(float(f[0]), c_star)
    excess = float(np.max(f - bound))
    passed = excess <= rtol * max(1.0, abs(bound))
    return OdeInequalityReport(c_star, bound, passed, excess)


def monitor_ode_inequality(records, functional="I", k=1.0, rtol=1e-6):
    """Apply :func:`ode_inequality_report` to the entropy ``I_k`` or ``y_k``."""
    records = getattr(records, "records", records)
    if functional == "I":
        vals = [r.entropy_k[k] for r in records]
    elif functional == "y":
        vals = [r.y_k[k] for r in records]
    else:
        raise ValueError(f"functional must be 'I' or 'y', got {functional!r}")
    return ode_inequality_report([r.t for r in records], vals, rtol)
