"""IMEX finite-volume time stepping for the chemotaxis-logistic system.

Each step treats D(v) diffusion of u implicitly (D frozen at the old
signal), the upwinded chemotactic flux and the logistic reaction
explicitly, then updates the signal either by an elliptic solve (eta = 0) or
by implicit Euler (eta = 1).
"""

from dataclasses import dataclass, field
import ast
import math
import time

import numpy as np

from . import kernels
from .coefficients import eval_D, eval_S
from .diagnostics import compute_record, detect_blowup
from .elliptic import EllipticConfig, solve_helmholtz, solve_shifted
from .errors import ChemologError, StabilityError
from .grid import FaceVector, face_average, integrate

E = math.e
CLAMP_BAND = 1.0e-13
_EPS = 1.0e-30


class DtUnderflow(ChemologError):
    def __init__(self, dt, dt_min):
        super().__init__(f"stable step {dt:.3e} fell below dt_min = {dt_min:.3e}")
        self.dt = dt


@dataclass
class State:
    t: float
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    dt_init: float = 1.0e-3
    dt_min: float = 1.0e-12
    dt_max: float = 1.0e-2
    cfl_safety: float = 0.4
    blowup_threshold: float = 1.0e8
    elliptic: EllipticConfig = EllipticConfig()
    diffusion_tol: float = 1.0e-12
    record_every: float = 0.1
    max_steps: int | None = None
    max_wall_time: float | None = None  # seconds

    def __post_init__(self):
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not self.blowup_threshold > 0:
            raise ValueError("blowup_threshold must be > 0")
        if not self.record_every > 0:
            raise ValueError("record_every must be > 0")
        if not 0 < self.diffusion_tol < 1:
            raise ValueError("diffusion_tol must lie in (0, 1)")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.max_wall_time is not None and not self.max_wall_time > 0:
            raise ValueError("max_wall_time must be > 0")


@dataclass
class Termination:
    kind: str  # completed | blowup | dt_underflow | budget_exhausted
    t: float
    sup_u: float

    def __str__(self):
        return f"{self.kind}(t={self.t!r}, sup_u={self.sup_u!r})"


@dataclass
class Trajectory:
    records: list
    termination: Termination
    snapshots: list = field(default_factory=list)
    steps: int = 0
    wall_time: float = 0.0


# --- initial data ---------------------------------------------------------

def initial_condition(kind, grid, **params):
    """Build a nonnegative initial field.

    Kinds: ``constant(c)``, ``gaussian_bump(amplitude | mass, width, center)``,
    ``random_smooth(mass, modes, seed)``.
    """
    if kind == "constant":
        c = float(params.get("c", params.get("value", 0.0)))
        if not c > 0:
            raise ValueError(f"constant initial value must be > 0, got {c!r}")
        return grid.full(c)

    if kind == "gaussian_bump":
        width = float(params.get("width", 0.1))
        center = params.get("center", (0.5 * grid.lx, 0.5 * grid.ly))
        amp, mass = params.get("amplitude"), params.get("mass")
        if (amp is None) == (mass is None):
            raise ValueError("gaussian_bump needs exactly one of amplitude or mass")
        if width <= 0:
            raise ValueError("gaussian_bump width must be > 0")
        X, Y = grid.mesh()
        shape = np.exp(-((X - center[0]) ** 2 + (Y - center[1]) ** 2) / (2.0 * width**2))
        if amp is not None:
            if not amp > 0:
                raise ValueError("gaussian_bump amplitude must be > 0")
            return float(amp) * shape
        if not mass > 0:
            raise ValueError("gaussian_bump mass must be > 0")
        total = integrate(shape, grid)
        if not total > 0:
            raise ValueError("gaussian_bump vanishes on every cell centre; widen it or refine the grid")
        return shape * (float(mass) / total)

    if kind == "random_smooth":
        mass = float(params.get("mass", 1.0))
        modes = int(params.get("modes", 3))
        seed = int(params.get("seed", 0))
        if not mass > 0:
            raise ValueError("random_smooth mass must be > 0")
        if modes < 1:
            raise ValueError("random_smooth needs modes >= 1")
        rng = np.random.default_rng(seed)
        X, Y = grid.mesh()
        f = np.ones(grid.shape)
        for m in range(modes + 1):
            for n in range(modes + 1):
                if m == n == 0:
                    continue
                a = rng.normal(0.0, 0.5) / (1.0 + m + n)
                f += a * np.cos(m * math.pi * X / grid.lx) * np.cos(n * math.pi * Y / grid.ly)
        f = np.maximum(f, 0.0)
        return f * (mass / integrate(f, grid))

    raise ValueError(f"unknown initial condition kind {kind!r}")


def parse_initial(text):
    """Parse ``"kind(key=value, ...)"`` (or positional for constant)."""
    text = str(text).strip()
    try:
        node = ast.parse(text, mode="eval").body
    except SyntaxError:
        raise ValueError(f"cannot parse initial spec {text!r}") from None
    if isinstance(node, ast.Name):
        return node.id, {}
    if not (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)):
        raise ValueError(f"initial spec must look like kind(args), got {text!r}")
    kind = node.func.id
    params = {}
    try:
        if node.args:
            if kind != "constant" or len(node.args) != 1:
                raise ValueError(f"{kind} takes keyword arguments only")
            params["c"] = ast.literal_eval(node.args[0])
        for kw in node.keywords:
            params[kw.arg] = ast.literal_eval(kw.value)
    except ValueError as exc:
        raise ValueError(f"bad arguments in {text!r}: {exc}") from None
    return kind, params


def format_initial(kind, params):
    if not params:
        return f"{kind}()"
    if kind == "constant" and set(params) == {"c"}:
        return f"constant({params['c']!r})"
    return f"{kind}({', '.join(f'{k}={v!r}' for k, v in params.items())})"


# --- spatial terms --------------------------------------------------------

def chemotactic_velocity(v, params, grid):
    """Face velocities ``S(v_face) * grad v`` (boundary faces 0)."""
    vf = face_average(v, grid)
    w = FaceVector.zeros(grid)
    w.fx[:, 1:-1] = eval_S(params.S, vf.fx[:, 1:-1]) * (v[:, 1:] - v[:, :-1]) / grid.hx
    w.fy[1:-1, :] = eval_S(params.S, vf.fy[1:-1, :]) * (v[1:, :] - v[:-1, :]) / grid.hy
    return w


def chemotaxis_flux(u, v, params, grid):
    """Upwinded flux ``S(v) u ln^alpha(u + e) grad v`` on faces."""
    vf = face_average(v, grid)
    sx = np.zeros_like(vf.fx)
    sy = np.zeros_like(vf.fy)
    sx[:, 1:-1] = eval_S(params.S, vf.fx[:, 1:-1])
    sy[1:-1, :] = eval_S(params.S, vf.fy[1:-1, :])
    fx, fy = kernels.upwind_flux(np.ascontiguousarray(u), np.ascontiguousarray(v), sx, sy,
                                 float(params.alpha), grid.hx, grid.hy)
    return FaceVector(fx, fy)


def cfl_dt(state, params, config, grid):
    """Stable step for the explicit terms, clamped to ``[dt_min, dt_max]``.

    Raises :class:`DtUnderflow` when the unclamped value is below ``dt_min``.
    """
    sup_u = float(np.max(state.u))
    wmax = chemotactic_velocity(state.v, params, grid).max_abs()
    vel = wmax * math.log(sup_u + E) ** params.alpha
    adv = min(grid.hx, grid.hy) / vel if vel > 0 else math.inf
    react = 1.0 / (abs(params.r) + 2.0 * params.mu * sup_u + _EPS)
    raw = config.cfl_safety * min(adv, react)
    if raw < config.dt_min:
        raise DtUnderflow(raw, config.dt_min)
    return min(max(raw, config.dt_min), config.dt_max)


def _clamp(x, rhs, residual, what):
    # exact solution is >= 0; anything within rounding plus the certified
    # CG error (||x - x*||_inf <= ||r||_2 since the operator has spectrum >= 1)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    band = CLAMP_BAND * scale + residual * math.sqrt(float(np.vdot(rhs, rhs)))
    lo = float(x.min())
    if lo < -band:
        raise StabilityError(
            f"{what} undershoot {lo:.3e} below -{band:.3e}; reduce cfl_safety")
    if lo < 0:
        # clip, then rescale so the clip does not create mass
        total = float(np.sum(x))
        np.maximum(x, 0.0, out=x)
        kept = float(np.sum(x))
        if total > 0 and kept > 0:
            x *= total / kept
    return x


def step(state, params, config, grid, dt=None):
    """Advance one IMEX step and return the new :class:`State`."""
    if dt is None:
        dt = cfl_dt(state, params, config, grid)
    u, v = state.u, state.v
    flux = chemotaxis_flux(u, v, params, grid)
    div = kernels.flux_divergence(flux.fx, flux.fy, grid.hx, grid.hy)
    rhs = u - dt * div + dt * (params.r * u - params.mu * u * u)
    if not np.all(np.isfinite(rhs)):
        # left for the blow-up detector
        return State(state.t + dt, rhs, v.copy())

    d = eval_D(params.D, v)
    kx = np.zeros((grid.ny, grid.nx + 1))
    ky = np.zeros((grid.ny + 1, grid.nx))
    kx[:, 1:-1] = dt * 0.5 * (d[:, 1:] + d[:, :-1])
    ky[1:-1, :] = dt * 0.5 * (d[1:, :] + d[:-1, :])
    dcfg = EllipticConfig(tol=config.diffusion_tol, max_iter=config.elliptic.max_iter, jacobi=True)
    u_new, info = solve_shifted(rhs, grid, 1.0, kx, ky, dcfg, x0=u)
    u_new = _clamp(u_new, rhs, info.residual, "density")

    if params.eta == 0:
        v_new, vinfo = solve_helmholtz(u_new, grid, config.elliptic, x0=v, return_info=True)
        v_rhs = u_new
    else:
        v_rhs = v + dt * u_new
        ux, uy = grid.unit_face_coefficients()
        v_new, vinfo = solve_shifted(v_rhs, grid, 1.0 + dt, dt * ux, dt * uy, config.elliptic, x0=v)
    v_new = _clamp(v_new, v_rhs, vinfo.residual, "signal")
    return State(state.t + dt, u_new, v_new)


# --- driver ---------------------------------------------------------------

def _check_initial(u, v, grid):
    for name, f in (("u0", u), ("v0", v)):
        if f.shape != grid.shape:
            raise ValueError(f"{name} has shape {f.shape}, grid is {grid.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"{name} is not finite")
        if f.min() < 0:
            raise ValueError(f"{name} must be nonnegative")
    if not np.any(u > 0):
        raise ValueError("u0 must not vanish identically")


def run(u0, v0, params, config, t_end, grid, ks=(1.0,), ps=(2.0,),
        snapshot_times=(), on_snapshot=None, keep_snapshots=False):
    """Integrate to ``t_end`` or until blow-up, dt underflow, or the step /
    wall-clock budget runs out.

    For eta = 0 the supplied ``v0`` is ignored and recomputed from ``u0``.
    Records are taken at every multiple of ``config.record_every`` and at
    termination; ``on_snapshot(state)`` is called at each requested snapshot
    time and at termination.
    """
    start = time.perf_counter()
    u = np.array(u0, dtype=float)
    v = np.array(v0, dtype=float) if v0 is not None else None
    if params.eta == 0:
        v = solve_helmholtz(u, grid, config.elliptic)
    _check_initial(u, v, grid)
    state = State(0.0, u, v)
    snaps = sorted(float(s) for s in snapshot_times if 0.0 <= s <= t_end)
    kept = []

    def snapshot(s):
        if on_snapshot is not None:
            on_snapshot(s)
        if keep_snapshots:
            kept.append(State(s.t, s.u.copy(), s.v.copy()))

    def record(s, dt):
        records.append(compute_record(s.t, s.u, s.v, grid, ks, ps, dt))

    records = []
    termination = None
    steps = 0
    try:
        dt_nominal = cfl_dt(state, params, config, grid)
    except DtUnderflow as exc:
        dt_nominal = exc.dt
        termination = Termination("dt_underflow", 0.0, float(u.max()))
    record(state, dt_nominal)
    while snaps and snaps[0] <= 0.0:
        snapshot(state)
        snaps.pop(0)

    n_rec = 1
    while termination is None:
        if state.t >= t_end:
            termination = Termination("completed", state.t, float(state.u.max()))
            break
        if ((config.max_steps is not None and steps >= config.max_steps)
                or (config.max_wall_time is not None
                    and time.perf_counter() - start > config.max_wall_time)):
            termination = Termination("budget_exhausted", state.t, float(state.u.max()))
            break
        try:
            dt_nominal = cfl_dt(state, params, config, grid)
        except DtUnderflow as exc:
            dt_nominal = exc.dt
            termination = Termination("dt_underflow", state.t, float(state.u.max()))
            break
        dt = min(dt_nominal, config.dt_init) if steps == 0 else dt_nominal
        next_rec = n_rec * config.record_every
        target = min(t_end, next_rec, snaps[0] if snaps else math.inf)
        landed = state.t + dt >= target
        if landed:
            dt = target - state.t
        state = step(state, params, config, grid, dt)
        if landed:
            state.t = target
        steps += 1

        if detect_blowup(state.u, config.blowup_threshold):
            termination = Termination("blowup", state.t, float(np.max(state.u)))
            break
        if landed and target == next_rec:
            record(state, dt_nominal)
            n_rec += 1
        while snaps and state.t >= snaps[0]:
            snapshot(state)
            snaps.pop(0)

    if records[-1].t < state.t:
        record(state, dt_nominal)
    snapshot(state)
    return Trajectory(records, termination, kept, steps, time.perf_counter() - start)
