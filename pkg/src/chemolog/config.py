"""Sectioned key-value configuration files.

Format::

    # comment
    [model]
    eta = 0
    D = "exp_decay(1.0)"
    k = [1.0, 1.5]

Values are integers, floats, ``true``/``false``, double-quoted strings or
``[...]`` lists.  Parsing reports every problem found, each with its line
number.
"""

from dataclasses import dataclass, field, replace
import ast
import itertools
import math

from .coefficients import ModelParams, parse_spec, validate_spec
from .diagnostics import admissible_k_interval, select_exponents
from .elliptic import EllipticConfig
from .errors import CoefficientError, ConfigError
from .grid import Grid
from .simulator import SolverConfig, format_initial, initial_condition, parse_initial

_REQ = object()

# section -> key -> (type, default); _REQ marks required keys
SCENARIO_SCHEMA = {
    "grid": {"nx": (int, 128), "ny": (int, 128), "lx": (float, 1.0), "ly": (float, 1.0)},
    "model": {
        "eta": (int, 0), "r": (float, 1.0), "mu": (float, 1.0), "alpha": (float, 0.5),
        "D": (str, "constant(1.0)"), "S": (str, "constant(1.0)"),
    },
    "initial": {"u0": (str, "random_smooth(mass=1.0, modes=3, seed=0)"), "v0": (str, "elliptic()")},
    "solver": {
        "t_end": (float, 1.0), "dt_init": (float, 1e-3), "dt_min": (float, 1e-12),
        "dt_max": (float, 1e-2), "cfl_safety": (float, 0.4), "blowup_threshold": (float, 1e8),
        "elliptic_tol": (float, 1e-10), "elliptic_max_iter": (int, None),
        "elliptic_jacobi": (bool, False), "diffusion_tol": (float, 1e-12),
        "max_steps": (int, None), "max_wall_time": (float, None),
    },
    "diagnostics": {"k": (list, None), "p": (list, None), "tau": (float, None), "record_every": (float, 0.1)},
    "output": {"directory": (str, "run"), "snapshot_times": (list, []), "plots": (bool, False)},
}

LAB_SCHEMA = {
    "lab": {
        "experiments": (list, ["lgn", "green", "linfty"]),
        "resolutions": (list, [64, 128]), "lx": (float, 1.0), "ly": (float, 1.0),
        "p": (list, [0.5, 1.0, 2.0]), "gamma": (list, [0.0, 1.0, 2.0]), "seed": (int, 0),
        "sample_sources": (int, 16), "M": (float, 2.0),
        "sharpness": (list, [1.0, 2.0, 4.0, 6.0, 8.0]), "base_width": (float, 0.2),
        "elliptic_tol": (float, 1e-10),
    },
    "output": {"directory": (str, "lab")},
}

SWEEP_KEYS = {"parallelism": (int, 1), "max_points": (int, 10_000)}


# --- low-level reading -----------------------------------------------------

def _strip_comment(line):
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


class _QuoteError(ValueError):
    pass


def parse_value(text):
    text = text.strip()
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith("'"):
        raise _QuoteError("strings must use double quotes")
    return ast.literal_eval(text)


def format_value(val):
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, str):
        return '"' + val.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(val, (list, tuple)):
        return "[" + ", ".join(format_value(v) for v in val) + "]"
    if isinstance(val, float):
        return repr(val)
    return str(val)


def read_sections(text):
    """Return ``({section: {key: (value, line)}}, errors)``."""
    sections, errors = {}, []
    current = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                errors.append(f"line {n}: malformed section header {raw.strip()!r}")
                continue
            current = line[1:-1].strip()
            if current in sections:
                errors.append(f"line {n}: duplicate section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            errors.append(f"line {n}: expected 'key = value', got {raw.strip()!r}")
            continue
        if current is None:
            errors.append(f"line {n}: key outside of any [section]")
            continue
        key, _, val = line.partition("=")
        key = key.strip().strip('"')
        try:
            value = parse_value(val)
        except _QuoteError as exc:
            errors.append(f"line {n}: {key}: {exc}")
            continue
        except (ValueError, SyntaxError):
            errors.append(f"line {n}: cannot parse value {val.strip()!r} for {key!r}")
            continue
        if key in sections[current]:
            errors.append(f"line {n}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (value, n)
    return sections, errors


def _coerce(value, typ, where):
    if value is None:
        return None
    if typ is bool:
        if not isinstance(value, bool):
            raise TypeError(f"{where} must be true or false, got {value!r}")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"{where} must be an integer, got {value!r}")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TypeError(f"{where} must be a number, got {value!r}")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise TypeError(f"{where} must be a quoted string, got {value!r}")
        return value
    if typ is list:
        if not isinstance(value, (list, tuple)):
            raise TypeError(f"{where} must be a list, got {value!r}")
        return list(value)
    raise AssertionError(typ)


def resolve(sections, schema, errors, extra_sections=()):
    """Apply defaults and type checks; returns ``{section: {key: value}}`` and
    ``{(section, key): line}``."""
    values, lines = {}, {}
    for sec in sections:
        if sec not in schema and sec not in extra_sections:
            first = min((ln for _, ln in sections[sec].values()), default=0)
            errors.append(f"line {first}: unknown section [{sec}]")
    for sec, keys in schema.items():
        given = sections.get(sec, {})
        out = {}
        for key, (val, n) in given.items():
            if key not in keys:
                errors.append(f"line {n}: unknown key {key!r} in [{sec}]")
                continue
            try:
                out[key] = _coerce(val, keys[key][0], f"{sec}.{key}")
            except TypeError as exc:
                errors.append(f"line {n}: {exc}")
            lines[(sec, key)] = n
        for key, (_, default) in keys.items():
            if key not in out and key not in given:
                if default is _REQ:
                    errors.append(f"missing required key {key!r} in [{sec}]")
                else:
                    out[key] = list(default) if isinstance(default, list) else default
        values[sec] = out
    return values, lines


# --- scenario config -------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    grid: Grid
    params: ModelParams
    u0: str
    v0: str
    solver: SolverConfig
    t_end: float
    ks: tuple
    ps: tuple
    tau: float
    directory: str
    snapshot_times: tuple = ()
    plots: bool = False
    warnings: tuple = field(default=(), compare=False)

    def with_directory(self, directory):
        return replace(self, directory=str(directory))


def _line_of(lines, sec, key):
    n = lines.get((sec, key))
    return f"line {n}: " if n else ""


def build_scenario(values, lines):
    """Turn resolved section values into a :class:`ScenarioConfig`."""
    errors, warns = [], []
    if any(sec not in values for sec in SCENARIO_SCHEMA):
        raise ConfigError(["incomplete configuration"])

    def err(sec, key, msg):
        errors.append(_line_of(lines, sec, key) + msg)

    g = values["grid"]
    grid = None
    for key in ("nx", "ny"):
        if g.get(key) is not None and g[key] < 1:
            err("grid", key, f"{key} must be >= 1")
    for key in ("lx", "ly"):
        if g.get(key) is not None and not g[key] > 0:
            err("grid", key, f"{key} must be > 0")
    if not errors and all(g.get(k) is not None for k in ("nx", "ny", "lx", "ly")):
        grid = Grid(g["nx"], g["ny"], g["lx"], g["ly"])

    m = values["model"]
    params = None
    ok = True
    if m.get("eta") not in (0, 1):
        err("model", "eta", "eta must be 0 or 1")
        ok = False
    if m.get("mu") is not None and not m["mu"] >= 0:
        err("model", "mu", "mu must be >= 0")
        ok = False
    if m.get("alpha") is not None and not m["alpha"] >= 0:
        err("model", "alpha", "alpha must be >= 0")
        ok = False
    if m.get("r") is not None and not math.isfinite(m["r"]):
        err("model", "r", "r must be finite")
        ok = False
    specs = {}
    for key in ("D", "S"):
        if m.get(key) is None:
            ok = False
            continue
        try:
            spec = parse_spec(m[key])
        except CoefficientError as exc:
            err("model", key, str(exc))
            ok = False
            continue
        report = validate_spec(spec, key, probe_max=1.0e3)
        if not report.ok:
            err("model", key, report.message)
            ok = False
        specs[key] = spec
    if ok and None not in (m.get("r"), m.get("mu"), m.get("alpha")):
        params = ModelParams(m["eta"], m["r"], m["mu"], m["alpha"], specs["D"], specs["S"])
        w = params.regime_warning()
        if w:
            warns.append(w)

    ini = values["initial"]
    init_norm = {}
    for key in ("u0", "v0"):
        try:
            kind, kw = parse_initial(ini[key])
            if kind == "elliptic":
                if key == "u0":
                    raise ValueError("u0 cannot be 'elliptic()'")
                if kw:
                    raise ValueError("elliptic() takes no arguments")
            else:
                # argument checks still run when the grid block is broken
                initial_condition(kind, grid if grid is not None else Grid(8, 8), **kw)
            init_norm[key] = format_initial(kind, kw)
        except (ValueError, TypeError) as exc:
            err("initial", key, f"{key}: {exc}")

    s = values["solver"]
    solver = None
    t_end = s.get("t_end")
    if t_end is not None and not t_end > 0:
        err("solver", "t_end", "t_end must be > 0")
    d = values["diagnostics"]
    try:
        ecfg = EllipticConfig(s["elliptic_tol"], s["elliptic_max_iter"], s["elliptic_jacobi"])
        solver = SolverConfig(
            dt_init=s["dt_init"], dt_min=s["dt_min"], dt_max=s["dt_max"],
            cfl_safety=s["cfl_safety"], blowup_threshold=s["blowup_threshold"],
            elliptic=ecfg, diffusion_tol=s["diffusion_tol"], record_every=d["record_every"],
            max_steps=s["max_steps"], max_wall_time=s["max_wall_time"])
    except (ValueError, TypeError, KeyError) as exc:
        err("solver", "dt_init", f"solver: {exc}")

    ks, ps, tau = d.get("k"), d.get("p"), d.get("tau")
    for name, lst, lo in (("k", ks, 0.0), ("p", ps, 1.0)):
        if lst is None:
            continue
        if not lst:
            err("diagnostics", name, f"{name} list must be nonempty")
        elif not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in lst):
            err("diagnostics", name, f"{name} entries must be numbers")
        elif name == "k" and min(lst) < lo:
            err("diagnostics", name, "k entries must be >= 0")
        elif name == "p" and min(lst) <= lo:
            err("diagnostics", name, "p entries must exceed 1")
    if params is not None and not errors:
        in_regime = params.theorem_regime
        try:
            p_first = float(ps[0]) if ps else None
            k_auto, p_auto, w = select_exponents(params.eta, params.alpha, p_first, in_regime)
            if w:
                warns.append(w)
            if ps is None:
                ps = [p_auto]
            if ks is None:
                ks = [k_auto]
            elif params.eta == 1 and in_regime:
                lo, hi = admissible_k_interval(params.alpha, float(ps[0]))
                for k in ks:
                    if not lo < k < hi:
                        warns.append(f"k = {k!r} lies outside the admissible interval ({lo:g}, {hi:g})")
        except ConfigError as exc:
            for msg in exc.errors:
                err("diagnostics", "p", msg)
    if tau is None and t_end is not None:
        tau = min(1.0, t_end / 2.0)
    if tau is not None and not tau > 0:
        err("diagnostics", "tau", "tau must be > 0")

    o = values["output"]
    snaps = o.get("snapshot_times") or []
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x >= 0 for x in snaps):
        err("output", "snapshot_times", "snapshot_times must be nonnegative numbers")
    if not o.get("directory"):
        err("output", "directory", "directory must be nonempty")

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        grid=grid, params=params, u0=init_norm["u0"], v0=init_norm["v0"], solver=solver,
        t_end=float(t_end), ks=tuple(float(k) for k in ks), ps=tuple(float(p) for p in ps),
        tau=float(tau), directory=o["directory"], snapshot_times=tuple(float(x) for x in snaps),
        plots=o["plots"], warnings=tuple(warns))


def _by_line(errors):
    def key(msg):
        head = msg.split(":", 1)[0]
        return int(head[5:]) if head.startswith("line ") and head[5:].isdigit() else 10**9
    return sorted(errors, key=key)


def parse_config(text):
    """Parse scenario text; raises :class:`ConfigError` listing all problems."""
    sections, errors = read_sections(text)
    values, lines = resolve(sections, SCENARIO_SCHEMA, errors)
    try:
        cfg = build_scenario(values, lines)
    except ConfigError as exc:
        raise ConfigError(_by_line(errors + exc.errors)) from None
    if errors:
        raise ConfigError(_by_line(errors))
    return cfg


def scenario_values(cfg):
    """Section dictionary with every value spelled out."""
    s = cfg.solver
    vals = {
        "grid": {"nx": cfg.grid.nx, "ny": cfg.grid.ny, "lx": float(cfg.grid.lx), "ly": float(cfg.grid.ly)},
        "model": {"eta": cfg.params.eta, "r": float(cfg.params.r), "mu": float(cfg.params.mu),
                  "alpha": float(cfg.params.alpha), "D": str(cfg.params.D), "S": str(cfg.params.S)},
        "initial": {"u0": cfg.u0, "v0": cfg.v0},
        "solver": {"t_end": cfg.t_end, "dt_init": s.dt_init, "dt_min": s.dt_min, "dt_max": s.dt_max,
                   "cfl_safety": s.cfl_safety, "blowup_threshold": s.blowup_threshold,
                   "elliptic_tol": s.elliptic.tol, "elliptic_max_iter": s.elliptic.max_iter,
                   "elliptic_jacobi": s.elliptic.jacobi, "diffusion_tol": s.diffusion_tol,
                   "max_steps": s.max_steps, "max_wall_time": s.max_wall_time},
        "diagnostics": {"k": list(cfg.ks), "p": list(cfg.ps), "tau": cfg.tau, "record_every": s.record_every},
        "output": {"directory": cfg.directory, "snapshot_times": list(cfg.snapshot_times), "plots": cfg.plots},
    }
    return vals


def format_sections(vals):
    out = []
    for sec, keys in vals.items():
        out.append(f"[{sec}]")
        for key, val in keys.items():
            if val is None:
                continue
            out.append(f"{key} = {format_value(val)}")
        out.append("")
    return "\n".join(out)


def serialize_config(cfg):
    return format_sections(scenario_values(cfg))


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


# --- sweeps ----------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    base: ScenarioConfig
    axes: tuple  # ((section.key, (values...)), ...)
    parallelism: int = 1
    max_points: int = 10_000

    def points(self):
        """Scenario configs in deterministic (row-major over axes) order."""
        names = [a for a, _ in self.axes]
        base_vals = scenario_values(self.base)
        out = []
        for idx, combo in enumerate(itertools.product(*(vals for _, vals in self.axes))):
            vals = {sec: dict(keys) for sec, keys in base_vals.items()}
            for name, val in zip(names, combo):
                sec, key = name.split(".", 1)
                vals[sec][key] = val
            vals["output"]["directory"] = f"{self.base.directory}/run_{idx:04d}"
            out.append((dict(zip(names, combo)), parse_config(format_sections(vals))))
        return out


def parse_sweep(text):
    sections, errors = read_sections(text)
    sweep_raw = sections.pop("sweep", {})
    values, lines = resolve(sections, SCENARIO_SCHEMA, errors)
    base = None
    try:
        base = build_scenario(values, lines)
    except ConfigError as exc:
        errors += exc.errors
    axes, opts = [], {"parallelism": 1, "max_points": 10_000}
    for key, (val, n) in sweep_raw.items():
        if key in SWEEP_KEYS:
            try:
                opts[key] = _coerce(val, SWEEP_KEYS[key][0], f"sweep.{key}")
            except TypeError as exc:
                errors.append(f"line {n}: {exc}")
            continue
        sec, _, sub = key.partition(".")
        if sec not in SCENARIO_SCHEMA or sub not in SCENARIO_SCHEMA[sec]:
            errors.append(f"line {n}: unknown sweep axis {key!r}")
            continue
        if sec == "output" and sub == "directory":
            errors.append(f"line {n}: the output directory cannot be swept")
            continue
        if not isinstance(val, list) or not val:
            errors.append(f"line {n}: sweep axis {key!r} needs a nonempty list")
            continue
        axes.append((key, tuple(val)))
    if not axes:
        errors.append("sweep needs at least one axis (e.g. model.mu = [0.0, 1.0])")
    if opts["parallelism"] < 1:
        errors.append("parallelism must be >= 1")
    size = math.prod(len(v) for _, v in axes) if axes else 0
    if size > opts["max_points"]:
        errors.append(f"sweep has {size} points, above the cap of {opts['max_points']}")
    if errors:
        raise ConfigError(errors)
    sweep = SweepConfig(base, tuple(axes), opts["parallelism"], opts["max_points"])
    try:
        sweep.points()
    except ConfigError as exc:
        raise ConfigError([f"sweep point invalid: {e}" for e in exc.errors]) from None
    return sweep


# --- lab -------------------------------------------------------------------

@dataclass(frozen=True)
class LabConfig:
    experiments: tuple
    resolutions: tuple
    lx: float
    ly: float
    ps: tuple
    gammas: tuple
    seed: int
    sample_sources: int
    M: float
    sharpness: tuple
    base_width: float
    elliptic_tol: float
    directory: str


def parse_lab(text):
    sections, errors = read_sections(text)
    values, lines = resolve(sections, LAB_SCHEMA, errors)
    lab = values["lab"]
    known = {"lgn", "green", "linfty"}
    exps = lab.get("experiments") or []
    if not exps or any(e not in known for e in exps):
        errors.append(f"{_line_of(lines, 'lab', 'experiments')}experiments must be a nonempty subset of {sorted(known)}")
    res = lab.get("resolutions") or []
    if not res or any(isinstance(r, bool) or not isinstance(r, int) or r < 2 for r in res):
        errors.append(f"{_line_of(lines, 'lab', 'resolutions')}resolutions must be integers >= 2")
    if lab.get("M") is not None and not lab["M"] > 0:
        errors.append(f"{_line_of(lines, 'lab', 'M')}M must be > 0")
    if lab.get("sample_sources") is not None and lab["sample_sources"] < 1:
        errors.append(f"{_line_of(lines, 'lab', 'sample_sources')}sample_sources must be >= 1")
    if errors:
        raise ConfigError(errors)
    return LabConfig(
        tuple(exps), tuple(res), lab["lx"], lab["ly"], tuple(float(p) for p in lab["p"]),
        tuple(float(g) for g in lab["gamma"]), lab["seed"], lab["sample_sources"], lab["M"],
        tuple(float(s) for s in lab["sharpness"]), lab["base_width"], lab["elliptic_tol"],
        values["output"]["directory"])
