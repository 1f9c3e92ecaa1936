"""Coefficient families for the diffusivity D(v) and sensitivity S(v).

Specs are immutable and written as ``family(args)`` strings, e.g.
``exp_decay(1.0)`` or ``bounded_smooth(tanh)``.  Every family evaluates
element-wise on scalars or arrays and has a closed-form derivative.
"""

from dataclasses import dataclass
import math
import re

import numpy as np

from .errors import CoefficientError

# name -> (value, derivative, log_value or None); all defined on v >= 0
_PRESETS = {
    "tanh": (np.tanh, lambda v: 1.0 / np.cosh(v) ** 2, None),
    "arctan": (
        lambda v: (2.0 / math.pi) * np.arctan(v),
        lambda v: (2.0 / math.pi) / (1.0 + v**2),
        None,
    ),
    "rational_decay": (
        lambda v: 1.0 / (1.0 + v) ** 2,
        lambda v: -2.0 / (1.0 + v) ** 3,
        lambda v: -2.0 * np.log1p(v),
    ),
    "gaussian_decay": (
        lambda v: np.exp(-(v**2)),
        lambda v: -2.0 * v * np.exp(-(v**2)),
        lambda v: -(v**2),
    ),
}

_ARITY = {"constant": 1, "exp_decay": 1, "saturating": 2, "linear": 1, "bounded_smooth": 1}


@dataclass(frozen=True)
class CoefficientSpec:
    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in _ARITY:
            raise CoefficientError(f"unknown coefficient family {self.family!r}; known: {sorted(_ARITY)}")
        if len(self.params) != _ARITY[self.family]:
            raise CoefficientError(
                f"{self.family} takes {_ARITY[self.family]} parameter(s), got {len(self.params)}")
        if self.family == "bounded_smooth":
            if self.params[0] not in _PRESETS:
                raise CoefficientError(f"unknown preset {self.params[0]!r}; known: {sorted(_PRESETS)}")
        else:
            vals = tuple(float(p) for p in self.params)
            if not all(math.isfinite(p) for p in vals):
                raise CoefficientError(f"{self.family}: parameters must be finite")
            if self.family == "saturating" and vals[1] <= 0:
                raise CoefficientError("saturating(a, b) needs b > 0")
            object.__setattr__(self, "params", vals)

    def __str__(self):
        if self.family == "bounded_smooth":
            return f"bounded_smooth({self.params[0]})"
        return f"{self.family}({', '.join(repr(p) for p in self.params)})"

    def value(self, v):
        fam, p = self.family, self.params
        if fam == "constant":
            return np.full_like(np.asarray(v, dtype=float), p[0])
        if fam == "exp_decay":
            return np.exp(-p[0] * np.asarray(v, dtype=float))
        if fam == "saturating":
            return p[0] * v / (p[1] + v)
        if fam == "linear":
            return p[0] * np.asarray(v, dtype=float)
        return _PRESETS[p[0]][0](np.asarray(v, dtype=float))

    def derivative(self, v):
        fam, p = self.family, self.params
        v = np.asarray(v, dtype=float)
        if fam == "constant":
            return np.zeros_like(v)
        if fam == "exp_decay":
            return -p[0] * np.exp(-p[0] * v)
        if fam == "saturating":
            return p[0] * p[1] / (p[1] + v) ** 2
        if fam == "linear":
            return np.full_like(v, p[0])
        return _PRESETS[p[0]][1](v)

    def log_value(self, v):
        """log of the value where it has a closed form, else None.

        Used to keep positivity checks correct when the value underflows.
        """
        fam, p = self.family, self.params
        v = np.asarray(v, dtype=float)
        if fam == "exp_decay":
            return -p[0] * v
        if fam == "constant" and p[0] > 0:
            return np.full_like(v, math.log(p[0]))
        if fam == "bounded_smooth" and _PRESETS[p[0]][2] is not None:
            return _PRESETS[p[0]][2](v)
        return None


_SPEC_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$")


def parse_spec(text):
    """Parse ``"family(a, b)"`` into a :class:`CoefficientSpec`."""
    m = _SPEC_RE.match(str(text))
    if not m:
        raise CoefficientError(f"cannot parse coefficient spec {text!r}; expected family(args)")
    family, argtext = m.group(1), m.group(2).strip()
    args = [a.strip().strip("'\"") for a in argtext.split(",")] if argtext else []
    if family == "bounded_smooth":
        return CoefficientSpec(family, tuple(args))
    try:
        params = tuple(float(a) for a in args)
    except ValueError:
        raise CoefficientError(f"non-numeric parameter in {text!r}") from None
    return CoefficientSpec(family, params)


def _check_domain(v):
    arr = np.asarray(v, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise CoefficientError(f"coefficient evaluated at negative or NaN signal (min {np.nanmin(arr)!r})")
    return arr


def eval_D(spec, v):
    return spec.value(_check_domain(v))


def eval_S(spec, v):
    return spec.value(_check_domain(v))


def eval_S_prime(spec, v):
    return spec.derivative(_check_domain(v))


@dataclass(frozen=True)
class ValidationReport:
    spec: CoefficientSpec
    kind: str
    ok: bool
    message: str
    v_fail: float | None = None

    def raise_if_failed(self):
        if not self.ok:
            raise CoefficientError(self.message)


def validate_spec(spec, kind, probe_max=1.0e3, samples=20001, raise_on_failure=False):
    """Sample ``[0, probe_max]`` and check the structural conditions.

    D: finite and strictly positive.  S: finite value and derivative, S' >= 0.
    The first violating sample is reported.
    """
    if kind not in ("D", "S"):
        raise ValueError("kind must be 'D' or 'S'")
    if not probe_max > 0:
        raise ValueError("probe_max must be > 0")
    v = np.linspace(0.0, float(probe_max), int(samples))
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        val = spec.value(v)
        der = spec.derivative(v)

    def fail(mask, what):
        idx = int(np.argmax(mask))
        report = ValidationReport(spec, kind, False, what(idx), float(v[idx]))
        if raise_on_failure:
            report.raise_if_failed()
        return report

    v_at = lambda i: float(v[i])  # noqa: E731
    bad = ~np.isfinite(val)
    if bad.any():
        return fail(bad, lambda i: f"{kind} = {spec} is not finite at v = {v_at(i)!r}")
    if kind == "D":
        positive = val > 0
        underflow = ~positive & (val == 0)
        if underflow.any():
            logv = spec.log_value(v)
            if logv is not None:
                positive |= underflow & np.isfinite(logv)
        if not positive.all():
            return fail(~positive, lambda i: f"D > 0 violated: D({v_at(i)!r}) = {float(val[i])!r} for {spec}")
    else:
        bad = ~np.isfinite(der)
        if bad.any():
            return fail(bad, lambda i: f"S' is not finite at v = {v_at(i)!r} for {spec}")
        neg = der < 0
        if neg.any():
            return fail(neg, lambda i: f"S' >= 0 violated: S'({v_at(i)!r}) = {float(der[i])!r} < 0 for {spec}")
    return ValidationReport(spec, kind, True, f"{kind} = {spec} passes on [0, {probe_max!r}]")


@dataclass(frozen=True)
class ModelParams:
    eta: int
    r: float
    mu: float
    alpha: float
    D: CoefficientSpec
    S: CoefficientSpec

    def __post_init__(self):
        if self.eta not in (0, 1):
            raise ValueError(f"eta must be 0 or 1, got {self.eta!r}")
        if not math.isfinite(self.r):
            raise ValueError("r must be finite")
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise ValueError("mu must be >= 0")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be >= 0")

    @property
    def theorem_regime(self):
        """True when the parameters sit in the proven boundedness regime."""
        if self.eta == 0:
            return 0.0 < self.alpha < 1.0
        return 0.0 < self.alpha < 0.5

    def regime_warning(self):
        if self.theorem_regime:
            return None
        if self.eta == 0:
            return (f"eta = 0 with alpha = {self.alpha!r} is outside the elliptic-parabolic "
                    "boundedness regime alpha in (0, 1); run is exploratory")
        return (f"eta = 1 with alpha = {self.alpha!r} is outside the fully parabolic "
                "boundedness regime alpha in (0, 1/2); run is exploratory")
