import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chemolog.coefficients import (
    CoefficientSpec, ModelParams, eval_D, eval_S, eval_S_prime, parse_spec, validate_spec,
)
from chemolog.errors import CoefficientError

D_PRESETS = ["constant(1.0)", "exp_decay(1.0)", "exp_decay(5.0)",
             "bounded_smooth(rational_decay)", "bounded_smooth(gaussian_decay)"]
S_PRESETS = ["constant(1.0)", "saturating(2.0, 1.0)", "bounded_smooth(tanh)",
             "bounded_smooth(arctan)", "linear(1.0)"]


def test_closed_form_values():
    assert eval_D(parse_spec("constant(1)"), 37.0) == 1.0
    ed = parse_spec("exp_decay(1)")
    assert eval_D(ed, 0.0) == 1.0
    assert eval_D(ed, math.log(2.0)) == pytest.approx(0.5, rel=1e-15)
    sat = parse_spec("saturating(2, 1)")
    assert eval_S_prime(sat, 0.0) == pytest.approx(2.0)
    assert eval_S_prime(sat, 1.0) == pytest.approx(0.5)
    assert eval_S(sat, 1.0) == pytest.approx(1.0)


def test_negative_signal_is_a_domain_error():
    with pytest.raises(CoefficientError):
        eval_D(parse_spec("exp_decay(1)"), np.array([0.0, -1e-3]))
    with pytest.raises(CoefficientError):
        eval_S(parse_spec("constant(1)"), -1.0)


def test_parse_round_trip():
    for text in D_PRESETS + S_PRESETS:
        spec = parse_spec(text)
        assert parse_spec(str(spec)) == spec


@pytest.mark.parametrize("text", ["nope(1)", "constant()", "saturating(1, 0)",
                                  "bounded_smooth(cosh)", "exp_decay(inf)", "constant"])
def test_parse_rejects(text):
    with pytest.raises(CoefficientError):
        parse_spec(text)


def test_validation_passes_for_presets():
    for text in D_PRESETS:
        assert validate_spec(parse_spec(text), "D", probe_max=1e3).ok, text
    for text in S_PRESETS:
        assert validate_spec(parse_spec(text), "S", probe_max=1e3).ok, text


def test_exp_decay_underflow_still_positive():
    # e^(-500) underflows nothing in double, e^(-5000) does; positivity must
    # be judged on the log either way
    spec = parse_spec("exp_decay(5)")
    assert validate_spec(spec, "D", probe_max=100.0).ok
    assert validate_spec(spec, "D", probe_max=1e3).ok


def test_decreasing_sensitivity_is_rejected():
    rep = validate_spec(parse_spec("linear(-1)"), "S")
    assert not rep.ok
    assert rep.v_fail == 0.0
    assert "S' >= 0 violated" in rep.message and "-1.0 < 0" in rep.message
    with pytest.raises(CoefficientError, match="S' >= 0"):
        rep.raise_if_failed()


def test_nonpositive_diffusivity_is_rejected():
    rep = validate_spec(parse_spec("linear(1)"), "D")
    assert not rep.ok and rep.v_fail == 0.0 and "D > 0 violated" in rep.message
    with pytest.raises(CoefficientError):
        validate_spec(parse_spec("constant(-2)"), "D", raise_on_failure=True)


@pytest.mark.parametrize("text", S_PRESETS + ["bounded_smooth(rational_decay)", "exp_decay(2.0)"])
def test_derivative_matches_finite_differences(text):
    spec = parse_spec(text)
    v = np.random.default_rng(3).uniform(1e-3, 100.0, 100)
    h = 1e-5 * np.maximum(1.0, v)
    fd = (spec.value(v + h) - spec.value(v - h)) / (2 * h)
    # relative 1e-6, with an absolute floor where S' itself is below rounding of S
    np.testing.assert_allclose(eval_S_prime(spec, v), fd, rtol=1e-6, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(S_PRESETS),
       st.lists(st.floats(0, 1e3, allow_nan=False), min_size=2, max_size=50))
def test_sensitivity_monotone(text, vs):
    spec = parse_spec(text)
    v = np.sort(np.array(vs))
    s = eval_S(spec, v)
    assert np.all(np.diff(s) >= 0)


def test_model_params_regime():
    D, S = parse_spec("exp_decay(1)"), parse_spec("constant(1)")
    assert ModelParams(0, 1.0, 1.0, 0.5, D, S).theorem_regime
    p = ModelParams(1, 1.0, 1.0, 0.6, D, S)
    assert not p.theorem_regime
    assert "alpha in (0, 1/2)" in p.regime_warning()
    with pytest.raises(ValueError, match="mu must be >= 0"):
        ModelParams(0, 1.0, -1.0, 0.5, D, S)
    with pytest.raises(ValueError):
        ModelParams(2, 1.0, 1.0, 0.5, D, S)


def test_spec_is_frozen():
    spec = CoefficientSpec("constant", (1.0,))
    with pytest.raises(Exception):
        spec.family = "linear"
