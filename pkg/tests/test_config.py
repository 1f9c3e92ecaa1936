import pytest
from hypothesis import given, settings, strategies as st

from chemolog.config import (
    parse_config, parse_lab, parse_sweep, parse_value, serialize_config, format_value,
)
from chemolog.errors import ConfigError

MINIMAL = "[model]\neta = 0\n"


def errors_of(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value.errors


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert (cfg.grid.nx, cfg.grid.ny, cfg.grid.lx) == (128, 128, 1.0)
    assert cfg.params.D.family == "constant" and cfg.params.mu == 1.0
    assert cfg.ks == (1.0,) and cfg.ps == (2.0,)
    assert cfg.tau == 0.5  # min(1, t_end / 2) with t_end = 1
    assert cfg.v0 == "elliptic()" and cfg.warnings == ()


def test_regime_driven_exponents():
    cfg = parse_config("[model]\neta = 1\nalpha = 0.25\n[solver]\nt_end = 50.0\n")
    assert cfg.ks == (1.25,) and cfg.ps == (2.0,) and cfg.tau == 1.0


def test_negative_mu():
    errs = errors_of("[model]\nmu = -1\n")
    assert errs == ["line 2: mu must be >= 0"]


def test_regime_warning():
    cfg = parse_config("[model]\neta = 1\nalpha = 0.6\n")
    assert any("outside the fully parabolic boundedness regime alpha in (0, 1/2)" in w for w in cfg.warnings)


def test_all_errors_reported_with_lines():
    text = "\n".join([
        "[grid]",
        "nx = 12.5",          # 2: type
        "colour = 3",         # 3: unknown key
        "[model]",
        "mu = -2.0",          # 5: invariant
        "S = \"linear(-1)\"",  # 6: validation
        "oops",               # 7: syntax
        "[initial]",
        "u0 = \"gaussian_bump(width=0.1)\"",  # 9: neither amplitude nor mass
        "[nonsense]",
        "a = 1",              # 11: unknown section
    ])
    errs = errors_of(text)
    lines = [e.split(":")[0] for e in errs]
    assert lines == [f"line {n}" for n in (2, 3, 5, 6, 7, 9, 11)]
    assert "must be an integer" in errs[0] and "unknown key 'colour'" in errs[1]
    assert "S' >= 0 violated" in errs[3] and "unknown section [nonsense]" in errs[6]


@pytest.mark.parametrize("text, needle", [
    ("[model]\neta = 2\n", "eta must be 0 or 1"),
    ("[model]\neta = 1\nalpha = 0.45\n[diagnostics]\np = [2.0]\n", "empty"),
    ("[diagnostics]\nk = []\n", "nonempty"),
    ("[diagnostics]\np = [1.0]\n", "exceed 1"),
    ("[solver]\nt_end = 0.0\n", "t_end"),
    ("[solver]\ndt_min = 1.0\n", "dt_min"),
    ("[model]\nD = 'constant(1)'\n", "double quotes"),
    ("[model]\neta = true\n", "integer"),
    ("[initial]\nu0 = \"elliptic()\"\n", "u0 cannot"),
    ("[model]\neta = 0\neta = 1\n", "duplicate key"),
])
def test_specific_errors(text, needle):
    errs = errors_of(text)
    assert any(needle in e for e in errs), errs


def test_comments_and_quotes():
    cfg = parse_config('# header\n[model]  # trailing\nD = "exp_decay(1.0)"  # note #2\n')
    assert str(cfg.params.D) == "exp_decay(1.0)"


def test_values():
    assert parse_value("true") is True and parse_value("[1, 2.5]") == [1, 2.5]
    assert format_value([1.0, "a", False]) == '[1.0, "a", false]'


configs = st.builds(
    lambda nx, lx, eta, alpha, r, mu, D, S, u0, t_end, rec, snaps, plots, ks: "\n".join([
        "[grid]", f"nx = {nx}", f"ny = {nx + 1}", f"lx = {lx!r}",
        "[model]", f"eta = {eta}", f"alpha = {alpha!r}", f"r = {r!r}", f"mu = {mu!r}",
        f'D = "{D}"', f'S = "{S}"',
        "[initial]", f'u0 = "{u0}"',
        "[solver]", f"t_end = {t_end!r}",
        "[diagnostics]", f"record_every = {rec!r}", *( [f"k = {ks!r}"] if ks else []),
        "[output]", f"snapshot_times = {snaps!r}", f"plots = {'true' if plots else 'false'}",
    ]),
    st.integers(8, 64), st.floats(0.5, 3), st.integers(0, 1), st.floats(0.05, 0.45),
    st.floats(-2, 2), st.floats(0, 5),
    st.sampled_from(["constant(1.0)", "exp_decay(2.0)", "bounded_smooth(rational_decay)"]),
    st.sampled_from(["constant(1.0)", "saturating(2.0, 1.0)", "bounded_smooth(tanh)"]),
    st.sampled_from(["constant(2.0)", "gaussian_bump(mass=60.0, width=0.3)",
                     "random_smooth(mass=20.0, modes=3, seed=7)"]),
    st.floats(0.01, 100), st.floats(0.001, 1),
    st.lists(st.floats(0, 100), max_size=3), st.booleans(),
    st.one_of(st.none(), st.lists(st.floats(1.0, 1.2), min_size=1, max_size=3)),
)


@settings(max_examples=60, deadline=None)
@given(configs)
def test_round_trip(text):
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


SWEEP = MINIMAL + "[grid]\nnx = 8\nny = 8\n[output]\ndirectory = \"sw\"\n[sweep]\nmodel.mu = [0.0, 1.0]\nmodel.r = [0.5, 1.0, 2.0]\nparallelism = 2\n"


def test_sweep_points_in_order():
    sw = parse_sweep(SWEEP)
    pts = sw.points()
    assert sw.parallelism == 2 and len(pts) == 6
    assert [v for v, _ in pts][:3] == [{"model.mu": 0.0, "model.r": r} for r in (0.5, 1.0, 2.0)]
    assert pts[4][1].params.mu == 1.0 and pts[4][1].params.r == 1.0
    assert pts[4][1].directory == "sw/run_0004"


@pytest.mark.parametrize("extra, needle", [
    ("model.nope = [1]\n", "unknown sweep axis"),
    ("model.mu = 3\n", "nonempty list"),
    ("model.alpha = [-1.0]\n", "alpha must be >= 0"),
    ("max_points = 4\n", "above the cap"),
])
def test_sweep_errors(extra, needle):
    with pytest.raises(ConfigError) as exc:
        parse_sweep(SWEEP + extra)
    assert any(needle in e for e in exc.value.errors), exc.value.errors


def test_sweep_cap_default():
    big = MINIMAL + "[sweep]\nmodel.r = " + repr([float(i) for i in range(101)]) + "\nmodel.mu = " + repr([float(i) for i in range(100)]) + "\n"
    with pytest.raises(ConfigError, match="10100 points"):
        parse_sweep(big)


def test_lab_config():
    lab = parse_lab("[lab]\nresolutions = [16]\nexperiments = [\"lgn\"]\n")
    assert lab.resolutions == (16,) and lab.ps == (0.5, 1.0, 2.0)
    with pytest.raises(ConfigError, match="experiments"):
        parse_lab("[lab]\nexperiments = [\"magic\"]\n")
