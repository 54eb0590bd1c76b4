import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatschrod.config import ConfigError, RunConfig, dumps, from_dict, loads

signals = st.sampled_from(["const(0)", "sin(1.0, 1.0)", "poly(0.5, -2.0)", "const(1) + sin(2, 3, 0.1)"])


@st.composite
def configs(draw):
    method = draw(st.sampled_from(["exact", "circuit-homogeneous", "lcu", "autonomise"]))
    family = draw(st.sampled_from(["dirichlet", "periodic"]))
    d = draw(st.integers(1, 2))
    boundary = {} if family == "periodic" else {
        f"{ax}{side}": draw(signals) for ax in range(d) for side in "-+" if draw(st.booleans())}
    return from_dict({
        "method": method, "seed": draw(st.integers(0, 2**31)), "threads": draw(st.integers(1, 4)),
        "problem": {"d": d, "n_x": draw(st.integers(1, 3)), "family": family,
                    "a": draw(st.floats(0.1, 3)), "domain": [0.0, draw(st.floats(0.5, 4))],
                    "boundary": boundary,
                    "initial": draw(st.sampled_from(["sin_mode(1)", "cos_mode(2)", "const(1)"]))},
        "schrodingerise": {"R": draw(st.floats(0.5, 5)), "n_p": draw(st.integers(1, 6))},
        "time": {"T": draw(st.floats(0.01, 1)), "r": draw(st.one_of(st.none(), st.integers(1, 99))),
                 "K": draw(st.one_of(st.none(), st.sampled_from([1, 2, 64]))),
                 "delta": draw(st.floats(1e-4, 1)), "n_s": draw(st.integers(1, 5))},
        "verify": {"mode": draw(st.sampled_from(["original", "modified"])),
                   "segment_check": draw(st.booleans())},
    })


@given(configs())
def test_print_parse_round_trip(cfg):
    assert loads(dumps(cfg)) == cfg
    assert dumps(loads(dumps(cfg))) == dumps(cfg)


def test_defaults_are_valid():
    assert loads(dumps(RunConfig())) == RunConfig()


@pytest.mark.parametrize("data, path", [
    ({"method": "magic"}, "method"),
    ({"problem": {"n_x": 0}}, "problem.n_x"),
    ({"problem": {"family": "robin"}}, "problem.family"),
    ({"problem": {"boundary": {"3-": "const(1)"}}}, "problem.boundary.3-"),
    ({"problem": {"domain": [1.0, 0.0]}}, "problem.domain"),
    ({"time": {"K": 3}}, "time.K"),
    ({"time": {"T": -1.0}}, "time.T"),
    ({"schrodingerise": {"n_p": 0}}, "schrodingerise.n_p"),
    ({"verify": {"mode": "fast"}}, "verify.mode"),
    ({"problem": {"n_x": 9}}, "problem.n_x"),
    ({"method": "autonomise", "time": {"n_s": 20}}, "time.n_s"),
    ({"method": "lcu", "problem": {"family": "neumann"}}, "problem.family"),
    ({"problem": {"colour": 1}}, "problem.colour"),
    ({"extra": 1}, "extra"),
])
def test_validation_reports_field_path(data, path):
    with pytest.raises(ConfigError) as exc:
        from_dict(data)
    assert str(exc.value).startswith(path + ":")
