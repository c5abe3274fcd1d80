import pytest

from bathtub.config import (
    RunOptions,
    emit_config,
    parse_config,
    parse_text,
    shipped_configs,
)
from bathtub.core import GaussianDistribution, Greenshields, SinusoidalInflow
from bathtub.errors import ConfigurationError
from bathtub.experiments import EXAMPLES

MINIMAL = """\
L: 10
T: 8
velocity: {kind: greenshields}
inflow: {kind: constant, params: {rate: 0.15}}
distribution: {kind: uniform, params: {length: 10}}
"""


def test_example_51a_config():
    cfg = parse_config(shipped_configs()["example-5.1a"])
    assert cfg.scenario.length == 10.0
    assert cfg.scenario.horizon == 8.0
    assert isinstance(cfg.scenario.velocity, Greenshields)
    assert cfg.run.sigma == pytest.approx(1e-4)


def test_override_horizon():
    cfg = parse_config(shipped_configs()["example-5.1a"], ["T=16"])
    assert cfg.scenario.horizon == 16.0


def test_nested_override():
    cfg = parse_text(MINIMAL, ["run.sigma=1e-4", "inflow.params.rate=0.2"])
    assert cfg.run.sigma == 1e-4
    assert cfg.scenario.inflow.rate == 0.2


def test_defaults():
    cfg = parse_text(MINIMAL)
    assert cfg.run == RunOptions()
    assert cfg.scenario.initial_mass == 0.0


def test_empty_file(tmp_path):
    p = tmp_path / "empty.yaml"
    p.write_text("")
    with pytest.raises(ConfigurationError, match="empty"):
        parse_config(p)


def test_unknown_key_location():
    with pytest.raises(ConfigurationError) as err:
        parse_text(MINIMAL + "colour: red\n")
    assert err.value.line == 6
    assert err.value.column == 1


def test_unknown_param_location():
    text = MINIMAL.replace("{rate: 0.15}", "{rate: 0.15, phase: 1}")
    with pytest.raises(ConfigurationError, match="phase") as err:
        parse_text(text)
    assert err.value.line == 4


def test_bad_number():
    with pytest.raises(ConfigurationError) as err:
        parse_text(MINIMAL.replace("L: 10", "L: ten"))
    assert err.value.line == 1


def test_missing_key():
    with pytest.raises(ConfigurationError, match="distribution"):
        parse_text(MINIMAL.replace("distribution: {kind: uniform, params: {length: 10}}\n", ""))


def test_malformed_override():
    with pytest.raises(ConfigurationError):
        parse_text(MINIMAL, ["T"])


def test_negative_inflow_fails_required_check():
    with pytest.raises(ConfigurationError):
        parse_text(MINIMAL.replace("rate: 0.15", "rate: -0.15"))


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_round_trip(name):
    spec = EXAMPLES[name]
    run = spec.run_options()
    text = emit_config(spec.scenario, run, name)
    cfg = parse_text(text)
    assert cfg.scenario == spec.scenario
    assert cfg.run == run
    assert emit_config(cfg.scenario, cfg.run, cfg.name) == text


def test_round_trip_nonstandard_components():
    s = EXAMPLES["5.1a"].scenario.replace(
        inflow=SinusoidalInflow(0.2, 0.1), distribution=GaussianDistribution(0.4, 3.0, 0.5)
    )
    assert parse_text(emit_config(s)).scenario == s


def test_shipped_configs_parse():
    configs = shipped_configs()
    assert len(configs) == 8
    for path in configs.values():
        assert parse_config(path).scenario.length == 10.0
