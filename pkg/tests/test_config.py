import pytest

from dagrammar.cli import build_parser, config_from_args
from dagrammar.config import RunConfig, parallel_map
from dagrammar.errors import InputError


def square(x):
    return x * x


def test_defaults_round_trip():
    cfg = RunConfig()
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_unknown_key():
    with pytest.raises(InputError, match="bogus"):
        RunConfig.from_dict({"bogus": 1})


@pytest.mark.parametrize("field, value", [
    ("clique_solver", "magic"),
    ("hitting_set", "greedy"),
    ("partition_by", "colour"),
    ("beam_width", 0),
    ("top_n", 0),
    ("max_motif_size", 1),
])
def test_invalid_values(field, value):
    with pytest.raises(InputError):
        RunConfig(**{field: value})


def test_unbounded_beam_is_allowed():
    assert RunConfig(beam_width=None).beam_width is None


def test_subsystem_generators_are_independent_and_repeatable():
    cfg = RunConfig(seed=5)
    a = [cfg.rng("clique", 1).random() for _ in range(3)]
    assert a == [cfg.rng("clique", 1).random() for _ in range(3)]
    assert cfg.rng("clique", 1).random() != cfg.rng("clique", 2).random()
    assert cfg.rng("clique", 1).random() != RunConfig(seed=6).rng("clique", 1).random()


@pytest.mark.parametrize("jobs", [1, 2])
def test_parallel_map_keeps_order(jobs):
    assert parallel_map(square, range(7), jobs) == [0, 1, 4, 9, 16, 25, 36]


def test_flags_override_config_file(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text('{"seed": 3, "top_n": 7}')
    ns = build_parser().parse_args(["induce", "d.json", "--config", str(p), "--seed", "9"])
    cfg = config_from_args(ns)
    assert cfg.seed == 9 and cfg.top_n == 7


def test_unreadable_config_file(tmp_path):
    ns = build_parser().parse_args(["induce", "d.json", "--config", str(tmp_path / "missing.json")])
    with pytest.raises(InputError):
        config_from_args(ns)
