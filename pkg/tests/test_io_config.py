import math

import numpy as np
import pytest

from boltzgap import config, io
from boltzgap.errors import ConfigError


def test_defaults():
    cfg = config.parse("")
    assert cfg["grid"]["n_radial"] == 128
    assert cfg["evolve"]["t_end"] == 8.0 and cfg["evolve"]["window"] == [2.0, 8.0]
    spec = config.model_spec(cfg)
    assert spec.gamma == 1.0 and spec.weight.kind == "unit"


def test_soft_defaults():
    cfg = config.parse("[model]\ngamma = -1.0\n")
    assert cfg["evolve"]["t_end"] == 100.0
    assert cfg["evolve"]["window"] == [10.0, 100.0]


def test_weight_table():
    cfg = config.parse('[model.weight]\nkind = "exponential"\na = 0.25\ns = 1\n')
    w = config.model_spec(cfg).weight
    assert (w.kind, w.a, w.s) == ("exponential", 0.25, 1.0)


@pytest.mark.parametrize("text, key", [
    ("[grid]\nn_radial = 64\nbogus = 1\n", "grid.bogus"),
    ("[nonsense]\nx = 1\n", "nonsense"),
    ('[grid]\nn_radial = "many"\n', "grid.n_radial"),
    ("[grid]\nn_radial = 64.0\n", "grid.n_radial"),
    ("[model]\ngamma = true\n", "model.gamma"),
    ("[model]\ngamma = 1.5\n", "model"),
    ('[model.weight]\nkind = "exponential"\na = -1.0\n', "model.weight"),
    ('[model.weight]\nkind = "gaussian"\n', "model.weight.kind"),
    ("[model]\nweight = 3\n", "model.weight"),
    ("[grid]\nn_radial = 60\n", "grid.n_radial"),
    ("[grid]\nr_max = -1\n", "grid.r_max"),
    ('[assemble]\nnormalization = "symmetric"\n', "assemble.normalization"),
    ('[evolve]\nmethod = "euler"\n', "evolve.method"),
    ("[evolve]\nenvelope_c = 1.2\n", "evolve.envelope_c"),
    ('[evolve]\ninitial = "random"\n', "evolve.initial"),
])
def test_config_errors_name_key(text, key):
    with pytest.raises(ConfigError) as info:
        config.parse(text)
    assert info.value.key == key
    assert info.value.to_dict()["key"] == key


def test_malformed_toml():
    with pytest.raises(ConfigError):
        config.parse("[grid\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        config.load(tmp_path / "none.toml")
    assert info.value.key == "--config"


def test_json_floats_roundtrip(tmp_path):
    vals = [0.1, 1 / 3, 2.0 ** -1074, 1.7976931348623157e308, -0.0]
    p = io.write_json(tmp_path / "a.json", {"v": vals, "bad": [math.nan, math.inf], "n": np.int64(3)})
    back = io.read_json(p)
    assert back["v"] == vals
    assert back["bad"] == [None, None]
    assert back["n"] == 3


def test_csv_roundtrip(tmp_path):
    rows = [[0.1, 2.0], [1 / 3, -5e-300]]
    io.write_csv(tmp_path / "a.csv", ["x", "y"], rows)
    header, body = io.read_csv(tmp_path / "a.csv")
    assert header == ["x", "y"]
    np.testing.assert_array_equal(np.array(body, float), rows)


def test_atomic_write_leaves_no_temporaries(tmp_path):
    io.atomic_write(tmp_path / "sub" / "f.txt", "one")
    io.atomic_write(tmp_path / "sub" / "f.txt", "two")
    assert (tmp_path / "sub" / "f.txt").read_text() == "two"
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]


def test_spec_and_grid_dicts(hard_grid):
    from conftest import SOFT
    assert io.spec_from_dict(SOFT.to_dict()) == SOFT
    g = io.grid_from_dict(hard_grid.to_dict())
    np.testing.assert_allclose(g.nodes, hard_grid.nodes, rtol=1e-15)
    np.testing.assert_allclose(g.weights, hard_grid.weights, rtol=1e-15)
