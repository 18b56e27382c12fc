import copy
import json

import pytest

from ckh import rules
from ckh.errors import RuleTableError
from ckh.ring import Bidegree, parse_elem
from ckh.rules import (
    active_table,
    load_table,
    local_relation_degrees,
    parse_table,
    validate_degrees,
    validate_homogeneity,
)

DEFAULT = json.loads(
    """{
  "degrees": {"cupA": [1, 0], "cupB": [0, -1], "capA": [-1, 0], "capB": [0, 1], "dot": [1, 1], "x": [0, 0]},
  "zigzag": {"A_left": "X*Y*Z", "A_right": "Y*Z", "B_left": "Z^2", "B_right": "Y*Z^2"},
  "sphere": ["Z", "Z"],
  "tube": ["Z", "X*Y*Z"],
  "curl": ["X*Z^2", "Y*Z^2"],
  "neck": ["Z^-1", "Z^-1"]
}"""
)


@pytest.fixture
def fresh_cache():
    rules._cached.cache_clear()
    yield
    rules._cached.cache_clear()


def test_default_table_matches_shipped_file():
    t = load_table()
    assert t == parse_table(DEFAULT, t.source)


def test_degree_constraints_hold():
    deg = load_table().degrees
    validate_degrees(deg)
    assert deg["cupA"] + deg["capA"] == Bidegree(0, 0)
    assert deg["cupB"] + deg["capA"] + deg["dot"] == Bidegree(0, 0)
    assert deg["cupA"] + deg["capB"] == deg["dot"] == Bidegree(1, 1)


def test_every_local_relation_is_homogeneous():
    deg = load_table().degrees
    validate_homogeneity(deg)
    for name, (lhs, rhs) in local_relation_degrees(deg).items():
        assert all(r == lhs for r in rhs), name


def test_zip_and_unzip_degrees():
    deg = load_table().degrees
    assert deg["cupA"] == Bidegree(1, 0)
    assert deg["capB"] == Bidegree(0, 1)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.pop("sphere"),
        lambda t: t["degrees"].update(dot=[2, 0]),
        lambda t: t["degrees"].update(cupA=[1, 1], capA=[-1, -1]),
        lambda t: t.update(tube=["1 + X*Y", "Z"]),
        lambda t: t.update(neck=["Z"]),
        lambda t: t["zigzag"].pop("B_left"),
        lambda t: t["degrees"].pop("x"),
        lambda t: t.update(curl=["W", "Z"]),
    ],
)
def test_malformed_tables_rejected(mutate):
    t = copy.deepcopy(DEFAULT)
    mutate(t)
    with pytest.raises(RuleTableError):
        parse_table(t)


def test_env_override(tmp_path, monkeypatch, fresh_cache):
    t = copy.deepcopy(DEFAULT)
    t["sphere"] = ["-Z", "Z^3"]
    path = tmp_path / "table.json"
    path.write_text(json.dumps(t))
    monkeypatch.setenv("KH_RULE_TABLE", str(path))
    table = active_table()
    assert table.source == str(path)
    assert table.sphere == (parse_elem("-Z"), parse_elem("Z^3"))


def test_env_override_validated(tmp_path, monkeypatch, fresh_cache):
    t = copy.deepcopy(DEFAULT)
    t["degrees"]["dot"] = [0, 2]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(t))
    monkeypatch.setenv("KH_RULE_TABLE", str(path))
    with pytest.raises(RuleTableError):
        active_table()
