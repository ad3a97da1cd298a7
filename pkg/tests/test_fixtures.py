import json

import pytest

from stackel_dn.errors import ConfigError
from stackel_dn.fixtures import BUILTIN, from_dict, load_fixture, validate_fixture


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtins_validate(name):
    validate_fixture(load_fixture(name))


def test_builtin_prefix():
    assert load_fixture("builtin:f2").name == "f2"


def test_json_roundtrip(tmp_path):
    doc = {"name": "mine", "rows": [["2+0.5*sin(pi*x)", "1+0.3*x^2", "1"], ["0", "-1", "1"],
                                    ["0", "1", "-2"]], "phi": ["0", "0.01*sin(x2)", "0"]}
    p = tmp_path / "mine.json"
    p.write_text(json.dumps(doc))
    fx = load_fixture(p)
    validate_fixture(fx)
    assert fx.name == "mine" and abs(fx.S.rows[0][0](0.5) - 2.5) < 1e-14


def test_missing_file():
    with pytest.raises(ConfigError) as e:
        load_fixture("no/such/file.json")
    assert e.value.field == "fixture"


def test_invalid_json_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "rows": [\n  oops\n}')
    with pytest.raises(ConfigError) as e:
        load_fixture(p)
    assert e.value.line == 3


@pytest.mark.parametrize("doc,field", [
    ({}, "rows"),
    ({"rows": [["1", "1"]]}, "rows"),
    ({"rows": [["2", "1", "1"], ["0", "-1", "1"], ["0", "1", "-2"]], "A": -1}, "A"),
    ({"rows": [["2", "1", "1"], ["0", "-1", "1"], ["0", "1", "-2"]], "c": 0}, "c"),
    ({"rows": [["2", "1", "1"], ["0", "-1", "1"], ["0", "1", "-2"]], "phi": ["0"]}, "phi"),
])
def test_bad_fields(doc, field):
    with pytest.raises(ConfigError) as e:
        from_dict(doc)
    assert e.value.field == field


def test_invalid_matrix_rejected():
    fx = from_dict({"rows": [["1", "1", "1"], ["1", "1", "1"], ["1", "1", "1"]]})
    with pytest.raises(ConfigError):
        validate_fixture(fx)
