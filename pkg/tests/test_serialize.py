from dataclasses import dataclass

import numpy as np
import pytest

from starcalc.kernels import ConstantLevel
from starcalc.model import SetFunction
from starcalc.serialize import (
    dumps,
    format_float,
    setfunction_from_csv,
    setfunction_from_json,
    setfunction_to_csv,
    setfunction_to_json,
    to_plain,
)


def test_float_formatting_roundtrips():
    for x in (0.1, 1.0 / 3.0, 1e-300, -2.5e17, 3.141592653589793):
        assert float(format_float(x)) == x
    assert format_float(float("nan")) == '"nan"'
    assert format_float(float("inf")) == '"inf"'
    assert format_float(float("-inf")) == '"-inf"'


def test_dumps_sorted_and_stable():
    obj = {"b": 1, "a": [1.5, 2, None], "c": {"y": True, "x": False}}
    text = dumps(obj)
    assert text == dumps(obj)
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert text.index('"x"') < text.index('"y"')
    # flat lists stay on one line
    assert "[1.5, 2, null]" in text
    assert text.endswith("\n")


def test_dumps_nested_lists_indent():
    text = dumps({"rows": [[1, 2], [3, 4]]})
    assert "[\n" in text
    assert "[1, 2]" in text


def test_dumps_empty_containers():
    assert dumps({}) == "{}\n"
    assert dumps([]) == "[]\n"


def test_to_plain_shapes(ground3):
    assert to_plain(np.float64(0.5)) == 0.5
    assert isinstance(to_plain(np.int64(3)), int)
    assert to_plain(np.bool_(True)) is True
    assert to_plain(np.array([1.0, 2.0])) == [1.0, 2.0]

    @dataclass
    class Row:
        name: str
        vals: tuple

    assert to_plain(Row("a", (1, 2))) == {"name": "a", "vals": [1, 2]}
    # kernels reduce through their JSON form
    assert to_plain(ConstantLevel(2.0)) == {"type": "constant_level", "c": 2.0}
    with pytest.raises(TypeError):
        to_plain(object())


def test_setfunction_json_roundtrip(ground3):
    k = SetFunction(ground3, np.arange(8, dtype=float) / 7.0)
    back = setfunction_from_json(setfunction_to_json(k))
    assert back.ground == k.ground
    assert np.array_equal(back.values, k.values)


def test_setfunction_csv_roundtrip(ground3):
    vals = np.array([0.0, 0.1, -2.5, 1e-17, 3.0, 0.0, 7.25, -1.0 / 3.0])
    k = SetFunction(ground3, vals)
    text = setfunction_to_csv(k)
    lines = text.strip().splitlines()
    assert lines[0] == "mask,cardinality,value"
    assert len(lines) == 9
    assert lines[1].startswith("0,0,")
    assert lines[-1].startswith("7,3,")
    back = setfunction_from_csv(text, ground3)
    assert np.array_equal(back.values, k.values)


def test_setfunction_csv_bad_rows(ground3):
    with pytest.raises(ValueError):
        setfunction_from_csv("mask,cardinality,value\n0,0\n", ground3)
    with pytest.raises(ValueError):
        setfunction_from_csv("mask,cardinality,value\nzero,0,1.0\n", ground3)
