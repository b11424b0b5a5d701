import enum
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbhash import serialize


class Colour(enum.Enum):
    RED = "red"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_roundtrip_exactly(x):
    assert float(serialize.format_float(x)) == x
    assert json.loads(serialize.dumps(x)) == x


def test_mixed_payload():
    obj = {"a": np.float64(0.1), "b": [np.int64(3), True, None], "c": Colour.RED, "d": np.array([1.5, 2.0]), "e": math.inf}
    text = serialize.dumps(obj)
    assert text == '{"a": 0.10000000000000001, "b": [3, true, null], "c": "red", "d": [1.5, 2], "e": null}'
    assert json.loads(text)["d"] == [1.5, 2]
    with pytest.raises(TypeError):
        serialize.dumps(object())


def test_csv():
    rows = [{"x": 1 / 3, "ok": False, "tag": Colour.RED}, {"x": None}]
    assert serialize.to_csv(rows, ["x", "ok", "tag"]) == "x,ok,tag\n0.33333333333333331,false,red\n,,\n"
    assert serialize.to_csv([], ["x"]) == "x\n"
