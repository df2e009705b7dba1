import json

import numpy as np
import pytest

from wbkin.records import dump_lines, encode, iter_records


def test_floats_roundtrip_exactly(rng):
    xs = rng.normal(size=1000) * 10.0 ** rng.integers(-20, 20, 1000)
    back = json.loads(encode(xs.tolist()))
    assert np.array_equal(back, xs)


def test_formatting():
    assert encode(1.0) == "1.0"
    assert encode(0.1) == "0.10000000000000001"
    assert encode(np.float64(2.5e-30)) == format(2.5e-30, ".17g")
    assert encode(float("nan")) == "null"
    assert encode({"a": [True, None, 3]}) == '{"a":[true,null,3]}'
    assert encode(np.arange(2)) == "[0,1]"
    with pytest.raises(TypeError):
        encode(object())


def test_dump_and_iter():
    text = dump_lines([{"x": 1.5}, [1, 2]])
    assert text == '{"x":1.5}\n[1,2]\n'
    assert list(iter_records(text + "\n")) == [(1, {"x": 1.5}), (2, [1, 2])]
    with pytest.raises(ValueError, match="line 2"):
        list(iter_records('{}\n{"x": \n'))
