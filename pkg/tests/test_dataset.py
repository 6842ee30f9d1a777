import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from qthermo import ModelParams
from qthermo.dataset import (DatasetFile, DatasetFormatError, parse, read, serialize,
                             sweep_to_dataset, write)
from qthermo.optimize import sweep

names = st.text(st.characters(blacklist_characters=",\n\r", blacklist_categories=("Cs",)),
                min_size=1, max_size=8)
json_scalars = st.one_of(st.integers(-10 ** 6, 10 ** 6), st.floats(allow_nan=False, allow_infinity=False),
                         st.text(max_size=10), st.booleans(), st.none())
meta_values = st.recursive(json_scalars, lambda inner: st.one_of(
    st.lists(inner, max_size=3), st.dictionaries(st.text(max_size=5), inner, max_size=3)), max_leaves=8)
meta_keys = st.text(st.characters(blacklist_characters=":\n\r", blacklist_categories=("Cs",)),
                    min_size=1, max_size=8).filter(lambda k: k.strip() == k)


@st.composite
def datasets(draw):
    cols = draw(st.lists(names, min_size=1, max_size=4, unique=True).filter(lambda c: c[0][0] != "#"))
    rows = draw(arrays(np.float64, (draw(st.integers(0, 6)), len(cols)),
                       elements=st.floats(allow_nan=True, allow_infinity=True)))
    meta = draw(st.dictionaries(meta_keys, meta_values, max_size=4))
    return DatasetFile(cols, rows, meta)


@given(datasets(), st.sampled_from(["csv", "json"]))
def test_round_trip(ds, fmt):
    text = serialize(ds, fmt)
    back = parse(text, fmt)
    assert back == ds
    assert serialize(back, fmt) == text


def test_floats_are_bit_exact():
    x = np.array([[math.pi, 0.1 + 0.2, 5e-324, -0.0, 1.7976931348623157e308]])
    ds = DatasetFile(["a", "b", "c", "d", "e"], x)
    back = parse(serialize(ds))
    assert back.rows.tobytes() == x.tobytes()


def test_csv_layout():
    ds = DatasetFile(["tau", "fi"], [[0.0, 0.0], [1.5, 2.5e-5]], {"figure": "demo"})
    lines = serialize(ds).splitlines()
    assert lines[0] == "# qthermo-dataset: 1"
    assert lines[1] == '# figure: "demo"'
    assert lines[2] == "tau,fi"
    assert lines[4] == "1.5,2.5000000000000001e-05"


def test_file_io_picks_format_from_suffix(tmp_path):
    ds = DatasetFile(["x"], [[1.0], [2.0]], {"k": [1, 2]})
    for name in ("a.csv", "sub/b.json"):
        path = write(ds, tmp_path / name)
        assert read(path) == ds
    assert (tmp_path / "sub/b.json").read_text().lstrip().startswith("{")


@pytest.mark.parametrize("bad", ["", "x,y\n1,2\n", "# qthermo-dataset: 1\n"])
def test_rejects_malformed_csv(bad):
    with pytest.raises(DatasetFormatError):
        parse(bad)


def test_rejects_bad_shapes_and_names():
    with pytest.raises(DatasetFormatError):
        DatasetFile(["a", "b"], [[1.0]])
    with pytest.raises(DatasetFormatError):
        serialize(DatasetFile(["a,b"], [[1.0]]))
    with pytest.raises(DatasetFormatError):
        serialize(DatasetFile(["#a"], [[1.0]]))
    with pytest.raises(DatasetFormatError):
        serialize(DatasetFile(["a"], [[1.0]]), "xml")
    with pytest.raises(DatasetFormatError):
        parse('{"format": "other"}', "json")


def test_sweep_dataset_is_long_format():
    table = sweep([("theta", np.linspace(0, math.pi, 4)), ("tau", [0.5, 1.0])], "fi",
                  ModelParams(beta=3.0))
    ds = sweep_to_dataset(table)
    assert ds.columns == ["theta", "tau", "fi"]
    assert ds.rows.shape == (8, 3)
    assert ds.metadata["axes"] == {"theta": 4, "tau": 2}
    assert parse(serialize(ds)) == ds
    assert "phi" not in ds.columns
