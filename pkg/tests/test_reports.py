import json

import numpy as np
import pandas as pd

from revlab.config import SCHEMA_VERSION
from revlab.reports import dumps, export_to_excel, write_csv, write_json


def test_dumps_is_canonical():
    text = dumps({"b": np.float64(1.5), "a": np.arange(3), "c": np.int64(2)})
    data = json.loads(text)
    assert data == {"schema_version": SCHEMA_VERSION, "a": [0, 1, 2], "b": 1.5, "c": 2}
    assert text.index('"a"') < text.index('"b"')
    assert text == dumps({"c": 2, "a": [0, 1, 2], "b": 1.5})


def test_write_json_leaves_no_temp_files(tmp_path):
    path = write_json({"x": 1}, tmp_path / "out" / "r.json")
    assert json.loads(path.read_text())["x"] == 1
    assert [p.name for p in path.parent.iterdir()] == ["r.json"]


def test_write_csv(tmp_path):
    df = pd.DataFrame({"t": [0.0, 0.5], "K1": [-1.25, -0.125]})
    path = write_csv(df, tmp_path / "trace.csv")
    pd.testing.assert_frame_equal(pd.read_csv(path), df)


def test_export_to_excel(tmp_path):
    sheets = {"solution": pd.DataFrame({"x1": [1.0, 2.0], "q1": [0.0, 1.0]}),
              "empty": pd.DataFrame({"only_a_header": []})}
    path = export_to_excel(sheets, tmp_path / "ratio.xlsx")
    back = pd.read_excel(path, sheet_name=None, engine="openpyxl")
    assert set(back) == {"solution", "empty"}
    pd.testing.assert_frame_equal(back["solution"], sheets["solution"], check_dtype=False)
