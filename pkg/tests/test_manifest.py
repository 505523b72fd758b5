"""Deterministic artifact serialization."""

import json

import numpy as np
import pytest

from mgtlab.manifest import (format_cell, write_csv, write_json,
                             write_manifest, load_manifest, module_versions)


def test_format_cell_roundtrips_floats():
    for x in (0.1, 1.0 / 3.0, 1e-300, -2.5e17, np.float64(0.30000000000000004)):
        assert float(format_cell(float(x))) == float(x)


def test_format_cell_integers_and_strings():
    assert format_cell(3) == "3"
    assert format_cell("abc") == "abc"
    assert format_cell(np.int64(7)) == "7"


def test_write_csv_deterministic_bytes(tmp_path):
    rows = [[0.1, 1 / 3, "x"], [2, 3.5e-8, "y"]]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(p1, ["c1", "c2", "c3"], rows)
    write_csv(p2, ["c1", "c2", "c3"], rows)
    assert p1.read_bytes() == p2.read_bytes()
    first = p1.read_text().splitlines()
    assert first[0] == "c1,c2,c3"
    assert len(first) == 3


def test_write_json_handles_numpy_and_paths(tmp_path):
    p = tmp_path / "o.json"
    write_json(p, {"a": np.float64(0.5), "b": np.arange(3),
                   "c": {"d": np.int32(2)}, "e": (1, 2)})
    back = json.loads(p.read_text())
    assert back == {"a": 0.5, "b": [0, 1, 2], "c": {"d": 2}, "e": [1, 2]}


def test_manifest_roundtrip(tmp_path):
    p = tmp_path / "manifest.json"
    man = {"kind": "roots", "passed": True,
           "checks": {"x": {"passed": True, "value": 1e-12}}}
    write_manifest(p, man)
    assert load_manifest(p) == man


def test_module_versions_reports_dependencies():
    v = module_versions()
    assert "numpy" in v and "mgtlab" in v
