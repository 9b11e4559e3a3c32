import json
import math

import numpy as np

from fraccontrol.model import Trajectory, uniform_grid
from fraccontrol.reports import (
    SUMMARY_COLUMNS,
    format_float,
    format_n,
    run_stem,
    summary_csv,
    trajectory_csv,
    write_json_atomic,
    write_text_atomic,
)


def row(epsilon, n, grid_T):
    return {"epsilon": epsilon, "smoothing_n": n, "grid_T": grid_T, "final_error": epsilon / 2,
            "picard_iters": 2, "converged": True, "min_gram_eig": 0.25}


def test_format_helpers():
    assert format_float(0.1) == "1.000000e-01"
    assert format_float(math.inf) == "inf"
    assert format_n(math.inf) == "inf"
    assert format_n(8) == "8"
    assert run_stem(0.001, math.inf, 256) == "run_eps1e-03_ninf_T256"
    assert run_stem(0.1, 4, 64) == "run_eps1e-01_n4_T64"


def test_summary_ordering():
    rows = [row(0.01, math.inf, 256), row(0.1, 4, 256), row(0.1, math.inf, 256), row(0.1, math.inf, 128)]
    lines = summary_csv(rows).strip().split("\n")
    assert lines[0] == ",".join(SUMMARY_COLUMNS)
    keys = [tuple(line.split(",")[:3]) for line in lines[1:]]
    assert keys == [
        ("1.000000e-01", "inf", "128"),
        ("1.000000e-01", "4", "256"),
        ("1.000000e-01", "inf", "256"),
        ("1.000000e-02", "inf", "256"),
    ]
    assert lines[1].endswith(",2,true,2.500000e-01")


def test_trajectory_csv():
    grid = uniform_grid(1.0, 2)
    text = trajectory_csv(Trajectory(grid, np.array([[1.0, 0.5, 0.25], [0.0, 0.0, -1.0]])))
    assert text.split("\n")[0] == "t,y_1,y_2"
    assert text.split("\n")[3] == "1.000000e+00,2.500000e-01,-1.000000e+00"


def test_atomic_writes(tmp_path):
    target = write_json_atomic(tmp_path / "sub" / "report.json",
                               {"gap": math.inf, "values": np.array([1.0, 2.0]), "n": np.int64(3)})
    assert json.loads(target.read_text(encoding="utf-8")) == {"gap": "inf", "n": 3, "values": [1.0, 2.0]}
    write_text_atomic(tmp_path / "sub" / "report.json", "neu\n")
    assert (tmp_path / "sub" / "report.json").read_text(encoding="utf-8") == "neu\n"
    assert sorted(p.name for p in (tmp_path / "sub").iterdir()) == ["report.json"]
