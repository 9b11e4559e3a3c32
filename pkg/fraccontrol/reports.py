"""Ausgabe: SynthesisReport als JSON, Trajektorien/Steuerungen und die
Sweep-Zusammenfassung als CSV. Dateien werden atomar geschrieben.
"""
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SUMMARY_COLUMNS = ["epsilon", "smoothing_n", "grid_T", "final_error", "picard_iters", "converged", "min_gram_eig"]
FLOAT_FORMAT = "%.6e"


def format_float(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return FLOAT_FORMAT % value


def format_n(smoothing_n) -> str:
    return "inf" if math.isinf(smoothing_n) else str(int(smoothing_n))


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    return value


def report_to_dict(report, min_gram_eig=None) -> dict:
    data = {
        "epsilon": report.epsilon,
        "smoothing_n": format_n(report.smoothing_n),
        "grid_T": report.grid_T,
        "converged": report.converged,
        "iterations": report.iterations,
        "final_error": report.final_error,
        "within_bound": report.within_bound,
        "discretization_slack": report.discretization_slack,
        "certificate_gap": report.certificate_gap,
        "optimality_residual": report.optimality_residual,
        "zero_case": report.zero_case,
        "h_norm": report.h_norm,
        "phi_hat": report.law.phi_hat,
        "rho": report.law.rho,
        "final_state": report.trajectory.final,
        "picard_trace": report.picard_trace,
        "relaxation_final": report.relaxation_final,
        "iterate_sup_norms": report.iterate_sup_norms,
        "r_bound": report.r_bound,
    }
    if min_gram_eig is not None:
        data["min_gram_eig"] = min_gram_eig
    if report.n_trace is not None:
        data["n_trace"] = [[format_n(n), gap] for n, gap in report.n_trace]
    if report.limit_gaps is not None:
        data["limit_gaps"] = [[format_n(n), gap] for n, gap in report.limit_gaps]
    return _jsonable(data)


def write_text_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_json_atomic(path, data) -> Path:
    return write_text_atomic(path, json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def trajectory_csv(trajectory) -> str:
    n_modes = trajectory.values.shape[0]
    header = ["t"] + [f"y_{k}" for k in range(1, n_modes + 1)]
    rows = ([format_float(t)] + [format_float(v) for v in trajectory.values[:, i]]
            for i, t in enumerate(trajectory.grid))
    return _csv_text(header, rows)


def control_csv(law, grid) -> str:
    samples = law.profile(grid)
    header = ["t"] + [f"u_{m}" for m in range(1, samples.shape[0] + 1)]
    rows = ([format_float(t)] + [format_float(v) for v in samples[:, i]] for i, t in enumerate(grid))
    return _csv_text(header, rows)


def gramian_csv(gram) -> str:
    return _csv_text([f"col_{k}" for k in range(1, gram.P + 1)],
                     ([format_float(v) for v in row] for row in gram.mat))


def summary_row(report, min_gram_eig: float) -> dict:
    return {
        "epsilon": report.epsilon,
        "smoothing_n": report.smoothing_n,
        "grid_T": report.grid_T,
        "final_error": report.final_error,
        "picard_iters": report.iterations,
        "converged": report.converged,
        "min_gram_eig": min_gram_eig,
    }


def summary_csv(rows) -> str:
    """Zeilen sortiert nach grid_T, smoothing_n und fallendem epsilon."""
    ordered = sorted(rows, key=lambda r: (r["grid_T"], r["smoothing_n"], -r["epsilon"]))
    return _csv_text(SUMMARY_COLUMNS, (
        [format_float(r["epsilon"]), format_n(r["smoothing_n"]), str(r["grid_T"]),
         format_float(r["final_error"]), str(r["picard_iters"]), "true" if r["converged"] else "false",
         format_float(r["min_gram_eig"])]
        for r in ordered
    ))


def run_stem(epsilon: float, smoothing_n, grid_T: int) -> str:
    return f"run_eps{epsilon:.0e}_n{format_n(smoothing_n)}_T{grid_T}"
