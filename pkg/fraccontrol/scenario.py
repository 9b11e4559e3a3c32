"""Szenario-Dateien (JSON) und die Bausteine f, g dazu.

Beispiel::

    {
      "name": "heat1d_semilinear",
      "q": "2/3", "b": 1.0, "N": 6,
      "lambda": "heat1d", "B": "example1",
      "pi_set": [1, 2, 3],
      "y0": [1, 0.5, 0.25, 0, 0, 0], "yb": [0.2, -0.1, 0.05],
      "g": {"delta": 0.5, "points": [{"t": 0.6, "c": 0.1}]},
      "f": {"kind": "sine", "params": {"amplitude": 0.5}},
      "grid": {"T": 512}
    }
"""
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from fraccontrol.errors import DomainError, QuadratureError, ScenarioError
from fraccontrol.model import (
    NonlinearitySpec,
    NonlocalPoint,
    NonlocalSpec,
    SpectralModel,
    example1_control_matrix,
    heat1d_eigenvalues,
    operator_norms,
)
from fraccontrol.varmin import assemble_gramian, check_linear_pac

SCENARIO_KEYS = {"name", "q", "b", "N", "lambda", "B", "pi_set", "y0", "yb", "g", "f", "grid"}
REQUIRED_KEYS = {"q", "b", "N", "lambda", "B", "pi_set", "y0", "yb"}
NONLOCAL_KEYS = {"delta", "points", "integral_weight"}
DEFAULT_GRID_T = 256
F_AUDIT_SAMPLES = 200


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    model: SpectralModel
    gspec: Optional[NonlocalSpec]
    fspec: NonlinearitySpec
    grid_T: int = DEFAULT_GRID_T
    raw: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class AuditItem:
    label: str
    ok: bool
    detail: str


def zero_nonlinearity(n_modes: int) -> NonlinearitySpec:
    zeros = np.zeros(n_modes)
    zeros.setflags(write=False)
    return NonlinearitySpec("zero", lambda t, y: zeros, lambda t: 0.0, is_zero=True)


def sine_nonlinearity(amplitude: float, n_modes: int) -> NonlinearitySpec:
    """f(t, y) = ν/√N · sin(y), also ‖f‖ ≤ ν."""
    scale = amplitude / math.sqrt(n_modes)
    return NonlinearitySpec("sine", lambda t, y: scale * np.sin(y), lambda t: abs(amplitude))


def tanh_nonlinearity(amplitude: float, n_modes: int) -> NonlinearitySpec:
    scale = amplitude / math.sqrt(n_modes)
    return NonlinearitySpec("tanh", lambda t, y: scale * np.tanh(y), lambda t: abs(amplitude))


def constant_nonlinearity(value) -> NonlinearitySpec:
    value = np.array(value, dtype=float)
    value.setflags(write=False)
    norm = float(np.linalg.norm(value))
    return NonlinearitySpec("constant", lambda t, y: value, lambda t: norm, is_zero=not np.any(value))


def _number(raw, label):
    try:
        if isinstance(raw, str):
            return float(Fraction(raw.strip()))
        value = float(raw)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ScenarioError(f"'{label}' ist keine Zahl: {raw!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"'{label}' ist nicht endlich: {raw!r}")
    return value


def _vector(raw, label, length=None):
    if not isinstance(raw, list):
        raise ScenarioError(f"'{label}' muss eine Liste sein")
    values = [_number(v, f"{label}[{i}]") for i, v in enumerate(raw)]
    if length is not None and len(values) != length:
        raise ScenarioError(f"'{label}' muss {length} Einträge haben, hat {len(values)}")
    return np.array(values)


def _parse_nonlocal(raw, n_modes) -> Optional[NonlocalSpec]:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ScenarioError("'g' muss ein Objekt sein")
    unknown = set(raw) - NONLOCAL_KEYS
    if unknown:
        raise ScenarioError(f"Unbekannte Felder in 'g': {sorted(unknown)}")
    if "delta" not in raw:
        raise ScenarioError("'g.delta' fehlt")
    points = []
    for i, entry in enumerate(raw.get("points", [])):
        if not isinstance(entry, dict) or "t" not in entry or "c" not in entry:
            raise ScenarioError(f"'g.points[{i}]' benötigt 't' und 'c'")
        weight = entry["c"]
        if isinstance(weight, list):
            weight = np.array([_vector(row, f"g.points[{i}].c", n_modes) for row in weight])
            if weight.shape != (n_modes, n_modes):
                raise ScenarioError(f"'g.points[{i}].c' muss {n_modes}x{n_modes} sein")
            weight.setflags(write=False)
        else:
            weight = _number(weight, f"g.points[{i}].c")
        points.append(NonlocalPoint(_number(entry["t"], f"g.points[{i}].t"), weight))
    try:
        return NonlocalSpec(_number(raw["delta"], "g.delta"), tuple(points),
                            _number(raw.get("integral_weight", 0.0), "g.integral_weight"))
    except DomainError as e:
        raise ScenarioError(str(e))


def _parse_nonlinearity(raw, n_modes) -> NonlinearitySpec:
    if raw is None:
        return zero_nonlinearity(n_modes)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ScenarioError("'f' benötigt das Feld 'kind'")
    kind = raw["kind"]
    params = raw.get("params", {})
    if kind == "zero":
        return zero_nonlinearity(n_modes)
    if kind in ("sine", "tanh"):
        amplitude = _number(params.get("amplitude"), "f.params.amplitude")
        factory = sine_nonlinearity if kind == "sine" else tanh_nonlinearity
        return factory(amplitude, n_modes)
    if kind == "constant":
        return constant_nonlinearity(_vector(params.get("value"), "f.params.value", n_modes))
    raise ScenarioError(f"Unbekannte Nichtlinearität: {kind!r}")


def parse_scenario(raw: dict, name: str = "scenario") -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("Szenario muss ein JSON-Objekt sein")
    unknown = set(raw) - SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"Unbekannte Felder: {sorted(unknown)}")
    missing = REQUIRED_KEYS - set(raw)
    if missing:
        raise ScenarioError(f"Fehlende Felder: {sorted(missing)}")

    n_modes = raw["N"]
    if not isinstance(n_modes, int) or n_modes < 1:
        raise ScenarioError(f"'N' muss eine positive ganze Zahl sein, erhalten: {n_modes!r}")

    if raw["lambda"] == "heat1d":
        lam = heat1d_eigenvalues(n_modes)
    else:
        lam = _vector(raw["lambda"], "lambda", n_modes)

    if raw["B"] == "example1":
        try:
            Bmat = example1_control_matrix(n_modes)
        except DomainError as e:
            raise ScenarioError(str(e))
    elif isinstance(raw["B"], list):
        rows = [_vector(row, "B") for row in raw["B"]]
        if not rows or len({row.size for row in rows}) != 1:
            raise ScenarioError("'B' muss eine Matrix mit gleich langen Zeilen sein")
        Bmat = np.array(rows)
    else:
        raise ScenarioError(f"'B' muss 'example1' oder eine Matrix sein, erhalten: {raw['B']!r}")

    pi_set = raw["pi_set"]
    if not isinstance(pi_set, list) or not all(isinstance(k, int) for k in pi_set):
        raise ScenarioError("'pi_set' muss eine Liste ganzer Zahlen sein")

    grid_raw = raw.get("grid") or {}
    if not isinstance(grid_raw, dict):
        raise ScenarioError("'grid' muss ein Objekt sein")
    grid_T = grid_raw.get("T", DEFAULT_GRID_T)
    if not isinstance(grid_T, int) or grid_T < 8:
        raise ScenarioError(f"'grid.T' muss eine ganze Zahl >= 8 sein, erhalten: {grid_T!r}")

    try:
        model = SpectralModel(
            q=_number(raw["q"], "q"),
            b=_number(raw["b"], "b"),
            lam=lam,
            Bmat=Bmat,
            pi_set=tuple(pi_set),
            y0=_vector(raw["y0"], "y0", n_modes),
            yb=_vector(raw["yb"], "yb", len(pi_set)),
        )
    except DomainError as e:
        raise ScenarioError(str(e))

    gspec = _parse_nonlocal(raw.get("g"), n_modes)
    if gspec is not None:
        if gspec.delta >= model.b:
            raise ScenarioError(f"'g.delta' muss in (0, b) liegen, erhalten: {gspec.delta}")
        for point in gspec.points:
            if point.t < gspec.delta or point.t > model.b:
                raise ScenarioError(f"Nichtlokaler Zeitpunkt t={point.t} liegt nicht in [delta, b]")
    fspec = _parse_nonlinearity(raw.get("f"), n_modes)
    return Scenario(str(raw.get("name", name)), model, gspec, fspec, grid_T, raw)


def read_json(path) -> dict:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ScenarioError(f"Datei nicht gefunden: {path}")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"Ungültiges JSON in {path}: Zeile {e.lineno}, Spalte {e.colno}")


def load_scenario(path) -> Scenario:
    return parse_scenario(read_json(path), Path(path).stem)


def audit_scenario(raw: dict, rng: np.random.Generator) -> List[AuditItem]:
    """Prüfliste der Voraussetzungen; jede Zeile trägt das Kennzeichen der Annahme."""
    if not isinstance(raw, dict):
        return [AuditItem("(S)", False, "Szenario muss ein JSON-Objekt sein")]
    items = []

    try:
        q = _number(raw.get("q"), "q")
        items.append(AuditItem("(q)", 0.5 < q <= 1.0, f"q = {q:.6g}, erlaubt (1/2, 1]"))
    except ScenarioError as e:
        items.append(AuditItem("(q)", False, str(e)))

    g_raw = raw.get("g")
    if isinstance(g_raw, dict):
        try:
            delta = _number(g_raw.get("delta"), "g.delta")
            b = _number(raw.get("b"), "b")
            times = [_number(p.get("t"), "t") for p in g_raw.get("points", []) if isinstance(p, dict)]
            bad = [t for t in times if t < delta or t > b]
            ok = 0.0 < delta < b and not bad
            detail = f"delta = {delta:.6g}, t_k = {[round(t, 6) for t in times]}"
            if bad:
                detail += f", verletzt: {bad}"
            items.append(AuditItem("(G)(b)", ok, detail))
        except ScenarioError as e:
            items.append(AuditItem("(G)(b)", False, str(e)))
    else:
        items.append(AuditItem("(G)(b)", True, "keine nichtlokale Bedingung"))

    try:
        scenario = parse_scenario(raw)
    except ScenarioError as e:
        items.append(AuditItem("(S)", False, str(e)))
        return items

    model = scenario.model
    items.append(AuditItem("(S)", True, f"N = {model.N}, min lambda = {float(np.min(model.lam)):.6g}"))

    worst = 0.0
    for _ in range(F_AUDIT_SAMPLES):
        t = float(rng.uniform(0.0, model.b))
        y = rng.normal(scale=10.0, size=model.N)
        excess = float(np.linalg.norm(scenario.fspec.eval(t, y))) - float(scenario.fspec.bound_fn(t))
        worst = max(worst, excess)
    items.append(AuditItem("(F)(b)", worst <= 1e-12,
                           f"{F_AUDIT_SAMPLES} Stichproben, max. Überschreitung {worst:.3e}"))

    _, m_b = operator_norms(model)
    items.append(AuditItem("(B)", math.isfinite(m_b), f"M_B = {m_b:.6g}"))

    try:
        min_eig, controllable = check_linear_pac(assemble_gramian(model))
        items.append(AuditItem("(AC)", controllable, f"min. Eigenwert der Gramschen Matrix = {min_eig:.6e}"))
    except QuadratureError as e:
        items.append(AuditItem("(AC)", False, str(e)))
    return items
