"""Experimentplan (JSON).

Beispiel::

    {
      "scenario": "../heat1d_semilinear.json",
      "epsilons": [0.1, 0.01, 0.001],
      "n_list": [1, 2, 4, 8, 16, "inf"],
      "grid_T": [256, 512],
      "out": "../../results/heat1d",
      "picard": {"max_iter": 50, "tol": 1e-10, "relaxation": 1.0}
    }

Relative Pfade beziehen sich auf das Verzeichnis der Plandatei.
"""
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from fraccontrol.errors import ScenarioError
from fraccontrol.scenario import read_json

PLAN_KEYS = {"scenario", "epsilons", "n_list", "grid_T", "out", "picard"}
PICARD_KEYS = {"max_iter", "tol", "relaxation"}


@dataclass(frozen=True)
class ExperimentPlan:
    scenario: Path
    epsilons: Tuple[float, ...]
    n_list: Tuple[float, ...]
    grid_T: Tuple[int, ...]
    out: Path
    max_picard: int = 50
    picard_tol: float = 1e-10
    relaxation: float = 1.0

    def __post_init__(self):
        if not self.epsilons:
            raise ScenarioError("'epsilons' darf nicht leer sein")
        if any(not (math.isfinite(e) and e > 0.0) for e in self.epsilons):
            raise ScenarioError(f"'epsilons' müssen positiv sein: {list(self.epsilons)}")
        if any(a <= c for a, c in zip(self.epsilons, self.epsilons[1:])):
            raise ScenarioError(f"'epsilons' müssen streng fallen: {list(self.epsilons)}")
        if not self.n_list:
            raise ScenarioError("'n_list' darf nicht leer sein")
        if any(a >= c for a, c in zip(self.n_list, self.n_list[1:])):
            raise ScenarioError("'n_list' muss streng wachsen")
        if any(t < 8 for t in self.grid_T):
            raise ScenarioError(f"'grid_T' benötigt ganze Zahlen >= 8: {list(self.grid_T)}")


def _parse_n(raw):
    if raw in ("inf", "∞") or (isinstance(raw, float) and math.isinf(raw)):
        return math.inf
    if isinstance(raw, int) and not isinstance(raw, bool) and raw >= 1:
        return raw
    raise ScenarioError(f"Ungültiger Eintrag in 'n_list': {raw!r}")


def _float_list(raw, label):
    if not isinstance(raw, list):
        raise ScenarioError(f"'{label}' muss eine Liste sein")
    try:
        return tuple(float(v) for v in raw)
    except (TypeError, ValueError):
        raise ScenarioError(f"'{label}' enthält keine Zahl")


def load_plan(path, out_override: Optional[str] = None) -> ExperimentPlan:
    """Liest den Plan; ohne 'grid_T' bleibt das Gitter des Szenarios maßgeblich."""
    path = Path(path)
    raw = read_json(path)
    if not isinstance(raw, dict):
        raise ScenarioError("Plan muss ein JSON-Objekt sein")
    unknown = set(raw) - PLAN_KEYS
    if unknown:
        raise ScenarioError(f"Unbekannte Felder im Plan: {sorted(unknown)}")
    if "scenario" not in raw or "epsilons" not in raw:
        raise ScenarioError("Plan benötigt 'scenario' und 'epsilons'")

    base = path.parent
    scenario = Path(raw["scenario"])
    if not scenario.is_absolute():
        scenario = base / scenario

    grid_raw = raw.get("grid_T", [])
    if isinstance(grid_raw, int):
        grid_raw = [grid_raw]
    if not isinstance(grid_raw, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in grid_raw):
        raise ScenarioError("'grid_T' muss eine Liste ganzer Zahlen sein")

    if out_override:
        out = Path(out_override)
    else:
        out = Path(raw.get("out", "results"))
        if not out.is_absolute():
            out = base / out

    picard = raw.get("picard", {})
    if not isinstance(picard, dict) or set(picard) - PICARD_KEYS:
        raise ScenarioError(f"'picard' erlaubt nur {sorted(PICARD_KEYS)}")
    n_raw = raw.get("n_list", ["inf"])
    if not isinstance(n_raw, list):
        raise ScenarioError("'n_list' muss eine Liste sein")

    try:
        return ExperimentPlan(
            scenario=scenario,
            epsilons=_float_list(raw["epsilons"], "epsilons"),
            n_list=tuple(_parse_n(n) for n in n_raw),
            grid_T=tuple(grid_raw),
            out=out,
            max_picard=int(picard.get("max_iter", 50)),
            picard_tol=float(picard.get("tol", 1e-10)),
            relaxation=float(picard.get("relaxation", 1.0)),
        )
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"Ungültiger Plan: {e}")
