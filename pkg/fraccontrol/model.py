"""Spektrale Abschneidung des Steuerungsproblems.

Der Zustandsraum sind die ersten N Eigenkoordinaten des Generators; A ist nur
über seine Eigenwerte −λ_k bekannt, B über eine dichte N×M-Matrix. Die
Projektion Π auf E wählt Koordinaten aus ``pi_set`` (1-basiert) aus, Π* füllt
mit Nullen auf.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from fraccontrol.errors import DomainError
from fraccontrol.mittag import ml_array

# Zeitpunkte dürfen um diese Toleranz über b hinausragen (Rundung)
TIME_TOL = 1e-12


def _frozen(array_like, ndim, label):
    arr = np.array(array_like, dtype=float)
    if arr.ndim != ndim:
        raise DomainError(f"{label}: erwartet {ndim}-dimensionales Feld, erhalten Form {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{label}: enthält nicht-endliche Werte")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralModel:
    q: float
    b: float
    lam: np.ndarray
    Bmat: np.ndarray
    pi_set: Tuple[int, ...]
    y0: np.ndarray
    yb: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.q) and 0.5 < self.q <= 1.0):
            raise DomainError(f"q muss in (1/2,1] liegen, erhalten: {self.q}")
        if not (math.isfinite(self.b) and self.b > 0.0):
            raise DomainError(f"b muss positiv sein, erhalten: {self.b}")
        lam = _frozen(self.lam, 1, "lambda")
        Bmat = _frozen(self.Bmat, 2, "B")
        y0 = _frozen(self.y0, 1, "y0")
        yb = _frozen(self.yb, 1, "yb")
        n = lam.size
        if n < 1:
            raise DomainError("Mindestens ein Eigenwert erforderlich")
        if np.any(lam < 0.0):
            raise DomainError("Alle Eigenwerte lambda_k müssen >= 0 sein")
        if Bmat.shape[0] != n or Bmat.shape[1] < 1:
            raise DomainError(f"B muss die Form ({n}, M) mit M >= 1 haben, erhalten {Bmat.shape}")
        pi_set = tuple(int(k) for k in self.pi_set)
        if not pi_set:
            raise DomainError("pi_set darf nicht leer sein")
        if any(k < 1 or k > n for k in pi_set) or any(a >= c for a, c in zip(pi_set, pi_set[1:])):
            raise DomainError(f"pi_set muss streng wachsend in 1..{n} sein, erhalten: {list(pi_set)}")
        if y0.size != n:
            raise DomainError(f"y0 muss Länge {n} haben, erhalten: {y0.size}")
        if yb.size != len(pi_set):
            raise DomainError(f"yb muss Länge {len(pi_set)} haben, erhalten: {yb.size}")
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "Bmat", Bmat)
        object.__setattr__(self, "pi_set", pi_set)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "yb", yb)

    @property
    def N(self) -> int:
        return self.lam.size

    @property
    def M(self) -> int:
        return self.Bmat.shape[1]

    @property
    def P(self) -> int:
        return len(self.pi_set)

    @property
    def pi_index(self) -> np.ndarray:
        return np.asarray(self.pi_set, dtype=int) - 1

    def project(self, v) -> np.ndarray:
        """Π: Auswahl der Koordinaten aus pi_set."""
        return np.asarray(v, dtype=float)[self.pi_index]

    def embed(self, phi) -> np.ndarray:
        """Π*: Auffüllen mit Nullen auf N Koordinaten."""
        out = np.zeros(self.N)
        out[self.pi_index] = phi
        return out


@dataclass(frozen=True)
class NonlocalPoint:
    t: float
    c: Union[float, np.ndarray]

    def weight_norm(self) -> float:
        if np.ndim(self.c) == 0:
            return abs(float(self.c))
        return float(np.linalg.norm(self.c, 2))


@dataclass(frozen=True)
class NonlocalSpec:
    """g(y) = Σ c_k y(t_k) + c ∫_δ^b tanh(y(s)) ds mit allen t_k ≥ δ."""

    delta: float
    points: Tuple[NonlocalPoint, ...] = ()
    integral_weight: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise DomainError(f"delta muss positiv sein, erhalten: {self.delta}")
        object.__setattr__(self, "points", tuple(self.points))

    def lambda_g(self, state_bound: float, b: float, n_modes: int) -> float:
        """Schranke Λ_g für ‖g(y)‖ bei ‖y‖_C ≤ state_bound."""
        point_part = sum(p.weight_norm() for p in self.points) * state_bound
        return point_part + abs(self.integral_weight) * max(b - self.delta, 0.0) * math.sqrt(n_modes)

    @property
    def is_zero(self) -> bool:
        return not self.points and self.integral_weight == 0.0


@dataclass(frozen=True)
class NonlinearitySpec:
    """f(t, y) mit Schranke ‖f(t, y)‖ ≤ bound_fn(t)."""

    name: str
    eval: Callable[[float, np.ndarray], np.ndarray]
    bound_fn: Callable[[float], float]
    is_zero: bool = False


@dataclass
class Trajectory:
    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise DomainError("Zeitgitter benötigt mindestens zwei Knoten")
        if self.grid[0] != 0.0 or np.any(np.diff(self.grid) <= 0.0):
            raise DomainError("Zeitgitter muss bei 0 beginnen und streng wachsen")
        if self.values.ndim != 2 or self.values.shape[1] != self.grid.size:
            raise DomainError(
                f"Werte der Form {self.values.shape} passen nicht zu {self.grid.size} Gitterknoten")

    @property
    def b(self) -> float:
        return float(self.grid[-1])

    @property
    def final(self) -> np.ndarray:
        return self.values[:, -1]

    def at(self, t: float) -> np.ndarray:
        """Stückweise lineare Interpolation."""
        if t < -TIME_TOL or t > self.b + TIME_TOL:
            raise DomainError(f"t={t} liegt außerhalb von [0, {self.b}]")
        return np.array([np.interp(t, self.grid, row) for row in self.values])

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=0)))

    def sup_distance(self, other: "Trajectory") -> float:
        if other.values.shape != self.values.shape:
            raise DomainError("Trajektorien auf verschiedenen Gittern")
        return float(np.max(np.linalg.norm(self.values - other.values, axis=0)))


def uniform_grid(b: float, grid_T: int) -> np.ndarray:
    grid = np.arange(grid_T + 1, dtype=float) * (b / grid_T)
    grid[-1] = b
    return grid


def constant_trajectory(v, grid) -> Trajectory:
    v = np.asarray(v, dtype=float)
    return Trajectory(grid, np.repeat(v[:, None], len(grid), axis=1))


def _check_time(model, t, label="t"):
    if not math.isfinite(t) or t < 0.0 or t > model.b + TIME_TOL:
        raise DomainError(f"{label}={t} liegt außerhalb von [0, {model.b}]")


def apply_sq(model: SpectralModel, t: float, v) -> np.ndarray:
    """S_q(t)v, komponentenweise E_{q,1}(−λ_k t^q) v_k."""
    _check_time(model, t)
    v = np.asarray(v, dtype=float)
    return ml_array(model.q, 1.0, -model.lam * min(t, model.b) ** model.q) * v


def apply_tq(model: SpectralModel, t: float, v) -> np.ndarray:
    """T_q(t)v, komponentenweise E_{q,q}(−λ_k t^q) v_k."""
    _check_time(model, t)
    v = np.asarray(v, dtype=float)
    return ml_array(model.q, model.q, -model.lam * min(t, model.b) ** model.q) * v


def apply_s_classical(model: SpectralModel, tau: float, v) -> np.ndarray:
    """Klassische Halbgruppe S(τ)v = e^{−λ_k τ} v_k."""
    if math.isnan(tau) or tau < 0.0:
        raise DomainError(f"tau muss >= 0 sein, erhalten: {tau}")
    v = np.asarray(v, dtype=float)
    if tau == 0.0:
        return v.copy()
    if math.isinf(tau):
        return np.where(model.lam > 0.0, 0.0, v)
    return np.exp(-model.lam * tau) * v


def smoothing_tau(smoothing_n) -> float:
    """τ = 1/n des Glättungsfaktors S(1/n); n = ∞ ergibt die Identität."""
    if smoothing_n is None or math.isinf(smoothing_n):
        return 0.0
    return 1.0 / smoothing_n


def _value_from_delta(z: Trajectory, t: float, delta: float) -> np.ndarray:
    """z(t) für t ≥ δ, ohne Gitterknoten links von δ zu lesen."""
    grid = z.grid
    right = int(np.searchsorted(grid, t, side="left"))
    if right < grid.size and grid[right] == t:
        return z.values[:, right].copy()
    left = right - 1
    if grid[left] < delta:
        # linker Nachbar liegt vor δ: Wert des ersten Knotens rechts davon
        return z.values[:, right].copy()
    w = (t - grid[left]) / (grid[right] - grid[left])
    return (1.0 - w) * z.values[:, left] + w * z.values[:, right]


def eval_g(spec: NonlocalSpec, z: Trajectory) -> np.ndarray:
    """g(z); hängt nur von z auf [δ, b] ab."""
    n_modes = z.values.shape[0]
    out = np.zeros(n_modes)
    if spec is None:
        return out
    b = z.b
    for point in spec.points:
        if point.t < spec.delta:
            raise DomainError(f"Nichtlokaler Zeitpunkt t={point.t} liegt vor delta={spec.delta}")
        if point.t > b + TIME_TOL:
            raise DomainError(f"Nichtlokaler Zeitpunkt t={point.t} liegt nach b={b}")
        value = _value_from_delta(z, min(point.t, b), spec.delta)
        out += np.asarray(point.c, dtype=float) @ value if np.ndim(point.c) == 2 else point.c * value
    if spec.integral_weight != 0.0:
        out += spec.integral_weight * _tanh_integral(z, spec.delta)
    return out


def _tanh_integral(z: Trajectory, delta: float) -> np.ndarray:
    """Trapezregel für ∫_δ^b tanh(z(s)) ds über die Knoten ab δ."""
    grid = z.grid
    first = int(np.searchsorted(grid, delta, side="left"))
    if first >= grid.size:
        return np.zeros(z.values.shape[0])
    nodes = grid[first:]
    vals = np.tanh(z.values[:, first:])
    total = integrate.trapezoid(vals, nodes, axis=1) if nodes.size > 1 else np.zeros(vals.shape[0])
    # Teilstück [δ, erster Knoten] mit dem Wert des ersten Knotens
    return total + (nodes[0] - delta) * vals[:, 0]


def operator_norms(model: SpectralModel) -> Tuple[float, float]:
    """(M_S, M_B); M_S = 1, da alle λ_k ≥ 0."""
    return 1.0, float(np.linalg.norm(model.Bmat, 2))


def example1_control_matrix(n_modes: int) -> np.ndarray:
    """B aus dem Wärmeleitungsbeispiel: U = span{e_2, e_3, …}, (Bu)_1 = 2u_2, (Bu)_k = u_k."""
    if n_modes < 2:
        raise DomainError("Das heat1d-B benötigt N >= 2")
    Bmat = np.zeros((n_modes, n_modes - 1))
    Bmat[0, 0] = 2.0
    for k in range(2, n_modes + 1):
        Bmat[k - 1, k - 2] = 1.0
    return Bmat


def heat1d_eigenvalues(n_modes: int) -> np.ndarray:
    return np.arange(1, n_modes + 1, dtype=float) ** 2


def heat1d_model(n_modes: int, q: float, b: float, pi_set: Sequence[int],
                 y0=None, yb=None, Bmat: Optional[np.ndarray] = None) -> SpectralModel:
    """Vorgabe des Wärmeleitungsbeispiels mit λ_k = k² und dessen Steueroperator."""
    y0 = np.zeros(n_modes) if y0 is None else y0
    yb = np.zeros(len(pi_set)) if yb is None else yb
    Bmat = example1_control_matrix(n_modes) if Bmat is None else Bmat
    return SpectralModel(q=q, b=b, lam=heat1d_eigenvalues(n_modes), Bmat=Bmat,
                         pi_set=tuple(pi_set), y0=y0, yb=yb)
