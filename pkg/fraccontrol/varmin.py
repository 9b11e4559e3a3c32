"""Variationskern: Gramsche Matrix auf E, h_n(z), Minimierung von J_{ε,n}(·; z)
und das Steuergesetz u(s) = B* T_q*(b−s) Π* φ̂.
"""
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy import linalg, optimize

from fraccontrol.errors import DomainError, QuadratureError, RootBracketError, SolverError
from fraccontrol.logging_config import get_logger
from fraccontrol.mittag import ml_array
from fraccontrol.model import (
    TIME_TOL,
    NonlinearitySpec,
    NonlocalSpec,
    SpectralModel,
    Trajectory,
    apply_s_classical,
    apply_sq,
    eval_g,
    smoothing_tau,
)

logger = get_logger("varmin")

GRAMIAN_START_NODES = 16
GRAMIAN_MAX_NODES = 1024
GRAMIAN_TOL = 1e-10
GRAMIAN_FAIL_TOL = 1e-6
RANK_TOL_FACTOR = 1e-10
OPT_TOL = 1e-9
BRACKET_DOUBLINGS = 400


@dataclass(frozen=True, eq=False)
class Gramian:
    mat: np.ndarray
    quad_nodes: int
    refinement_change: float = 0.0

    @property
    def P(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True, eq=False)
class ControlLaw:
    phi_hat: np.ndarray
    model: SpectralModel
    rho: float

    def __call__(self, s: float) -> np.ndarray:
        return control_value(self, s)

    def profile(self, grid) -> np.ndarray:
        return control_profile(self, grid)


@dataclass(frozen=True, eq=False)
class MinimizeReport:
    phi_hat: np.ndarray
    j_value: float
    residual: float
    zero_case: bool

    @property
    def rho(self) -> float:
        return float(np.linalg.norm(self.phi_hat))


@lru_cache(maxsize=32)
def gauss_legendre(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return legendre.leggauss(n_nodes)


def _gramian_with_nodes(model: SpectralModel, n_nodes: int) -> np.ndarray:
    # σ = (b−s)^q: Γ_jk = (1/q) ∫_0^{b^q} E_{q,q}(−λ_j σ) E_{q,q}(−λ_k σ) dσ · (BB*)_jk
    x, w = gauss_legendre(n_nodes)
    upper = model.b ** model.q
    sigma = 0.5 * upper * (x + 1.0)
    weights = 0.5 * upper * w
    pi = model.pi_index
    kernel = ml_array(model.q, model.q, -np.outer(model.lam[pi], sigma))
    inner = (kernel * weights) @ kernel.T
    bbt = (model.Bmat @ model.Bmat.T)[np.ix_(pi, pi)]
    mat = inner * bbt / model.q
    return 0.5 * (mat + mat.T)


def assemble_gramian(model: SpectralModel, tol: float = GRAMIAN_TOL,
                     max_nodes: int = GRAMIAN_MAX_NODES) -> Gramian:
    """Gramsche Matrix auf E mit Knotenverdopplung der Gauß-Legendre-Regel."""
    n_nodes = GRAMIAN_START_NODES
    previous = _gramian_with_nodes(model, n_nodes)
    change = math.inf
    while n_nodes < max_nodes:
        n_nodes *= 2
        current = _gramian_with_nodes(model, n_nodes)
        change = float(np.max(np.abs(current - previous)))
        previous = current
        logger.debug(f"gramian nodes={n_nodes} change={change:.3e}")
        if change <= tol:
            return Gramian(current, n_nodes, change)
    if change > GRAMIAN_FAIL_TOL:
        raise QuadratureError(
            f"Gramsche Matrix nicht konvergiert: Änderung {change:.3e} bei {n_nodes} Knoten")
    logger.warning(f"gramian tolerance missed nodes={n_nodes} change={change:.3e}")
    return Gramian(previous, n_nodes, change)


def check_linear_pac(gram: Gramian) -> Tuple[float, bool]:
    """Kleinster Eigenwert von Γ und ob er die Ranktoleranz 1e−10·tr(Γ)/P übersteigt."""
    eigs = linalg.eigvalsh(gram.mat)
    min_eig = float(eigs[0])
    rank_tol = RANK_TOL_FACTOR * max(float(np.trace(gram.mat)), 0.0) / gram.P
    return min_eig, bool(min_eig > rank_tol)


def forcing_samples(fspec: NonlinearitySpec, z: Trajectory) -> np.ndarray:
    """f(t_i, z(t_i)) an allen Gitterknoten."""
    n_modes = z.values.shape[0]
    if fspec is None or fspec.is_zero:
        return np.zeros((n_modes, z.grid.size))
    out = np.empty((n_modes, z.grid.size))
    for i, t in enumerate(z.grid):
        out[:, i] = fspec.eval(float(t), z.values[:, i])
    if not np.all(np.isfinite(out)):
        raise SolverError(f"Nichtlinearität '{fspec.name}' liefert nicht-endliche Werte")
    return out


_moment_cache = {}
_moment_lock = threading.Lock()


def _moment_weights(model: SpectralModel, grid: np.ndarray) -> np.ndarray:
    """Gewichte W mit ∫_0^b (b−s)^{q−1}E_{q,q}(−λ(b−s)^q) F(s) ds = Σ_i W_i F(t_i)
    für stückweise lineares F; exakt über die Momente mit E_{q,q+1} und E_{q,q+2}.
    """
    lam = model.lam[model.pi_index]
    key = (model.q, model.b, lam.tobytes(), grid.tobytes())
    with _moment_lock:
        cached = _moment_cache.get(key)
    if cached is not None:
        return cached

    q = model.q
    tau = np.maximum(model.b - grid, 0.0)
    tau_q = tau ** q
    arg = -np.outer(lam, tau_q)
    g0 = tau_q * ml_array(q, q + 1.0, arg)
    g1 = tau * tau_q * ml_array(q, q + 2.0, arg)
    steps = np.diff(grid)

    weights = np.zeros((lam.size, grid.size))
    area = g0[:, :-1] - g0[:, 1:]
    slope = (g1[:, :-1] - g1[:, 1:]) / steps - g0[:, 1:]
    weights[:, :-1] += area - slope
    weights[:, 1:] += slope
    weights.setflags(write=False)
    with _moment_lock:
        _moment_cache[key] = weights
    return weights


def eval_hn(model: SpectralModel, gspec: NonlocalSpec, fspec: NonlinearitySpec,
            z: Trajectory, smoothing_n=math.inf) -> np.ndarray:
    """h_n(z) = Π S_q(b)(y₀ − S(1/n) g(z)) + ∫_0^b (b−s)^{q−1} Π T_q(b−s) f(s, z(s)) ds − y_b."""
    if abs(z.b - model.b) > TIME_TOL:
        raise DomainError(f"Trajektorie endet bei {z.b}, Horizont ist {model.b}")
    g_value = eval_g(gspec, z)
    initial = model.y0 - apply_s_classical(model, smoothing_tau(smoothing_n), g_value)
    free = model.project(apply_sq(model, model.b, initial))
    forcing = forcing_samples(fspec, z)[model.pi_index]
    integral = np.sum(_moment_weights(model, z.grid) * forcing, axis=1)
    return free + integral - model.yb


def dual_target(model: SpectralModel, gspec: NonlocalSpec, fspec: NonlinearitySpec,
                z: Trajectory, smoothing_n=math.inf) -> np.ndarray:
    """h im Vorzeichen der Optimalitätsbedingung, so dass Πy(b) − y_b = Γφ̂ − h."""
    return -eval_hn(model, gspec, fspec, z, smoothing_n)


def eval_j(gram: Gramian, h, epsilon: float, phi) -> float:
    """J(φ) = ½ φᵀΓφ + ε‖φ‖ − ⟨φ, h⟩."""
    phi = np.asarray(phi, dtype=float)
    h = np.asarray(h, dtype=float)
    return float(0.5 * phi @ gram.mat @ phi + epsilon * np.linalg.norm(phi) - phi @ h)


def optimality_residual(gram: Gramian, h, epsilon: float, phi) -> float:
    phi = np.asarray(phi, dtype=float)
    rho = np.linalg.norm(phi)
    if rho == 0.0:
        return 0.0
    return float(np.linalg.norm(gram.mat @ phi + epsilon * phi / rho - h))


def minimize_j(gram: Gramian, h, epsilon: float) -> MinimizeReport:
    """Eindeutiger Minimierer von J über die Säkulargleichung ‖(Γ + (ε/ρ)I)^{−1} h‖ = ρ."""
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise DomainError(f"epsilon muss positiv sein, erhalten: {epsilon}")
    h = np.asarray(h, dtype=float)
    h_norm = float(np.linalg.norm(h))
    if h_norm <= epsilon:
        return MinimizeReport(np.zeros_like(h), 0.0, 0.0, True)

    eigs, vecs = linalg.eigh(gram.mat)
    eigs = np.clip(eigs, 0.0, None)
    coeffs = vecs.T @ h

    def secular(rho):
        return float(np.sum((coeffs / (eigs * rho + epsilon)) ** 2)) - 1.0

    upper = h_norm / max(float(eigs[-1]), epsilon)
    for _ in range(BRACKET_DOUBLINGS):
        if secular(upper) < 0.0:
            break
        upper *= 2.0
    else:
        raise RootBracketError(
            f"Säkulargleichung nicht einschließbar (‖h‖={h_norm:.3e}, eps={epsilon:.3e}): "
            "Γ ist entlang h numerisch singulär")

    rho = optimize.brentq(secular, 0.0, upper, xtol=1e-300, rtol=4.0 * np.finfo(float).eps,
                          maxiter=500)
    phi = vecs @ (coeffs * rho / (eigs * rho + epsilon))
    residual = optimality_residual(gram, h, epsilon, phi)
    if residual > OPT_TOL * h_norm:
        logger.warning(f"minimize residual={residual:.3e} h_norm={h_norm:.3e}")
    return MinimizeReport(phi, eval_j(gram, h, epsilon, phi), residual, False)


def phi_norm_bound(h_norm: float, epsilon: float, gram: Gramian) -> float:
    """‖φ̂‖ ≤ 2(‖h‖ − ε)₊ / σ_min(Γ); unendlich, falls Γ singulär ist."""
    excess = max(h_norm - epsilon, 0.0)
    if excess == 0.0:
        return 0.0
    sigma_min = float(linalg.eigvalsh(gram.mat)[0])
    if sigma_min <= 0.0:
        return math.inf
    return 2.0 * excess / sigma_min


def make_law(model: SpectralModel, phi_hat) -> ControlLaw:
    phi_hat = np.asarray(phi_hat, dtype=float)
    return ControlLaw(phi_hat, model, float(np.linalg.norm(phi_hat)))


def control_value(law: ControlLaw, s: float) -> np.ndarray:
    """u(s) = Bᵀ · diag(E_{q,q}(−λ_k (b−s)^q)) über pi_set · Π*φ̂."""
    model = law.model
    if not math.isfinite(s) or s < 0.0 or s > model.b + TIME_TOL:
        raise DomainError(f"s={s} liegt außerhalb von [0, {model.b}]")
    pi = model.pi_index
    kernel = ml_array(model.q, model.q, -model.lam[pi] * max(model.b - s, 0.0) ** model.q)
    return model.Bmat[pi, :].T @ (kernel * law.phi_hat)


def control_profile(law: ControlLaw, grid) -> np.ndarray:
    """u an allen Gitterknoten, Form M × len(grid)."""
    model = law.model
    grid = np.asarray(grid, dtype=float)
    if not np.any(law.phi_hat):
        return np.zeros((model.M, grid.size))
    pi = model.pi_index
    tau_q = np.maximum(model.b - grid, 0.0) ** model.q
    kernel = ml_array(model.q, model.q, -np.outer(model.lam[pi], tau_q))
    return model.Bmat[pi, :].T @ (kernel * law.phi_hat[:, None])
