"""Milde Lösung als schwach singuläre Volterra-Gleichung, Fixpunktabbildung Θ_{ε,n},
Picard-Iteration mit Dämpfung und der approximierende Sweep in n.
"""
import math
import threading
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from fraccontrol.errors import ConvergenceError, DomainError, SolverError
from fraccontrol.logging_config import get_logger
from fraccontrol.mittag import gamma_fn, ml_array
from fraccontrol.model import (
    NonlinearitySpec,
    NonlocalSpec,
    SpectralModel,
    Trajectory,
    apply_s_classical,
    constant_trajectory,
    eval_g,
    operator_norms,
    smoothing_tau,
    uniform_grid,
)
from fraccontrol.varmin import (
    ControlLaw,
    Gramian,
    MinimizeReport,
    dual_target,
    make_law,
    minimize_j,
    phi_norm_bound,
)

logger = get_logger("solver")

MIN_GRID_T = 8
OSCILLATION_STREAK = 5
MIN_RELAXATION = 0.125
SELF_NONLOCAL_TOL = 1e-12
SELF_NONLOCAL_MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class VolterraWeights:
    """Kernmomente auf dem gleichmäßigen Gitter.

    ``W[k, m] = (mh)^q E_{q,q+1}(−λ_k (mh)^q) − ((m−1)h)^q E_{q,q+1}(−λ_k ((m−1)h)^q)``
    für m ≥ 1 (``W[:, 0] = 0``), ``E1[k, i] = E_{q,1}(−λ_k t_i^q)``.
    """

    grid: np.ndarray
    W: np.ndarray
    E1: np.ndarray

    @property
    def grid_T(self) -> int:
        return self.grid.size - 1


_weights_cache = {}
_weights_lock = threading.Lock()


def volterra_weights(model: SpectralModel, grid_T: int) -> VolterraWeights:
    key = (model.q, model.b, model.lam.tobytes(), int(grid_T))
    with _weights_lock:
        cached = _weights_cache.get(key)
    if cached is not None:
        return cached

    grid = uniform_grid(model.b, grid_T)
    t_q = grid ** model.q
    arg = -np.outer(model.lam, t_q)
    moments = t_q * ml_array(model.q, model.q + 1.0, arg)
    W = np.zeros_like(moments)
    W[:, 1:] = moments[:, 1:] - moments[:, :-1]
    E1 = ml_array(model.q, 1.0, arg)
    for arr in (grid, W, E1):
        arr.setflags(write=False)
    weights = VolterraWeights(grid, W, E1)
    with _weights_lock:
        _weights_cache[key] = weights
    logger.debug(f"volterra weights built N={model.N} T={grid_T}")
    return weights


@dataclass(frozen=True)
class FixedPointConfig:
    epsilon: float
    smoothing_n: float = math.inf
    grid_T: int = 256
    max_picard: int = 50
    picard_tol: float = 1e-10
    relaxation: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise DomainError(f"epsilon muss positiv sein, erhalten: {self.epsilon}")
        check_smoothing_n(self.smoothing_n)
        if int(self.grid_T) != self.grid_T or self.grid_T < MIN_GRID_T:
            raise DomainError(f"grid_T muss eine ganze Zahl >= {MIN_GRID_T} sein, erhalten: {self.grid_T}")
        if int(self.max_picard) != self.max_picard or self.max_picard < 1:
            raise DomainError(f"max_picard muss >= 1 sein, erhalten: {self.max_picard}")
        if not self.picard_tol > 0.0:
            raise DomainError(f"picard_tol muss positiv sein, erhalten: {self.picard_tol}")
        if not 0.0 < self.relaxation <= 1.0:
            raise DomainError(f"relaxation muss in (0,1] liegen, erhalten: {self.relaxation}")


def check_smoothing_n(smoothing_n) -> None:
    if isinstance(smoothing_n, float) and math.isinf(smoothing_n) and smoothing_n > 0:
        return
    if int(smoothing_n) != smoothing_n or smoothing_n < 1:
        raise DomainError(f"smoothing_n muss eine positive ganze Zahl oder unendlich sein, erhalten: {smoothing_n}")


@dataclass
class SynthesisReport:
    trajectory: Trajectory
    law: ControlLaw
    final_error: float
    picard_trace: List[float]
    converged: bool
    n_trace: Optional[List[Tuple[float, float]]] = None
    epsilon: float = 0.0
    smoothing_n: float = math.inf
    grid_T: int = 0
    iterations: int = 0
    relaxation_final: float = 1.0
    h_norm: float = 0.0
    zero_case: bool = False
    optimality_residual: float = 0.0
    certificate_gap: float = 0.0
    discretization_slack: float = 0.0
    iterate_sup_norms: List[float] = field(default_factory=list)
    r_bound: float = math.inf
    limit_gaps: Optional[List[Tuple[float, float]]] = None
    members: List["SynthesisReport"] = field(default_factory=list, repr=False)

    @property
    def within_bound(self) -> bool:
        return self.final_error <= self.epsilon + self.discretization_slack + 1e-12


def _control_samples(u, model: SpectralModel, grid: np.ndarray) -> np.ndarray:
    if u is None:
        return np.zeros((model.M, grid.size))
    if hasattr(u, "profile"):
        return u.profile(grid)
    return np.column_stack([np.asarray(u(float(t)), dtype=float) for t in grid])


def _march(model, fspec, weights, y_init, bu):
    """Produktintegration mit einem Prädiktor-Korrektor-Schritt je Zeitschritt."""
    grid, W, E1 = weights.grid, weights.W, weights.E1
    n_modes, n_nodes = model.N, grid.size
    if fspec is None or fspec.is_zero:
        def f(t, y):
            return 0.0
    else:
        f = fspec.eval

    Y = np.empty((n_modes, n_nodes))
    F = np.empty((n_modes, n_nodes))
    Fbar = np.empty((n_modes, n_nodes - 1))
    w1 = W[:, 1]
    Y[:, 0] = y_init
    F[:, 0] = bu[:, 0] + f(0.0, y_init)
    for i in range(1, n_nodes):
        t = float(grid[i])
        base = E1[:, i] * y_init
        if i > 1:
            base = base + np.einsum("kj,kj->k", W[:, i:1:-1], Fbar[:, :i - 1])
        predicted = base + w1 * F[:, i - 1]
        Fbar[:, i - 1] = 0.5 * (F[:, i - 1] + bu[:, i] + f(t, predicted))
        Y[:, i] = base + w1 * Fbar[:, i - 1]
        F[:, i] = bu[:, i] + f(t, Y[:, i])
        if not (np.all(np.isfinite(F[:, i])) and np.all(np.isfinite(Y[:, i]))):
            raise SolverError(f"Nicht-endliche Werte im Zeitschritt {i} (t={t:.6g})")
    return Y


def solve_mild(model: SpectralModel, gspec: NonlocalSpec, fspec: NonlinearitySpec, u,
               z_for_g, grid_T: int, smoothing_n=math.inf) -> Trajectory:
    """Milde Lösung auf dem gleichmäßigen Gitter.

    ``z_for_g`` ist eine Trajektorie (g dort eingefroren) oder ``"self"``; dann
    wird g durch sukzessive Substitution an der berechneten Lösung selbst
    ausgewertet.
    """
    if isinstance(z_for_g, str):
        if z_for_g != "self":
            raise DomainError(f"z_for_g muss eine Trajektorie oder 'self' sein, erhalten: {z_for_g!r}")
        return _solve_self_consistent(model, gspec, fspec, u, grid_T, smoothing_n)

    weights = volterra_weights(model, grid_T)
    g_value = eval_g(gspec, z_for_g) if gspec is not None else np.zeros(model.N)
    y_init = model.y0 - apply_s_classical(model, smoothing_tau(smoothing_n), g_value)
    bu = model.Bmat @ _control_samples(u, model, weights.grid)
    values = _march(model, fspec, weights, y_init, bu)
    return Trajectory(weights.grid.copy(), values)


def _solve_self_consistent(model, gspec, fspec, u, grid_T, smoothing_n):
    grid = uniform_grid(model.b, grid_T)
    z = constant_trajectory(model.y0, grid)
    g_prev = eval_g(gspec, z)
    for iteration in range(1, SELF_NONLOCAL_MAX_ITER + 1):
        y = solve_mild(model, gspec, fspec, u, z, grid_T, smoothing_n)
        g_new = eval_g(gspec, y)
        change = float(np.linalg.norm(g_new - g_prev))
        if change <= SELF_NONLOCAL_TOL * max(1.0, float(np.linalg.norm(g_new))):
            logger.debug(f"self nonlocal converged iter={iteration} change={change:.3e}")
            return y
        z, g_prev = y, g_new
    raise SolverError(f"Nichtlokale Bedingung nach {SELF_NONLOCAL_MAX_ITER} Substitutionen nicht erfüllt")


def initial_guess(model: SpectralModel, gspec: NonlocalSpec, cfg: FixedPointConfig) -> Trajectory:
    """Homogene Lösung mit g am konstanten y₀-Verlauf."""
    weights = volterra_weights(model, cfg.grid_T)
    g_value = eval_g(gspec, constant_trajectory(model.y0, weights.grid))
    y_init = model.y0 - apply_s_classical(model, smoothing_tau(cfg.smoothing_n), g_value)
    return Trajectory(weights.grid.copy(), weights.E1 * y_init[:, None])


def _theta_step(model, gspec, fspec, cfg, gram, z) -> Tuple[Trajectory, ControlLaw, np.ndarray, MinimizeReport]:
    if z.grid.size != cfg.grid_T + 1:
        raise DomainError(f"Trajektorie hat {z.grid.size - 1} Schritte, erwartet {cfg.grid_T}")
    h = dual_target(model, gspec, fspec, z, cfg.smoothing_n)
    result = minimize_j(gram, h, cfg.epsilon)
    law = make_law(model, result.phi_hat)
    y = solve_mild(model, gspec, fspec, law, z, cfg.grid_T, smoothing_n=cfg.smoothing_n)
    return y, law, h, result


def theta_map(model: SpectralModel, gspec: NonlocalSpec, fspec: NonlinearitySpec,
              cfg: FixedPointConfig, gram: Gramian, z: Trajectory) -> Tuple[Trajectory, ControlLaw]:
    """Θ_{ε,n}(z) und das zugehörige Steuergesetz."""
    y, law, _, _ = _theta_step(model, gspec, fspec, cfg, gram, z)
    return y, law


def iterate_bound(model: SpectralModel, gspec: NonlocalSpec, fspec: NonlinearitySpec,
                  gram: Gramian, epsilon: float, state_bound: float, grid) -> float:
    """Radius r(ε) der Kugel, die Θ_{ε,n} in sich abbildet; ‖ν‖_C als Maximum auf ``grid``.

    r = ‖y₀‖ + Λ_g + b^q/Γ(q+1) (‖ν‖_C + M_B² R_ε / Γ(q)), mit R_ε aus der
    Schranke für ‖φ̂‖ bei gleichmäßig beschränktem ‖h‖.
    """
    _, m_b = operator_norms(model)
    nu_c = 0.0 if fspec is None else max(float(fspec.bound_fn(float(t))) for t in grid)
    lambda_g = 0.0 if gspec is None else gspec.lambda_g(state_bound, model.b, model.N)
    y0_norm = float(np.linalg.norm(model.y0))
    forcing_scale = model.b ** model.q / gamma_fn(model.q + 1.0)
    h_bound = float(np.linalg.norm(model.yb)) + y0_norm + lambda_g + forcing_scale * nu_c
    r_eps = phi_norm_bound(h_bound, epsilon, gram)
    if math.isinf(r_eps):
        return math.inf
    return y0_norm + lambda_g + forcing_scale * (nu_c + m_b ** 2 * r_eps / gamma_fn(model.q))


def picard_solve(model: SpectralModel, gspec: NonlocalSpec, fspec: NonlinearitySpec,
                 cfg: FixedPointConfig, gram: Gramian) -> SynthesisReport:
    z = initial_guess(model, gspec, cfg)
    trace: List[float] = []
    norms = [z.sup_norm()]
    relaxation = cfg.relaxation
    streak = 0
    converged = False

    for iteration in range(1, cfg.max_picard + 1):
        y, law, h_z, result = _theta_step(model, gspec, fspec, cfg, gram, z)
        delta = y.sup_distance(z)
        trace.append(delta)
        norms.append(y.sup_norm())
        logger.info(f"picard eps={cfg.epsilon:.1e} n={cfg.smoothing_n} iter={iteration} "
                    f"delta={delta:.3e} relaxation={relaxation}")
        if delta <= cfg.picard_tol:
            converged = True
            break
        if len(trace) > 1 and delta >= trace[-2]:
            streak += 1
        else:
            streak = 0
        if streak >= OSCILLATION_STREAK and relaxation > MIN_RELAXATION:
            relaxation = max(relaxation / 2.0, MIN_RELAXATION)
            streak = 0
            logger.info(f"picard relaxation halved to {relaxation}")
        z = Trajectory(z.grid, (1.0 - relaxation) * z.values + relaxation * y.values)

    if not converged:
        logger.warning(f"picard not converged eps={cfg.epsilon:.1e} n={cfg.smoothing_n} "
                       f"last_delta={trace[-1]:.3e}")

    final_gap = model.project(y.final) - model.yb
    h_y = dual_target(model, gspec, fspec, y, cfg.smoothing_n)
    predicted_gap = gram.mat @ law.phi_hat - h_y
    defect = float(np.linalg.norm(final_gap - predicted_gap))
    drift = float(np.linalg.norm(h_y - h_z))
    r_bound = iterate_bound(model, gspec, fspec, gram, cfg.epsilon, max(norms), y.grid)

    return SynthesisReport(
        trajectory=y,
        law=law,
        final_error=float(np.linalg.norm(final_gap)),
        picard_trace=trace,
        converged=converged,
        epsilon=cfg.epsilon,
        smoothing_n=cfg.smoothing_n,
        grid_T=cfg.grid_T,
        iterations=len(trace),
        relaxation_final=relaxation,
        h_norm=float(np.linalg.norm(h_z)),
        zero_case=result.zero_case,
        optimality_residual=result.residual,
        certificate_gap=float(np.linalg.norm(predicted_gap)),
        discretization_slack=defect + drift + result.residual,
        iterate_sup_norms=norms,
        r_bound=r_bound,
    )


def approximating_sweep(model: SpectralModel, gspec: NonlocalSpec, fspec: NonlinearitySpec,
                        cfg: FixedPointConfig, gram: Gramian, n_list) -> SynthesisReport:
    """Picard-Läufe für wachsende n; liefert den Bericht des größten n mit
    ``n_trace`` (Abstand aufeinanderfolgender Lösungen) und ``limit_gaps``
    (Abstand jeder Lösung zur letzten).
    """
    members = list(n_list)
    if not members:
        raise DomainError("n_list darf nicht leer sein")
    for n in members:
        check_smoothing_n(n)
    if any(a >= c for a, c in zip(members, members[1:])):
        raise DomainError(f"n_list muss streng wachsen, erhalten: {members}")

    reports = []
    for n in members:
        report = picard_solve(model, gspec, fspec, replace(cfg, smoothing_n=n), gram)
        if not report.converged:
            raise ConvergenceError(f"Sweep-Lauf n={n} hat nicht konvergiert", report, reports)
        reports.append(report)

    n_trace = [(n, reports[i].trajectory.sup_distance(reports[i - 1].trajectory))
               for i, n in enumerate(members) if i > 0]
    final = reports[-1]
    limit_gaps = [(n, r.trajectory.sup_distance(final.trajectory)) for n, r in zip(members, reports)]
    for n, gap in n_trace:
        logger.info(f"sweep n={n} successive_gap={gap:.3e}")
    return replace(final, n_trace=n_trace, limit_gaps=limit_gaps, members=reports)
