"""Unabhängige Referenzverfahren für Tests und Kontrollwerte.

Jedes Verfahren gehört zu einer anderen Familie als der Produktionspfad:
Adams-Prädiktor-Korrektor statt Produktintegration mit Mittag-Leffler-Momenten,
Panel-Verdopplung mit Richardson-Extrapolation statt globaler Gauß-Legendre-Regel,
Subgradientenabstieg statt Säkulargleichung, mpmath-Reihe statt Zweigwahl.
Nicht Teil der öffentlichen API.
"""
import math

import mpmath
import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, special

from fraccontrol.errors import DomainError, QuadratureError, SolverError
from fraccontrol.mittag import WRIGHT_TAIL_EXPONENT, wright_pdf
from fraccontrol.model import SpectralModel, Trajectory, uniform_grid

REFINE_MAX_DOUBLINGS = 12
REFINE_ABS_TOL = 1e-13
REFINE_REL_TOL = 1e-12

SUBGRAD_MAX_ITER = 1_000_000
SUBGRAD_TOL = 1e-12
POLISH_MAX_ITER = 100_000
J_ROUNDING = 64.0 * np.finfo(float).eps


def adams_pece(model: SpectralModel, rhs, y_init, grid_T: int) -> Trajectory:
    """Fraktionales Adams-Bashforth-Moulton-Verfahren für
    ᶜD^q y = −Λy + rhs(t, y), y(0) = y_init.
    """
    q = model.q
    grid = uniform_grid(model.b, grid_T)
    h = model.b / grid_T
    y_init = np.asarray(y_init, dtype=float)

    def field(t, y):
        value = -model.lam * y + np.asarray(rhs(t, y), dtype=float)
        if not np.all(np.isfinite(value)):
            raise SolverError(f"rhs liefert nicht-endliche Werte bei t={t:.6g}")
        return value

    m = np.arange(grid_T + 1, dtype=float)
    pred_w = (m + 1.0) ** q - m ** q
    corr_w = (m + 2.0) ** (q + 1.0) + m ** (q + 1.0) - 2.0 * (m + 1.0) ** (q + 1.0)
    pred_scale = h ** q / special.gamma(q + 1.0)
    corr_scale = h ** q / special.gamma(q + 2.0)

    Y = np.empty((model.N, grid_T + 1))
    F = np.empty_like(Y)
    Y[:, 0] = y_init
    F[:, 0] = field(0.0, y_init)
    for n in range(grid_T):
        # Prädiktor: Gewichte b_{n−j} = (n+1−j)^q − (n−j)^q
        history = F[:, :n + 1]
        predictor = y_init + pred_scale * history @ pred_w[n::-1]
        # Korrektor: a_0 = n^{q+1} − (n−q)(n+1)^q, a_j aus corr_w[n−j], a_{n+1} = 1
        a0 = n ** (q + 1.0) - (n - q) * (n + 1.0) ** q
        corrected = F[:, 0] * a0 + field(grid[n + 1], predictor)
        if n > 0:
            corrected = corrected + F[:, 1:n + 1] @ corr_w[n - 1::-1]
        Y[:, n + 1] = y_init + corr_scale * corrected
        F[:, n + 1] = field(grid[n + 1], Y[:, n + 1])
    return Trajectory(grid, Y)


def _panel_rule(func, upper, panels):
    x, w = legendre.leggauss(4)
    edges = np.linspace(0.0, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return float(np.dot(weights, [func(s) for s in nodes]))


def refine_quadrature(integrand, a: float, b: float, singular_exponent: float):
    """∫_a^b (b−s)^{q−1} φ(s) ds mit a = 0 für stetiges φ.

    Nach σ = (b−s)^q bleibt (1/q)∫_0^{b^q} φ(b − σ^{1/q}) dσ; zusammengesetzte
    4-Punkt-Gauß-Regel mit Panel-Verdopplung und Richardson-Extrapolation.
    Rückgabe (Wert, Fehlerschätzung).
    """
    if a != 0.0:
        raise DomainError("refine_quadrature integriert nur über [0, b]")
    q = float(singular_exponent)
    if not 0.0 < q <= 1.0 or b <= 0.0:
        raise DomainError(f"Ungültige Parameter q={q}, b={b}")

    def transformed(sigma):
        return integrand(b - sigma ** (1.0 / q)) / q

    upper = b ** q
    values = [_panel_rule(transformed, upper, 1)]
    estimates = []
    for doubling in range(1, REFINE_MAX_DOUBLINGS + 1):
        values.append(_panel_rule(transformed, upper, 2 ** doubling))
        diff = values[-1] - values[-2]
        estimate = values[-1]
        if len(values) >= 3 and diff != 0.0:
            ratio = abs(values[-2] - values[-3]) / abs(diff)
            if ratio > 1.0:
                order = min(max(math.log2(ratio), 1.0), 8.0)
                estimate = values[-1] + diff / (2.0 ** order - 1.0)
        # Abbruch über die extrapolierten Werte: φ(b − σ^{1/q}) ist bei σ = 0
        # nur endlich oft differenzierbar
        error = abs(estimate - estimates[-1]) if estimates else abs(diff)
        estimates.append(estimate)
        if error <= max(REFINE_ABS_TOL, REFINE_REL_TOL * abs(estimate)):
            return estimate, error
    raise QuadratureError(f"Keine Konvergenz nach {REFINE_MAX_DOUBLINGS} Verdopplungen (Fehler {error:.3e})")


def subgrad_minimize(gram, h, epsilon: float) -> np.ndarray:
    """Abstieg entlang des Subgradienten kleinster Norm von
    J(φ) = ½ φᵀΓφ + ε‖φ‖ − ⟨φ, h⟩ mit Armijo-Rückverfolgung.
    """
    mat = np.asarray(getattr(gram, "mat", gram), dtype=float)
    h = np.asarray(h, dtype=float)
    if np.linalg.norm(h) <= epsilon:
        return np.zeros_like(h)

    def j_value(phi):
        return 0.5 * phi @ mat @ phi + epsilon * np.linalg.norm(phi) - phi @ h

    def min_norm_subgradient(phi):
        rho = np.linalg.norm(phi)
        smooth = mat @ phi - h
        if rho > 0.0:
            return smooth + epsilon * phi / rho
        # ∂‖·‖(0) ist die Einheitskugel
        norm = np.linalg.norm(smooth)
        return smooth * max(0.0, 1.0 - epsilon / norm) if norm > 0.0 else smooth

    phi = np.zeros_like(h)
    lam_max = max(float(np.linalg.eigvalsh(mat)[-1]), 1e-12)
    tol = SUBGRAD_TOL * max(1.0, float(np.linalg.norm(h)))
    value = j_value(phi)
    for _ in range(SUBGRAD_MAX_ITER):
        grad = min_norm_subgradient(phi)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= tol:
            return phi
        if 0.5 * grad_norm ** 2 / lam_max <= J_ROUNDING * max(1.0, abs(value)):
            # erreichbare Abnahme von J liegt unter der Rundung von J
            return _polish(mat, h, epsilon, phi, lam_max, tol)
        trial_step = 1.0 / lam_max
        while trial_step >= 1e-20:
            candidate = phi - trial_step * grad
            candidate_value = j_value(candidate)
            if candidate_value < value and candidate_value <= value - 0.5 * trial_step * grad_norm ** 2:
                break
            trial_step *= 0.5
        else:
            return _polish(mat, h, epsilon, phi, lam_max, tol)
        phi, value = candidate, candidate_value
    raise SolverError(f"subgrad_minimize: Iterationsgrenze {SUBGRAD_MAX_ITER} erreicht")


def _polish(mat, h, epsilon, phi, lam_max, tol):
    """Gradientenschritte fester Länge 1/(λ_max + ε/‖φ‖) ohne J-Vergleich."""
    best, best_norm = phi, math.inf
    for _ in range(POLISH_MAX_ITER):
        rho = float(np.linalg.norm(phi))
        if rho == 0.0:
            smooth = mat @ phi - h
            norm = float(np.linalg.norm(smooth))
            if norm <= epsilon:
                return phi
            phi = -smooth * (1.0 - epsilon / norm) / lam_max
            continue
        grad = mat @ phi - h + epsilon * phi / rho
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < best_norm:
            best, best_norm = phi, grad_norm
        if grad_norm <= tol:
            break
        phi = phi - grad / (lam_max + epsilon / rho)
    return best


def series_ml(alpha: float, beta: float, x: float, digits: int = 60) -> float:
    """E_{α,β}(x) als Potenzreihe in erhöhter Genauigkeit."""
    ctx = mpmath.MPContext()
    ctx.dps = digits + int(abs(x) ** (1.0 / alpha) / math.log(10.0)) + 10
    a, bb, xx = ctx.mpf(alpha), ctx.mpf(beta), ctx.mpf(x)
    total = ctx.mpf(0)
    tol = ctx.mpf(10) ** (-digits - 5)
    k = 0
    while True:
        term = xx ** k / ctx.gamma(a * k + bb)
        total += term
        if k * alpha > abs(x) ** (1.0 / alpha) + 2.0 and abs(term) < tol:
            return float(total)
        k += 1


def wright_expectation(q: float, weight) -> float:
    """∫_0^∞ weight(θ) ω_q(θ) dθ; jenseits des Abfallpunkts ist ω vernachlässigbar."""
    decay = (1.0 - q) * q ** (q / (1.0 - q))
    upper = (WRIGHT_TAIL_EXPONENT / decay) ** (1.0 - q)
    value, _ = integrate.quad(lambda theta: weight(theta) * wright_pdf(q, theta), 0.0, upper,
                              epsabs=1e-12, epsrel=1e-10, limit=200)
    return value
