"""Mittag-Leffler-Funktion E_{α,β}(x) für x ≤ 0 und die Wright-Dichte ω_q(θ).

In Eigenkoordinaten wirkt S_q(t) als E_{q,1}(−λt^q) und T_q(t) als
E_{q,q}(−λt^q); ``ml`` ist daher der Produktionspfad für beide Operatoren.
``wright_pdf`` dient nur der Kontrolle über die Laplace-Dualität.
"""
import math
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate, special

from fraccontrol.errors import DomainError

# Reihe, solange |x|^{1/α} unter dieser Schranke liegt (größter Term ~ exp(|x|^{1/α}))
SERIES_EXPONENT_LIMIT = 9.0
SERIES_MAX_TERMS = 2000
SERIES_TERM_TOL = 1e-18

ASYMPTOTIC_MAX_TERMS = 200
ASYMPTOTIC_REL_TOL = 1e-14

LAPLACE_REL_TOL = 1e-12
# e^{-r} ist jenseits davon unter 1e-21
LAPLACE_CUTOFF = 50.0
INTEGER_TOL = 1e-12

# Jenseits von exp(-40) liefert die Reihe für ω nichts Messbares mehr
WRIGHT_TAIL_EXPONENT = 40.0
WRIGHT_MAX_TERMS = 6000
WRIGHT_TERM_LOG_TOL = -46.0


def gamma_fn(x: float) -> float:
    """Γ(x) für x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma_fn erwartet x > 0, erhalten: {x}")
    return float(special.gamma(x))


def ml(alpha: float, beta: float, x: float) -> float:
    """Zwei-Parameter-Mittag-Leffler-Funktion E_{α,β}(x) für reelles x ≤ 0.

    Zweige: geschlossene Form für α = 1, kompensierte Potenzreihe für kleine
    |x|, asymptotische Entwicklung mit optimalem Abbruch für große |x| und
    sonst das reelle Laplace-Inversionsintegral.
    """
    alpha, beta, x = float(alpha), float(beta), float(x)
    _check_ml_args(alpha, beta, x)
    return _ml_cached(alpha, beta, x)


def ml_array(alpha: float, beta: float, xs) -> np.ndarray:
    """``ml`` elementweise über ein Array von Argumenten."""
    xs = np.asarray(xs, dtype=float)
    flat = np.fromiter((ml(alpha, beta, x) for x in xs.ravel()), dtype=float, count=xs.size)
    return flat.reshape(xs.shape)


def _check_ml_args(alpha, beta, x):
    if not (math.isfinite(alpha) and math.isfinite(beta) and math.isfinite(x)):
        raise DomainError(f"ml: nicht-endliches Argument (alpha={alpha}, beta={beta}, x={x})")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"ml: alpha muss in (0,1] liegen, erhalten: {alpha}")
    if beta <= 0.0:
        raise DomainError(f"ml: beta muss positiv sein, erhalten: {beta}")
    if x > 0.0:
        raise DomainError(f"ml: nur x <= 0 wird unterstützt, erhalten: {x}")


@lru_cache(maxsize=500_000)
def _ml_cached(alpha, beta, x):
    if x == 0.0:
        return float(special.rgamma(beta))
    if alpha == 1.0:
        return _ml_alpha_one(beta, x)
    if abs(x) ** (1.0 / alpha) <= SERIES_EXPONENT_LIMIT:
        return _ml_series(alpha, beta, x)
    value = _ml_asymptotic(alpha, beta, x)
    if value is not None:
        return value
    return _ml_laplace(alpha, beta, x)


def _ml_alpha_one(beta, x):
    if beta == 1.0:
        return math.exp(x)
    if beta == 2.0:
        return math.expm1(x) / x
    # E_{1,β}(x) = 1F1(1; β; x) / Γ(β)
    return float(mpmath.hyp1f1(1, beta, x)) * float(special.rgamma(beta))


def _ml_series(alpha, beta, x):
    terms = []
    power = 1.0
    peak = abs(x) ** (1.0 / alpha)
    for k in range(SERIES_MAX_TERMS):
        term = power * special.rgamma(alpha * k + beta)
        terms.append(term)
        if alpha * k > peak + 2.0 and abs(term) < SERIES_TERM_TOL:
            break
        power *= x
    return math.fsum(terms)


def _rgamma_envelope(v):
    """Obere Schranke für |1/Γ(v)|, glatt in v und ohne Nullstellen an den Polen.

    Für v < 1/2 über die Spiegelung 1/Γ(v) = Γ(1−v) sin(πv)/π mit |sin| ≤ 1.
    """
    if v >= 0.5:
        return abs(float(special.rgamma(v)))
    return float(special.gamma(1.0 - v)) / math.pi


def _is_pole(v):
    return v <= 0.0 and abs(v - round(v)) < INTEGER_TOL


def _ml_asymptotic(alpha, beta, x):
    """E_{α,β}(x) ~ −Σ_k x^{−k}/Γ(β−αk); None, wenn die Reihe nicht genau genug abbricht.

    Abgebrochen wird am Minimum der Termschranke, nicht am kleinsten Term selbst:
    nahe einem Pol von Γ ist ein einzelner Term beliebig klein.
    """
    inv = 1.0 / x
    power = 1.0
    terms = []
    smallest = math.inf
    for k in range(1, ASYMPTOTIC_MAX_TERMS + 1):
        power *= inv
        arg = beta - alpha * k
        envelope = abs(power) * _rgamma_envelope(arg)
        if envelope > smallest:
            break
        smallest = envelope
        if not _is_pole(arg):
            terms.append(-power * float(special.rgamma(arg)))
        if envelope == 0.0:
            break
    if not terms:
        return None
    total = math.fsum(terms)
    if total == 0.0 or smallest > ASYMPTOTIC_REL_TOL * abs(total):
        return None
    return total


def _sinpi(v):
    if abs(v - round(v)) < INTEGER_TOL:
        return 0.0
    return math.sin(math.pi * v)


def _ml_laplace(alpha, beta, x):
    """Reelles Inversionsintegral für 0 < α < 1, 0 < β ≤ 1.

    E_{α,β}(−s) = (1/π)∫₀^∞ e^{−r} r^{α−β} [r^α sin(βπ) + s sin((β−α)π)]
    / (r^{2α} + 2 s r^α cos(απ) + s²) dr
    """
    if beta > 1.0:
        # E_{α,β}(x) = (E_{α,β−α}(x) − 1/Γ(β−α)) / x
        shifted = beta - alpha
        return (_ml_cached(alpha, shifted, x) - float(special.rgamma(shifted))) / x

    s = -x
    sin_b = _sinpi(beta)
    sin_ba = _sinpi(beta - alpha)
    cos_a = math.cos(math.pi * alpha)

    def kernel(r):
        ra = r ** alpha
        return (math.exp(-r) * r ** (alpha - beta) * (ra * sin_b + s * sin_ba)
                / (ra * ra + 2.0 * s * ra * cos_a + s * s))

    # Der Nenner wird bei r^α = −s cos(απ) minimal
    breakpoints = [0.0]
    if cos_a < 0.0:
        breakpoints.append((-s * cos_a) ** (1.0 / alpha))
    breakpoints.append(breakpoints[-1] + LAPLACE_CUTOFF)

    total = 0.0
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        value, _ = integrate.quad(kernel, lo, hi, epsabs=0.0, epsrel=LAPLACE_REL_TOL, limit=500)
        total += value
    return total / math.pi


def wright_pdf(q: float, theta: float) -> float:
    """Wright-Dichte ω_q(θ) = (1/q) θ^{−1−1/q} ϖ_q(θ^{−1/q}) für q ∈ (1/2, 1)."""
    q, theta = float(q), float(theta)
    if not (math.isfinite(q) and 0.5 < q < 1.0):
        raise DomainError(f"wright_pdf: q muss in (1/2,1) liegen, erhalten: {q}")
    if not (math.isfinite(theta) and theta > 0.0):
        raise DomainError(f"wright_pdf: theta muss positiv sein, erhalten: {theta}")
    return _wright_cached(q, theta)


def wright_tail_exponent(q: float, theta: float) -> float:
    """Exponent Y = (1−q) q^{q/(1−q)} θ^{1/(1−q)} des Abfalls ω_q(θ) ~ e^{−Y}."""
    return (1.0 - q) * q ** (q / (1.0 - q)) * theta ** (1.0 / (1.0 - q))


@lru_cache(maxsize=200_000)
def _wright_cached(q, theta):
    tail = wright_tail_exponent(q, theta)
    if tail > WRIGHT_TAIL_EXPONENT:
        # führende Ordnung des Abfalls, weit unterhalb jeder Messgenauigkeit
        return math.exp(-tail) * tail ** (q - 0.5) / math.sqrt(2.0 * math.pi * (1.0 - q))

    n = np.arange(1, WRIGHT_MAX_TERMS + 1, dtype=float)
    log_terms = (n - 1.0) * math.log(theta) + special.gammaln(n * q) - special.gammaln(n)
    peak_index = int(np.argmax(log_terms))
    below = np.nonzero(log_terms[peak_index:] < WRIGHT_TERM_LOG_TOL)[0]
    if below.size == 0:
        raise DomainError(f"wright_pdf: Reihe bei theta={theta} nicht auswertbar")
    n_terms = peak_index + int(below[0]) + 1
    digits = 20 + int(max(0.0, float(log_terms[peak_index])) / math.log(10.0)) + 5

    # eigener Kontext: mpmath.mp ist global und nicht threadsicher
    ctx = mpmath.MPContext()
    ctx.dps = digits
    mq = ctx.mpf(q)
    u = ctx.power(ctx.mpf(theta), -1 / mq)
    varpi = ctx.fsum(
        (-1) ** (k - 1) * ctx.power(u, -mq * k - 1) * ctx.gamma(mq * k + 1)
        / ctx.factorial(k) * ctx.sinpi(mq * k)
        for k in range(1, n_terms + 1)
    ) / ctx.pi
    omega = varpi * ctx.power(ctx.mpf(theta), -1 - 1 / mq) / mq
    return max(0.0, float(omega))
