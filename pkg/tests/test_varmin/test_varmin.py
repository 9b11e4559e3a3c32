import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fraccontrol.errors import DomainError, RootBracketError, SolverError
from fraccontrol.mittag import ml
from fraccontrol.model import (
    NonlinearitySpec,
    NonlocalPoint,
    NonlocalSpec,
    SpectralModel,
    constant_trajectory,
    heat1d_model,
    uniform_grid,
)
from fraccontrol.oracle import refine_quadrature, subgrad_minimize
from fraccontrol.scenario import constant_nonlinearity
from fraccontrol.varmin import (
    Gramian,
    assemble_gramian,
    check_linear_pac,
    control_profile,
    control_value,
    dual_target,
    eval_hn,
    eval_j,
    forcing_samples,
    make_law,
    minimize_j,
    optimality_residual,
    phi_norm_bound,
)


def scalar_model(q, lam=0.0, b=1.0, y0=0.0, yb=0.0, B=1.0):
    return SpectralModel(q=q, b=b, lam=[lam], Bmat=[[B]], pi_set=(1,), y0=[y0], yb=[yb])


def random_gramian(rng, size, low=1.0, high=3.0):
    basis, _ = np.linalg.qr(rng.normal(size=(size, size)))
    mat = basis @ np.diag(rng.uniform(low, high, size)) @ basis.T
    return Gramian(0.5 * (mat + mat.T), 0)


def test_gramian_scalar_closed_forms():
    assert assemble_gramian(scalar_model(1.0, b=1.0)).mat[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert assemble_gramian(scalar_model(1.0, b=2.5)).mat[0, 0] == pytest.approx(2.5, abs=1e-12)
    q = 2.0 / 3.0
    expected = 1.5 / math.gamma(q) ** 2
    assert assemble_gramian(scalar_model(q)).mat[0, 0] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n_modes,pi_set", [(4, (1, 2)), (6, (1, 2, 3))])
def test_gramian_matches_refinement_oracle(n_modes, pi_set):
    q = 2.0 / 3.0
    model = heat1d_model(n_modes, q, 1.0, pi_set)
    gram = assemble_gramian(model)
    assert np.max(np.abs(gram.mat - gram.mat.T)) <= 1e-12

    bbt = model.Bmat @ model.Bmat.T
    for a, j in enumerate(model.pi_index):
        for c, k in enumerate(model.pi_index):
            lam_j, lam_k = model.lam[j], model.lam[k]

            def integrand(s, lam_j=lam_j, lam_k=lam_k, weight=bbt[j, k]):
                tau_q = (model.b - s) ** q
                return ml(q, q, -lam_j * tau_q) * ml(q, q, -lam_k * tau_q) * weight

            value, error = refine_quadrature(integrand, 0.0, model.b, q)
            assert abs(gram.mat[a, c] - value) <= 1e-8


def test_check_linear_pac():
    zero = SpectralModel(q=0.75, b=1.0, lam=[1.0, 4.0], Bmat=[[0.0], [0.0]], pi_set=(1, 2),
                         y0=[0.0, 0.0], yb=[0.0, 0.0])
    min_eig, controllable = check_linear_pac(assemble_gramian(zero))
    assert min_eig == 0.0
    assert controllable is False

    min_eig, controllable = check_linear_pac(assemble_gramian(scalar_model(1.0)))
    assert min_eig == pytest.approx(1.0, abs=1e-12)
    assert controllable is True


@pytest.mark.parametrize("n_modes", [4, 6, 8])
def test_example1_truncations_are_controllable(n_modes):
    gram = assemble_gramian(heat1d_model(n_modes, 2.0 / 3.0, 1.0, (1, 2, 3)))
    min_eig, controllable = check_linear_pac(gram)
    assert min_eig > 0.0
    assert controllable is True
    assert min_eig == pytest.approx(float(np.linalg.eigvalsh(gram.mat)[0]), rel=1e-12)


def test_eval_hn_only_target_survives():
    model = heat1d_model(4, 0.75, 1.0, (1, 3), yb=[0.3, -0.7])
    z = constant_trajectory(np.zeros(4), uniform_grid(1.0, 32))
    h = eval_hn(model, None, constant_nonlinearity(np.zeros(4)), z)
    assert np.allclose(h, [-0.3, 0.7], rtol=0.0, atol=1e-15)
    assert np.allclose(dual_target(model, None, None, z), [0.3, -0.7], rtol=0.0, atol=1e-15)


def test_eval_hn_classical_semigroup():
    model = scalar_model(1.0, lam=1.0, y0=1.0)
    z = constant_trajectory([0.0], uniform_grid(1.0, 16))
    assert eval_hn(model, None, None, z)[0] == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_eval_hn_constant_forcing_is_exact():
    q = 0.7
    model = scalar_model(q, lam=0.0, b=2.0)
    z = constant_trajectory([0.0], uniform_grid(2.0, 16))
    h = eval_hn(model, None, constant_nonlinearity([0.5]), z)
    assert h[0] == pytest.approx(0.5 * 2.0 ** q / math.gamma(q + 1.0), rel=1e-12)


def test_eval_hn_forcing_matches_oracle():
    q = 2.0 / 3.0
    model = heat1d_model(3, q, 1.0, (1, 2))
    fspec = NonlinearitySpec("cos", lambda t, y: np.cos(3.0 * t) * np.ones(3), lambda t: math.sqrt(3.0))
    z = constant_trajectory(np.zeros(3), uniform_grid(1.0, 512))
    h = eval_hn(model, None, fspec, z)
    for a, k in enumerate(model.pi_index):
        lam = model.lam[k]
        value, _ = refine_quadrature(
            lambda s: ml(q, q, -lam * (1.0 - s) ** q) * math.cos(3.0 * s), 0.0, 1.0, q)
        assert abs(h[a] - value) <= 5e-5


def test_eval_hn_smoothing_of_nonlocal_term():
    """n = ∞ lässt g ungeglättet, endliches n dämpft mit e^{−λ/n}"""
    model = scalar_model(1.0, lam=2.0, y0=0.0)
    gspec = NonlocalSpec(0.5, (NonlocalPoint(0.75, 1.0),))
    z = constant_trajectory([1.0], uniform_grid(1.0, 16))
    raw = eval_hn(model, gspec, None, z)[0]
    smoothed = eval_hn(model, gspec, None, z, smoothing_n=4)[0]
    assert raw == pytest.approx(-math.exp(-2.0), rel=1e-14)
    assert smoothed == pytest.approx(-math.exp(-2.0) * math.exp(-0.5), rel=1e-14)


def test_eval_hn_rejects_wrong_horizon():
    model = scalar_model(1.0)
    z = constant_trajectory([0.0], uniform_grid(2.0, 8))
    with pytest.raises(DomainError):
        eval_hn(model, None, None, z)


def test_forcing_samples_rejects_non_finite():
    fspec = NonlinearitySpec("bad", lambda t, y: np.full(2, np.nan), lambda t: 1.0)
    z = constant_trajectory(np.zeros(2), uniform_grid(1.0, 8))
    with pytest.raises(SolverError):
        forcing_samples(fspec, z)


def test_minimize_zero_target():
    gram = Gramian(np.eye(2), 0)
    report = minimize_j(gram, [0.0, 0.0], 0.3)
    assert report.zero_case is True
    assert report.phi_hat.tolist() == [0.0, 0.0]
    assert report.j_value == 0.0


def test_minimize_scalar_closed_form():
    report = minimize_j(Gramian(np.array([[1.0]]), 0), [1.0], 0.1)
    assert report.phi_hat[0] == pytest.approx(0.9, abs=1e-12)
    assert report.j_value == pytest.approx(-0.405, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(gamma=st.floats(min_value=0.05, max_value=20.0),
       h=st.floats(min_value=-10.0, max_value=10.0),
       epsilon=st.floats(min_value=1e-4, max_value=1.0))
def test_minimize_scalar_closed_form_property(gamma, h, epsilon):
    """P = 1: φ̂ = sign(h)(|h| − ε)₊ / Γ"""
    report = minimize_j(Gramian(np.array([[gamma]]), 0), [h], epsilon)
    expected = math.copysign(max(abs(h) - epsilon, 0.0) / gamma, h)
    assert report.phi_hat[0] == pytest.approx(expected, abs=1e-12 * max(1.0, abs(expected)))
    assert report.zero_case is (abs(h) <= epsilon)


def test_minimize_diagonal_matches_oracle():
    gram = Gramian(np.diag([1.0, 2.0]), 0)
    report = minimize_j(gram, [1.0, 1.0], 0.1)
    oracle = subgrad_minimize(gram, [1.0, 1.0], 0.1)
    assert np.allclose(report.phi_hat, oracle, rtol=0.0, atol=1e-7)


@settings(max_examples=100, deadline=None)
@given(size=st.integers(min_value=1, max_value=8), seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
       epsilon=st.floats(min_value=1e-3, max_value=0.5))
def test_minimize_matches_subgradient_oracle(size, seed, epsilon):
    rng = np.random.default_rng(seed)
    gram = random_gramian(rng, size)
    h = rng.normal(size=size)
    report = minimize_j(gram, h, epsilon)
    oracle = subgrad_minimize(gram, h, epsilon)
    assert np.allclose(report.phi_hat, oracle, rtol=0.0, atol=1e-7)

    h_norm = float(np.linalg.norm(h))
    assert report.zero_case is (h_norm <= epsilon)
    if not report.zero_case:
        assert epsilon <= h_norm
        assert report.residual <= 1e-9 * h_norm
        assert optimality_residual(gram, h, epsilon, report.phi_hat) <= 1e-9 * h_norm
        assert report.rho <= phi_norm_bound(h_norm, epsilon, gram) + 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
       direction=arrays(np.float64, 4, elements=st.floats(min_value=-1.0, max_value=1.0)))
def test_functional_is_coercive(seed, direction):
    rng = np.random.default_rng(seed)
    gram = random_gramian(rng, 4, low=0.1, high=2.0)
    h = rng.normal(size=4)
    epsilon = 0.05
    norm = np.linalg.norm(direction)
    if norm < 1e-3:
        return
    psi = direction / norm
    curvature = float(psi @ gram.mat @ psi)
    radius = max(2.0 * abs(float(psi @ h)) / curvature, 1.0)
    assert eval_j(gram, h, epsilon, radius * psi) / radius >= epsilon - 1e-12


def test_minimizer_depends_continuously_on_target(rng):
    gram = random_gramian(rng, 5, low=0.5, high=2.0)
    lam_min = float(np.linalg.eigvalsh(gram.mat)[0])
    h = rng.normal(size=5)
    base = minimize_j(gram, h, 0.1).phi_hat
    for eta in (1e-1, 1e-3, 1e-6):
        shift = rng.normal(size=5)
        shift *= eta / np.linalg.norm(shift)
        moved = minimize_j(gram, h + shift, 0.1).phi_hat
        assert np.linalg.norm(moved - base) <= eta / lam_min * (1.0 + 1e-6) + 1e-12


def test_minimize_errors():
    gram = Gramian(np.eye(2), 0)
    with pytest.raises(DomainError):
        minimize_j(gram, [1.0, 0.0], 0.0)
    singular = Gramian(np.diag([1.0, 0.0]), 0)
    with pytest.raises(RootBracketError):
        minimize_j(singular, [0.0, 1.0], 0.5)


def test_control_law():
    q = 2.0 / 3.0
    model = heat1d_model(4, q, 1.0, (1, 2))
    assert np.array_equal(control_value(make_law(model, [0.0, 0.0]), 0.3), np.zeros(3))

    phi = np.array([0.7, -1.3])
    law = make_law(model, phi)
    assert law.rho == pytest.approx(np.linalg.norm(phi))
    grid = np.array([0.0, 0.4, 1.0])
    profile = control_profile(law, grid)
    assert profile.shape == (3, 3)
    for i, s in enumerate(grid):
        kernel = np.zeros(4)
        for k in (0, 1):
            kernel[k] = ml(q, q, -model.lam[k] * (1.0 - s) ** q) * phi[k]
        expected = model.Bmat.T @ kernel
        assert np.allclose(law(s), expected, rtol=1e-13, atol=1e-15)
        assert np.allclose(profile[:, i], expected, rtol=1e-13, atol=1e-15)
    with pytest.raises(DomainError):
        control_value(law, 1.5)


def test_certificate_identity_without_feedback():
    """Πy(b) − y_b = Γφ̂ − h für f ≡ 0, g ≡ 0, bis auf die Quadratur"""
    model = heat1d_model(4, 0.8, 1.0, (1, 2), y0=[1.0, 0.5, 0.0, 0.0], yb=[0.1, 0.2])
    gram = assemble_gramian(model)
    z = constant_trajectory(np.zeros(4), uniform_grid(1.0, 64))
    h = dual_target(model, None, None, z)
    report = minimize_j(gram, h, 0.01)
    gap = gram.mat @ report.phi_hat - h
    assert np.linalg.norm(gap) == pytest.approx(0.01, rel=1e-9)
