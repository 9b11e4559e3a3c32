import math

import numpy as np
import pytest

from fraccontrol.errors import DomainError
from fraccontrol.mittag import ml
from fraccontrol.model import (
    NonlocalPoint,
    NonlocalSpec,
    SpectralModel,
    Trajectory,
    apply_s_classical,
    apply_sq,
    apply_tq,
    constant_trajectory,
    eval_g,
    example1_control_matrix,
    heat1d_model,
    operator_norms,
    smoothing_tau,
    uniform_grid,
)


def scalar_model(q=1.0, lam=1.0, b=1.0):
    return SpectralModel(q=q, b=b, lam=[lam], Bmat=[[1.0]], pi_set=(1,), y0=[1.0], yb=[0.0])


def test_model_validation():
    with pytest.raises(DomainError):
        scalar_model(q=0.5)
    with pytest.raises(DomainError):
        scalar_model(q=1.2)
    with pytest.raises(DomainError):
        scalar_model(lam=-1.0)
    with pytest.raises(DomainError):
        scalar_model(b=0.0)
    with pytest.raises(DomainError):
        SpectralModel(q=0.8, b=1.0, lam=[1.0, 4.0], Bmat=[[1.0]], pi_set=(1,), y0=[0.0, 0.0], yb=[0.0])
    with pytest.raises(DomainError):
        SpectralModel(q=0.8, b=1.0, lam=[1.0, 4.0], Bmat=np.eye(2), pi_set=(2, 1), y0=[0.0, 0.0], yb=[0.0, 0.0])
    with pytest.raises(DomainError):
        SpectralModel(q=0.8, b=1.0, lam=[1.0, 4.0], Bmat=np.eye(2), pi_set=(3,), y0=[0.0, 0.0], yb=[0.0])


def test_model_arrays_are_read_only():
    model = scalar_model()
    with pytest.raises(ValueError):
        model.lam[0] = 2.0


def test_project_and_embed():
    model = heat1d_model(4, 0.75, 1.0, (2, 4))
    v = np.array([1.0, 2.0, 3.0, 4.0])
    assert model.project(v).tolist() == [2.0, 4.0]
    assert model.embed([5.0, 6.0]).tolist() == [0.0, 5.0, 0.0, 6.0]
    assert (model.N, model.M, model.P) == (4, 3, 2)


def test_apply_sq_at_zero_is_identity():
    model = heat1d_model(5, 2.0 / 3.0, 1.0, (1,))
    v = np.array([1.0, -2.0, 3.0, 0.5, 7.0])
    assert np.allclose(apply_sq(model, 0.0, v), v, rtol=0.0, atol=1e-15)


def test_apply_sq_zero_generator():
    model = SpectralModel(q=0.7, b=2.0, lam=[0.0, 0.0], Bmat=np.eye(2), pi_set=(1,), y0=[0.0, 0.0], yb=[0.0])
    v = np.array([1.5, -0.5])
    assert np.allclose(apply_sq(model, 1.3, v), v, rtol=1e-14)


def test_apply_sq_classical_limit():
    model = scalar_model(q=1.0, lam=1.0)
    assert apply_sq(model, 1.0, [1.0])[0] == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_apply_tq_components():
    model = heat1d_model(3, 0.8, 1.0, (1,))
    v = np.ones(3)
    out = apply_tq(model, 0.5, v)
    for k, lam in enumerate([1.0, 4.0, 9.0]):
        assert out[k] == pytest.approx(ml(0.8, 0.8, -lam * 0.5 ** 0.8), rel=1e-14)


def test_apply_sq_time_out_of_range():
    model = scalar_model()
    with pytest.raises(DomainError):
        apply_sq(model, -0.1, [1.0])
    with pytest.raises(DomainError):
        apply_sq(model, 1.5, [1.0])


def test_apply_s_classical():
    model = SpectralModel(q=0.8, b=1.0, lam=[1.0, 4.0], Bmat=np.eye(2), pi_set=(1,), y0=[0.0, 0.0], yb=[0.0])
    v = np.array([1.0, 1.0])
    assert apply_s_classical(model, 0.0, v).tolist() == [1.0, 1.0]
    assert np.allclose(apply_s_classical(model, 1.0, v), [math.exp(-1.0), math.exp(-4.0)], rtol=1e-15)
    assert apply_s_classical(model, math.inf, v).tolist() == [0.0, 0.0]
    with pytest.raises(DomainError):
        apply_s_classical(model, -1.0, v)


def test_apply_s_classical_decays_monotonically():
    model = heat1d_model(3, 0.8, 1.0, (1,))
    v = np.array([1.0, -2.0, 0.5])
    previous = np.abs(v)
    for tau in (0.1, 0.5, 1.0, 5.0, 50.0):
        current = np.abs(apply_s_classical(model, tau, v))
        assert np.all(current <= previous)
        previous = current


def test_smoothing_tau():
    assert smoothing_tau(math.inf) == 0.0
    assert smoothing_tau(4) == 0.25


def test_eval_g_empty_points():
    grid = uniform_grid(1.0, 16)
    z = constant_trajectory([1.0, 2.0], grid)
    assert eval_g(NonlocalSpec(0.5), z).tolist() == [0.0, 0.0]
    assert eval_g(None, z).tolist() == [0.0, 0.0]


def test_eval_g_point_evaluation():
    grid = uniform_grid(1.0, 16)
    v = np.array([0.3, -1.2, 2.0])
    z = constant_trajectory(v, grid)
    spec = NonlocalSpec(0.5, (NonlocalPoint(0.6, np.eye(3)),))
    assert np.allclose(eval_g(spec, z), v, rtol=0.0, atol=1e-15)
    scalar = NonlocalSpec(0.5, (NonlocalPoint(0.6, 0.1),))
    assert np.allclose(eval_g(scalar, z), 0.1 * v, rtol=0.0, atol=1e-15)


def test_eval_g_rejects_points_outside_window():
    grid = uniform_grid(1.0, 16)
    z = constant_trajectory([1.0], grid)
    with pytest.raises(DomainError):
        eval_g(NonlocalSpec(0.5, (NonlocalPoint(0.4, 1.0),)), z)
    with pytest.raises(DomainError):
        eval_g(NonlocalSpec(0.5, (NonlocalPoint(1.5, 1.0),)), z)


@pytest.mark.parametrize("grid_T", [7, 16, 33])
def test_eval_g_ignores_values_before_delta(rng, grid_T):
    """Änderungen von z auf [0, δ) ändern g(z) nicht (bitgenau)"""
    grid = uniform_grid(1.0, grid_T)
    delta = 0.45
    spec = NonlocalSpec(delta, (NonlocalPoint(delta, 0.3), NonlocalPoint(0.61, rng.normal(size=(2, 2)))),
                        integral_weight=0.2)
    values = rng.normal(size=(2, grid.size))
    base = eval_g(spec, Trajectory(grid, values))
    for _ in range(20):
        mutated = values.copy()
        early = grid < delta
        mutated[:, early] = rng.normal(scale=100.0, size=(2, int(early.sum())))
        assert np.array_equal(eval_g(spec, Trajectory(grid, mutated)), base)


def test_nonlocal_spec_validation_and_bound():
    with pytest.raises(DomainError):
        NonlocalSpec(0.0)
    spec = NonlocalSpec(0.5, (NonlocalPoint(0.6, 0.1), NonlocalPoint(0.9, -0.2)), integral_weight=0.5)
    assert spec.lambda_g(2.0, 1.0, 4) == pytest.approx(0.3 * 2.0 + 0.5 * 0.5 * 2.0)
    assert NonlocalSpec(0.5).is_zero
    assert not spec.is_zero


def test_trajectory_interpolation_and_norms():
    grid = uniform_grid(1.0, 4)
    values = np.vstack([grid, 2.0 * grid])
    z = Trajectory(grid, values)
    assert np.allclose(z.at(0.375), [0.375, 0.75])
    assert z.final.tolist() == [1.0, 2.0]
    assert z.sup_norm() == pytest.approx(math.sqrt(5.0))
    other = Trajectory(grid, np.zeros_like(values))
    assert z.sup_distance(other) == pytest.approx(math.sqrt(5.0))
    with pytest.raises(DomainError):
        z.at(1.5)
    with pytest.raises(DomainError):
        Trajectory(grid, np.zeros((2, 3)))


def test_operator_norms():
    model = SpectralModel(q=0.8, b=1.0, lam=[1.0, 4.0], Bmat=np.eye(2), pi_set=(1,), y0=[0.0, 0.0], yb=[0.0])
    assert operator_norms(model) == (1.0, pytest.approx(1.0))


@pytest.mark.parametrize("n_modes", [4, 6, 8])
def test_example1_control_norm(n_modes):
    Bmat = example1_control_matrix(n_modes)
    u = np.arange(1.0, n_modes)
    image = Bmat @ u
    assert image[0] == 2.0 * u[0]
    assert np.array_equal(image[1:], u)
    model = heat1d_model(n_modes, 2.0 / 3.0, 1.0, (1, 2))
    _, m_b = operator_norms(model)
    assert m_b == pytest.approx(float(np.linalg.svd(Bmat, compute_uv=False)[0]), rel=1e-12)
    assert m_b == pytest.approx(math.sqrt(5.0), rel=1e-12)
