import numpy as np
import pytest
from numpy.testing import assert_allclose

import dlqr
from dlqr import Controller, DescentConfig, InitFailed, NotStabilizing
from dlqr import descent as descent_mod

from oracles import random_plant_arrays


def test_config_validation():
    with pytest.raises(ValueError):
        DescentConfig(step0=0.0)
    with pytest.raises(ValueError):
        DescentConfig(backtrack_factor=1.0)
    with pytest.raises(ValueError):
        DescentConfig(armijo_c=0.0)
    with pytest.raises(ValueError):
        DescentConfig(max_iter=0)
    with pytest.raises(ValueError):
        DescentConfig(grad_tol=0.0)
    assert DescentConfig(grad_tol=float("inf")).grad_tol == float("inf")


def test_descend_stops_immediately_at_stationary_point(ex1_plant, cross_X):
    cert = dlqr.stationary_candidate(ex1_plant, cross_X)
    trace = dlqr.descend(ex1_plant, cross_X, cert.K_star)
    assert trace.status == dlqr.CONVERGED
    assert trace.iterations == 0
    assert trace.steps[0].step == 0.0
    assert trace.final_J == pytest.approx(cert.J, rel=1e-12)


def test_descend_vacuous_tolerance_returns_init(ex1_plant, rounded_k1, cross_X):
    cfg = DescentConfig(grad_tol=float("inf"))
    trace = dlqr.descend(ex1_plant, cross_X, rounded_k1, cfg)
    assert trace.status == dlqr.CONVERGED
    assert trace.iterations == 0
    assert_allclose(trace.final_controller.A_K, rounded_k1.A_K)


def test_descend_exhausts_iteration_budget(ex1_plant, rounded_k1, cross_X):
    cfg = DescentConfig(max_iter=1)
    trace = dlqr.descend(ex1_plant, cross_X, rounded_k1, cfg)
    assert trace.status == dlqr.MAX_ITER
    assert trace.iterations == 1


def test_descend_rejects_nonstabilizing_init(ex1_plant, cross_X):
    with pytest.raises(NotStabilizing):
        dlqr.descend(ex1_plant, cross_X, Controller(A_K=0.0, B_K=0.0, C_K=0.0))


def test_descend_trace_invariants(ex1_plant, cross_X):
    init = dlqr.random_stabilizing_init(ex1_plant, 0)
    trace = dlqr.descend(ex1_plant, cross_X, init)
    assert trace.status == dlqr.CONVERGED
    assert trace.final_grad_norm <= 1e-8
    slack = 64.0 * np.finfo(float).eps
    for prev, cur in zip(trace.steps, trace.steps[1:]):
        # every accepted step is stabilizing, takes a positive step, and
        # satisfies Armijo decrease up to the floating-point slack
        assert cur.step > 0.0
        assert dlqr.is_stabilizing(ex1_plant, cur.controller)
        bound = prev.J - 1e-4 * cur.step * prev.grad_norm**2 + slack * (1.0 + abs(prev.J))
        assert cur.J <= bound


def test_descend_reaches_stationary_cost(ex1_plant, ex2_plant, cross_X):
    for plant in (ex1_plant, ex2_plant):
        cert = dlqr.stationary_candidate(plant, cross_X)
        init = dlqr.random_stabilizing_init(plant, 7)
        trace = dlqr.descend(plant, cross_X, init)
        assert trace.status == dlqr.CONVERGED
        assert abs(trace.final_J - cert.J) <= 1e-6


def test_descend_deterministic(ex1_plant, cross_X):
    init = dlqr.random_stabilizing_init(ex1_plant, 3)
    first = dlqr.descend(ex1_plant, cross_X, init)
    second = dlqr.descend(ex1_plant, cross_X, init)
    assert first.status == second.status
    assert [s.J for s in first.steps] == [s.J for s in second.steps]
    assert [s.step for s in first.steps] == [s.step for s in second.steps]


def test_descend_reports_stability_boundary(
    ex1_plant, rounded_k1, cross_X, monkeypatch
):
    # with a single enormous trial step and no backtracking budget, the
    # line search cannot find a stabilizing candidate and must stop at the
    # boundary rather than loop or step outside
    monkeypatch.setattr(descent_mod, "MAX_BACKTRACKS", 1)
    cfg = DescentConfig(step0=1e8)
    trace = dlqr.descend(ex1_plant, cross_X, rounded_k1, cfg)
    assert trace.status == dlqr.STABILITY_BOUNDARY
    assert trace.iterations == 0


def test_random_init_zero_noise_is_riccati_design(ex1_plant):
    sampled = dlqr.random_stabilizing_init(ex1_plant, 12, noise_scale=0.0)
    P = dlqr.solve_dare_control(ex1_plant.A, ex1_plant.B, ex1_plant.Q, ex1_plant.R)
    K = dlqr.lqr_gain(ex1_plant.A, ex1_plant.B, ex1_plant.R, P)
    Sigma = dlqr.solve_dare_filter(ex1_plant.A, ex1_plant.C, np.eye(1))
    L = dlqr.filter_gain(ex1_plant.A, ex1_plant.C, Sigma)
    designed = dlqr.observer_based(ex1_plant, K, L)
    assert_allclose(sampled.A_K, designed.A_K)
    assert_allclose(sampled.B_K, designed.B_K)
    assert_allclose(sampled.C_K, designed.C_K)


def test_random_init_deterministic_and_admissible(ex1_plant):
    a = dlqr.random_stabilizing_init(ex1_plant, 5)
    b = dlqr.random_stabilizing_init(ex1_plant, 5)
    assert_allclose(a.A_K, b.A_K)
    assert_allclose(a.B_K, b.B_K)
    assert_allclose(a.C_K, b.C_K)
    for seed in range(100):
        controller = dlqr.random_stabilizing_init(ex1_plant, seed)
        assert dlqr.is_stabilizing(ex1_plant, controller)
        assert dlqr.is_observable_controller(controller)


def test_random_init_matrix_plant():
    rng = np.random.default_rng(67)
    plant = dlqr.Plant(**random_plant_arrays(rng, 3, 2, 2))
    controller = dlqr.random_stabilizing_init(plant, 9)
    assert controller.A_K.shape == (3, 3)
    assert controller.B_K.shape == (3, 2)
    assert controller.C_K.shape == (2, 3)
    assert dlqr.is_stabilizing(plant, controller)


def test_random_init_gives_up_eventually(ex1_plant):
    # absurd noise throws every sample far outside the stabilizing set
    with pytest.raises(InitFailed):
        dlqr.random_stabilizing_init(ex1_plant, 0, noise_scale=1e12)
