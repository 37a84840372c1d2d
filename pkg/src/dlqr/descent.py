"""Stability-safeguarded gradient descent over (A_K, B_K, C_K).

Plain gradient descent with backtracking line search on the stacked
controller parameters. Every trial step is screened for closed-loop
stability before its cost is evaluated (the cost is infinite outside the
stabilizing set), and acceptance additionally requires Armijo decrease.
The trial step is the Barzilai-Borwein (BB1) quotient from the previous
accepted step, which keeps progress alive in the ill-conditioned valley
around the stationary point where fixed small steps stall."""

from dataclasses import dataclass

import numpy as np

from .cost import evaluate
from .errors import InitFailed
from .gradient import analytic_gradient
from .matops import (
    DEFAULT_CONFIG,
    filter_gain,
    lqr_gain,
    solve_dare_control,
    solve_dare_filter,
)
from .model import (
    as_second_moment,
    controller_from_vector,
    controller_to_vector,
    is_observable_controller,
    is_stabilizing,
    observer_based,
)

CONVERGED = "converged"
MAX_ITER = "max_iter"
STABILITY_BOUNDARY = "stability_boundary"

# Backtracking budget per iteration; exhausting it means no acceptable
# step exists in the search ray, which happens against the stability
# boundary (or once J sits at its floating-point floor).
MAX_BACKTRACKS = 120

# Clip range for the Barzilai-Borwein trial step.
BB_STEP_MIN = 1e-12
BB_STEP_MAX = 1e8

# Armijo acceptance slack, scaled by 1 + |J|: decreases below the
# floating-point noise floor of J must still be acceptable, otherwise the
# iteration stalls with the gradient well above any useful tolerance.
NOISE_SLACK = 64.0 * np.finfo(float).eps

# Rejection-sampling budget for random initialization.
MAX_INIT_ATTEMPTS = 1000


@dataclass(frozen=True)
class DescentConfig:
    """Line-search parameters: initial step, backtracking factor, Armijo
    constant, iteration budget, and gradient-norm stopping tolerance."""

    step0: float = 1e-2
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    max_iter: int = 100_000
    grad_tol: float = 1e-8

    def __post_init__(self):
        if not self.step0 > 0:
            raise ValueError("step0 must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")


DEFAULT_DESCENT_CONFIG = DescentConfig()


@dataclass(frozen=True, eq=False)
class DescentStep:
    """One accepted iterate: controller, its cost, its gradient norm, and
    the step size that produced it (0.0 for the initial point)."""

    controller: object
    J: float
    grad_norm: float
    step: float


@dataclass(frozen=True, eq=False)
class DescentTrace:
    """Accepted iterates in order plus the terminal status, one of
    "converged", "max_iter", or "stability_boundary"."""

    steps: tuple
    status: str

    @property
    def final_controller(self):
        return self.steps[-1].controller

    @property
    def final_J(self):
        return self.steps[-1].J

    @property
    def final_grad_norm(self):
        return self.steps[-1].grad_norm

    @property
    def iterations(self):
        return len(self.steps) - 1


def _grad_vector(grad):
    return controller_to_vector(grad.as_controller_direction())


def descend(plant, X, init, cfg=DEFAULT_DESCENT_CONFIG, solver_cfg=DEFAULT_CONFIG):
    """Gradient descent from a stabilizing initial controller.

    Parameters
    ----------
    init : Controller
        Must stabilize the plant.
    cfg : DescentConfig
    solver_cfg : SolverConfig
        Tolerances for the inner Lyapunov solves and stability margin.

    Returns
    -------
    DescentTrace
        Deterministic in (plant, X, init, cfg): the method draws no
        randomness.

    Raises
    ------
    NotStabilizing
        If init does not stabilize the plant.
    """
    X = as_second_moment(X, plant.n)
    report = evaluate(plant, init, X, solver_cfg)
    grad = analytic_gradient(plant, init, X, solver_cfg, report=report)
    controller, J = init, report.J
    theta, g_vec = controller_to_vector(init), _grad_vector(grad)
    steps = [DescentStep(controller=init, J=J, grad_norm=grad.norm, step=0.0)]
    prev_theta = prev_g = None
    status = MAX_ITER
    for _ in range(cfg.max_iter):
        gnorm = float(np.linalg.norm(g_vec))
        if gnorm <= cfg.grad_tol:
            status = CONVERGED
            break
        t = cfg.step0
        if prev_theta is not None:
            s = theta - prev_theta
            y = g_vec - prev_g
            sy = float(s @ y)
            if sy > 0.0:
                t = float(s @ s) / sy
            t = min(max(t, BB_STEP_MIN), BB_STEP_MAX)
        slack = NOISE_SLACK * (1.0 + abs(J))
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            cand_vec = theta - t * g_vec
            cand = controller_from_vector(controller, cand_vec)
            if is_stabilizing(plant, cand, solver_cfg.stability_margin):
                cand_report = evaluate(plant, cand, X, solver_cfg)
                if cand_report.J <= J - cfg.armijo_c * t * gnorm**2 + slack:
                    accepted = True
                    break
            t *= cfg.backtrack_factor
        if not accepted:
            status = STABILITY_BOUNDARY
            break
        prev_theta, prev_g = theta, g_vec
        controller, J, theta = cand, cand_report.J, cand_vec
        grad = analytic_gradient(plant, controller, X, solver_cfg, report=cand_report)
        g_vec = _grad_vector(grad)
        steps.append(DescentStep(controller=controller, J=J, grad_norm=grad.norm, step=t))
    if status == MAX_ITER and steps[-1].grad_norm <= cfg.grad_tol:
        status = CONVERGED
    return DescentTrace(steps=tuple(steps), status=status)


def random_stabilizing_init(plant, seed, noise_scale=0.5):
    """Random stabilizing observable controller, deterministic in seed.

    Perturbs the observer-based gains (state feedback from the control
    Riccati solution, observer gain from the filter Riccati solution with
    unit process noise) entrywise by noise_scale * U(-1, 1) * (1 + |gain|),
    rejection-resampling until the closed loop is stable and the
    realization observable.

    Raises
    ------
    InitFailed
        If no admissible sample is found in 1000 attempts.
    """
    rng = np.random.default_rng(seed)
    P_hat = solve_dare_control(plant.A, plant.B, plant.Q, plant.R)
    K0 = lqr_gain(plant.A, plant.B, plant.R, P_hat)
    Sigma_hat = solve_dare_filter(plant.A, plant.C, np.eye(plant.n))
    L0 = filter_gain(plant.A, plant.C, Sigma_hat)
    for _ in range(MAX_INIT_ATTEMPTS):
        K = K0 + noise_scale * rng.uniform(-1.0, 1.0, K0.shape) * (1.0 + np.abs(K0))
        L = L0 + noise_scale * rng.uniform(-1.0, 1.0, L0.shape) * (1.0 + np.abs(L0))
        candidate = observer_based(plant, K, L)
        if is_stabilizing(plant, candidate) and is_observable_controller(candidate):
            return candidate
    raise InitFailed(
        f"no stabilizing observable controller in {MAX_INIT_ATTEMPTS} samples"
    )
