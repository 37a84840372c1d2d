"""Analytic policy gradient of the cost in the controller parameters.

The gradient of J with respect to (A_K, B_K, C_K) has a closed form in
the blocks of the Lyapunov pair (P, Sigma) of the current closed loop.
A central finite-difference fallback is provided for cross-checking."""

from dataclasses import dataclass

import numpy as np

from .cost import evaluate
from .errors import NotStabilizing
from .matops import DEFAULT_CONFIG
from .model import Controller

# Halvings of the finite-difference step before giving up on a coordinate
# whose perturbation keeps leaving the stabilizing set.
FD_MAX_HALVINGS = 20


@dataclass(frozen=True, eq=False)
class GradientTriple:
    """Partial derivatives of J with respect to the controller matrices."""

    dA_K: np.ndarray
    dB_K: np.ndarray
    dC_K: np.ndarray

    @property
    def norm(self):
        """Frobenius norm of the stacked parameter gradient."""
        return float(
            np.sqrt(
                np.sum(self.dA_K**2) + np.sum(self.dB_K**2) + np.sum(self.dC_K**2)
            )
        )

    def as_controller_direction(self):
        """The triple itself viewed as a step direction in controller space."""
        return Controller(A_K=self.dA_K, B_K=self.dB_K, C_K=self.dC_K)


def gradient_from_report(plant, controller, report):
    """Assemble the gradient from an existing cost report.

    The formulas are linear in the blocks of (P, Sigma), so reusing a
    report costs no extra Lyapunov solves. The report must belong to this
    (plant, controller) pair; no consistency check is performed here.
    """
    A, B, C = plant.A, plant.B, plant.C
    R = plant.R
    A_K, B_K, C_K = controller.A_K, controller.B_K, controller.C_K
    P11, P12, P22 = report.P11, report.P12, report.P22
    S11, S12, S22 = report.Sigma11, report.Sigma12, report.Sigma22

    closed12 = P12.T @ A + P22 @ B_K @ C
    closed22 = P12.T @ B @ C_K + P22 @ A_K

    dC_K = 2.0 * B.T @ (P11 @ A + P12 @ B_K @ C) @ S12 + 2.0 * (
        (R + B.T @ P11 @ B) @ C_K + B.T @ P12 @ A_K
    ) @ S22
    dB_K = 2.0 * closed12 @ S11 @ C.T + 2.0 * closed22 @ S12.T @ C.T
    dA_K = 2.0 * closed22 @ S22 + 2.0 * closed12 @ S12
    return GradientTriple(dA_K=dA_K, dB_K=dB_K, dC_K=dC_K)


def analytic_gradient(plant, controller, X, cfg=DEFAULT_CONFIG, report=None):
    """Exact gradient of J at a stabilizing controller.

    Parameters
    ----------
    report : CostReport, optional
        Reuse an already computed cost report for this point instead of
        solving the Lyapunov pair again.

    Returns
    -------
    GradientTriple

    Raises
    ------
    NotStabilizing
        If the controller does not stabilize the plant.
    """
    if report is None:
        report = evaluate(plant, controller, X, cfg)
    return gradient_from_report(plant, controller, report)


def _fd_coordinate(plant, controller, X, mats, key, idx, base, cfg):
    # Central difference in one coordinate, shrinking the step if a
    # perturbation exits the stabilizing set.
    h = base
    for _ in range(FD_MAX_HALVINGS + 1):
        try:
            vals = []
            for sign in (1.0, -1.0):
                shifted = {k: v.copy() for k, v in mats.items()}
                shifted[key][idx] += sign * h
                probe = Controller(**shifted)
                vals.append(evaluate(plant, probe, X, cfg).J)
            return (vals[0] - vals[1]) / (2.0 * h)
        except NotStabilizing:
            h *= 0.5
    raise NotStabilizing(
        f"finite difference in {key}{list(idx)} kept leaving the stabilizing set"
    )


def finite_difference_gradient(plant, controller, X, step=1e-6, cfg=DEFAULT_CONFIG):
    """Central-difference gradient, coordinate by coordinate.

    Each coordinate uses a relative step h = step * (1 + |theta_i|). Near
    the stability boundary the step is halved (up to 20 times) until both
    one-sided evaluations stay stabilizing.
    """
    evaluate(plant, controller, X, cfg)  # fail fast at the base point
    mats = {"A_K": controller.A_K, "B_K": controller.B_K, "C_K": controller.C_K}
    grads = {}
    for key, M in mats.items():
        G = np.zeros_like(M)
        for idx in np.ndindex(M.shape):
            h = step * (1.0 + abs(M[idx]))
            G[idx] = _fd_coordinate(plant, controller, X, mats, key, idx, h, cfg)
        grads[key] = G
    return GradientTriple(dA_K=grads["A_K"], dB_K=grads["B_K"], dC_K=grads["C_K"])


def stationarity_residual(plant, controller, X, cfg=DEFAULT_CONFIG, report=None):
    """Norm of the analytic gradient; zero exactly at stationary points."""
    return analytic_gradient(plant, controller, X, cfg, report=report).norm
