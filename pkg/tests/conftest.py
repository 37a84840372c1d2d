import json

import numpy as np
import pytest

import dlqr

# Worked scalar instances used throughout: plant 1 is open-loop unstable
# (A = 1.1), plant 2 is open-loop stable (A = 0.9); both share B = C = 1,
# Q = 5, R = 1 and the cross-correlated initial second moment below.
EX1 = {"A": 1.1, "B": 1.0, "C": 1.0, "Q": 5.0, "R": 1.0}
EX2 = {"A": 0.9, "B": 1.0, "C": 1.0, "Q": 5.0, "R": 1.0}
CROSS_X = np.array([[1.0, 0.25], [0.25, 1.0]])


@pytest.fixture
def ex1_plant():
    return dlqr.Plant(**EX1)


@pytest.fixture
def ex2_plant():
    return dlqr.Plant(**EX2)


@pytest.fixture
def cross_X():
    return CROSS_X.copy()


@pytest.fixture
def rounded_k1():
    # 3-decimal rounding of the Example-1 stationary controller in its
    # observer normalization (B_K back at 1.1): stabilizing but slightly
    # off stationarity.
    return dlqr.Controller(A_K=-0.944, B_K=1.1, C_K=-0.944)


@pytest.fixture
def rounded_k2():
    return dlqr.Controller(A_K=-0.765, B_K=0.9, C_K=-0.765)


def wire(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return {
        "rows": M.shape[0],
        "cols": M.shape[1],
        "data": [float(v) for v in M.ravel()],
    }


def problem_dict(plant_kwargs, X, seed_controller=None):
    obj = {
        "A": wire(plant_kwargs["A"]),
        "B": wire(plant_kwargs["B"]),
        "C": wire(plant_kwargs["C"]),
        "Q": wire(plant_kwargs["Q"]),
        "R": wire(plant_kwargs["R"]),
        "X": wire(X),
    }
    if seed_controller is not None:
        obj["seed_controller"] = {
            "A_K": wire(seed_controller.A_K),
            "B_K": wire(seed_controller.B_K),
            "C_K": wire(seed_controller.C_K),
        }
    return obj


@pytest.fixture
def ex1_problem_file(tmp_path, rounded_k1):
    path = tmp_path / "ex1.json"
    path.write_text(json.dumps(problem_dict(EX1, CROSS_X, rounded_k1)))
    return str(path)


@pytest.fixture
def ex2_problem_file(tmp_path, rounded_k2):
    path = tmp_path / "ex2.json"
    path.write_text(json.dumps(problem_dict(EX2, CROSS_X, rounded_k2)))
    return str(path)
