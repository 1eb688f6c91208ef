import numpy as np
import pytest

from conftest import random_cov, random_W
from palmiva import (
    ConfigError,
    DegenerateInputError,
    Dims,
    EmpiricalCovariance,
    IvagvConfig,
    cost_tilde,
    ivagv_solve,
    normalize_rows,
    scv_grams,
)
from palmiva.bench import prepare
from palmiva.evaluation import score_in_original_space
from palmiva.synthgen import generate_trial


def test_normalize_row_of_norm_two():
    R = EmpiricalCovariance(np.eye(6), 2, 3)
    W = np.broadcast_to(np.eye(3), (2, 3, 3)).copy()
    W[1, 2] = [0.0, 2.0, 0.0]
    out = normalize_rows(W, R)
    assert np.linalg.norm(out[1, 2]) == pytest.approx(1.0)
    assert np.allclose(out[0], np.eye(3))


def test_normalize_unit_variance_and_idempotent(rng):
    R = random_cov(rng, 3, 4)
    out = normalize_rows(random_W(rng, 3, 4), R)
    assert np.allclose(np.diagonal(scv_grams(out, R), axis1=1, axis2=2), 1.0, atol=1e-12)
    assert np.allclose(normalize_rows(out, R), out, atol=1e-12, rtol=0)


def test_normalize_zero_row(rng):
    R = random_cov(rng, 2, 3)
    W = random_W(rng, 2, 3)
    W[0, 1] = 0.0
    with pytest.raises(DegenerateInputError, match="row 1 of slice 0"):
        normalize_rows(W, R)


def test_normalization_keeps_cost(rng):
    R = random_cov(rng, 3, 4)
    W = random_W(rng, 3, 4)
    assert cost_tilde(normalize_rows(W, R), R) == pytest.approx(cost_tilde(W, R), abs=1e-10)


@pytest.mark.parametrize(
    "kwargs",
    [{"backtrack_factor": 1.0}, {"armijo_c1": 0.0}, {"delta": 0.0}, {"initial_step": 0.0},
     {"max_iter": 0}, {"init_mode": "ones"}],
)
def test_config_rejects(kwargs):
    with pytest.raises(ConfigError):
        IvagvConfig(**kwargs)


def test_monotone_and_separates_case_d():
    truth, stack = generate_trial("D", Dims(5, 10, 10000), 0)
    R, info = prepare(stack)
    W, trace = ivagv_solve(R)
    assert trace.converged
    assert np.all(np.diff(trace.cost) <= 1e-12)
    assert len(trace.cost) == trace.iterations + 1
    assert score_in_original_space(W, info, truth.A) < 2e-2


def test_random_orthogonal_start_is_deterministic(rng):
    R = random_cov(rng, 2, 3)
    cfg = IvagvConfig(init_mode="random_orthogonal", seed=5, max_iter=20)
    W1, t1 = ivagv_solve(R, cfg)
    W2, t2 = ivagv_solve(R, cfg)
    assert np.array_equal(W1, W2) and t1.cost == t2.cost
