import math

import numpy as np
import pytest

from multitrace.errors import InvalidM, InvalidParams, ValidationError
from multitrace.estimator import (
    EstimationRequest,
    build_estimation_circuit,
    circuit_parity_table,
    estimate_trace,
    exact_parity_distribution,
    hoeffding_shots,
    parity_samples,
    theoretical_variance,
)
from multitrace.linalg import pure_state, random_density_matrix
from multitrace.oracle import control_distribution, multivariate_trace
from multitrace.rng import RngStream


def test_hoeffding_counts():
    assert hoeffding_shots(0.1, 0.05, 2) == 738
    assert EstimationRequest([np.eye(2) / 2] * 2).shots_per_part() == 1753
    assert EstimationRequest([np.eye(2) / 2] * 2, delta=0.1).shots_per_part() == 1476
    with pytest.raises(InvalidParams):
        hoeffding_shots(0, 0.1)


def test_request_validation():
    with pytest.raises(InvalidM):
        EstimationRequest([np.eye(2) / 2])
    with pytest.raises(ValidationError):
        EstimationRequest([np.eye(2) / 2, np.eye(4) / 4])
    with pytest.raises(ValidationError):
        EstimationRequest([np.eye(2) / 2] * 2, mode="sideways")


def test_swap_test_identical_pure():
    req = EstimationRequest([pure_state([1, 0])] * 2, shots=2000, seed=3)
    est = estimate_trace(req)
    assert est.value.real == 1.0
    assert abs(est.value.imag) < 0.1


def test_orthogonal_pure_states_give_zero():
    est = estimate_trace(EstimationRequest([pure_state([1, 0]), pure_state([0, 1])], shots=20000, seed=1))
    assert abs(est.value) < 0.03


def test_deterministic_given_seed(rng):
    states = [random_density_matrix(2, 2, rng) for _ in range(3)]
    a = estimate_trace(EstimationRequest(states, seed=42, shots=1000))
    b = estimate_trace(EstimationRequest(states, seed=42, shots=1000))
    c = estimate_trace(EstimationRequest(states, seed=43, shots=1000))
    assert a == b
    assert a.value != c.value


def test_threads_do_not_change_result(rng):
    states = [random_density_matrix(2, 2, rng) for _ in range(5)]
    req = EstimationRequest(states, seed=8, shots=5000)
    assert estimate_trace(req, threads=1) == estimate_trace(req, threads=4)


def test_shot_windows_concatenate(rng):
    states = [random_density_matrix(2, 2, rng) for _ in range(3)]
    req = EstimationRequest(states, seed=2, shots=300)
    whole = parity_samples(req, "real", 300)
    parts = np.concatenate([parity_samples(req, "real", 100, first_shot=i) for i in (0, 100, 200)])
    assert np.array_equal(whole, parts)


@pytest.mark.parametrize("mode", ["depth", "width"])
@pytest.mark.parametrize("ghz_method", [1, 2])
@pytest.mark.parametrize("m,p", [(2, 1), (3, 1), (4, 1), (5, 1), (2, 2), (3, 2)])
def test_exact_tables_match_closed_form(m, p, mode, ghz_method):
    rng = RngStream(100 * m + p)
    states = [random_density_matrix(2**p, 2, rng) for _ in range(m)]
    for part in ("real", "imag"):
        k = len(build_estimation_circuit(m, p, part, mode, ghz_method).labels)
        got = exact_parity_distribution(states, part, mode, ghz_method)
        assert np.allclose(got, control_distribution(states, part, k), atol=1e-10)


def test_loading_order_gives_product_order():
    # three distinct pure states: reversing the product conjugates the trace
    kets = [np.array([1, 0]), np.array([1, 1]) / np.sqrt(2), np.array([1, 1j]) / np.sqrt(2)]
    states = [pure_state(k) for k in kets]
    ec = build_estimation_circuit(3, 1, "imag")
    table = circuit_parity_table(ec, states)
    even = sum(table[x] for x in range(len(table)) if bin(x).count("1") % 2 == 0)
    t = multivariate_trace([s.matrix for s in states])
    assert t.imag > 0.2
    assert math.isclose(2 * even - 1, t.imag, abs_tol=1e-12)


def test_theoretical_variance(rng):
    states = [random_density_matrix(2, 2, rng) for _ in range(3)]
    t = multivariate_trace([s.matrix for s in states])
    vr, vi, vt = theoretical_variance(states)
    assert math.isclose(vr + vi, vt)
    assert math.isclose(vt, 2 - abs(t) ** 2)


def test_empirical_variance_reported(rng):
    states = [random_density_matrix(2, 2, rng) for _ in range(2)]
    est = estimate_trace(EstimationRequest(states, seed=0, shots=20000))
    vr, vi, _ = theoretical_variance(states)
    assert abs(est.empirical_variance_real - vr) < 0.03
    assert abs(est.empirical_variance_imag - vi) < 0.03
    assert set(est.as_dict()) >= {"re", "im", "shots_per_part"}
