import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multitrace.circuit import CNOT, H, ConditionalX, Measure, QuantumCircuit, Reset, X, simulate
from multitrace.errors import ValidationError, ZeroNormBranch
from multitrace.estimator import build_estimation_circuit
from multitrace.linalg import random_density_matrix
from multitrace.rng import RngStream
from multitrace.statevector import (
    Factor,
    StateVector,
    _apply,
    apply_gate,
    enumerate_branches,
    exact_distribution,
    gate_matrix,
    run_shots,
    thread_count,
)


def _embed(kind, targets, n):
    """Dense operator of ``kind`` on ``targets`` (little-endian) by brute force."""
    g = gate_matrix(kind)
    k = len(targets)
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub = sum(((col >> t) & 1) << i for i, t in enumerate(targets))
        for row_sub in range(1 << k):
            amp = g[row_sub, sub]
            if amp == 0:
                continue
            row = col
            for i, t in enumerate(targets):
                row = (row & ~(1 << t)) | (((row_sub >> i) & 1) << t)
            out[row, col] += amp
    return out


@settings(max_examples=30, deadline=None)
@given(kind=st.sampled_from(["H", "X", "S_DAGGER", "CNOT", "CSWAP"]), seed=st.integers(0, 10**6))
def test_kernels_match_dense(kind, seed):
    n = 4
    rng = np.random.default_rng(seed)
    arity = {"CNOT": 2, "CSWAP": 3}.get(kind, 1)
    targets = tuple(int(t) for t in rng.permutation(n)[:arity])
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    x = v.copy()[None, :]
    _apply(x, n, kind, targets)
    assert np.allclose(x[0], _embed(kind, targets, n) @ v)


def test_cswap_semantics():
    # control 0 set, qubit 1 set -> swap onto qubit 2
    s = apply_gate(StateVector.basis(3, 0b011), "CSWAP", (0, 1, 2))
    assert np.isclose(abs(s.amplitudes[0b101]), 1)
    s = apply_gate(StateVector.basis(3, 0b010), "CSWAP", (0, 1, 2))
    assert np.isclose(abs(s.amplitudes[0b010]), 1)


def test_little_endian_x():
    s = apply_gate(StateVector.zeros(3), "X", (0,))
    assert s.amplitudes[1] == 1


def test_measure_plus_is_fair():
    c = QuantumCircuit(1).append_moment([H(0)]).append_moment([Measure(0, "m")])
    bits = run_shots(c, [], seed=3, shot_indices=np.arange(20000)).column("m")
    assert abs(bits.mean() - 0.5) < 0.02


def test_forced_zero_probability_branch():
    c = QuantumCircuit(1).append_moment([Measure(0, "m")])
    with pytest.raises(ZeroNormBranch):
        simulate(c, forced={"m": 1})


def test_reset_returns_to_zero():
    c = QuantumCircuit(1).append_moment([H(0)]).append_moment([Reset(0)])
    for seed in range(5):
        state, _ = simulate(c, rng=RngStream(seed))
        assert np.isclose(abs(state.amplitudes[0]), 1)


def test_conditional_x_feedback():
    c = QuantumCircuit(2)
    c = c.append_moment([X(0)]).append_moment([Measure(0, "a")]).append_moment([ConditionalX(1, ["a"])])
    state, rec = simulate(c)
    assert rec == {"a": 1}
    assert np.isclose(abs(state.amplitudes[0b11]), 1)


def test_input_size_checked():
    c = QuantumCircuit(2).append_moment([H(0)])
    with pytest.raises(ValidationError):
        simulate(c, StateVector.zeros(3))
    with pytest.raises(ValidationError):
        StateVector.from_amplitudes([1, 1])


def _mixed_circuit():
    rng = RngStream(21)
    states = [random_density_matrix(2, 2, rng) for _ in range(4)]
    ec = build_estimation_circuit(4, 1, "imag")
    return ec, ec.factors(states)


def test_single_shot_matches_batched():
    from multitrace.estimator import EstimationRequest, run_shot_parity, parity_samples

    rng = RngStream(5)
    states = [random_density_matrix(2, 2, rng) for _ in range(5)]
    req = EstimationRequest(states, seed=77, shots=40)
    batched = parity_samples(req, "real", 40)
    single = [run_shot_parity(req, "real", RngStream(77, i, 0)) for i in range(40)]
    assert list(batched) == single


def test_chunk_and_thread_invariance():
    ec, factors = _mixed_circuit()
    shots = np.arange(3000)
    ref = run_shots(ec.circuit, factors, 9, shots).bits
    for chunk, threads in ((1, 1), (7, 1), (500, 4), (4096, 3)):
        got = run_shots(ec.circuit, factors, 9, shots, threads=threads, chunk=chunk).bits
        assert np.array_equal(got, ref)


def test_thread_env(monkeypatch):
    monkeypatch.setenv("MULTITRACE_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("MULTITRACE_THREADS", "lots")
    assert thread_count() == 1


def test_branch_weights_sum_to_one():
    ec, factors = _mixed_circuit()
    total = sum(b.weight for b in enumerate_branches(ec.circuit, factors))
    assert abs(total - 1) < 1e-12
    dist = exact_distribution(ec.circuit, factors, ec.labels)
    assert abs(sum(dist.values()) - 1) < 1e-12


def test_empirical_matches_exact_distribution():
    ec, factors = _mixed_circuit()
    n = 40000
    rec = run_shots(ec.circuit, factors, 1, np.arange(n))
    dist = exact_distribution(ec.circuit, factors, ec.labels)
    cols = [rec.labels.index(lab) for lab in ec.labels]
    keys, counts = np.unique(rec.bits[:, cols], axis=0, return_counts=True)
    emp = {tuple(int(b) for b in k): c / n for k, c in zip(keys, counts)}
    tv = 0.5 * sum(abs(emp.get(k, 0) - dist.get(k, 0)) for k in set(emp) | set(dist))
    assert tv < 0.02


def test_factor_loading_places_register():
    # |1> on qubit 2 only
    f = Factor((2,), np.array([1.0]), np.array([[0, 1]], dtype=complex))
    c = QuantumCircuit(3).append_moment([Measure(2, "z"), Measure(0, "o")])
    rec = run_shots(c, [f], 0, np.arange(5))
    assert rec.column("z").tolist() == [1] * 5
    assert rec.column("o").tolist() == [0] * 5


def test_bell_correlations():
    c = QuantumCircuit(2).append_moment([H(0)]).append_moment([CNOT(0, 1)])
    c = c.append_moment([Measure(0, "a"), Measure(1, "b")])
    rec = run_shots(c, [], 4, np.arange(1000))
    assert np.array_equal(rec.column("a"), rec.column("b"))
