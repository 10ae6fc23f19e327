import itertools

import numpy as np
import pytest

from multitrace.circuit import simulate
from multitrace.errors import InvalidN, InvalidR
from multitrace.ghz import build_method1, build_method2, ghz_register, single_party, verify_ghz
from multitrace.rng import RngStream
from multitrace.statevector import StateVector, enumerate_branches


def test_method1_r3_layout():
    plan = build_method1(3)
    assert plan.num_qubits == 4
    assert plan.ghz_qubits == (0, 1, 3)
    assert plan.measured == (2,)
    assert plan.circuit.measurement_labels == ("b1",)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_method1_all_branches(r):
    plan = build_method1(r)
    labels = plan.circuit.measurement_labels
    for bits in itertools.product((0, 1), repeat=len(labels)):
        state, rec = simulate(plan.circuit, forced=dict(zip(labels, bits)))
        assert rec == dict(zip(labels, bits))
        assert verify_ghz(state, plan.ghz_qubits) > 1 - 1e-9


@pytest.mark.parametrize("n", [4, 6])
def test_method2_random_runs(n):
    plan = build_method2(n)
    assert plan.ghz_qubits == tuple(range(n))
    for seed in range(8):
        state, _ = simulate(plan.circuit, rng=RngStream(seed))
        # every qubit is in the GHZ state, so the vector itself is GHZ up to phase
        amps = state.amplitudes
        assert np.isclose(abs(amps[0]) ** 2 + abs(amps[-1]) ** 2, 1)
        assert np.isclose(abs(amps[0]), abs(amps[-1]))


def test_branch_weights_uniform():
    branches = enumerate_branches(build_method1(5).circuit)
    assert len(branches) == 8
    assert np.allclose([b.weight for b in branches], 1 / 8)


def test_invalid_sizes():
    with pytest.raises(InvalidR):
        build_method1(1)
    with pytest.raises(InvalidN):
        build_method2(5)
    with pytest.raises(InvalidN):
        build_method2(2)
    with pytest.raises(InvalidR):
        ghz_register(0)


def test_register_padding():
    assert ghz_register(1).parties == 1
    assert ghz_register(2, 1).parties == 3
    assert ghz_register(4, 1).parties == 4
    assert ghz_register(3, 2).parties == 4
    assert ghz_register(5, 2).parties == 6


def test_single_party_is_plus():
    state, _ = simulate(single_party().circuit)
    assert np.allclose(state.amplitudes, [2**-0.5, 2**-0.5])


def test_verify_ghz_rejects_product():
    assert verify_ghz(StateVector.zeros(3), (0, 1, 2)) == pytest.approx(0.5)
    plus = np.full(8, 8**-0.5)
    assert verify_ghz(StateVector.from_amplitudes(plus), (0, 1, 2)) == pytest.approx(0.25)
