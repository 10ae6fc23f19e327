import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multitrace.circuit import quantum_depth
from multitrace.cyclic_shift import (
    adjoin_order,
    apply_permutation_matrix,
    build_controlled_shift,
    controls_needed,
    cycle,
    decompose_cycle,
    layer_slot_pairs,
    permutation_indices,
)
from multitrace.errors import InvalidM, TooLarge
from multitrace.statevector import StateVector, apply_gate


def test_m4_layers():
    layers = decompose_cycle(4)
    assert layers.layer1 == ((1, 4), (2, 3))
    assert layers.layer2 == ((2, 4),)
    assert adjoin_order(4).order == (1, 4, 2, 3)


def test_m5_order_puts_middle_last():
    assert adjoin_order(5).order == (1, 5, 2, 4, 3)


@settings(max_examples=30)
@given(st.integers(2, 40))
def test_composition_is_cycle(m):
    assert decompose_cycle(m).as_permutation() == cycle(m)


def test_layer_pairs_adjacent_and_disjoint():
    for m in range(2, 17):
        for pairs in layer_slot_pairs(m):
            flat = [s for pr in pairs for s in pr]
            assert len(flat) == len(set(flat))
            assert all(b - a == 1 for a, b in pairs)


def test_invalid_m():
    with pytest.raises(InvalidM):
        decompose_cycle(1)


def test_controls_needed():
    assert controls_needed(5, 3, "depth") == 2
    assert controls_needed(5, 3, "width") == 6


def test_permutation_matrix_small():
    P = apply_permutation_matrix(2, 2)
    # |i1 i2> -> |i2 i1> is the swap
    assert P.tolist() == [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
    assert apply_permutation_matrix(3, 2)[0b001, 0b010] == 1  # |010> -> |001>


def test_permutation_has_order_m():
    for m, d in ((3, 2), (4, 2), (3, 3)):
        perm = permutation_indices(m, d)
        x = np.arange(d**m)
        for _ in range(m):
            x = perm[x]
        assert np.array_equal(x, np.arange(d**m))


def test_dense_limit():
    with pytest.raises(TooLarge):
        apply_permutation_matrix(13, 2)


def _shift_on_basis(frag, labels_digits):
    """Run the fragment with all controls set on a computational basis input."""
    n = frag.circuit.num_qubits
    idx = sum(1 << c for c in frag.controls)
    for label, digits in labels_digits.items():
        for j, bit in enumerate(digits):
            idx |= bit << frag.register(label)[j]
    s = StateVector.basis(n, idx)
    for mom in frag.circuit.moments:
        for op in mom:
            s = apply_gate(s, op.kind, op.targets)
    out = int(np.argmax(np.abs(s.amplitudes)))
    return {lab: tuple((out >> q) & 1 for q in frag.register(lab)) for lab in labels_digits}


@pytest.mark.parametrize("mode", ["depth", "width"])
@pytest.mark.parametrize("m,p", [(2, 1), (3, 1), (4, 2), (5, 1), (6, 1), (3, 2)])
def test_fragment_moves_label_contents(m, p, mode):
    frag = build_controlled_shift(m, p, mode)
    for digits in itertools.islice(itertools.product(range(2**p), repeat=m), 40):
        bits = {lab: tuple((digits[lab - 1] >> j) & 1 for j in range(p)) for lab in range(1, m + 1)}
        out = _shift_on_basis(frag, bits)
        # label l receives the contents of label l - 1
        assert all(out[lab] == bits[(lab - 2) % m + 1] for lab in range(1, m + 1))


def test_fragment_depth():
    assert quantum_depth(build_controlled_shift(8, 1).circuit) == (2, 0)
    assert quantum_depth(build_controlled_shift(8, 3, "depth").circuit) == (6, 0)
    assert quantum_depth(build_controlled_shift(8, 3, "width").circuit) == (2, 0)
    assert len(build_controlled_shift(2, 1).circuit) == 1


def test_wiring_labels_match_layers():
    frag = build_controlled_shift(6, 1)
    layers = decompose_cycle(6)
    got = {tuple(sorted(w.labels)) for w in frag.wiring}
    want = {tuple(sorted(pr)) for pr in layers.layer1 + layers.layer2}
    assert got == want
