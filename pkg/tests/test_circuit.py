import pytest

from multitrace.circuit import (
    CNOT,
    CSWAP,
    H,
    ConditionalX,
    Measure,
    Operation,
    QuantumCircuit,
    Reset,
    Sdg,
    X,
    parse_circuit,
    quantum_depth,
)
from multitrace.errors import (
    ArityMismatch,
    DuplicateTarget,
    ForwardClassicalReference,
    IndexOutOfRange,
    QubitCollision,
    ValidationError,
)
from multitrace.estimator import build_estimation_circuit
from multitrace.ghz import build_method1, build_method2


def test_two_qubit_bell_depth():
    c = QuantumCircuit(2).append_moment([H(0)]).append_moment([CNOT(0, 1)])
    assert quantum_depth(c) == (2, 0)


def test_collision_in_moment():
    with pytest.raises(QubitCollision):
        QuantumCircuit(3).append_moment([CNOT(0, 1), H(1)])


def test_out_of_range():
    with pytest.raises(IndexOutOfRange):
        QuantumCircuit(2).append_moment([H(2)])


def test_duplicate_target_and_arity():
    with pytest.raises(DuplicateTarget):
        CSWAP(0, 1, 1)
    with pytest.raises(ArityMismatch):
        Operation("CNOT", (0,))
    with pytest.raises(ValidationError):
        Operation("TOFFOLI", (0, 1, 2))


def test_forward_reference_rejected():
    with pytest.raises(ForwardClassicalReference):
        QuantumCircuit(2).append_moment([ConditionalX(1, ["a"])])
    with pytest.raises(ForwardClassicalReference):
        QuantumCircuit(2).append_moment([Measure(0, "a"), ConditionalX(1, ["a"])])


def test_duplicate_label_rejected():
    c = QuantumCircuit(2).append_moment([Measure(0, "a")])
    with pytest.raises(ValidationError):
        c.append_moment([Measure(1, "a")])


def test_empty_moment_is_noop():
    c = QuantumCircuit(2)
    assert c.append_moment([]) is c
    assert quantum_depth(c) == (0, 0)


def test_feedback_rounds_chain():
    c = QuantumCircuit(3)
    c = c.append_moment([Measure(0, "a")])
    c = c.append_moment([ConditionalX(1, ["a"])])
    c = c.append_moment([Measure(1, "b")])
    c = c.append_moment([ConditionalX(2, ["b"])])
    assert quantum_depth(c) == (0, 2)


def test_ghz_depths():
    assert quantum_depth(build_method1(2).circuit) == (2, 0)
    for r in range(3, 8):
        assert quantum_depth(build_method1(r).circuit) == (3, 1)
    assert quantum_depth(build_method2(6).circuit) == (4, 1)


@pytest.mark.parametrize("m,expected", [(2, (3, 0)), (3, (4, 0)), (4, (6, 1)), (9, (6, 1))])
def test_estimator_depth(m, expected):
    assert quantum_depth(build_estimation_circuit(m).circuit) == expected


def test_method2_estimator_depth():
    for m in (4, 6, 8):
        assert quantum_depth(build_estimation_circuit(m, ghz_method=2).circuit) == (7, 1)


def test_text_round_trip():
    c = QuantumCircuit(4)
    c = c.append_moment([H(0), X(3)])
    c = c.append_moment([CSWAP(0, 1, 2)])
    c = c.append_moment([Sdg(0), Measure(3, "m0")])
    c = c.append_moment([Reset(3), ConditionalX(2, ["m0"])])
    c = c.with_metadata(name="demo")
    back = parse_circuit(c.to_text())
    assert back == c
    assert back.to_text() == c.to_text()


def test_parse_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_circuit("# qubits 2\nH(0) banana")
    with pytest.raises(ValidationError):
        parse_circuit("H(0)")


def test_remap_and_then():
    c = QuantumCircuit(2).append_moment([CNOT(0, 1)])
    r = c.remap([2, 0], 3)
    assert r.moments[0].ops[0].targets == (2, 0)
    assert len(r.then(r)) == 2
    with pytest.raises(ValidationError):
        c.then(r)
