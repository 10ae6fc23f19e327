"""Statevector simulation with mid-circuit measurement, reset and classical feedback.

Two entry points share the same in-place kernels:

* the single-shot API (:class:`StateVector`, :func:`apply_gate`,
  :func:`measure_qubit`, :func:`reset_qubit`, :func:`apply_conditional_x`,
  :func:`simulate_single`), which mirrors one physical run;
* :func:`run_shots`, which executes many shots at once.  Shots with the same
  history (sampled input components and mid-circuit outcomes) share one
  branch state, so the cost scales with the number of distinct branches rather
  than the number of shots.  A trailing block of measurements is sampled from
  each branch's marginal distribution without collapsing.

Draw layout per shot: one uniform per input factor, then one per MEASURE or
RESET in circuit order.  Bit 0 is chosen when ``u < Pr(0)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import ARITY, Operation, QuantumCircuit
from .errors import IndexOutOfRange, UnknownLabel, ValidationError, ZeroNormBranch
from .rng import RngStream, uniform_block

NORM_TOL = 1e-9
ZERO_BRANCH = 1e-15
MAX_QUBITS = 26
MAX_AMPLITUDES = 1 << 23

_S = 1 / np.sqrt(2)

GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _S,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "S_DAGGER": np.array([[1, 0], [0, -1j]], dtype=complex),
}


def gate_matrix(kind: str) -> np.ndarray:
    """Dense unitary in the little-endian order of the op's targets (target 0 = LSB)."""
    if kind in GATE_MATRICES:
        return GATE_MATRICES[kind]
    if kind == "CNOT":  # targets (c, t): c is bit 0, t is bit 1
        perm = [0, 3, 2, 1]
    elif kind == "CSWAP":  # targets (c, a, b): bits 0, 1, 2
        perm = list(range(8))
        perm[0b011], perm[0b101] = 0b101, 0b011
    else:
        raise ValidationError(f"{kind} is not a unitary gate")
    return np.eye(len(perm), dtype=complex)[perm]


# kernels: x has shape (G, 2**n), C-contiguous, modified in place


def _half(x: np.ndarray, n: int, q: int) -> np.ndarray:
    return x.reshape(x.shape[0], 1 << (n - q - 1), 2, 1 << q)


def _index(n: int, fixed: Mapping[int, int]) -> tuple:
    idx = [slice(None)] * (n + 1)
    for q, b in fixed.items():
        idx[n - q] = b
    return tuple(idx)


def _swap(x: np.ndarray, n: int, fa: Mapping[int, int], fb: Mapping[int, int]) -> None:
    v = x.reshape((x.shape[0],) + (2,) * n)
    ia, ib = _index(n, fa), _index(n, fb)
    tmp = v[ia].copy()
    v[ia] = v[ib]
    v[ib] = tmp


def _apply(x: np.ndarray, n: int, kind: str, t: Sequence[int]) -> None:
    if kind == "H":
        v = _half(x, n, t[0])
        a = v[:, :, 0, :].copy()
        b = v[:, :, 1, :]
        v[:, :, 0, :] = (a + b) * _S
        v[:, :, 1, :] = (a - b) * _S
    elif kind == "S_DAGGER":
        _half(x, n, t[0])[:, :, 1, :] *= -1j
    elif kind in ("X", "COND_X"):
        _swap(x, n, {t[0]: 0}, {t[0]: 1})
    elif kind == "CNOT":
        _swap(x, n, {t[0]: 1, t[1]: 0}, {t[0]: 1, t[1]: 1})
    elif kind == "CSWAP":
        _swap(x, n, {t[0]: 1, t[1]: 0, t[2]: 1}, {t[0]: 1, t[1]: 1, t[2]: 0})
    else:
        raise ValidationError(f"{kind} is not a unitary gate")


def _probs(x: np.ndarray, n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    v = _half(x, n, q)
    w = v.real**2 + v.imag**2
    return w[:, :, 0, :].sum(axis=(1, 2)), w[:, :, 1, :].sum(axis=(1, 2))


def _collapse(x: np.ndarray, n: int, q: int, bits: np.ndarray, probs: np.ndarray) -> None:
    v = _half(x, n, q)
    v[bits == 0, :, 1, :] = 0
    v[bits == 1, :, 0, :] = 0
    x /= np.sqrt(probs)[:, None]


def _check_targets(n: int, kind: str, targets: Sequence[int]) -> tuple[int, ...]:
    op = Operation(kind, tuple(targets), label="_" if kind == "MEASURE" else None,
                   parity_of=("_",) if kind == "COND_X" else ())
    for q in op.targets:
        if not 0 <= q < n:
            raise IndexOutOfRange(f"qubit {q} outside 0..{n - 1}")
    return op.targets


# single-shot API


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray = field(repr=False)
    classical_bits: tuple[tuple[int, str], ...] = ()

    @classmethod
    def zeros(cls, num_qubits: int) -> "StateVector":
        return cls.basis(num_qubits, 0)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        if num_qubits > MAX_QUBITS:
            raise ValidationError(f"{num_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit")
        a = np.zeros(1 << num_qubits, dtype=complex)
        a[index] = 1
        return cls(num_qubits, a)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        a = np.array(amplitudes, dtype=complex).ravel()
        n = a.size.bit_length() - 1
        if a.size != 1 << n:
            raise ValidationError(f"length {a.size} is not a power of 2")
        if normalize:
            a = a / np.linalg.norm(a)
        elif abs(np.vdot(a, a).real - 1) > NORM_TOL:
            raise ValidationError("amplitudes are not normalized")
        return cls(n, a)

    @property
    def record(self) -> dict[str, int]:
        return {label: bit for bit, label in self.classical_bits}

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _replace(self, amplitudes, classical_bits=None) -> "StateVector":
        bits = self.classical_bits if classical_bits is None else classical_bits
        return StateVector(self.num_qubits, amplitudes, bits)


def apply_gate(state: StateVector, gate: str, targets: Sequence[int]) -> StateVector:
    """Apply one of H, X, S_DAGGER, CNOT(c, t), CSWAP(c, a, b); returns a new state."""
    if gate not in ARITY or gate in ("MEASURE", "RESET", "COND_X"):
        raise ValidationError(f"{gate} is not a unitary gate")
    t = _check_targets(state.num_qubits, gate, targets)
    x = state.amplitudes.copy()[None, :]
    _apply(x, state.num_qubits, gate, t)
    return state._replace(x[0])


def _measure_one(state: StateVector, q: int, u: float, forced: int | None):
    x = state.amplitudes.copy()[None, :]
    p0, p1 = _probs(x, state.num_qubits, q)
    cond0 = p0[0] / (p0[0] + p1[0])
    bit = int(u >= cond0) if forced is None else int(forced)
    chosen = cond0 if bit == 0 else 1 - cond0
    if chosen < ZERO_BRANCH:
        raise ZeroNormBranch(f"qubit {q}: outcome {bit} has probability {chosen:.3e}")
    _collapse(x, state.num_qubits, q, np.array([bit]), np.array([p0[0] if bit == 0 else p1[0]]))
    return bit, x[0]


def measure_qubit(state: StateVector, q: int, rng: RngStream, label: str,
                  forced: int | None = None) -> tuple[int, StateVector]:
    _check_targets(state.num_qubits, "MEASURE", (q,))
    bit, amps = _measure_one(state, q, rng.uniform(), forced)
    return bit, state._replace(amps, state.classical_bits + ((bit, label),))


def reset_qubit(state: StateVector, q: int, rng: RngStream) -> StateVector:
    _check_targets(state.num_qubits, "RESET", (q,))
    bit, amps = _measure_one(state, q, rng.uniform(), None)
    if bit:
        x = amps[None, :]
        _apply(x, state.num_qubits, "X", (q,))
    return state._replace(amps)


def apply_conditional_x(state: StateVector, q: int, parity_of: Sequence[str]) -> StateVector:
    _check_targets(state.num_qubits, "COND_X", (q,))
    rec = state.record
    missing = [lab for lab in parity_of if lab not in rec]
    if missing:
        raise UnknownLabel(f"labels {missing} not in the classical record")
    if sum(rec[lab] for lab in parity_of) % 2:
        return apply_gate(state, "X", (q,))
    return state


def simulate_single(c: QuantumCircuit, input_state: StateVector | None = None,
                    rng: RngStream | None = None, forced: Mapping[str, int] | None = None):
    state = StateVector.zeros(c.num_qubits) if input_state is None else input_state
    if state.num_qubits != c.num_qubits:
        raise ValidationError(f"input has {state.num_qubits} qubits, circuit has {c.num_qubits}")
    rng = RngStream(0) if rng is None else rng
    forced = dict(forced or {})
    for mom in c.moments:
        for op in mom:
            if op.kind == "MEASURE":
                _, state = measure_qubit(state, op.targets[0], rng, op.label, forced.get(op.label))
            elif op.kind == "RESET":
                state = reset_qubit(state, op.targets[0], rng)
            elif op.kind == "COND_X":
                state = apply_conditional_x(state, op.targets[0], op.parity_of)
            else:
                state = apply_gate(state, op.kind, op.targets)
    return state, state.record


# batched execution


@dataclass(frozen=True)
class Factor:
    """Input sub-register prepared in ``vectors[i]`` with probability ``weights[i]``.

    In each vector, bit ``j`` of the index is qubit ``qubits[j]``.
    """

    qubits: tuple[int, ...]
    weights: np.ndarray
    vectors: np.ndarray


def product_state(n: int, factors: Sequence[Factor], combo: Sequence[int]) -> np.ndarray:
    t = np.ones((), dtype=complex)
    axes: list[int] = []
    for f, ci in zip(factors, combo):
        k = len(f.qubits)
        t = np.multiply.outer(t, f.vectors[ci].reshape((2,) * k))
        axes += [f.qubits[k - 1 - a] for a in range(k)]
    for q in range(n):
        if q not in axes:
            t = np.multiply.outer(t, np.array([1, 0], dtype=complex))
            axes.append(q)
    if sorted(axes) != list(range(n)):
        raise ValidationError("input factors overlap or exceed the register")
    perm = [axes.index(q) for q in range(n - 1, -1, -1)]
    return np.ascontiguousarray(t.transpose(perm)).reshape(-1)


@dataclass
class ShotRecord:
    labels: tuple[str, ...]
    bits: np.ndarray  # (shots, len(labels)) uint8

    def column(self, label: str) -> np.ndarray:
        return self.bits[:, self.labels.index(label)]

    def parity(self, labels: Sequence[str]) -> np.ndarray:
        cols = [self.labels.index(lab) for lab in labels]
        return (self.bits[:, cols].sum(axis=1) % 2).astype(np.int8)


def _terminal_start(c: QuantumCircuit) -> int:
    """Index of the first moment of the trailing measurement-only block."""
    t = len(c.moments)
    seen: set[int] = set()
    while t > 0:
        mom = c.moments[t - 1]
        if any(op.kind != "MEASURE" for op in mom) or seen & mom.qubits:
            break
        seen |= mom.qubits
        t -= 1
    return t


def draw_count(c: QuantumCircuit, factors: Sequence[Factor] = ()) -> int:
    return len(factors) + sum(1 for op in c.operations() if op.kind in ("MEASURE", "RESET"))


def _split(states, branch, bits_new):
    key = branch.astype(np.int64) * 2 + bits_new
    uniq, inv = np.unique(key, return_inverse=True)
    return uniq // 2, (uniq % 2).astype(np.uint8), inv.ravel()


def _run_chunk(c: QuantumCircuit, factors, u: np.ndarray, forced, terminal: bool):
    n = c.num_qubits
    labels = c.measurement_labels
    col = {lab: i for i, lab in enumerate(labels)}
    shots = u.shape[0]
    bits = np.zeros((shots, len(labels)), dtype=np.uint8)

    if factors:
        picks = []
        for j, f in enumerate(factors):
            cdf = np.cumsum(f.weights)
            idx = np.searchsorted(cdf, u[:, j] * cdf[-1], side="right")
            picks.append(np.minimum(idx, len(f.weights) - 1))
        combos, branch = np.unique(np.stack(picks, axis=1), axis=0, return_inverse=True)
        branch = branch.ravel()
        states = np.stack([product_state(n, factors, cb) for cb in combos])
    else:
        states = product_state(n, [], [])[None, :]
        branch = np.zeros(shots, dtype=np.int64)
    d = len(factors)

    stop = _terminal_start(c) if terminal else len(c.moments)
    for mom in c.moments[:stop]:
        for op in mom:
            q = op.targets[0]
            if op.kind in ("MEASURE", "RESET"):
                p0, p1 = _probs(states, n, q)
                cond0 = p0 / (p0 + p1)
                if op.kind == "MEASURE" and op.label in forced:
                    b = np.full(shots, forced[op.label], dtype=np.uint8)
                else:
                    b = (u[:, d] >= cond0[branch]).astype(np.uint8)
                d += 1
                chosen = np.where(b == 0, cond0[branch], 1 - cond0[branch])
                if np.any(chosen < ZERO_BRANCH):
                    raise ZeroNormBranch(f"{op.to_token()}: sampled a branch of probability {chosen.min():.3e}")
                parent, pb, branch = _split(states, branch, b)
                states = states[parent]
                _collapse(states, n, q, pb, np.where(pb == 0, p0[parent], p1[parent]))
                if op.kind == "MEASURE":
                    bits[:, col[op.label]] = b
                elif pb.any():
                    sub = states[pb == 1]
                    _apply(sub, n, "X", (q,))
                    states[pb == 1] = sub
            elif op.kind == "COND_X":
                par = (bits[:, [col[lab] for lab in op.parity_of]].sum(axis=1) % 2).astype(np.uint8)
                parent, pb, branch = _split(states, branch, par)
                states = states[parent]
                if pb.any():
                    sub = states[pb == 1]
                    _apply(sub, n, "X", (q,))
                    states[pb == 1] = sub
            else:
                _apply(states, n, op.kind, op.targets)

    tail = [op for mom in c.moments[stop:] for op in mom]
    if tail:
        qs = [op.targets[0] for op in tail]
        k = len(qs)
        w = (states.real**2 + states.imag**2).reshape((states.shape[0],) + (2,) * n)
        other = tuple(1 + n - 1 - q for q in range(n) if q not in qs)
        marg = w.sum(axis=other) if other else w
        # remaining axes are in descending qubit order; reorder to the measurement order
        remaining = sorted(qs, reverse=True)
        marg = marg.transpose([0] + [1 + remaining.index(q) for q in qs]).reshape(states.shape[0], -1)
        tables = [marg]
        for j in range(k - 1, 0, -1):
            tables.insert(0, tables[0].reshape(states.shape[0], -1, 2).sum(axis=2))
        prefix = np.zeros(shots, dtype=np.int64)
        for j, op in enumerate(tail):
            t = tables[j]
            p0 = t[branch, prefix * 2]
            p1 = t[branch, prefix * 2 + 1]
            cond0 = p0 / (p0 + p1)
            if op.label in forced:
                b = np.full(shots, forced[op.label], dtype=np.uint8)
            else:
                b = (u[:, d] >= cond0).astype(np.uint8)
            d += 1
            chosen = np.where(b == 0, cond0, 1 - cond0)
            if np.any(chosen < ZERO_BRANCH):
                raise ZeroNormBranch(f"{op.to_token()}: sampled a branch of probability {chosen.min():.3e}")
            bits[:, col[op.label]] = b
            prefix = prefix * 2 + b
    return bits


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("MULTITRACE_THREADS", "1")))
    except ValueError:
        return 1


def _chunk_size(c: QuantumCircuit, factors, shots: int) -> int:
    n_ops = sum(1 for op in c.operations() if op.kind in ("MEASURE", "RESET", "COND_X"))
    combos = 1
    for f in factors:
        combos *= len(f.weights)
    max_branches = combos * (1 << min(n_ops, 40))
    cap = max(1, MAX_AMPLITUDES >> c.num_qubits)
    size = 1 << 16 if max_branches <= cap else cap
    return max(1, min(size, shots))


def run_shots(c: QuantumCircuit, factors: Sequence[Factor], seed: int, shot_indices,
              stream: int = 0, forced: Mapping[str, int] | None = None,
              threads: int | None = None, chunk: int | None = None) -> ShotRecord:
    """Execute ``c`` once per shot index; returns every shot's measurement record.

    Results depend only on ``(seed, stream, shot_index)`` and not on chunking or threads.
    """
    if c.num_qubits > MAX_QUBITS:
        raise ValidationError(f"{c.num_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit")
    shots = np.asarray(shot_indices, dtype=np.uint64).ravel()
    forced = dict(forced or {})
    ndraw = draw_count(c, factors)
    size = chunk or _chunk_size(c, factors, len(shots))
    pieces = [shots[i:i + size] for i in range(0, len(shots), size)]

    def work(piece):
        u = uniform_block(seed, piece, max(ndraw, 1), stream)
        return _run_chunk(c, factors, u, forced, terminal=True)

    threads = thread_count() if threads is None else threads
    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, pieces))
    else:
        parts = [work(p) for p in pieces]
    labels = c.measurement_labels
    bits = np.concatenate(parts) if parts else np.zeros((0, len(labels)), dtype=np.uint8)
    return ShotRecord(labels, bits)


@dataclass
class Branch:
    weight: float
    record: dict[str, int]
    amplitudes: np.ndarray = field(repr=False)


def enumerate_branches(c: QuantumCircuit, factors: Sequence[Factor] = (),
                       input_state: StateVector | None = None,
                       forced: Mapping[str, int] | None = None,
                       stop: int | None = None) -> list[Branch]:
    """Exact branch expansion: every measurement / reset splits into both outcomes.

    Branch weights multiply the input component weights by the Born
    probabilities.  ``stop`` ends the expansion before that moment index.
    """
    n = c.num_qubits
    forced = dict(forced or {})
    if input_state is not None:
        start = [(1.0, {}, input_state.amplitudes.copy())]
    else:
        grids = np.meshgrid(*[np.arange(len(f.weights)) for f in factors], indexing="ij")
        combos = np.stack([g.ravel() for g in grids], axis=1) if factors else np.zeros((1, 0), dtype=int)
        start = []
        for cb in combos:
            w = float(np.prod([f.weights[i] for f, i in zip(factors, cb)]))
            start.append((w, {}, product_state(n, factors, cb)))
    branches = start
    for mom in c.moments[:stop]:
        for op in mom:
            nxt = []
            for w, rec, amps in branches:
                x = amps[None, :].copy()
                q = op.targets[0]
                if op.kind in ("MEASURE", "RESET"):
                    p0, p1 = _probs(x, n, q)
                    tot = p0[0] + p1[0]
                    outcomes = (0, 1)
                    if op.kind == "MEASURE" and op.label in forced:
                        outcomes = (forced[op.label],)
                    for b in outcomes:
                        pb = (p0[0] if b == 0 else p1[0])
                        if pb / tot < ZERO_BRANCH:
                            continue
                        y = x.copy()
                        _collapse(y, n, q, np.array([b]), np.array([pb]))
                        r = dict(rec)
                        if op.kind == "MEASURE":
                            r[op.label] = b
                        elif b:
                            _apply(y, n, "X", (q,))
                        nxt.append((w * pb / tot, r, y[0]))
                elif op.kind == "COND_X":
                    if sum(rec[lab] for lab in op.parity_of) % 2:
                        _apply(x, n, "X", (q,))
                    nxt.append((w, rec, x[0]))
                else:
                    _apply(x, n, op.kind, op.targets)
                    nxt.append((w, rec, x[0]))
            branches = nxt
    return [Branch(w, rec, amps) for w, rec, amps in branches]


def exact_distribution(c: QuantumCircuit, factors: Sequence[Factor] = (),
                       labels: Sequence[str] | None = None) -> dict[tuple[int, ...], float]:
    """Exact joint distribution of the named measurement labels (default: all).

    The trailing measurement block is read off each branch's marginal instead
    of being expanded, which keeps wide readouts cheap.
    """
    labels = tuple(c.measurement_labels if labels is None else labels)
    n = c.num_qubits
    stop = _terminal_start(c)
    tail = [op for mom in c.moments[stop:] for op in mom]
    qs = [op.targets[0] for op in tail]
    dist: dict[tuple[int, ...], float] = {}
    for br in enumerate_branches(c, factors, stop=stop):
        w = np.abs(br.amplitudes.reshape((2,) * n)) ** 2 if n else np.ones(())
        other = tuple(n - 1 - q for q in range(n) if q not in qs)
        marg = w.sum(axis=other) if other else w
        remaining = sorted(qs, reverse=True)
        marg = marg.transpose([remaining.index(q) for q in qs]) if qs else marg
        for idx in zip(*np.nonzero(marg > 0)) if qs else [()]:
            rec = dict(br.record)
            rec.update({op.label: int(b) for op, b in zip(tail, idx)})
            key = tuple(rec[lab] for lab in labels)
            dist[key] = dist.get(key, 0.0) + br.weight * float(marg[idx] if qs else 1.0)
    return dist
