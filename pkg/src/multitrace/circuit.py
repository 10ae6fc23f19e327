"""Moment-based circuit representation, depth accounting and text serialization.

A circuit is an immutable sequence of moments; each moment holds operations on
pairwise disjoint qubits.  Builders return new circuits.

Text format, one moment per line, ops separated by spaces::

    # qubits 4
    H(0) H(2)
    CNOT(0,1) CNOT(2,3)
    MEASURE(2;b1)
    COND_X(3;b1)

Qubit 0 is the least significant bit of amplitude indices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    ArityMismatch,
    DuplicateTarget,
    ForwardClassicalReference,
    IndexOutOfRange,
    QubitCollision,
    ValidationError,
)

GATE_KINDS = ("H", "X", "S_DAGGER", "CNOT", "CSWAP")
FEEDBACK_KINDS = ("MEASURE", "RESET", "COND_X")
ARITY = {"H": 1, "X": 1, "S_DAGGER": 1, "CNOT": 2, "CSWAP": 3, "MEASURE": 1, "RESET": 1, "COND_X": 1}


@dataclass(frozen=True)
class Operation:
    kind: str
    targets: tuple[int, ...]
    label: str | None = None
    parity_of: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValidationError(f"unknown operation kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "parity_of", tuple(self.parity_of))
        if len(self.targets) != ARITY[self.kind]:
            raise ArityMismatch(f"{self.kind} takes {ARITY[self.kind]} target(s), got {len(self.targets)}")
        if len(set(self.targets)) != len(self.targets):
            raise DuplicateTarget(f"{self.kind} has repeated targets {self.targets}")
        if self.kind == "MEASURE" and not self.label:
            raise ValidationError("MEASURE needs a label")
        if self.kind == "COND_X" and not self.parity_of:
            raise ValidationError("COND_X needs at least one classical label")

    @property
    def is_gate(self) -> bool:
        return self.kind in GATE_KINDS

    def remap(self, mapping: Mapping[int, int] | Sequence[int]) -> "Operation":
        return Operation(self.kind, tuple(mapping[t] for t in self.targets), self.label, self.parity_of)

    def to_token(self) -> str:
        t = ",".join(str(q) for q in self.targets)
        if self.kind == "MEASURE":
            return f"MEASURE({t};{self.label})"
        if self.kind == "COND_X":
            return f"COND_X({t};{','.join(self.parity_of)})"
        return f"{self.kind}({t})"


def H(q: int) -> Operation:
    return Operation("H", (q,))


def X(q: int) -> Operation:
    return Operation("X", (q,))


def Sdg(q: int) -> Operation:
    return Operation("S_DAGGER", (q,))


def CNOT(control: int, target: int) -> Operation:
    return Operation("CNOT", (control, target))


def CSWAP(control: int, a: int, b: int) -> Operation:
    return Operation("CSWAP", (control, a, b))


def Measure(q: int, label: str) -> Operation:
    return Operation("MEASURE", (q,), label=label)


def Reset(q: int) -> Operation:
    return Operation("RESET", (q,))


def ConditionalX(q: int, parity_of: Iterable[str]) -> Operation:
    return Operation("COND_X", (q,), parity_of=tuple(parity_of))


@dataclass(frozen=True)
class Moment:
    ops: tuple[Operation, ...]

    @property
    def qubits(self) -> frozenset[int]:
        return frozenset(q for op in self.ops for q in op.targets)

    @property
    def has_gate(self) -> bool:
        return any(op.is_gate for op in self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def to_line(self) -> str:
        return " ".join(op.to_token() for op in self.ops)


@dataclass(frozen=True)
class QuantumCircuit:
    num_qubits: int
    moments: tuple[Moment, ...] = ()
    metadata: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.num_qubits < 0:
            raise ValidationError("num_qubits must be non-negative")

    def __len__(self) -> int:
        return len(self.moments)

    def __iter__(self):
        return iter(self.moments)

    @property
    def measurement_labels(self) -> tuple[str, ...]:
        return tuple(op.label for mom in self.moments for op in mom if op.kind == "MEASURE")

    def operations(self) -> list[Operation]:
        return [op for mom in self.moments for op in mom]

    def append_moment(self, ops: Iterable[Operation]) -> "QuantumCircuit":
        return append_moment(self, ops)

    def with_metadata(self, **labels: str) -> "QuantumCircuit":
        meta = dict(self.metadata)
        meta.update({k: str(v) for k, v in labels.items()})
        return QuantumCircuit(self.num_qubits, self.moments, tuple(sorted(meta.items())))

    def remap(self, mapping: Mapping[int, int] | Sequence[int], num_qubits: int) -> "QuantumCircuit":
        """Relabel qubits ``q -> mapping[q]`` on a register of ``num_qubits``."""
        out = QuantumCircuit(num_qubits, (), self.metadata)
        for mom in self.moments:
            out = append_moment(out, [op.remap(mapping) for op in mom])
        return out

    def then(self, other: "QuantumCircuit") -> "QuantumCircuit":
        """Concatenate moments of ``other`` (same register) after this circuit."""
        if other.num_qubits != self.num_qubits:
            raise ValidationError("circuits act on registers of different size")
        out = self
        for mom in other.moments:
            out = append_moment(out, mom.ops)
        return out

    def to_text(self) -> str:
        lines = [f"# qubits {self.num_qubits}"]
        lines += [f"# {k} {v}" for k, v in self.metadata]
        lines += [mom.to_line() for mom in self.moments]
        return "\n".join(lines) + "\n"


def append_moment(c: QuantumCircuit, ops: Iterable[Operation]) -> QuantumCircuit:
    """Return ``c`` extended by one moment; an empty ``ops`` leaves ``c`` unchanged."""
    ops = tuple(ops)
    if not ops:
        return c
    seen: set[int] = set()
    known = set(c.measurement_labels)
    new_labels: set[str] = set()
    for op in ops:
        for q in op.targets:
            if not 0 <= q < c.num_qubits:
                raise IndexOutOfRange(f"{op.to_token()}: qubit {q} outside 0..{c.num_qubits - 1}")
            if q in seen:
                raise QubitCollision(f"qubit {q} used twice in one moment ({op.to_token()})")
            seen.add(q)
        if op.kind == "COND_X":
            missing = [lab for lab in op.parity_of if lab not in known]
            if missing:
                raise ForwardClassicalReference(f"{op.to_token()} references unmeasured label(s) {missing}")
        if op.kind == "MEASURE":
            if op.label in known or op.label in new_labels:
                raise ValidationError(f"measurement label {op.label!r} used twice")
            new_labels.add(op.label)
    return QuantumCircuit(c.num_qubits, c.moments + (Moment(ops),), c.metadata)


def quantum_depth(c: QuantumCircuit) -> tuple[int, int]:
    """``(gate_depth, feedback_rounds)``.

    ``gate_depth`` counts moments holding at least one unitary gate.  A
    conditional X sits one feedback round above the latest round among the
    measurements it reads; a measurement inherits the largest round completed
    before its moment.
    """
    gate_depth = sum(1 for mom in c.moments if mom.has_gate)
    label_round: dict[str, int] = {}
    completed = 0
    rounds = 0
    for mom in c.moments:
        this = completed
        for op in mom:
            if op.kind == "MEASURE":
                label_round[op.label] = completed
            elif op.kind == "COND_X":
                r = 1 + max(label_round[lab] for lab in op.parity_of)
                this = max(this, r)
        completed = this
        rounds = max(rounds, this)
    return gate_depth, rounds


_TOKEN = re.compile(r"([A-Z_]+)\(([^;()]*)(?:;([^()]*))?\)")


def parse_circuit(text: str, num_qubits: int | None = None) -> QuantumCircuit:
    """Inverse of :meth:`QuantumCircuit.to_text`."""
    meta: dict[str, str] = {}
    lines: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(" ")
            if key == "qubits" and num_qubits is None:
                num_qubits = int(val)
            elif key != "qubits":
                meta[key] = val
            continue
        lines.append(line)
    if num_qubits is None:
        raise ValidationError("qubit count missing (no '# qubits N' header)")
    c = QuantumCircuit(num_qubits, (), tuple(sorted(meta.items())))
    for line in lines:
        ops = []
        pos = 0
        for m in _TOKEN.finditer(line):
            if line[pos:m.start()].strip():
                raise ValidationError(f"cannot parse {line[pos:m.start()]!r}")
            pos = m.end()
            kind, targets, param = m.group(1), m.group(2), m.group(3)
            qs = tuple(int(t) for t in targets.split(",") if t.strip())
            if kind == "MEASURE":
                ops.append(Operation(kind, qs, label=param))
            elif kind == "COND_X":
                ops.append(Operation(kind, qs, parity_of=tuple(param.split(","))))
            else:
                ops.append(Operation(kind, qs))
        if line[pos:].strip():
            raise ValidationError(f"cannot parse {line[pos:]!r}")
        c = append_moment(c, ops)
    return c


def simulate(c: QuantumCircuit, input_state=None, rng=None, forced: Mapping[str, int] | None = None):
    """Run ``c`` once on ``input_state`` (a StateVector; default ``|0...0>``).

    Returns ``(final_state, record)`` where ``record`` maps measurement labels to bits.
    ``forced`` pins the outcome of selected measurements instead of sampling them.
    """
    from .statevector import simulate_single

    return simulate_single(c, input_state, rng, forced)
