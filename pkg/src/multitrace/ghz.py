"""Constant-depth GHZ preparation from Bell pairs, measurements and parity feedback.

Method 1 on ``2(r-1)`` qubits: Bell pairs ``(2i, 2i+1)``, a CNOT linking
neighbouring pairs, a measurement of each link target and a parity-controlled
X on the second qubit of every later pair.  The GHZ state lands on qubits
``0, 1, 3, 5, ..., 2r-3``.

Method 2 on ``n`` qubits (even, at least 4) reuses the measured qubits: they
are reset and refilled by a CNOT from their left neighbour, so all ``n``
qubits end up in the GHZ state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import CNOT, H, ConditionalX, Measure, QuantumCircuit, Reset
from .errors import InvalidN, InvalidR, ValidationError
from .statevector import StateVector


@dataclass(frozen=True)
class GhzPlan:
    r: int
    circuit: QuantumCircuit
    ghz_qubits: tuple[int, ...]
    method: int = 1
    measured: tuple[int, ...] = ()  # qubits measured during preparation

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits

    @property
    def parties(self) -> int:
        return len(self.ghz_qubits)


def _method1_circuit(r: int, num_qubits: int, prefix: str) -> tuple[QuantumCircuit, tuple[int, ...]]:
    c = QuantumCircuit(num_qubits)
    c = c.append_moment([H(2 * i) for i in range(r - 1)])
    c = c.append_moment([CNOT(2 * i, 2 * i + 1) for i in range(r - 1)])
    c = c.append_moment([CNOT(2 * k - 1, 2 * k) for k in range(1, r - 1)])
    c = c.append_moment([Measure(2 * k, f"{prefix}{k}") for k in range(1, r - 1)])
    # the second qubit of pair k carries the accumulated parity b1 ^ ... ^ b_{k-1}
    c = c.append_moment([ConditionalX(2 * k - 1, [f"{prefix}{j}" for j in range(1, k)]) for k in range(2, r)])
    return c, tuple(2 * k for k in range(1, r - 1))


def build_method1(r: int, prefix: str = "b") -> GhzPlan:
    """r-party GHZ state on ``2(r-1)`` qubits; ``r - 2`` mid-circuit measurements labelled ``b1..``."""
    if not isinstance(r, (int, np.integer)) or r < 2:
        raise InvalidR(f"r must be an integer >= 2, got {r!r}")
    r = int(r)
    c, measured = _method1_circuit(r, 2 * (r - 1), prefix)
    ghz = (0,) + tuple(2 * k - 1 for k in range(1, r))
    return GhzPlan(r, c.with_metadata(ghz="method1", r=r), ghz, 1, measured)


def build_method2(n: int, prefix: str = "b") -> GhzPlan:
    """n-party GHZ state on ``n`` qubits (n even, n >= 4)."""
    if not isinstance(n, (int, np.integer)) or n < 4 or n % 2:
        raise InvalidN(f"n must be an even integer >= 4, got {n!r}")
    n = int(n)
    r = n // 2 + 1
    c, measured = _method1_circuit(r, n, prefix)
    c = c.append_moment([Reset(q) for q in measured])
    c = c.append_moment([CNOT(q - 1, q) for q in measured])
    return GhzPlan(n, c.with_metadata(ghz="method2", n=n), tuple(range(n)), 2, measured)


def single_party() -> GhzPlan:
    """The one-party case: a lone ``|+>`` qubit."""
    c = QuantumCircuit(1).append_moment([H(0)])
    return GhzPlan(1, c.with_metadata(ghz="single"), (0,), 0, ())


def ghz_register(parties: int, method: int = 1) -> GhzPlan:
    """A GHZ plan with at least ``parties`` parties.

    The party count is padded (Method 1 to at least 3, Method 2 to the next
    even number, at least 4) so that every estimator circuit with two or more
    controls has the same gate depth.  Extra parties are measured like the
    others and leave the parity statistics unchanged.  One party is a ``|+>``.
    """
    if parties < 1:
        raise InvalidR(f"need at least one party, got {parties}")
    if parties == 1:
        return single_party()
    if method == 1:
        return build_method1(max(parties, 3))
    if method == 2:
        return build_method2(max(parties + parties % 2, 4))
    raise ValidationError(f"unknown GHZ method {method!r}")


def verify_ghz(state: StateVector, qubits) -> float:
    """Fidelity of the reduced state on ``qubits`` with ``(|0..0> + |1..1>)/sqrt(2)``.

    Global phase drops out because the overlap is taken against the reduced
    density matrix; when the other qubits are in a product state this equals
    ``|<GHZ|psi>|^2``.
    """
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits):
        raise ValidationError("qubits must be distinct")
    n = state.num_qubits
    t = state.amplitudes.reshape((2,) * n)
    # axis a holds qubit n-1-a; move the GHZ qubits to the front (first listed = slowest)
    axes = [n - 1 - q for q in qubits]
    rest = [a for a in range(n) if a not in axes]
    m = t.transpose(axes + rest).reshape(1 << len(qubits), -1)
    overlap = (m[0] + m[-1]) / np.sqrt(2)
    return float(np.vdot(overlap, overlap).real)
