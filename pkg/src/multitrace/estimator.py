"""Shot-based estimation of ``Tr[rho_1 rho_2 ... rho_m]``.

Each shot prepares a GHZ control register, loads the states, applies the
controlled cyclic shift, rotates the controls to the X basis (with an extra
S-dagger on the first party for the imaginary part) and returns the parity of
all control readouts as ``+1`` / ``-1``.  The shot mean is an unbiased
estimate of the real or imaginary part.

The shift moves label ``l - 1`` into label ``l``; its trace against
``sigma_1 ⊗ ... ⊗ sigma_m`` is ``Tr[sigma_m ... sigma_1]``.  The register
with label ``l`` therefore holds ``rho_{m+1-l}`` so that the estimate comes
out as ``Tr[rho_1 ... rho_m]`` rather than its conjugate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import oracle
from .circuit import H, Measure, QuantumCircuit, Sdg
from .cyclic_shift import adjoin_order, controls_needed, shift_moments
from .errors import InvalidM, InvalidParams, ValidationError
from .ghz import ghz_register
from .linalg import DensityMatrix, spectral_decompose, validate_density_matrix
from .rng import STREAM_IMAG, STREAM_REAL, RngStream
from .statevector import (
    Factor,
    StateVector,
    exact_distribution,
    product_state,
    run_shots,
    simulate_single,
)

PARTS = ("real", "imag")


def hoeffding_shots(epsilon: float, delta: float, M: float = 2.0) -> int:
    """Samples for an ``epsilon``-accurate mean of variables in a range of width ``M``.

    >>> hoeffding_shots(0.1, 0.05, 2)
    738
    """
    if not epsilon > 0 or not 0 < delta < 1 or not M > 0:
        raise InvalidParams(f"need epsilon > 0, 0 < delta < 1, M > 0 (got {epsilon}, {delta}, {M})")
    return math.ceil(M * M / (2 * epsilon * epsilon) * math.log(2 / delta))


@dataclass
class EstimationRequest:
    states: Sequence
    epsilon: float = 0.1
    delta: float = 0.05
    mode: str = "depth"
    seed: int = 0
    ghz_method: int = 1
    shots: int | None = None  # overrides the Hoeffding count when set

    def __post_init__(self):
        self.states = [validate_density_matrix(s) for s in self.states]
        if len(self.states) < 2:
            raise InvalidM(f"need m >= 2 states, got {len(self.states)}")
        dims = {s.dim for s in self.states}
        if len(dims) != 1:
            raise ValidationError(f"states have different dimensions {sorted(dims)}")
        if self.mode not in ("depth", "width"):
            raise ValidationError(f"mode must be 'depth' or 'width', got {self.mode!r}")
        if self.ghz_method not in (1, 2):
            raise ValidationError(f"ghz_method must be 1 or 2, got {self.ghz_method!r}")
        if self.shots is None:
            self.shots_per_part()
        elif self.shots < 1:
            raise InvalidParams("shots must be positive")

    @property
    def m(self) -> int:
        return len(self.states)

    @property
    def p(self) -> int:
        return self.states[0].num_qubits

    def shots_per_part(self) -> int:
        if self.shots is not None:
            return int(self.shots)
        return hoeffding_shots(self.epsilon / math.sqrt(2), self.delta / 2, 2)


@dataclass(frozen=True)
class EstimationCircuit:
    circuit: QuantumCircuit
    m: int
    p: int
    part: str
    mode: str
    parties: tuple[int, ...]  # measured GHZ qubits
    labels: tuple[str, ...]  # their measurement labels
    registers: dict = field(repr=False)  # state label -> data qubits (bit j first)
    controls: int = 0  # number of parties that drive CSWAPs

    def factors(self, states: Sequence[DensityMatrix]) -> list[Factor]:
        """Input factors loading ``states`` (user order) into the registers."""
        out = []
        for label in range(1, self.m + 1):
            dec = spectral_decompose(states[self.m - label])
            out.append(Factor(self.registers[label], dec.weights, dec.vectors))
        return out


def build_estimation_circuit(m: int, p: int = 1, part: str = "real", mode: str = "depth",
                             ghz_method: int = 1) -> EstimationCircuit:
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise InvalidM(f"m must be an integer >= 2, got {m!r}")
    if part not in PARTS:
        raise ValidationError(f"part must be 'real' or 'imag', got {part!r}")
    k = controls_needed(m, p, mode)
    plan = ghz_register(k, ghz_method)
    nc = plan.num_qubits
    parties = plan.ghz_qubits
    data = {(s, j): nc + (s - 1) * p + j for s in range(1, m + 1) for j in range(p)}
    c = QuantumCircuit(nc + m * p)
    for mom in plan.circuit.moments:
        c = c.append_moment(mom.ops)
    moments, _ = shift_moments(m, p, mode, parties[:k], lambda s, j: data[(s, j)])
    for ops in moments:
        c = c.append_moment(ops)
    if part == "imag":
        c = c.append_moment([Sdg(parties[0])])
    c = c.append_moment([H(q) for q in parties])
    labels = tuple(f"x{i}" for i in range(len(parties)))
    c = c.append_moment([Measure(q, lab) for q, lab in zip(parties, labels)])
    order = adjoin_order(m)
    registers = {lab: tuple(data[(order.slot_of(lab), j)] for j in range(p)) for lab in range(1, m + 1)}
    c = c.with_metadata(circuit="trace_estimation", m=m, p=p, part=part, mode=mode, ghz_method=ghz_method)
    return EstimationCircuit(c, m, p, part, mode, tuple(parties), labels, registers, k)


def _circuit_for(request: EstimationRequest, part: str) -> EstimationCircuit:
    return build_estimation_circuit(request.m, request.p, part, request.mode, request.ghz_method)


def run_shot_parity(request: EstimationRequest, part: str, rng: RngStream) -> int:
    """One circuit execution; ``+1`` for even control parity, ``-1`` for odd."""
    ec = _circuit_for(request, part)
    factors = ec.factors(request.states)
    combo = []
    for f in factors:
        cdf = np.cumsum(f.weights)
        combo.append(min(int(np.searchsorted(cdf, rng.uniform() * cdf[-1], side="right")), len(f.weights) - 1))
    amps = product_state(ec.circuit.num_qubits, factors, combo)
    _, record = simulate_single(ec.circuit, StateVector(ec.circuit.num_qubits, amps), rng)
    return 1 - 2 * (sum(record[lab] for lab in ec.labels) % 2)


def parity_samples(request: EstimationRequest, part: str, shots: int | None = None,
                   threads: int | None = None, first_shot: int = 0,
                   stream: int | None = None) -> np.ndarray:
    """``+1/-1`` array for shots ``first_shot .. first_shot + N - 1`` of one part."""
    ec = _circuit_for(request, part)
    n = request.shots_per_part() if shots is None else shots
    if stream is None:
        stream = STREAM_REAL if part == "real" else STREAM_IMAG
    rec = run_shots(ec.circuit, ec.factors(request.states), request.seed,
                    np.arange(first_shot, first_shot + n, dtype=np.uint64), stream, threads=threads)
    return 1 - 2 * rec.parity(ec.labels)


def control_samples(request: EstimationRequest, part: str, shots: int, threads: int | None = None) -> np.ndarray:
    """Raw control bitstrings as integers (bit ``i`` = party ``i``)."""
    ec = _circuit_for(request, part)
    stream = STREAM_REAL if part == "real" else STREAM_IMAG
    rec = run_shots(ec.circuit, ec.factors(request.states), request.seed,
                    np.arange(shots, dtype=np.uint64), stream, threads=threads)
    cols = [rec.labels.index(lab) for lab in ec.labels]
    weights = 1 << np.arange(len(cols), dtype=np.int64)
    return rec.bits[:, cols].astype(np.int64) @ weights


@dataclass(frozen=True)
class TraceEstimate:
    value: complex
    shots_per_part: int
    epsilon: float
    delta: float
    empirical_variance_real: float
    empirical_variance_imag: float

    @property
    def empirical_variance_total(self) -> float:
        return self.empirical_variance_real + self.empirical_variance_imag

    def as_dict(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "shots_per_part": self.shots_per_part,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "empirical_variance_real": self.empirical_variance_real,
            "empirical_variance_imag": self.empirical_variance_imag,
        }


def _mean_var(signs: np.ndarray) -> tuple[float, float]:
    # exact integer reduction: independent of shot order and chunking
    n = int(signs.size)
    s = int(np.sum(signs, dtype=np.int64))
    mean = s / n
    var = (n - s * s / n) / (n - 1) if n > 1 else 0.0
    return mean, var


def estimate_trace(request: EstimationRequest, threads: int | None = None) -> TraceEstimate:
    n = request.shots_per_part()
    re, var_re = _mean_var(parity_samples(request, "real", n, threads))
    im, var_im = _mean_var(parity_samples(request, "imag", n, threads))
    return TraceEstimate(complex(re, im), n, request.epsilon, request.delta, var_re, var_im)


def theoretical_variance(states: Sequence) -> tuple[float, float, float]:
    """Per-shot variances ``(1 - Re^2, 1 - Im^2, 2 - |Tr|^2)``."""
    t = oracle.multivariate_trace([validate_density_matrix(s).matrix for s in states])
    return 1 - t.real**2, 1 - t.imag**2, 2 - abs(t) ** 2


def exact_parity_distribution(states: Sequence, part: str = "real", mode: str = "depth",
                              ghz_method: int = 1) -> np.ndarray:
    """Control-readout distribution of the built circuit by exhaustive branch expansion."""
    req = EstimationRequest(states, shots=1, mode=mode, ghz_method=ghz_method)
    ec = _circuit_for(req, part)
    return circuit_parity_table(ec, req.states)


def circuit_parity_table(ec: EstimationCircuit, states: Sequence) -> np.ndarray:
    table = np.zeros(1 << len(ec.labels))
    for bits, w in exact_distribution(ec.circuit, ec.factors(states), ec.labels).items():
        table[sum(b << i for i, b in enumerate(bits))] += w
    return table
