"""Estimate a few multivariate traces and compare them with the exact values.

Run with ``python3 demos/purity_and_overlaps.py``.
"""

import numpy as np

from multitrace import EstimationRequest, estimate_trace, multivariate_trace
from multitrace.linalg import pure_state, random_density_matrix
from multitrace.rng import RngStream

rho = np.diag([0.75, 0.25])
kets = [[1, 0], [1, 1], [1, 1j]]
triangle = [pure_state(k) for k in kets]
rng = RngStream(3)
mixed = [random_density_matrix(2, 2, rng) for _ in range(5)]

cases = {
    "purity of diag(3/4, 1/4)": [rho, rho],
    "|0>, |+>, |+i> triangle": triangle,
    "five random mixed qubits": mixed,
}

for name, states in cases.items():
    est = estimate_trace(EstimationRequest(states, epsilon=0.05, delta=0.05, seed=1))
    exact = multivariate_trace([np.asarray(getattr(s, "matrix", s)) for s in states])
    print(f"{name:28s} estimate {est.value.real:+.4f}{est.value.imag:+.4f}j  "
          f"exact {exact.real:+.4f}{exact.imag:+.4f}j  shots/part {est.shots_per_part}")
