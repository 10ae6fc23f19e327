"""Power-series functionals, Schatten distances and the K_alpha quantity."""

import numpy as np

from multitrace.functionals import (
    check_data_processing,
    estimate_poly_trace,
    exp_coeffs,
    k_alpha,
    pauli_twirl,
    q_alpha,
    schatten_distance,
)

rho = np.diag([0.75, 0.25])
series = exp_coeffs(0.5, 8)
est = estimate_poly_trace(rho, series, epsilon=0.1, delta=0.05, seed=2)
print(f"Tr exp(rho/2): estimate {est.value.real:.4f}, exact {np.exp(0.375) + np.exp(0.125):.4f}, N={est.N}")

sigma = np.array([[0.5, 0.3], [0.3, 0.5]])
for p in (2, 4, 6):
    print(f"Schatten-{p} distance {schatten_distance(rho, sigma, p):.5f}")

for a in (0.3, 0.7, 1.5):
    rep = check_data_processing(rho, sigma, a, pauli_twirl(1))
    q = q_alpha(rho, sigma, a) if a < 1 else float("nan")
    print(f"alpha={a}: Q={q:.4f} K={k_alpha(rho, sigma, a):.4f} "
          f"after twirl {rep.after:.4f} holds={rep.holds}")
