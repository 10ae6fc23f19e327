"""Exact reference values: multivariate traces and control-register distributions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TooLarge, ValidationError
from .linalg import as_matrices, spectral_decompose, validate_density_matrix

MAX_CONTRACTION_DIM = 1 << 20
_CHUNK = 1 << 16


@dataclass(frozen=True)
class OracleResult:
    trace: complex
    method: str  # "matrix_product" or "permutation_contraction"


def multivariate_trace(matrices: Sequence) -> complex:
    """``Tr[A1 A2 ... Am]`` by direct multiplication."""
    mats = as_matrices(matrices)
    prod = mats[0]
    for a in mats[1:]:
        prod = prod @ a
    return complex(np.trace(prod))


def permutation_trace(matrices: Sequence) -> complex:
    """``Tr[P (A1 ⊗ ... ⊗ Am)]`` for the register shift ``P|j1..jm> = |j2..jm j1>``.

    Evaluated as ``sum_j prod_l A_l[j_l, j_{l+1}]`` over basis indices of the
    tensor product, chunk by chunk, without forming the operator.
    """
    mats = as_matrices(matrices)
    m, d = len(mats), mats[0].shape[0]
    total = d**m
    if total > MAX_CONTRACTION_DIM:
        raise TooLarge(f"tensor-product dimension {total} exceeds {MAX_CONTRACTION_DIM}")
    acc = 0j
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        digits = np.unravel_index(idx, (d,) * m)
        term = np.ones(idx.size, dtype=complex)
        for l in range(m):
            term *= mats[l][digits[l], digits[(l + 1) % m]]
        acc += term.sum()
    return complex(acc)


def oracle(matrices: Sequence, method: str = "matrix_product") -> OracleResult:
    if method == "matrix_product":
        return OracleResult(multivariate_trace(matrices), method)
    if method == "permutation_contraction":
        return OracleResult(permutation_trace(matrices), method)
    raise ValidationError(f"unknown oracle method {method!r}")


def parity_table(value: float, parties: int) -> np.ndarray:
    """``Pr(x) = (1 + (-1)^{|x|} value) / 2^K``; index bit ``i`` is party ``i``."""
    x = np.arange(1 << parties)
    sign = 1 - 2 * (np.array([bin(v).count("1") for v in x]) % 2)
    return (1 + sign * value) / (1 << parties)


def control_distribution(states: Sequence, part: str = "real", parties: int | None = None) -> np.ndarray:
    """Exact distribution of the X-basis readout of the control register.

    Mixed inputs are handled as the convex combination of the tables for
    every product of spectral components.  ``parties`` defaults to
    ``floor(m/2)``; a padded GHZ register with more parties uses the same form.
    """
    if part not in ("real", "imag"):
        raise ValidationError(f"part must be 'real' or 'imag', got {part!r}")
    rhos = [validate_density_matrix(s) for s in states]
    m = len(rhos)
    if m < 2:
        raise ValidationError("need at least two states")
    k = m // 2 if parties is None else parties
    decs = [spectral_decompose(r) for r in rhos]
    table = np.zeros(1 << k)
    for combo in itertools.product(*[range(len(dd)) for dd in decs]):
        w = float(np.prod([dd.weights[i] for dd, i in zip(decs, combo)]))
        vecs = [dd.vectors[i] for dd, i in zip(decs, combo)]
        # Tr[|v1><v1| ... |vm><vm|] = prod <v_l | v_{l+1}>
        t = complex(np.prod([np.vdot(vecs[l], vecs[(l + 1) % m]) for l in range(m)]))
        table += w * parity_table(t.real if part == "real" else t.imag, k)
    return table
