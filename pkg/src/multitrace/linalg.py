"""Density matrices: validation, spectral decomposition, sampling, matrix functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParams,
    NotHermitian,
    NotPositive,
    NotUnitTrace,
    NumericalFailure,
    ValidationError,
)
from .rng import RngStream

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVE_TOL = 1e-10
DROP_EIGENVALUE = 1e-12
EIG_RESIDUAL_TOL = 1e-8
CLAMP = 1e-14


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated ``dim x dim`` state; construct through :func:`validate_density_matrix`."""

    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def rank(self, tol: float = DROP_EIGENVALUE) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True)
class PureStateDecomposition:
    weights: np.ndarray
    vectors: np.ndarray  # shape (k, dim); row i is |v_i>

    def reconstruct(self) -> np.ndarray:
        return (self.vectors.T * self.weights) @ self.vectors.conj()

    def __len__(self) -> int:
        return len(self.weights)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def validate_density_matrix(m) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity, each to 1e-10.

    Raises the matching ``NotHermitian`` / ``NotUnitTrace`` / ``NotPositive``
    with the measured residual in the message.
    """
    if isinstance(m, DensityMatrix):
        return m
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not _is_power_of_two(a.shape[0]) or a.shape[0] < 2:
        raise DimensionMismatch(f"dimension {a.shape[0]} is not a power of 2 (>= 2)")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    herm = float(np.max(np.abs(a - a.conj().T)))
    if herm > HERMITIAN_TOL:
        raise NotHermitian(f"max |A - A^dagger| = {herm:.3e} exceeds {HERMITIAN_TOL:g}")
    tr = np.trace(a)
    if abs(tr - 1) > TRACE_TOL:
        raise NotUnitTrace(f"|Tr A - 1| = {abs(tr - 1):.3e} exceeds {TRACE_TOL:g}")
    a = (a + a.conj().T) / 2
    lam_min = float(np.linalg.eigvalsh(a)[0])
    if lam_min < -POSITIVE_TOL:
        raise NotPositive(f"smallest eigenvalue {lam_min:.3e} is below -{POSITIVE_TOL:g}")
    a.setflags(write=False)
    return DensityMatrix(a)


def spectral_decompose(rho: DensityMatrix) -> PureStateDecomposition:
    rho = validate_density_matrix(rho)
    lam, vecs = np.linalg.eigh(rho.matrix)
    resid = np.linalg.norm(rho.matrix @ vecs - vecs * lam, axis=0)
    if np.max(resid) > EIG_RESIDUAL_TOL:
        raise NumericalFailure(f"eigensolver residual {np.max(resid):.3e}")
    keep = lam > DROP_EIGENVALUE
    lam = lam[keep]
    vecs = vecs[:, keep]
    # largest weight first; stable for reproducible component indexing
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order].T.copy()
    return PureStateDecomposition(weights=lam / lam.sum(), vectors=vecs)


def pure_state(vector) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return validate_density_matrix(np.outer(v, v.conj()))


def random_density_matrix(dim: int, rank: int, rng: RngStream) -> DensityMatrix:
    """Hilbert-Schmidt-style sample ``G G^dagger / Tr[G G^dagger]`` with ``G`` of shape ``dim x rank``."""
    if not _is_power_of_two(dim) or dim < 2:
        raise InvalidParams(f"dim must be a power of 2, got {dim}")
    if not 1 <= rank <= dim:
        raise InvalidParams(f"rank must lie in [1, {dim}], got {rank}")
    gen = rng.generator
    g = gen.standard_normal((dim, rank)) + 1j * gen.standard_normal((dim, rank))
    a = g @ g.conj().T
    a = a / np.trace(a).real
    return validate_density_matrix((a + a.conj().T) / 2)


def haar_pure_state(dim: int, rng: RngStream) -> DensityMatrix:
    return random_density_matrix(dim, 1, rng)


def haar_unitary(dim: int, rng: RngStream) -> np.ndarray:
    gen = rng.generator
    z = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def matrix_function(a: np.ndarray, f: Callable[[np.ndarray], np.ndarray], clamp: bool = True) -> np.ndarray:
    """``f(A)`` for Hermitian ``A`` through its eigendecomposition.

    With ``clamp`` eigenvalues below 1e-14 are raised to 0 before ``f`` is applied,
    which keeps fractional powers of PSD matrices real.
    """
    lam, v = np.linalg.eigh((a + a.conj().T) / 2)
    if clamp:
        lam = np.where(lam < CLAMP, 0.0, lam)
    return (v * f(lam)) @ v.conj().T


def matrix_power(a: np.ndarray, alpha: float) -> np.ndarray:
    return matrix_function(a, lambda x: np.power(x, alpha))


def as_matrices(states: Sequence) -> list[np.ndarray]:
    mats = [np.asarray(s.matrix if isinstance(s, DensityMatrix) else s, dtype=complex) for s in states]
    if not mats:
        raise DimensionMismatch("empty list of matrices")
    d = mats[0].shape
    for k, a in enumerate(mats):
        if a.ndim != 2 or a.shape != d or d[0] != d[1]:
            raise DimensionMismatch(f"matrix {k} has shape {a.shape}, expected {d}")
    return mats
