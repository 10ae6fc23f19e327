"""Polynomial trace functionals, bivariate words, Schatten distances and the K/Q measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidAlpha,
    InvalidParams,
    NegativeBeyondTolerance,
    NotUnital,
    SingularState,
    ValidationError,
)
from .estimator import EstimationRequest, estimate_trace, parity_samples
from .linalg import DensityMatrix, haar_unitary, matrix_function, validate_density_matrix
from .oracle import multivariate_trace
from .rng import RngStream

NEGATIVE_TOL = 1e-10
UNITAL_TOL = 1e-10
DP_SLACK = 1e-9
# parity shots for Tr[rho^k] use stream POLY_STREAM + k
POLY_STREAM = 16


@dataclass(frozen=True)
class SeriesSpec:
    coeffs: tuple[float, ...]
    name: str = "series"
    approx_error_bound: float | None = None

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if not c or not all(math.isfinite(x) for x in c):
            raise InvalidParams("coefficients must be a non-empty list of finite numbers")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def C(self) -> float:
        return float(sum(abs(x) for x in self.coeffs))

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def trace(self, rho) -> float:
        """``sum_k c_k Tr[rho^k]`` from the eigenvalues (``Tr[rho^0] = d``)."""
        lam = np.linalg.eigvalsh(np.asarray(validate_density_matrix(rho).matrix))
        return float(np.sum(self(lam)))


def binomial_coeffs(alpha: float, m: int) -> SeriesSpec:
    """Generalized binomial coefficients of ``(1 + x)^alpha`` up to degree ``m``."""
    if not alpha > 0:
        raise InvalidAlpha(f"alpha must be positive, got {alpha}")
    if m < 0:
        raise InvalidParams(f"degree must be >= 0, got {m}")
    c = [1.0]
    for k in range(m):
        c.append(c[-1] * (alpha - k) / (k + 1))
    return SeriesSpec(tuple(c), f"binomial(alpha={alpha:g})")


def log1p_coeffs(m: int) -> SeriesSpec:
    """``ln(1 + x) = x - x^2/2 + x^3/3 - ...``; ``C`` is the harmonic number ``H_m``."""
    if m < 1:
        raise InvalidParams(f"degree must be >= 1, got {m}")
    return SeriesSpec((0.0,) + tuple((-1) ** (k + 1) / k for k in range(1, m + 1)), "log1p")


def exp_coeffs(beta: float, m: int) -> SeriesSpec:
    if m < 0:
        raise InvalidParams(f"degree must be >= 0, got {m}")
    c = [1.0]
    for k in range(1, m + 1):
        c.append(c[-1] * beta / k)
    return SeriesSpec(tuple(c), f"exp(beta={beta:g})")


def exact_functional(rho, g: Callable[[np.ndarray], np.ndarray]) -> float:
    """``Tr[g(rho)] = sum_i g(lambda_i)`` over all ``d`` eigenvalues."""
    lam = np.linalg.eigvalsh(np.asarray(validate_density_matrix(rho).matrix))
    return float(np.sum(g(lam)))


def repetitions(C: float, epsilon: float, delta: float) -> int:
    """``N = ceil(8 C^2 / epsilon^2 * ln(2 / delta))``."""
    if not epsilon > 0 or not 0 < delta < 1:
        raise InvalidParams(f"need epsilon > 0 and 0 < delta < 1 (got {epsilon}, {delta})")
    return math.ceil(8 * C * C / (epsilon * epsilon) * math.log(2 / delta))


@dataclass(frozen=True)
class FunctionalEstimate:
    value: complex
    N: int
    C: float
    epsilon: float
    delta: float
    degree: int = 0
    copies_per_repetition: int = 0

    def as_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "N": self.N, "C": self.C,
                "epsilon": self.epsilon, "delta": self.delta, "degree": self.degree,
                "copies_per_repetition": self.copies_per_repetition}


def estimate_poly_trace(rho, series: SeriesSpec, epsilon: float = 0.1, delta: float = 0.05,
                        seed: int = 0, N: int | None = None, mode: str = "depth",
                        ghz_method: int = 1, threads: int | None = None) -> FunctionalEstimate:
    """Estimate ``sum_k c_k Tr[rho^k]``.

    The ``k = 0, 1`` terms are exact (``c_0 d + c_1``).  Repetition ``i`` runs
    one real-part parity shot on ``k`` copies of ``rho`` for each ``k >= 2``;
    shot ``i`` of the ``k``-th circuit lives on its own random stream, so the
    repetitions are independent.
    """
    rho = validate_density_matrix(rho)
    if series.degree < 1:
        raise InvalidParams("series degree must be >= 1")
    n = repetitions(series.C, epsilon, delta) if N is None else int(N)
    c = series.coeffs
    total = c[0] * rho.dim + c[1]
    for k in range(2, series.degree + 1):
        if c[k] == 0:
            continue
        req = EstimationRequest([rho] * k, shots=n, seed=seed, mode=mode, ghz_method=ghz_method)
        signs = parity_samples(req, "real", n, threads, stream=POLY_STREAM + k)
        total += c[k] * int(signs.sum(dtype=np.int64)) / n
    copies = sum(range(2, series.degree + 1))
    return FunctionalEstimate(complex(total, 0.0), n, series.C, epsilon, delta, series.degree, copies)


# words in rho and sigma


def expand_word(rho, sigma, pattern: Sequence[tuple[str, int]]) -> list[np.ndarray]:
    """``[("rho", 2), ("sigma", 1)]`` becomes ``[rho, rho, sigma]``."""
    if not pattern:
        raise ValidationError("pattern must be non-empty")
    mats = {"rho": np.asarray(validate_density_matrix(rho).matrix),
            "sigma": np.asarray(validate_density_matrix(sigma).matrix)}
    if mats["rho"].shape != mats["sigma"].shape:
        raise DimensionMismatch(f"rho is {mats['rho'].shape}, sigma is {mats['sigma'].shape}")
    out = []
    for name, e in pattern:
        if name not in mats:
            raise ValidationError(f"unknown matrix id {name!r}; use 'rho' or 'sigma'")
        if int(e) != e or e < 0:
            raise ValidationError(f"exponent must be a non-negative integer, got {e}")
        out += [mats[name]] * int(e)
    if not out:
        raise ValidationError("pattern has total degree 0")
    return out


def bivariate_trace(rho, sigma, pattern: Sequence[tuple[str, int]]) -> complex:
    """Exact ``Tr[...]`` of a word such as ``rho^k sigma^l`` or ``(rho sigma)^k``."""
    return multivariate_trace(expand_word(rho, sigma, pattern))


def estimate_bivariate_trace(rho, sigma, pattern, epsilon: float = 0.1, delta: float = 0.05,
                             seed: int = 0, **kw) -> complex:
    word = expand_word(rho, sigma, pattern)
    if len(word) == 1:
        return complex(np.trace(word[0]))
    return estimate_trace(EstimationRequest(word, epsilon, delta, seed=seed, **kw)).value


def series_bivariate(c: Sequence[float], dcoef: Sequence[float], rho, sigma) -> complex:
    """``Tr[(sum_k c_k rho^k)(sum_l d_l sigma^l)] = sum_{k,l} c_k d_l Tr[rho^k sigma^l]``."""
    total = 0j
    for k, ck in enumerate(c):
        for l, dl in enumerate(dcoef):
            if ck == 0 or dl == 0:
                continue
            if k + l == 0:
                total += ck * dl * validate_density_matrix(rho).dim
            else:
                total += ck * dl * bivariate_trace(rho, sigma, [("rho", k), ("sigma", l)])
    return total


# Schatten distances: words written in r (rho) and s (sigma)

SCHATTEN_TERMS: dict[int, tuple[tuple[int, str], ...]] = {
    2: ((1, "rr"), (-2, "rs"), (1, "ss")),
    4: ((1, "rrrr"), (-4, "rrrs"), (4, "rrss"), (2, "rsrs"), (-4, "rsss"), (1, "ssss")),
    6: (
        (1, "rrrrrr"), (-6, "rrrrrs"), (6, "rrrrss"), (6, "rrrsrs"), (3, "rrsrrs"),
        (-6, "rrssrs"), (-6, "rrrsss"), (-3, "rrsrss"), (-2, "rsrsrs"), (6, "rsrsss"),
        (-3, "rrsrss"), (3, "rssrss"), (6, "rrssss"), (-6, "rsssss"), (1, "ssssss"),
    ),
}


def _word_mats(word: str, r: np.ndarray, s: np.ndarray) -> list[np.ndarray]:
    return [r if ch == "r" else s for ch in word]


def schatten_expansion(rho, sigma, p: int) -> complex:
    """The raw linear combination of word traces for ``Tr[(rho - sigma)^p]``."""
    if p not in SCHATTEN_TERMS:
        raise InvalidParams(f"p must be 2, 4 or 6, got {p}")
    r = np.asarray(validate_density_matrix(rho).matrix)
    s = np.asarray(validate_density_matrix(sigma).matrix)
    if r.shape != s.shape:
        raise DimensionMismatch(f"rho is {r.shape}, sigma is {s.shape}")
    return complex(sum(c * multivariate_trace(_word_mats(w, r, s)) for c, w in SCHATTEN_TERMS[p]))


def schatten_power(rho, sigma, p: int) -> float:
    """``||rho - sigma||_p^p``; rejects results that are negative or complex beyond 1e-10."""
    val = schatten_expansion(rho, sigma, p)
    if abs(val.imag) > NEGATIVE_TOL or val.real < -NEGATIVE_TOL:
        raise NegativeBeyondTolerance(f"Schatten-{p} combination evaluated to {val:.3e}")
    return max(val.real, 0.0)


def schatten_distance(rho, sigma, p: int) -> float:
    return schatten_power(rho, sigma, p) ** (1 / p)


def estimate_schatten_power(rho, sigma, p: int, epsilon: float = 0.1, delta: float = 0.05,
                            seed: int = 0, **kw) -> float:
    """Shot-based ``||rho - sigma||_p^p``; each distinct word gets an equal share of the error budget."""
    r = validate_density_matrix(rho)
    s = validate_density_matrix(sigma)
    terms: dict[str, int] = {}
    for c, w in SCHATTEN_TERMS[p]:
        terms[w] = terms.get(w, 0) + c
    weight = sum(abs(c) for c in terms.values())
    total = 0.0
    for i, (w, c) in enumerate(sorted(terms.items())):
        req = EstimationRequest(_word_mats(w, r, s), epsilon / weight, delta / len(terms), seed=seed + i, **kw)
        total += c * estimate_trace(req).value.real
    return total


# measures of distinguishability


def _check_alpha(alpha: float) -> float:
    a = float(alpha)
    if not (0 < a < 1 or 1 < a <= 2):
        raise InvalidAlpha(f"alpha must lie in (0,1) or (1,2], got {alpha}")
    return a


def _power(a: np.ndarray, e: float, name: str) -> np.ndarray:
    if e >= 0:
        return matrix_function(a, lambda x: np.power(x, e))
    lam = np.linalg.eigvalsh((a + a.conj().T) / 2)
    if lam.min() <= 1e-12:
        raise SingularState(f"{name} has eigenvalue {lam.min():.3e}; the power {e:g} does not exist")
    return matrix_function(a, lambda x: np.power(x, e), clamp=False)


def q_alpha(rho, sigma, alpha: float) -> float:
    """``Tr[rho^alpha sigma^(1 - alpha)]``."""
    a = _check_alpha(alpha)
    r = np.asarray(validate_density_matrix(rho).matrix)
    s = np.asarray(validate_density_matrix(sigma).matrix)
    if r.shape != s.shape:
        raise DimensionMismatch(f"rho is {r.shape}, sigma is {s.shape}")
    return float(np.trace(_power(r, a, "rho") @ _power(s, 1 - a, "sigma")).real)


def k_alpha(rho, sigma, alpha: float) -> float:
    """``Tr[(I + rho)^alpha (I + sigma)^(1 - alpha)]``."""
    a = _check_alpha(alpha)
    r = np.asarray(validate_density_matrix(rho).matrix)
    s = np.asarray(validate_density_matrix(sigma).matrix)
    if r.shape != s.shape:
        raise DimensionMismatch(f"rho is {r.shape}, sigma is {s.shape}")
    eye = np.eye(r.shape[0])
    return float(np.trace(_power(eye + r, a, "I + rho") @ _power(eye + s, 1 - a, "I + sigma")).real)


def k_alpha_via_q(rho, sigma, alpha: float) -> float:
    """``(d + 1) Q_alpha((I + rho)/(d + 1) || (I + sigma)/(d + 1))``."""
    r = np.asarray(validate_density_matrix(rho).matrix)
    s = np.asarray(validate_density_matrix(sigma).matrix)
    d = r.shape[0]
    eye = np.eye(d)
    return (d + 1) * q_alpha((eye + r) / (d + 1), (eye + s) / (d + 1), alpha)


@dataclass(frozen=True)
class UnitalChannel:
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.kraus:
            raise ValidationError("a channel needs at least one Kraus operator")
        d = self.kraus[0].shape[0]
        eye = np.eye(d)
        tp = sum(k.conj().T @ k for k in self.kraus)
        if np.max(np.abs(tp - eye)) > UNITAL_TOL:
            raise ValidationError("Kraus operators are not trace preserving")
        un = sum(k @ k.conj().T for k in self.kraus)
        err = float(np.max(np.abs(un - eye)))
        if err > UNITAL_TOL:
            raise NotUnital(f"max |N(I) - I| = {err:.3e} exceeds {UNITAL_TOL:g}")

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, rho) -> np.ndarray:
        a = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
        out = sum(k @ a @ k.conj().T for k in self.kraus)
        return (out + out.conj().T) / 2


def identity_channel(dim: int) -> UnitalChannel:
    return UnitalChannel((np.eye(dim, dtype=complex),))


def random_unitary_mixture(dim: int, count: int, rng: RngStream) -> UnitalChannel:
    """Uniform mixture of ``count`` Haar-random unitaries."""
    w = 1 / math.sqrt(count)
    return UnitalChannel(tuple(w * haar_unitary(dim, rng) for _ in range(count)))


def pauli_twirl(num_qubits: int) -> UnitalChannel:
    """Uniform mixture over all Pauli strings: sends every state to ``I/d``."""
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    ops = [np.ones((1, 1), dtype=complex)]
    for _ in range(num_qubits):
        ops = [np.kron(a, b) for a in ops for b in paulis]
    w = 1 / math.sqrt(len(ops))
    return UnitalChannel(tuple(w * o.astype(complex) for o in ops))


@dataclass(frozen=True)
class DataProcessingReport:
    alpha: float
    before: float
    after: float
    slack: float  # >= 0 when the inequality holds
    holds: bool

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "before": self.before, "after": self.after,
                "slack": self.slack, "holds": self.holds}


def check_data_processing(rho, sigma, alpha: float, channel: UnitalChannel) -> DataProcessingReport:
    """``K_alpha`` does not decrease under the channel for alpha < 1 and does not increase for alpha > 1."""
    a = _check_alpha(alpha)
    if not isinstance(channel, UnitalChannel):
        channel = UnitalChannel(tuple(np.asarray(k, dtype=complex) for k in channel))
    before = k_alpha(rho, sigma, a)
    after = k_alpha(channel(validate_density_matrix(rho)), channel(validate_density_matrix(sigma)), a)
    slack = after - before if a < 1 else before - after
    return DataProcessingReport(a, before, after, slack, slack >= -DP_SLACK)
