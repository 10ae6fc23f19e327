"""Counter-based random streams keyed by ``(seed, shot_index)``.

Every shot owns an independent Philox4x64-10 stream: the key is the seed and
the 256-bit counter holds ``(draw_block, shot_index, stream, 0)``.  A shot's
draws therefore never depend on which other shots run, in which order, or in
which batch.

``RngStream`` is a thin wrapper around :class:`numpy.random.Philox`.  The
batched simulator needs the same numbers for thousands of shots at once, so
:func:`uniform_block` evaluates the Philox rounds over numpy arrays.  The two
paths produce bitwise-identical doubles (see ``tests/test_rng.py``).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_ROUNDS = 10

# stream tags; callers may use any other non-negative integer
STREAM_REAL = 0
STREAM_IMAG = 1
STREAM_PRESET = 2


def _counter(shot_index: int, stream: int) -> np.ndarray:
    return np.array([0, shot_index & _MASK64, stream & _MASK64, 0], dtype=np.uint64)


def _key(seed: int) -> np.ndarray:
    return np.array([seed & _MASK64, 0], dtype=np.uint64)


class RngStream:
    """Sequential uniform draws for one shot.

    >>> a = RngStream(7, 3).uniforms(4)
    >>> b = RngStream(7, 3).uniforms(4)
    >>> bool((a == b).all())
    True
    """

    def __init__(self, seed: int, shot_index: int = 0, stream: int = 0):
        if seed < 0 or shot_index < 0 or stream < 0:
            raise ValueError("seed, shot_index and stream must be non-negative")
        self.seed = int(seed)
        self.shot_index = int(shot_index)
        self.stream = int(stream)
        self._gen = np.random.Generator(
            np.random.Philox(key=_key(self.seed), counter=_counter(self.shot_index, self.stream))
        )
        self.draws = 0

    def uniform(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        self.draws += n
        return self._gen.random(n)

    @property
    def generator(self) -> np.random.Generator:
        """The underlying generator, for non-uniform sampling (Gaussians etc.)."""
        return self._gen

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, shot_index={self.shot_index}, stream={self.stream})"


def _mulhilo(a: np.ndarray, b: np.uint64) -> tuple[np.ndarray, np.ndarray]:
    # 64x64 -> 128-bit product via 32-bit limbs; uint64 arithmetic wraps.
    a_lo = a & _MASK32
    a_hi = a >> _SHIFT32
    b_lo = b & _MASK32
    b_hi = b >> _SHIFT32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _SHIFT32) + (lh & _MASK32) + (hl & _MASK32)
    hi = hh + (lh >> _SHIFT32) + (hl >> _SHIFT32) + (mid >> _SHIFT32)
    lo = a * b
    return hi, lo


def _philox4x64(c0, c1, c2, c3, k0, k1):
    k0 = np.full_like(c0, k0)
    k1 = np.full_like(c0, k1)
    for r in range(_ROUNDS):
        if r:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(c0, _M0)
        hi1, lo1 = _mulhilo(c2, _M1)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def raw_block(seed: int, shot_indices, n: int, stream: int = 0) -> np.ndarray:
    """First ``n`` raw 64-bit outputs of each shot's stream, shape ``(len(shots), n)``."""
    shots = np.asarray(shot_indices, dtype=np.uint64).ravel()
    nblocks = (n + 3) // 4
    out = np.empty((shots.size, nblocks * 4), dtype=np.uint64)
    k0 = np.uint64(seed & _MASK64)
    k1 = np.uint64(0)
    c2 = np.full(shots.size, stream & _MASK64, dtype=np.uint64)
    c3 = np.zeros(shots.size, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for b in range(nblocks):
            c0 = np.full(shots.size, b + 1, dtype=np.uint64)
            words = _philox4x64(c0, shots.copy(), c2, c3, k0, k1)
            for lane in range(4):
                out[:, 4 * b + lane] = words[lane]
    return out[:, :n]


def uniform_block(seed: int, shot_indices, n: int, stream: int = 0) -> np.ndarray:
    """Doubles in [0, 1): row ``i`` equals ``RngStream(seed, shot_indices[i], stream).uniforms(n)``."""
    raw = raw_block(seed, shot_indices, n, stream)
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
