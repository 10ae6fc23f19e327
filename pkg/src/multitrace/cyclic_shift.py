"""The m-cycle as two layers of disjoint transpositions, and its controlled circuit.

State labels are 1-based (``1..m``).  Registers are placed in physical slots
``1..m`` by :func:`adjoin_order` so that every transposition of both layers
acts on neighbouring slots.  Layer A swaps slots ``(2i-1, 2i)`` and layer B
swaps ``(2i, 2i+1)``; control ``i`` drives the i-th swap of each layer.

With every control on, the network moves the content of label ``l - 1`` into
label ``l`` (and ``m`` into ``1``), which is the operator returned by
:func:`apply_permutation_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import CSWAP, Operation, QuantumCircuit
from .errors import InvalidM, InvalidP, TooLarge, ValidationError


def _check_m(m, low: int = 2) -> int:
    if not isinstance(m, (int, np.integer)) or m < low:
        raise InvalidM(f"m must be an integer >= {low}, got {m!r}")
    return int(m)


def _check_p(p) -> int:
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise InvalidP(f"p must be an integer >= 1, got {p!r}")
    return int(p)


@dataclass(frozen=True)
class TranspositionLayers:
    m: int
    layer1: tuple[tuple[int, int], ...]
    layer2: tuple[tuple[int, int], ...]

    def as_permutation(self) -> dict[int, int]:
        """``k -> layer2(layer1(k))`` on labels ``1..m``."""
        l1, l2 = _layer_map(self.m, self.layer1), _layer_map(self.m, self.layer2)
        return {k: l2[l1[k]] for k in range(1, self.m + 1)}


def _layer_map(m: int, pairs) -> dict[int, int]:
    out = {k: k for k in range(1, m + 1)}
    for a, b in pairs:
        if out[a] != a or out[b] != b:
            raise ValidationError(f"transpositions in a layer overlap at ({a}, {b})")
        out[a], out[b] = b, a
    return out


def cycle(m: int) -> dict[int, int]:
    """The cycle ``k -> k + 1`` with ``m -> 1``."""
    return {k: k % m + 1 for k in range(1, m + 1)}


def decompose_cycle(m: int) -> TranspositionLayers:
    m = _check_m(m)
    layer1 = tuple((k, m + 1 - k) for k in range(1, m // 2 + 1))
    layer2 = tuple((l, m + 2 - l) for l in range(2, (m + 1) // 2 + 1))
    return TranspositionLayers(m, layer1, layer2)


@dataclass(frozen=True)
class AdjoinOrder:
    m: int
    order: tuple[int, ...]  # order[s - 1] = label held by slot s

    def slot_of(self, label: int) -> int:
        return self.order.index(label) + 1

    def label_at(self, slot: int) -> int:
        return self.order[slot - 1]


def adjoin_order(m: int) -> AdjoinOrder:
    """Interleave from both ends: ``1, m, 2, m-1, ...``.

    For odd m the middle label goes last, after ``ceil(m/2) + 1``.
    """
    m = _check_m(m)
    order: list[int] = []
    lo, hi = 1, m
    while lo < hi:
        order += [lo, hi]
        lo, hi = lo + 1, hi - 1
    if lo == hi:
        order.append(lo)
    return AdjoinOrder(m, tuple(order))


def layer_slot_pairs(m: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Slot pairs of layer A and layer B; index ``i - 1`` belongs to control ``i``."""
    m = _check_m(m)
    a = [(2 * i - 1, 2 * i) for i in range(1, m // 2 + 1)]
    nb = m // 2 - 1 if m % 2 == 0 else m // 2
    b = [(2 * i, 2 * i + 1) for i in range(1, nb + 1)]
    return a, b


@dataclass(frozen=True)
class WiringEntry:
    control: int  # qubit index of the control
    layer: str  # "A" or "B"
    slots: tuple[int, int]
    labels: tuple[int, int]
    qubit: int  # position within each p-qubit register


@dataclass(frozen=True)
class ShiftFragment:
    m: int
    p: int
    mode: str
    circuit: QuantumCircuit
    controls: tuple[int, ...]
    data: dict  # (slot, qubit position) -> circuit qubit
    wiring: tuple[WiringEntry, ...]
    order: AdjoinOrder

    def register(self, label: int) -> tuple[int, ...]:
        """Circuit qubits of the register holding state label ``label`` (bit j first)."""
        s = self.order.slot_of(label)
        return tuple(self.data[(s, j)] for j in range(self.p))


def controls_needed(m: int, p: int, mode: str) -> int:
    k = _check_m(m) // 2
    return k * _check_p(p) if mode == "width" else k


def shift_moments(m: int, p: int, mode: str, controls: Sequence[int],
                  data: Callable[[int, int], int]) -> tuple[list[list[Operation]], list[WiringEntry]]:
    """CSWAP moments of the controlled shift on caller-chosen qubits.

    ``data(slot, j)`` gives the qubit of position ``j`` in slot ``slot``.  In
    depth mode controls ``0..k-1`` are reused for every position ``j`` (two
    moments per position); in width mode position ``j`` uses the ``j``-th group
    of ``k`` controls and everything runs in two moments.
    """
    m, p = _check_m(m), _check_p(p)
    if mode not in ("depth", "width"):
        raise ValidationError(f"mode must be 'depth' or 'width', got {mode!r}")
    k = m // 2
    need = controls_needed(m, p, mode)
    if len(controls) < need:
        raise ValidationError(f"{mode} mode needs {need} controls, got {len(controls)}")
    order = adjoin_order(m)
    pa, pb = layer_slot_pairs(m)

    def ops_for(layer, pairs, j, offset):
        ops, wires = [], []
        for i, (s1, s2) in enumerate(pairs):
            ctrl = controls[offset + i]
            ops.append(CSWAP(ctrl, data(s1, j), data(s2, j)))
            wires.append(WiringEntry(ctrl, layer, (s1, s2), (order.label_at(s1), order.label_at(s2)), j))
        return ops, wires

    moments: list[list[Operation]] = []
    wiring: list[WiringEntry] = []
    if mode == "depth":
        for j in range(p):
            for layer, pairs in (("A", pa), ("B", pb)):
                ops, w = ops_for(layer, pairs, j, 0)
                moments.append(ops)
                wiring += w
    else:
        for layer, pairs in (("A", pa), ("B", pb)):
            mom = []
            for j in range(p):
                ops, w = ops_for(layer, pairs, j, j * k)
                mom += ops
                wiring += w
            moments.append(mom)
    return [mo for mo in moments if mo], wiring


def build_controlled_shift(m: int, p: int = 1, mode: str = "depth") -> ShiftFragment:
    """Stand-alone fragment: controls on qubits ``0..L-1``, slot ``s`` qubit ``j`` on ``L + (s-1)p + j``."""
    m, p = _check_m(m), _check_p(p)
    if mode not in ("depth", "width"):
        raise ValidationError(f"mode must be 'depth' or 'width', got {mode!r}")
    L = controls_needed(m, p, mode)
    controls = tuple(range(L))
    data = {(s, j): L + (s - 1) * p + j for s in range(1, m + 1) for j in range(p)}
    moments, wiring = shift_moments(m, p, mode, controls, lambda s, j: data[(s, j)])
    c = QuantumCircuit(L + m * p)
    for ops in moments:
        c = c.append_moment(ops)
    c = c.with_metadata(fragment="controlled_shift", m=m, p=p, mode=mode)
    return ShiftFragment(m, p, mode, c, controls, data, tuple(wiring), adjoin_order(m))


def permutation_indices(m: int, d: int) -> np.ndarray:
    """``perm[i] = j`` where the shift sends basis ``|i1..im>`` (``i1`` most significant) to ``|j>``.

    The image of ``|i1 i2 .. im>`` is ``|im i1 .. i(m-1)>``.
    """
    m = _check_m(m, low=1)
    if d < 2:
        raise ValidationError(f"local dimension must be >= 2, got {d}")
    if d**m > 1 << 24:
        raise TooLarge(f"d^m = {d**m} is too large for an explicit index table")
    digits = np.indices((d,) * m).reshape(m, -1)
    shifted = np.roll(digits, 1, axis=0)
    return np.ravel_multi_index(tuple(shifted), (d,) * m)


def apply_permutation_matrix(m: int, d: int) -> np.ndarray:
    """Dense permutation matrix of the cyclic shift on ``(C^d)^{⊗m}``."""
    perm = permutation_indices(m, d)
    n = perm.size
    if n > 1 << 12:
        raise TooLarge(f"dense {n}x{n} matrix requested; use permutation_indices")
    out = np.zeros((n, n), dtype=np.int8)
    out[perm, np.arange(n)] = 1
    return out
