"""Nearest-neighbour layout and step schedule of the estimator on a 2D grid.

Geometry (row, column), with ``m`` slots and ``p`` qubits per state:

* slot ``s`` occupies column ``2(s-1)``, qubit ``j`` in core row ``1 + j``;
* the gap column ``2g+1`` between slots ``g+1`` and ``g+2`` holds one control
  per core row, so each CSWAP is a control flanked by its two targets;
* rows ``0`` and ``p+1`` are bridge rows.  The GHZ chain snakes down gap 0,
  along the bottom bridge to gap 1, up it, along the top bridge to gap 2, and
  so on.  Consecutive chain cells are always grid neighbours, which is all
  that the Method 2 GHZ circuit needs.

Bridge cells (and one extra end cell when the chain length is odd) are GHZ
parties that drive no CSWAP; they are measured with the rest, which leaves the
parity statistics untouched.  Unused bridge rows are dropped, so ``m = 2, p = 1``
is a 1 x 3 strip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .circuit import CSWAP, H, Measure, QuantumCircuit, Sdg
from .cyclic_shift import adjoin_order, layer_slot_pairs
from .errors import AdjacencyViolation, InvalidDims, ValidationError
from .estimator import EstimationCircuit
from .ghz import build_method1, build_method2, single_party

Cell = tuple[int, int]


@dataclass(frozen=True)
class GridLayout:
    m: int
    p: int
    rows: int
    cols: int
    qubit_cell: tuple[Cell, ...]  # circuit qubit -> cell
    roles: dict = field(repr=False, compare=False)  # cell -> ("control", i) / ("ghz", i) / ("data", slot, j)
    chain: tuple[Cell, ...] = ()
    control_cell: dict = field(default_factory=dict, repr=False, compare=False)  # (gap, j) -> cell
    row_offset: int = 0  # 1 when the empty top bridge row was dropped

    def role(self, cell: Cell) -> tuple:
        return self.roles.get(cell, ("unused",))

    def data_cell(self, slot: int, j: int) -> Cell:
        return (1 + j - self.row_offset, 2 * (slot - 1))

    @property
    def num_qubits(self) -> int:
        return len(self.qubit_cell)


def _chain_cells(m: int, p: int) -> list[Cell]:
    cells: list[Cell] = []
    for g in range(m - 1):
        col = 2 * g + 1
        rows = range(1, p + 1) if g % 2 == 0 else range(p, 0, -1)
        cells += [(r, col) for r in rows]
        if g < m - 2:
            bridge = p + 1 if g % 2 == 0 else 0
            cells += [(bridge, col), (bridge, col + 1), (bridge, col + 2)]
    if len(cells) > 1 and len(cells) % 2:
        # leave the last gap on the side opposite to the bridge it was entered from
        last_c = cells[-1][1]
        cells.append((p + 1 if (m - 2) % 2 == 0 else 0, last_c))
    return cells


def layout(m: int, p: int) -> GridLayout:
    if not isinstance(m, int) or not isinstance(p, int) or m < 2 or p < 1:
        raise InvalidDims(f"need integers m >= 2 and p >= 1, got m={m!r}, p={p!r}")
    chain = _chain_cells(m, p)
    cells = list(chain) + [(1 + j, 2 * (s - 1)) for s in range(1, m + 1) for j in range(p)]
    used_rows = {r for r, _ in cells}
    shift = 0 if 0 in used_rows else 1
    rows = max(used_rows) + 1 - shift

    def mv(c: Cell) -> Cell:
        return (c[0] - shift, c[1])

    roles: dict = {}
    control_cell: dict = {}
    for i, c in enumerate(chain):
        r, col = c
        if 1 <= r <= p and col % 2 == 1:
            roles[mv(c)] = ("control", i)
            control_cell[((col - 1) // 2, r - 1)] = mv(c)
        else:
            roles[mv(c)] = ("ghz", i)
    for s in range(1, m + 1):
        for j in range(p):
            roles[mv((1 + j, 2 * (s - 1)))] = ("data", s, j)
    return GridLayout(m, p, rows, 2 * m - 1, tuple(mv(c) for c in cells), roles,
                      tuple(mv(c) for c in chain), control_cell, shift)


def build_grid_estimation(m: int, p: int = 1, part: str = "real") -> tuple[EstimationCircuit, GridLayout]:
    """Estimator circuit on the grid: one control per CSWAP, chain-ordered GHZ qubits first."""
    if part not in ("real", "imag"):
        raise ValidationError(f"part must be 'real' or 'imag', got {part!r}")
    lay = layout(m, p)
    n = len(lay.chain)
    plan = single_party() if n == 1 else build_method1(2) if n == 2 else build_method2(n)
    qubit_of = {cell: q for q, cell in enumerate(lay.qubit_cell)}
    c = QuantumCircuit(lay.num_qubits)
    for mom in plan.circuit.moments:
        c = c.append_moment(mom.ops)
    pa, pb = layer_slot_pairs(m)
    for pairs in (pa, pb):
        ops = []
        for s1, s2 in pairs:
            for j in range(p):
                ctrl = qubit_of[lay.control_cell[(s1 - 1, j)]]
                ops.append(CSWAP(ctrl, qubit_of[lay.data_cell(s1, j)], qubit_of[lay.data_cell(s2, j)]))
        c = c.append_moment(ops)
    parties = tuple(range(n))
    if part == "imag":
        c = c.append_moment([Sdg(0)])
    c = c.append_moment([H(q) for q in parties])
    labels = tuple(f"x{i}" for i in parties)
    c = c.append_moment([Measure(q, lab) for q, lab in zip(parties, labels)])
    order = adjoin_order(m)
    registers = {lab: tuple(qubit_of[lay.data_cell(order.slot_of(lab), j)] for j in range(p))
                 for lab in range(1, m + 1)}
    c = c.with_metadata(circuit="grid_estimation", m=m, p=p, part=part)
    return EstimationCircuit(c, m, p, part, "width", parties, labels, registers, p * (m - 1)), lay


@dataclass(frozen=True)
class GridOp:
    kind: str
    cells: tuple[Cell, ...]
    label: str | None = None
    parity_of: tuple[str, ...] = ()


@dataclass(frozen=True)
class GridStep:
    index: int
    title: str
    ops: tuple[GridOp, ...]


@dataclass(frozen=True)
class GridSchedule:
    layout: GridLayout | None
    steps: tuple[GridStep, ...] = ()
    load_panels: tuple[str, ...] = ()  # titles of the data-loading panels (step 0 metadata)

    @property
    def panel_count(self) -> int:
        return len(self.load_panels) + len(self.steps)

    def to_records(self) -> list[dict]:
        out = [{"step": 0, "panel": i + 1, "title": t, "ops": []} for i, t in enumerate(self.load_panels)]
        for st in self.steps:
            out.append({
                "step": st.index,
                "panel": len(self.load_panels) + st.index,
                "title": st.title,
                "ops": [{"kind": op.kind, "cells": [list(c) for c in op.cells],
                         **({"label": op.label} if op.label else {}),
                         **({"parity_of": list(op.parity_of)} if op.parity_of else {})}
                        for op in st.ops],
            })
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_records(), sort_keys=True)


def _dist(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _check_adjacent(kind: str, cells: Sequence[Cell], token: str) -> None:
    if kind == "CNOT" and _dist(cells[0], cells[1]) != 1:
        raise AdjacencyViolation(f"{token} spans cells {cells[0]} and {cells[1]}")
    if kind == "CSWAP":
        for t in cells[1:]:
            if _dist(cells[0], t) != 1:
                raise AdjacencyViolation(f"{token}: control {cells[0]} is not next to target {t}")


def _title(kinds: set[str]) -> str:
    names = {"H": "Hadamard", "X": "Pauli X", "S_DAGGER": "S-dagger", "CNOT": "CNOT", "CSWAP": "controlled-SWAP",
             "MEASURE": "measure", "RESET": "reset", "COND_X": "parity correction"}
    return " + ".join(names[k] for k in sorted(kinds))


def schedule(circuit: QuantumCircuit, lay: GridLayout) -> GridSchedule:
    """One step per moment, in order, after checking every op is nearest-neighbour."""
    if circuit.num_qubits > lay.num_qubits:
        raise ValidationError(f"circuit has {circuit.num_qubits} qubits, layout maps {lay.num_qubits}")
    steps = []
    for i, mom in enumerate(circuit.moments, start=1):
        ops = []
        for op in mom:
            cells = tuple(lay.qubit_cell[q] for q in op.targets)
            _check_adjacent(op.kind, cells, op.to_token())
            ops.append(GridOp(op.kind, cells, op.label, op.parity_of))
        steps.append(GridStep(i, _title({op.kind for op in mom}), tuple(ops)))
    return GridSchedule(lay, tuple(steps), ("layout of control and data qubits", "load data states"))


_SYMBOL = {"H": "H", "X": "X", "S_DAGGER": "S", "MEASURE": "M", "RESET": "R", "COND_X": "X"}
_ROLE = {"control": "c", "ghz": "g", "data": "d", "unused": "."}


def _grid(lay: GridLayout, marks: dict[Cell, str]) -> str:
    lines = []
    for r in range(lay.rows):
        row = []
        for col in range(lay.cols):
            row.append(marks.get((r, col), _ROLE[lay.role((r, col))[0]]))
        lines.append(" ".join(row))
    return "\n".join(lines)


def render_schedule(s: GridSchedule) -> str:
    """ASCII panels: roles in lower case, active operations in symbols.

    ``*``/``+`` are CNOT control/target, ``@``/``x`` CSWAP control/targets.
    """
    if s.layout is None or s.panel_count == 0:
        return ""
    lay = s.layout
    panels = []
    ident = {c: lay.role(c)[0][0].upper() for c in lay.roles}
    panels.append((s.load_panels[0] if s.load_panels else "layout", ident))
    if len(s.load_panels) > 1:
        order = adjoin_order(lay.m)
        loads = {c: _base36(order.label_at(r[1])) for c, r in lay.roles.items() if r[0] == "data"}
        panels.append((s.load_panels[1], loads))
    for st in s.steps:
        marks: dict[Cell, str] = {}
        for op in st.ops:
            if op.kind == "CNOT":
                marks[op.cells[0]], marks[op.cells[1]] = "*", "+"
            elif op.kind == "CSWAP":
                marks[op.cells[0]] = "@"
                marks[op.cells[1]] = marks[op.cells[2]] = "x"
            else:
                marks[op.cells[0]] = _SYMBOL[op.kind]
        panels.append((st.title, marks))
    out = []
    for i, (title, marks) in enumerate(panels, start=1):
        out.append(f"panel {i}: {title}\n{_grid(lay, marks)}\n")
    return "\n".join(out)


def _base36(n: int) -> str:
    return "0123456789abcdefghijklmnopqrstuvwxyz"[n % 36]
