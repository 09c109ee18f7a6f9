"""Cells of the free category on a complex.

A cell of formal dimension n is a tuple of 2n+2 finite atom sets, one
minus/plus pair per level, with equal top sets; each pair of consecutive
levels is tied by the movement condition and every set is fork-free.
This module provides the public data type plus the calculus: movement and
fork tests, the cell associated with an atom, boundaries, identities,
binary composition, and exhaustive enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import _engine
from .complexes import Complex, validate
from .errors import BoundaryMismatch, DimensionError, InputError

__all__ = [
    "Cell",
    "CellSetReport",
    "moves",
    "is_cell",
    "cell_defect",
    "atom_cell",
    "boundary",
    "identity",
    "compose",
    "enumerate_cells",
    "support",
    "support_injective",
    "cell_from_data",
    "cell_to_data",
]

_SIGNS = {"-": 0, "+": 1, -1: 0, +1: 1}


@dataclass(frozen=True)
class Cell:
    """A cell: formal dimension n and 2n+2 sets of atom ids.

    ``sets[2*i]`` is the minus set at level i, ``sets[2*i + 1]`` the plus
    set; the two top sets coincide.  Equality is extensional on the data.
    """

    complex: Complex
    n: int
    sets: tuple

    def __post_init__(self):
        if self.n < 0:
            raise InputError("cell dimension must be >= 0")
        if len(self.sets) != 2 * self.n + 2:
            raise InputError(
                f"a {self.n}-cell needs {2 * self.n + 2} sets, got {len(self.sets)}"
            )
        known = {a.id: a.dim for a in self.complex.atoms}
        for j in range(self.n + 1):
            for S in (self.sets[2 * j], self.sets[2 * j + 1]):
                for x in S:
                    if x not in known:
                        raise InputError(f"unknown atom id {x!r} in cell")
                    if known[x] != j:
                        raise InputError(
                            f"atom {x!r} has dimension {known[x]}, level {j} expected"
                        )

    def side(self, sign, i: int) -> frozenset:
        """The set at signed index (sign, i); sign is '-'/'+' or -1/+1."""
        if i > self.n:
            raise InputError(f"level {i} above cell dimension {self.n}")
        return self.sets[2 * i + _SIGNS[sign]]

    @property
    def intrinsic_dim(self) -> int:
        """Largest level with nonempty sets (0 for a plain object)."""
        for j in range(self.n, -1, -1):
            if self.sets[2 * j] or self.sets[2 * j + 1]:
                return j
        return 0

    def sort_key(self):
        return (self.n, tuple(tuple(sorted(S)) for S in self.sets))


def _raw(cell: Cell, eng: _engine.Engine) -> tuple:
    return tuple(
        frozenset(eng.index[x] for x in S) for S in cell.sets
    )


def _trim(raw: tuple) -> tuple:
    d = len(raw) // 2 - 1
    while d > 0 and not raw[2 * d] and not raw[2 * d + 1]:
        d -= 1
    return raw[: 2 * d + 2]


def _public(cx: Complex, eng: _engine.Engine, raw: tuple, n: int | None = None) -> Cell:
    if n is None:
        n = len(raw) // 2 - 1
    sets = [frozenset(eng.ids[i] for i in S) for S in raw]
    sets += [frozenset()] * (2 * n + 2 - len(sets))
    return Cell(cx, n, tuple(sets))


def moves(cx: Complex, s: Iterable[str], x: Iterable[str], y: Iterable[str]) -> bool:
    """True when the set s moves x to y.

    With S- and S+ the unions of the faces of s, the condition reads
    S- minus S+ == x minus y and S+ minus S- == y minus x.
    """
    eng = _engine.engine_of(cx)
    s = frozenset(s)
    dims = {eng.dim_of[eng.index[a]] for a in s} if s else set()
    if len(dims) > 1:
        raise InputError(f"mixed dimensions in moving set: {sorted(dims)}")
    if dims:
        n = dims.pop()
        if n < 1:
            raise InputError("moving sets live in dimension >= 1")
        for side_name, side in (("x", x), ("y", y)):
            for a in side:
                if eng.dim_of[eng.index[a]] != n - 1:
                    raise InputError(f"{side_name} must consist of {n - 1}-atoms")
    si = frozenset(eng.index[a] for a in s)
    xi = {eng.index[a] for a in x}
    yi = {eng.index[a] for a in y}
    return eng.moves_ok(si, xi, yi)


def cell_defect(pre) -> str | None:
    """Why the candidate is not a cell, or None if it is one.

    Accepts a Cell or anything cell_from_data accepts; structural problems
    (unknown ids, bad dimensions) surface as InputError from construction,
    everything else as a reason string.
    """
    if not isinstance(pre, Cell):
        raise InputError("cell_defect expects a Cell (build one with cell_from_data)")
    eng = _engine.engine_of(pre.complex)
    return eng.cell_defect(_raw(pre, eng))


def is_cell(pre) -> bool:
    return cell_defect(pre) is None


def atom_cell(cx: Complex, atom_id: str) -> Cell:
    """The cell associated with one atom: top sets the singleton, lower
    levels obtained by repeatedly taking net minus/plus faces of the plus
    side."""
    eng = _engine.engine_of(cx)
    if atom_id not in eng.index:
        raise InputError(f"unknown atom id {atom_id!r}")
    a = eng.index[atom_id]
    return _public(cx, eng, eng.atom_cell(a))


def boundary(cell: Cell, sign, i: int) -> Cell:
    """Truncate to level i, duplicating the chosen side there."""
    if i > cell.n:
        raise InputError(f"boundary level {i} above cell dimension {cell.n}")
    side = cell.sets[2 * i + _SIGNS[sign]]
    return Cell(cell.complex, i, cell.sets[: 2 * i] + (side, side))


def identity(cell: Cell, target_dim: int) -> Cell:
    """Pad with empty levels up to target_dim."""
    if target_dim < cell.n:
        raise InputError("identity target dimension below the cell's")
    pad = (frozenset(),) * (2 * (target_dim - cell.n))
    return Cell(cell.complex, target_dim, cell.sets + pad)


def compose(b: Cell, a: Cell, i: int) -> Cell:
    """b after a along level i: shared data below i, a's minus and b's plus
    at i, disjoint unions above."""
    if a.complex != b.complex:
        raise InputError("cells live in different complexes")
    if a.n != b.n:
        raise DimensionError("composition needs equal formal dimensions")
    n = a.n
    if i >= n:
        raise DimensionError(f"no composition at level {i} for {n}-cells")
    if boundary(a, "+", i) != boundary(b, "-", i):
        raise BoundaryMismatch(
            f"target boundary of the first factor differs from source "
            f"boundary of the second at level {i}"
        )
    out = list(a.sets[: 2 * i])
    out.append(a.sets[2 * i])
    out.append(b.sets[2 * i + 1])
    for j in range(i + 1, n + 1):
        if a.sets[2 * j] & b.sets[2 * j] or a.sets[2 * j + 1] & b.sets[2 * j + 1]:
            raise InputError(f"factors overlap at level {j}; not composable")
        out.append(a.sets[2 * j] | b.sets[2 * j])
        out.append(a.sets[2 * j + 1] | b.sets[2 * j + 1])
    return Cell(a.complex, n, tuple(out))


def support(cell: Cell) -> frozenset:
    """Union of all the cell's sets."""
    out: set = set()
    for S in cell.sets:
        out |= S
    return frozenset(out)


@dataclass
class CellSetReport:
    """Output of enumerate_cells: all cells, grouped by formal dimension.

    ``cells_by_dim[n]`` holds every n-cell, identity paddings included.
    ``generation_trace`` maps each cell at its intrinsic dimension to how
    the closure first produced it: ("atom", id) or ("compose", left, right,
    level).
    """

    complex: Complex
    cells_by_dim: dict
    generation_trace: dict | None = None

    def count(self, n: int) -> int:
        return len(self.cells_by_dim.get(n, ()))

    def nondegenerate(self, n: int) -> frozenset:
        return frozenset(
            c for c in self.cells_by_dim.get(n, ()) if c.intrinsic_dim == n
        )


def enumerate_cells(
    cx: Complex,
    max_cells: int | None = None,
    trace: bool = False,
    order: str = "default",
) -> CellSetReport:
    """All cells of each dimension up to the complex's dimension.

    Closure of the atom cells and identities under every defined binary
    composition; raises BudgetError when max_cells is exceeded, InputError
    when the complex fails validation.  ``order="reversed"`` re-runs the
    closure from a reversed atom listing (the fixed point must agree; used
    by the order-independence checks).
    """
    report = validate(cx)
    if not report.valid:
        raise InputError(
            "enumerate_cells needs a valid complex; failures: "
            + "; ".join(f"{c.name}@{c.dim}" for c in report.failures())
        )
    if order == "reversed":
        rev = Complex(tuple(reversed(cx.atoms)), cx.name)
        rep = enumerate_cells(rev, max_cells=max_cells, trace=trace)
        remapped = {
            n: frozenset(Cell(cx, c.n, c.sets) for c in cs)
            for n, cs in rep.cells_by_dim.items()
        }
        tr = None
        if rep.generation_trace is not None:
            tr = {
                Cell(cx, c.n, c.sets): v for c, v in rep.generation_trace.items()
            }
        return CellSetReport(cx, remapped, tr)
    if order != "default":
        raise InputError(f"unknown order {order!r}")
    eng = _engine.engine_of(cx)
    old_cap = eng.max_cells
    eng.max_cells = max_cells if max_cells is not None else old_cap
    try:
        trimmed = eng.cells()
    finally:
        eng.max_cells = old_cap
    by_dim: dict = {}
    for n in range(cx.dim + 1):
        by_dim[n] = frozenset(
            _public(cx, eng, t, n) for t in trimmed if _engine.intr(t) <= n
        )
    tr = None
    if trace:
        tr = {}
        for t in trimmed:
            prov = eng.trace.get(t)
            if prov is None:
                continue
            if prov[0] == "atom":
                tr[_public(cx, eng, t)] = ("atom", eng.ids[prov[1]])
            else:
                tr[_public(cx, eng, t)] = (
                    "compose",
                    _public(cx, eng, prov[1]),
                    _public(cx, eng, prov[2]),
                    prov[3],
                )
    return CellSetReport(cx, by_dim, tr)


def support_injective(cx: Complex) -> bool:
    """Distinct cells (at intrinsic dimension) have distinct supports."""
    eng = _engine.engine_of(cx)
    seen: dict = {}
    for t in eng.cells():
        s = eng.supp(t)
        if s in seen and seen[s] != t:
            return False
        seen[s] = t
    return True


# -- JSON wire format ----------------------------------------------------------
#
# {"n": 2, "sets": {"-0": [...], "+0": [...], "-1": [...], "+1": [...],
#                   "-2": [...], "+2": [...]}}
# Signed keys are strings; "-0" and "+0" are distinct.


def cell_from_data(cx: Complex, data) -> Cell:
    if not isinstance(data, dict):
        raise InputError("cell JSON must be an object")
    unknown = set(data) - {"n", "sets"}
    if unknown:
        raise InputError(f"unknown keys in cell JSON: {sorted(unknown)}")
    if "n" not in data or not isinstance(data["n"], int):
        raise InputError("cell JSON needs an integer 'n'")
    n = data["n"]
    raw = data.get("sets")
    if not isinstance(raw, dict):
        raise InputError("cell JSON needs a 'sets' object")
    expected = {f"{s}{i}" for i in range(n + 1) for s in "-+"}
    if set(raw) != expected:
        raise InputError(
            f"cell sets keys must be exactly {sorted(expected)}, got {sorted(raw)}"
        )
    sets = []
    for i in range(n + 1):
        sets.append(frozenset(raw[f"-{i}"]))
        sets.append(frozenset(raw[f"+{i}"]))
    return Cell(cx, n, tuple(sets))


def cell_to_data(cell: Cell) -> dict:
    sets = {}
    for i in range(cell.n + 1):
        sets[f"-{i}"] = sorted(cell.sets[2 * i])
        sets[f"+{i}"] = sorted(cell.sets[2 * i + 1])
    return {"n": cell.n, "sets": sets}
