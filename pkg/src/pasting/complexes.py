"""Graded complexes of atoms with minus/plus boundary maps.

A complex is a finite family of named atoms, each carrying a dimension and
two sets of faces one dimension down.  This module holds the data types,
the closure operator, the one-step relation between same-dimensional atoms
(sharing of a plus-face with a minus-face), and the validator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import InputError

__all__ = [
    "Atom",
    "Complex",
    "Subcomplex",
    "RelationGraph",
    "ValidationReport",
    "Check",
    "validate",
    "closure",
    "triangle_relation",
    "restrict",
    "swap_orientation",
    "complex_from_data",
    "complex_to_data",
    "load_complex",
    "dump_complex",
]


@dataclass(frozen=True)
class Atom:
    """A single generator: an id, a dimension, and two face sets."""

    id: str
    dim: int
    minus: frozenset = frozenset()
    plus: frozenset = frozenset()


@dataclass(frozen=True)
class Complex:
    """A finite graded set of atoms with boundary maps.

    Construction enforces only *structural* sanity (unique ids, faces that
    resolve to atoms of dimension exactly dim-1, no faces on 0-atoms).
    Semantic conditions -- nonempty boundaries, acyclicity, well-formed
    atom cells -- are the validator's job, so that invalid complexes can
    still be built and reported on.
    """

    atoms: tuple = ()
    name: str | None = None

    def __post_init__(self):
        seen = {}
        for a in self.atoms:
            if not isinstance(a.id, str):
                raise InputError(f"atom id {a.id!r} is not a string")
            if a.id in seen:
                raise InputError(f"duplicate atom id {a.id!r}")
            if a.dim < 0:
                raise InputError(f"atom {a.id!r} has negative dimension")
            seen[a.id] = a
        for a in self.atoms:
            if a.dim == 0 and (a.minus or a.plus):
                raise InputError(f"0-atom {a.id!r} must have empty boundaries")
            for face in a.minus | a.plus:
                if face not in seen:
                    raise InputError(f"atom {a.id!r} has dangling face {face!r}")
                if seen[face].dim != a.dim - 1:
                    raise InputError(
                        f"face {face!r} of {a.id!r} has dimension "
                        f"{seen[face].dim}, expected {a.dim - 1}"
                    )

    @property
    def dim(self) -> int:
        """Largest atom dimension; -1 for the empty complex."""
        return max((a.dim for a in self.atoms), default=-1)

    @property
    def ids(self) -> tuple:
        return tuple(a.id for a in self.atoms)

    def atom(self, atom_id: str) -> Atom:
        for a in self.atoms:
            if a.id == atom_id:
                return a
        raise InputError(f"unknown atom id {atom_id!r}")

    def has_atom(self, atom_id: str) -> bool:
        return any(a.id == atom_id for a in self.atoms)

    def by_dim(self, d: int) -> tuple:
        return tuple(a for a in self.atoms if a.dim == d)


@dataclass(frozen=True)
class Subcomplex:
    """A set of atom ids of a parent complex, closed under both face maps."""

    parent: Complex
    members: frozenset

    def __post_init__(self):
        known = set(self.parent.ids)
        for m in self.members:
            if m not in known:
                raise InputError(f"subcomplex member {m!r} not in parent")
        for a in self.parent.atoms:
            if a.id in self.members:
                missing = (a.minus | a.plus) - self.members
                if missing:
                    raise InputError(
                        f"subcomplex not closed: {a.id!r} needs {sorted(missing)}"
                    )

    def as_complex(self) -> Complex:
        return restrict(self.parent, self.members)


@dataclass(frozen=True)
class RelationGraph:
    """Ordered pairs (x, y) of same-dimensional atoms with x.plus meeting y.minus."""

    dim: int
    edges: frozenset


@dataclass(frozen=True)
class Check:
    """One validator verdict.  `dim` is None for global checks."""

    name: str
    dim: int | None
    ok: bool
    detail: str = ""


@dataclass
class ValidationReport:
    complex_name: str | None
    checks: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def to_data(self) -> dict:
        return {
            "name": self.complex_name,
            "valid": self.valid,
            "checks": [
                {"name": c.name, "dim": c.dim, "ok": c.ok, "detail": c.detail}
                for c in self.checks
            ],
        }


def closure(cx: Complex, seed: Iterable[str]) -> Subcomplex:
    """Smallest subcomplex of `cx` containing `seed`.

    Least fixed point of adding minus/plus faces; idempotent, monotone and
    extensive in the seed set.
    """
    atom = {a.id: a for a in cx.atoms}
    todo = list(seed)
    out = set()
    for s in todo:
        if s not in atom:
            raise InputError(f"unknown atom id {s!r}")
    while todo:
        x = todo.pop()
        if x in out:
            continue
        out.add(x)
        todo.extend(atom[x].minus)
        todo.extend(atom[x].plus)
    return Subcomplex(cx, frozenset(out))


def triangle_relation(cx: Complex, n: int) -> RelationGraph:
    """Pairs (x, y) of n-atoms with x.plus meeting y.minus."""
    if n < 1:
        raise InputError("the relation is defined for dimension >= 1")
    level = cx.by_dim(n)
    edges = frozenset(
        (x.id, y.id) for x in level for y in level if x.plus & y.minus
    )
    return RelationGraph(n, edges)


def _find_cycle(nodes: Sequence[str], succ: Mapping[str, Sequence[str]]):
    """Return one directed cycle as a list of nodes, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {v: WHITE for v in nodes}
    stack_path: list = []

    def visit(v):
        color[v] = GREY
        stack_path.append(v)
        for w in succ.get(v, ()):
            if color[w] == GREY:
                return stack_path[stack_path.index(w):] + [w]
            if color[w] == WHITE:
                found = visit(w)
                if found:
                    return found
        stack_path.pop()
        color[v] = BLACK
        return None

    for v in nodes:
        if color[v] == WHITE:
            found = visit(v)
            if found:
                return found
    return None


def validate(cx: Complex, extra_checks: Iterable[Callable] = ()) -> ValidationReport:
    """Check a complex, one verdict per condition.

    Per dimension n >= 1: acyclicity of the one-step relation (its
    transitive closure must be irreflexive) and nonemptiness of both
    boundary sets.  On top of that a semantic surrogate battery: every
    atom's associated cell must be a well-formed cell.  `extra_checks` is a
    hook for additional axioms; each callable receives the complex and
    returns an iterable of Check.
    """
    report = ValidationReport(cx.name)
    for n in range(1, cx.dim + 1):
        bad = [a.id for a in cx.by_dim(n) if not a.minus or not a.plus]
        report.checks.append(
            Check(
                "nonempty-boundaries",
                n,
                not bad,
                "" if not bad else f"empty boundary on {sorted(bad)}",
            )
        )
        rel = triangle_relation(cx, n)
        succ: dict = {}
        for x, y in rel.edges:
            succ.setdefault(x, []).append(y)
        for v in succ:
            succ[v].sort()
        cycle = _find_cycle(sorted(a.id for a in cx.by_dim(n)), succ)
        report.checks.append(
            Check(
                "acyclic",
                n,
                cycle is None,
                "" if cycle is None else "cycle " + " < ".join(cycle),
            )
        )
    # Surrogate battery: atom cells must be honest cells.
    from . import cells as _cells

    bad_atoms = []
    if not report.failures():
        for a in cx.atoms:
            defect = _cells.cell_defect(_cells.atom_cell(cx, a.id))
            if defect is not None:
                bad_atoms.append(f"{a.id}: {defect}")
    report.checks.append(
        Check(
            "atom-cells (surrogate)",
            None,
            not bad_atoms,
            "; ".join(bad_atoms[:5]),
        )
    )
    for hook in extra_checks:
        report.checks.extend(hook(cx))
    return report


def restrict(cx: Complex, members: Iterable[str]) -> Complex:
    """Standalone complex on a closed subset of atoms (order preserved)."""
    keep = set(members)
    for a in cx.atoms:
        if a.id in keep and (a.minus | a.plus) - keep:
            raise InputError(f"restriction not closed at {a.id!r}")
    sub_name = None if cx.name is None else f"{cx.name}|{len(keep)}"
    return Complex(tuple(a for a in cx.atoms if a.id in keep), sub_name)


def swap_orientation(cx: Complex) -> Complex:
    """Exchange every atom's minus and plus sets."""
    return Complex(
        tuple(Atom(a.id, a.dim, a.plus, a.minus) for a in cx.atoms),
        None if cx.name is None else cx.name + "~swap",
    )


# -- JSON wire format ---------------------------------------------------------
#
# {"name": "...", "atoms": [{"id": "...", "dim": 0},
#                           {"id": "...", "dim": 1, "minus": [...], "plus": [...]}]}
# minus/plus present exactly when dim >= 1; unknown keys are rejected.


def complex_from_data(data) -> Complex:
    if not isinstance(data, dict):
        raise InputError("complex JSON must be an object")
    unknown = set(data) - {"name", "atoms"}
    if unknown:
        raise InputError(f"unknown keys in complex JSON: {sorted(unknown)}")
    if "atoms" not in data or not isinstance(data["atoms"], list):
        raise InputError("complex JSON needs an 'atoms' list")
    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise InputError("'name' must be a string")
    atoms = []
    for entry in data["atoms"]:
        if not isinstance(entry, dict):
            raise InputError("atom entries must be objects")
        unknown = set(entry) - {"id", "dim", "minus", "plus"}
        if unknown:
            raise InputError(f"unknown keys in atom entry: {sorted(unknown)}")
        if "id" not in entry or "dim" not in entry:
            raise InputError("atom entries need 'id' and 'dim'")
        dim = entry["dim"]
        if not isinstance(dim, int):
            raise InputError("atom 'dim' must be an integer")
        if dim == 0:
            if "minus" in entry or "plus" in entry:
                raise InputError(
                    f"0-atom {entry['id']!r} must omit 'minus'/'plus'"
                )
            minus = plus = frozenset()
        else:
            if "minus" not in entry or "plus" not in entry:
                raise InputError(
                    f"atom {entry['id']!r} of dim {dim} needs 'minus' and 'plus'"
                )
            minus = frozenset(entry["minus"])
            plus = frozenset(entry["plus"])
        atoms.append(Atom(entry["id"], dim, minus, plus))
    return Complex(tuple(atoms), name)


def complex_to_data(cx: Complex) -> dict:
    atoms = []
    for a in cx.atoms:
        entry: dict = {"id": a.id, "dim": a.dim}
        if a.dim >= 1:
            entry["minus"] = sorted(a.minus)
            entry["plus"] = sorted(a.plus)
        atoms.append(entry)
    data: dict = {}
    if cx.name is not None:
        data["name"] = cx.name
    data["atoms"] = atoms
    return data


def load_complex(path) -> Complex:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"bad JSON in {path}: {exc}") from exc
    return complex_from_data(data)


def dump_complex(cx: Complex, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(complex_to_data(cx), fh, indent=2, sort_keys=False)
        fh.write("\n")
