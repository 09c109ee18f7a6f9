"""Globular pasting shapes as terms, and their category-level checks.

A term is a finite tree: the empty tree denotes a point, and a tree with
children t_1 .. t_r denotes the chain of suspensions of the t_i glued end
to end (sink of each factor to source of the next).  These are exactly
the finite globular pasting shapes; the complex of a term is computed by
structural recursion.

The module also provides suspension and wedge of arbitrary complexes, hom
views between objects of a cell category, shape recognition, and the
whole-category regularity checks (every nondegenerate shape-point is
injective; compositions cancel on both factors).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from . import _engine
from .cells import Cell, _public
from .complexes import Atom, Complex
from .errors import InputError

__all__ = [
    "ThetaTerm",
    "term_to_complex",
    "suspend",
    "wedge",
    "wedge_parts",
    "sinks",
    "sources",
    "HomView",
    "hom_category",
    "theta_recognize",
    "used_dims",
    "check_theta_regular",
    "theta_regular_report",
    "check_hypercancellative",
]


@dataclass(frozen=True)
class ThetaTerm:
    """A finite tree denoting a globular pasting shape."""

    children: tuple = ()

    @classmethod
    def from_data(cls, data) -> "ThetaTerm":
        if not isinstance(data, (list, tuple)):
            raise InputError("a term is a (nested) list")
        return cls(tuple(cls.from_data(c) for c in data))

    @classmethod
    def parse(cls, text: str) -> "ThetaTerm":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad term JSON: {exc}") from exc
        return cls.from_data(data)

    @classmethod
    def globe(cls, n: int) -> "ThetaTerm":
        t = cls()
        for _ in range(n):
            t = cls((t,))
        return t

    @classmethod
    def chain(cls, r: int) -> "ThetaTerm":
        """The linear shape with r composable arrows."""
        return cls((cls(),) * r)

    def to_data(self) -> list:
        return [c.to_data() for c in self.children]

    def to_tuple(self) -> tuple:
        return tuple(c.to_tuple() for c in self.children)

    @classmethod
    def from_tuple(cls, tt) -> "ThetaTerm":
        return cls(tuple(cls.from_tuple(c) for c in tt))

    @property
    def height(self) -> int:
        return 1 + max((c.height for c in self.children), default=-1) if self.children else 0

    @property
    def generator_count(self) -> int:
        """Positive-dimensional atoms of the denoted complex."""
        return len(self.children) + sum(c.generator_count for c in self.children)

    @property
    def atom_count(self) -> int:
        """All atoms of the denoted complex, objects included."""
        return 1 + len(self.children) + sum(c.atom_count for c in self.children)

    def __repr__(self):
        return f"ThetaTerm{json.dumps(self.to_data(), separators=(',', ':'))}"


def used_dims(t: ThetaTerm) -> frozenset:
    """The minimal set of composition levels the term's shape uses:
    level 0 appears iff the root has at least two children; each child
    contributes its own used levels shifted up by one.  Globes use none."""
    out = set()
    if len(t.children) >= 2:
        out.add(0)
    for c in t.children:
        out |= {d + 1 for d in used_dims(c)}
    return frozenset(out)


@lru_cache(maxsize=None)
def _cellcounts(tt) -> tuple:
    """Nondegenerate cell counts per dimension of the shape's category,
    as a tuple indexed by dimension."""
    if tt == ():
        return (1,)
    child = [_cellcounts(c) for c in tt]
    maxd = max(len(cc) - 1 for cc in child)
    cum = [
        [sum(cc[: d + 1]) for d in range(maxd + 1)]
        for cc in ([list(c) + [0] * (maxd + 1 - len(c)) for c in child])
    ]
    # cum[l][d] counts the cells of child l of dimension <= d
    for l, cc in enumerate(child):
        for d in range(len(cc), maxd + 1):
            cum[l][d] = cum[l][len(cc) - 1]
    r = len(tt)
    out = [r + 1] + [0] * (maxd + 1)
    for i in range(r):
        for j in range(i, r):
            for d in range(maxd + 1):
                prod_d = 1
                prod_below = 1 if d >= 1 else 0
                for l in range(i, j + 1):
                    prod_d *= cum[l][d]
                    if d >= 1:
                        prod_below *= cum[l][d - 1]
                cnt = prod_d - prod_below
                out[d + 1] += cnt
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return tuple(out)


def shape_cell_count(t: ThetaTerm) -> int:
    """Total number of cells (each counted once, at its own dimension)."""
    return sum(_cellcounts(t.to_tuple()))


def _term_atoms(tt) -> list:
    if tt == ():
        return [Atom("o0", 0)]
    r = len(tt)
    atoms = [Atom(f"o{i}", 0) for i in range(r + 1)]
    for i, child in enumerate(tt, start=1):
        for a in _term_atoms(child):
            nid = f"w{i}.{a.id}"
            if a.dim == 0:
                atoms.append(
                    Atom(nid, 1, frozenset((f"o{i - 1}",)), frozenset((f"o{i}",)))
                )
            else:
                atoms.append(
                    Atom(
                        nid,
                        a.dim + 1,
                        frozenset(f"w{i}.{x}" for x in a.minus),
                        frozenset(f"w{i}.{x}" for x in a.plus),
                    )
                )
    return atoms


def term_to_complex(t: ThetaTerm) -> Complex:
    """The unique complex whose cell category realizes the term.

    Atom ids are positional paths (objects o0..or, factor i atoms prefixed
    "w{i}.") so the construction is deterministic.
    """
    name = "theta" + json.dumps(t.to_data(), separators=(",", ":"))
    return Complex(tuple(_term_atoms(t.to_tuple())), name)


def suspend(cx: Complex) -> Complex:
    """Shift all atoms up a dimension between two fresh endpoints "-", "+";
    former 0-atoms become arrows from "-" to "+"."""
    if cx.has_atom("-") or cx.has_atom("+"):
        raise InputError('complex already uses the reserved ids "-"/"+"')
    atoms = [Atom("-", 0), Atom("+", 0)]
    for a in cx.atoms:
        if a.dim == 0:
            atoms.append(Atom(a.id, 1, frozenset(("-",)), frozenset(("+",))))
        else:
            atoms.append(Atom(a.id, a.dim + 1, a.minus, a.plus))
    return Complex(tuple(atoms), None if cx.name is None else f"susp({cx.name})")


def sinks(cx: Complex) -> tuple:
    """0-atoms with no outgoing 1-atom."""
    out = set(a.id for a in cx.by_dim(0))
    for f in cx.by_dim(1):
        out -= f.minus
    return tuple(sorted(out))


def sources(cx: Complex) -> tuple:
    """0-atoms with no incoming 1-atom."""
    out = set(a.id for a in cx.by_dim(0))
    for f in cx.by_dim(1):
        out -= f.plus
    return tuple(sorted(out))


def wedge_parts(a: Complex, sink: str, b: Complex, source: str):
    """Glue the sink of `a` to the source of `b`.

    Returns (complex, left_map, right_map) where the maps send original
    atom ids into the glued complex (right-side atoms are renamed with an
    "r." prefix when they would collide)."""
    if sink not in sinks(a):
        raise InputError(f"{sink!r} is not a sink 0-atom of the left complex")
    if source not in sources(b):
        raise InputError(f"{source!r} is not a source 0-atom of the right complex")
    left_ids = set(a.ids)
    collide = any(x in left_ids for x in b.ids if x != source)
    rmap = {}
    for x in b.ids:
        if x == source:
            rmap[x] = sink
        elif collide:
            nid = "r." + x
            while nid in left_ids:
                nid = "r." + nid
            rmap[x] = nid
        else:
            rmap[x] = x
    atoms = list(a.atoms)
    for at in b.atoms:
        if at.id == source:
            continue
        atoms.append(
            Atom(
                rmap[at.id],
                at.dim,
                frozenset(rmap[x] for x in at.minus),
                frozenset(rmap[x] for x in at.plus),
            )
        )
    name = None
    if a.name is not None and b.name is not None:
        name = f"wedge({a.name},{b.name})"
    cx = Complex(tuple(atoms), name)
    return cx, {x: x for x in a.ids}, rmap


def wedge(a: Complex, sink: str, b: Complex, source: str) -> Complex:
    return wedge_parts(a, sink, b, source)[0]


@dataclass(frozen=True)
class HomView:
    """The cells between two objects, one dimension down.

    A k-cell of the view is a (k+1)-cell of the ambient complex whose
    0-source and 0-target are the two chosen objects; compositions are
    inherited (compose at level i in the view = level i+1 upstairs)."""

    complex: Complex
    source: str
    target: str

    def _frame(self, eng):
        return (
            frozenset((eng.index[self.source],)),
            frozenset((eng.index[self.target],)),
        )

    def cells(self, k: int) -> frozenset:
        """k-cells of the view, as (k+1)-cells of the ambient complex."""
        eng = _engine.engine_of(self.complex)
        q = eng.frame_query(1, self._frame(eng))
        return frozenset(
            _public(self.complex, eng, c, k + 1)
            for c in q
            if _engine.intr(c) <= k + 1
        )

    def objects(self) -> frozenset:
        return self.cells(0)


def hom_category(cx: Complex, x: str, y: str) -> HomView:
    eng = _engine.engine_of(cx)
    for z in (x, y):
        if z not in eng.index:
            raise InputError(f"unknown atom id {z!r}")
        if eng.dim_of[eng.index[z]] != 0:
            raise InputError(f"{z!r} is not a 0-atom")
    return HomView(cx, x, y)


def _recognize(eng: _engine.Engine, k: int, frame) -> tuple | None:
    cs = eng.frame_query(k, frame)
    objs = [c for c in cs if _engine.intr(c) <= k]
    if not objs:
        return None
    if len(objs) == 1:
        return () if len(cs) == 1 else None
    # With several objects the frame is full, so objects are k-cells with
    # distinct tops; arrows between them are the higher cells of the frame.
    tops = {c: c[2 * k] for c in objs}
    reach = {
        (c[2 * k], c[2 * k + 1]) for c in cs if _engine.intr(c) > k
    }
    for u in objs:
        for v in objs:
            if u is v:
                continue
            fwd = (tops[u], tops[v]) in reach
            bwd = (tops[v], tops[u]) in reach
            if fwd == bwd:
                return None  # not a strict total order
    chain = sorted(objs, key=lambda u: sum((tops[u], tops[v]) in reach for v in objs))
    chain.reverse()
    factors = []
    for u, v in zip(chain, chain[1:]):
        sub = _recognize(eng, k + 1, frame + (tops[u], tops[v]))
        if sub is None:
            return None
        factors.append(sub)
    term = tuple(factors)
    # Cardinality audit: the view must have exactly the shape's cells.
    expect = _cellcounts(term)
    actual: dict = {}
    for c in cs:
        m = max(0, _engine.intr(c) - k)
        actual[m] = actual.get(m, 0) + 1
    if actual != {d: n for d, n in enumerate(expect) if n}:
        return None
    # Every spanning cell must split at every intermediate object.
    pos = {tops[u]: i for i, u in enumerate(chain)}
    for c in cs:
        if _engine.intr(c) <= k:
            continue
        i, j = pos[c[2 * k]], pos[c[2 * k + 1]]
        for l in range(i + 1, j):
            mid = tops[chain[l]]
            if not any(x[2 * k + 1] == mid for x, _ in eng.splits(c, k)):
                return None
    return term


def theta_recognize(target) -> ThetaTerm | None:
    """The unique term whose shape realizes the given category, or None.

    Accepts a Complex (the whole cell category) or a HomView."""
    if isinstance(target, HomView):
        eng = _engine.engine_of(target.complex)
        eng.cells()
        tt = _recognize(eng, 1, target._frame(eng))
    else:
        eng, members = _engine.engine_and_members(target)
        if members is not None:
            raise InputError("theta_recognize expects a Complex or HomView")
        eng.cells()
        tt = _recognize(eng, 0, ())
    return None if tt is None else ThetaTerm.from_tuple(tt)


def theta_regular_report(target, gen_bound: int | None = None) -> dict:
    """Check that every nondegenerate shape-point is injective on cells.

    Enumerates all decomposition trees of all cells (each tree is one
    nondegenerate point of one pasting shape); a point is injective iff
    its generated subcategory has exactly as many cells as the abstract
    shape.  `gen_bound` skips shapes with more atoms than the bound.
    Accepts a Complex or a Subcomplex."""
    eng, members = _engine.engine_and_members(target)
    points = 0
    skipped = 0
    failures = []
    for node in eng.subcat_nodes(members):
        tt = eng.node_term(node)
        term = ThetaTerm.from_tuple(tt)
        if gen_bound is not None and term.atom_count > gen_bound:
            skipped += 1
            continue
        points += 1
        if len(eng.node_image(node)) != shape_cell_count(term):
            failures.append(term.to_data())
    return {
        "points": points,
        "skipped": skipped,
        "injective": not failures,
        "failures": failures[:10],
    }


def check_theta_regular(target, gen_bound: int | None = None) -> bool:
    return theta_regular_report(target, gen_bound)["injective"]


def check_hypercancellative(target) -> bool:
    """Brute-force search over all composition collisions: equal composites
    along the same level with the same middle boundary must come from
    equal factor pairs.  Accepts a Complex or a Subcomplex."""
    eng, members = _engine.engine_and_members(target)
    return eng.hypercancellative_defect(members) is None


def hypercancellative_witness(cx: Complex):
    """None, or (level, a, b, a2, b2) with b∘a == b2∘a2 but (a,b) != (a2,b2)."""
    eng = _engine.engine_of(cx)
    w = eng.hypercancellative_defect()
    if w is None:
        return None
    i, a, b, a2, b2 = w
    return (
        i,
        _public(cx, eng, a),
        _public(cx, eng, b),
        _public(cx, eng, a2),
        _public(cx, eng, b2),
    )
