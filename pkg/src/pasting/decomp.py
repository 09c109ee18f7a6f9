"""Decomposition posets of a cell and the functors between them.

A decomposition of a cell is a pasting-shape subcategory of the cell
category containing it; ordered by containment of cell sets these form a
poset with the singleton decomposition at the bottom.  This module
enumerates these posets (optionally restricted to shapes using a given
set of composition levels), extracts the induced preorders on boundary
atoms, merges composition levels, restricts to boundaries, and runs the
order-isomorphism and opfibration checks on the resulting maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from . import _engine
from .cells import Cell, _public, _raw, _trim
from .complexes import Complex, Subcomplex, closure
from .errors import BudgetError, HypothesisNotMet, InputError
from .posets import FinPoset, FinPreorder, lin
from .theta import ThetaTerm, used_dims

__all__ = [
    "Decomposition",
    "DecompPoset",
    "AtPreorder",
    "atom_preorder",
    "decomposition_poset",
    "decomposition_preorder",
    "merge_compositions",
    "boundary_restriction",
    "check_preorder_iso",
    "check_cocartesian",
    "max_nonequivalence_level",
]


@dataclass(frozen=True)
class Decomposition:
    """One pasting-shape subcategory: its term, its generators (leaf path
    in the term tree -> generating cell), and the full cell set."""

    complex: Complex
    term: ThetaTerm
    generators: tuple  # ((path, Cell), ...) in term order
    image: frozenset  # of Cell, each at its intrinsic dimension
    _node: object = field(compare=False, repr=False, hash=False, default=None)

    def composite(self) -> Cell:
        """The cell the generators assemble to (the root of the tree)."""
        eng = _engine.engine_of(self.complex)
        return _public(self.complex, eng, self._node.cell)

    def to_data(self) -> dict:
        from .cells import cell_to_data

        return {
            "term": self.term.to_data(),
            "generators": {
                ".".join(map(str, path)): cell_to_data(c)
                for path, c in self.generators
            },
        }


def _decomposition_from_node(cx: Complex, eng: _engine.Engine, node) -> Decomposition:
    term = ThetaTerm.from_tuple(eng.node_term(node))
    gens = tuple(
        (path, _public(cx, eng, cell)) for path, cell in eng.node_leaves(node)
    )
    image = frozenset(_public(cx, eng, c) for c in eng.node_image(node))
    return Decomposition(cx, term, gens, image, node)


def _raw_key(raw_cell) -> tuple:
    return (len(raw_cell), tuple(tuple(sorted(S)) for S in raw_cell))


def _element_sort_key(eng, node):
    img = eng.node_image(node)
    return (
        len(img),
        eng.node_term(node),
        tuple(sorted(_raw_key(c) for c in img)),
    )


@dataclass
class DecompPoset:
    """Decompositions of one cell, ordered by containment of cell sets."""

    mu: Cell
    ambient: Subcomplex
    restriction: frozenset | None  # None means every composition level
    keep_bottom: bool
    elements: tuple  # of Decomposition, canonically sorted

    def __len__(self) -> int:
        return len(self.elements)

    def leq(self, i: int, j: int) -> bool:
        return self.elements[i].image <= self.elements[j].image

    def order_pairs(self) -> list:
        return [
            [i, j]
            for i in range(len(self.elements))
            for j in range(len(self.elements))
            if i != j and self.leq(i, j)
        ]

    def to_finposet(self) -> FinPoset:
        labels = tuple(str(i) for i in range(len(self.elements)))
        pairs = [(str(i), str(j)) for i, j in self.order_pairs()]
        return FinPreorder.from_pairs(labels, pairs).as_poset()

    def to_data(self) -> dict:
        from .cells import cell_to_data

        return {
            "mu": cell_to_data(self.mu),
            "elements": [d.to_data() for d in self.elements],
            "order": self.order_pairs(),
        }


def _mu_raw(mu: Cell, eng: _engine.Engine):
    raw = _trim(_raw(mu, eng))
    eng.cells()
    if not eng.is_known_cell(raw):
        raise InputError("the given data is not a cell of its complex")
    return eng.canon(raw)


def decomposition_poset(
    mu: Cell,
    ambient: Subcomplex | None = None,
    restriction: Iterable[int] | str = "all",
    keep_bottom: bool = False,
    max_elements: int | None = None,
) -> DecompPoset:
    """All pasting-shape subcategories of the ambient cell category that
    contain mu, ordered by containment.

    Default ambient is the closure of mu's support, where mu is forced to
    be the composite of every element; a larger ambient (the whole
    complex, say) also admits shapes in which mu sits as a lower cell.
    ``restriction`` keeps only shapes whose term uses the given
    composition levels; ``keep_bottom`` retains the singleton
    decomposition generated by mu alone.
    """
    cx = mu.complex
    eng = _engine.engine_of(cx)
    raw = _mu_raw(mu, eng)
    closure_ids = frozenset(eng.ids[i] for i in eng.supp_closure(raw))
    if ambient is None:
        ambient = Subcomplex(cx, closure_ids)
    else:
        if ambient.parent != cx:
            raise InputError("ambient subcomplex belongs to a different complex")
        if not closure_ids <= ambient.members:
            raise InputError("ambient does not contain the cell's support")
    dims: frozenset | None
    if restriction == "all":
        dims = None
    else:
        dims = frozenset(restriction)
    members = frozenset(eng.index[m] for m in ambient.members)
    if ambient.members == closure_ids:
        nodes = eng.decomps(raw, 0)
    else:
        nodes = [
            node
            for node in eng.subcat_nodes(members)
            if raw in eng.node_image(node)
        ]
    bottom_image = eng.gen_cells(raw)
    picked: dict = {}
    for node in nodes:
        if dims is not None:
            tt = eng.node_term(node)
            if not used_dims(ThetaTerm.from_tuple(tt)) <= dims:
                continue
        img = eng.node_image(node)
        if not keep_bottom and img == bottom_image:
            continue
        if img not in picked:
            picked[img] = node
            if max_elements is not None and len(picked) > max_elements:
                raise BudgetError(
                    f"decomposition poset exceeded cap of {max_elements}"
                )
    ordered = sorted(picked.values(), key=lambda n: _element_sort_key(eng, n))
    elements = tuple(_decomposition_from_node(cx, eng, n) for n in ordered)
    return DecompPoset(mu, ambient, dims, keep_bottom, elements)


@dataclass(frozen=True)
class AtPreorder:
    """The preorder on the k-atoms of a cell's forward k-boundary:
    equivalence generated by co-membership in the forward k-boundary of a
    higher atom of the cell's closure, order generated by the one-step
    relation."""

    mu: Cell
    k: int
    preorder: FinPreorder


def atom_preorder(mu: Cell, k: int) -> AtPreorder:
    if not 1 <= k <= mu.n:
        raise InputError(f"level must satisfy 1 <= k <= {mu.n}")
    eng = _engine.engine_of(mu.complex)
    raw = _mu_raw(mu, eng)
    carrier_ints = sorted(level_set(raw, 2 * k + 1))
    carrier = tuple(eng.ids[i] for i in carrier_ints)
    cset = set(carrier_ints)
    pairs = []
    for c in sorted(eng.supp_closure(raw)):
        if eng.dim_of[c] < k + 1:
            continue
        block = [x for x in eng.atom_cell(c)[2 * k + 1] if x in cset]
        for a in block:
            for b in block:
                if a != b:
                    pairs.append((eng.ids[a], eng.ids[b]))
    for a in carrier_ints:
        for b in carrier_ints:
            if a != b and eng.plus[a] & eng.minus[b]:
                pairs.append((eng.ids[a], eng.ids[b]))
    return AtPreorder(mu, k, FinPreorder.from_pairs(carrier, pairs))


def level_set(raw, idx):
    return raw[idx] if idx < len(raw) else frozenset()


def _bnd_trim(raw, sign: int, i: int):
    """Trimmed boundary of a (possibly padded) cell; the cell itself when
    i is at or above its intrinsic dimension."""
    if i >= _engine.intr(raw):
        return raw
    if sign > 0:
        return _engine.bplus(raw, i)
    return _engine.bminus(raw, i)


def decomposition_preorder(d: Decomposition, k: int, mu: Cell) -> FinPreorder:
    """The preorder a decomposition induces on the k-atoms of the forward
    k-boundary: atoms sharing a generator's support are equivalent, and
    one generator's block precedes another's when the second composes
    onto the first along level k-1."""
    if not used_dims(d.term) <= frozenset(range(k)):
        raise InputError(f"decomposition uses composition levels >= {k}")
    eng = _engine.engine_of(d.complex)
    raw = _mu_raw(mu, eng)
    carrier = tuple(eng.ids[i] for i in sorted(level_set(raw, 2 * k + 1)))
    cset = {eng.index[x] for x in carrier}
    gens_raw = [_trim(_raw(c, eng)) for _, c in d.generators]
    blocks = []
    for g in gens_raw:
        blocks.append([x for x in sorted(eng.supp(g)) if x in cset])
    pairs = []
    for block in blocks:
        for a in block:
            for b in block:
                if a != b:
                    pairs.append((eng.ids[a], eng.ids[b]))
    for gi, g in enumerate(gens_raw):
        for hi, h in enumerate(gens_raw):
            if gi == hi:
                continue
            if _bnd_trim(g, +1, k - 1) == _bnd_trim(h, -1, k - 1):
                for a in blocks[gi]:
                    for b in blocks[hi]:
                        pairs.append((eng.ids[a], eng.ids[b]))
    return FinPreorder.from_pairs(carrier, pairs)


def _initial_segment(dims: frozenset) -> bool:
    return dims == frozenset(range(len(dims)))


def _cut_tree(eng: _engine.Engine, node, depth: int, s: int):
    if depth >= s or node.children is None:
        return eng.leaf(node.cell)
    return eng._mk_node(
        node.cell,
        node.k,
        tuple(_cut_tree(eng, ch, depth + 1, s) for ch in node.children),
    )


def merge_compositions(
    d: Decomposition, from_dims: Iterable[int], to_dims: Iterable[int]
) -> Decomposition:
    """Compose away the composition levels in ``from_dims - to_dims``.

    ``to_dims`` must be an initial segment {0..s-1} contained in
    ``from_dims`` with no gaps below it; the result's generators are the
    composites of the subtrees cut at depth s.  Monotone in d.
    """
    from_set = frozenset(from_dims)
    to_set = frozenset(to_dims)
    if not to_set <= from_set:
        raise InputError("target levels must be contained in source levels")
    if not _initial_segment(to_set):
        raise InputError("target levels must form an initial segment")
    s = len(to_set)
    if from_set & frozenset(range(s)) != to_set:
        raise InputError("source levels have a gap below the target segment")
    if not used_dims(d.term) <= from_set:
        raise InputError("decomposition uses levels outside the source set")
    eng = _engine.engine_of(d.complex)
    new_node = _cut_tree(eng, d._node, 0, s)
    return _decomposition_from_node(d.complex, eng, new_node)


def _bdry_tree(eng: _engine.Engine, node, depth: int, m: int):
    cell = _bnd_trim(node.cell, +1, m)
    if node.children is None or depth >= m:
        return eng.leaf(cell)
    return eng._mk_node(
        cell,
        node.k,
        tuple(_bdry_tree(eng, ch, depth + 1, m) for ch in node.children),
    )


def boundary_restriction(d: Decomposition, m: int) -> Decomposition:
    """The decomposition induced on the forward m-boundary of the
    composite (the identity when m is at or above the composite's
    dimension)."""
    if m < 0:
        raise InputError("boundary level must be >= 0")
    eng = _engine.engine_of(d.complex)
    new_node = _bdry_tree(eng, d._node, 0, m)
    return _decomposition_from_node(d.complex, eng, new_node)


def max_nonequivalence_level(mu: Cell) -> int | None:
    """Largest k with the atom preorder at k not an equivalence relation.

    None means every level-preorder is an equivalence; for a cell that is
    nondegenerate at its formal dimension this happens exactly when the
    cell is an atom (identity cells also return None, every level being
    empty)."""
    for k in range(mu.n, 0, -1):
        if not atom_preorder(mu, k).preorder.is_equivalence():
            return k
    return None


def _equivalence_hypothesis(mu: Cell, k: int) -> bool:
    return all(
        atom_preorder(mu, i).preorder.is_equivalence()
        for i in range(k + 1, mu.n + 1)
    )


def _linear_label(p: FinPreorder) -> tuple | None:
    """Ordered block partition of a linear preorder, None if not linear."""
    if not p.is_linear():
        return None
    refl = p.posetal_reflection()
    order = sorted(
        range(refl.n), key=lambda i: sum(1 for j in range(refl.n) if refl.leq[i][j])
    )
    order.reverse()
    return tuple(refl.elements[i] for i in order)


def check_preorder_iso(mu: Cell, k: int) -> bool:
    """The single-level decomposition poset at level k-1 must biject,
    order-isomorphically, onto the linear refinements of the atom
    preorder at level k.

    Requires the atom preorders above k to be equivalence relations
    (vacuous for k = n); raises HypothesisNotMet otherwise.
    """
    if not 1 <= k <= mu.n:
        raise InputError(f"level must satisfy 1 <= k <= {mu.n}")
    if not _equivalence_hypothesis(mu, k):
        raise HypothesisNotMet(
            f"atom preorder above level {k} is not an equivalence relation"
        )
    side_a = decomposition_poset(mu, restriction=frozenset((k - 1,)))
    target = lin(atom_preorder(mu, k).preorder)
    labels = []
    for d in side_a.elements:
        lab = _linear_label(decomposition_preorder(d, k, mu))
        if lab is None or lab not in target.elements:
            return False
        labels.append(lab)
    if len(set(labels)) != len(labels):
        return False
    if len(labels) != target.n:
        return False
    for i in range(len(labels)):
        for j in range(len(labels)):
            want = target.le(labels[i], labels[j])
            have = side_a.leq(i, j)
            if want != have:
                return False
    return True


def check_cocartesian(
    mu: Cell, from_dims: Iterable[int], to_dims: Iterable[int]
) -> bool:
    """Is the level-merging map between the two restricted decomposition
    posets (bottoms kept) a cocartesian fibration?

    Applicable when from = {0..n-1}, to = {0..n-2} (unconditionally) or
    when to = {0..k-1} and the atom preorders above k are equivalence
    relations; raises HypothesisNotMet otherwise.
    """
    n = mu.intrinsic_dim
    from_set = frozenset(from_dims)
    to_set = frozenset(to_dims)
    if not (_initial_segment(from_set) and _initial_segment(to_set)):
        raise InputError("level sets must be initial segments")
    if not to_set <= from_set:
        raise InputError("target levels must be contained in source levels")
    full = frozenset(range(n))
    if from_set == full and to_set == frozenset(range(n - 1)):
        pass  # no extra hypothesis
    elif from_set in (full, frozenset(range(len(to_set) + 1))):
        k = len(to_set)
        if not _equivalence_hypothesis(mu, k):
            raise HypothesisNotMet(
                f"atom preorder above level {k} is not an equivalence relation"
            )
    else:
        raise HypothesisNotMet("unsupported source/target level pair")
    src = decomposition_poset(mu, restriction=from_set, keep_bottom=True)
    dst = decomposition_poset(mu, restriction=to_set, keep_bottom=True)
    dst_by_image = {d.image: i for i, d in enumerate(dst.elements)}
    u = []
    for d in src.elements:
        merged = merge_compositions(d, from_set, to_set)
        if merged.image not in dst_by_image:
            return False
        u.append(dst_by_image[merged.image])
    ns, nd = len(src.elements), len(dst.elements)
    for j in range(ns):
        for i in range(nd):
            if not dst.leq(u[j], i):
                continue
            above = [
                j2 for j2 in range(ns) if src.leq(j, j2) and dst.leq(i, u[j2])
            ]
            lift = None
            for m in above:
                if all(src.leq(m, j2) for j2 in above):
                    lift = m
                    break
            if lift is None or u[lift] != i:
                return False
    return True
