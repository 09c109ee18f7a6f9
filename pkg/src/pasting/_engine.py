"""Internal computational core shared by the cell/decomposition modules.

Everything here works on *trimmed* cells: a cell is stored once, at its
intrinsic dimension, as a tuple of frozensets of atom indices

    (minus_0, plus_0, minus_1, plus_1, ..., minus_d, plus_d)

with ``minus_d == plus_d``.  Identity paddings are implicit: the same tuple
stands for the cell in every formal dimension >= d.  All sets hold ints
(atom indices into the owning complex); the public modules translate to and
from string ids at the API boundary.

One Engine instance per complex caches, in dependency order:

* the full inventory of cells (breadth-first closure of the atom cells
  under all binary compositions),
* composition indexes keyed by boundary data,
* for each cell and level, its two-factor splits and ordered
  factorizations into non-identity factors,
* decomposition trees (the wedge-of-suspensions shaped ways to assemble a
  cell from smaller ones) and their generated subcategories.

A decomposition tree doubles as a nondegenerate map from a globular
pasting shape into the cell category, so the same enumeration powers the
decomposition posets, the shape-regularity check and the fiber analysis.
"""

from __future__ import annotations

from collections import deque
from itertools import product

from .complexes import Complex, Subcomplex
from .errors import BudgetError, InputError

_E = frozenset()


def intr(cell) -> int:
    """Intrinsic dimension of a trimmed cell."""
    return len(cell) // 2 - 1


def pad_lower(cell, k: int):
    """First 2k entries of the cell padded up to formal dimension >= k."""
    if len(cell) >= 2 * k:
        return cell[: 2 * k]
    return cell + (_E,) * (2 * k - len(cell))


def level_sets(cell, j: int):
    """(minus_j, plus_j) of the padded cell."""
    if 2 * j + 1 < len(cell):
        return cell[2 * j], cell[2 * j + 1]
    return _E, _E


def bminus(cell, i: int):
    """Trimmed i-dimensional source boundary (i <= intrinsic dim)."""
    return cell[: 2 * i] + (cell[2 * i], cell[2 * i])


def bplus(cell, i: int):
    """Trimmed i-dimensional target boundary (i <= intrinsic dim)."""
    return cell[: 2 * i] + (cell[2 * i + 1], cell[2 * i + 1])


def compose_raw(b, a, i: int):
    """b after a along level i, both of intrinsic dimension > i."""
    da, db = intr(a), intr(b)
    d = max(da, db)
    out = list(a[: 2 * i])
    out.append(a[2 * i])
    out.append(b[2 * i + 1])
    for j in range(i + 1, d + 1):
        am, ap = level_sets(a, j)
        bm, bp = level_sets(b, j)
        out.append(am | bm)
        out.append(ap | bp)
    return tuple(out)


class Node:
    """One decomposition-tree node: a cell split at one level.

    ``children is None`` marks a leaf (a generator of the decomposition);
    otherwise ``children`` holds one subtree per ordered factor of the
    cell along compositions at level ``k``.
    """

    __slots__ = ("cell", "k", "children")

    def __init__(self, cell, k, children):
        self.cell = cell
        self.k = k
        self.children = children

    def __repr__(self):
        kind = "leaf" if self.children is None else f"{len(self.children)} factors"
        return f"<Node k={self.k} intr={intr(self.cell)} {kind}>"


_ENGINES: dict = {}


def engine_of(cx: Complex) -> "Engine":
    key = id(cx)
    hit = _ENGINES.get(key)
    if hit is not None and hit[0] is cx:
        return hit[1]
    eng = Engine(cx)
    _ENGINES[key] = (cx, eng)
    return eng


def engine_and_members(obj):
    """(engine, member-int-set or None) for a Complex or Subcomplex."""
    if isinstance(obj, Subcomplex):
        eng = engine_of(obj.parent)
        return eng, frozenset(eng.index[m] for m in obj.members)
    if isinstance(obj, Complex):
        return engine_of(obj), None
    raise InputError(f"expected a Complex or Subcomplex, got {type(obj)!r}")


class Engine:
    def __init__(self, cx: Complex):
        self.cx = cx
        self.ids = tuple(a.id for a in cx.atoms)
        self.index = {a.id: i for i, a in enumerate(cx.atoms)}
        self.dim_of = tuple(a.dim for a in cx.atoms)
        self.minus = tuple(
            frozenset(self.index[f] for f in a.minus) for a in cx.atoms
        )
        self.plus = tuple(
            frozenset(self.index[f] for f in a.plus) for a in cx.atoms
        )
        self.maxdim = cx.dim
        self.atoms_by_dim = {
            d: tuple(i for i in range(len(self.ids)) if self.dim_of[i] == d)
            for d in range(self.maxdim + 1)
        }
        self.all_atoms = frozenset(range(len(self.ids)))
        # Budgets; None means unlimited.
        self.max_cells: int | None = None
        self.max_nodes: int | None = None
        # Lazy caches.
        self._cells: tuple | None = None
        self._canon: dict = {}
        self._by_src: dict = {}
        self._by_tgt: dict = {}
        self._prefix: dict = {}
        self._frame_index: dict = {}
        self._splits: dict = {}
        self._facts: dict = {}
        self._decomps: dict = {}
        self._nodes: dict = {}
        self._images: dict = {}
        self._terms: dict = {}
        self._supp: dict = {}
        self._supp_closure: dict = {}
        self._leaves: dict = {}
        #: provenance of each cell: ("atom", idx) or ("compose", left, right, i)
        self.trace: dict = {}

    # -- atom-level set calculus ---------------------------------------------

    def union_minus(self, S):
        out = set()
        for a in S:
            out |= self.minus[a]
        return out

    def union_plus(self, S):
        out = set()
        for a in S:
            out |= self.plus[a]
        return out

    def moves_ok(self, S, X, Y) -> bool:
        sm = self.union_minus(S)
        sp = self.union_plus(S)
        return sm - sp == X - Y and sp - sm == Y - X

    def is_forkfree(self, S) -> bool:
        tm = tp = 0
        um: set = set()
        up: set = set()
        for a in S:
            um |= self.minus[a]
            up |= self.plus[a]
            tm += len(self.minus[a])
            tp += len(self.plus[a])
        return len(um) == tm and len(up) == tp

    def closure_ints(self, seed) -> frozenset:
        out: set = set()
        todo = list(seed)
        while todo:
            x = todo.pop()
            if x in out:
                continue
            out.add(x)
            todo.extend(self.minus[x])
            todo.extend(self.plus[x])
        return frozenset(out)

    # -- cell validity ---------------------------------------------------------

    def cell_defect(self, sets, start_level: int = 0) -> str | None:
        """Why `sets` (a full 2n+2 tuple) is not a cell, or None if it is.

        `start_level` skips conditions already known to hold below it.
        """
        n = len(sets) // 2 - 1
        if len(sets) != 2 * n + 2 or n < 0:
            return "malformed tuple"
        if sets[2 * n] != sets[2 * n + 1]:
            return "top sets differ"
        for j in range(start_level, n + 1):
            for S in (sets[2 * j], sets[2 * j + 1]):
                for a in S:
                    if self.dim_of[a] != j:
                        return f"atom {self.ids[a]} has wrong dimension for level {j}"
        if start_level == 0 and (len(sets[0]) != 1 or len(sets[1]) != 1):
            return "level-0 sets must be singletons"
        for j in range(max(1, start_level), n + 1):
            if not self.is_forkfree(sets[2 * j]):
                return f"fork in minus sets at level {j}"
            if not self.is_forkfree(sets[2 * j + 1]):
                return f"fork in plus sets at level {j}"
        for i in range(max(0, start_level - 1), n):
            X, Y = sets[2 * i], sets[2 * i + 1]
            if not self.moves_ok(sets[2 * i + 2], X, Y):
                return f"minus set at level {i + 1} does not move level {i}"
            if not self.moves_ok(sets[2 * i + 3], X, Y):
                return f"plus set at level {i + 1} does not move level {i}"
        return None

    def atom_cell(self, a: int):
        d = self.dim_of[a]
        sets: list = [None] * (2 * d + 2)
        top = frozenset((a,))
        sets[2 * d] = sets[2 * d + 1] = top
        for i in range(d, 0, -1):
            plus_i = sets[2 * i + 1]
            sm = frozenset(self.union_minus(plus_i))
            sp = frozenset(self.union_plus(plus_i))
            sets[2 * i - 1] = sp - sm
            sets[2 * i - 2] = sm - sp
        return tuple(sets)

    # -- the cell inventory ----------------------------------------------------

    def canon(self, cell):
        """Canonical interned object for a cell known to be in the inventory."""
        return self._canon[cell]

    def is_known_cell(self, cell) -> bool:
        self.cells()
        return cell in self._canon

    def cells(self) -> tuple:
        """Every cell of the complex, trimmed, in deterministic BFS order."""
        if self._cells is not None:
            return self._cells
        order: list = []

        def register(c):
            if self.max_cells is not None and len(order) >= self.max_cells:
                raise BudgetError(
                    f"cell enumeration exceeded cap of {self.max_cells}"
                )
            self._canon[c] = c
            order.append(c)
            d = intr(c)
            for i in range(d):
                self._by_src.setdefault((i, bminus(c, i)), []).append(c)
                self._by_tgt.setdefault((i, bplus(c, i)), []).append(c)
                self._prefix.setdefault((i, c[: 2 * i + 1]), []).append(c)

        for x in self.atoms_by_dim.get(0, ()):
            c = (frozenset((x,)),) * 2
            register(c)
            self.trace[c] = ("atom", x)
        for d in range(1, self.maxdim + 1):
            work: deque = deque()
            for a in self.atoms_by_dim.get(d, ()):
                t = self.atom_cell(a)
                if t not in self._canon:
                    register(t)
                    self.trace[t] = ("atom", a)
                    work.append(t)
            while work:
                z = work.popleft()
                for i in range(intr(z)):
                    for y in tuple(self._by_src.get((i, bplus(z, i)), ())):
                        w = compose_raw(y, z, i)
                        if w not in self._canon:
                            register(w)
                            self.trace[w] = ("compose", z, y, i)
                            work.append(w)
                    for y in tuple(self._by_tgt.get((i, bminus(z, i)), ())):
                        w = compose_raw(z, y, i)
                        if w not in self._canon:
                            register(w)
                            self.trace[w] = ("compose", y, z, i)
                            work.append(w)
        self._cells = tuple(order)
        return self._cells

    def cells_by_intr(self, d: int) -> tuple:
        return tuple(c for c in self.cells() if intr(c) == d)

    def supp(self, cell) -> frozenset:
        hit = self._supp.get(cell)
        if hit is None:
            out: set = set()
            for S in cell:
                out |= S
            hit = frozenset(out)
            self._supp[cell] = hit
        return hit

    def supp_closure(self, cell) -> frozenset:
        hit = self._supp_closure.get(cell)
        if hit is None:
            hit = self.closure_ints(self.supp(cell))
            self._supp_closure[cell] = hit
        return hit

    def frame_query(self, k: int, frame) -> tuple:
        """All cells whose padded lower-2k data equals `frame`."""
        if k not in self._frame_index:
            idx: dict = {}
            for c in self.cells():
                idx.setdefault(pad_lower(c, k), []).append(c)
            self._frame_index[k] = idx
        return tuple(self._frame_index[k].get(frame, ()))

    def hypercancellative_defect(self, members: frozenset | None = None):
        """A tuple (i, a, b, a2, b2) witnessing a composition collision, or None."""
        self.cells()
        for (i, key), srcs in self._by_src.items():
            tgts = self._by_tgt.get((i, key))
            if not tgts:
                continue
            if members is not None:
                tgts = [a for a in tgts if self.supp(a) <= members]
                srcs = [b for b in srcs if self.supp(b) <= members]
            seen: dict = {}
            for a in tgts:  # cells with target boundary == key (first factor)
                for b in srcs:  # cells with source boundary == key (second)
                    w = compose_raw(b, a, i)
                    prev = seen.get(w)
                    if prev is None:
                        seen[w] = (a, b)
                    elif prev != (a, b):
                        return (i, prev[0], prev[1], a, b)
        return None

    # -- splits, factorizations, decomposition trees ---------------------------

    def splits(self, c, k: int) -> tuple:
        """All (a, b) with b after a along level k equal to c, both non-identity."""
        key = (c, k)
        hit = self._splits.get(key)
        if hit is not None:
            return hit
        self.cells()
        c = self._canon.get(c)
        if c is None:
            raise InputError("not a cell of this complex")
        d = intr(c)
        out = []
        for a in self._prefix.get((k, c[: 2 * k + 1]), ()):
            da = intr(a)
            if a is c or da > d:
                continue
            ok = True
            for j in range(k + 1, da + 1):
                if not (a[2 * j] <= c[2 * j] and a[2 * j + 1] <= c[2 * j + 1]):
                    ok = False
                    break
            if not ok:
                continue
            bsets = list(c[: 2 * k])
            bsets.append(a[2 * k + 1])
            bsets.append(c[2 * k + 1])
            top = k
            for j in range(k + 1, d + 1):
                am, ap = level_sets(a, j)
                bm = c[2 * j] - am
                bp = c[2 * j + 1] - ap
                bsets.append(bm)
                bsets.append(bp)
                if bm or bp:
                    top = j
            if top == k:
                continue
            b = tuple(bsets[: 2 * top + 2])
            bc = self._canon.get(b)
            if bc is None:
                continue
            out.append((a, bc))
        result = tuple(out)
        self._splits[key] = result
        return result

    def factorizations(self, c, k: int) -> tuple:
        """All ordered tuples of non-identity factors composing to c along level k."""
        key = (c, k)
        hit = self._facts.get(key)
        if hit is not None:
            return hit
        out = [(c,)]
        for a, b in self.splits(c, k):
            for rest in self.factorizations(b, k):
                out.append((a,) + rest)
        result = tuple(out)
        self._facts[key] = result
        return result

    def _mk_node(self, cell, k, children):
        key = (cell, k, children if children is None else tuple(id(ch) for ch in children))
        hit = self._nodes.get(key)
        if hit is None:
            if self.max_nodes is not None and len(self._nodes) >= self.max_nodes:
                raise BudgetError(
                    f"decomposition enumeration exceeded cap of {self.max_nodes}"
                )
            hit = Node(cell, k, children)
            self._nodes[key] = hit
        return hit

    def leaf(self, cell) -> Node:
        hit = self._leaves.get(cell)
        if hit is None:
            hit = self._mk_node(cell, -1, None)
            self._leaves[cell] = hit
        return hit

    def decomps(self, c, k: int) -> tuple:
        """Every decomposition tree of cell c using compositions at levels >= k.

        A tree bottoms out at cells of intrinsic dimension <= k (the
        generators); an inner node records an ordered factorization along
        its level, with each factor decomposed one level up.  Tree count
        equals the number of pasting-shape subcategories whose composite
        is c (including the trivial one generated by c alone).
        """
        key = (c, k)
        hit = self._decomps.get(key)
        if hit is not None:
            return hit
        if intr(c) <= k:
            result = (self.leaf(c),)
        else:
            nodes = []
            for fac in self.factorizations(c, k):
                branches = [self.decomps(f, k + 1) for f in fac]
                for combo in product(*branches):
                    nodes.append(self._mk_node(c, k, combo))
            result = tuple(nodes)
        self._decomps[key] = result
        return result

    def gen_cells(self, c) -> frozenset:
        """The subcategory generated by one cell: c and all its boundaries."""
        out = [c]
        for i in range(intr(c)):
            out.append(bminus(c, i))
            out.append(bplus(c, i))
        return frozenset(self._canon.get(t, t) for t in out)

    def node_image(self, node: Node) -> frozenset:
        """Cell set of the subcategory generated by the tree's leaves."""
        hit = self._images.get(id(node))
        if hit is not None:
            return hit
        if node.children is None:
            result = self.gen_cells(node.cell)
        else:
            k = node.k
            imgs = [self.node_image(ch) for ch in node.children]
            cells: set = set().union(*imgs)
            spans = [[y for y in img if intr(y) > k] for img in imgs]
            r = len(spans)
            for i in range(r):
                cur = spans[i]
                for j in range(i + 1, r):
                    nxt = []
                    for x in cur:
                        for y in spans[j]:
                            w = compose_raw(y, x, k)
                            nxt.append(self._canon.get(w, w))
                    cells.update(nxt)
                    cur = nxt
            result = frozenset(cells)
        self._images[id(node)] = result
        return result

    def node_term(self, node: Node, depth: int = 0):
        """Nested-tuple pasting shape of the tree: () is a point.

        A leaf at depth k whose cell has intrinsic dimension d > k stands
        for a globe of height d - k (this happens in merged decompositions
        whose generators are higher-dimensional cells).
        """
        hit = self._terms.get((id(node), depth))
        if hit is not None:
            return hit
        if node.children is None:
            t = ()
            for _ in range(max(0, intr(node.cell) - depth)):
                t = (t,)
            result = t
        else:
            result = tuple(self.node_term(ch, depth + 1) for ch in node.children)
        self._terms[(id(node), depth)] = result
        return result

    def node_leaves(self, node: Node, path=()) -> list:
        """(path, cell) pairs for the tree's generators, in term order."""
        if node.children is None:
            return [(path, node.cell)]
        out: list = []
        for i, ch in enumerate(node.children):
            out.extend(self.node_leaves(ch, path + (i,)))
        return out

    # -- whole-complex inventories ----------------------------------------------

    def subcat_nodes(self, members: frozenset | None = None):
        """Every decomposition tree of every cell (optionally support-restricted).

        Each yielded tree is one pasting-shape subcategory of the cell
        category, equivalently one nondegenerate shape-point; its root cell
        is the subcategory's composite.
        """
        for c in self.cells():
            if members is not None and not self.supp(c) <= members:
                continue
            yield from self.decomps(c, 0)

    def full_support_cells(self, members: frozenset | None = None) -> tuple:
        univ = self.all_atoms if members is None else members
        return tuple(
            c
            for c in self.cells()
            if (members is None or self.supp(c) <= members)
            and self.supp_closure(c) == univ
        )
