"""Finite preorders and posets: refinement lattices, down-set posets,
barycentric subdivision, exact integral homology of the order complex,
dismantling, and isomorphism testing.

Homology is computed over the integers with an arbitrary-precision Smith
normal form, optionally after reducing the poset to its core (iterated
removal of beat points, which preserves the homotopy type of the order
complex exactly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations

from .errors import BudgetError, InputError

__all__ = [
    "FinPreorder",
    "FinPoset",
    "ChainComplex",
    "HomologyReport",
    "lin",
    "dc",
    "barycentric_sd",
    "order_complex",
    "homology",
    "smith_invariants",
    "core",
    "dismantle",
    "iso_check",
    "all_preorders",
    "preorders_up_to_iso",
    "poset_from_data",
    "poset_to_data",
]


@dataclass(frozen=True)
class FinPreorder:
    """A reflexive transitive relation on a finite tuple of labels."""

    elements: tuple
    leq: tuple  # leq[i][j] is True iff elements[i] <= elements[j]

    def __post_init__(self):
        n = len(self.elements)
        if len(set(self.elements)) != n:
            raise InputError("duplicate elements in preorder carrier")
        if len(self.leq) != n or any(len(row) != n for row in self.leq):
            raise InputError("leq matrix shape does not match carrier")
        for i in range(n):
            if not self.leq[i][i]:
                raise InputError("preorder must be reflexive")
        for i in range(n):
            for j in range(n):
                if self.leq[i][j]:
                    for k in range(n):
                        if self.leq[j][k] and not self.leq[i][k]:
                            raise InputError("preorder must be transitive")

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_pairs(cls, elements, pairs) -> "FinPreorder":
        """Reflexive-transitive closure of the given pairs of labels."""
        elements = tuple(elements)
        idx = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        m = [[i == j for j in range(n)] for i in range(n)]
        for a, b in pairs:
            if a not in idx or b not in idx:
                raise InputError(f"pair ({a!r}, {b!r}) outside carrier")
            m[idx[a]][idx[b]] = True
        for k in range(n):
            for i in range(n):
                if m[i][k]:
                    row_k = m[k]
                    row_i = m[i]
                    for j in range(n):
                        if row_k[j]:
                            row_i[j] = True
        return cls(elements, tuple(tuple(r) for r in m))

    @classmethod
    def discrete(cls, elements) -> "FinPreorder":
        return cls.from_pairs(elements, ())

    @classmethod
    def codiscrete(cls, elements) -> "FinPreorder":
        elements = tuple(elements)
        return cls.from_pairs(
            elements, [(a, b) for a in elements for b in elements]
        )

    @classmethod
    def chain(cls, elements) -> "FinPreorder":
        elements = tuple(elements)
        return cls.from_pairs(elements, zip(elements, elements[1:]))

    # -- basic predicates -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.elements)

    def le(self, a, b) -> bool:
        i = self.elements.index(a)
        j = self.elements.index(b)
        return self.leq[i][j]

    def is_linear(self) -> bool:
        return all(
            self.leq[i][j] or self.leq[j][i]
            for i in range(self.n)
            for j in range(self.n)
        )

    def is_codiscrete(self) -> bool:
        return all(self.leq[i][j] for i in range(self.n) for j in range(self.n))

    def is_discrete(self) -> bool:
        return all(
            self.leq[i][j] == (i == j) for i in range(self.n) for j in range(self.n)
        )

    def is_equivalence(self) -> bool:
        return all(
            self.leq[i][j] == self.leq[j][i]
            for i in range(self.n)
            for j in range(self.n)
        )

    def is_poset(self) -> bool:
        return all(
            not (self.leq[i][j] and self.leq[j][i])
            for i in range(self.n)
            for j in range(self.n)
            if i != j
        )

    def refines(self, other: "FinPreorder") -> bool:
        """True when every relation of `other` also holds here (same carrier)."""
        if self.elements != other.elements:
            raise InputError("refinement needs identical carriers")
        return all(
            self.leq[i][j] or not other.leq[i][j]
            for i in range(self.n)
            for j in range(self.n)
        )

    def as_poset(self) -> "FinPoset":
        return FinPoset(self.elements, self.leq)

    def posetal_reflection(self) -> "FinPoset":
        """Quotient by mutual comparability; classes become sorted tuples."""
        n = self.n
        seen = set()
        classes = []
        for i in range(n):
            if i in seen:
                continue
            cls_ = [j for j in range(n) if self.leq[i][j] and self.leq[j][i]]
            seen.update(cls_)
            classes.append(tuple(sorted(self.elements[j] for j in cls_)))
        reps = {c: self.elements.index(c[0]) for c in classes}
        pairs = [
            (c, d)
            for c in classes
            for d in classes
            if self.leq[reps[c]][reps[d]]
        ]
        return FinPreorder.from_pairs(tuple(classes), pairs).as_poset()


class FinPoset(FinPreorder):
    """A preorder that is also antisymmetric."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_poset():
            raise InputError("not antisymmetric; use FinPreorder")

    def down_set(self, i: int) -> frozenset:
        return frozenset(j for j in range(self.n) if self.leq[j][i])

    def up_set(self, i: int) -> frozenset:
        return frozenset(j for j in range(self.n) if self.leq[i][j])

    def has_maximum(self) -> bool:
        return any(
            all(self.leq[j][i] for j in range(self.n)) for i in range(self.n)
        )

    def has_minimum(self) -> bool:
        return any(
            all(self.leq[i][j] for j in range(self.n)) for i in range(self.n)
        )


# -- the refinement and down-set posets ------------------------------------------


def _ordered_downclosed_partitions(p: FinPreorder):
    """Ordered partitions of the carrier whose blocks are successively
    down-closed; these are exactly the linear preorders refining p."""
    n = p.n

    def rec(remaining: frozenset):
        if not remaining:
            yield ()
            return
        # all nonempty down-closed subsets of the restriction to `remaining`
        rem = sorted(remaining)
        for mask in range(1, 1 << len(rem)):
            block = frozenset(rem[t] for t in range(len(rem)) if mask >> t & 1)
            ok = all(
                not p.leq[a][b]
                for b in block
                for a in remaining - block
            )
            if not ok:
                continue
            for rest in rec(remaining - block):
                yield (block,) + rest

    yield from rec(frozenset(range(n)))


def lin(p: FinPreorder) -> FinPoset:
    """Noncodiscrete linear preorders refining p, under reverse refinement.

    Elements are labelled by their ordered block partition; L <= L' holds
    when L' refines L (so the coarsest partitions sit at the bottom; the
    codiscrete one-block preorder is removed).
    """
    labels = []
    for part in _ordered_downclosed_partitions(p):
        if len(part) <= 1:
            continue  # codiscrete (or empty carrier)
        labels.append(
            tuple(tuple(sorted(p.elements[i] for i in block)) for block in part)
        )
    labels.sort()
    idx_of = {e: i for i, e in enumerate(p.elements)}

    def blockmap(lab):
        out = {}
        for b, block in enumerate(lab):
            for e in block:
                out[idx_of[e]] = b
        return out

    maps = [blockmap(lab) for lab in labels]
    pairs = []
    for i, li in enumerate(maps):
        for j, lj in enumerate(maps):
            # labels[i] <= labels[j] iff labels[j] refines labels[i]
            if all(
                li[a] <= li[b]
                for a in range(p.n)
                for b in range(p.n)
                if lj[a] <= lj[b]
            ):
                pairs.append((labels[i], labels[j]))
    return FinPreorder.from_pairs(tuple(labels), pairs).as_poset()


def dc(p: FinPreorder) -> FinPoset:
    """Nonempty proper down-closed subsets of p, ordered by inclusion."""
    n = p.n
    labels = []
    for mask in range(1, (1 << n) - 1 if n else 0):
        sub = [i for i in range(n) if mask >> i & 1]
        inside = set(sub)
        if all(
            all(p.leq[j][i] <= (j in inside) for j in range(n)) for i in sub
        ):
            labels.append(tuple(sorted(p.elements[i] for i in sub)))
    labels.sort()
    pairs = [
        (a, b) for a in labels for b in labels if set(a) <= set(b)
    ]
    return FinPreorder.from_pairs(tuple(labels), pairs).as_poset()


def barycentric_sd(p: FinPoset) -> FinPoset:
    """Nonempty chains of p, ordered by containment."""
    chains = _chains(p)
    labels = sorted(tuple(p.elements[i] for i in ch) for ch in chains)
    pairs = [
        (a, b) for a in labels for b in labels if set(a) <= set(b)
    ]
    return FinPreorder.from_pairs(tuple(labels), pairs).as_poset()


def _chains(p: FinPoset) -> list:
    """All nonempty strictly increasing chains, as index tuples."""
    n = p.n
    above = [
        [j for j in range(n) if j != i and p.leq[i][j]] for i in range(n)
    ]
    out: list = []

    def grow(ch):
        out.append(ch)
        for j in above[ch[-1]]:
            grow(ch + (j,))

    for i in range(n):
        grow((i,))
    return out


# -- chain complexes and homology -------------------------------------------------


@dataclass
class ChainComplex:
    """Integer boundary matrices, ``boundaries[k]`` mapping degree k to k-1.

    ``dims[k]`` is the rank of the degree-k chain group.  Successive
    composites must vanish."""

    dims: list
    boundaries: list  # boundaries[k]: dims[k-1] x dims[k] matrix, k >= 1

    def __post_init__(self):
        for k in range(2, len(self.dims)):
            a, b = self.boundaries[k - 1], self.boundaries[k]
            if not a or not b or not b[0]:
                continue
            for col in range(len(b[0])):
                for row in range(len(a)):
                    s = sum(a[row][m] * b[m][col] for m in range(len(b)))
                    if s != 0:
                        raise InputError("boundary composite is nonzero")


def order_complex(p: FinPoset, reduced: bool = True) -> ChainComplex:
    """The simplicial chain complex of the poset's chains.

    With ``reduced`` a (-1)-degree augmentation is included, so degree k of
    the result is simplicial degree k-1; callers index accordingly."""
    by_dim: dict = {}
    for ch in _chains(p):
        by_dim.setdefault(len(ch) - 1, []).append(ch)
    top = max(by_dim, default=-1)
    index = {
        d: {ch: i for i, ch in enumerate(sorted(by_dim[d]))} for d in by_dim
    }
    dims = [1] + [len(by_dim.get(d, ())) for d in range(top + 1)]
    boundaries: list = [None]
    for d in range(top + 1):
        rows = dims[d]
        cols = dims[d + 1]
        mat = [[0] * cols for _ in range(rows)]
        for ch, col in index[d].items():
            if d == 0:
                mat[0][col] = 1
            else:
                for drop in range(d + 1):
                    face = ch[:drop] + ch[drop + 1:]
                    mat[index[d - 1][face]][col] += (-1) ** drop
        boundaries.append(mat)
    if not reduced:
        dims = dims[1:]
        boundaries = [None] + boundaries[2:]
    return ChainComplex(dims, boundaries)


def smith_invariants(mat) -> list:
    """Nonzero invariant factors d1 | d2 | ... of an integer matrix."""
    m = [row[:] for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    out = []
    t = 0
    while t < rows and t < cols:
        # find the smallest nonzero entry in the remaining block
        piv = None
        best = None
        for i in range(t, rows):
            row = m[i]
            for j in range(t, cols):
                v = row[j]
                if v and (best is None or abs(v) < best):
                    best = abs(v)
                    piv = (i, j)
                    if best == 1:
                        break
            if best == 1:
                break
        if piv is None:
            break
        i, j = piv
        m[t], m[i] = m[i], m[t]
        if j != t:
            for row in m:
                row[t], row[j] = row[j], row[t]
        again = True
        while again:
            again = False
            a = m[t][t]
            for i in range(t + 1, rows):
                q = m[i][t] // a
                if q:
                    for j in range(t, cols):
                        m[i][j] -= q * m[t][j]
                if m[i][t]:
                    m[t], m[i] = m[i], m[t]
                    again = True
                    break
            if again:
                continue
            for j in range(t + 1, cols):
                q = m[t][j] // a
                if q:
                    for i in range(t, rows):
                        m[i][j] -= q * m[i][t]
                if m[t][j]:
                    for i in range(t, rows):
                        m[i][t], m[i][j] = m[i][j], m[i][t]
                    again = True
                    break
        a = abs(m[t][t])
        # enforce divisibility into the remaining block
        culprit = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if m[i][j] % a:
                    culprit = i
                    break
            if culprit is not None:
                break
        if culprit is not None:
            for j in range(t, cols):
                m[t][j] += m[culprit][j]
            continue
        out.append(a)
        t += 1
    return out


@dataclass
class HomologyReport:
    """Reduced integral homology, one (free rank, torsion) entry per degree."""

    empty: bool
    groups: tuple  # ((rank, (torsion coefficients...)), ...) degrees 0..D

    def trivial(self) -> bool:
        return not self.empty and all(
            r == 0 and not tor for r, tor in self.groups
        )

    def to_data(self):
        if self.empty:
            return "empty"
        return [
            {"degree": d, "rank": r, "torsion": list(tor)}
            for d, (r, tor) in enumerate(self.groups)
        ]


def homology(p: FinPoset, reduce: bool = True) -> HomologyReport:
    """Exact reduced integral homology of the order complex.

    With ``reduce`` the poset is first collapsed to its core (a homotopy
    equivalence), which usually shrinks the matrices dramatically.
    """
    if p.n == 0:
        return HomologyReport(True, ())
    if reduce:
        p = core(p)
        if p.n == 1:
            return HomologyReport(False, ((0, ()),))
    cc = order_complex(p, reduced=True)
    top = len(cc.dims) - 2  # top simplicial degree
    invs = [smith_invariants(cc.boundaries[k]) for k in range(1, len(cc.dims))]
    invs.append([])  # zero map above the top degree
    groups = []
    for k in range(top + 1):
        n_k = cc.dims[k + 1]
        rank_in = len(invs[k])  # rank of the map out of degree k
        rank_up = len(invs[k + 1])  # rank of the map into degree k
        free = n_k - rank_in - rank_up
        torsion = tuple(v for v in invs[k + 1] if v > 1)
        groups.append((free, torsion))
    while len(groups) > 1 and groups[-1] == (0, ()):
        groups.pop()
    return HomologyReport(False, tuple(groups))


def core(p: FinPoset) -> FinPoset:
    """Iteratively delete beat points (strict up-set with a minimum, or
    strict down-set with a maximum); the result is homotopy equivalent."""
    alive = list(range(p.n))
    leq = p.leq
    changed = True
    while changed and len(alive) > 1:
        changed = False
        for x in alive:
            up = [y for y in alive if y != x and leq[x][y]]
            if up and any(all(leq[m][y] for y in up) for m in up):
                alive.remove(x)
                changed = True
                break
            down = [y for y in alive if y != x and leq[y][x]]
            if down and any(all(leq[y][m] for y in down) for m in down):
                alive.remove(x)
                changed = True
                break
    elements = tuple(p.elements[i] for i in alive)
    mat = tuple(tuple(leq[i][j] for j in alive) for i in alive)
    return FinPoset(elements, mat)


def dismantle(p: FinPoset) -> bool:
    """True iff beat-point removal reaches a single point."""
    return core(p).n == 1


def iso_check(a: FinPoset, b: FinPoset, budget: int | None = 2_000_000) -> bool:
    """Exact poset-isomorphism decision by invariant-guided backtracking."""
    if a.n != b.n:
        return False
    if a.n == 0:
        return True

    def invariants(p: FinPoset):
        base = [
            (len(p.down_set(i)), len(p.up_set(i))) for i in range(p.n)
        ]
        for _ in range(p.n):
            nxt = []
            for i in range(p.n):
                below = sorted(base[j] for j in p.down_set(i) if j != i)
                above = sorted(base[j] for j in p.up_set(i) if j != i)
                nxt.append(hash((base[i], tuple(below), tuple(above))))
            if nxt == base:
                break
            base = nxt
        return base

    ia, ib = invariants(a), invariants(b)
    if sorted(ia) != sorted(ib):
        return False
    candidates = [
        [j for j in range(b.n) if ib[j] == ia[i]] for i in range(a.n)
    ]
    order = sorted(range(a.n), key=lambda i: len(candidates[i]))
    assignment = [-1] * a.n
    used = [False] * b.n
    steps = 0

    def place(t: int) -> bool:
        nonlocal steps
        if t == a.n:
            return True
        steps += 1
        if budget is not None and steps > budget:
            raise BudgetError("isomorphism search exceeded its budget")
        i = order[t]
        for j in candidates[i]:
            if used[j]:
                continue
            ok = True
            for t2 in range(t):
                i2 = order[t2]
                if (
                    a.leq[i][i2] != b.leq[j][assignment[i2]]
                    or a.leq[i2][i] != b.leq[assignment[i2]][j]
                ):
                    ok = False
                    break
            if ok:
                assignment[i] = j
                used[j] = True
                if place(t + 1):
                    return True
                used[j] = False
                assignment[i] = -1
        return False

    return place(0)


# -- enumeration of small preorders -------------------------------------------------


def all_preorders(n: int):
    """Every preorder on the carrier 0..n-1 (labelled enumeration)."""
    elements = tuple(range(n))
    off_diag = [(i, j) for i in range(n) for j in range(n) if i != j]
    for mask in range(1 << len(off_diag)):
        m = [[i == j for j in range(n)] for i in range(n)]
        for t, (i, j) in enumerate(off_diag):
            if mask >> t & 1:
                m[i][j] = True
        ok = True
        for i in range(n):
            for j in range(n):
                if m[i][j]:
                    for k in range(n):
                        if m[j][k] and not m[i][k]:
                            ok = False
                            break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            yield FinPreorder(elements, tuple(tuple(r) for r in m))


def preorders_up_to_iso(n: int) -> list:
    """One representative per isomorphism class of preorders on n points."""
    seen = set()
    out = []
    for p in all_preorders(n):
        best = None
        for perm in permutations(range(n)):
            enc = tuple(
                p.leq[perm[i]][perm[j]] for i in range(n) for j in range(n)
            )
            if best is None or enc < best:
                best = enc
        if best not in seen:
            seen.add(best)
            out.append(p)
    return out


# -- JSON wire format ------------------------------------------------------------
#
# {"elements": [...], "leq": [[i, j], ...]}  with index pairs; the relation
# stored is closed reflexively and transitively on load.


def poset_from_data(data) -> FinPoset:
    if not isinstance(data, dict):
        raise InputError("poset JSON must be an object")
    unknown = set(data) - {"elements", "leq"}
    if unknown:
        raise InputError(f"unknown keys in poset JSON: {sorted(unknown)}")
    elements = data.get("elements")
    if not isinstance(elements, list):
        raise InputError("poset JSON needs an 'elements' list")
    pairs = data.get("leq", [])
    n = len(elements)
    idx_pairs = []
    for pair in pairs:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, int) and 0 <= x < n for x in pair)
        ):
            raise InputError(f"bad leq pair {pair!r}")
        idx_pairs.append((elements[pair[0]], elements[pair[1]]))
    return FinPreorder.from_pairs(tuple(elements), idx_pairs).as_poset()


def poset_to_data(p: FinPoset) -> dict:
    pairs = [
        [i, j]
        for i in range(p.n)
        for j in range(p.n)
        if i != j and p.leq[i][j]
    ]
    return {"elements": list(p.elements), "leq": pairs}


def load_poset(path) -> FinPoset:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"bad JSON in {path}: {exc}") from exc
    return poset_from_data(data)
