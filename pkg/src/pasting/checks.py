"""Named whole-corpus checks shared by the command line and the test suite.

Each check returns (passed, details) where details is a JSON-ready dict;
every detail payload is deterministic given the inputs.
"""

from __future__ import annotations

from itertools import combinations

from . import _engine
from .cells import _public, enumerate_cells
from .complexes import Complex, Subcomplex, validate
from .decomp import (
    atom_preorder,
    check_cocartesian,
    check_preorder_iso,
    decomposition_poset,
    max_nonequivalence_level,
)
from .errors import HypothesisNotMet
from .fibers import check_prop_level
from .posets import (
    FinPreorder,
    dismantle,
    homology,
    iso_check,
    lin,
    dc,
    barycentric_sd,
    preorders_up_to_iso,
)
from .theta import (
    ThetaTerm,
    check_hypercancellative,
    term_to_complex,
    theta_regular_report,
    sinks,
    sources,
    wedge_parts,
    theta_recognize,
)

__all__ = [
    "target_cells",
    "check_thm_a",
    "check_disc_sphere",
    "check_iso_sd",
    "check_dc_contract",
    "check_pos_iso",
    "check_exists_min",
    "check_regularity",
    "check_prop_level_targets",
    "check_cocart",
    "check_wedge_hom",
    "check_cell_calculus",
]


def _engine_members(target):
    return _engine.engine_and_members(target)


def _parent(target) -> Complex:
    return target.parent if isinstance(target, Subcomplex) else target


def target_cells(target):
    """(engine, parent complex, trimmed cells of the target)."""
    eng, members = _engine_members(target)
    cells = [
        c
        for c in eng.cells()
        if members is None or eng.supp(c) <= members
    ]
    return eng, _parent(target), cells


def _is_atom_cell(eng, raw) -> bool:
    top = raw[-1]
    return len(top) == 1 and raw == eng.atom_cell(next(iter(top)))


def composite_cells(target):
    """Public cells of the target that are composite: nondegenerate at
    their intrinsic dimension >= 1 and not an atom's cell."""
    eng, cx, cells = target_cells(target)
    return [
        _public(cx, eng, c)
        for c in cells
        if _engine.intr(c) >= 1 and not _is_atom_cell(eng, c)
    ]


# -- the headline contractibility run ----------------------------------------------


def check_thm_a_cell(mu, budget: int | None = None):
    """One cell's verdict: (kind, homology-trivial, dismantles, size)."""
    sd = decomposition_poset(mu, max_elements=budget)
    eng = _engine.engine_of(mu.complex)
    from .cells import _raw, _trim

    raw = _trim(_raw(mu, eng))
    if _is_atom_cell(eng, raw) or _engine.intr(raw) == 0:
        return {
            "kind": "atom",
            "size": len(sd.elements),
            "ok": len(sd.elements) == 0,
        }
    poset = sd.to_finposet()
    hom = homology(poset)
    return {
        "kind": "composite",
        "size": len(sd.elements),
        "homology_trivial": hom.trivial(),
        "dismantles": dismantle(poset),
        "ok": hom.trivial(),
    }


def check_thm_a(targets, budget: int | None = None):
    """For every composite cell of every target, the proper decomposition
    poset has vanishing reduced integral homology; dismantling is
    attempted and reported but only homology is binding.  Atom cells must
    have an empty poset."""
    failures = []
    instances = 0
    atoms_checked = 0
    dismantle_failures = []
    for label, target in targets:
        eng, cx, cells = target_cells(target)
        for raw in cells:
            if _engine.intr(raw) < 1:
                continue
            pub = _public(cx, eng, raw)
            verdict = check_thm_a_cell(pub, budget=budget)
            if verdict["kind"] == "atom":
                atoms_checked += 1
                if not verdict["ok"]:
                    failures.append(f"{label}: atom cell has proper decompositions")
                continue
            instances += 1
            if not verdict["ok"]:
                failures.append(f"{label}: composite with nonvanishing homology")
            if not verdict["dismantles"]:
                dismantle_failures.append(label)
    details = {
        "composite_cells": instances,
        "atom_cells": atoms_checked,
        "dismantle_failures": sorted(set(dismantle_failures)),
        "failures": failures[:20],
    }
    return not failures, details


def check_disc_sphere(d: int):
    """The linear refinements of the discrete preorder on d points have
    the reduced homology of a (d-2)-sphere, exactly."""
    if d < 2:
        return False, {"error": "needs d >= 2"}
    p = FinPreorder.discrete(tuple(range(d)))
    hom = homology(lin(p))
    expected = [(0, ())] * (d - 1)
    expected[d - 2] = (1, ())
    ok = not hom.empty and list(hom.groups) == expected
    return ok, {"d": d, "homology": hom.to_data()}


def check_iso_sd(max_carrier: int = 4):
    """lin(P) is isomorphic to the barycentric subdivision of dc(P), for
    every preorder on at most max_carrier points, up to isomorphism."""
    checked = 0
    failures = []
    for n in range(max_carrier + 1):
        for p in preorders_up_to_iso(n):
            checked += 1
            if not iso_check(lin(p), barycentric_sd(dc(p))):
                failures.append({"n": n, "leq": [list(r) for r in p.leq]})
    return not failures, {"preorders": checked, "failures": failures[:10]}


def check_dc_contract(max_carrier: int = 4):
    """For every preorder that is not an equivalence relation (up to
    isomorphism, carrier <= max_carrier): dc(P) has trivial homology and
    dismantles, and lin(P) has trivial homology."""
    checked = 0
    failures = []
    for n in range(max_carrier + 1):
        for p in preorders_up_to_iso(n):
            if p.is_equivalence():
                continue
            checked += 1
            down = dc(p)
            refine = lin(p)
            if not homology(down).trivial():
                failures.append("dc homology nontrivial")
            if not dismantle(down):
                failures.append("dc not dismantlable")
            if not homology(refine).trivial():
                failures.append("lin homology nontrivial")
    return not failures, {"preorders": checked, "failures": failures[:10]}


# -- decomposition-side corpus checks ------------------------------------------------


def _hypothesis_levels(mu) -> list:
    """Levels k for which the atom preorders strictly above k are all
    equivalence relations (always includes the top level)."""
    out = []
    ok_above = True
    for k in range(mu.n, 0, -1):
        if ok_above:
            out.append(k)
        if not atom_preorder(mu, k).preorder.is_equivalence():
            ok_above = False
    return out


def check_pos_iso_cell(mu):
    """(levels checked, failing levels) for one composite cell."""
    levels = []
    bad = []
    for k in _hypothesis_levels(mu):
        try:
            ok = check_preorder_iso(mu, k)
        except HypothesisNotMet:
            continue
        levels.append(k)
        if not ok:
            bad.append(k)
    return levels, bad


def check_pos_iso(targets):
    """check_preorder_iso for every composite cell and every level whose
    hypothesis holds."""
    instances = 0
    failures = []
    for label, target in targets:
        for mu in composite_cells(target):
            levels, bad = check_pos_iso_cell(mu)
            instances += len(levels)
            for k in bad:
                failures.append(f"{label}: level {k} not an order isomorphism")
    return not failures, {"instances": instances, "failures": failures[:20]}


def check_exists_min(targets):
    """Composite cells have a maximal non-equivalence level; atoms have
    none."""
    composites = atoms = 0
    failures = []
    for label, target in targets:
        eng, cx, cells = target_cells(target)
        for raw in cells:
            pub = _public(cx, eng, raw)
            k = max_nonequivalence_level(pub)
            if _is_atom_cell(eng, raw) or _engine.intr(raw) == 0:
                atoms += 1
                if k is not None:
                    failures.append(f"{label}: atom with non-equivalence level {k}")
            else:
                composites += 1
                if k is None:
                    failures.append(f"{label}: composite without such a level")
    return not failures, {
        "composites": composites,
        "atoms": atoms,
        "failures": failures[:20],
    }


def check_regularity(targets, gen_bound: int | None = None):
    """Shape-regularity (every nondegenerate shape-point injective) and
    cancellativity of composition, per target."""
    results = []
    ok = True
    for label, target in targets:
        eng, cx, cells = target_cells(target)
        bound = gen_bound if gen_bound is not None else len(cells)
        rep = theta_regular_report(target, gen_bound=bound)
        hyper = check_hypercancellative(target)
        ok = ok and rep["injective"] and hyper
        results.append(
            {
                "target": label,
                "points": rep["points"],
                "regular": rep["injective"],
                "hypercancellative": hyper,
            }
        )
    return ok, {"targets": results}


def check_prop_level_targets(targets, shape_budget: int | None = None):
    """Levelwise contractibility for every target."""
    results = []
    ok = True
    for label, target in targets:
        rep = check_prop_level(target, shape_budget=shape_budget)
        ok = ok and rep.passed
        entry = {"target": label, "passed": rep.passed, "points": rep.points}
        if rep.big_cell is not None:
            entry["big_cell"] = rep.big_cell
        if rep.failures:
            entry["failures"] = rep.failures[:5]
        results.append(entry)
    return ok, {"targets": results}


def check_cocart_cell(mu):
    """(instances run, skipped, failing pairs) for one composite cell."""
    n = mu.intrinsic_dim
    full = frozenset(range(n))
    pairs = [(full, frozenset(range(n - 1)))]
    for k in _hypothesis_levels(mu):
        below = frozenset(range(k - 1)) if k >= 1 else frozenset()
        if k <= n - 1:
            pairs.append((frozenset(range(k + 1)), below))
        pairs.append((full, below))
    ran = skipped = 0
    bad = []
    for pair in sorted(set(pairs), key=lambda p: (sorted(p[0]), sorted(p[1]))):
        try:
            ok = check_cocartesian(mu, *pair)
        except HypothesisNotMet:
            skipped += 1
            continue
        ran += 1
        if not ok:
            bad.append((sorted(pair[0]), sorted(pair[1])))
    return ran, skipped, bad


def check_cocart(targets):
    """Opfibration checks for every composite cell: the top-level merge
    unconditionally, and both conditional merges at every level whose
    hypothesis holds."""
    instances = 0
    failures = []
    skipped = 0
    for label, target in targets:
        for mu in composite_cells(target):
            ran, skip, bad = check_cocart_cell(mu)
            instances += ran
            skipped += skip
            for src, dst in bad:
                failures.append(
                    f"{label}: merge {src}->{dst} is not an opfibration"
                )
    return not failures, {
        "instances": instances,
        "skipped": skipped,
        "failures": failures[:20],
    }


# -- wedge hom formula ---------------------------------------------------------------


def _frame_cells(eng, x: int, y: int):
    """Trimmed cells with 0-source x and 0-target y, grouped by intrinsic
    dimension."""
    out: dict = {}
    for c in eng.frame_query(1, (frozenset((x,)), frozenset((y,)))):
        out.setdefault(_engine.intr(c), []).append(c)
    return out


def check_wedge_hom(term: ThetaTerm):
    """The hom formula for a sink-to-source gluing, elementwise.

    For every split of the term into a left and right part, wedge the two
    complexes and verify that composition through the wedge point is a
    dimension-preserving bijection from pairs (left hom cell, right hom
    cell) onto the glued hom, that reverse homs are empty, and that the
    two parts sit as full subcategories."""
    r = len(term.children)
    if r < 2:
        return True, {"splits": 0}
    failures = []
    splits_checked = 0
    for s in range(1, r):
        left = term_to_complex(ThetaTerm(term.children[:s]))
        right = term_to_complex(ThetaTerm(term.children[s:]))
        glued, lmap, rmap = wedge_parts(
            left, sinks(left)[0], right, sources(right)[0]
        )
        splits_checked += 1
        if theta_recognize(glued) != term:
            failures.append(f"split {s}: glued complex has the wrong shape")
            continue
        eng = _engine.engine_of(glued)
        eng.cells()
        wp = eng.index[lmap[sinks(left)[0]]]
        left_atoms = {eng.index[lmap[x]] for x in left.ids}
        right_atoms = {eng.index[rmap[x]] for x in right.ids}
        left_objs = sorted(eng.index[lmap[x.id]] for x in left.by_dim(0))
        right_objs = sorted(eng.index[rmap[x.id]] for x in right.by_dim(0))
        # full subcategory: cells supported in one part = that part's cells
        left_eng = _engine.engine_of(left)
        n_left = len([c for c in eng.cells() if eng.supp(c) <= left_atoms])
        if n_left != len(left_eng.cells()):
            failures.append(f"split {s}: left part is not full")
        # pairing through the wedge point
        for a in left_objs:
            for b in right_objs:
                if a == wp and b == wp:
                    continue
                into = _frame_cells(eng, a, b)
                u_side = _frame_cells(eng, a, wp)
                v_side = _frame_cells(eng, wp, b)
                built: dict = {}
                for du, us in u_side.items():
                    for dv, vs in v_side.items():
                        for u in us:
                            for v in vs:
                                w = _engine.compose_raw(v, u, 0)
                                built.setdefault(max(du, dv), set()).add(w)
                if {d: set(cs) for d, cs in into.items()} != built:
                    failures.append(
                        f"split {s}: hom through the wedge point is not a bijection"
                    )
                rev = _frame_cells(eng, b, a)
                expect_rev = (
                    {}
                    if not (a == wp and b == wp)
                    else rev
                )
                if rev != expect_rev:
                    failures.append(f"split {s}: reverse hom not empty")
    return not failures, {"splits": splits_checked, "failures": failures[:10]}


# -- cell calculus soundness ----------------------------------------------------------


def check_cell_calculus(cx: Complex):
    """Brute-force associativity and interchange over all composable
    tuples, support injectivity, and order-independence of enumeration."""
    eng = _engine.engine_of(cx)
    cells = eng.cells()
    failures = []
    by_src: dict = {}
    by_tgt: dict = {}
    for c in cells:
        for i in range(_engine.intr(c)):
            by_src.setdefault((i, _engine.bminus(c, i)), []).append(c)
            by_tgt.setdefault((i, _engine.bplus(c, i)), []).append(c)
    # associativity along every level
    assoc = 0
    for (i, key), bs in by_src.items():
        for a in by_tgt.get((i, key), ()):
            for b in bs:
                ab = _engine.compose_raw(b, a, i)
                for c in by_src.get((i, _engine.bplus(ab, i)), ()):
                    assoc += 1
                    lhs = _engine.compose_raw(c, ab, i)
                    rhs = _engine.compose_raw(
                        _engine.compose_raw(c, b, i), a, i
                    )
                    if lhs != rhs:
                        failures.append("associativity violated")
    # interchange: (b2 .j b) .i (a2 .j a) == (b2 .i a2) .j (b .i a)
    inter = 0
    for (j, key), a2s in by_src.items():
        for a in by_tgt.get((j, key), ()):
            for a2 in a2s:
                for i in range(j):
                    for b in by_src.get((i, _engine.bplus(a, i)), ()):
                        if _engine.intr(b) <= j:
                            continue
                        key_b = _engine.bplus(b, j)
                        for b2 in by_src.get((j, key_b), ()):
                            if _engine.bminus(b2, i) != _engine.bplus(a2, i):
                                continue
                            inter += 1
                            lhs = _engine.compose_raw(
                                _engine.compose_raw(b2, b, j),
                                _engine.compose_raw(a2, a, j),
                                i,
                            )
                            rhs = _engine.compose_raw(
                                _engine.compose_raw(b2, a2, i),
                                _engine.compose_raw(b, a, i),
                                j,
                            )
                            if lhs != rhs:
                                failures.append("interchange violated")
    # support injectivity
    seen: dict = {}
    for c in cells:
        s = eng.supp(c)
        if s in seen and seen[s] != c:
            failures.append("two cells share a support")
        seen[s] = c
    # order independence
    fwd = enumerate_cells(cx)
    rev = enumerate_cells(cx, order="reversed")
    if fwd.cells_by_dim != rev.cells_by_dim:
        failures.append("enumeration depends on traversal order")
    return not failures, {
        "cells": len(cells),
        "assoc_triples": assoc,
        "interchange_quadruples": inter,
        "failures": sorted(set(failures)),
    }
