"""Glued presheaf levels and the fibers of the collapse map.

The cell category of a complex of dimension n has two distinguished glued
levels: the "atoms" level (cells of the skeleton below n, plus the top
atoms attached one globe at a time) and the "subcomplexes" level (that,
plus everything landing in the cell category of a proper subcomplex).
Points outside the second level necessarily contain the complex's big
composite cell, and the fiber of the collapse map over such a point is a
poset of pasting-shape subcategories; over the big cell itself it is the
proper decomposition poset.  This module classifies points, materializes
fibers, and runs the levelwise-contractibility check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _engine
from .cells import Cell, _public, _raw, _trim
from .complexes import Complex, Subcomplex, validate
from .decomp import Decomposition, _decomposition_from_node, _element_sort_key, decomposition_poset
from .errors import BudgetError, InputError
from .posets import homology, dismantle
from .theta import ThetaTerm

__all__ = [
    "ThetaPoint",
    "FiberPoset",
    "theta_points",
    "in_glued_level",
    "fiber",
    "check_prop_level",
    "PropLevelReport",
]


@dataclass(frozen=True)
class ThetaPoint:
    """A nondegenerate map from a pasting shape into the cell category:
    the shape term plus the generator assignment (leaf path -> cell)."""

    target: object  # Complex or Subcomplex
    shape: ThetaTerm
    generators: tuple
    _node: object = field(compare=False, repr=False, hash=False, default=None)

    @property
    def complex(self) -> Complex:
        return (
            self.target.parent
            if isinstance(self.target, Subcomplex)
            else self.target
        )

    def image(self) -> frozenset:
        eng = _engine.engine_of(self.complex)
        return frozenset(
            _public(self.complex, eng, c) for c in eng.node_image(self._node)
        )

    def composite(self) -> Cell:
        eng = _engine.engine_of(self.complex)
        return _public(self.complex, eng, self._node.cell)

    def injective(self) -> bool:
        from .theta import shape_cell_count

        eng = _engine.engine_of(self.complex)
        return len(eng.node_image(self._node)) == shape_cell_count(self.shape)


def _target_data(target):
    eng, members = _engine.engine_and_members(target)
    universe = eng.all_atoms if members is None else members
    n = max((eng.dim_of[a] for a in universe), default=-1)
    return eng, members, universe, n


def _point(target, eng, node) -> ThetaPoint:
    cx = target.parent if isinstance(target, Subcomplex) else target
    term = ThetaTerm.from_tuple(eng.node_term(node))
    gens = tuple(
        (path, _public(cx, eng, cell)) for path, cell in eng.node_leaves(node)
    )
    return ThetaPoint(target, term, gens, node)


def theta_points(target, max_generators: int | None = None):
    """All nondegenerate shape-points of the cell category, as ThetaPoint
    values (one per decomposition tree of each cell)."""
    eng, members, _, _ = _target_data(target)
    for node in eng.subcat_nodes(members):
        if max_generators is not None:
            term = ThetaTerm.from_tuple(eng.node_term(node))
            if term.atom_count > max_generators:
                continue
        yield _point(target, eng, node)


def _is_globe_tree(node) -> bool:
    while node.children is not None:
        if len(node.children) != 1:
            return False
        node = node.children[0]
    return True


def _in_atoms_level(eng, node, n: int) -> bool:
    root = node.cell
    if _engine.intr(root) <= n - 1:
        return True
    if not _is_globe_tree(node):
        return False
    top = root[-1]
    return len(top) == 1 and root == eng.atom_cell(next(iter(top)))


def _in_subcomplexes_level(eng, node, n: int, universe) -> bool:
    if _in_atoms_level(eng, node, n):
        return True
    return eng.supp_closure(node.cell) != universe


_LEVELS = {
    "atoms": "atoms",
    "subcomplexes": "subcomplexes",
}


def in_glued_level(t: ThetaPoint, level: str) -> bool:
    """Membership of the point in a glued level of the presheaf tower.

    ``"atoms"``: every cell in the image lives strictly below the top
    dimension, or the point factors through a single top atom's globe.
    ``"subcomplexes"``: that, or the image lies in the cell category of a
    proper subcomplex (equivalently, its support is not everything).
    """
    if level not in _LEVELS:
        raise InputError(f"unknown level {level!r}; use 'atoms' or 'subcomplexes'")
    eng, members, universe, n = _target_data(t.target)
    if level == "atoms":
        return _in_atoms_level(eng, t._node, n)
    return _in_subcomplexes_level(eng, t._node, n, universe)


@dataclass
class FiberPoset:
    """The fiber of the collapse map over one point: collapsed to a single
    point when the point lies in the subcomplexes level, otherwise the
    poset (by containment) of non-top-globe shape subcategories containing
    the point's image."""

    base_point: ThetaPoint
    elements: tuple  # of Decomposition
    collapsed: bool

    def __len__(self) -> int:
        return len(self.elements)

    def leq(self, i: int, j: int) -> bool:
        return self.elements[i].image <= self.elements[j].image

    def has_minimum(self) -> bool:
        return any(
            all(self.leq(i, j) for j in range(len(self.elements)))
            for i in range(len(self.elements))
        )


def fiber(t: ThetaPoint, max_elements: int | None = None) -> FiberPoset:
    eng, members, universe, n = _target_data(t.target)
    if _in_subcomplexes_level(eng, t._node, n, universe):
        return FiberPoset(t, (), True)
    base_img = eng.node_image(t._node)
    cx = t.complex
    picked: dict = {}
    for node in eng.subcat_nodes(members):
        if _is_globe_tree(node) and _engine.intr(node.cell) == n:
            continue
        img = eng.node_image(node)
        if base_img <= img and img not in picked:
            picked[img] = node
            if max_elements is not None and len(picked) > max_elements:
                raise BudgetError(f"fiber exceeded cap of {max_elements}")
    ordered = sorted(picked.values(), key=lambda m: _element_sort_key(eng, m))
    elements = tuple(_decomposition_from_node(cx, eng, m) for m in ordered)
    return FiberPoset(t, elements, False)


@dataclass
class PropLevelReport:
    """Per-point verdicts for the levelwise-contractibility check."""

    passed: bool
    points: int
    collapsed: int
    with_minimum: int
    big_cell: dict | None
    failures: list

    def to_data(self) -> dict:
        return {
            "passed": self.passed,
            "points": self.points,
            "collapsed": self.collapsed,
            "with_minimum": self.with_minimum,
            "big_cell": self.big_cell,
            "failures": self.failures[:20],
        }


def check_prop_level(target, shape_budget: int | None = None) -> PropLevelReport:
    """Every point's fiber must be contractible: collapsed (a single
    point), possessing a minimum, or -- over the big composite cell --
    equal to the proper decomposition poset with vanishing reduced
    homology.  The big-cell fiber is cross-checked elementwise against the
    independently enumerated decomposition poset.
    """
    cx = target.as_complex() if isinstance(target, Subcomplex) else target
    report = validate(cx)
    if not report.valid:
        raise InputError("check_prop_level needs a valid complex")
    eng, members, universe, n = _target_data(target)
    mu_raw = None
    for c in eng.full_support_cells(members):
        if _engine.intr(c) == n:
            mu_raw = c
            break
    mu_is_atom = mu_raw is not None and (
        len(mu_raw[-1]) == 1 and mu_raw == eng.atom_cell(next(iter(mu_raw[-1])))
    )
    points = collapsed = with_minimum = 0
    failures: list = []
    mu_point_node = None
    for node in eng.subcat_nodes(members):
        if shape_budget is not None:
            term = ThetaTerm.from_tuple(eng.node_term(node))
            if term.atom_count > shape_budget:
                continue
        points += 1
        in_sub = _in_subcomplexes_level(eng, node, n, universe)
        mu_in_image = mu_raw is not None and mu_raw in eng.node_image(node)
        if in_sub:
            collapsed += 1
            if mu_in_image and not (mu_is_atom or mu_raw is None):
                failures.append("collapsed point whose image contains the big cell")
        else:
            if not mu_in_image:
                failures.append("non-collapsed point missing the big cell")
            elif _is_globe_tree(node) and _engine.intr(node.cell) == n:
                if node.cell != mu_raw:
                    failures.append("second full-support top cell found")
                elif mu_point_node is not None:
                    failures.append("duplicate big-cell point")
                else:
                    mu_point_node = node
            else:
                with_minimum += 1
    big_info = None
    if mu_point_node is not None:
        cxp = target.parent if isinstance(target, Subcomplex) else target
        mu_pub = _public(cxp, eng, mu_raw)
        fib = fiber(_point(target, eng, mu_point_node))
        sd = decomposition_poset(mu_pub, keep_bottom=False)
        fib_images = {
            frozenset(_trim(_raw(c, eng)) for c in d.image) for d in fib.elements
        }
        sd_images = {
            frozenset(_trim(_raw(c, eng)) for c in d.image) for d in sd.elements
        }
        cross = fib_images == sd_images
        hom = homology(sd.to_finposet())
        big_info = {
            "size": len(sd.elements),
            "homology_trivial": hom.trivial(),
            "dismantles": dismantle(sd.to_finposet()),
            "cross_check": cross,
        }
        if not hom.trivial():
            failures.append("big-cell fiber has nonvanishing reduced homology")
        if not cross:
            failures.append("big-cell fiber disagrees with the decomposition poset")
    passed = not failures
    return PropLevelReport(
        passed, points, collapsed, with_minimum, big_info, failures
    )
