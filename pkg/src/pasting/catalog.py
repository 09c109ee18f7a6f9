"""Generators for the test corpus: globes, simplex and cube complexes,
and pasting-shape complexes built from terms.

Orientation conventions are fixed here and documented on each generator;
the global plus/minus swap of any generated complex is equally valid, and
all downstream checks are convention-independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from itertools import combinations

from .complexes import Atom, Complex, Subcomplex, closure, restrict
from .errors import InputError

__all__ = [
    "GeneratorSpec",
    "globe",
    "oriental",
    "gray_cube",
    "build",
    "corpus_entries",
    "corpus_complexes",
]


def globe(n: int) -> Complex:
    """The n-globe: one source and one target atom per dimension below n,
    a single top atom; 2n+1 atoms in total."""
    if n < 0:
        raise InputError("globe dimension must be >= 0")
    atoms = []
    for d in range(n):
        lower = (frozenset(), frozenset()) if d == 0 else (
            frozenset((f"s{d - 1}",)),
            frozenset((f"t{d - 1}",)),
        )
        atoms.append(Atom(f"s{d}", d, *lower))
        atoms.append(Atom(f"t{d}", d, *lower))
    top_lower = (frozenset(), frozenset()) if n == 0 else (
        frozenset((f"s{n - 1}",)),
        frozenset((f"t{n - 1}",)),
    )
    atoms.append(Atom(f"top{n}", n, *top_lower))
    return Complex(tuple(atoms), f"globe{n}")


def oriental(n: int) -> Complex:
    """The n-simplex complex: atoms are the nonempty vertex subsets of
    {0..n}, one per nondegenerate face, of dimension cardinality - 1.

    The codimension-1 faces of a k-atom split by face-index parity
    relative to the dimension: dropping the i-th smallest vertex lands in
    minus when i and k have the same parity.  So the edge 01 has minus
    {0}, and the triangle 012 has minus {01, 12} and plus {02} (the top
    cell composes the spine onto the long edge).
    """
    if n < 0:
        raise InputError("oriental dimension must be >= 0")
    if n > 9:
        raise InputError("single-digit vertex labels only (n <= 9)")
    atoms = []
    for k in range(n + 1):
        for verts in combinations(range(n + 1), k + 1):
            name = "".join(map(str, verts))
            minus, plus = set(), set()
            for i in range(len(verts)):
                face = "".join(str(v) for j, v in enumerate(verts) if j != i)
                if k >= 1:
                    (minus if i % 2 == k % 2 else plus).add(face)
            atoms.append(Atom(name, k, frozenset(minus), frozenset(plus)))
    return Complex(tuple(atoms), f"oriental{n}")


def gray_cube(n: int) -> Complex:
    """The lax n-cube: atoms are words over {0, 1, *}, dimension the number
    of stars (the 0-cube's single atom is named "e").

    For the j-th star of a k-star word (counting stars from the left,
    starting at 1), the face with that star set to 0 lands in minus when j
    and k have the same parity, and in plus otherwise; the 1-face goes the
    other way.  This is the same dimension-relative parity as the simplex
    family: edges run from the 0 end to the 1 end, and the square ** has
    minus {*0, 1*} and plus {0*, *1}.
    """
    if n < 0:
        raise InputError("cube dimension must be >= 0")

    def name(word):
        return "".join(word) if word else "e"

    atoms = []
    words = [[]]
    for _ in range(n):
        words = [w + [c] for w in words for c in "01*"]
    words.sort(key=lambda w: (w.count("*"), name(w)))
    for w in words:
        stars = [p for p, c in enumerate(w) if c == "*"]
        k = len(stars)
        minus, plus = set(), set()
        for j, p in enumerate(stars, start=1):
            zero = name(w[:p] + ["0"] + w[p + 1:])
            one = name(w[:p] + ["1"] + w[p + 1:])
            if j % 2 == k % 2:
                minus.add(zero)
                plus.add(one)
            else:
                minus.add(one)
                plus.add(zero)
        atoms.append(Atom(name(w), len(stars), frozenset(minus), frozenset(plus)))
    return Complex(tuple(atoms), f"cube{n}")


@dataclass(frozen=True)
class GeneratorSpec:
    """One corpus entry: a family name, its parameter, and optionally the
    restriction to the boundary (all atoms below the top dimension)."""

    kind: str  # globe | oriental | cube | theta
    parameter: object  # int for the first three, nested lists for theta
    boundary: bool = False

    def label(self) -> str:
        if self.kind == "theta":
            core = f"theta{json.dumps(self.parameter, separators=(',', ':'))}"
        else:
            core = f"{self.kind}{self.parameter}"
        return core + ("~boundary" if self.boundary else "")


def build(spec: GeneratorSpec) -> Complex:
    if spec.kind == "globe":
        cx = globe(int(spec.parameter))
    elif spec.kind == "oriental":
        cx = oriental(int(spec.parameter))
    elif spec.kind == "cube":
        cx = gray_cube(int(spec.parameter))
    elif spec.kind == "theta":
        from .theta import ThetaTerm, term_to_complex

        cx = term_to_complex(ThetaTerm.from_data(spec.parameter))
    else:
        raise InputError(f"unknown generator kind {spec.kind!r}")
    if spec.boundary:
        top = cx.dim
        keep = closure(cx, [a.id for a in cx.atoms if a.dim < top]).members
        sub = restrict(cx, keep)
        return Complex(sub.atoms, spec.label())
    if spec.kind == "theta":
        return Complex(cx.atoms, spec.label())
    return cx


def _terms_with_generators(g: int) -> list:
    """All term tuples whose complex has exactly g positive-dim atoms."""
    if g == 0:
        return [()]
    out = []
    for r in range(1, g + 1):
        rest = g - r

        def compositions(total, parts):
            if parts == 1:
                yield (total,)
                return
            for first in range(total + 1):
                for tail in compositions(total - first, parts - 1):
                    yield (first,) + tail

        for sizes in compositions(rest, r):
            from itertools import product

            for combo in product(*[_terms_with_generators(s) for s in sizes]):
                out.append(tuple(combo))
    return out


def _term_height(tt) -> int:
    return 1 + max((_term_height(c) for c in tt), default=-1) if tt else 0


def _term_data(tt) -> list:
    return [_term_data(c) for c in tt]


def default_corpus_entries(
    max_generators: int = 6, max_height: int = 3
) -> list:
    """The corpus the manifest is generated from: every term with at most
    max_generators positive-dimensional atoms and height at most
    max_height, the simplex family through dimension 4, the cube family
    through dimension 3, and the boundary restriction of each
    positive-dimensional entry."""
    terms = []
    for g in range(max_generators + 1):
        for tt in sorted(set(_terms_with_generators(g)), key=str):
            if _term_height(tt) <= max_height:
                terms.append(tt)
    bases = [GeneratorSpec("theta", _term_data(tt)) for tt in terms]
    bases += [GeneratorSpec("oriental", n) for n in range(5)]
    bases += [GeneratorSpec("cube", n) for n in range(4)]
    out = list(bases)
    for spec in bases:
        if spec.kind == "theta":
            if _term_height(spec.parameter) >= 1:
                out.append(GeneratorSpec(spec.kind, spec.parameter, True))
        elif spec.parameter >= 1:
            out.append(GeneratorSpec(spec.kind, spec.parameter, True))
    return out


def corpus_entries(include_boundaries: bool = True) -> list:
    """The checked-in corpus manifest as GeneratorSpec values."""
    text = resources.files("pasting").joinpath("corpus.json").read_text("utf-8")
    entries = []
    for item in json.loads(text):
        spec = GeneratorSpec(item["kind"], item["parameter"], item.get("boundary", False))
        if spec.boundary and not include_boundaries:
            continue
        entries.append(spec)
    return entries


def corpus_complexes(include_boundaries: bool = True):
    """Yield (spec, complex) pairs for the whole corpus."""
    for spec in corpus_entries(include_boundaries):
        yield spec, build(spec)


def corpus_targets(include_boundaries: bool = True) -> list:
    """(label, target) pairs for the corpus, where boundary entries are
    Subcomplex views of their already-built parent (so the heavy per-
    complex caches are shared)."""
    bases: dict = {}
    out = []
    for spec in corpus_entries(include_boundaries):
        key = (spec.kind, json.dumps(spec.parameter, sort_keys=True))
        if not spec.boundary:
            cx = build(spec)
            bases[key] = cx
            out.append((spec.label(), cx))
        else:
            parent = bases.get(key)
            if parent is None:
                parent = build(GeneratorSpec(spec.kind, spec.parameter))
                bases[key] = parent
            top = parent.dim
            members = closure(
                parent, [a.id for a in parent.atoms if a.dim < top]
            ).members
            out.append((spec.label(), Subcomplex(parent, members)))
    return out
