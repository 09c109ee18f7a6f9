"""Command-line surface.

Commands: gen, validate, cells, sd, homology, check.  Exit codes: 0 pass,
1 fail, 2 input error, 3 budget exceeded.  Reports are deterministic given
their inputs; wall-clock timing lives in a separate field that callers
should strip before comparing runs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

from . import catalog, checks
from .cells import Cell, cell_from_data, cell_to_data, enumerate_cells, _public
from .complexes import (
    Complex,
    complex_to_data,
    load_complex,
    validate,
)
from .decomp import decomposition_poset
from .errors import BudgetError, InputError
from .posets import homology, load_poset
from .theta import ThetaTerm, term_to_complex
from . import _engine

CLAIMS = {
    "thm-a": (
        "for every composite cell, the poset of proper pasting-shape "
        "decompositions has vanishing reduced integral homology"
    ),
    "disc-sphere": (
        "the linear refinements of a discrete preorder on d points have "
        "the reduced homology of a (d-2)-sphere"
    ),
    "iso-sd": (
        "the noncodiscrete linear refinements of a preorder form a poset "
        "isomorphic to the barycentric subdivision of its nonempty proper "
        "down-sets"
    ),
    "dc-contract": (
        "for a preorder that is not an equivalence relation, the down-set "
        "poset dismantles and it and the linear-refinement poset have "
        "trivial homology"
    ),
    "pos-iso": (
        "the single-level decomposition poset maps order-isomorphically "
        "onto the linear refinements of the boundary-atom preorder"
    ),
    "exists-min": (
        "a composite cell has a level whose boundary-atom preorder is not "
        "an equivalence relation, and an atom has none"
    ),
    "regularity": (
        "every nondegenerate pasting-shape point is injective on cells and "
        "composition cancels on both factors"
    ),
    "prop-level": (
        "every fiber of the collapse map is contractible: collapsed, with "
        "a minimum, or the big cell's proper decomposition poset"
    ),
    "cocart": (
        "merging composition levels is a cocartesian fibration between "
        "decomposition posets"
    ),
    "fibers": (
        "every fiber of the collapse map is contractible (per-point "
        "verdicts)"
    ),
}


@dataclass
class RunReport:
    command: str
    inputs: dict
    verdict: str
    details: dict
    claim: str | None = None
    timing: float = 0.0

    def to_data(self) -> dict:
        data = {
            "command": self.command,
            "inputs": self.inputs,
            "verdict": self.verdict,
            "details": self.details,
        }
        if self.claim is not None:
            data["claim"] = self.claim
        data["timing"] = self.timing
        return data


def _hash_file(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _emit(report: RunReport, args) -> None:
    payload = report.to_data()
    if getattr(args, "json", False):
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        lines = [f"{report.command}: {report.verdict}"]
        if report.claim:
            lines.append(f"  claim: {report.claim}")
        lines.append(
            "  " + json.dumps(report.details, sort_keys=True, default=str)
        )
        text = "\n".join(lines)
    _write_out(text + "\n", getattr(args, "output", None))


def _write_out(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_target(text: str):
    """A complex from a file path or an inline generator spec kind:param."""
    for kind in ("globe", "oriental", "cube", "theta"):
        prefix = kind + ":"
        if text.startswith(prefix):
            raw = text[len(prefix):]
            if kind == "theta":
                param = ThetaTerm.parse(raw).to_data()
            else:
                try:
                    param = int(raw)
                except ValueError as exc:
                    raise InputError(f"bad parameter in {text!r}") from exc
            return text, catalog.build(catalog.GeneratorSpec(kind, param))
    return text, load_complex(text)


def _pick_cell(cx: Complex, text: str | None) -> Cell | None:
    if text is None or text == "big":
        eng = _engine.engine_of(cx)
        full = eng.full_support_cells()
        if not full:
            if text == "big":
                raise InputError("the complex has no full-support cell")
            return None
        top = max(full, key=_engine.intr)
        return _public(cx, eng, top)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"bad cell JSON: {exc}") from exc
    return cell_from_data(cx, data)


def _cmd_gen(args) -> int:
    if args.kind == "theta":
        cx = term_to_complex(ThetaTerm.parse(args.parameter))
    else:
        try:
            n = int(args.parameter)
        except ValueError as exc:
            raise InputError("parameter must be an integer") from exc
        cx = {
            "globe": catalog.globe,
            "oriental": catalog.oriental,
            "cube": catalog.gray_cube,
        }[args.kind](n)
    _write_out(
        json.dumps(complex_to_data(cx), indent=2) + "\n", args.output
    )
    return 0


def _cmd_validate(args) -> int:
    t0 = time.perf_counter()
    cx = load_complex(args.file)
    report = validate(cx)
    run = RunReport(
        "validate",
        {args.file: _hash_file(args.file)},
        "pass" if report.valid else "fail",
        report.to_data(),
        timing=time.perf_counter() - t0,
    )
    _emit(run, args)
    return 0 if report.valid else 1


def _cmd_cells(args) -> int:
    t0 = time.perf_counter()
    cx = load_complex(args.file)
    rep = enumerate_cells(cx, max_cells=args.budget)
    counts = {str(n): rep.count(n) for n in sorted(rep.cells_by_dim)}
    details: dict = {"counts": counts}
    if args.json:
        details["cells"] = {
            str(n): [
                cell_to_data(c)
                for c in sorted(rep.cells_by_dim[n], key=lambda c: c.sort_key())
            ]
            for n in sorted(rep.cells_by_dim)
        }
    run = RunReport(
        "cells",
        {args.file: _hash_file(args.file)},
        "pass",
        details,
        timing=time.perf_counter() - t0,
    )
    _emit(run, args)
    return 0


def _cmd_sd(args) -> int:
    cx = load_complex(args.file)
    mu = _pick_cell(cx, args.cell or "big")
    restriction = "all"
    if args.restriction is not None:
        try:
            restriction = frozenset(json.loads(args.restriction))
        except (json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"bad restriction: {exc}") from exc
    poset = decomposition_poset(
        mu,
        restriction=restriction,
        keep_bottom=args.keep_bottom,
        max_elements=args.budget,
    )
    data = poset.to_data()
    if args.dot:
        lines = ["digraph sd {"]
        for i in range(len(poset.elements)):
            lines.append(f'  e{i} [label="{i}"];')
        for i, j in data["order"]:
            lines.append(f"  e{i} -> e{j};")
        lines.append("}")
        _write_out("\n".join(lines) + "\n", args.output)
    else:
        _write_out(json.dumps(data, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def _cmd_homology(args) -> int:
    t0 = time.perf_counter()
    poset = load_poset(args.file)
    hom = homology(poset)
    run = RunReport(
        "homology",
        {args.file: _hash_file(args.file)},
        "pass",
        {"homology": hom.to_data()},
        timing=time.perf_counter() - t0,
    )
    _emit(run, args)
    return 0


def _corpus_targets_for(name: str):
    include_boundaries = name not in ("thm-a",)
    return catalog.corpus_targets(include_boundaries=include_boundaries)


def _cmd_check(args) -> int:
    t0 = time.perf_counter()
    name = args.name
    if name not in CLAIMS:
        raise InputError(
            f"unknown check {name!r}; known: {', '.join(sorted(CLAIMS))}"
        )
    inputs: dict = {}
    targets = None
    if name in ("disc-sphere", "iso-sd", "dc-contract"):
        pass
    else:
        spec = args.target or "corpus"
        if spec == "corpus":
            inputs["target"] = "corpus"
            targets = _corpus_targets_for(name)
        else:
            label, cx = _load_target(spec)
            if ":" not in spec:
                inputs[spec] = _hash_file(spec)
            else:
                inputs["target"] = spec
            targets = [(label, cx)]
        if args.cell is not None and len(targets) == 1:
            label, cx = targets[0]
            mu = _pick_cell(cx, args.cell)
            inputs["cell"] = args.cell
            targets = [(label, cx)]
            _ = mu  # cell-restricted checks below pick it up

    if name == "disc-sphere":
        inputs["d"] = args.d
        passed, details = checks.check_disc_sphere(args.d)
    elif name == "iso-sd":
        inputs["max-carrier"] = args.max_carrier
        passed, details = checks.check_iso_sd(args.max_carrier)
    elif name == "dc-contract":
        inputs["max-carrier"] = args.max_carrier
        passed, details = checks.check_dc_contract(args.max_carrier)
    elif name == "thm-a":
        passed, details = checks.check_thm_a(targets, budget=args.budget)
    elif name == "pos-iso":
        passed, details = checks.check_pos_iso(targets)
    elif name == "exists-min":
        passed, details = checks.check_exists_min(targets)
    elif name == "regularity":
        passed, details = checks.check_regularity(targets)
    elif name in ("prop-level", "fibers"):
        passed, details = checks.check_prop_level_targets(
            targets, shape_budget=args.budget
        )
    elif name == "cocart":
        passed, details = checks.check_cocart(targets)
    else:  # pragma: no cover
        raise InputError(f"unhandled check {name!r}")
    run = RunReport(
        f"check {name}",
        inputs,
        "pass" if passed else "fail",
        details,
        claim=CLAIMS[name],
        timing=time.perf_counter() - t0,
    )
    _emit(run, args)
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pasting",
        description=(
            "exact combinatorics of pasting diagrams: cells of free "
            "categories on complexes, decomposition posets, and poset "
            "topology"
        ),
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p, output=True):
        p.add_argument("--json", action="store_true", help="machine output")
        p.add_argument(
            "--budget", type=int, default=None, help="enumeration cap"
        )
        if output:
            p.add_argument("-o", "--output", default=None, help="write to file")

    p = sub.add_parser("gen", help="emit a generated complex as JSON")
    p.add_argument("kind", choices=["globe", "oriental", "cube", "theta"])
    p.add_argument("parameter", help="an integer, or a JSON term for theta")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("validate", help="validate a complex file")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("cells", help="enumerate all cells of a complex")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=_cmd_cells)

    p = sub.add_parser("sd", help="decomposition poset of a cell")
    p.add_argument("file")
    p.add_argument("--cell", default=None, help='cell JSON or "big"')
    p.add_argument("--keep-bottom", action="store_true")
    p.add_argument("--restriction", default=None, help="JSON list of levels")
    p.add_argument("--dot", action="store_true", help="emit DOT instead of JSON")
    common(p)
    p.set_defaults(fn=_cmd_sd)

    p = sub.add_parser("homology", help="reduced homology of a poset file")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=_cmd_homology)

    p = sub.add_parser("check", help="run a named corpus check")
    p.add_argument("name", help=", ".join(sorted(CLAIMS)))
    p.add_argument(
        "--target",
        default=None,
        help='"corpus" (default), a complex file, or kind:param',
    )
    p.add_argument("--cell", default=None, help='cell JSON or "big"')
    p.add_argument("--d", type=int, default=3, help="disc-sphere dimension")
    p.add_argument(
        "--max-carrier", type=int, default=4, help="preorder carrier bound"
    )
    common(p)
    p.set_defaults(fn=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
