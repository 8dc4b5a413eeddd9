"""Command line: covers, Lebesgue numbers, ULAC values, arcs and endpoints.

    lcarc cover     --set S --k K --out cover.json
    lcarc lebesgue  --set S --cover cover.json
    lcarc lc2ulac   --set S --k K [--lc id|derived|table.json]
    lcarc arc       --set S --k K --from x,y --to x,y --out arc.json [--svg arc.svg]
    lcarc endpoints --set S --k K
    lcarc param     --set S --k K --out curve.json [--svg curve.svg]

Exit codes: 0 success, 2 budget exhausted, 3 precondition violation,
4 parse error.  Outputs are written only after the whole run succeeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

from . import svg
from .arcs import EndpointSearch, parametrize_arc
from .budget import Budget, BudgetExhausted, PreconditionViolation
from .catalog import (
    SetFormatError,
    TestContinuum,
    catalog_name,
    fmt_rational,
    load_set,
    on_set,
)
from .catalog import bounding_box as set_bbox
from .connectivity import OpenRegion, ac_arc, derived_lc, ulac_function
from .functions import LcFunction, identity, table
from .geometry import RationalBox
from .lebesgue import lebesgue_number
from .names import Cover, PolygonalCurve, point_approx, point_from_rational

EXIT_OK, EXIT_BUDGET, EXIT_PRECONDITION, EXIT_PARSE = 0, 2, 3, 4
COMMANDS = ("cover", "lebesgue", "lc2ulac", "arc", "endpoints", "param")
DEFAULT_BUDGET = 10**8


class ParseError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    set_path: str
    k: int = 3
    budget: int = DEFAULT_BUDGET
    out: Optional[str] = None
    svg: Optional[str] = None
    source: Optional[str] = None
    target: Optional[str] = None
    cover: Optional[str] = None
    lc: str = "derived"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParseError(f"unknown command {self.command!r}")
        if self.k < 0:
            raise ParseError("--k must be a natural number")
        if self.budget <= 0:
            raise ParseError("--budget must be positive")


# -- serialization -------------------------------------------------------------------------


def point_json(p) -> List[str]:
    return [fmt_rational(c) for c in p]


def box_json(b: RationalBox) -> Dict[str, List[str]]:
    return {"lo": point_json(b.lo), "hi": point_json(b.hi)}


def curve_json(F: PolygonalCurve) -> dict:
    return {"breakpoints": [fmt_rational(t) for t in F.breakpoints],
            "vertices": [point_json(v) for v in F.vertices]}


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {s!r}") from exc


def parse_point(s: str, dim: int):
    p = tuple(_rational(c) for c in s.split(","))
    if len(p) != dim:
        raise ParseError(f"point {s!r} should have {dim} coordinates")
    return p


def load_cover(path: str) -> Cover:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        boxes = tuple(
            RationalBox(tuple(_rational(c) for c in b["lo"]), tuple(_rational(c) for c in b["hi"]))
            for b in doc["boxes"]
        )
        return Cover(boxes)
    except ParseError:
        raise
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad cover file {path}: {exc}") from exc


def load_lc(choice: str, X: TestContinuum) -> LcFunction:
    if choice == "id":
        return identity()
    if choice == "derived":
        return derived_lc(X)
    try:
        with open(choice) as fh:
            values = json.load(fh)
        if not isinstance(values, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in values
        ):
            raise ValueError("expected a list of naturals")
        return table(values)
    except (OSError, ValueError) as exc:
        raise ParseError(f"bad LC table {choice}: {exc}") from exc


# -- commands --------------------------------------------------------------------------------


def _frame(X: TestContinuum) -> RationalBox:
    b = set_bbox(X)
    pad = max(b.widths()) / 8
    return b.expand(pad)


def _curve_outputs(cfg: RunConfig, X, F: PolygonalCurve, files: dict) -> None:
    files[cfg.out] = dumps(curve_json(F))
    if cfg.svg:
        background = [list(seg) for seg in X.segments()] if hasattr(X, "segments") else []
        files[cfg.svg] = svg.render(F.vertices, _frame(X), background)


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        X = load_set(cfg.set_path)
    except (OSError, SetFormatError) as exc:
        raise ParseError(str(exc)) from exc
    name = catalog_name(X)
    budget = Budget(cfg.budget)
    files: Dict[str, str] = {}
    printed: List[str] = []

    if cfg.command in ("arc", "param") and not cfg.out:
        raise ParseError(f"{cfg.command} needs --out")

    if cfg.command == "cover":
        cov = name[name.index_finer_than(cfg.k)]
        doc = {"boxes": [box_json(b) for b in cov.boxes]}
        printed.append(f"{len(cov)} boxes")
        if cfg.out:
            files[cfg.out] = dumps(doc)
        else:
            printed.append(dumps(doc).rstrip())
    elif cfg.command == "lebesgue":
        if not cfg.cover:
            raise ParseError("lebesgue needs --cover")
        L = lebesgue_number(name, load_cover(cfg.cover), budget)
        printed.append(str(L))
        if cfg.out:
            files[cfg.out] = dumps({"L": L})
    elif cfg.command == "lc2ulac":
        g = ulac_function(name, load_lc(cfg.lc, X), budget)
        values = g.values(cfg.k + 1)
        printed.append(" ".join(map(str, values)))
        if cfg.out:
            files[cfg.out] = dumps({"g": values})
    elif cfg.command == "arc":
        if not (cfg.source and cfg.target):
            raise ParseError("arc needs --from and --to")
        ends = [parse_point(cfg.source, X.dim), parse_point(cfg.target, X.dim)]
        for p in ends:
            if not on_set(X, p):
                raise PreconditionViolation(f"{point_json(p)} is not a point of the set")
        if ends[0] == ends[1]:
            raise PreconditionViolation("the two points coincide")
        x, y = map(point_from_rational, ends)
        U = OpenRegion([set_bbox(X).expand(Fraction(1))])
        h = ac_arc(name, load_lc(cfg.lc, X), U, x, y, budget)
        F = h[cfg.k]
        _curve_outputs(cfg, X, F, files)
        printed.append(f"{len(F.vertices)} vertices")
    elif cfg.command == "endpoints":
        search = EndpointSearch(name, load_lc(cfg.lc, X), budget)
        boxes = [point_approx(p, cfg.k) for p in search.names()]
        for b in boxes:
            printed.append(" x ".join(f"({fmt_rational(a)}, {fmt_rational(c)})"
                                      for a, c in zip(b.lo, b.hi)))
        if cfg.out:
            files[cfg.out] = dumps({"endpoints": [box_json(b) for b in boxes]})
    elif cfg.command == "param":
        h = parametrize_arc(name, load_lc(cfg.lc, X), budget)
        F = h[cfg.k]
        _curve_outputs(cfg, X, F, files)
        printed.append(f"{len(F.vertices)} vertices")

    for path, text in files.items():
        _write_atomic(path, text)
    for line in printed:
        print(line, file=stdout)
    return EXIT_OK


def _write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".lcarc-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


# -- argument parsing -----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lcarc", description="Arcs in locally connected continua.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--set", dest="set_path", required=True, help="set description (JSON)")
    p.add_argument("--k", type=int, default=3, help="precision")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="step budget")
    p.add_argument("--out", help="output JSON path")
    p.add_argument("--svg", help="output SVG path (arc, param)")
    p.add_argument("--from", dest="source", help="start point x,y")
    p.add_argument("--to", dest="target", help="end point x,y")
    p.add_argument("--cover", help="cover JSON (lebesgue)")
    p.add_argument("--lc", default="derived", help="id, derived, or a JSON list of naturals")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(**vars(args))
        return run(cfg)
    except ParseError as exc:
        print(f"lcarc: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExhausted as exc:
        print(f"lcarc: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except PreconditionViolation as exc:
        print(f"lcarc: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
