"""Command line front end.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on
usage or I/O errors.  ``--threads`` changes speed only; output is ordered
independently of it.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import catalog
from .divisibility import DivisibilityConstraints, max_divisibility_dimension, no_fifth_set_certificate
from .exactlin import is_negative_definite
from .lattice import (
    Lattice,
    LatticeError,
    SchemaError,
    dumps_canonical,
    group_structure,
    lattice_to_json,
    load_lattice,
    rational_from_json,
    rational_to_json,
)
from .nsclassify import PolarizedExtensionProblem, classify
from .overlattice import build_overlattice, minimal_root_preserving_overlattices, validate_glue
from .roots import enumerate_roots, format_ade_sum, is_isometric, root_decomposition

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# values stated for the code-dimension table
CODE_DIMENSIONS = {(2, 16): 5, (2, 15): 4, (2, 14): 3, (2, 7): 0, (3, 9): 3, (3, 5): 0}

# coefficient patterns of v - H/3 on the six d_j, by d mod 9
NS_PATTERNS = {0: (1, 1, 1, 0, 0, 0), 3: (1, 1, 2, 2, 0, 0), 6: (1, 2, 0, 0, 0, 0)}


class UsageError(Exception):
    pass


# --- I/O --------------------------------------------------------------------


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_lattice_file(path: str) -> Lattice:
    return load_lattice(_read_text(path))


def save_lattice_file(L: Lattice, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(lattice_to_json(L)))


def _load_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}", exc.msg) from None


def _load_glue(path: str) -> list[tuple[Fraction, ...]]:
    obj = _load_json(path)
    if isinstance(obj, dict) and "glue" in obj:
        obj = obj["glue"]
    if not isinstance(obj, list):
        raise SchemaError("$", "glue must be a list of rational vectors")
    return [rational_from_json(v, f"$[{i}]") for i, v in enumerate(obj)]


def _load_overrides(path: str | None) -> dict[str, list]:
    if path is None:
        return {}
    obj = _load_json(path)
    rows = obj.get("rows") if isinstance(obj, dict) else None
    if not isinstance(rows, dict):
        raise SchemaError("$.rows", "expected an object keyed by row id")
    out = {}
    for row, spec in rows.items():
        if row not in catalog.ROW_IDS:
            raise SchemaError(f"$.rows.{row}", "unknown catalog row")
        glue = spec.get("glue") if isinstance(spec, dict) else None
        if not isinstance(glue, list):
            raise SchemaError(f"$.rows.{row}.glue", "expected a list of rational vectors")
        out[row] = [rational_from_json(v, f"$.rows.{row}.glue[{i}]") for i, v in enumerate(glue)]
    return out


class _Output:
    def __init__(self, path: str | None):
        self.path = path
        self.parts: list[str] = []

    def write(self, text: str) -> None:
        self.parts.append(text if text.endswith("\n") else text + "\n")

    def json(self, obj) -> None:
        self.write(json.dumps(obj, indent=2))

    def flush(self) -> None:
        text = "".join(self.parts)
        if self.path:
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _js(x):
    if isinstance(x, (tuple, list)):
        return [_js(y) for y in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, frozenset):
        return sorted(_js(y) for y in x)
    return x


# --- verification report ----------------------------------------------------


@dataclass(frozen=True)
class Record:
    claim: str
    location: str
    expected: object
    computed: object

    @property
    def verdict(self) -> bool:
        return self.expected == self.computed

    def to_json(self) -> dict:
        return {"claim": self.claim, "location": self.location, "expected": _js(self.expected),
                "computed": _js(self.computed), "verdict": "pass" if self.verdict else "fail"}


@dataclass
class VerificationReport:
    records: list[Record] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> int:
        return sum(1 for r in self.records if r.verdict)

    @property
    def failed(self) -> int:
        return len(self.records) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def failures(self) -> list[Record]:
        return [r for r in self.records if not r.verdict]

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "summary": {"records": len(self.records), "passed": self.passed, "failed": self.failed},
            "records": [r.to_json() for r in self.records],
        }
        if timing:
            out["elapsed_seconds"] = round(self.elapsed, 3)
        return out

    def markdown(self) -> str:
        lines = ["| claim | location | expected | computed | verdict |", "|---|---|---|---|---|"]
        for r in self.records:
            lines.append(f"| {r.claim} | {r.location} | {_cell(r.expected)} | {_cell(r.computed)} | "
                         f"{'pass' if r.verdict else 'FAIL'} |")
        lines.append("")
        lines.append(f"{self.passed} passed, {self.failed} failed")
        return "\n".join(lines)


def _cell(x) -> str:
    s = json.dumps(_js(x)) if not isinstance(x, str) else x
    return s.replace("|", "\\|")


def _row_location(row: str) -> str:
    fam, tag = row.split("_", 1)
    table = "Kummer-type lattice table" if fam == "K" else "Nikulin-type lattice table"
    return f"{table}, group {tag}"


def _row_reports(rows: Sequence[str], overrides: dict, threads: int) -> list[catalog.RowReport]:
    def one(row):
        if row in overrides:
            return catalog.verify_with_glue(row, overrides[row])
        return catalog.verify_catalog_row(row)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, rows))
    return [one(r) for r in rows]


def _catalog_records(rows: Sequence[str], overrides: dict, threads: int) -> list[Record]:
    out = []
    for rep in _row_reports(rows, overrides, threads):
        for c in rep.checks:
            exp, got = c.expected, c.computed
            if (exp == got) != c.ok:
                # relations and bounds: record whether they hold
                exp, got = True, c.ok
            out.append(Record(f"{rep.row}.{c.field}", _row_location(rep.row), exp, got))
    return out


def _correction_records() -> list[Record]:
    d8 = catalog.wendland_correction_D8p()
    d12 = catalog.wendland_correction_D12()
    loc8, loc12 = "correction of the D8' glue", "correction of the D12 glue"
    return [
        Record("correction.D8p.witness_support", loc8, 6, d8.support_size),
        Record("correction.D8p.witness_rejected", loc8, True, d8.rejected),
        Record("correction.D8p.no_admissible_extension", loc8, True, d8.no_admissible_extension),
        Record("correction.D8p.given_glue_admissible", loc8, True, all(d8.given_glue_pass)),
        Record("correction.D12.candidate_length", loc12, 5, d12.candidate_length),
        Record("correction.D12.candidate_rejected", loc12, False, d12.candidate_passes),
        Record("correction.D12.kummer_passes", loc12, True, d12.kummer_passes),
    ]


def _counterexample_records() -> list[Record]:
    h = catalog.build_counterexample_H_Z2()
    loc = "overlattice H of A1^16 with roots outside F"
    return [
        Record("counterexample.H_Z2.index", loc, 2**6, h.index),
        Record("counterexample.H_Z2.more_roots_than_F", loc, True, h.root_count > 32),
        Record("counterexample.H_Z2.witness_norm", loc, -2, h.witness_norm),
    ]


def _code_records() -> list[Record]:
    out = []
    for (p, n), dim in CODE_DIMENSIONS.items():
        got, _ = max_divisibility_dimension(p, n)
        out.append(Record(f"codes.F{p}.length{n}.dimension", "divisibility code dimensions", dim, got))
    cert = no_fifth_set_certificate(15)
    loc = "length 15 construction of S_1, ..., S_4"
    out.append(Record("codes.F2.length15.sets_admissible", loc, True, cert.base_admissible))
    out.append(Record("codes.F2.length15.no_fifth_set", loc, True, cert.no_extension))
    return out


def ns_patterns(d_values: Sequence[int] = range(1, 46)) -> dict[int, list]:
    """Distinct outputs for M_Z3, grouped by d mod 9."""
    seen: dict[int, list] = {}
    for d in d_values:
        cls = classify(PolarizedExtensionProblem.from_catalog("M_Z3", 2 * d)).classes
        out = [list(c.coefficients) for c in cls]
        bucket = seen.setdefault(d % 9, [])
        if out not in bucket:
            bucket.append(out)
    return seen


def _ns_records() -> list[Record]:
    seen = ns_patterns()
    loc = "Neron-Severi overlattices of Zh + M_Z3"
    out = []
    for r in range(9):
        exp = [[list(NS_PATTERNS[r])]] if r in NS_PATTERNS else [[]]
        out.append(Record(f"ns.M_Z3.d_mod_9={r}", loc, exp, seen.get(r, [])))
    return out


def _embedding_records() -> list[Record]:
    out = []
    for sub, amb in (("M_Z3xZ3", "K_Z3"), ("M_Z4", "K_Z4")):
        try:
            e = catalog.embed_sublattice(sub, amb)
            got = e.primitive and e.isometric
        except catalog.CatalogError as exc:
            got = str(exc)
        out.append(Record(f"embedding.{sub}.in.{amb}", "primitive inclusions of Nikulin-type lattices", True, got))
    return out


def cmd_verify_all(group: str | None = None, overrides: dict | None = None, threads: int = 1) -> VerificationReport:
    t0 = time.perf_counter()
    overrides = overrides or {}
    rows = catalog.rows_for_group(group) if group else list(catalog.ROW_IDS)
    rep = VerificationReport(_catalog_records(rows, overrides, threads))
    if group is None:
        for part in (_correction_records, _counterexample_records, _code_records, _ns_records, _embedding_records):
            rep.records.extend(part())
    rep.elapsed = time.perf_counter() - t0
    return rep


# --- commands -----------------------------------------------------------------


def _cmd_catalog_list(args, out: _Output) -> int:
    items = []
    for row in catalog.ROW_IDS:
        r = catalog._row(row)
        items.append({"row": row, "group": r.tag, "root_lattice": r.root_type, "rank": r.expected.rank,
                      "index": r.expected.index, "disc": r.expected.disc_str(),
                      "gap_id": catalog._GAP.get(r.tag)})
    if args.json:
        out.json(items)
    else:
        for it in items:
            out.write(f"{it['row']:<12} {it['root_lattice']:<18} rank {it['rank']:<3} r {it['index']:<3} {it['disc']}")
    return EXIT_OK


def _cmd_catalog_build(args, out: _Output) -> int:
    which = args.which
    fam = "K" if which in "FK" else "M"
    tags = catalog.K_TAGS if fam == "K" else catalog.M_TAGS
    if args.group not in tags:
        raise UsageError(f"group {args.group!r} has no {which} lattice")
    if which == "F":
        L = catalog.build_F(args.group)
    elif which == "E":
        L = catalog.build_E(args.group)
    else:
        L = catalog.build_row(f"{fam}_{args.group}").result
    out.write(dumps_canonical(lattice_to_json(L)))
    return EXIT_OK


def _cmd_catalog_verify(args, out: _Output) -> int:
    rows = catalog.rows_for_group(args.group) if args.group else list(catalog.ROW_IDS)
    reports = _row_reports(rows, _load_overrides(args.glue_override), args.threads)
    if args.json:
        out.json([r.to_json() for r in reports])
    else:
        out.write(catalog.markdown_table(reports))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def _cmd_lattice_show(args, out: _Output) -> int:
    L = load_lattice_file(args.file)
    if args.json:
        out.write(dumps_canonical(lattice_to_json(L)))
        return EXIT_OK
    out.write(f"name: {L.name}\nrank: {L.rank}\ndet: {L.det}\neven: {str(L.is_even).lower()}\n"
              f"negative definite: {str(is_negative_definite(L.gram)).lower()}")
    return EXIT_OK


def _cmd_lattice_disc(args, out: _Output) -> int:
    D = load_lattice_file(args.file).discriminant_group
    info = {"group": group_structure(D.invariant_factors), "order": D.order, "length": D.length,
            "invariant_factors": list(D.invariant_factors),
            "generators": [rational_to_json(g) for g in D.generators], "q": [str(q) for q in D.q_values]}
    if args.json:
        out.json(info)
    else:
        out.write(f"{info['group']} (order {info['order']}, length {info['length']})")
        for g, q in zip(D.generators, D.q_values):
            out.write(f"  q = {q}  for  ({', '.join(str(x) for x in g)})")
    return EXIT_OK


def _cmd_lattice_roots(args, out: _Output) -> int:
    R = enumerate_roots(load_lattice_file(args.file))
    if args.json:
        out.json({"count": len(R), "roots": [list(r) for r in R.all()]})
    else:
        out.write(str(len(R)))
    return EXIT_OK


def _cmd_lattice_decompose(args, out: _Output) -> int:
    types = root_decomposition(load_lattice_file(args.file))
    text = format_ade_sum(types) if types else "0"
    if args.json:
        out.json({"root_lattice": text, "components": [str(t) for t in types]})
    else:
        out.write(text)
    return EXIT_OK


def _cmd_lattice_isometric(args, out: _Output) -> int:
    res = is_isometric(load_lattice_file(args.first), load_lattice_file(args.second))
    if args.json:
        out.json({"isometric": res})
    else:
        out.write(str(res).lower())
    return EXIT_OK


def _cmd_glue_validate(args, out: _Output) -> int:
    L = load_lattice_file(args.lattice)
    val = validate_glue(L, _load_glue(args.glue))
    if args.json:
        out.json({"valid": val.ok, "diagnostics": list(val.diagnostics),
                  "offending": rational_to_json(val.offending) if val.offending is not None else None})
    else:
        out.write("valid" if val.ok else "invalid: " + "; ".join(val.diagnostics))
    return EXIT_OK if val.ok else EXIT_FAIL


def _overlattice_json(M) -> dict:
    D = M.result.discriminant_group
    return {"index": M.index, "disc": group_structure(D.invariant_factors), "length": D.length,
            "roots": len(M.roots), "glue": [rational_to_json(v.coords) for v in M.glue],
            "lattice": lattice_to_json(M.result)}


def _cmd_glue_build(args, out: _Output) -> int:
    L = load_lattice_file(args.lattice)
    vs = _load_glue(args.glue)
    val = validate_glue(L, vs)
    if not val:
        out.write("invalid glue: " + "; ".join(val.diagnostics))
        return EXIT_FAIL
    M = build_overlattice(L, vs, args.name or "")
    info = _overlattice_json(M)
    info["roots_preserved"] = M.roots_coincide()
    if args.json:
        out.json(info)
    else:
        out.write(f"index {info['index']}, disc {info['disc']}, {info['roots']} roots")
        out.write(dumps_canonical(info["lattice"]))
    return EXIT_OK


def _cmd_glue_search(args, out: _Output) -> int:
    L = load_lattice_file(args.lattice)
    cons = DivisibilityConstraints.none() if args.no_divisibility else DivisibilityConstraints()
    rep = minimal_root_preserving_overlattices(L, args.max_length, cons, limit=args.limit, report=True)
    info = {"lattice": L.name, "max_length": args.max_length, "classes_seen": rep.classes_seen,
            "admissible_elements": rep.admissible_elements,
            "overlattices": [_overlattice_json(M) for M in rep.overlattices]}
    if args.json:
        out.json(info)
    else:
        out.write(f"{len(rep.overlattices)} maximal overlattice(s)")
        for M in info["overlattices"]:
            out.write(f"  index {M['index']}, disc {M['disc']}, length {M['length']}")
    return EXIT_OK


def _cmd_codes_search(args, out: _Output) -> int:
    weights = [int(w) for w in args.weights.split(",")] if args.weights else None
    dim, code = max_divisibility_dimension(args.field, args.length, weights)
    info: dict = {"field": args.field, "length": args.length,
                  "weights": sorted(code.allowed_weights), "dimension": dim,
                  "generators": [list(r) for r in code.generator_matrix]}
    if args.field == 2 and (args.certificate or args.length == 15):
        c = no_fifth_set_certificate(args.length)
        info["certificate"] = {"sets": [sorted(s) for s in c.sets], "base_admissible": c.base_admissible,
                               "candidates_checked": c.candidates_checked,
                               "extensions": [sorted(s) for s in c.extensions]}
    if args.json:
        out.json(info)
    else:
        out.write(f"dimension {dim}")
        for r in info["generators"]:
            out.write("  " + "".join(map(str, r)))
        if "certificate" in info:
            out.write(f"no further set: {str(not info['certificate']['extensions']).lower()}")
    return EXIT_OK


def _cmd_ns_classify(args, out: _Output) -> int:
    if args.dsq <= 0 or args.dsq % 2:
        raise UsageError("--dsq must be a positive even integer")
    res = classify(PolarizedExtensionProblem.from_catalog(args.catalog, args.dsq, args.p))
    if args.json:
        out.json(res.to_json())
    else:
        p = args.p
        out.write(f"h^2 = {args.dsq}, d = {args.dsq // 2}, d mod {p * p} = {(args.dsq // 2) % (p * p)}")
        if res.trivial_only:
            out.write(res.note)
        for c in res.classes:
            out.write(f"  {c.label}")
    return EXIT_OK


def _cmd_verify_all(args, out: _Output) -> int:
    rep = cmd_verify_all(args.group, _load_overrides(args.glue_override), args.threads)
    if args.json:
        out.json(rep.to_json(timing=not args.no_timing))
    else:
        out.write(rep.markdown())
        for r in rep.failures():
            out.write(f"FAILED {r.claim}: expected {_cell(r.expected)}, computed {_cell(r.computed)}")
    return EXIT_OK if rep.ok else EXIT_FAIL


# --- parser -------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    p.add_argument("--out", metavar="FILE", default=argparse.SUPPRESS, help="write output to FILE")
    p.add_argument("--threads", type=int, metavar="N", default=argparse.SUPPRESS, help="worker threads")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="k3glue", parents=[common],
                                     description="Exact lattice checks for Kummer-type and Nikulin-type lattices.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def group(name: str, help: str):
        g = sub.add_parser(name, help=help)
        return g.add_subparsers(dest="action", required=True)

    def leaf(container, name: str, func: Callable, help: str):
        p = container.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=func)
        return p

    cat = group("catalog", "the named lattices")
    leaf(cat, "list", _cmd_catalog_list, "list catalog rows")
    p = leaf(cat, "build", _cmd_catalog_build, "print a lattice as JSON")
    p.add_argument("--group", required=True)
    p.add_argument("--which", required=True, choices=["F", "K", "E", "M"])
    p = leaf(cat, "verify", _cmd_catalog_verify, "verify catalog rows")
    p.add_argument("--group")
    p.add_argument("--glue-override", metavar="FILE")

    lat = group("lattice", "operations on a JSON lattice")
    for name, func, hlp in (("show", _cmd_lattice_show, "summary or canonical JSON"),
                            ("disc", _cmd_lattice_disc, "discriminant group and form"),
                            ("roots", _cmd_lattice_roots, "number of roots"),
                            ("decompose", _cmd_lattice_decompose, "ADE type of the root system")):
        leaf(lat, name, func, hlp).add_argument("file")
    p = leaf(lat, "isometric", _cmd_lattice_isometric, "decide isometry")
    p.add_argument("first")
    p.add_argument("second")

    rts = group("roots", "roots of a JSON lattice")
    leaf(rts, "count", _cmd_lattice_roots, "number of roots").add_argument("file")
    leaf(rts, "decompose", _cmd_lattice_decompose, "ADE type of the root system").add_argument("file")

    glue = group("glue", "overlattices from glue vectors")
    for name, func, hlp in (("validate", _cmd_glue_validate, "check isotropy"),
                            ("build", _cmd_glue_build, "build the overlattice")):
        p = leaf(glue, name, func, hlp)
        p.add_argument("lattice")
        p.add_argument("glue")
        if name == "build":
            p.add_argument("--name")
    p = leaf(glue, "search", _cmd_glue_search, "maximal root-preserving overlattices")
    p.add_argument("lattice")
    p.add_argument("--max-length", type=int, required=True)
    p.add_argument("--no-divisibility", action="store_true", help="drop the curve-support constraints")
    p.add_argument("--limit", type=int, default=20000)

    codes = group("codes", "divisibility codes")
    p = leaf(codes, "search", _cmd_codes_search, "maximal admissible code")
    p.add_argument("--field", type=int, choices=[2, 3], required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--weights")
    p.add_argument("--certificate", action="store_true")

    ns = group("ns", "Neron-Severi overlattices")
    p = leaf(ns, "classify", _cmd_ns_classify, "classify Zh + N overlattices")
    p.add_argument("--catalog", required=True)
    p.add_argument("--dsq", type=int, required=True, help="h^2 = 2d")
    p.add_argument("--p", type=int, default=3)

    p = sub.add_parser("verify-all", parents=[common], help="run every check")
    p.set_defaults(func=_cmd_verify_all)
    p.add_argument("--group")
    p.add_argument("--glue-override", metavar="FILE")
    p.add_argument("--no-timing", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for name, default in (("json", False), ("out", None), ("threads", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.threads < 1:
        print("k3glue: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    out = _Output(args.out)
    try:
        code = args.func(args, out)
        out.flush()
        return code
    except (OSError, UsageError, LatticeError, ValueError) as exc:
        print(f"k3glue: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
