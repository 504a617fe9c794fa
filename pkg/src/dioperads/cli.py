"""Command-line front end.

Exit status: 0 when every check passes, 1 when a check fails, 2 on parse or
validation errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Sequence, Tuple

from . import dioperad as dio
from .graphs import dump_graph
from . import polyvector as pv
from . import representation as rep
from . import resolution as res

BOX_COMPONENTS = ((2, 2), (2, 3), (3, 2))


class UsageError(Exception):
    pass


def _emit(rows: Sequence[Tuple], header: Sequence[str], fmt: str) -> None:
    rows = [tuple(str(x) for x in r) for r in rows]
    if fmt == "tsv":
        print("\t".join(header))
        for r in rows:
            print("\t".join(r))
        return
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _presentation(name: str) -> dio.QuadraticPresentation:
    if name in dio.BUILTIN_FILES:
        return dio.builtin(name)
    return dio.parse_presentation(_read(name), name)


def _polyvector(path: str) -> pv.PolyVector:
    return pv.parse(_read(path), path)


def _dump_keys(keys) -> None:
    for key in keys:
        print(f"graph {dio.format_key(key)}")
        print(dump_graph(dio.key_to_graph(key)))


def cmd_dual(a) -> int:
    p = _presentation(a.presentation)
    span = dio.full_relation_span(p, a.m, a.n)
    comp = dio.orthogonal_complement(p, a.m, a.n)
    free = len(span.columns)
    _emit([("free", free), ("relations", span.dim), ("complement", comp.dim)],
          ("space", "dim"), a.format)
    if a.format != "tsv":
        for i, row in enumerate(comp.rows, start=1):
            terms = " ".join(f"{'+' if c > 0 else '-'}{abs(c)} {dio.format_key(k)}"
                             for k, c in sorted(row.items()))
            print(f"s{i} = {terms}")
    if a.dump_graphs:
        _dump_keys(span.columns)
    return 0 if span.dim + comp.dim == free else 1


def cmd_dims(a) -> int:
    p = _presentation(a.presentation)
    weight = a.weight if a.weight is not None else a.m + a.n - 2
    d = dio.quotient_dim(p, a.m, a.n, weight, method=a.method)
    _emit([(a.m, a.n, weight, len(dio.free_basis(p.basis, a.m, a.n, weight)), d)],
          ("m", "n", "weight", "free", "quotient"), a.format)
    return 0


def cmd_boxcheck(a) -> int:
    big = dio.builtin("lie2-1-bi")
    upper, lower = dio.builtin("lie1"), dio.builtin("lie2")
    rows, ok = [], True
    for m, n in BOX_COMPONENTS:
        q = dio.total_quotient_dim(big, m, n)
        b = dio.box_product_dim(upper, lower, m, n)
        ok &= q == b
        rows.append((m, n, q, b, "ok" if q == b else "MISMATCH"))
    _emit(rows, ("m", "n", "quotient", "box", "status"), a.format)
    return 0 if ok else 1


def cmd_resolve(a) -> int:
    gens = res.generators(a.m, a.n)
    if not gens:
        raise UsageError(f"no resolution generators at ({a.m},{a.n})")
    for g in gens:
        d = res.differential(g)
        print(f"d({g.name}) = {dio.format_element(d) if not d.is_zero() else '0'}")
        if a.dump_graphs:
            _dump_keys(sorted(d.terms))
    return 0


def cmd_d2check(a) -> int:
    rows = res.d2_table(a.max_arity, a.max_arity)
    _emit([(nm, nd, ndd, "ok" if passed else "FAIL") for nm, nd, ndd, passed in rows],
          ("generator", "terms_d", "terms_d2", "status"), a.format)
    return 0 if all(r[3] for r in rows) else 1


def cmd_schouten(a) -> int:
    A, B = _polyvector(a.a), _polyvector(a.b)
    if A.V != B.V:
        raise UsageError("polyvectors live over different spaces")
    out = pv.schouten_hbar(A, B) if a.hbar else pv.schouten(A, B)
    sys.stdout.write(pv.serialize(out))
    return 0


def cmd_normalize(a) -> int:
    text = _read(a.file)
    suffix = Path(a.file).suffix
    if suffix == ".pres":
        out = dio.serialize_presentation(dio.parse_presentation(text, a.file))
    elif suffix == ".pv":
        out = pv.serialize(pv.parse(text, a.file))
    elif suffix == ".family":
        out = rep.serialize_family(rep.parse_family(text, a.file))
    else:
        raise UsageError(f"unknown file type {suffix!r}; expected .pres, .pv or .family")
    sys.stdout.write(out)
    return 0


def _verdict(v: rep.BihamVerdict, fmt: str) -> int:
    rows = [(name, "true" if val else "false") for name, val in v.rows()]
    if v.report is not None:
        rows.append(("homotopy_identities", "true" if v.report.ok else "false"))
    _emit(rows, ("check", "value"), fmt)
    if v.report is not None:
        for line in v.report.lines():
            print(line)
    passed = v.ok and (v.report is None or v.report.ok)
    return 0 if passed else 1


def cmd_check_rep(a) -> int:
    fam = rep.parse_family(_read(a.family), a.family)
    G = rep.gamma_from_mu(fam)
    return _verdict(rep.check_extended_biham(G, with_defects=a.defects), a.format)


def cmd_check_biham(a) -> int:
    G = _polyvector(a.polyvector)
    return _verdict(rep.check_extended_biham(G, with_defects=a.defects), a.format)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dioperads", description="Dioperad and polyvector computations.")
    sub = ap.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("table", "tsv"), default="table")

    p = sub.add_parser("dual", help="orthogonal complement of the relations at (m,n)")
    p.add_argument("presentation", help="built-in name or presentation file")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dump-graphs", action="store_true", help="print the underlying graph of every free basis tree")
    fmt(p)
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("dims", help="quotient dimension at (m,n) and a weight")
    p.add_argument("presentation")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weight", type=int, help="defaults to m+n-2")
    p.add_argument("--method", choices=("auto", "eliminate", "orbits"), default="auto")
    fmt(p)
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("boxcheck", help="compare the box product with the quotient dimensions")
    fmt(p)
    p.set_defaults(func=cmd_boxcheck)

    p = sub.add_parser("resolve", help="print the differential of the generators at (m,n)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dump-graphs", action="store_true", help="print the underlying graph of every term")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("d2check", help="check that the differential squares to zero")
    p.add_argument("--max-arity", type=int, required=True)
    fmt(p)
    p.set_defaults(func=cmd_d2check)

    p = sub.add_parser("schouten", help="Schouten bracket of two polyvector files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--hbar", action="store_true", help="allow hbar and bracket it as a scalar")
    p.set_defaults(func=cmd_schouten)

    p = sub.add_parser("normalize", help="parse a .pres, .pv or .family file and print it back")
    p.add_argument("file")
    p.set_defaults(func=cmd_normalize)

    for name, arg, func in (("check-rep", "family", cmd_check_rep),
                            ("check-biham", "polyvector", cmd_check_biham)):
        p = sub.add_parser(name)
        p.add_argument(arg)
        p.add_argument("--defects", action="store_true", help="also evaluate the bracket identities")
        fmt(p)
        p.set_defaults(func=func)
    return ap


def main(argv: List[str] = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return a.func(a)
    except (pv.ParseError, UsageError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
