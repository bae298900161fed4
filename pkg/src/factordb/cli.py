"""Command-line interface: ``factordb <command> [flags]``.

Exit codes: 0 success, 1 internal error or failed verification, 2 bad input
(query syntax, files, schemas, trees), 3 unsatisfiable constants, 4 resource
limit exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from collections import Counter
from pathlib import Path

from . import bounds, cover, frep, ftree, gen
from .errors import (FactorDBError, FormatError, IntegrityError, InvalidTree,
                     QuerySyntaxError, SchemaError, SizeExceeded, UnsatisfiableQuery)
from .query import is_hierarchical, multiplicity, parse_query, split_constants
from .reldata import database_stats, load_database, write_database

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_UNSAT, EXIT_RESOURCE = 0, 1, 2, 3, 4


def _fmt(f) -> str:
    return str(f)


def _monomial_limit(args) -> int:
    if args.monomial_limit is not None:
        limit = args.monomial_limit
    else:
        limit = int(os.environ.get("FACTORDB_MONOMIAL_LIMIT", frep.DEFAULT_MONOMIAL_LIMIT))
    if limit <= 0:
        raise SystemExit("monomial limit must be positive")
    return limit


def _read_query(args, db=None):
    text = Path(args.query).read_text(encoding="utf-8")
    text = "\n".join(ln for ln in text.splitlines() if not ln.lstrip().startswith("#"))
    schema = None
    if db is not None:
        schema = db.schemas()
    elif getattr(args, "data", None):
        schema = load_database(args.data).schemas()
    return parse_query(text, schema)


def _read_tree(args):
    if not getattr(args, "tree", None):
        return None
    return ftree.from_json(Path(args.tree).read_text(encoding="utf-8"))


def _emit(obj):
    print(json.dumps(obj, sort_keys=False))


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> int:
    q = _read_query(args)
    q2, _ = split_constants(q)
    f, tree = cover.f_of_query(q2)
    rho = cover.per_symbol_rho(q2, tree)
    report = {
        "f_of_query": _fmt(f),
        "optimal_tree": ftree.to_obj(tree),
        "per_symbol_rho": {s: _fmt(v) for s, v in rho.items()},
        "hierarchical": is_hierarchical(q2),
        "M": multiplicity(q2),
    }
    if args.format == "text":
        print(f"f(Q) = {report['f_of_query']}")
        print(f"tree: {ftree.tree_key(tree)}")
        for s, v in report["per_symbol_rho"].items():
            print(f"rho*({s}) = {v}")
        print(f"hierarchical: {str(report['hierarchical']).lower()}")
        print(f"M: {report['M']}")
    else:
        _emit(report)
    return EXIT_OK


def cmd_plan(args) -> int:
    q = _read_query(args)
    q2, _ = split_constants(q)
    trees = ftree.iter_ftrees(q2) if args.all else ftree.iter_pruned(q2)
    for k, rt in enumerate(trees):
        if args.limit is not None and k >= args.limit:
            break
        full = ftree.attach_leaves(rt, q2)
        print(json.dumps({"f": _fmt(cover.f_of_tree(q2, full)), "tree": ftree.to_obj(full)}),
              flush=True)
    return EXIT_OK


def _factorise(args):
    db = load_database(args.data)
    q = _read_query(args, db)
    result = gen.factorise(q, db, _read_tree(args))
    return q, db, result


def cmd_factorise(args) -> int:
    q, db, result = _factorise(args)
    if result.unsatisfiable:
        print("warning: constants in the query contradict each other", file=sys.stderr)
    phi = result.frep
    if args.stats:
        size, k = frep.size(phi), frep.read_k(phi)
        n = db.size
        _emit({
            "size": size,
            "read_k": k,
            "f_tree": _fmt(result.f),
            "bound_size_ok": bounds.size_bound_holds(size, n, result.f, multiplicity(q)),
            "bound_read_ok": bounds.read_bound_holds(k, multiplicity(q), n, result.f),
        })
    elif args.format == "json":
        _emit({"frep": frep.to_text(phi), "tree": ftree.to_obj(result.tree),
               "f_tree": _fmt(result.f)})
    else:
        print(frep.to_text(phi))
    return EXIT_UNSAT if result.unsatisfiable else EXIT_OK


def cmd_enumerate(args) -> int:
    q, db, result = _factorise(args)
    total = frep.count_monomials(result.frep)
    if args.count_only:
        print(total)
        return EXIT_OK
    limit = _monomial_limit(args)
    if total > limit:
        raise SizeExceeded(f"result has {total} tuples, limit is {limit}")
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(q.head)
    for m in frep.enumerate_tuples(result.frep):
        out.writerow(m.tuple_for(q.head))
    sys.stdout.flush()
    return EXIT_OK


def cmd_verify(args) -> int:
    db = load_database(args.data)
    q = _read_query(args, db)
    limit = _monomial_limit(args)
    q2, _ = split_constants(q)
    tree = _read_tree(args)
    if tree is None:
        _, tree = cover.f_of_query(q2)
    elif ftree.is_reduced(tree):
        tree = ftree.attach_leaves(tree, q2)
    ftree.check_valid(tree, q2)
    f = cover.f_of_tree(q2, tree)
    phi = gen.gen2(tree, q2, db)
    n = db.size

    laws = {}
    expected = Counter(m.key() for m in bounds.brute_force_eval(q, db, limit))
    laws["result"] = frep.monomial_bag(phi, limit) == expected
    laws["naive"] = frep.equivalent(gen.gen_naive(tree, q2, db), phi, limit)
    occ = frep.occurrences(phi)
    oracle = bounds.occurrence_counts(q2, tree, db)
    laws["occurrences"] = all(
        occ.get(ident, 0) == oracle.get(ident, 0)
        for name in {s.base for s in q2.symbols} for ident in db[name].identifiers
    )
    laws["size_bound"] = bounds.size_bound_holds(frep.size(phi), n, f, multiplicity(q2))
    laws["read_bound"] = bounds.read_bound_holds(frep.read_k(phi), multiplicity(q2), n, f)
    for name, ok in laws.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(laws.values()) else EXIT_INTERNAL


def cmd_lowerbound(args) -> int:
    q = _read_query(args)
    lb = bounds.lower_bound_db(q, args.N)
    out = Path(args.output)
    write_database(lb.db, out)
    res = gen.factorise(q, lb.db)
    distinct = frep.count_monomials(res.frep)
    size, _, _ = database_stats(lb.db)
    report = {
        "rho_star": _fmt(lb.rho),
        "N": lb.n,
        "db_size": size,
        "result_distinct": distinct,
        "bound_holds": bounds.lower_bound_holds(distinct, size, q.size, lb.rho),
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    _emit(report)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="factordb",
                                     description="Factorised representations of query results.")
    parser.add_argument("--monomial-limit", type=int, default=None,
                        help="largest expansion allowed (env FACTORDB_MONOMIAL_LIMIT, default 10^6)")
    sub = parser.add_subparsers(dest="command", required=True)

    def query_args(p, data_required=False):
        p.add_argument("-q", "--query", required=True, help="query file")
        p.add_argument("-d", "--data", required=data_required,
                       help="directory of <relation>.csv files")

    p = sub.add_parser("analyze", help="f(Q), an optimal f-tree and per-symbol costs")
    query_args(p)
    p.add_argument("--format", choices=["json", "text"], default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plan", help="stream f-trees with their costs")
    query_args(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--all", action="store_true", help="every reduced f-tree")
    mode.add_argument("--pruned", action="store_true", help="only the pruned search (default)")
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("factorise", help="factorise the query result")
    query_args(p, data_required=True)
    p.add_argument("--tree", help="f-tree JSON to use instead of an optimal one")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--stats", action="store_true", help="print size, read_k and bound checks")
    p.set_defaults(func=cmd_factorise)

    p = sub.add_parser("enumerate", help="stream result tuples as CSV")
    query_args(p, data_required=True)
    p.add_argument("--tree")
    p.add_argument("--count-only", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="check the factorisation against brute force")
    query_args(p, data_required=True)
    p.add_argument("--tree")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lowerbound", help="write a database with a large result")
    query_args(p)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_lowerbound)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnsatisfiableQuery as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    except SizeExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (QuerySyntaxError, FormatError, SchemaError, IntegrityError, InvalidTree,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FactorDBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
