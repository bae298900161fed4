"""Computing the factorisation of a query result along an f-tree.

``gen2`` works on per-symbol copies of the data sorted by the symbol's
attributes in tree order (shallower classes first).  Every call receives one
row range per symbol.  At a class node it walks the ranges of the symbols
owning the class, groups rows by value, and recurses on each value present in
all of them.  Symbols not owning the class keep their range.

``gen_naive`` follows the same recursion directly: it tries every value of
the class's active domain and scans relations for matching rows at leaves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import ftree as ft
from .cover import f_of_query, f_of_tree
from .errors import UnsatisfiableQuery
from .frep import EMPTY, FRep, Leaf, is_empty, make_prod, make_sum
from .query import Query, check_schema, class_name, split_constants, symbol_filters
from .reldata import Database, value_key


@dataclass
class SortedDatabase:
    """Per-symbol filtered rows, sorted by the symbol's key columns.

    ``keys[s]`` lists ``(class, column indices)`` in tree order; ``rows[s]`` is
    a list of ``(identifier, values)``.
    """

    rows: dict
    keys: dict

    def full_ranges(self) -> dict:
        return {s: (0, len(r)) for s, r in self.rows.items()}


@dataclass
class GenStats:
    calls: int = 0
    scanned: int = 0
    values: int = 0
    pruned: int = 0


def _prepare(t, q: Query):
    """Split constants and attach leaves; return ``(q', forest)``."""
    q2, _ = split_constants(q)
    forest = ft.as_forest(t)
    if ft.is_reduced(forest):
        forest = ft.attach_leaves(forest, q2)
    ft.check_valid(forest, q2)
    return q2, forest


def _filtered_rows(db: Database, q: Query, symbol: str) -> list:
    sym = q.symbol(symbol)
    rel = db[sym.base]
    filters = symbol_filters(q, q.constant_eqs).get(symbol, ())
    idx = [(rel.column(c), v) for c, v in filters]
    return [r for r in rel.rows if all(r[1][i] == v for i, v in idx)]


def sort_for_tree(db: Database, q: Query, t) -> SortedDatabase:
    """Sorted per-symbol copies of the data for the f-tree ``t``.

    Rows matching the query's constant conditions are kept and stably sorted
    by the symbol's class columns, ordered by node depth and then by name.
    """
    check_schema(q, db)
    q, forest = _prepare(t, q)
    depth = ft.depth_map(forest)
    cl = q.classes
    rows, keys = {}, {}
    for sym in q.symbols:
        rel = db[sym.base]
        classes = sorted(cl.of_symbol(sym.name), key=lambda c: (depth[c], class_name(c)))
        key = []
        for c in classes:
            cols = sorted(a for a in c if q.owner(a) == sym.name)
            key.append((c, tuple(rel.column(sym.column(a)) for a in cols)))
        flat = [i for _, cols in key for i in cols]
        data = _filtered_rows(db, q, sym.name)
        data.sort(key=lambda r: tuple(value_key(r[1][i]) for i in flat))
        rows[sym.name] = data
        keys[sym.name] = key
    return SortedDatabase(rows, keys)


def _head_layout(q: Query, db: Database) -> dict:
    """symbol -> (head attributes, column indices into the base relation)."""
    out = {}
    for sym in q.symbols:
        attrs = q.head_of(sym.name)
        rel = db[sym.base]
        out[sym.name] = (attrs, tuple(rel.column(sym.column(a)) for a in attrs))
    return out


def _leaf_sum(symbol, rows, layout) -> FRep:
    attrs, cols = layout[symbol]
    return make_sum(Leaf(ident, tuple(vals[i] for i in cols), attrs, symbol)
                    for ident, vals in rows)


def gen2(t, q: Query, db: Database, stats: GenStats | None = None) -> FRep:
    """The factorisation of ``q(db)`` along ``t`` by range merging."""
    stats = stats if stats is not None else GenStats()
    sdb = sort_for_tree(db, q, t)
    q, forest = _prepare(t, q)
    layout = _head_layout(q, db)
    cl = q.classes
    cols_at = {s: dict(k) for s, k in sdb.keys.items()}

    def groups(symbol, cls, start, end):
        # (value, start, end) blocks of rows whose class columns all equal value
        rows = sdb.rows[symbol]
        cols = cols_at[symbol][cls]
        first, others = cols[0], cols[1:]
        out = []
        i = start
        while i < end:
            v = rows[i][1][first]
            j = i
            while j < end and rows[j][1][first] == v:
                j += 1
            stats.scanned += j - i
            if others:
                # rows with equal extra columns form one contiguous block
                k = i
                while k < j and not all(rows[k][1][c] == v for c in others):
                    k += 1
                m = k
                while m < j and all(rows[m][1][c] == v for c in others):
                    m += 1
                if k < m:
                    out.append((v, k, m))
            else:
                out.append((v, i, j))
            i = j
        return out

    def gen_forest(nodes, ranges) -> FRep:
        factors = []
        for n in nodes:
            f = gen_node(n, ranges)
            if is_empty(f):
                return EMPTY
            factors.append(f)
        return make_prod(factors)

    def gen_node(n, ranges) -> FRep:
        stats.calls += 1
        if n.is_leaf:
            s, e = ranges[n.label]
            return _leaf_sum(n.label, sdb.rows[n.label][s:e], layout)
        syms = sorted(cl.rel[n.label])
        per = {s: groups(s, n.label, *ranges[s]) for s in syms}
        lookup = {s: {v: (a, b) for v, a, b in per[s]} for s in syms[1:]}
        summands = []
        for v, a, b in per[syms[0]]:
            if not all(v in lookup[s] for s in syms[1:]):
                continue
            stats.values += 1
            sub = dict(ranges)
            sub[syms[0]] = (a, b)
            for s in syms[1:]:
                sub[s] = lookup[s][v]
            child = gen_forest(n.children, sub)
            if is_empty(child):
                stats.pruned += 1
                continue
            summands.append(child)
        return make_sum(summands)

    return gen_forest(forest, sdb.full_ranges())


def gen_naive(t, q: Query, db: Database) -> FRep:
    """The factorisation of ``q(db)`` along ``t`` by trying every value."""
    check_schema(q, db)
    q, forest = _prepare(t, q)
    layout = _head_layout(q, db)
    cl = q.classes
    data = {s: _filtered_rows(db, q, s) for s in q.symbol_names}
    colmap = {}
    for sym in q.symbols:
        rel = db[sym.base]
        colmap[sym.name] = [(cl.of[a], rel.column(sym.column(a)))
                            for a in sym.attributes if a in cl.of]
    domain = {}
    for c in cl.classes:
        vals = set()
        for a in c:
            sym = q.symbol(q.owner(a))
            rel = db[sym.base]
            i = rel.column(sym.column(a))
            vals.update(r[1][i] for r in rel.rows)
        domain[c] = sorted(vals, key=value_key)

    def eval_forest(nodes, gamma):
        return make_prod(eval_node(n, gamma) for n in nodes)

    def eval_node(n, gamma):
        if n.is_leaf:
            rows = [r for r in data[n.label]
                    if all(r[1][i] == gamma[c] for c, i in colmap[n.label])]
            return _leaf_sum(n.label, rows, layout)
        out = []
        for v in domain[n.label]:
            gamma[n.label] = v
            out.append(eval_forest(n.children, gamma))
        gamma.pop(n.label, None)
        return make_sum(out)

    return eval_forest(forest, {})


@dataclass
class Factorisation:
    frep: FRep
    tree: tuple
    f: Fraction
    unsatisfiable: bool = False
    stats: GenStats = field(default_factory=GenStats)

    def __iter__(self):
        return iter((self.frep, self.tree, self.f))


def factorise(q: Query, db: Database, tree=None) -> Factorisation:
    """Factorise ``q(db)`` along an optimal f-tree (or the given one).

    A query whose constants contradict each other yields the empty sum with
    ``unsatisfiable`` set.
    """
    try:
        q2, _ = split_constants(q)
    except UnsatisfiableQuery:
        return Factorisation(EMPTY, (), Fraction(0), unsatisfiable=True)
    check_schema(q2, db)
    if tree is None:
        f, tree = f_of_query(q2)
    else:
        tree = ft.as_forest(tree)
        if ft.is_reduced(tree):
            tree = ft.attach_leaves(tree, q2)
        ft.check_valid(tree, q2)
        f = f_of_tree(q2, tree)
    stats = GenStats()
    phi = gen2(tree, q2, db, stats)
    return Factorisation(phi, tree, f, stats=stats)
