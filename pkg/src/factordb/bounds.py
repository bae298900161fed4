"""Brute-force oracles and explicit constructions behind the size bounds.

* :func:`brute_force_eval` evaluates a query by nested loops.
* :func:`occurrence_oracle` counts how often an identifier must occur in the
  factorisation along a given f-tree.
* :func:`lower_bound_db` builds databases whose results are as large as the
  fractional edge cover number allows.
* :func:`witness_db_nonhierarchical` builds databases forcing high
  readability for non-hierarchical queries.
* :func:`build_pn_factorisation` and :func:`build_crown_factorisation` give
  explicit low-readability factorisations of two polynomial families.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian

from . import ftree as ft
from .cover import dual_max_independent, query_hypergraph
from .errors import SizeExceeded, UnsatisfiableQuery
from .frep import DEFAULT_MONOMIAL_LIMIT, EMPTY, FRep, Leaf, Monomial, make_prod, make_sum
from .query import Query, check_schema, hierarchy_violation, multiplicity, split_constants
from .reldata import Database, Relation


# ---------------------------------------------------------------------------
# exact exponent comparisons (f = p/q)

def _pq(f) -> tuple:
    f = Fraction(f)
    return f.numerator, f.denominator


def size_bound_holds(size: int, db_size: int, f, m: int = 1) -> bool:
    """size <= M * |D|^(f+1), compared as size^q <= M^q * |D|^(p+q).

    With ``m = 1`` this is the bound for queries without repeated relations.
    A relation read by M symbols can have each identifier at M places, so
    e.g. ``R x R`` over n rows has size 2n.
    """
    p, q = _pq(f)
    return size ** q <= m ** q * db_size ** (p + q)


def read_bound_holds(k: int, m: int, db_size: int, f) -> bool:
    """k <= M * |D|^f, compared as k^q <= M^q * |D|^p."""
    p, q = _pq(f)
    return k ** q <= m ** q * db_size ** p


def lower_bound_holds(result: int, db_size: int, query_size: int, rho) -> bool:
    """result >= (|D|/|Q|)^rho, compared as result^q * |Q|^p >= |D|^p."""
    p, q = _pq(rho)
    return result ** q * query_size ** p >= db_size ** p


# ---------------------------------------------------------------------------
# nested-loop evaluation

def _join(q: Query, db: Database):
    """Yield ``(ids, assignment)`` for every combination of rows satisfying the
    selection; ``ids`` follows symbol order, ``assignment`` maps attributes to
    values."""
    check_schema(q, db)
    try:
        q, consts = split_constants(q)
    except UnsatisfiableQuery:
        return
    const = dict(consts)
    pos = {s.name: k for k, s in enumerate(q.symbols)}
    plans = []
    for k, sym in enumerate(q.symbols):
        rel = db[sym.base]
        cols = {a: rel.column(sym.column(a)) for a in sym.attributes}
        fixed = [(cols[a], const[a]) for a in sym.attributes if a in const]
        checks = []
        for a, b in q.equalities:
            pa, pb = pos[q.owner(a)], pos[q.owner(b)]
            if max(pa, pb) != k:
                continue
            if pa == pb:
                checks.append((cols[a], None, cols[b]))
            else:
                mine, other = (a, b) if pa == k else (b, a)
                checks.append((cols[mine], other, None))
        rows = [r for r in rel.rows if all(r[1][i] == v for i, v in fixed)]
        plans.append((sym, cols, checks, rows))

    def rec(k, ids, assign):
        if k == len(plans):
            yield tuple(ids), dict(assign)
            return
        sym, cols, checks, rows = plans[k]
        for ident, vals in rows:
            ok = True
            for i, other, j in checks:
                want = vals[j] if other is None else assign[other]
                if vals[i] != want:
                    ok = False
                    break
            if not ok:
                continue
            for a, i in cols.items():
                assign[a] = vals[i]
            ids.append(ident)
            yield from rec(k + 1, ids, assign)
            ids.pop()
        for a in cols:
            assign.pop(a, None)

    yield from rec(0, [], {})


def brute_force_eval(q: Query, db: Database, limit: int = DEFAULT_MONOMIAL_LIMIT) -> list:
    """Annotated result bag: one :class:`Monomial` per combination of rows,
    identifiers in symbol order and values for the head attributes."""
    out = []
    for ids, assign in _join(q, db):
        if len(out) >= limit:
            raise SizeExceeded(f"result has more than {limit} tuples")
        out.append(Monomial(ids, tuple((a, assign[a]) for a in q.head)))
    return out


def occurrence_counts(q: Query, t, db: Database) -> Counter:
    """Occurrences of every identifier in the factorisation along ``t``.

    For each symbol R, a row of R occurs once per distinct combination of
    values of R's non-relevant classes among the result tuples using that row
    (once if R has no non-relevant class and the row is used at all).
    Symbols reading the same relation add up.
    """
    q2, _ = split_constants(q)
    nonrel = [sorted(ft.node_sets(t, q2, s.name)[2], key=min) for s in q2.symbols]
    seen = [dict() for _ in q2.symbols]
    for ids, assign in _join(q2, db):
        for k, ident in enumerate(ids):
            seen[k].setdefault(ident, set()).add(tuple(assign[min(c)] for c in nonrel[k]))
    out = Counter()
    for per in seen:
        for ident, combos in per.items():
            out[ident] += len(combos)
    return out


def occurrence_oracle(q: Query, t, db: Database, identifier: str) -> int:
    """Number of occurrences of ``identifier`` in the factorisation along ``t``."""
    if not any(identifier in rel.identifiers for rel in db.relations.values()):
        raise KeyError(f"identifier {identifier!r} not in database")
    return occurrence_counts(q, t, db)[identifier]


# ---------------------------------------------------------------------------
# large-result databases

@dataclass
class LowerBoundDatabase:
    db: Database
    n: int           # the size parameter actually used, m**d
    base: int        # m
    d: int           # common denominator of the dual weights
    rho: Fraction
    weights: dict    # class -> dual weight
    domains: dict    # class -> domain size


def _full_relation(q: Query, sym, domains: dict, consts: dict) -> list:
    """All tuples of ``sym`` over the class domains, columns of one class equal."""
    cl = q.classes
    classes = sorted(cl.of_symbol(sym.name), key=min)
    out = []
    for combo in cartesian(*[range(1, domains[c] + 1) for c in classes]):
        val = dict(zip(classes, combo))
        out.append(tuple(consts[a] if a in consts else val[cl.of[a]] for a in sym.attributes))
    return out


def _assemble(q: Query, per_symbol: dict) -> Database:
    """One relation per base name; symbols sharing a base contribute the union."""
    by_base = {}
    for sym in q.symbols:
        cols = tuple(sym.column(a) for a in sym.attributes)
        schema, rows = by_base.setdefault(sym.base, (cols, {}))
        if schema != cols:
            raise ValueError(f"symbols reading {sym.base} disagree on its columns")
        for t in per_symbol[sym.name]:
            rows.setdefault(t, None)
    rels = []
    for base, (schema, rows) in by_base.items():
        ids = [f"{base}_{k}" for k in range(1, len(rows) + 1)]
        rels.append(Relation(base, schema, tuple(zip(ids, rows))))
    return Database.of(*rels)


def lower_bound_db(q: Query, N: int) -> LowerBoundDatabase:
    """Database with ``||Q(D)|| >= (|D|/|Q|)^rho*(Q)``.

    Each class gets the domain ``1..N^y`` for an optimal fractional
    independent set ``y``; relations hold every tuple over their classes.
    ``N`` is raised to the least ``m**d >= N`` so that all ``N^y`` are
    integers, ``d`` being the common denominator of the weights.
    """
    q2, consts = split_constants(q)
    h = query_hypergraph(q2)
    dual = dual_max_independent(h)
    d = math.lcm(*[w.denominator for w in dual.weights.values()]) if dual.weights else 1
    m = 1
    while m ** d < N:
        m += 1
    domains = {c: m ** int(d * w) for c, w in dual.weights.items()}
    per_symbol = {s.name: _full_relation(q2, s, domains, dict(consts)) for s in q2.symbols}
    return LowerBoundDatabase(_assemble(q2, per_symbol), m ** d, m, d,
                              dual.cost, dict(dual.weights), domains)


def witness_db_nonhierarchical(q: Query, N: int) -> Database:
    """Database over which the result needs readability growing with N.

    Picks classes A and B with overlapping but incomparable symbol sets; their
    attributes range over ``1..N`` and every other attribute is 1.
    """
    q2, consts = split_constants(q)
    if multiplicity(q2) > 1:
        raise ValueError("witness databases need a query without repeated relations")
    pair = hierarchy_violation(q2)
    if pair is None:
        raise ValueError(
            "query is hierarchical: no classes A, B with R in r(A) only, "
            "S in both and T in r(B) only"
        )
    domains = {c: (N if c in pair else 1) for c in q2.classes.classes}
    per_symbol = {s.name: _full_relation(q2, s, domains, dict(consts)) for s in q2.symbols}
    return _assemble(q2, per_symbol)


# ---------------------------------------------------------------------------
# polynomial families

def _idx(k: int, n: int) -> int:
    return (k - 1) % n + 1


def _r(i):
    return Leaf(f"r{i}")


def _s(i, j):
    return Leaf(f"s{i}_{j}")


def _t(j):
    return Leaf(f"t{j}")


def pn_polynomial(N: int) -> FRep:
    """Flat sum of r_i s_ij t_j over all i, j in 1..N."""
    return make_sum(make_prod([_r(i), _s(i, j), _t(j)])
                    for i in range(1, N + 1) for j in range(1, N + 1))


def build_pn_factorisation(N: int) -> FRep:
    """A read-(ceil(N/2)+1) factorisation of the r_i s_ij t_j polynomial.

    The first half of the pairs (j - i mod N below N/2) is grouped by r_i, the
    rest by t_j.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if N == 1:
        return make_prod([_r(1), _s(1, 1), _t(1)])
    half = N // 2
    a = make_sum(
        make_prod([_r(i), make_sum(make_prod([_s(i, _idx(i + j, N)), _t(_idx(i + j, N))])
                                   for j in range(half))])
        for i in range(1, N + 1)
    )
    b = make_sum(
        make_prod([make_sum(make_prod([_r(_idx(i - j, N)), _s(_idx(i - j, N), i)])
                            for j in range(half, N)), _t(i)])
        for i in range(1, N + 1)
    )
    return make_sum([a, b])


def crown_polynomial(N: int) -> FRep:
    """Flat sum of r_i t_j over all i != j in 1..N."""
    return make_sum(make_prod([_r(i), _t(j)])
                    for i in range(1, N + 1) for j in range(1, N + 1) if i != j)


def build_crown_factorisation(N: int) -> FRep:
    """Factorisation of the crown polynomial with read ceil(log2 N).

    Split the indices into a low half L (the first ceil(N/2)) and a high half
    H; recurse on both and add the two cross products (sum_L t)(sum_H r) and
    (sum_H t)(sum_L r).
    """

    def crown(idx):
        if len(idx) < 2:
            return EMPTY
        if len(idx) == 2:
            a, b = idx
            return make_sum([make_prod([_r(a), _t(b)]), make_prod([_r(b), _t(a)])])
        cut = (len(idx) + 1) // 2
        low, high = idx[:cut], idx[cut:]
        return make_sum([
            crown(low),
            crown(high),
            make_prod([make_sum(_t(j) for j in low), make_sum(_r(i) for i in high)]),
            make_prod([make_sum(_t(j) for j in high), make_sum(_r(i) for i in low)]),
        ])

    return crown(list(range(1, N + 1)))
