"""Fractional edge covers, the cost f(T) of an f-tree and the optimal f(Q).

For a symbol R of a query and an f-tree T, the *restricted query* of R keeps
only the classes on R's root path that R does not own (its non-relevant
nodes).  Its fractional edge cover number bounds how often an identifier of
R can repeat in the T-factorisation; f(T) is the maximum over symbols and
f(Q) the minimum of f(T) over all f-trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import ftree as ft
from .lp import max_packing, min_cover
from .query import Query, class_name


@dataclass(frozen=True)
class CoverHypergraph:
    """Vertices are attribute classes; each edge is a symbol with the classes
    it covers.  Edges that cover nothing are dropped."""

    vertices: tuple
    edges: tuple  # ((symbol, frozenset of classes), ...)

    @classmethod
    def build(cls, vertices, edges: dict) -> "CoverHypergraph":
        vs = tuple(sorted(vertices, key=class_name))
        vset = set(vs)
        es = []
        for sym in sorted(edges):
            cover = frozenset(edges[sym]) & vset
            if cover:
                es.append((sym, cover))
        for v in vs:
            if not any(v in e for _, e in es):
                raise ValueError(f"class {class_name(v)} is covered by no symbol")
        return cls(vs, tuple(es))

    def edge_map(self) -> dict:
        return dict(self.edges)

    def incidence(self) -> list:
        return [[int(v in e) for _, e in self.edges] for v in self.vertices]


@dataclass(frozen=True)
class LPSolution:
    cost: Fraction
    weights: dict


def query_hypergraph(q: Query, classes=None) -> CoverHypergraph:
    """Hypergraph of ``q`` on the given classes (all classes by default)."""
    cl = q.classes
    vs = cl.classes if classes is None else tuple(classes)
    return CoverHypergraph.build(vs, {s: cl.of_symbol(s) for s in q.symbol_names})


def restricted_query(q: Query, t, symbol: str) -> CoverHypergraph:
    _, _, nonrel = ft.node_sets(t, q, symbol)
    return query_hypergraph(q, nonrel)


@lru_cache(maxsize=None)
def _solve_cover(h: CoverHypergraph) -> LPSolution:
    if not h.vertices:
        return LPSolution(Fraction(0), {})
    inc = h.incidence()
    cost, x = min_cover(inc)
    for row in inc:
        if sum(a * w for a, w in zip(row, x)) < 1 or any(w < 0 for w in x):
            raise ArithmeticError("simplex returned an infeasible cover")
    return LPSolution(cost, {s: w for (s, _), w in zip(h.edges, x)})


def rho_star(h: CoverHypergraph) -> LPSolution:
    """Optimal fractional edge cover (exact)."""
    return _solve_cover(h)


def dual_max_independent(h: CoverHypergraph) -> LPSolution:
    """Optimal fractional independent set: weights on classes with total weight
    at most 1 inside every edge.  Solved as its own program."""
    if not h.vertices:
        return LPSolution(Fraction(0), {})
    inc = h.incidence()
    transposed = [list(col) for col in zip(*inc)]
    cost, y = max_packing(transposed)
    for row in transposed:
        if sum(a * w for a, w in zip(row, y)) > 1 or any(w < 0 for w in y):
            raise ArithmeticError("simplex returned an infeasible packing")
    return LPSolution(cost, dict(zip(h.vertices, y)))


def per_symbol_rho(q: Query, t) -> dict:
    full = ft.attach_leaves(t, q) if ft.is_reduced(ft.as_forest(t)) else ft.as_forest(t)
    return {s: rho_star(restricted_query(q, full, s)).cost for s in q.symbol_names}


def f_of_tree(q: Query, t) -> Fraction:
    return max(per_symbol_rho(q, t).values(), default=Fraction(0))


def f_of_query_enumerated(q: Query, pruned: bool = True):
    """Minimum of f(T) over ``iter_pruned`` (or over all reduced trees).

    Returns ``(f, tree)`` for the first optimal tree in enumeration order.
    Exponential in the number of classes; meant for cross-checks.
    """
    gen = ft.iter_pruned(q) if pruned else ft.iter_ftrees(q)
    best = None
    for rt in gen:
        f = f_of_tree(q, rt)
        if best is None or f < best[0]:
            best = (f, rt)
    return best[0], ft.attach_leaves(best[1], q)


def f_of_query(q: Query):
    """Optimal f(Q) with a witnessing f-tree (leaves attached).

    Threshold search over the pruned recursion.  A class set S placed below
    the ancestor set P costs the worst restricted cover among the symbols whose
    leaves hang inside it.  Each round looks for a tree strictly cheaper than
    the best one found so far, trying maximal roots in class-name order and
    abandoning a root as soon as one of its leaves is too expensive.  The
    search stops when a round fails.
    """
    cl = q.classes
    sym_classes = {s: cl.of_symbol(s) for s in q.symbol_names}
    edges = dict(sym_classes)

    @lru_cache(maxsize=None)
    def rho_of(vertices: frozenset) -> Fraction:
        return rho_star(CoverHypergraph.build(vertices, edges)).cost

    def below(theta):
        memo = {}

        def search(S, P):
            # a forest over S below P with cost < theta, as (cost, forest), or None
            key = (S, P)
            if key in memo:
                return memo[key]
            comps = ft._components(S, q)
            if len(comps) > 1:
                parts = []
                for C in comps:
                    r = search(C, P)
                    if r is None:
                        break
                    parts.append(r)
                out = None
                if len(parts) == len(comps):
                    out = (max(c for c, _ in parts), tuple(n for _, f in parts for n in f))
            else:
                out = None
                for A in ft.maximal_classes(q, S):
                    rest = S - {A}
                    path = P | {A}
                    cost = Fraction(0)
                    for s in cl.rel[A]:
                        if not (sym_classes[s] & rest):
                            cost = max(cost, rho_of(path - sym_classes[s]))
                    if theta is not None and cost >= theta:
                        continue
                    sub = search(rest, path) if rest else (Fraction(0), ())
                    if sub is None:
                        continue
                    out = (max(cost, sub[0]), (ft.Node(A, sub[1]),))
                    break
            memo[key] = out
            return out

        return search(frozenset(cl.classes), frozenset())

    if not cl.classes:
        return Fraction(0), ft.attach_leaves((), q)
    best = below(None)
    while best[0] > 0:
        better = below(best[0])
        if better is None:
            break
        best = better
    return best[0], ft.attach_leaves(best[1], q)
