import math
import random
from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from factordb import ftree as ft
from factordb import samples
from factordb.cover import (CoverHypergraph, dual_max_independent, f_of_query,
                            f_of_query_enumerated, f_of_tree, per_symbol_rho,
                            query_hypergraph, restricted_query, rho_star)
from factordb.lp import Infeasible, minimize

from corpus import random_query


def brute_force_cover(h, grid=4):
    """Best cover with weights in multiples of 1/grid (an upper bound on rho*)."""
    inc = h.incidence()
    n = len(h.edges)
    best = None
    steps = [Fraction(k, grid) for k in range(grid + 1)]
    for x in product(steps, repeat=n):
        if all(sum(a * w for a, w in zip(row, x)) >= 1 for row in inc):
            c = sum(x)
            best = c if best is None else min(best, c)
    return best


def test_minimize_small_program():
    # min x + y  s.t.  x + 2y = 4, 3x + y = 7
    value, x = minimize([1, 1], [[1, 2], [3, 1]], [4, 7])
    assert x == [2, 1] and value == 3


def test_minimize_infeasible():
    with pytest.raises(Infeasible):
        minimize([1], [[1], [1]], [1, 2])


def test_triangle_restricted_query():
    q = samples.triangle_query()
    t1, t2 = samples.triangle_trees(q)
    h = restricted_query(q, t1, "R")
    of = q.classes.of
    assert set(h.vertices) == {of["S.B"], of["S.C"], of["T.D"]}
    assert h.edge_map() == {"S": {of["S.B"], of["S.C"]}, "T": {of["S.B"], of["T.D"]},
                            "U": {of["S.C"], of["T.D"]}}
    sol = rho_star(h)
    assert sol.cost == Fraction(3, 2)
    assert sol.weights == {"S": Fraction(1, 2), "T": Fraction(1, 2), "U": Fraction(1, 2)}
    dual = dual_max_independent(h)
    assert dual.cost == Fraction(3, 2)
    assert set(dual.weights.values()) == {Fraction(1, 2)}
    assert rho_star(restricted_query(q, t1, "S")).cost == 0


def test_single_vertex_three_edges():
    q = samples.rstu_query()
    h = restricted_query(q, samples.rstu_left_tree(q), "U")
    assert len(h.vertices) == 1 and {s for s, _ in h.edges} == {"R", "S", "T"}
    assert rho_star(h).cost == 1
    dual = dual_max_independent(h)
    assert dual.cost == 1 and list(dual.weights.values()) == [1]


def test_empty_hypergraph():
    h = CoverHypergraph.build((), {"R": set()})
    assert rho_star(h).cost == 0 and dual_max_independent(h).cost == 0


def test_f_of_trees_and_query():
    q = samples.triangle_query()
    t1, t2 = samples.triangle_trees(q)
    assert f_of_tree(q, t1) == Fraction(3, 2)
    assert f_of_tree(q, t2) == 1
    f, tree = f_of_query(q)
    assert f == 1 and ft.is_valid(tree, q)
    assert f_of_tree(q, tree) == 1


def test_hierarchical_query_costs_zero():
    q = samples.abc_query()
    good, _, _ = samples.abc_trees(q)
    assert f_of_tree(q, good) == 0
    assert all(v == 0 for v in per_symbol_rho(q, good).values())
    assert f_of_query(q)[0] == 0


def test_chain12_tree_cost():
    q = samples.chain_query(12)
    assert f_of_tree(q, samples.chain12_tree(q)) == 2


@pytest.mark.parametrize("n", range(4, 12))
def test_chain_law_small(n):
    assert f_of_query(samples.chain_query(n))[0] == math.floor(math.log2(n)) - 1


@pytest.mark.parametrize("n", range(4, 8))
def test_chain_search_matches_enumeration(n):
    q = samples.chain_query(n)
    assert f_of_query(q)[0] == f_of_query_enumerated(q)[0] == f_of_query_enumerated(q, False)[0]


def _corpus_hypergraphs(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        q, _ = random_query(rng, max_symbols=5, constants=False)
        out.append(query_hypergraph(q))
    return out


def test_duality_and_feasibility_on_corpus():
    for h in _corpus_hypergraphs(11, 80):
        primal, dual = rho_star(h), dual_max_independent(h)
        assert primal.cost == dual.cost
        inc = h.incidence()
        x = [primal.weights[s] for s, _ in h.edges]
        assert all(sum(a * w for a, w in zip(row, x)) >= 1 for row in inc)
        assert sum(x) == primal.cost


def test_rho_star_against_grid_search():
    for h in _corpus_hypergraphs(12, 30):
        if len(h.edges) > 5:
            continue
        grid = brute_force_cover(h)
        assert rho_star(h).cost <= grid
        # half-integral optimum exists for graphs; check when all edges have size <= 2
        if all(len(e) <= 2 for _, e in h.edges):
            assert rho_star(h).cost == brute_force_cover(h, grid=2)


def test_monotone_under_vertex_subsets():
    for h in _corpus_hypergraphs(13, 25):
        full = rho_star(h).cost
        edges = h.edge_map()
        for k in range(len(h.vertices)):
            for sub in combinations(h.vertices, k):
                assert rho_star(CoverHypergraph.build(sub, edges)).cost <= full


@pytest.mark.parametrize("seed", range(20))
def test_f_of_query_matches_full_enumeration(seed):
    rng = random.Random(900 + seed)
    while True:
        q, _ = random_query(rng, max_symbols=4, constants=False)
        if len(q.classes) <= 6:
            break
    f, tree = f_of_query(q)
    assert f == f_of_query_enumerated(q, pruned=False)[0]
    assert f_of_tree(q, tree) == f


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(0, 1), min_size=3, max_size=3), min_size=1, max_size=4))
def test_strong_duality_random_incidence(rows):
    vertices = [frozenset([f"V.{i}"]) for i in range(3)]
    edges = {f"E{k}": {v for v, bit in zip(vertices, row) if bit} for k, row in enumerate(rows)}
    covered = set().union(*edges.values())
    h = CoverHypergraph.build(sorted(covered, key=min), edges)
    assert rho_star(h).cost == dual_max_independent(h).cost
