import random
from itertools import combinations

import pytest

from factordb import ftree as ft
from factordb import samples
from factordb.cover import f_of_tree
from factordb.errors import FormatError, InvalidTree
from factordb.query import make_query, split_constants

from corpus import random_query


def cls(q, attr):
    return q.classes.of[attr]


def test_node_sets_left_and_right_trees():
    q = samples.rstu_query()
    left, right = samples.rstu_left_tree(q), samples.rstu_right_tree(q)
    assert ft.node_sets(left, q, "U")[2] == {cls(q, "R.A")}
    assert ft.node_sets(right, q, "R")[2] == {cls(q, "T.E")}
    assert ft.node_sets(right, q, "S")[2] == {cls(q, "T.E")}
    path, rel, non = ft.node_sets(left, q, "S")
    assert rel <= path and non == path - rel


def test_node_sets_unknown_symbol():
    q = samples.rstu_query()
    with pytest.raises(InvalidTree):
        ft.node_sets(samples.rstu_left_tree(q), q, "Z")


def test_hierarchical_tree_has_no_nonrelevant_nodes():
    q = samples.abc_query()
    good, _, _ = samples.abc_trees(q)
    assert all(not v for v in ft.nonrelevant_sets(good, q).values())


def test_validity_of_example_trees():
    q = samples.abc_query()
    good, b_top, broken = samples.abc_trees(q)
    assert ft.is_valid(good, q) and ft.is_valid(b_top, q)
    assert not ft.is_valid(broken, q)
    r = samples.rstu_query()
    assert ft.is_valid(samples.rstu_left_tree(r), r)
    assert ft.is_valid(samples.rstu_right_tree(r), r)


def test_validity_single_class():
    q = make_query({"R": ["A"]})
    assert ft.is_valid((ft.node(q.classes.classes[0], ft.leaf("R")),), q)


def test_full_tree_needs_ancestor_classes():
    q = samples.rstu_query()
    tree = ft.tree_from_names(q, [("R.A", ["R", ("R.B", [("R.C", []), ("S.D", ["S"])]),
                                           ("T.E", ["T", ("U.F", ["U"])])])])
    assert not ft.is_valid(tree, q)


def test_iter_example_contains_both_valid_trees_never_the_broken_one():
    q = samples.abc_query()
    keys = [ft.tree_key(t) for t in ft.iter_ftrees(q)]
    assert len(keys) == len(set(keys))
    good, b_top, broken = samples.abc_trees(q)
    assert ft.tree_key(good) in keys and ft.tree_key(b_top) in keys
    assert ft.tree_key(broken) not in keys


def test_iter_one_class():
    q = make_query({"R": ["A"]})
    assert len(list(ft.iter_ftrees(q))) == 1


def test_iter_two_independent_classes():
    q = make_query({"R": ["A"], "S": ["B"]})
    keys = sorted(ft.tree_key(t) for t in ft.iter_ftrees(q))
    assert keys == ["[{R.A} | {S.B}]", "[{R.A}({S.B})]", "[{S.B}({R.A})]"]


def _count_forests_by_brute_force(q):
    """Count valid reduced forests by generating every labelled forest."""
    classes = list(q.classes.classes)
    n = len(classes)
    count = 0
    # parent[i] in {-1 (root), 0..n-1}; keep acyclic assignments
    def rec(i, parent):
        nonlocal count
        if i == n:
            if _acyclic(parent):
                forest = _build(classes, parent)
                if ft.is_valid(forest, q):
                    count += 1
            return
        for p in [-1] + [j for j in range(n) if j != i]:
            parent.append(p)
            rec(i + 1, parent)
            parent.pop()
    rec(0, [])
    return count


def _acyclic(parent):
    for i in range(len(parent)):
        seen, j = set(), i
        while j != -1:
            if j in seen:
                return False
            seen.add(j)
            j = parent[j]
    return True


def _build(classes, parent):
    def node(i):
        return ft.Node(classes[i], tuple(node(j) for j in range(len(parent)) if parent[j] == i))
    return tuple(node(i) for i in range(len(parent)) if parent[i] == -1)


@pytest.mark.parametrize("seed", range(12))
def test_iter_yields_every_valid_forest_once(seed):
    rng = random.Random(seed)
    while True:
        q, _ = random_query(rng, max_symbols=3, constants=False, max_cols=2)
        if 1 <= len(q.classes) <= 4:
            break
    keys = [ft.tree_key(t) for t in ft.iter_ftrees(q)]
    assert len(keys) == len(set(keys))
    assert len(keys) == _count_forests_by_brute_force(q)
    assert all(ft.is_valid(t, q) for t in ft.iter_ftrees(q))


def test_iter_pruned_hierarchical_example():
    q = samples.abc_query()
    out = list(ft.iter_pruned(q))
    good, b_top, _ = samples.abc_trees(q)
    assert [ft.tree_key(t) for t in out] == [ft.tree_key(good)]


def test_iter_pruned_single_symbol_chain():
    q = make_query({"R": ["A", "B", "C"]})
    out = list(ft.iter_pruned(q))
    assert [ft.tree_key(t) for t in out] == ["[{R.C}({R.B}({R.A}))]"]


@pytest.mark.parametrize("seed", range(30))
def test_pruned_is_subset_with_same_optimum(seed):
    rng = random.Random(100 + seed)
    while True:
        q, _ = random_query(rng, max_symbols=4, constants=False)
        if len(q.classes) <= 6:
            break
    every = {ft.tree_key(t): t for t in ft.iter_ftrees(q)}
    pruned = [ft.tree_key(t) for t in ft.iter_pruned(q)]
    assert set(pruned) <= set(every)
    assert len(pruned) == len(set(pruned))
    best_all = min(f_of_tree(q, t) for t in every.values())
    best_pruned = min(f_of_tree(q, every[k]) for k in pruned)
    assert best_all == best_pruned


@pytest.mark.parametrize("seed", range(10))
def test_path_monotonicity(seed):
    rng = random.Random(300 + seed)
    while True:
        q, _ = random_query(rng, max_symbols=3, constants=False)
        if 2 <= len(q.classes) <= 5:
            break
    trees = [ft.attach_leaves(t, q) for t in ft.iter_ftrees(q)]
    paths = [{s: ft.node_sets(t, q, s)[0] for s in q.symbol_names} for t in trees]
    costs = [f_of_tree(q, t) for t in trees]
    for i, j in combinations(range(len(trees)), 2):
        if all(paths[i][s] <= paths[j][s] for s in q.symbol_names):
            assert costs[i] <= costs[j]
        if all(paths[j][s] <= paths[i][s] for s in q.symbol_names):
            assert costs[j] <= costs[i]


def test_swap_keeps_validity_and_cost():
    rng = random.Random(500)
    checked = 0
    for _ in range(15):
        q, _ = random_query(rng, max_symbols=4, constants=False)
        rel = q.classes.rel
        for rt in list(ft.iter_ftrees(q))[:60]:
            anc = ft.ancestors_map(rt)
            for a in q.classes.classes:
                for b in anc[a]:
                    if rel[b] < rel[a]:
                        swapped = ft.swap(rt, a, b)
                        assert ft.is_valid(swapped, q)
                        assert f_of_tree(q, swapped) <= f_of_tree(q, rt)
                        checked += 1
    assert checked > 20


def test_enumeration_gaps_stay_small():
    q = samples.rstu_query()
    stats = ft.EnumStats()
    trees = list(ft.iter_ftrees(q, stats))
    assert len(trees) == stats.yields
    # calls between consecutive yields stay within a multiple of the class count
    assert max(stats.gaps) <= 4 * len(q.classes) + 4


def test_attach_leaves_left_tree():
    q = samples.rstu_query()
    left = samples.rstu_left_tree(q)
    assert ft.tree_key(ft.attach_leaves(ft.reduce(left), q)) == ft.tree_key(left)


def test_attach_leaves_chain12_tree():
    q = samples.chain_query(12)
    full = ft.attach_leaves(samples.chain12_tree(q), q)
    assert ft.is_valid(full, q)
    for n, _ in ft.walk(full):
        if n.is_leaf:
            continue
        has_inner_child = any(not c.is_leaf for c in n.children)
        for c in n.children:
            if c.is_leaf:
                assert (c.label == "R10") == has_inner_child


def test_attach_leaves_symbol_without_classes():
    q = make_query({"R": ["A"], "S": ["B"]}, constants=[("S.B", 1)])
    q2, _ = split_constants(q)
    full = ft.attach_leaves(ft.iter_pruned(q2).__next__(), q2)
    assert ft.leaf("S") in full


def test_json_roundtrip_and_errors():
    q = samples.rstu_query()
    left = samples.rstu_left_tree(q)
    assert ft.tree_key(ft.from_json(ft.to_json(left))) == ft.tree_key(left)
    with pytest.raises(FormatError):
        ft.from_json('[{"children": []}]')
    with pytest.raises(FormatError):
        ft.from_json("{not json")
