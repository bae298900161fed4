"""Factorisation trees.

An f-tree is a forest whose inner nodes are attribute classes of a query and
whose leaves are the query's symbols.  A *reduced* f-tree has the leaves
removed; it is valid when, for every symbol, the nodes holding its attributes
lie on a single root-to-node path.

Forests are tuples of :class:`Node`.  An inner node's label is the class (a
frozenset of qualified attribute names); a leaf's label is the symbol name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import FormatError, InvalidTree
from .query import Query, class_name


@dataclass(frozen=True)
class Node:
    label: object  # frozenset for an attribute class, str for a symbol leaf
    children: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return isinstance(self.label, str)

    @property
    def name(self) -> str:
        return self.label if self.is_leaf else class_name(self.label)

    def __repr__(self):
        return tree_key(self)


def node(cls, *children) -> Node:
    return Node(frozenset(cls), tuple(children))


def leaf(symbol: str) -> Node:
    return Node(symbol, ())


@dataclass
class EnumStats:
    """Counts recursive calls of the enumerators and calls between yields."""

    calls: int = 0
    yields: int = 0
    gaps: list = field(default_factory=list)
    _last: int = 0

    def call(self):
        self.calls += 1

    def emit(self):
        self.yields += 1
        self.gaps.append(self.calls - self._last)
        self._last = self.calls


# ---------------------------------------------------------------------------
# traversal

def walk(forest):
    """Yield ``(node, ancestors)`` in pre-order; ancestors are root-first."""
    stack = [(n, ()) for n in reversed(tuple(forest))]
    while stack:
        n, anc = stack.pop()
        yield n, anc
        for c in reversed(n.children):
            stack.append((c, anc + (n,)))


def inner_labels(forest) -> list:
    return [n.label for n, _ in walk(forest) if not n.is_leaf]


def leaf_labels(forest) -> list:
    return [n.label for n, _ in walk(forest) if n.is_leaf]


def ancestors_map(forest) -> dict:
    """label -> tuple of ancestor labels (root first)."""
    return {n.label: tuple(a.label for a in anc) for n, anc in walk(forest)}


def depth_map(forest) -> dict:
    return {n.label: len(anc) for n, anc in walk(forest)}


def tree_key(t) -> str:
    """Canonical text of a node or forest: children sorted recursively."""
    if isinstance(t, Node):
        if t.is_leaf:
            return t.label
        head = "{" + ",".join(sorted(t.label)) + "}"
        if not t.children:
            return head
        return head + "(" + " ".join(sorted(tree_key(c) for c in t.children)) + ")"
    return "[" + " | ".join(sorted(tree_key(n) for n in t)) + "]"


def canonical(t):
    """Same forest with children sorted by canonical key."""
    if isinstance(t, Node):
        kids = tuple(sorted((canonical(c) for c in t.children), key=tree_key))
        return Node(t.label, kids)
    return tuple(sorted((canonical(n) for n in t), key=tree_key))


def as_forest(t) -> tuple:
    return (t,) if isinstance(t, Node) else tuple(t)


def is_reduced(forest) -> bool:
    return not leaf_labels(as_forest(forest))


def reduce(forest) -> tuple:
    """Drop all symbol leaves."""

    def strip(n):
        return Node(n.label, tuple(strip(c) for c in n.children if not c.is_leaf))

    return tuple(strip(n) for n in as_forest(forest) if not n.is_leaf)


# ---------------------------------------------------------------------------
# validity and node sets

def _relevant_path_ok(rel_nodes, anc) -> bool:
    """True iff the given nodes lie on one root path."""
    if not rel_nodes:
        return True
    deepest = max(rel_nodes, key=lambda c: len(anc[c]))
    return all(c == deepest or c in anc[deepest] for c in rel_nodes)


def is_valid(t, q: Query) -> bool:
    try:
        check_valid(t, q)
    except InvalidTree:
        return False
    return True


def check_valid(t, q: Query) -> None:
    """Raise InvalidTree unless ``t`` is an f-tree (or reduced f-tree) of ``q``."""
    forest = as_forest(t)
    cl = q.classes
    inner = inner_labels(forest)
    if len(set(inner)) != len(inner):
        raise InvalidTree("an attribute class labels two nodes")
    if set(inner) != set(cl.classes):
        raise InvalidTree("inner nodes do not match the query's attribute classes")
    leaves = leaf_labels(forest)
    anc = ancestors_map(forest)
    for n, _ in walk(forest):
        if n.is_leaf and n.children:
            raise InvalidTree(f"symbol leaf {n.label} has children")
    if leaves:
        if len(set(leaves)) != len(leaves) or set(leaves) != set(q.symbol_names):
            raise InvalidTree("leaves do not match the query's symbols")
        for s in q.symbol_names:
            missing = [c for c in cl.of_symbol(s) if c not in anc[s]]
            if missing:
                raise InvalidTree(
                    f"class {class_name(missing[0])} is not an ancestor of leaf {s}"
                )
    else:
        for s in q.symbol_names:
            if not _relevant_path_ok(cl.of_symbol(s), anc):
                raise InvalidTree(f"nodes relevant to {s} lie in sibling subtrees")


def node_sets(t, q: Query, symbol: str):
    """Return ``(path, relevant, nonrelevant)`` for ``symbol`` as frozensets of
    classes.  Reduced trees get their leaves attached first."""
    if symbol not in q.symbol_map:
        raise InvalidTree(f"unknown symbol {symbol!r}")
    forest = as_forest(t)
    if is_reduced(forest):
        forest = attach_leaves(forest, q)
    anc = ancestors_map(forest)
    if symbol not in anc:
        raise InvalidTree(f"symbol {symbol!r} is not a leaf of the tree")
    path = frozenset(anc[symbol])
    rel = frozenset(c for c in path if symbol in q.classes.rel[c])
    return path, rel, path - rel


def nonrelevant_sets(t, q: Query) -> dict:
    return {s: node_sets(t, q, s)[2] for s in q.symbol_names}


# ---------------------------------------------------------------------------
# leaves

def attach_leaves(rt, q: Query) -> tuple:
    """Hang each symbol under its deepest relevant node; symbols without
    classes become root-level leaves."""
    forest = as_forest(rt)
    if not is_reduced(forest):
        forest = reduce(forest)
    cl = q.classes
    anc = ancestors_map(forest)
    under = {}
    roots = []
    for s in q.symbol_names:
        rel = cl.of_symbol(s)
        if not rel:
            roots.append(leaf(s))
            continue
        if not all(c in anc for c in rel):
            raise InvalidTree(f"tree lacks classes of symbol {s}")
        if not _relevant_path_ok(rel, anc):
            raise InvalidTree(f"nodes relevant to {s} lie in sibling subtrees")
        deepest = max(rel, key=lambda c: len(anc[c]))
        under.setdefault(deepest, []).append(leaf(s))

    def build(n):
        kids = tuple(build(c) for c in n.children) + tuple(under.get(n.label, ()))
        return Node(n.label, kids)

    return tuple(build(n) for n in forest) + tuple(roots)


def swap(rt, a, b) -> tuple:
    """Exchange the positions of classes ``a`` and ``b`` in a reduced forest."""
    a, b = frozenset(a), frozenset(b)

    def build(n):
        lab = b if n.label == a else a if n.label == b else n.label
        return Node(lab, tuple(build(c) for c in n.children))

    return tuple(build(n) for n in as_forest(rt))


# ---------------------------------------------------------------------------
# enumeration

def _components(S, q: Query) -> list:
    """Connected components of classes ``S`` under "share a symbol"; this is the
    finest good partition.  Components are sorted by least class name."""
    cl = q.classes
    S = list(S)
    parent = {c: c for c in S}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_sym = {}
    for c in S:
        for s in cl.rel[c]:
            by_sym.setdefault(s, []).append(c)
    for group in by_sym.values():
        r = find(group[0])
        for c in group[1:]:
            rc = find(c)
            if rc != r:
                parent[rc] = r
    comps = {}
    for c in S:
        comps.setdefault(find(c), []).append(c)
    out = [frozenset(g) for g in comps.values()]
    return sorted(out, key=lambda g: min(class_name(c) for c in g))


def _set_partitions(items):
    """All set partitions of a list (each block a list)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _lazy_product(factories):
    """Cartesian product over generator factories, concatenating forests."""
    if not factories:
        yield ()
        return
    head, rest = factories[0], factories[1:]
    for x in head():
        for y in _lazy_product(rest):
            yield x + y


def _sorted_classes(S):
    return sorted(S, key=class_name)


def iter_ftrees(q: Query, stats: EnumStats | None = None):
    """Yield every reduced f-tree of ``q`` exactly once."""
    stats = stats if stats is not None else EnumStats()

    def trees(S):
        # single trees over S: each class as root above any forest of the rest
        stats.call()
        for A in _sorted_classes(S):
            for f in forests(S - {A}):
                yield (Node(A, f),)

    def forests(S):
        stats.call()
        if not S:
            yield ()
            return
        yield from trees(S)
        comps = _components(S, q)
        for part in _set_partitions(comps):
            if len(part) < 2:
                continue
            blocks = [frozenset().union(*b) for b in part]
            yield from _lazy_product([lambda B=B: trees(B) for B in blocks])

    for f in forests(frozenset(q.classes.classes)):
        stats.emit()
        yield f


def greater(q: Query, a, b) -> bool:
    """The pruning order: a > b iff r(a) strictly contains r(b), or the symbol
    sets agree and a has the lexicographically larger name."""
    ra, rb = q.classes.rel[a], q.classes.rel[b]
    return ra > rb or (ra == rb and class_name(a) > class_name(b))


def maximal_classes(q: Query, S) -> list:
    S = _sorted_classes(S)
    return [a for a in S if not any(greater(q, b, a) for b in S if b != a)]


def iter_pruned(q: Query, stats: EnumStats | None = None):
    """Yield the reduced f-trees considered by the pruned search.

    Disconnected class sets are always split into their components, and only
    maximal classes are tried as roots.  The output contains a tree with
    optimal cost, and exactly one tree for hierarchical queries.
    """
    stats = stats if stats is not None else EnumStats()

    def pruned(S):
        stats.call()
        if not S:
            yield ()
            return
        comps = _components(S, q)
        if len(comps) == 1:
            for A in maximal_classes(q, S):
                for f in pruned(S - {A}):
                    yield (Node(A, f),)
        else:
            yield from _lazy_product([lambda C=C: pruned(C) for C in comps])

    for f in pruned(frozenset(q.classes.classes)):
        stats.emit()
        yield f


# ---------------------------------------------------------------------------
# JSON

def to_obj(t):
    if isinstance(t, Node):
        if t.is_leaf:
            return {"leaf": t.label}
        return {"class": sorted(t.label), "children": [to_obj(c) for c in t.children]}
    return [to_obj(n) for n in t]


def to_json(t, **kw) -> str:
    return json.dumps(to_obj(as_forest(t)), **kw)


def from_obj(obj) -> tuple:
    def build(o):
        if not isinstance(o, dict):
            raise FormatError("tree node must be a JSON object")
        if "leaf" in o:
            if not isinstance(o["leaf"], str):
                raise FormatError("leaf label must be a string")
            return leaf(o["leaf"])
        if "class" not in o:
            raise FormatError("tree node needs a 'class' or 'leaf' key")
        attrs = o["class"]
        if not isinstance(attrs, list) or not attrs or not all(isinstance(a, str) for a in attrs):
            raise FormatError("'class' must be a non-empty list of attribute names")
        kids = o.get("children", [])
        if not isinstance(kids, list):
            raise FormatError("'children' must be a list")
        return Node(frozenset(attrs), tuple(build(k) for k in kids))

    if isinstance(obj, dict):
        obj = [obj]
    if not isinstance(obj, list):
        raise FormatError("tree JSON must be a node or a list of nodes")
    return tuple(build(o) for o in obj)


def from_json(text: str) -> tuple:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"tree JSON: {exc}") from None
    return from_obj(obj)


def tree_from_names(q: Query, spec) -> tuple:
    """Build a forest from nested ``(attr, [children])`` pairs, where ``attr`` is
    any attribute of the class and a bare string child names a symbol leaf.

    >>> # tree_from_names(q, [("R.A", [("R.B", ["R"])])])
    """
    cl = q.classes

    def build(item):
        if isinstance(item, str):
            if item in q.symbol_map:
                return leaf(item)
            return Node(cl.of[item], ())
        attr, kids = item
        return Node(cl.of[attr], tuple(build(k) for k in kids))

    return tuple(build(x) for x in spec)
