"""Select-project-join queries.

A query is kept in *rewritten* form: every relation occurrence is a distinct
symbol (``R`` and ``R as R2`` for a self-join) and every attribute carries its
symbol as prefix (``R2.A``), so attribute names are unique across the query.
``QuerySymbol.base`` records the stored relation a symbol reads from.

Text syntax::

    Q = pi[R.A, S.B] sel[R.A = S.A, S.B = 3] (R x S)
    Q = pi[*] sel[] (R x R as R2)

Unqualified head names (``pi[ckey, name]``) resolve to the first symbol in
product order that has a column of that name.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Mapping, Sequence

from .errors import QuerySyntaxError, SchemaError, UnsatisfiableQuery
from .reldata import Database, Relation, Value


class UnknownAttribute(QuerySyntaxError):
    pass


@dataclass(frozen=True)
class QuerySymbol:
    name: str
    base: str
    attributes: tuple  # qualified names, "<symbol>.<column>"

    def column(self, attr: str) -> str:
        return attr.split(".", 1)[1]


def class_name(cls) -> str:
    """Canonical name of an attribute class: its least attribute."""
    return min(cls)


class AttrClasses:
    """Partition of a query's attributes into equivalence classes.

    ``classes`` is sorted by canonical name; ``of[attr]`` is the class of an
    attribute and ``rel[cls]`` the set of symbols owning an attribute in it.
    """

    def __init__(self, classes, owner):
        self.classes = tuple(sorted(classes, key=class_name))
        self.of = {a: c for c in self.classes for a in c}
        self.rel = {c: frozenset(owner[a] for a in c) for c in self.classes}
        by_symbol = {}
        for c in self.classes:
            for s in self.rel[c]:
                by_symbol.setdefault(s, set()).add(c)
        self._by_symbol = {s: frozenset(cs) for s, cs in by_symbol.items()}

    def of_symbol(self, symbol: str) -> frozenset:
        """The classes holding attributes of ``symbol``."""
        return self._by_symbol.get(symbol, frozenset())

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __repr__(self):
        parts = ", ".join("{" + ",".join(sorted(c)) + "}" for c in self.classes)
        return f"AttrClasses({parts})"


@dataclass(frozen=True)
class Query:
    symbols: tuple
    equalities: tuple = ()
    constant_eqs: tuple = ()
    head: tuple = ()
    name: str = "Q"

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        names = [s.name for s in syms]
        if len(set(names)) != len(names):
            raise QuerySyntaxError(f"duplicate symbol names in {names}")
        owner = {}
        for s in syms:
            for a in s.attributes:
                if a in owner:
                    raise QuerySyntaxError(f"attribute {a} occurs in two symbols")
                owner[a] = s.name
        eqs = set()
        for a, b in self.equalities:
            for x in (a, b):
                if x not in owner:
                    raise UnknownAttribute(f"unknown attribute {x} in condition")
            if a != b:
                eqs.add(tuple(sorted((a, b))))
        consts = []
        for a, v in self.constant_eqs:
            if a not in owner:
                raise UnknownAttribute(f"unknown attribute {a} in condition")
            if (a, v) not in consts:
                consts.append((a, v))
        for a in self.head:
            if a not in owner:
                raise UnknownAttribute(f"unknown attribute {a} in head")
        object.__setattr__(self, "equalities", tuple(sorted(eqs)))
        object.__setattr__(self, "constant_eqs", tuple(consts))
        object.__setattr__(self, "head", tuple(dict.fromkeys(self.head)))
        object.__setattr__(self, "_owner", owner)

    # -- lookups ---------------------------------------------------------
    @cached_property
    def symbol_map(self) -> dict:
        return {s.name: s for s in self.symbols}

    def symbol(self, name: str) -> QuerySymbol:
        try:
            return self.symbol_map[name]
        except KeyError:
            raise SchemaError(f"unknown symbol {name!r}") from None

    def owner(self, attr: str) -> str:
        return self._owner[attr]

    @property
    def symbol_names(self) -> tuple:
        return tuple(s.name for s in self.symbols)

    @property
    def attributes(self) -> tuple:
        return tuple(a for s in self.symbols for a in s.attributes)

    @property
    def mu(self) -> dict:
        return {s.name: s.base for s in self.symbols}

    @cached_property
    def classes(self) -> AttrClasses:
        return attribute_classes(self)

    def head_of(self, symbol: str) -> tuple:
        """Head attributes belonging to ``symbol``, in head order."""
        return tuple(a for a in self.head if self._owner[a] == symbol)

    @property
    def size(self) -> int:
        """|Q|: number of symbols plus number of attributes."""
        return len(self.symbols) + len(self._owner)

    def with_equalities(self, equalities, constant_eqs=()) -> "Query":
        return Query(self.symbols, tuple(equalities), tuple(constant_eqs), self.head, self.name)

    def to_text(self) -> str:
        head = ", ".join(self.head)
        conds = [f"{a} = {b}" for a, b in self.equalities]
        conds += [f"{a} = {_literal(v)}" for a, v in self.constant_eqs]
        prod = " x ".join(s.base if s.name == s.base else f"{s.base} as {s.name}"
                          for s in self.symbols)
        return f"{self.name} = pi[{head}] sel[{', '.join(conds)}] ({prod})"

    def __str__(self):
        return self.to_text()


def _literal(v: Value) -> str:
    if isinstance(v, int):
        return str(v)
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------------------
# construction helpers

def make_query(schema: Mapping[str, Sequence[str]], equalities=(), head=None,
               constants=(), aliases: Mapping[str, str] | None = None, name="Q") -> Query:
    """Build a query over symbols ``schema`` (symbol -> column names).

    ``aliases`` maps a symbol to its stored relation name when they differ.
    Equalities are ``"R.A=S.A"`` strings or pairs; ``head=None`` keeps all.
    """
    aliases = aliases or {}
    syms = tuple(
        QuerySymbol(sym, aliases.get(sym, sym), tuple(f"{sym}.{c}" for c in cols))
        for sym, cols in schema.items()
    )
    eqs = [tuple(e.replace(" ", "").split("=")) if isinstance(e, str) else tuple(e)
           for e in equalities]
    attrs = [a for s in syms for a in s.attributes]
    return Query(syms, tuple(eqs), tuple(constants), tuple(attrs if head is None else head), name)


# ---------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<int>[+-]?[0-9]+)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<str>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
      | (?P<punct>[=\[\](),.*])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        val = m.group(kind)
        if kind == "str":
            val = re.sub(r"\\(.)", r"\1", val[1:-1])
        elif kind == "int":
            val = int(val)
        out.append((kind, val, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] if tok[1] is not None else "end of input"
            raise QuerySyntaxError(f"expected {want!r}, found {got!r}", tok[2])
        return tok

    def at(self, kind, value=None):
        tok = self.peek()
        return tok[0] == kind and (value is None or tok[1] == value)

    def attr_ref(self):
        tok = self.expect("name")
        if self.at("punct", "."):
            self.next()
            col = self.expect("name")
            return (tok[1], col[1], tok[2])
        return (None, tok[1], tok[2])

    def parse(self):
        qname = self.expect("name")[1]
        self.expect("punct", "=")
        self.expect("name", "pi")
        self.expect("punct", "[")
        head = []
        if self.at("punct", "*"):
            self.next()
            head = None
        else:
            head.append(self.attr_ref())
            while self.at("punct", ","):
                self.next()
                head.append(self.attr_ref())
        self.expect("punct", "]")
        self.expect("name", "sel")
        self.expect("punct", "[")
        conds = []
        if not self.at("punct", "]"):
            conds.append(self.cond())
            while self.at("punct", ","):
                self.next()
                conds.append(self.cond())
        self.expect("punct", "]")
        self.expect("punct", "(")
        product = [self.symbol()]
        while self.at("name", "x"):
            self.next()
            product.append(self.symbol())
        self.expect("punct", ")")
        self.expect("end")
        return qname, head, conds, product

    def cond(self):
        lhs = self.attr_ref()
        if lhs[0] is None:
            raise QuerySyntaxError("condition attributes must be qualified", lhs[2])
        self.expect("punct", "=")
        tok = self.peek()
        if tok[0] in ("int", "str"):
            self.next()
            return (lhs, ("lit", tok[1]))
        rhs = self.attr_ref()
        if rhs[0] is None:
            raise QuerySyntaxError("condition attributes must be qualified", rhs[2])
        return (lhs, rhs)

    def symbol(self):
        base = self.expect("name")
        if base[1] == "x":
            raise QuerySyntaxError("'x' is reserved as the product operator", base[2])
        alias = base
        if self.at("name", "as"):
            self.next()
            alias = self.expect("name")
        return (base[1], alias[1], alias[2])


def parse_query(text: str, schema: Mapping[str, Sequence[str]] | None = None) -> Query:
    """Parse query text into a rewritten :class:`Query`.

    ``schema`` maps stored relation names to their column lists.  Without it,
    each symbol's attributes are the ones the query text mentions.
    """
    qname, head, conds, product = _Parser(text).parse()

    symbols = {}
    for base, alias, pos in product:
        if alias in symbols:
            raise QuerySyntaxError(f"symbol {alias!r} appears twice; use 'as' to alias it", pos)
        if schema is not None and base not in schema:
            raise SchemaError(f"relation {base!r} not found in database")
        symbols[alias] = base

    columns = {}
    if schema is not None:
        for alias, base in symbols.items():
            columns[alias] = list(schema[base])
    else:
        columns = {alias: [] for alias in symbols}
        refs = [r for r in (head or [])] + [x for c in conds for x in c if x[0] != "lit"]
        for sym, col, pos in refs:
            if sym is None:
                continue
            if sym not in symbols:
                raise UnknownAttribute(f"unknown symbol {sym!r}", pos)
            if col not in columns[sym]:
                columns[sym].append(col)

    def resolve(ref):
        sym, col, pos = ref
        if sym is None:
            for alias in symbols:
                if col in columns[alias]:
                    return f"{alias}.{col}"
            raise UnknownAttribute(f"unknown attribute {col!r}", pos)
        if sym not in symbols:
            raise UnknownAttribute(f"unknown symbol {sym!r}", pos)
        if col not in columns[sym]:
            raise UnknownAttribute(f"unknown attribute {sym}.{col}", pos)
        return f"{sym}.{col}"

    eqs, consts = [], []
    for lhs, rhs in conds:
        a = resolve(lhs)
        if rhs[0] == "lit":
            consts.append((a, rhs[1]))
        else:
            eqs.append((a, resolve(rhs)))
    syms = tuple(
        QuerySymbol(alias, base, tuple(f"{alias}.{c}" for c in columns[alias]))
        for alias, base in symbols.items()
    )
    if head is None:
        head_attrs = tuple(a for s in syms for a in s.attributes)
    else:
        head_attrs = tuple(resolve(r) for r in head)
    return Query(syms, tuple(eqs), tuple(consts), head_attrs, qname)


# ---------------------------------------------------------------------------
# attribute classes

class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in out.values()]


def _closure(q: Query) -> _UnionFind:
    uf = _UnionFind(q.attributes)
    for a, b in q.equalities:
        uf.union(a, b)
    return uf


def attribute_classes(q: Query) -> AttrClasses:
    """Close the equality pairs of ``q`` transitively.

    Classes that are equated to a constant are left out: such attributes are
    handled by filtering and take no part in the factorisation structure.
    """
    bound = {a for a, _ in q.constant_eqs}
    groups = [g for g in _closure(q).groups() if not (g & bound)]
    return AttrClasses(groups, {a: q.owner(a) for g in groups for a in g})


def is_hierarchical(q: Query) -> bool:
    """True iff every two classes have nested or disjoint symbol sets."""
    cl = q.classes
    for a, b in combinations(cl.classes, 2):
        ra, rb = cl.rel[a], cl.rel[b]
        if ra & rb and not (ra <= rb or rb <= ra):
            return False
    return True


def hierarchy_violation(q: Query):
    """Return classes ``(A, B)`` witnessing non-hierarchy, or None."""
    cl = q.classes
    for a, b in combinations(cl.classes, 2):
        ra, rb = cl.rel[a], cl.rel[b]
        if ra & rb and not (ra <= rb or rb <= ra):
            return a, b
    return None


def split_constants(q: Query):
    """Normalize the constant conditions of ``q`` into a per-attribute filter.

    Returns ``(q_prime, const_filter)`` where ``const_filter`` is a sorted tuple
    of ``(attribute, value)`` for every attribute equated, possibly
    transitively, to a constant.  ``q_prime`` is equivalent to ``q``: its
    constant conditions are exactly ``const_filter`` and it has no equality
    touching a constrained attribute.  Raises :class:`UnsatisfiableQuery` when an
    attribute is forced to two different constants.
    """
    if not q.constant_eqs:
        return q, ()
    uf = _closure(q)
    forced = {}
    for a, v in q.constant_eqs:
        root = uf.find(a)
        if root in forced and forced[root] != v:
            members = sorted(x for x in q.attributes if uf.find(x) == root)
            raise UnsatisfiableQuery(
                f"class {{{', '.join(members)}}} equated to both {forced[root]!r} and {v!r}"
            )
        forced[root] = v
    constrained = {a: forced[uf.find(a)] for a in q.attributes if uf.find(a) in forced}
    eqs = [(a, b) for a, b in q.equalities if a not in constrained]
    const_filter = tuple(sorted(constrained.items()))
    return q.with_equalities(eqs, const_filter), const_filter


def symbol_filters(q: Query, const_filter) -> dict:
    """Group a constant filter by symbol: ``{symbol: ((column, value), ...)}``."""
    out = {}
    for attr, v in const_filter:
        sym = q.owner(attr)
        out.setdefault(sym, []).append((q.symbol(sym).column(attr), v))
    return {s: tuple(cs) for s, cs in out.items()}


def apply_constant_filter(db: Database, q: Query, const_filter) -> Database:
    """Restrict each stored relation to rows matching its constant constraints.

    When two symbols read the same relation they must carry the same
    constraints, since a single stored instance cannot serve both filters; the
    factorisation pipeline filters per symbol instead (see ``gen``).
    """
    by_symbol = symbol_filters(q, const_filter)
    by_base = {}
    for s in q.symbols:
        conds = tuple(sorted(by_symbol.get(s.name, ()), key=lambda cv: cv[0]))
        if s.base in by_base and by_base[s.base] != conds:
            raise SchemaError(
                f"symbols reading {s.base} carry different constant filters"
            )
        by_base[s.base] = conds
    changed = []
    for base, conds in by_base.items():
        if not conds:
            continue
        rel = db[base]
        idx = [(rel.column(c), v) for c, v in conds]
        rows = tuple(r for r in rel.rows if all(r[1][i] == v for i, v in idx))
        changed.append(Relation(rel.name, rel.schema, rows))
    return db.replace(*changed) if changed else db


def multiplicity(q: Query) -> int:
    """M: the largest number of symbols reading the same stored relation."""
    if not q.symbols:
        return 0
    return max(Counter(s.base for s in q.symbols).values())


def check_schema(q: Query, db: Database) -> None:
    """Raise SchemaError unless every symbol's columns exist in its relation."""
    for s in q.symbols:
        if s.base not in db:
            raise SchemaError(f"relation {s.base!r} (symbol {s.name}) missing from database")
        rel = db[s.base]
        for a in s.attributes:
            if s.column(a) not in rel.schema:
                raise SchemaError(f"column {s.column(a)!r} missing from relation {s.base}")

