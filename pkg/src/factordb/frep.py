"""Factorised representations: nested sums and products of identified tuples.

An f-representation is built from three node kinds:

* ``Leaf(ident, values, schema, symbol)``: an identifier with its tuple.
  ``values``/``schema`` are None for polynomial leaves.
* ``Sum(children)``: union; the empty sum encodes the empty relation.
* ``Prod(children)``: product over disjoint signatures; the empty product is
  the multiplicative unit.

Use :func:`make_sum` and :func:`make_prod` to build normalized trees.  They
flatten nested sums/products, drop empty summands, collapse a product with
an empty factor to the empty sum and unwrap single children.

Text format (``to_text``/``parse_text``)::

    frep  := sum
    sum   := prod ("+" prod)* | "0"
    prod  := atom ("*" atom)* | "1"
    atom  := ident "<" values ">" | ident | "(" sum ")"

A bare ``ident`` is a polynomial leaf without a tuple.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .errors import FormatError, SizeExceeded
from .reldata import parse_cell, value_key

DEFAULT_MONOMIAL_LIMIT = 10 ** 6


class FRep:
    __slots__ = ()


@dataclass(frozen=True)
class Leaf(FRep):
    ident: str
    values: tuple | None = None
    schema: tuple | None = None
    symbol: str | None = None

    def stripped(self) -> "Leaf":
        return Leaf(self.ident, None, None, self.symbol)


@dataclass(frozen=True)
class Sum(FRep):
    children: tuple = ()


@dataclass(frozen=True)
class Prod(FRep):
    children: tuple = ()


EMPTY = Sum(())
UNIT = Prod(())


def is_empty(phi: FRep) -> bool:
    return isinstance(phi, Sum) and not phi.children


def make_sum(children) -> FRep:
    out = []
    for c in children:
        if isinstance(c, Sum):
            out.extend(c.children)
        else:
            out.append(c)
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def make_prod(children) -> FRep:
    out = []
    for c in children:
        if isinstance(c, Prod):
            out.extend(c.children)
        elif is_empty(c):
            return EMPTY
        else:
            out.append(c)
    if len(out) == 1:
        return out[0]
    return Prod(tuple(out))


def leaf(ident, values=None, schema=None, symbol=None) -> Leaf:
    return Leaf(ident, None if values is None else tuple(values),
                None if schema is None else tuple(schema), symbol)


# ---------------------------------------------------------------------------
# traversal helpers

def iter_nodes(phi: FRep) -> Iterator[FRep]:
    """Pre-order traversal without recursion."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        if not isinstance(node, Leaf):
            stack.extend(reversed(node.children))


def leaves(phi: FRep) -> Iterator[Leaf]:
    return (n for n in iter_nodes(phi) if isinstance(n, Leaf))


def node_count(phi: FRep) -> int:
    return sum(1 for _ in iter_nodes(phi))


def size(phi: FRep) -> int:
    """Number of identifier occurrences."""
    return sum(1 for _ in leaves(phi))


def occurrences(phi: FRep) -> Counter:
    return Counter(lf.ident for lf in leaves(phi))


def read_k(phi: FRep) -> int:
    """Maximum number of occurrences of any identifier (0 when empty)."""
    occ = occurrences(phi)
    return max(occ.values()) if occ else 0


def polynomial(phi: FRep) -> FRep:
    """The same expression with tuples removed from every leaf."""
    if isinstance(phi, Leaf):
        return phi.stripped()
    return type(phi)(tuple(polynomial(c) for c in phi.children))


def has_tuples(phi: FRep) -> bool:
    return any(lf.values is not None for lf in leaves(phi))


def symbols_of(phi: FRep) -> frozenset:
    return frozenset(lf.symbol for lf in leaves(phi))


def signatures(phi: FRep) -> dict:
    """Per symbol: ``(identifier set, schema)`` as seen in the leaves."""
    out = {}
    for lf in leaves(phi):
        ids, schema = out.get(lf.symbol, (set(), lf.schema))
        ids.add(lf.ident)
        out[lf.symbol] = (ids, schema)
    return {s: (frozenset(i), sch) for s, (i, sch) in out.items()}


def check_well_formed(phi: FRep) -> None:
    """Raise FormatError if products mix signatures or tuples misfit schemas."""

    def visit(node):
        if isinstance(node, Leaf):
            if node.values is not None and node.schema is not None \
                    and len(node.values) != len(node.schema):
                raise FormatError(f"leaf {node.ident} does not fit its schema")
            return frozenset([node.symbol])
        parts = [visit(c) for c in node.children]
        if isinstance(node, Prod):
            seen = set()
            for p in parts:
                if seen & p:
                    raise FormatError("product factors share a signature")
                seen |= p
            return frozenset(seen)
        nonempty = [p for p, c in zip(parts, node.children) if not is_empty(c)]
        if nonempty and any(p != nonempty[0] for p in nonempty):
            raise FormatError("summands range over different signatures")
        return nonempty[0] if nonempty else frozenset()

    visit(phi)


# ---------------------------------------------------------------------------
# flat expansion

class Monomial(NamedTuple):
    """A product of leaves: identifiers and the ``(attribute, value)`` pairs
    they carry, both in document order."""

    ids: tuple
    values: tuple = ()

    def key(self):
        return (tuple(sorted(self.ids)),
                tuple(sorted(self.values, key=lambda av: (av[0], value_key(av[1])))))

    def tuple_for(self, attrs) -> tuple:
        d = dict(self.values)
        return tuple(d[a] for a in attrs)


def count_monomials(phi: FRep) -> int:
    """Number of monomials in the expansion, computed without expanding."""
    if isinstance(phi, Leaf):
        return 1
    counts = [count_monomials(c) for c in phi.children]
    return sum(counts) if isinstance(phi, Sum) else math.prod(counts)


def _leaf_pairs(lf: Leaf) -> tuple:
    if lf.values is None:
        return ()
    # leaves parsed from text may lack a schema: key values by position
    schema = lf.schema or tuple(f"{lf.ident}.{k}" for k in range(len(lf.values)))
    return tuple(zip(schema, lf.values))


def _leaf_monomial(lf: Leaf) -> Monomial:
    return Monomial((lf.ident,), _leaf_pairs(lf))


def flatten(phi: FRep, limit: int = DEFAULT_MONOMIAL_LIMIT) -> list:
    """Expand ``phi`` into its list of monomials (a multiset)."""
    total = count_monomials(phi)
    if total > limit:
        raise SizeExceeded(f"expansion has {total} monomials, limit is {limit}")

    def expand(node):
        if isinstance(node, Leaf):
            return [_leaf_monomial(node)]
        parts = [expand(c) for c in node.children]
        if isinstance(node, Sum):
            return [m for p in parts for m in p]
        out = [Monomial((), ())]
        for p in parts:
            out = [Monomial(a.ids + b.ids, a.values + b.values) for a in out for b in p]
        return out

    return expand(phi)


def monomial_bag(phi: FRep, limit: int = DEFAULT_MONOMIAL_LIMIT, tuples: bool = True) -> Counter:
    bag = Counter()
    for m in flatten(phi, limit):
        k = m.key()
        bag[k if tuples else k[0]] += 1
    return bag


def equivalent(phi1: FRep, phi2: FRep, limit: int = DEFAULT_MONOMIAL_LIMIT) -> bool:
    """Equality of expansions as multisets of identifier multisets.

    Tuples are compared as well when both sides carry them.
    """
    tuples = has_tuples(phi1) and has_tuples(phi2)
    return monomial_bag(phi1, limit, tuples) == monomial_bag(phi2, limit, tuples)


# ---------------------------------------------------------------------------
# enumeration with pointers

class TupleCursor:
    """Enumerate the monomials of an f-representation one at a time.

    Every sum keeps a pointer to its current summand; a pointer choice defines
    one monomial.  Sums are ordered by pre-order position.  To move on, the
    last *enabled* sum (one reachable through current pointers) advances; a sum
    already at its last summand wraps to the first and the advance carries to
    the previous enabled sum.  Enumeration ends when the carry runs off the
    first enabled sum.

    ``steps`` counts elementary operations (node visits and pointer updates);
    ``delays`` records the steps spent before each yielded monomial.
    """

    def __init__(self, phi: FRep):
        self.phi = phi
        self._sum_index = {}
        for node in iter_nodes(phi):
            if isinstance(node, Sum) and id(node) not in self._sum_index:
                self._sum_index[id(node)] = len(self._sum_index)
        self._ptr = [0] * len(self._sum_index)
        self._done = False
        self.steps = 0
        self.delays = []

    def __iter__(self):
        return self

    def _current(self):
        """Follow the pointers; return (monomial or None, enabled sums)."""
        ids, vals, enabled = [], [], []
        blocked = False
        stack = [self.phi]
        while stack:
            node = stack.pop()
            self.steps += 1
            if isinstance(node, Leaf):
                ids.append(node.ident)
                vals.extend(_leaf_pairs(node))
            elif isinstance(node, Prod):
                stack.extend(reversed(node.children))
            else:
                k = self._sum_index[id(node)]
                enabled.append(k)
                if node.children:
                    stack.append(node.children[self._ptr[k]])
                else:
                    blocked = True
        mono = None if blocked else Monomial(tuple(ids), tuple(vals))
        return mono, enabled

    def _advance(self, enabled, sizes):
        for k in reversed(enabled):
            self.steps += 1
            if self._ptr[k] < sizes[k] - 1:
                self._ptr[k] += 1
                return True
            self._ptr[k] = 0
        return False

    def __next__(self) -> Monomial:
        if self._done:
            raise StopIteration
        if not hasattr(self, "_sizes"):
            self._sizes = [0] * len(self._sum_index)
            for node in iter_nodes(self.phi):
                if isinstance(node, Sum):
                    self._sizes[self._sum_index[id(node)]] = len(node.children)
            self._pending = None
        start = self.steps
        while True:
            if self._pending is not None:
                if not self._advance(self._pending, self._sizes):
                    self._done = True
                    raise StopIteration
            mono, enabled = self._current()
            self._pending = enabled
            if mono is not None:
                self.delays.append(self.steps - start)
                return mono

    @property
    def max_delay(self) -> int:
        return max(self.delays, default=0)


def enumerate_tuples(phi: FRep) -> TupleCursor:
    return TupleCursor(phi)


# ---------------------------------------------------------------------------
# text serialization

_PLAIN_VALUE = re.compile(r"[^\s,<>()\"\\+*][^,<>\"\\]*\Z")
_INT = re.compile(r"[+-]?[0-9]+\Z")


def _format_value(v) -> str:
    if isinstance(v, int):
        return str(v)
    if _PLAIN_VALUE.match(v) and not _INT.match(v) and v == v.strip():
        return v
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_text(phi: FRep, tuples: bool = True) -> str:
    def fmt(node, ctx):
        if isinstance(node, Leaf):
            if tuples and node.values is not None:
                return f"{node.ident}<{','.join(_format_value(v) for v in node.values)}>"
            return node.ident
        if isinstance(node, Sum):
            body = "+".join(fmt(c, "sum") for c in node.children) if node.children else "0"
            return f"({body})" if ctx in ("prod", "sum") else body
        body = "*".join(fmt(c, "prod") for c in node.children) if node.children else "1"
        return f"({body})" if ctx == "prod" else body

    return fmt(phi, "top")


def canonical_text(phi: FRep, tuples: bool = False) -> str:
    """Text of ``phi`` with all children sorted: equal iff equal up to
    commutativity of sums and products."""

    def canon(node):
        if isinstance(node, Leaf):
            return node if tuples else node.stripped()
        kids = sorted((canon(c) for c in node.children), key=lambda n: to_text(n, tuples))
        return type(node)(tuple(kids))

    return to_text(canon(phi), tuples)


_TEXT_TOKEN = re.compile(
    r'\s*(?:(?P<str>"(?:[^"\\]|\\.)*")|(?P<punct>[+*()<>,])|(?P<word>[^\s+*()<>,"]+))'
)


def _text_tokens(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TEXT_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormatError(f"bad f-rep text at position {pos}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


def parse_text(text: str, schemas: dict | None = None) -> FRep:
    """Parse the text format.  ``schemas`` optionally maps identifiers to
    ``(schema, symbol)`` so leaves regain their signatures."""
    toks = _text_tokens(text)
    i = 0

    def peek():
        return toks[i]

    def take(kind=None, value=None):
        nonlocal i
        tok = toks[i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise FormatError(f"unexpected {tok[1]!r} at position {tok[2]}")
        i += 1
        return tok

    def parse_sum():
        terms = [parse_prod()]
        while peek()[1] == "+" and peek()[0] == "punct":
            take()
            terms.append(parse_prod())
        if len(terms) == 1:
            return terms[0]
        return Sum(tuple(terms))

    def parse_prod():
        factors = [parse_atom()]
        while peek()[1] == "*" and peek()[0] == "punct":
            take()
            factors.append(parse_atom())
        if len(factors) == 1:
            return factors[0]
        return Prod(tuple(factors))

    def parse_atom():
        tok = peek()
        if tok[0] == "punct" and tok[1] == "(":
            take()
            inner = parse_sum()
            take("punct", ")")
            return inner
        if tok[0] != "word":
            raise FormatError(f"unexpected {tok[1]!r} at position {tok[2]}")
        take()
        ident = tok[1]
        if not (peek()[0] == "punct" and peek()[1] == "<"):
            if ident == "0":
                return EMPTY
            if ident == "1":
                return UNIT
            schema, symbol = (schemas or {}).get(ident, (None, None))
            return Leaf(ident, None, None, symbol)
        take()
        vals = []
        if not (peek()[0] == "punct" and peek()[1] == ">"):
            vals.append(parse_value())
            while peek()[1] == "," and peek()[0] == "punct":
                take()
                vals.append(parse_value())
        take("punct", ">")
        schema, symbol = (schemas or {}).get(ident, (None, None))
        return Leaf(ident, tuple(vals), schema, symbol)

    def parse_value():
        tok = take()
        if tok[0] == "str":
            return re.sub(r"\\(.)", r"\1", tok[1][1:-1])
        if tok[0] != "word":
            raise FormatError(f"unexpected {tok[1]!r} at position {tok[2]}")
        return parse_cell(tok[1])

    out = parse_sum()
    take("end")
    return out


def build_flat(monomials) -> FRep:
    """Sum of products of polynomial leaves, one product per id sequence."""
    return make_sum(make_prod(Leaf(i) for i in ids) for ids in monomials)
