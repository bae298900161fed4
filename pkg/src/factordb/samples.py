"""Small example databases and queries used in docs, tests and the CLI."""

from __future__ import annotations

from . import ftree as ft
from .query import Query, make_query, parse_query
from .reldata import Database, Relation


def _rel(name, schema, rows):
    return Relation(name, tuple(schema), tuple((i, tuple(v)) for i, v in rows))


def orders_db() -> Database:
    """Customers, orders and items with discounts."""
    cust = _rel("Cust", ["ckey", "name"], [
        ("c1", (1, "Joe")), ("c2", (2, "Dan")), ("c3", (3, "Li")), ("c4", (4, "Mo")),
    ])
    ord_ = _rel("Ord", ["ckey", "okey", "date"], [
        ("o1", (1, 1, 1995)), ("o2", (1, 2, 1996)), ("o3", (2, 3, 1994)),
        ("o4", (2, 4, 1993)), ("o5", (3, 5, 1995)), ("o6", (3, 6, 1996)),
    ])
    item = _rel("Item", ["okey", "disc"], [
        ("i1", (1, "0.1")), ("i2", (1, "0.2")), ("i3", (3, "0.4")),
        ("i4", (3, "0.1")), ("i5", (4, "0.4")), ("i6", (5, "0.1")),
    ])
    return Database.of(cust, ord_, item)


ORDERS_QUERY = ("Q = pi[ckey, name, okey, date, disc] "
                "sel[Cust.ckey = Ord.ckey, Ord.okey = Item.okey] (Cust x Ord x Item)")


def orders_query() -> Query:
    return parse_query(ORDERS_QUERY, orders_db().schemas())


def rstu_db() -> Database:
    r = _rel("R", ["A", "B", "C"], [
        ("r111", (1, 1, 1)), ("r122", (1, 2, 2)), ("r212", (2, 1, 2)), ("r221", (2, 2, 1)),
    ])
    s = _rel("S", ["A", "B", "D"], [
        ("s111", (1, 1, 1)), ("s112", (1, 1, 2)), ("s121", (1, 2, 1)), ("s211", (2, 1, 1)),
    ])
    t = _rel("T", ["A", "E"], [("t12", (1, 2)), ("t21", (2, 1)), ("t22", (2, 2))])
    u = _rel("U", ["E", "F"], [("u11", (1, 1)), ("u21", (2, 1)), ("u22", (2, 2))])
    return Database.of(r, s, t, u)


RSTU_QUERY = "Q = pi[*] sel[R.A = S.A, R.A = T.A, R.B = S.B, T.E = U.E] (R x S x T x U)"


def rstu_query() -> Query:
    return parse_query(RSTU_QUERY, rstu_db().schemas())


def rstu_left_tree(q: Query):
    """A at the root; B below it with C and D; E beside B with F below."""
    return ft.tree_from_names(q, [
        ("R.A", [("R.B", [("R.C", ["R"]), ("S.D", ["S"])]),
                 ("T.E", ["T", ("U.F", ["U"])])]),
    ])


def rstu_right_tree(q: Query):
    """E at the root; A and F below it."""
    return ft.tree_from_names(q, [
        ("T.E", [("R.A", [("R.B", [("R.C", ["R"]), ("S.D", ["S"])]), "T"]),
                 ("U.F", ["U"])]),
    ])


# P, P1 and P2: the flat result and its two factorisations, as polynomials
RSTU_FLAT = (
    "r111*s111*t12*u21 + r111*s111*t12*u22 + r111*s112*t12*u21 + r111*s112*t12*u22"
    " + r122*s121*t12*u21 + r122*s121*t12*u22 + r212*s211*t21*u11"
    " + r212*s211*t22*u21 + r212*s211*t22*u22"
)
RSTU_LEFT = ("(r111*(s111+s112)+r122*s121)*t12*(u21+u22)"
             " + r212*s211*(t21*u11 + t22*(u21+u22))")
RSTU_RIGHT = ("r212*s211*t21*u11"
              " + ((r111*(s111+s112)+r122*s121)*t12 + r212*s211*t22)*(u21+u22)")


def triangle_query() -> Query:
    """R(A,E), S(A,B,C), T(A,B,D), U(C,D,E) joined on every shared name."""
    schema = {"R": ["A", "E"], "S": ["A", "B", "C"], "T": ["A", "B", "D"], "U": ["C", "D", "E"]}
    eqs = ["R.A=S.A", "R.A=T.A", "S.B=T.B", "S.C=U.C", "T.D=U.D", "R.E=U.E"]
    return make_query(schema, eqs)


def triangle_trees(q: Query):
    """Two f-trees: one chain through B, C, D, E and one with C and D on top."""
    t1 = ft.tree_from_names(q, [
        ("R.A", [("S.B", [("S.C", ["S", ("T.D", ["T", ("R.E", ["R", "U"])])])])]),
    ])
    t2 = ft.tree_from_names(q, [
        ("R.A", [("S.C", [("T.D", [("S.B", ["S", "T"]), ("R.E", ["R", "U"])])])]),
    ])
    return t1, t2


def chain_query(n: int) -> Query:
    """R1(A,B) x ... x R{n-1}(A,B) with Ri.B = R{i+1}.A."""
    schema = {f"R{i}": ["A", "B"] for i in range(1, n)}
    eqs = [f"R{i}.B=R{i + 1}.A" for i in range(1, n - 1)]
    return make_query(schema, eqs, name=f"Q{n}")


def rst_query(hierarchical: bool = False) -> Query:
    """R(A) x S(A,B) x T(B,C) joined on A and B, plus T.C = R.A if asked."""
    eqs = ["R.A=S.A", "S.B=T.B"] + (["R.A=T.C"] if hierarchical else [])
    return make_query({"R": ["A"], "S": ["A", "B"], "T": ["B", "C"]}, eqs)


def abc_query() -> Query:
    """R(A,B,C), S(A,B,D), T(A,E) joined on A (all three) and B (R, S)."""
    schema = {"R": ["A", "B", "C"], "S": ["A", "B", "D"], "T": ["A", "E"]}
    return make_query(schema, ["R.A=S.A", "R.A=T.A", "R.B=S.B"])


def abc_trees(q: Query):
    """The pruned tree, the tree with B on top, and a reduced tree where D sits
    beside A although S owns both (so no f-tree extends it)."""
    good = ft.tree_from_names(q, [("R.A", [("R.B", ["R.C", "S.D"]), "T.E"])])
    b_top = ft.tree_from_names(q, [("R.B", [("R.A", ["R.C", "S.D", "T.E"])])])
    broken = ft.tree_from_names(q, [("R.B", [("R.A", ["R.C", "T.E"]), "S.D"])])
    return good, b_top, broken


def chain12_tree(q: Query):
    """A reduced f-tree of ``chain_query(12)`` with cost 2."""
    def b(i):
        return f"R{i}.B"
    return ft.tree_from_names(q, [
        (b(7), [(b(3), [(b(1), ["R1.A", b(2)]), (b(5), [b(4), b(6)])]),
                (b(10), [(b(9), [b(8)]), b(11)])]),
    ])
