"""Relational data model: identified tuples, bags, signatures, CSV ingestion.

Values are plain Python ``int`` (64-bit range) or ``str``.  They are ordered
with all integers before all strings; :func:`value_key` produces the sort key.
"""

from __future__ import annotations

import os
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Union

from .errors import FormatError, IntegrityError

Value = Union[int, str]

ID_COLUMN = "_id"
_INT_RE = re.compile(r"[+-]?[0-9]+\Z")
_INT_MIN, _INT_MAX = -(2 ** 63), 2 ** 63 - 1


def value_key(v: Value):
    # Code point order on str coincides with UTF-8 byte order.
    if isinstance(v, str):
        return (1, 0, v)
    return (0, v, "")


def parse_cell(cell: str) -> Value:
    """Parse a CSV cell: a full signed-digit match within int64 is an int."""
    if _INT_RE.match(cell):
        n = int(cell)
        if _INT_MIN <= n <= _INT_MAX:
            return n
    return cell


def format_value(v: Value) -> str:
    return str(v)


@dataclass(frozen=True)
class Relation:
    """A named bag of identified tuples.

    ``rows`` is a tuple of ``(identifier, values)`` pairs where ``values`` is
    aligned with ``schema``.
    """

    name: str
    schema: tuple
    rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "rows", tuple((i, tuple(t)) for i, t in self.rows))
        seen = set()
        width = len(self.schema)
        for ident, values in self.rows:
            if ident in seen:
                raise IntegrityError(f"duplicate identifier {ident!r} in relation {self.name}")
            seen.add(ident)
            if len(values) != width:
                raise FormatError(
                    f"tuple {ident!r} of {self.name} has {len(values)} values, schema has {width}"
                )

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def distinct(self) -> int:
        return len({t for _, t in self.rows})

    @property
    def identifiers(self) -> frozenset:
        return frozenset(i for i, _ in self.rows)

    def column(self, attr: str) -> int:
        return self.schema.index(attr)

    def bag(self) -> Counter:
        return Counter(t for _, t in self.rows)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class Database:
    relations: Mapping[str, Relation] = field(default_factory=dict)

    def __post_init__(self):
        rels = dict(self.relations)
        owner = {}
        for name, rel in rels.items():
            if rel.name != name:
                raise IntegrityError(f"relation stored under {name!r} is named {rel.name!r}")
            for ident, _ in rel.rows:
                if ident in owner:
                    raise IntegrityError(
                        f"identifier {ident!r} occurs in both {owner[ident]} and {name}"
                    )
                owner[ident] = name
        object.__setattr__(self, "relations", rels)

    @classmethod
    def of(cls, *relations: Relation) -> "Database":
        return cls({r.name: r for r in relations})

    def __getitem__(self, name: str) -> Relation:
        return self.relations[name]

    def __contains__(self, name) -> bool:
        return name in self.relations

    @property
    def size(self) -> int:
        return sum(r.size for r in self.relations.values())

    def schemas(self) -> dict:
        return {name: r.schema for name, r in self.relations.items()}

    def replace(self, *relations: Relation) -> "Database":
        rels = dict(self.relations)
        for r in relations:
            rels[r.name] = r
        return Database(rels)


def relation_from_values(name: str, schema: Iterable[str], tuples: Iterable[tuple],
                         ids: Iterable[str] | None = None) -> Relation:
    """Build a relation, synthesizing ``<name>_<k>`` identifiers when ``ids`` is None."""
    tuples = [tuple(t) for t in tuples]
    if ids is None:
        ids = [f"{name}_{k}" for k in range(1, len(tuples) + 1)]
    return Relation(name, tuple(schema), tuple(zip(ids, tuples)))


def _split(line: str) -> list:
    return [c.strip() for c in line.rstrip("\r\n").split(",")]


def load_csv(path, relation_name: str) -> Relation:
    """Load a CSV file into a :class:`Relation`.

    The first row is the header.  A leading ``_id`` column supplies explicit
    identifiers; otherwise rows get ``<relation_name>_<row>`` (1-based).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh.read().splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError(f"{path}: missing header row")
    header = _split(lines[0])
    explicit = header[0] == ID_COLUMN
    schema = header[1:] if explicit else header
    if len(set(schema)) != len(schema) or any(not a for a in schema):
        raise FormatError(f"{path}: header has empty or repeated attribute names")
    rows = []
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        cells = _split(line)
        if len(cells) != len(header):
            raise FormatError(
                f"{path}: row {lineno} has {len(cells)} cells, header has {len(header)}"
            )
        if explicit:
            ident, cells = cells[0], cells[1:]
            if ident in seen:
                raise IntegrityError(f"{path}: duplicate identifier {ident!r} in row {lineno}")
            seen.add(ident)
        else:
            ident = f"{relation_name}_{lineno - 1}"
        rows.append((ident, tuple(parse_cell(c) for c in cells)))
    return Relation(relation_name, tuple(schema), tuple(rows))


def write_csv(relation: Relation, path) -> None:
    """Write a relation with an explicit ``_id`` column (inverse of load_csv)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join((ID_COLUMN,) + relation.schema) + "\n")
        for ident, values in relation.rows:
            fh.write(",".join([ident] + [format_value(v) for v in values]) + "\n")


def load_database(directory) -> Database:
    """Load every ``<name>.csv`` in ``directory`` as relation ``<name>``."""
    directory = Path(directory)
    rels = []
    for entry in sorted(os.listdir(directory)):
        if entry.endswith(".csv"):
            rels.append(load_csv(directory / entry, entry[:-4]))
    return Database.of(*rels)


def write_database(db: Database, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, rel in db.relations.items():
        write_csv(rel, directory / f"{name}.csv")


def database_stats(db: Database) -> tuple:
    """Return ``(|D|, sum of ||R||, max arity)``."""
    rels = list(db.relations.values())
    if not rels:
        return (0, 0, 0)
    return (
        sum(r.size for r in rels),
        sum(r.distinct for r in rels),
        max(len(r.schema) for r in rels),
    )
