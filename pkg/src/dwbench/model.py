"""Instantiated warehouse metaschema: fact tables, dimensions, hierarchy levels.

Naming follows ``FT{f}`` for fact tables and ``DIM{d}_{h}`` for hierarchy
levels, ``h`` being the depth (1 = finest level, the one fact tables point to).

Generation pseudo-code in the literature calls the link to the next smaller
level ``child`` and the link to the next larger level ``parent``. Here they are
``coarser`` (child) and ``finer`` (parent).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np


class AttributeKind(enum.Enum):
    PRIMARY_KEY = "PRIMARY_KEY"
    FOREIGN_KEY = "FOREIGN_KEY"
    DESCRIPTOR = "DESCRIPTOR"
    MEASURE = "MEASURE"


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: AttributeKind
    target_table: str | None = None

    def __post_init__(self):
        if (self.kind is AttributeKind.FOREIGN_KEY) != (self.target_table is not None):
            raise ValueError(f"attribute {self.name}: target_table is set iff kind is FOREIGN_KEY")

    @property
    def is_key(self) -> bool:
        return self.kind in (AttributeKind.PRIMARY_KEY, AttributeKind.FOREIGN_KEY)


def level_table_name(dim: int, depth: int) -> str:
    return f"DIM{dim}_{depth}"


def fact_table_name(fact: int) -> str:
    return f"FT{fact}"


def pk_name(table: str) -> str:
    return f"{table}_PK"


def descriptor_name(table: str, k: int) -> str:
    return f"{table}_DESCR{k}"


def measure_name(table: str, k: int) -> str:
    return f"{table}_MEAS{k}"


def _check_unique(table: str, intention) -> None:
    names = [a.name for a in intention]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate attribute names in {table}")


@dataclass(eq=False)
class HierarchyLevel:
    """One normalisation stage of a dimension, stored row-wise.

    Tuples are ``(pk, descriptor..., [fk])`` aligned with ``intention``. The
    primary key of row ``i`` is ``i + 1``.
    """

    table_name: str
    depth: int
    intention: tuple[Attribute, ...]
    extension: list[tuple] = field(default_factory=list)
    coarser: "HierarchyLevel | None" = field(default=None, repr=False)
    finer: "HierarchyLevel | None" = field(default=None, repr=False)

    def __post_init__(self):
        _check_unique(self.table_name, self.intention)
        pks = [a for a in self.intention if a.kind is AttributeKind.PRIMARY_KEY]
        if len(pks) != 1:
            raise ValueError(f"{self.table_name} must have exactly one primary key")

    @property
    def cardinality(self) -> int:
        return len(self.extension)

    @property
    def primary_key(self) -> Attribute:
        return self.intention[0]

    @property
    def foreign_key(self) -> Attribute | None:
        for a in self.intention:
            if a.kind is AttributeKind.FOREIGN_KEY:
                return a
        return None

    @property
    def descriptors(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.intention if a.kind is AttributeKind.DESCRIPTOR)

    def column_index(self, name: str) -> int:
        for i, a in enumerate(self.intention):
            if a.name == name:
                return i
        raise KeyError(f"{self.table_name} has no attribute {name}")

    def rows(self) -> Iterator[tuple]:
        return iter(self.extension)


@dataclass(eq=False)
class Dimension:
    index: int
    entry_level: HierarchyLevel
    nb_levels: int

    def levels(self) -> list[HierarchyLevel]:
        """Finest to coarsest."""
        out = []
        level = self.entry_level
        while level is not None:
            out.append(level)
            level = level.coarser
        return out


def level_at(dimension: Dimension, depth: int) -> HierarchyLevel:
    if not 1 <= depth <= dimension.nb_levels:
        raise IndexError(
            f"dimension {dimension.index} has {dimension.nb_levels} level(s); depth {depth} is out of range"
        )
    level = dimension.entry_level
    for _ in range(depth - 1):
        level = level.coarser
    return level


@dataclass(eq=False)
class FactTable:
    """Fact table with a columnar extension.

    ``keys`` is an ``(n, n_dims)`` int32 array aligned with ``dimensions``;
    ``measures`` is ``(n, n_measures)`` float32.
    """

    table_name: str
    dimensions: tuple[Dimension, ...]
    intention: tuple[Attribute, ...]
    keys: np.ndarray
    measures: np.ndarray

    def __post_init__(self):
        _check_unique(self.table_name, self.intention)
        if len({d.index for d in self.dimensions}) != len(self.dimensions):
            raise ValueError(f"{self.table_name} references a dimension twice")
        self.keys.setflags(write=False)
        self.measures.setflags(write=False)

    @property
    def cardinality(self) -> int:
        return int(self.keys.shape[0])

    @property
    def foreign_keys(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.intention if a.kind is AttributeKind.FOREIGN_KEY)

    @property
    def measure_attributes(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.intention if a.kind is AttributeKind.MEASURE)

    def rows(self) -> Iterator[tuple]:
        for k, m in zip(self.keys.tolist(), self.measures.tolist()):
            yield (*k, *m)

    @property
    def extension(self) -> list[tuple]:
        return list(self.rows())


@dataclass(eq=False)
class Warehouse:
    fact_tables: list[FactTable]
    dimensions: list[Dimension]
    seed: int | None = None
    low_level: object = None  # resolved LowLevelParams
    referential: object = None  # StringReferential used for descriptor values
    measure_range: tuple[float, float] = (0.0, 1000.0)

    def __post_init__(self):
        pool = {id(d) for d in self.dimensions}
        for ft in self.fact_tables:
            for d in ft.dimensions:
                if id(d) not in pool:
                    raise ValueError(f"{ft.table_name} references dimension {d.index} outside the shared pool")

    def levels(self) -> list[HierarchyLevel]:
        """All levels in dependency order: per dimension, coarsest first."""
        out = []
        for d in self.dimensions:
            out.extend(reversed(d.levels()))
        return out

    def tables(self) -> list[HierarchyLevel | FactTable]:
        return [*self.levels(), *self.fact_tables]

    def table(self, name: str) -> HierarchyLevel | FactTable:
        for t in self.tables():
            if t.table_name == name:
                return t
        raise KeyError(name)

    def columns(self) -> dict[str, set[str]]:
        return {t.table_name: {a.name for a in t.intention} for t in self.tables()}


@dataclass(frozen=True)
class Violation:
    table: str
    attribute: str
    tuple_index: int
    value: int


def check_referential_integrity(warehouse: Warehouse) -> list[Violation]:
    """Every foreign-key value must match a primary key of its target level."""
    violations: list[Violation] = []
    for level in warehouse.levels():
        fk = level.foreign_key
        if fk is None:
            continue
        target_pks = {row[0] for row in level.coarser.extension}
        col = level.column_index(fk.name)
        for i, row in enumerate(level.extension):
            if row[col] not in target_pks:
                violations.append(Violation(level.table_name, fk.name, i, row[col]))
    for ft in warehouse.fact_tables:
        for j, (dim, attr) in enumerate(zip(ft.dimensions, ft.foreign_keys)):
            target_pks = np.fromiter((row[0] for row in dim.entry_level.extension), dtype=np.int64)
            col = ft.keys[:, j]
            bad = np.nonzero(~np.isin(col, target_pks))[0]
            violations.extend(Violation(ft.table_name, attr.name, int(i), int(col[i])) for i in bad)
    return violations
