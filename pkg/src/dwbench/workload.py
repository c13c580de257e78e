"""Workload generation: initial OLAP or extraction queries plus drill-down chains."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .model import AttributeKind, FactTable, HierarchyLevel, Warehouse
from .params import WorkloadParams, check
from .query import Aggregate, GroupBy, GroupOperator, Having, Join, Query, Restriction, check_structure
from .rng import (
    SeededRng,
    StringReferential,
    gaussian_int,
    random_key,
    random_string,
    skewed_choice,
    skewed_index,
    uniform_real,
)


class QueryClass(enum.Enum):
    EXTRACTION = "EXTRACTION"
    OLAP_INITIAL = "OLAP_INITIAL"
    DRILL_DOWN = "DRILL_DOWN"


@dataclass
class ChainContext:
    """State handed from an initial query to its drill-downs."""

    fact_table: FactTable
    level: HierarchyLevel  # last hierarchy level reached by the attribute walk
    selected: dict[str, tuple[HierarchyLevel, AttributeKind]] = field(default_factory=dict)


@dataclass(frozen=True)
class ChainRecord:
    initial_index: int
    start_depth: int
    target: int
    length: int


@dataclass
class Workload:
    queries: list[Query]
    class_tags: list[QueryClass]
    chains: list[ChainRecord]
    seed: int | None = None
    params: WorkloadParams | None = None

    def __len__(self):
        return len(self.queries)


class WorkloadError(ValueError):
    pass


def _selectable(level: HierarchyLevel):
    """Descriptors of a level; its primary key when it has none."""
    return level.descriptors or (level.primary_key,)


def _qualify(level_or_table, attr_name: str) -> str:
    return f"{level_or_table.table_name}.{attr_name}"


def _referential_for(wh: Warehouse) -> StringReferential:
    ref = getattr(wh, "referential", None)
    if ref is None:
        raise WorkloadError("warehouse carries no string referential")
    return ref


def generate_initial_query(
    wh: Warehouse,
    wp: WorkloadParams,
    rng: SeededRng,
    spread: float = 0.1,
    measure_range: tuple[float, float] | None = None,
) -> tuple[Query, ChainContext | None]:
    """One OLAP or extraction query; the context is ``None`` for extraction queries."""
    if not wh.fact_tables:
        raise WorkloadError("warehouse has no fact table")
    referential = _referential_for(wh)
    measure_range = measure_range or wh.measure_range
    ft = skewed_choice(rng, wh.fact_tables)
    if not ft.dimensions:
        raise WorkloadError(f"{ft.table_name} has no dimension")

    tables: list[str] = [ft.table_name]
    joins: list[Join] = []
    attributes: list[str] = []
    selected: dict[str, tuple[HierarchyLevel, AttributeKind]] = {}
    level: HierarchyLevel | None = None

    def add_join(left: str, right_level: HierarchyLevel) -> None:
        if right_level.table_name not in tables:
            tables.append(right_level.table_name)
        j = Join(left, _qualify(right_level, right_level.primary_key.name))
        if j not in joins:
            joins.append(j)

    for _ in range(gaussian_int(rng, wp.AVG_NB_ATT, spread, 1)):
        j = skewed_index(rng, len(ft.dimensions))
        dim = ft.dimensions[j]
        target_depth = 1 + rng.below(dim.nb_levels)
        level = dim.entry_level
        add_join(_qualify(ft, ft.foreign_keys[j].name), level)
        for _ in range(target_depth - 1):
            fk = _qualify(level, level.foreign_key.name)
            level = level.coarser
            add_join(fk, level)
        attr = skewed_choice(rng, _selectable(level))
        name = _qualify(level, attr.name)
        if name not in selected:
            attributes.append(name)
            selected[name] = (level, attr.kind)

    conditions: list[Restriction] = []
    for _ in range(gaussian_int(rng, wp.AVG_NB_RESTR, spread, 0)):
        name = skewed_choice(rng, attributes)
        owner, kind = selected[name]
        if kind is AttributeKind.DESCRIPTOR:
            value = random_string(rng, referential, name.split(".", 1)[1])
        else:
            value = random_key(rng, owner)
        r = Restriction(name, "=", value)
        if r not in conditions:
            conditions.append(r)

    query = Query(attributes=tuple(attributes), tables=tuple(tables), conditions=tuple(conditions), joins=tuple(joins))
    measures = ft.measure_attributes
    # a fact table without measures cannot be aggregated: the query stays an extraction
    if rng.random() < wp.PROB_OLAP and measures:
        aggregates = tuple(
            Aggregate("SUM", _qualify(ft, skewed_choice(rng, measures).name), f"AGG{k}")
            for k in range(1, gaussian_int(rng, wp.AVG_NB_AGGREG, spread, 1) + 1)
        )
        operator = GroupOperator.CUBE if rng.random() < wp.PROB_CUBE else GroupOperator.ROLLUP
        having = None
        if rng.random() < wp.PROB_HAVING:
            alias = skewed_choice(rng, aggregates).alias
            threshold = round(uniform_real(rng, *measure_range), 2)
            having = Having(alias, ">=", threshold)
        query = replace(query, aggregates=aggregates, group_by=GroupBy(operator, tuple(attributes)), having=having)
        check_structure(query)
        return query, ChainContext(ft, level, selected)
    check_structure(query)
    return query, None


def generate_drill_downs(
    initial: Query, ctx: ChainContext, wp: WorkloadParams, rng: SeededRng, spread: float = 0.1
) -> list[Query]:
    """Successively add one attribute from the next finer level to select and group-by lists.

    The chain length target is drawn once. Levels whose attributes are all
    already selected are skipped; the chain stops at the finest level.
    """
    return _drill_down_chain(initial, ctx, wp, rng, spread)[0]


def _drill_down_chain(initial, ctx, wp, rng, spread) -> tuple[list[Query], int]:
    if not initial.is_olap or ctx is None:
        raise WorkloadError("drill-downs apply to OLAP queries only")
    target = gaussian_int(rng, wp.AVG_NB_DD, spread, 0)
    chain: list[Query] = []
    previous = initial
    level = ctx.level
    while len(chain) < target:
        candidates = []
        while not candidates:
            level = level.finer
            if level is None:
                break
            candidates = [a for a in _selectable(level) if _qualify(level, a.name) not in previous.attributes]
        if level is None:
            break
        attr = skewed_choice(rng, candidates)
        name = _qualify(level, attr.name)
        previous = replace(
            previous,
            attributes=previous.attributes + (name,),
            group_by=GroupBy(previous.group_by.operator, previous.group_by.attributes + (name,)),
        )
        chain.append(previous)
    return chain, target


def generate_workload(
    wh: Warehouse,
    wp: WorkloadParams,
    rng: SeededRng,
    spread: float = 0.1,
    measure_range: tuple[float, float] | None = None,
) -> Workload:
    """Generate queries until at least ``NB_Q`` exist; drill-downs count towards the total."""
    check(wp)
    if not wh.fact_tables:
        raise WorkloadError("warehouse has no fact table")
    queries: list[Query] = []
    tags: list[QueryClass] = []
    chains: list[ChainRecord] = []
    while len(queries) < wp.NB_Q:
        q, ctx = generate_initial_query(wh, wp, rng, spread, measure_range)
        queries.append(q)
        if ctx is None:
            tags.append(QueryClass.EXTRACTION)
            continue
        tags.append(QueryClass.OLAP_INITIAL)
        start = len(queries) - 1
        chain, target = _drill_down_chain(q, ctx, wp, rng, spread)
        queries.extend(chain)
        tags.extend([QueryClass.DRILL_DOWN] * len(chain))
        chains.append(ChainRecord(start, ctx.level.depth, target, len(chain)))
    return Workload(queries, tags, chains, seed=rng.seed, params=wp)
