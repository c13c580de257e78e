"""Warehouse generation: dimension hierarchies, then fact tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    Attribute,
    AttributeKind,
    Dimension,
    FactTable,
    HierarchyLevel,
    Warehouse,
    descriptor_name,
    fact_table_name,
    level_table_name,
    measure_name,
    pk_name,
)
from .params import HighLevelParams, LowLevelParams, check, derive_low_level, resolve_fact_dimensions
from .rng import (
    DEFAULT_MEASURE_RANGE,
    DEFAULT_REFERENTIAL_SIZE,
    STRING_LENGTH,
    SeededRng,
    StringReferential,
    random_key,
    random_measures,
    random_strings,
    round_half_up,
)

KEY_BYTES = 4
MEASURE_BYTES = 4
DEFAULT_MAX_ROWS = 10_000_000
DEFAULT_STREAMING_THRESHOLD = 10_000_000
_BERNOULLI_CHUNK = 1 << 20


class GuardError(RuntimeError):
    """Generation refused because the expected fact table is too large."""

    def __init__(self, table: str, expected_rows: float, max_rows: int):
        self.table = table
        self.expected_rows = expected_rows
        self.max_rows = max_rows
        super().__init__(
            f"{table}: expected {expected_rows:,.0f} rows exceeds max_rows={max_rows:,}; "
            "lower the density or the dimension sizes, or raise max_rows"
        )


@dataclass(frozen=True)
class GenerationSettings:
    spread: float = 0.1
    referential_size: int = DEFAULT_REFERENTIAL_SIZE
    measure_range: tuple[float, float] = DEFAULT_MEASURE_RANGE
    max_rows: int = DEFAULT_MAX_ROWS
    streaming_threshold: int = DEFAULT_STREAMING_THRESHOLD


@dataclass(frozen=True)
class TableSize:
    row_count: int
    row_bytes: int

    @property
    def total_bytes(self) -> int:
        return self.row_count * self.row_bytes


@dataclass
class SizeReport:
    per_table: dict[str, TableSize] = field(default_factory=dict)

    @property
    def total_bytes(self) -> int:
        return sum(t.total_bytes for t in self.per_table.values())

    @property
    def warehouse_megabytes(self) -> float:
        return self.total_bytes / 2**20

    def summary(self) -> str:
        width = max((len(n) for n in self.per_table), default=5)
        lines = [f"{'table':<{width}}  {'rows':>12}  {'row_bytes':>9}  {'bytes':>14}"]
        for name, t in self.per_table.items():
            lines.append(f"{name:<{width}}  {t.row_count:>12,}  {t.row_bytes:>9}  {t.total_bytes:>14,}")
        lines.append(f"warehouse size: {self.warehouse_megabytes:.3f} MB")
        return "\n".join(lines)


def level_cardinality(hhlevel_size: int, sfactor: float, nb_levels: int, depth: int) -> int:
    """|level at depth| = HHLEVEL_SIZE * DIM_SFACTOR ** (NB_LEVELS - depth), rounded half up."""
    return round_half_up(hhlevel_size * sfactor ** (nb_levels - depth))


def entry_cardinality(low: LowLevelParams, dim: int) -> int:
    """Finest-level size of dimension ``dim`` (1-based)."""
    d = dim - 1
    return level_cardinality(low.HHLEVEL_SIZE[d], low.DIM_SFACTOR[d], low.NB_LEVELS[d], 1)


def expected_fact_rows(low: LowLevelParams) -> list[float]:
    """DENSITY * product of entry-level cardinalities, per fact table."""
    low_dims = low.FT_DIMS or tuple(tuple(range(1, n + 1)) for n in low.NB_DIM)
    out = []
    for f, dims in enumerate(low_dims):
        product = math.prod(entry_cardinality(low, d) for d in dims)
        out.append(low.DENSITY[f] * product)
    return out


def _build_dimension(d: int, low: LowLevelParams, rng: SeededRng, referential: StringReferential) -> Dimension:
    idx = d - 1
    nb_levels = low.NB_LEVELS[idx]
    previous: HierarchyLevel | None = None
    for depth in range(nb_levels, 0, -1):
        table = level_table_name(d, depth)
        size = level_cardinality(low.HHLEVEL_SIZE[idx], low.DIM_SFACTOR[idx], nb_levels, depth)
        attrs = [Attribute(pk_name(table), AttributeKind.PRIMARY_KEY)]
        attrs += [Attribute(descriptor_name(table, k), AttributeKind.DESCRIPTOR) for k in range(1, low.NB_ATT[idx][depth - 1] + 1)]
        if previous is not None:
            attrs.append(Attribute(previous.primary_key.name, AttributeKind.FOREIGN_KEY, previous.table_name))
        # column-major draws: each descriptor column, then the foreign keys
        columns: list[list] = [list(range(1, size + 1))]
        for a in attrs[1:]:
            if a.kind is AttributeKind.DESCRIPTOR:
                columns.append(random_strings(rng, referential, a.name, size))
        if previous is not None:
            columns.append([random_key(rng, previous) for _ in range(size)])
        level = HierarchyLevel(table, depth, tuple(attrs), list(zip(*columns)) if size else [])
        if previous is not None:
            level.coarser = previous
            previous.finer = level
        previous = level
    return Dimension(index=d, entry_level=previous, nb_levels=nb_levels)


def generate_dimensions(low: LowLevelParams, rng: SeededRng, referential: StringReferential) -> list[Dimension]:
    """Build every dimension from its coarsest level down to its finest.

    Each dimension draws from its own sub-stream, so the result does not
    depend on build order.
    """
    check(low)
    return [_build_dimension(d, low, rng.substream(f"dimension-{d}"), referential) for d in range(1, low.TOT_NB_DIM + 1)]


def _floyd_sample(rng: SeededRng, population: int, k: int) -> list[int]:
    """k distinct integers from [0, population), uniformly (Floyd's algorithm), sorted."""
    chosen: set[int] = set()
    for j in range(population - k, population):
        t = rng.below(j + 1)
        chosen.add(j if t in chosen else t)
    return sorted(chosen)


def _unravel(flat, shape: tuple[int, ...]) -> np.ndarray:
    if math.prod(shape) < 1 << 62:
        idx = np.asarray(flat, dtype=np.int64)
        return np.stack(np.unravel_index(idx, shape), axis=1).astype(np.int64) + 1
    rows = []
    for x in flat:
        digits = []
        for n in reversed(shape):
            x, r = divmod(x, n)
            digits.append(r + 1)
        rows.append(digits[::-1])
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), len(shape))


def _fact_keys(shape: tuple[int, ...], density: float, rng: SeededRng, threshold: int) -> np.ndarray:
    product = math.prod(shape)
    if product <= threshold:
        # Bernoulli inclusion of each combination, in lexicographic order
        selected = []
        for start in range(0, product, _BERNOULLI_CHUNK):
            n = min(_BERNOULLI_CHUNK, product - start)
            u = rng.random_array(n)
            selected.append(np.nonzero(u < density)[0] + start)
        flat = np.concatenate(selected) if selected else np.empty(0, dtype=np.int64)
        return _unravel(flat, shape)
    k = min(product, round_half_up(density * product))
    return _unravel(_floyd_sample(rng, product, k), shape)


def generate_fact_tables(
    low: LowLevelParams,
    dims: list[Dimension],
    rng: SeededRng,
    settings: GenerationSettings = GenerationSettings(),
) -> list[FactTable]:
    """Fact tables over density-sampled cartesian products of entry-level keys.

    Up to ``settings.streaming_threshold`` combinations, each combination is
    kept independently with probability DENSITY. Above it, exactly
    round(DENSITY * product) distinct combinations are sampled uniformly.
    """
    check(low)
    if low.FT_DIMS is None:
        raise ValueError("FT_DIMS must be resolved before building fact tables")
    by_index = {d.index: d for d in dims}
    tables = []
    for f in range(1, low.NB_FT + 1):
        name = fact_table_name(f)
        chosen = tuple(by_index[d] for d in low.FT_DIMS[f - 1])
        shape = tuple(d.entry_level.cardinality for d in chosen)
        density = low.DENSITY[f - 1]
        expected = density * math.prod(shape)
        if expected > settings.max_rows:
            raise GuardError(name, expected, settings.max_rows)
        attrs = [
            Attribute(d.entry_level.primary_key.name, AttributeKind.FOREIGN_KEY, d.entry_level.table_name) for d in chosen
        ]
        nb_meas = low.NB_MEAS[f - 1]
        attrs += [Attribute(measure_name(name, k), AttributeKind.MEASURE) for k in range(1, nb_meas + 1)]
        sub = rng.substream(f"fact-{f}")
        keys = _fact_keys(shape, density, sub.substream("keys"), settings.streaming_threshold).astype(np.int32)
        n = keys.shape[0]
        measures = random_measures(sub.substream("measures"), n * nb_meas, settings.measure_range).reshape(n, nb_meas)
        tables.append(FactTable(name, chosen, tuple(attrs), keys, measures))
    return tables


def estimate_size(warehouse: Warehouse) -> SizeReport:
    report = SizeReport()
    for t in warehouse.tables():
        row_bytes = 0
        for a in t.intention:
            if a.is_key:
                row_bytes += KEY_BYTES
            elif a.kind is AttributeKind.MEASURE:
                row_bytes += MEASURE_BYTES
            else:
                row_bytes += descriptor_width(a.name)
        report.per_table[t.table_name] = TableSize(t.cardinality, row_bytes)
    return report


def descriptor_width(attribute_name: str) -> int:
    """Stored descriptor length: name prefix, underscore, 20 referential chars."""
    return len(attribute_name) + 1 + STRING_LENGTH


def resolve_low_level(
    params: HighLevelParams | LowLevelParams, seed: int, settings: GenerationSettings = GenerationSettings()
) -> LowLevelParams:
    if isinstance(params, HighLevelParams):
        return derive_low_level(params, SeededRng(seed, "params"), settings.spread)
    check(params)
    return resolve_fact_dimensions(params, seed)


def generate_warehouse(
    params: HighLevelParams | LowLevelParams,
    seed: int,
    settings: GenerationSettings = GenerationSettings(),
) -> tuple[Warehouse, SizeReport]:
    low = resolve_low_level(params, seed, settings)
    for f, expected in enumerate(expected_fact_rows(low), start=1):
        if expected > settings.max_rows:
            raise GuardError(fact_table_name(f), expected, settings.max_rows)
    root = SeededRng(seed)
    referential = StringReferential.build(seed, settings.referential_size)
    dims = generate_dimensions(low, root, referential)
    facts = generate_fact_tables(low, dims, root, settings)
    wh = Warehouse(facts, dims, seed=seed, low_level=low, referential=referential, measure_range=settings.measure_range)
    return wh, estimate_size(wh)
