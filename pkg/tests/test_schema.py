import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwbench.model import (
    Attribute,
    AttributeKind,
    check_referential_integrity,
    level_at,
)
from dwbench.params import LowLevelParams
from dwbench.schema import (
    GenerationSettings,
    GuardError,
    estimate_size,
    expected_fact_rows,
    generate_warehouse,
    level_cardinality,
    _floyd_sample,
)
from dwbench.rng import SeededRng

from conftest import random_small_low, uniform_low


def test_level_cardinalities_and_order():
    wh, _ = generate_warehouse(uniform_low(nb_dims=1, levels=3, hh=10, sf=10, density=0.01), 0)
    dim = wh.dimensions[0]
    assert [lv.cardinality for lv in reversed(dim.levels())] == [10, 100, 1000]
    assert [lv.table_name for lv in wh.levels()] == ["DIM1_3", "DIM1_2", "DIM1_1"]


def test_single_level_dimension_has_no_foreign_key():
    wh, _ = generate_warehouse(uniform_low(nb_dims=1, levels=1, hh=7), 0)
    level = wh.dimensions[0].entry_level
    assert level.cardinality == 7 and level.foreign_key is None and level.coarser is None


def test_hand_enumerable_two_level_dimension():
    low = LowLevelParams(NB_FT=1, NB_DIM=(1,), TOT_NB_DIM=1, NB_MEAS=(1,), DENSITY=(1.0,),
                         NB_LEVELS=(2,), NB_ATT=((1, 1),), HHLEVEL_SIZE=(2,), DIM_SFACTOR=(3,))
    wh, _ = generate_warehouse(low, 3)
    finest = wh.dimensions[0].entry_level
    assert finest.cardinality == 6
    assert [a.name for a in finest.intention] == ["DIM1_1_PK", "DIM1_1_DESCR1", "DIM1_2_PK"]
    assert [a.kind for a in finest.intention] == [AttributeKind.PRIMARY_KEY, AttributeKind.DESCRIPTOR,
                                                  AttributeKind.FOREIGN_KEY]
    # independent walk over the extension
    assert [row[0] for row in finest.extension] == list(range(1, 7))
    assert {row[2] for row in finest.extension} <= {1, 2}
    assert all(row[1].startswith("DIM1_1_DESCR1_") for row in finest.extension)


def test_level_at_bounds():
    wh, _ = generate_warehouse(uniform_low(levels=2), 0)
    assert level_at(wh.dimensions[0], 2).table_name == "DIM1_2"
    with pytest.raises(IndexError, match="dimension 1"):
        level_at(wh.dimensions[0], 3)


def test_fractional_scale_factor_rounds():
    assert level_cardinality(3, 1.5, 3, 1) == 7  # 6.75
    assert level_cardinality(3, 1.5, 3, 2) == 5  # 4.5 rounds half up


def test_full_density_is_full_product():
    wh, _ = generate_warehouse(uniform_low(nb_dims=2, levels=1, hh=3, density=1.0), 0)
    ft = wh.fact_tables[0]
    assert ft.cardinality == 9
    assert sorted(map(tuple, ft.keys.tolist())) == [(i, j) for i in range(1, 4) for j in range(1, 4)]


def test_fact_keys_unique_and_valid():
    wh, _ = generate_warehouse(uniform_low(density=0.3), 5)
    ft = wh.fact_tables[0]
    assert len({tuple(r) for r in ft.keys.tolist()}) == ft.cardinality
    assert check_referential_integrity(wh) == []


def test_sampling_path_gives_exact_count():
    settings_ = GenerationSettings(streaming_threshold=100)
    wh, _ = generate_warehouse(uniform_low(nb_dims=3, levels=1, hh=10, density=0.25), 2, settings_)
    ft = wh.fact_tables[0]
    assert ft.cardinality == 250
    assert len({tuple(r) for r in ft.keys.tolist()}) == 250


@given(st.integers(1, 300), st.data())
@settings(max_examples=60, deadline=None)
def test_floyd_sample(population, data):
    k = data.draw(st.integers(0, population))
    out = _floyd_sample(SeededRng(population), population, k)
    assert len(out) == k == len(set(out)) and out == sorted(out)
    assert all(0 <= x < population for x in out)


def test_guard_refuses_table_defaults():
    from dwbench.params import HighLevelParams

    with pytest.raises(GuardError) as err:
        generate_warehouse(HighLevelParams(), 0, GenerationSettings(spread=0.0))
    assert err.value.expected_rows == pytest.approx(0.6 * 1000**5)


def test_zero_measures_fact_table():
    wh, size = generate_warehouse(uniform_low(nb_meas=0, density=0.5), 0)
    assert wh.fact_tables[0].measures.shape[1] == 0
    assert size.per_table["FT1"].row_bytes == 12


def test_extension_is_immutable(small_warehouse):
    with pytest.raises(ValueError):
        small_warehouse.fact_tables[0].keys[0, 0] = 99


def test_foreign_key_attribute_requires_target():
    with pytest.raises(ValueError):
        Attribute("X", AttributeKind.FOREIGN_KEY)
    with pytest.raises(ValueError):
        Attribute("X", AttributeKind.DESCRIPTOR, "DIM1_1")


def test_integrity_check_catches_dangling_key():
    wh, _ = generate_warehouse(uniform_low(levels=2), 0)
    level = wh.dimensions[0].entry_level
    col = level.column_index(level.foreign_key.name)
    level.extension[0] = tuple(999 if i == col else v for i, v in enumerate(level.extension[0]))
    violations = check_referential_integrity(wh)
    assert len(violations) == 1 and violations[0].value == 999


def test_size_arithmetic():
    wh, size = generate_warehouse(uniform_low(nb_dims=1, levels=1, hh=10, nb_att=0, nb_meas=1, density=1.0), 0)
    assert size.per_table["DIM1_1"].row_bytes == 4
    assert size.per_table["FT1"].row_bytes == 8
    assert size.per_table["FT1"].total_bytes == 80
    assert size.warehouse_megabytes == size.total_bytes / 2**20
    assert estimate_size(wh).total_bytes == size.total_bytes


def test_descriptor_width():
    wh, size = generate_warehouse(uniform_low(nb_dims=1, levels=1, hh=2, nb_att=1, nb_meas=1, density=1.0), 0)
    assert size.per_table["DIM1_1"].row_bytes == 4 + len("DIM1_1_DESCR1") + 21


def test_expected_rows_formula():
    low = uniform_low(nb_dims=3, levels=2, hh=2, sf=2, density=0.5)
    assert expected_fact_rows(low) == [0.5 * 4**3]


def test_generation_is_order_independent():
    # each dimension draws from its own stream, so a prefix config shares its dimensions
    low4 = uniform_low(nb_dims=4)
    low3 = uniform_low(nb_dims=3)
    a, _ = generate_warehouse(low4, 1)
    b, _ = generate_warehouse(low3, 1)
    for da, db in zip(a.dimensions, b.dimensions):
        assert [lv.extension for lv in da.levels()] == [lv.extension for lv in db.levels()]


def test_random_configs_hold_invariants():
    for i in range(15):
        low = random_small_low(random.Random(100 + i))
        wh, size = generate_warehouse(low, i)
        assert check_referential_integrity(wh) == []
        assert len(size.per_table) == len(wh.tables())
        for ft, dims in zip(wh.fact_tables, wh.low_level.FT_DIMS):
            assert tuple(d.index for d in ft.dimensions) == dims
            assert ft.measures.dtype == np.float32 and ft.keys.dtype == np.int32
