import pytest

from dwbench.model import AttributeKind
from dwbench.params import WorkloadParams
from dwbench.query import GroupOperator, check_structure, parse_check, render_sql, validate_against_schema
from dwbench.rng import SeededRng
from dwbench.schema import generate_warehouse
from dwbench.workload import (
    QueryClass,
    WorkloadError,
    generate_drill_downs,
    generate_initial_query,
    generate_workload,
)

from conftest import uniform_low


def test_workload_reaches_nb_q(small_warehouse, workload_params):
    wl = generate_workload(small_warehouse, workload_params, SeededRng(1, "workload"))
    assert len(wl) >= workload_params.NB_Q
    assert len(wl.class_tags) == len(wl)
    # stops right after the chain that crossed NB_Q
    last_initial = max(i for i, t in enumerate(wl.class_tags) if t is not QueryClass.DRILL_DOWN)
    assert last_initial < workload_params.NB_Q


def test_workload_is_deterministic(small_warehouse, workload_params):
    a = generate_workload(small_warehouse, workload_params, SeededRng(3, "workload"))
    b = generate_workload(small_warehouse, workload_params, SeededRng(3, "workload"))
    assert [render_sql(q) for q in a.queries] == [render_sql(q) for q in b.queries]


def test_queries_resolve_against_schema(small_warehouse, workload_params):
    wl = generate_workload(small_warehouse, workload_params, SeededRng(2, "workload"))
    columns = small_warehouse.columns()
    for q in wl.queries:
        check_structure(q)
        assert validate_against_schema(q, columns) == []
        assert parse_check(render_sql(q)) == q


def test_probability_extremes(small_warehouse):
    only_extract = generate_workload(small_warehouse, WorkloadParams(NB_Q=50, PROB_OLAP=0.0), SeededRng(0))
    assert set(only_extract.class_tags) == {QueryClass.EXTRACTION}
    assert not any(q.is_olap for q in only_extract.queries)
    all_cube = generate_workload(small_warehouse, WorkloadParams(NB_Q=50, PROB_OLAP=1.0, PROB_CUBE=1.0,
                                                                 PROB_HAVING=1.0), SeededRng(0))
    initial = [q for q, t in zip(all_cube.queries, all_cube.class_tags) if t is QueryClass.OLAP_INITIAL]
    assert len(initial) == len(all_cube.chains)
    assert all(q.group_by.operator is GroupOperator.CUBE and q.having is not None for q in initial)


def test_no_drill_downs_when_average_is_zero(small_warehouse):
    wl = generate_workload(small_warehouse, WorkloadParams(NB_Q=30, AVG_NB_DD=0), SeededRng(0))
    assert QueryClass.DRILL_DOWN not in wl.class_tags


def test_walk_joins_every_visited_level(small_warehouse, workload_params):
    # every selected level must be reachable: all tables between it and the fact are joined
    wl = generate_workload(small_warehouse, workload_params, SeededRng(4, "workload"))
    for q in wl.queries:
        for attr in q.attributes:
            table = attr.split(".")[0]
            level = small_warehouse.table(table)
            while level.finer is not None:
                level = level.finer
                assert level.table_name in q.tables


def test_aggregates_are_sums_over_fact_measures(small_warehouse, workload_params):
    wl = generate_workload(small_warehouse, workload_params, SeededRng(5, "workload"))
    for q in wl.queries:
        for a in q.aggregates:
            assert a.function == "SUM" and a.measure.startswith(q.tables[0] + ".")


def test_restriction_literals_match_attribute_kind(small_warehouse, workload_params):
    wl = generate_workload(small_warehouse, workload_params, SeededRng(6, "workload"))
    for q in wl.queries:
        for c in q.conditions:
            table, col = c.attribute.split(".")
            if col.endswith("_PK"):
                assert isinstance(c.value, int) and 1 <= c.value <= small_warehouse.table(table).cardinality
            else:
                assert isinstance(c.value, str) and c.value.startswith(col + "_")


def test_drill_down_chain(small_warehouse):
    wp = WorkloadParams(PROB_OLAP=1.0, AVG_NB_DD=5)
    rng = SeededRng(7)
    for _ in range(30):
        q, ctx = generate_initial_query(small_warehouse, wp, rng)
        chain = generate_drill_downs(q, ctx, wp, rng, spread=0.0)
        prev = q
        for dd in chain:
            assert dd.group_by.attributes[:-1] == prev.group_by.attributes
            added = dd.attributes[-1]
            owner = small_warehouse.table(added.split(".")[0])
            assert owner.depth < ctx.level.depth
            assert (dd.tables, dd.conditions, dd.joins, dd.aggregates) == (prev.tables, prev.conditions,
                                                                          prev.joins, prev.aggregates)
            prev = dd


def test_drill_down_rejects_extraction(small_warehouse):
    q, ctx = generate_initial_query(small_warehouse, WorkloadParams(PROB_OLAP=0.0), SeededRng(0))
    assert ctx is None
    with pytest.raises(WorkloadError):
        generate_drill_downs(q, ctx, WorkloadParams(), SeededRng(0))


def test_fact_without_measures_yields_extraction():
    wh, _ = generate_warehouse(uniform_low(nb_meas=0), 0)
    wl = generate_workload(wh, WorkloadParams(NB_Q=20, PROB_OLAP=1.0), SeededRng(0))
    assert set(wl.class_tags) == {QueryClass.EXTRACTION}


def test_level_without_descriptors_selects_its_key():
    wh, _ = generate_warehouse(uniform_low(nb_att=0), 0)
    wl = generate_workload(wh, WorkloadParams(NB_Q=20), SeededRng(0))
    assert all(a.endswith("_PK") for q in wl.queries for a in q.attributes)
    kinds = {a.kind for lv in wh.levels() for a in lv.intention}
    assert AttributeKind.DESCRIPTOR not in kinds


def test_extraction_only_hits_nb_q_exactly(small_warehouse):
    wl = generate_workload(small_warehouse, WorkloadParams(NB_Q=73, PROB_OLAP=0.0), SeededRng(9))
    assert len(wl) == 73


def test_default_workload_size_bound(small_warehouse):
    wl = generate_workload(small_warehouse, WorkloadParams(), SeededRng(10))
    longest = max((c.length for c in wl.chains), default=0)
    assert 100 <= len(wl) <= 100 + longest


def test_level_walk_on_single_dimension():
    wh, _ = generate_warehouse(uniform_low(nb_dims=1, levels=3, nb_att=1), 0)
    rng = SeededRng(11)
    seen_full_walk = False
    for _ in range(200):
        q, _ = generate_initial_query(wh, WorkloadParams(AVG_NB_ATT=1), rng, spread=0.0)
        depth = max(wh.table(a.split(".")[0]).depth for a in q.attributes)
        assert set(q.tables) == {"FT1", *(f"DIM1_{k}" for k in range(1, depth + 1))}
        assert len(q.joins) == depth
        seen_full_walk |= depth == 3
    assert seen_full_walk


def test_chain_from_finest_level_is_empty(small_warehouse):
    wp = WorkloadParams(PROB_OLAP=1.0, AVG_NB_DD=4)
    rng = SeededRng(12)
    found = 0
    for _ in range(100):
        q, ctx = generate_initial_query(small_warehouse, wp, rng)
        if ctx.level.depth == 1:
            found += 1
            assert generate_drill_downs(q, ctx, wp, rng) == []
    assert found
