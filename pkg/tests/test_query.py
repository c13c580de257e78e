import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwbench.query import (
    Aggregate,
    AttributeRef,
    GroupBy,
    GroupOperator,
    Having,
    Join,
    ParseError,
    Query,
    QueryStructureError,
    Restriction,
    check_structure,
    parse_check,
    render_sql,
    validate_against_schema,
)

OLAP = Query(
    attributes=("DIM1_1.DIM1_1_DESCR1",),
    aggregates=(Aggregate("SUM", "FT1.FT1_MEAS1", "AGG1"),),
    tables=("FT1", "DIM1_1"),
    conditions=(Restriction("DIM1_1.DIM1_1_DESCR1", "=", "DIM1_1_DESCR1_ABC"),),
    joins=(Join("FT1.DIM1_1_PK", "DIM1_1.DIM1_1_PK"),),
    group_by=GroupBy(GroupOperator.CUBE, ("DIM1_1.DIM1_1_DESCR1",)),
    having=Having("AGG1", ">=", 12.5),
)


def test_render_shape():
    sql = render_sql(OLAP)
    assert sql == (
        "SELECT DIM1_1.DIM1_1_DESCR1, SUM(FT1.FT1_MEAS1) AS AGG1 FROM FT1, DIM1_1 "
        "WHERE DIM1_1.DIM1_1_DESCR1 = 'DIM1_1_DESCR1_ABC' AND FT1.DIM1_1_PK = DIM1_1.DIM1_1_PK "
        "GROUP BY CUBE(DIM1_1.DIM1_1_DESCR1) HAVING AGG1 >= 12.5"
    )


def test_round_trip_olap_and_rollup():
    assert parse_check(render_sql(OLAP)) == OLAP
    from dataclasses import replace

    q = replace(OLAP, group_by=GroupBy(GroupOperator.ROLLUP, OLAP.group_by.attributes), having=None)
    assert parse_check(render_sql(q)) == q


def test_extraction_without_where():
    q = Query(attributes=("T.A",), tables=("T",))
    assert render_sql(q) == "SELECT T.A FROM T"
    assert parse_check("select T.A from T;") == q


def test_quote_doubling():
    q = Query(attributes=("T.A",), tables=("T",), conditions=(Restriction("T.A", "<>", "it's"),))
    assert "'it''s'" in render_sql(q)
    assert parse_check(render_sql(q)) == q


def test_case_insensitive_keywords():
    q = parse_check("select T.A, sum(T.M) as AGG1 from T group by rollup(T.A) having AGG1 > 3")
    assert q.group_by.operator is GroupOperator.ROLLUP and q.having.value == 3


@pytest.mark.parametrize(
    "sql,fragment",
    [
        ("SELECT FROM T", "position"),
        ("SELECT T.A FROM", "position"),
        ("SELECT T.A FROM T WHERE", "position"),
        ("SELECT T.A FROM T GROUP T.A", "BY"),
        ("SELECT T.A FROM T extra", "position"),
    ],
)
def test_parse_errors_report_position(sql, fragment):
    with pytest.raises(ParseError) as err:
        parse_check(sql)
    assert fragment in str(err.value)


@pytest.mark.parametrize(
    "query,message",
    [
        (Query(tables=("T",)), "select list"),
        (Query(attributes=("T.A",), tables=("T", "T")), "twice"),
        (Query(attributes=("T.A",), tables=("T",), having=Having("AGG1", ">", 1)), "HAVING requires"),
        (Query(attributes=("T.A",), tables=("T",), group_by=GroupBy(GroupOperator.CUBE, ("T.A",))), "aggregate"),
        (Query(attributes=("U.A",), tables=("T",)), "outside"),
        (Query(attributes=("T.A",), tables=("T", "U")), "does not reach"),
        (Query(aggregates=(Aggregate("AVG", "T.M", "AGG1"),), tables=("T",)), "unsupported"),
    ],
)
def test_structure_rules(query, message):
    with pytest.raises(QueryStructureError, match=message):
        check_structure(query)


def test_attribute_equality_parses_as_join():
    q = parse_check("SELECT T.A FROM T, U WHERE T.K = U.K AND T.A = 1")
    assert q.joins == (Join("T.K", "U.K"),)
    assert q.conditions == (Restriction("T.A", "=", 1),)


def test_attribute_comparison_other_than_equality_is_a_condition():
    q = parse_check("SELECT T.A FROM T, U WHERE T.K = U.K AND T.A < U.B")
    assert q.conditions == (Restriction("T.A", "<", AttributeRef("U.B")),)


def test_schema_resolution():
    columns = {"FT1": {"FT1_MEAS1", "DIM1_1_PK"}, "DIM1_1": {"DIM1_1_PK"}}
    assert validate_against_schema(OLAP, columns) == ["DIM1_1.DIM1_1_DESCR1"] * 3


names = st.from_regex(r"[A-Z][A-Z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in {"SELECT", "FROM", "WHERE", "AND", "GROUP", "BY", "CUBE", "ROLLUP", "HAVING", "AS", "SUM"}
)
literals = st.one_of(
    st.integers(-10**6, 10**6),
    st.floats(-1e6, 1e6, allow_nan=False).map(lambda x: round(x, 2)),
    st.text("ABC' xyz_0", max_size=8),
)


@given(
    cols=st.lists(names, min_size=1, max_size=4, unique=True),
    n_agg=st.integers(0, 3),
    lits=st.lists(literals, max_size=3),
    op=st.sampled_from(["=", "<>", "<", "<=", ">", ">="]),
    group=st.sampled_from(list(GroupOperator)),
    with_having=st.booleans(),
)
@settings(max_examples=150, deadline=None)
def test_round_trip_property(cols, n_agg, lits, op, group, with_having):
    attrs = tuple(f"T.{c}" for c in cols)
    aggs = tuple(Aggregate("SUM", "F.M", f"AGG{k}") for k in range(1, n_agg + 1))
    conditions = tuple(Restriction(attrs[i % len(attrs)], op, v) for i, v in enumerate(lits))
    grouped = n_agg > 0
    q = Query(
        attributes=attrs,
        aggregates=aggs,
        tables=("F", "T"),
        conditions=conditions,
        joins=(Join("F.K", "T.K"),),
        group_by=GroupBy(group, attrs) if grouped else None,
        having=Having("AGG1", ">=", 1.5) if grouped and with_having else None,
    )
    assert parse_check(render_sql(q)) == q
