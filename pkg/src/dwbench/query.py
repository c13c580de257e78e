"""Decision-support query AST, SQL rendering and a parser for the same subset.

The accepted language::

    query      := SELECT select_list FROM table_list
                  [WHERE predicate (AND predicate)*]
                  [GROUP BY [CUBE | ROLLUP] ( attr_list ) | GROUP BY attr_list
                   [HAVING having]]
    select     := attr | SUM ( attr ) [AS alias]
    predicate  := attr = attr                      -- join
                | attr op (literal | attr)          -- restriction
    having     := (alias | SUM ( attr )) op literal
    op         := = | <> | < | <= | > | >=

An equality between two attribute names is always read as a join; every
other predicate is a restriction. Restrictions are rendered before joins.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Union

COMPARISON_OPS = ("=", "<>", "<=", ">=", "<", ">")
KEYWORDS = {"SELECT", "FROM", "WHERE", "AND", "GROUP", "BY", "CUBE", "ROLLUP", "HAVING", "AS", "SUM"}
AGGREGATE_FUNCTIONS = ("SUM",)


class QueryStructureError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected: frozenset[str] = frozenset()):
        self.position = position
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class GroupOperator(enum.Enum):
    NONE = "NONE"
    CUBE = "CUBE"
    ROLLUP = "ROLLUP"


@dataclass(frozen=True)
class AttributeRef:
    """Attribute used as the right operand of a restriction."""

    name: str


Literal = Union[str, int, float]


@dataclass(frozen=True)
class Aggregate:
    function: str
    measure: str
    alias: str | None = None


@dataclass(frozen=True)
class Restriction:
    attribute: str
    op: str
    value: Literal | AttributeRef


@dataclass(frozen=True)
class Join:
    left: str
    right: str


@dataclass(frozen=True)
class GroupBy:
    operator: GroupOperator
    attributes: tuple[str, ...]


@dataclass(frozen=True)
class Having:
    target: str | Aggregate  # alias, or an un-aliased aggregate call
    op: str
    value: Literal


@dataclass(frozen=True)
class Query:
    attributes: tuple[str, ...] = ()
    aggregates: tuple[Aggregate, ...] = ()
    tables: tuple[str, ...] = ()
    conditions: tuple[Restriction, ...] = ()
    joins: tuple[Join, ...] = ()
    group_by: GroupBy | None = None
    having: Having | None = None

    @property
    def is_olap(self) -> bool:
        return self.group_by is not None


def _table_of(name: str) -> str:
    if "." not in name:
        raise QueryStructureError(f"attribute {name!r} is not qualified by a table")
    return name.split(".", 1)[0]


def check_structure(q: Query) -> None:
    """Raise :class:`QueryStructureError` naming the first violated rule."""
    if not q.attributes and not q.aggregates:
        raise QueryStructureError("select list is empty: need attributes or aggregates")
    if not q.tables:
        raise QueryStructureError("table clause is empty")
    if len(set(q.tables)) != len(q.tables):
        raise QueryStructureError("table clause lists a table twice")
    if q.having is not None and q.group_by is None:
        raise QueryStructureError("HAVING requires GROUP BY")
    if q.group_by is not None and not q.aggregates:
        raise QueryStructureError("GROUP BY requires at least one aggregate")
    tables = set(q.tables)
    referenced = list(q.attributes)
    referenced += [a.measure for a in q.aggregates]
    referenced += [c.attribute for c in q.conditions]
    referenced += [c.value.name for c in q.conditions if isinstance(c.value, AttributeRef)]
    referenced += [n for j in q.joins for n in (j.left, j.right)]
    if q.group_by is not None:
        referenced += list(q.group_by.attributes)
    if q.having is not None and isinstance(q.having.target, Aggregate):
        referenced.append(q.having.target.measure)
    for name in referenced:
        if _table_of(name) not in tables:
            raise QueryStructureError(f"attribute {name} references a table outside the table clause")
    for a in q.aggregates:
        if a.function not in AGGREGATE_FUNCTIONS:
            raise QueryStructureError(f"unsupported aggregate function {a.function}")
    aliases = [a.alias for a in q.aggregates if a.alias is not None]
    if len(set(aliases)) != len(aliases):
        raise QueryStructureError("duplicate aggregate alias")
    if q.having is not None and isinstance(q.having.target, str) and q.having.target not in aliases:
        raise QueryStructureError(f"HAVING references unknown alias {q.having.target}")
    for op in [c.op for c in q.conditions] + ([q.having.op] if q.having else []):
        if op not in COMPARISON_OPS:
            raise QueryStructureError(f"unsupported comparison operator {op!r}")
    for c in q.conditions:
        if c.op == "=" and isinstance(c.value, AttributeRef):
            raise QueryStructureError("attribute equality belongs in the join clause")
    # join graph must connect every table to the first one
    adjacency: dict[str, set[str]] = {t: set() for t in q.tables}
    for j in q.joins:
        a, b = _table_of(j.left), _table_of(j.right)
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen = {q.tables[0]}
    stack = [q.tables[0]]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if seen != tables:
        missing = ", ".join(t for t in q.tables if t not in seen)
        raise QueryStructureError(f"join graph does not reach: {missing}")


def render_literal(value: Literal) -> str:
    if isinstance(value, bool):
        raise QueryStructureError("boolean literals are not supported")
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _render_operand(value) -> str:
    return value.name if isinstance(value, AttributeRef) else render_literal(value)


def _render_aggregate(a: Aggregate) -> str:
    text = f"{a.function}({a.measure})"
    return f"{text} AS {a.alias}" if a.alias else text


def render_sql(q: Query) -> str:
    check_structure(q)
    parts = ["SELECT " + ", ".join([*q.attributes, *(_render_aggregate(a) for a in q.aggregates)])]
    parts.append("FROM " + ", ".join(q.tables))
    predicates = [f"{c.attribute} {c.op} {_render_operand(c.value)}" for c in q.conditions]
    predicates += [f"{j.left} = {j.right}" for j in q.joins]
    if predicates:
        parts.append("WHERE " + " AND ".join(predicates))
    if q.group_by is not None:
        cols = ", ".join(q.group_by.attributes)
        if q.group_by.operator is GroupOperator.NONE:
            parts.append(f"GROUP BY {cols}")
        else:
            parts.append(f"GROUP BY {q.group_by.operator.value}({cols})")
    if q.having is not None:
        target = q.having.target if isinstance(q.having.target, str) else _render_aggregate(q.having.target)
        parts.append(f"HAVING {target} {q.having.op} {render_literal(q.having.value)}")
    return " ".join(parts)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)
  | (?P<op><>|<=|>=|=|<|>)
  | (?P<punct>[(),;])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str  # keyword, name, string, number, op, punct, end
    text: str
    pos: int


def _tokenize(sql: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(sql):
        m = _TOKEN_RE.match(sql, pos)
        if m is None:
            raise ParseError(f"unexpected character {sql[pos]!r}", pos)
        kind = m.lastgroup
        text = m.group()
        if kind == "name" and text.upper() in KEYWORDS:
            tokens.append(_Token("keyword", text.upper(), pos))
        elif kind != "ws":
            tokens.append(_Token(kind, text, pos))
        pos = m.end()
    tokens.append(_Token("end", "", pos))
    return tokens


@dataclass
class _Parser:
    tokens: list[_Token]
    i: int = 0
    aliases: set[str] = field(default_factory=set)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> _Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def fail(self, message: str, *expected: str):
        raise ParseError(message, self.tok.pos, frozenset(expected))

    def accept_keyword(self, word: str) -> bool:
        if self.tok.kind == "keyword" and self.tok.text == word:
            self.i += 1
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.accept_keyword(word):
            self.fail(f"unexpected {self.tok.text or 'end of input'!r}", word)

    def expect_punct(self, ch: str) -> None:
        if self.tok.kind == "punct" and self.tok.text == ch:
            self.i += 1
        else:
            self.fail(f"unexpected {self.tok.text or 'end of input'!r}", ch)

    def accept_punct(self, ch: str) -> bool:
        if self.tok.kind == "punct" and self.tok.text == ch:
            self.i += 1
            return True
        return False

    def name(self, what: str) -> str:
        if self.tok.kind != "name":
            self.fail(f"expected {what}, got {self.tok.text or 'end of input'!r}", what)
        text = self.tok.text
        self.i += 1
        return text

    def qualified(self) -> str:
        if self.tok.kind != "name" or "." not in self.tok.text:
            self.fail(f"expected qualified attribute, got {self.tok.text or 'end of input'!r}", "table.attribute")
        return self.name("table.attribute")

    def op(self) -> str:
        if self.tok.kind != "op":
            self.fail(f"expected comparison operator, got {self.tok.text or 'end of input'!r}", *COMPARISON_OPS)
        text = self.tok.text
        self.i += 1
        return text

    def literal(self) -> Literal:
        t = self.tok
        if t.kind == "string":
            self.i += 1
            return t.text[1:-1].replace("''", "'")
        if t.kind == "number":
            self.i += 1
            if re.fullmatch(r"[+-]?\d+", t.text):
                return int(t.text)
            return float(t.text)
        self.fail(f"expected literal, got {t.text or 'end of input'!r}", "string", "number")

    def aggregate_call(self) -> Aggregate:
        self.expect_keyword("SUM")
        self.expect_punct("(")
        measure = self.qualified()
        self.expect_punct(")")
        return Aggregate("SUM", measure)

    def select_list(self) -> tuple[list[str], list[Aggregate]]:
        attributes: list[str] = []
        aggregates: list[Aggregate] = []
        while True:
            if self.tok.kind == "keyword" and self.tok.text == "SUM":
                agg = self.aggregate_call()
                if self.accept_keyword("AS"):
                    agg = Aggregate(agg.function, agg.measure, self.name("alias"))
                aggregates.append(agg)
            elif self.tok.kind == "name":
                if aggregates:
                    self.fail("attributes must precede aggregates in the select list", "SUM")
                attributes.append(self.qualified())
            else:
                self.fail(f"expected select item, got {self.tok.text or 'end of input'!r}", "table.attribute", "SUM")
            if not self.accept_punct(","):
                return attributes, aggregates

    def predicate(self, conditions: list[Restriction], joins: list[Join]) -> None:
        left = self.qualified()
        op = self.op()
        if self.tok.kind == "name":
            right = self.qualified()
            if op == "=":
                joins.append(Join(left, right))
            else:
                conditions.append(Restriction(left, op, AttributeRef(right)))
        else:
            conditions.append(Restriction(left, op, self.literal()))

    def attr_list(self) -> tuple[str, ...]:
        out = [self.qualified()]
        while self.accept_punct(","):
            out.append(self.qualified())
        return tuple(out)

    def query(self) -> Query:
        self.expect_keyword("SELECT")
        attributes, aggregates = self.select_list()
        self.expect_keyword("FROM")
        tables = [self.name("table name")]
        while self.accept_punct(","):
            tables.append(self.name("table name"))
        for t in tables:
            if "." in t:
                self.fail(f"table name {t!r} must not be qualified")
        conditions: list[Restriction] = []
        joins: list[Join] = []
        if self.accept_keyword("WHERE"):
            self.predicate(conditions, joins)
            while self.accept_keyword("AND"):
                self.predicate(conditions, joins)
        group_by = None
        having = None
        if self.accept_keyword("GROUP"):
            self.expect_keyword("BY")
            if self.accept_keyword("CUBE"):
                operator = GroupOperator.CUBE
            elif self.accept_keyword("ROLLUP"):
                operator = GroupOperator.ROLLUP
            else:
                operator = GroupOperator.NONE
            if operator is GroupOperator.NONE:
                cols = self.attr_list()
            else:
                self.expect_punct("(")
                cols = self.attr_list()
                self.expect_punct(")")
            group_by = GroupBy(operator, cols)
            if self.accept_keyword("HAVING"):
                if self.tok.kind == "keyword" and self.tok.text == "SUM":
                    target: str | Aggregate = self.aggregate_call()
                else:
                    target = self.name("alias")
                having = Having(target, self.op(), self.literal())
        self.accept_punct(";")
        if self.tok.kind != "end":
            self.fail(f"unexpected trailing {self.tok.text!r}", "end of input")
        return Query(
            attributes=tuple(attributes),
            aggregates=tuple(aggregates),
            tables=tuple(tables),
            conditions=tuple(conditions),
            joins=tuple(joins),
            group_by=group_by,
            having=having,
        )


def parse_check(sql: str) -> Query:
    """Parse one statement of the supported subset and check its structure.

    Raises :class:`ParseError` for syntax errors and
    :class:`QueryStructureError` for well-formed text that breaks a query rule.
    """
    q = _Parser(_tokenize(sql)).query()
    check_structure(q)
    return q


def validate_against_schema(q: Query, columns: dict[str, set[str]]) -> list[str]:
    """Names in ``q`` that do not exist in the schema (``table -> column names``)."""
    problems = [t for t in q.tables if t not in columns]
    names = list(q.attributes) + [a.measure for a in q.aggregates]
    names += [c.attribute for c in q.conditions] + [n for j in q.joins for n in (j.left, j.right)]
    if q.group_by is not None:
        names += list(q.group_by.attributes)
    for name in names:
        table, col = name.split(".", 1)
        if col not in columns.get(table, ()):
            problems.append(name)
    return problems
