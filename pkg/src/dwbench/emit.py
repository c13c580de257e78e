"""Serialisation of a generated warehouse and workload.

Output directory layout::

    schema.sql          CREATE TABLE statements, coarsest levels first, facts last
    data/{table}.csv    header + rows, comma separated, LF line ends
    inserts.sql         optional INSERT script mirroring the CSV files
    workload.sql        one ``-- Q{n} [TAG]`` comment and one statement per query
    manifest.txt        effective configuration, sizes and SHA-256 checksums
"""

from __future__ import annotations

import csv
import hashlib
import re
from pathlib import Path

from . import __version__
from .config import RunConfig, high_level_lines, low_level_lines, settings_lines, workload_lines
from .model import AttributeKind, FactTable, HierarchyLevel, Warehouse
from .query import render_sql
from .schema import SizeReport, descriptor_width
from .workload import QueryClass, Workload

DIALECTS = {
    "generic": {"int": "INTEGER", "real": "REAL", "char": "CHAR({n})"},
    "sqlite": {"int": "INTEGER", "real": "REAL", "char": "CHAR({n})"},
    "postgres": {"int": "INTEGER", "real": "REAL", "char": "CHAR({n})"},
    "duckdb": {"int": "INTEGER", "real": "FLOAT", "char": "VARCHAR({n})"},
    "oracle": {"int": "NUMBER(10)", "real": "BINARY_FLOAT", "char": "CHAR({n})"},
}

SCHEMA_FILE = "schema.sql"
DATA_DIR = "data"
INSERTS_FILE = "inserts.sql"
WORKLOAD_FILE = "workload.sql"
MANIFEST_FILE = "manifest.txt"


class EmitError(OSError):
    pass


def _column_type(attr, types: dict[str, str]) -> str:
    if attr.is_key:
        return types["int"]
    if attr.kind is AttributeKind.MEASURE:
        return types["real"]
    return types["char"].format(n=descriptor_width(attr.name))


def emit_ddl(wh: Warehouse, dialect: str = "generic") -> str:
    try:
        types = DIALECTS[dialect]
    except KeyError:
        raise ValueError(f"unknown dialect {dialect!r}; known: {', '.join(DIALECTS)}") from None
    statements = []
    for t in wh.tables():
        cols = [f"  {a.name} {_column_type(a, types)}{' NOT NULL' if a.is_key else ''}" for a in t.intention]
        if isinstance(t, FactTable):
            pk_cols = [a.name for a in t.foreign_keys]
        else:
            pk_cols = [t.primary_key.name]
        cols.append(f"  PRIMARY KEY ({', '.join(pk_cols)})")
        for a in t.intention:
            if a.kind is AttributeKind.FOREIGN_KEY:
                cols.append(f"  FOREIGN KEY ({a.name}) REFERENCES {a.target_table} ({a.name})")
        statements.append(f"CREATE TABLE {t.table_name} (\n" + ",\n".join(cols) + "\n);\n")
    return "\n".join(statements)


def _text_rows(t: HierarchyLevel | FactTable):
    if isinstance(t, FactTable):
        keys = t.keys.tolist()
        measures = [[f"{v:.2f}" for v in row] for row in t.measures.tolist()]
        for k, m in zip(keys, measures):
            yield [str(x) for x in k] + m
    else:
        for row in t.extension:
            yield [str(v) for v in row]


def emit_data_csv(wh: Warehouse, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    paths = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for t in wh.tables():
            path = directory / f"{t.table_name}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, delimiter=",", quotechar='"', quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
                writer.writerow([a.name for a in t.intention])
                writer.writerows(_text_rows(t))
            paths.append(path)
    except OSError as exc:
        raise EmitError(f"cannot write CSV data under {directory}: {exc}") from exc
    return paths


def _sql_value(attr, text: str) -> str:
    if attr.kind is AttributeKind.DESCRIPTOR:
        return "'" + text.replace("'", "''") + "'"
    return text


def emit_insert_sql(wh: Warehouse, path: str | Path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for t in wh.tables():
                cols = ", ".join(a.name for a in t.intention)
                prefix = f"INSERT INTO {t.table_name} ({cols}) VALUES ("
                for row in _text_rows(t):
                    fh.write(prefix + ", ".join(_sql_value(a, v) for a, v in zip(t.intention, row)) + ");\n")
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc}") from exc
    return path


def render_workload_sql(workload: Workload) -> str:
    parts = []
    for n, (q, tag) in enumerate(zip(workload.queries, workload.class_tags), start=1):
        parts.append(f"-- Q{n} [{tag.value}]\n{render_sql(q)};\n")
    return "".join(parts)


def emit_workload_sql(workload: Workload, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.write_text(render_workload_sql(workload), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc}") from exc
    return path


_TAG_RE = re.compile(r"^--\s*Q(\d+)\s*\[(\w+)\]\s*$")


def read_workload_sql(path: str | Path) -> list[tuple[int, QueryClass, str]]:
    """``(number, tag, statement)`` triples; statements lose their trailing ``;``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EmitError(f"cannot read workload {path}: {exc}") from exc
    out = []
    header = None
    buf: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _TAG_RE.match(line.strip())
        if m:
            if buf:
                raise ValueError(f"{path}:{lineno}: statement before it is not ';'-terminated")
            header = (int(m.group(1)), QueryClass(m.group(2)))
            continue
        if not line.strip() or line.lstrip().startswith("--"):
            continue
        buf.append(line.strip())
        if line.rstrip().endswith(";"):
            if header is None:
                raise ValueError(f"{path}:{lineno}: statement without a '-- Q<n> [TAG]' line")
            out.append((header[0], header[1], " ".join(buf)[:-1].rstrip()))
            buf = []
            header = None
    if buf:
        raise ValueError(f"{path}: trailing statement is not ';'-terminated")
    return out


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def checksums(paths: list[Path], root: Path) -> dict[str, str]:
    return {p.relative_to(root).as_posix(): sha256_file(p) for p in sorted(paths)}


def emit_manifest(
    wh: Warehouse,
    workload: Workload,
    size: SizeReport,
    paths: list[Path],
    path: str | Path,
    config: RunConfig,
) -> Path:
    """Write the effective configuration plus sizes and artifact checksums.

    The main section is itself a valid low-level configuration: feeding the
    manifest back as ``--config`` regenerates identical artifacts.
    """
    path = Path(path)
    root = path.parent
    lines = [f"# warehouse benchmark manifest (dwbench {__version__})", ""]
    lines += settings_lines(config)
    lines += low_level_lines(wh.low_level)
    lines += workload_lines(workload.params)
    lines += ["", "[source]"]
    if config.high is not None:
        lines.append("MODE = high-level")
        lines += high_level_lines(config.high)
    else:
        lines.append("MODE = low-level")
    lines += ["", "[size]", f"WAREHOUSE_MEGABYTES = {size.warehouse_megabytes!r}", f"TOTAL_BYTES = {size.total_bytes}"]
    for name, t in size.per_table.items():
        lines.append(f"{name} = {t.row_count} rows x {t.row_bytes} bytes")
    lines += ["", "[meta]", f"TOOL_VERSION = {__version__}", f"QUERIES = {len(workload)}"]
    lines += ["", "[checksums]"]
    lines += [f"{rel} = {digest}" for rel, digest in checksums(paths, root).items()]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc}") from exc
    return path


def emit_all(wh: Warehouse, workload: Workload, size: SizeReport, out: str | Path, config: RunConfig) -> dict[str, Path]:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / SCHEMA_FILE).write_text(emit_ddl(wh, config.dialect), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise EmitError(f"cannot write into {out}: {exc}") from exc
    paths = [out / SCHEMA_FILE]
    if config.emit_csv:
        paths += emit_data_csv(wh, out / DATA_DIR)
    if config.emit_inserts:
        paths.append(emit_insert_sql(wh, out / INSERTS_FILE))
    paths.append(emit_workload_sql(workload, out / WORKLOAD_FILE))
    manifest = emit_manifest(wh, workload, size, paths, out / MANIFEST_FILE, config)
    return {"manifest": manifest, **{p.relative_to(out).as_posix(): p for p in paths}}


def verify_manifest(out: str | Path) -> list[str]:
    """Relative paths whose checksum no longer matches the manifest."""
    from .config import read_file

    out = Path(out)
    parsed = read_file(out / MANIFEST_FILE)
    bad = []
    for rel, digest in parsed.sections.get("checksums", {}).items():
        p = out / rel
        if not p.exists() or sha256_file(p) != digest:
            bad.append(rel)
    return bad
