"""``KEY = value`` configuration files, run configuration and manifests.

One pair per line, ``#`` starts a comment, ``[name]`` opens a section. Only
the leading (unnamed) section is configuration; manifests append ``[source]``,
``[size]``, ``[meta]`` and ``[checksums]`` sections that loaders keep apart.

List values are comma separated. Per-level ``NB_ATT`` and per-fact ``FT_DIMS``
take ``;``-separated rows. A single value is broadcast to every fact table,
dimension or level it applies to.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .params import HighLevelParams, LowLevelParams, WorkloadParams, check
from .rng import DEFAULT_MEASURE_RANGE, DEFAULT_REFERENTIAL_SIZE, parse_seed
from .schema import DEFAULT_MAX_ROWS, DEFAULT_STREAMING_THRESHOLD, GenerationSettings


class ConfigError(ValueError):
    pass


HIGH_KEYS = tuple(f.name for f in fields(HighLevelParams))
LOW_KEYS = tuple(f.name for f in fields(LowLevelParams))
# AVG_NB_ATT exists in both the warehouse and the workload families
WORKLOAD_KEYS = {
    "NB_Q": "NB_Q",
    "WL_AVG_NB_ATT": "AVG_NB_ATT",
    "AVG_NB_RESTR": "AVG_NB_RESTR",
    "PROB_OLAP": "PROB_OLAP",
    "AVG_NB_AGGREG": "AVG_NB_AGGREG",
    "PROB_CUBE": "PROB_CUBE",
    "PROB_HAVING": "PROB_HAVING",
    "AVG_NB_DD": "AVG_NB_DD",
}
DERIVED_KEYS = {"PROB_EXTRACT": "PROB_OLAP", "PROB_ROLLUP": "PROB_CUBE"}
SETTING_KEYS = (
    "SEED",
    "SPREAD",
    "REFERENTIAL_SIZE",
    "MEASURE_MIN",
    "MEASURE_MAX",
    "MAX_ROWS",
    "STREAMING_THRESHOLD",
    "EMIT_CSV",
    "EMIT_INSERTS",
    "DIALECT",
)
ALL_KEYS = frozenset(HIGH_KEYS) | frozenset(LOW_KEYS) | frozenset(WORKLOAD_KEYS) | frozenset(SETTING_KEYS)

DEFAULT_SEED = 0


@dataclass
class ParsedFile:
    values: dict[str, str] = field(default_factory=dict)
    sections: dict[str, dict[str, str]] = field(default_factory=dict)


def parse_text(text: str, source: str = "<config>") -> ParsedFile:
    parsed = ParsedFile()
    current = parsed.values
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = parsed.sections.setdefault(line[1:-1].strip(), {})
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected KEY = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if current is parsed.values:
            key = key.upper()
            if key in DERIVED_KEYS:
                raise ConfigError(f"{source}:{lineno}: {key} is derived as 1 - {DERIVED_KEYS[key]}; set that instead")
            if key not in ALL_KEYS:
                raise ConfigError(f"{source}:{lineno}: unknown key {key}")
        current[key] = value
    return parsed


def read_file(path: str | Path) -> ParsedFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_text(text, str(path))


def _number(text: str, key: str, integral: bool):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: {text!r} is not a number") from None
    if integral:
        if not value.is_integer():
            raise ConfigError(f"{key}: {text!r} must be an integer")
        return int(value)
    return value


def _list(text: str, key: str, integral: bool) -> list:
    return [_number(x.strip(), key, integral) for x in text.split(",") if x.strip()]


def _broadcast(values: list, n: int, key: str) -> tuple:
    if len(values) == 1:
        return tuple(values * n)
    if len(values) != n:
        raise ConfigError(f"{key}: expected 1 or {n} values, got {len(values)}")
    return tuple(values)


def _bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: {text!r} is not a boolean")


def build_low_level(raw: dict[str, str]) -> LowLevelParams:
    """Low-level parameters from raw strings; missing keys take the zero-variance defaults."""
    high = HighLevelParams()
    nb_dim_list = _list(raw["NB_DIM"], "NB_DIM", True) if "NB_DIM" in raw else None
    nb_ft = _number(raw["NB_FT"], "NB_FT", True) if "NB_FT" in raw else max(1, len(nb_dim_list or [1]))
    if "TOT_NB_DIM" in raw:
        tot = _number(raw["TOT_NB_DIM"], "TOT_NB_DIM", True)
    else:
        tot = max(nb_dim_list) if nb_dim_list else int(high.AVG_TOT_NB_DIM)
    nb_dim = _broadcast(nb_dim_list or [tot], nb_ft, "NB_DIM")
    nb_meas = _broadcast(_list(raw.get("NB_MEAS", str(int(high.AVG_NB_MEAS))), "NB_MEAS", True), nb_ft, "NB_MEAS")
    density = _broadcast(_list(raw.get("DENSITY", str(high.AVG_DENSITY)), "DENSITY", False), nb_ft, "DENSITY")
    nb_levels = _broadcast(_list(raw.get("NB_LEVELS", str(int(high.AVG_NB_LEVELS))), "NB_LEVELS", True), tot, "NB_LEVELS")
    hh = _broadcast(_list(raw.get("HHLEVEL_SIZE", str(int(high.AVG_HHLEVEL_SIZE))), "HHLEVEL_SIZE", True), tot, "HHLEVEL_SIZE")
    sf = _broadcast(_list(raw.get("DIM_SFACTOR", str(high.DIM_SFACTOR)), "DIM_SFACTOR", False), tot, "DIM_SFACTOR")
    att_text = raw.get("NB_ATT", str(int(high.AVG_NB_ATT)))
    if ";" in att_text:
        rows = [r for r in att_text.split(";")]
        if len(rows) != tot:
            raise ConfigError(f"NB_ATT: expected {tot} rows, got {len(rows)}")
        nb_att = tuple(_broadcast(_list(r, "NB_ATT", True), nb_levels[d], f"NB_ATT[{d + 1}]") for d, r in enumerate(rows))
    else:
        per_dim = _broadcast(_list(att_text, "NB_ATT", True), tot, "NB_ATT")
        nb_att = tuple((per_dim[d],) * nb_levels[d] for d in range(tot))
    ft_dims = None
    if "FT_DIMS" in raw:
        rows = raw["FT_DIMS"].split(";")
        if len(rows) != nb_ft:
            raise ConfigError(f"FT_DIMS: expected {nb_ft} rows, got {len(rows)}")
        ft_dims = tuple(tuple(_list(r, "FT_DIMS", True)) for r in rows)
    low = LowLevelParams(
        NB_FT=nb_ft,
        NB_DIM=nb_dim,
        TOT_NB_DIM=tot,
        NB_MEAS=nb_meas,
        DENSITY=density,
        NB_LEVELS=nb_levels,
        NB_ATT=nb_att,
        HHLEVEL_SIZE=hh,
        DIM_SFACTOR=sf,
        FT_DIMS=ft_dims,
    )
    check(low)
    return low


@dataclass
class RunConfig:
    high: HighLevelParams | None = None
    low: LowLevelParams | None = None
    workload: WorkloadParams = field(default_factory=WorkloadParams)
    seed: int = DEFAULT_SEED
    spread: float = 0.1
    referential_size: int = DEFAULT_REFERENTIAL_SIZE
    measure_range: tuple[float, float] = DEFAULT_MEASURE_RANGE
    max_rows: int = DEFAULT_MAX_ROWS
    streaming_threshold: int = DEFAULT_STREAMING_THRESHOLD
    emit_csv: bool = True
    emit_inserts: bool = False
    dialect: str = "generic"

    def __post_init__(self):
        if (self.high is None) == (self.low is None):
            raise ConfigError("exactly one of high-level and low-level parameters must be active")

    @property
    def params(self) -> HighLevelParams | LowLevelParams:
        return self.high if self.high is not None else self.low

    @property
    def settings(self) -> GenerationSettings:
        return GenerationSettings(
            spread=self.spread,
            referential_size=self.referential_size,
            measure_range=self.measure_range,
            max_rows=self.max_rows,
            streaming_threshold=self.streaming_threshold,
        )


def build_run_config(raw: dict[str, str]) -> RunConfig:
    unknown = set(raw) - ALL_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    # DIM_SFACTOR names a field of both families; it follows whichever mode the other keys select
    high_given = [k for k in HIGH_KEYS if k in raw and k != "DIM_SFACTOR"]
    low_given = [k for k in LOW_KEYS if k in raw and k != "DIM_SFACTOR"]
    if high_given and low_given:
        raise ConfigError(
            f"high-level ({', '.join(high_given)}) and low-level ({', '.join(low_given)}) parameters cannot be mixed"
        )
    if low_given:
        high, low = None, build_low_level(raw)
    else:
        high = HighLevelParams(**{k: _number(raw[k], k, False) for k in HIGH_KEYS if k in raw})
        check(high)
        low = None
    wl_defaults = WorkloadParams()
    wl_values = {}
    for key, name in WORKLOAD_KEYS.items():
        if key in raw:
            wl_values[name] = _number(raw[key], key, name == "NB_Q")
    workload = WorkloadParams(**{**wl_defaults.__dict__, **wl_values})
    check(workload)
    lo = _number(raw.get("MEASURE_MIN", str(DEFAULT_MEASURE_RANGE[0])), "MEASURE_MIN", False)
    hi = _number(raw.get("MEASURE_MAX", str(DEFAULT_MEASURE_RANGE[1])), "MEASURE_MAX", False)
    if not lo < hi:
        raise ConfigError("MEASURE_MIN must be below MEASURE_MAX")
    spread = _number(raw.get("SPREAD", "0.1"), "SPREAD", False)
    if spread < 0:
        raise ConfigError("SPREAD must be >= 0")
    try:
        seed = parse_seed(raw.get("SEED", str(DEFAULT_SEED)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(
        high=high,
        low=low,
        workload=workload,
        seed=seed,
        spread=spread,
        referential_size=_number(raw.get("REFERENTIAL_SIZE", str(DEFAULT_REFERENTIAL_SIZE)), "REFERENTIAL_SIZE", True),
        measure_range=(lo, hi),
        max_rows=_number(raw.get("MAX_ROWS", str(DEFAULT_MAX_ROWS)), "MAX_ROWS", True),
        streaming_threshold=_number(
            raw.get("STREAMING_THRESHOLD", str(DEFAULT_STREAMING_THRESHOLD)), "STREAMING_THRESHOLD", True
        ),
        emit_csv=_bool(raw.get("EMIT_CSV", "true"), "EMIT_CSV"),
        emit_inserts=_bool(raw.get("EMIT_INSERTS", "false"), "EMIT_INSERTS"),
        dialect=raw.get("DIALECT", "generic").lower(),
    )
    if cfg.referential_size < 1:
        raise ConfigError("REFERENTIAL_SIZE must be >= 1")
    return cfg


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # integral floats print as integers so a manifest re-reads to identical text
        return str(int(value)) if value.is_integer() and abs(value) < 1e15 else repr(value)
    if isinstance(value, (tuple, list)):
        if value and isinstance(value[0], (tuple, list)):
            return "; ".join(_fmt(v) for v in value)
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def low_level_lines(low: LowLevelParams) -> list[str]:
    return [f"{name} = {_fmt(getattr(low, name))}" for name in LOW_KEYS if getattr(low, name) is not None]


def high_level_lines(high: HighLevelParams) -> list[str]:
    return [f"{name} = {_fmt(getattr(high, name))}" for name in HIGH_KEYS]


def workload_lines(wp: WorkloadParams) -> list[str]:
    return [f"{key} = {_fmt(getattr(wp, name))}" for key, name in WORKLOAD_KEYS.items()]


def settings_lines(cfg: RunConfig) -> list[str]:
    return [
        f"SEED = {cfg.seed}",
        f"SPREAD = {_fmt(float(cfg.spread))}",
        f"REFERENTIAL_SIZE = {cfg.referential_size}",
        f"MEASURE_MIN = {_fmt(float(cfg.measure_range[0]))}",
        f"MEASURE_MAX = {_fmt(float(cfg.measure_range[1]))}",
        f"MAX_ROWS = {cfg.max_rows}",
        f"STREAMING_THRESHOLD = {cfg.streaming_threshold}",
        f"EMIT_CSV = {_fmt(cfg.emit_csv)}",
        f"EMIT_INSERTS = {_fmt(cfg.emit_inserts)}",
        f"DIALECT = {cfg.dialect}",
    ]
