"""Warehouse and workload parameters.

High-level parameters are averages. :func:`derive_low_level` turns them into a
full low-level parameter set by independent gaussian draws with standard
deviation ``spread * mean``, rounding integral values and clamping everything
into range.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .rng import SeededRng, gaussian_int, gaussian_real

MIN_DENSITY = 1e-6


class ParameterError(ValueError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid parameters: " + "; ".join(str(v) for v in report.violations))


@dataclass(frozen=True)
class ParamViolation:
    field: str
    value: object
    rule: str

    def __str__(self):
        return f"{self.field}={self.value!r}: {self.rule}"


@dataclass
class ValidationReport:
    violations: list[ParamViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, path: str, value, rule: str) -> None:
        self.violations.append(ParamViolation(path, value, rule))


@dataclass(frozen=True)
class HighLevelParams:
    AVG_NB_FT: float = 1
    AVG_NB_DIM: float = 5
    AVG_TOT_NB_DIM: float = 5
    AVG_NB_MEAS: float = 5
    AVG_DENSITY: float = 0.6
    AVG_NB_LEVELS: float = 3
    AVG_NB_ATT: float = 5
    AVG_HHLEVEL_SIZE: float = 10
    DIM_SFACTOR: float = 10


@dataclass(frozen=True)
class LowLevelParams:
    """Fully resolved warehouse shape.

    Per-fact lists are indexed by fact table, per-dimension lists by dimension
    (both 0-based here, 1-based in table names). ``NB_ATT[d][h]`` is indexed by
    depth, ``h = 0`` being the finest level. ``FT_DIMS[f]`` lists the 1-based
    dimension numbers describing fact table ``f``; ``None`` lets the generator
    draw them.
    """

    NB_FT: int
    NB_DIM: tuple[int, ...]
    TOT_NB_DIM: int
    NB_MEAS: tuple[int, ...]
    DENSITY: tuple[float, ...]
    NB_LEVELS: tuple[int, ...]
    NB_ATT: tuple[tuple[int, ...], ...]
    HHLEVEL_SIZE: tuple[int, ...]
    DIM_SFACTOR: tuple[float, ...]
    FT_DIMS: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class WorkloadParams:
    NB_Q: int = 100
    AVG_NB_ATT: float = 5
    AVG_NB_RESTR: float = 3
    PROB_OLAP: float = 0.9
    AVG_NB_AGGREG: float = 3
    PROB_CUBE: float = 0.3
    PROB_HAVING: float = 0.2
    AVG_NB_DD: float = 3

    @property
    def PROB_EXTRACT(self) -> float:
        return 1.0 - self.PROB_OLAP

    @property
    def PROB_ROLLUP(self) -> float:
        return 1.0 - self.PROB_CUBE


def field_names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


def _validate_high(p: HighLevelParams, report: ValidationReport) -> None:
    for name in ("AVG_NB_FT", "AVG_NB_DIM", "AVG_TOT_NB_DIM", "AVG_NB_LEVELS", "AVG_HHLEVEL_SIZE", "DIM_SFACTOR"):
        v = getattr(p, name)
        if not v >= 1:
            report.add(name, v, "must be >= 1")
    for name in ("AVG_NB_MEAS", "AVG_NB_ATT"):
        v = getattr(p, name)
        if not v >= 0:
            report.add(name, v, "must be >= 0")
    if not 0 < p.AVG_DENSITY <= 1:
        report.add("AVG_DENSITY", p.AVG_DENSITY, "density must be in (0, 1]")


def _validate_low(p: LowLevelParams, report: ValidationReport) -> None:
    if p.NB_FT < 1:
        report.add("NB_FT", p.NB_FT, "must be >= 1")
    if p.TOT_NB_DIM < 1:
        report.add("TOT_NB_DIM", p.TOT_NB_DIM, "must be >= 1")
    for name in ("NB_DIM", "NB_MEAS", "DENSITY"):
        if len(getattr(p, name)) != p.NB_FT:
            report.add(name, getattr(p, name), f"needs one value per fact table ({p.NB_FT})")
    for name in ("NB_LEVELS", "NB_ATT", "HHLEVEL_SIZE", "DIM_SFACTOR"):
        if len(getattr(p, name)) != p.TOT_NB_DIM:
            report.add(name, getattr(p, name), f"needs one value per dimension ({p.TOT_NB_DIM})")
    for f, v in enumerate(p.NB_DIM):
        if not 1 <= v <= p.TOT_NB_DIM:
            report.add(f"NB_DIM[{f + 1}]", v, "must be in [1, TOT_NB_DIM]")
    for f, v in enumerate(p.NB_MEAS):
        if v < 0:
            report.add(f"NB_MEAS[{f + 1}]", v, "must be >= 0")
    for f, v in enumerate(p.DENSITY):
        if not 0 < v <= 1:
            report.add(f"DENSITY[{f + 1}]", v, "density must be in (0, 1]")
    for d, v in enumerate(p.NB_LEVELS):
        if v < 1:
            report.add(f"NB_LEVELS[{d + 1}]", v, "must be >= 1")
    for d, row in enumerate(p.NB_ATT):
        if d < len(p.NB_LEVELS) and len(row) != p.NB_LEVELS[d]:
            report.add(f"NB_ATT[{d + 1}]", row, f"needs one value per level ({p.NB_LEVELS[d]})")
        for h, v in enumerate(row):
            if v < 0:
                report.add(f"NB_ATT[{d + 1}][{h + 1}]", v, "must be >= 0")
    for d, v in enumerate(p.HHLEVEL_SIZE):
        if v < 1:
            report.add(f"HHLEVEL_SIZE[{d + 1}]", v, "must be >= 1")
    for d, v in enumerate(p.DIM_SFACTOR):
        if not v >= 1:
            report.add(f"DIM_SFACTOR[{d + 1}]", v, "must be >= 1")
    if p.FT_DIMS is not None:
        if len(p.FT_DIMS) != p.NB_FT:
            report.add("FT_DIMS", p.FT_DIMS, f"needs one list per fact table ({p.NB_FT})")
        for f, dims in enumerate(p.FT_DIMS):
            if f < len(p.NB_DIM) and len(dims) != p.NB_DIM[f]:
                report.add(f"FT_DIMS[{f + 1}]", dims, f"needs NB_DIM = {p.NB_DIM[f]} dimensions")
            if len(set(dims)) != len(dims):
                report.add(f"FT_DIMS[{f + 1}]", dims, "dimensions must be distinct")
            if any(not 1 <= d <= p.TOT_NB_DIM for d in dims):
                report.add(f"FT_DIMS[{f + 1}]", dims, "dimension numbers must be in [1, TOT_NB_DIM]")


def _validate_workload(p: WorkloadParams, report: ValidationReport) -> None:
    if p.NB_Q < 1:
        report.add("NB_Q", p.NB_Q, "must be >= 1")
    for name in ("AVG_NB_ATT", "AVG_NB_AGGREG"):
        v = getattr(p, name)
        if not v >= 1:
            report.add(name, v, "must be >= 1")
    for name in ("AVG_NB_RESTR", "AVG_NB_DD"):
        v = getattr(p, name)
        if not v >= 0:
            report.add(name, v, "must be >= 0")
    for name in ("PROB_OLAP", "PROB_CUBE", "PROB_HAVING"):
        v = getattr(p, name)
        if not 0 <= v <= 1:
            report.add(name, v, "probability must be in [0, 1]")


def validate(params) -> ValidationReport:
    report = ValidationReport()
    if isinstance(params, HighLevelParams):
        _validate_high(params, report)
    elif isinstance(params, LowLevelParams):
        _validate_low(params, report)
    elif isinstance(params, WorkloadParams):
        _validate_workload(params, report)
    else:
        raise TypeError(f"cannot validate {type(params).__name__}")
    return report


def check(params) -> None:
    report = validate(params)
    if not report.ok:
        raise ParameterError(report)


def draw_fact_dimensions(nb_dim: tuple[int, ...], tot_nb_dim: int, rng: SeededRng) -> tuple[tuple[int, ...], ...]:
    """Distinct dimensions per fact table, uniform without replacement, sorted."""
    out = []
    for n in nb_dim:
        pool = list(range(1, tot_nb_dim + 1))
        chosen = []
        for _ in range(n):
            chosen.append(pool.pop(rng.below(len(pool))))
        out.append(tuple(sorted(chosen)))
    return tuple(out)


def derive_low_level(high: HighLevelParams, rng: SeededRng, spread: float = 0.1) -> LowLevelParams:
    check(high)
    if spread < 0:
        raise ValueError("spread must be >= 0")
    nb_ft = gaussian_int(rng, high.AVG_NB_FT, spread, 1)
    nb_dim, nb_meas, density = [], [], []
    for _ in range(nb_ft):
        nb_dim.append(gaussian_int(rng, high.AVG_NB_DIM, spread, 1))
        nb_meas.append(gaussian_int(rng, high.AVG_NB_MEAS, spread, 0))
        density.append(gaussian_real(rng, high.AVG_DENSITY, spread, MIN_DENSITY, 1.0))
    tot = max(gaussian_int(rng, high.AVG_TOT_NB_DIM, spread, 1), max(nb_dim))
    nb_levels, nb_att, hh, sf = [], [], [], []
    for _ in range(tot):
        levels = gaussian_int(rng, high.AVG_NB_LEVELS, spread, 1)
        nb_levels.append(levels)
        hh.append(gaussian_int(rng, high.AVG_HHLEVEL_SIZE, spread, 1))
        sf.append(gaussian_real(rng, high.DIM_SFACTOR, spread, 1.0))
        nb_att.append(tuple(gaussian_int(rng, high.AVG_NB_ATT, spread, 0) for _ in range(levels)))
    ft_dims = draw_fact_dimensions(tuple(nb_dim), tot, rng.substream("fact-dimensions"))
    low = LowLevelParams(
        NB_FT=nb_ft,
        NB_DIM=tuple(nb_dim),
        TOT_NB_DIM=tot,
        NB_MEAS=tuple(nb_meas),
        DENSITY=tuple(density),
        NB_LEVELS=tuple(nb_levels),
        NB_ATT=tuple(nb_att),
        HHLEVEL_SIZE=tuple(hh),
        DIM_SFACTOR=tuple(sf),
        FT_DIMS=ft_dims,
    )
    check(low)
    return low


def resolve_fact_dimensions(low: LowLevelParams, seed: int) -> LowLevelParams:
    """Fill in ``FT_DIMS`` when the user left the assignment to the generator."""
    if low.FT_DIMS is not None:
        return low
    rng = SeededRng(seed, "params").substream("fact-dimensions")
    return LowLevelParams(**{**low.__dict__, "FT_DIMS": draw_fact_dimensions(low.NB_DIM, low.TOT_NB_DIM, rng)})
