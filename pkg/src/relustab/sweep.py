"""Parameter-sweep harness: config, grid execution, regions, outputs.

Runs the stability test battery over a rectangular ``(a, b)`` grid of the
built-in benchmark network (or a fixed inline model), streams one record per
(point, test) to disk, classifies test-pair regions, audits the guaranteed
inclusions between tests, and emits deterministic CSV/SVG outputs.

Config schema (YAML, all sections optional unless noted)::

    model:
      builtin: true          # six-neuron benchmark; (a, b) injected per point
      a: 0.0                 # base point, used by single-point commands
      b: 0.0
      # -- or an inline fixed model (matrices as row lists or {csv: path}):
      # lambda: [[0.0]]
      # win: [[0.5]]
      # wout: [[1.0]]
    grid:
      a_min: -2.0
      a_max: 2.0
      a_steps: 41
      b_min: -10.0
      b_max: 10.0
      b_steps: 41
    tests: [I, II, III, IV]  # required; subset of SG, I..IV (or canonical names)
    solver:
      name: CLARABEL
      eps: null              # LMI strictness; null = data-scaled default
      s_min: 1.0e-6
      tolerance: null
      max_iter: null
    output:
      records_path: records.csv
      regions_path: regions.csv
      image_path: null       # optional SVG scatter
    compare: [[I, II], [III, IV]]   # default: guaranteed pairs among tests
    parallelism: 1
    seed: 0
    failure_threshold: 0.05  # tolerated SolverFailure fraction
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import yaml

from .certify import (
    FEASIBLE,
    INFEASIBLE,
    SOLVER_FAILURE,
    SolverOptions,
    TestId,
    run_test,
)
from .dynamics import RnnModel, example_rnn

__all__ = [
    "ConfigError",
    "ModelSpec",
    "GridSpec",
    "OutputSpec",
    "SweepConfig",
    "SweepRecord",
    "RegionMap",
    "InclusionAudit",
    "GUARANTEED_INCLUSIONS",
    "load_config",
    "run_sweep",
    "compare_regions",
    "audit_inclusions",
    "emit_outputs",
]

log = logging.getLogger(__name__)

RECORDS_HEADER = "a,b,test,status,verified,margin,solve_ms"
REGIONS_HEADER = "a,b,class"

# Test pairs (weaker, stronger) whose feasibility inclusion is guaranteed.
GUARANTEED_INCLUSIONS = (
    (TestId.SSG, TestId.L2P_SSG),
    (TestId.SSG, TestId.SSG_ZF_POL),
    (TestId.SSG_ZF_POL, TestId.SSG_ZF_POL_COP),
)

_TEST_ORDER = {t: i for i, t in enumerate(TestId)}


class ConfigError(ValueError):
    """Invalid or unparsable sweep configuration."""


@dataclass(frozen=True)
class ModelSpec:
    """Either the built-in benchmark or a fixed inline model."""

    builtin: bool = True
    a: float = 0.0
    b: float = 0.0
    Lambda: np.ndarray | None = None
    W_in: np.ndarray | None = None
    W_out: np.ndarray | None = None

    def build(self, a: float | None = None,
              b: float | None = None) -> RnnModel:
        if self.builtin:
            return example_rnn(self.a if a is None else a,
                               self.b if b is None else b)
        return RnnModel(self.Lambda, self.W_in, self.W_out)


@dataclass(frozen=True)
class GridSpec:
    a_min: float = -2.0
    a_max: float = 2.0
    a_steps: int = 41
    b_min: float = -10.0
    b_max: float = 10.0
    b_steps: int = 41

    def __post_init__(self):
        if self.a_steps < 1 or self.b_steps < 1:
            raise ConfigError("grid: a_steps and b_steps must be >= 1")
        if self.a_min > self.a_max:
            raise ConfigError("grid: a_min must not exceed a_max")
        if self.b_min > self.b_max:
            raise ConfigError("grid: b_min must not exceed b_max")

    def a_values(self) -> np.ndarray:
        return np.linspace(self.a_min, self.a_max, self.a_steps)

    def b_values(self) -> np.ndarray:
        return np.linspace(self.b_min, self.b_max, self.b_steps)


@dataclass(frozen=True)
class OutputSpec:
    records_path: str = "records.csv"
    regions_path: str = "regions.csv"
    image_path: str | None = None


@dataclass(frozen=True)
class SweepConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    tests: tuple[TestId, ...] = ()
    solver: SolverOptions = field(default_factory=SolverOptions)
    output: OutputSpec = field(default_factory=OutputSpec)
    compare: tuple[tuple[TestId, TestId], ...] = ()
    parallelism: int = 1
    seed: int = 0
    failure_threshold: float = 0.05

    def __post_init__(self):
        if not self.tests:
            raise ConfigError("tests: at least one test must be selected")
        if self.parallelism < 1:
            raise ConfigError("parallelism: must be >= 1")
        if not 0.0 <= self.failure_threshold <= 1.0:
            raise ConfigError("failure_threshold: must lie in [0, 1]")
        for pair in self.compare:
            for t in pair:
                if t not in self.tests:
                    raise ConfigError(
                        f"compare: test {t.name} is not in the selected "
                        "tests")


@dataclass(frozen=True)
class SweepRecord:
    """One (grid point, test) outcome; margin only present when Feasible."""

    a: float
    b: float
    test: TestId
    status: str
    verified: bool
    margin: float | None
    solve_ms: float


def _record_sort_key(rec: SweepRecord):
    return (rec.a, rec.b, _TEST_ORDER[rec.test])


# -- config loading ---------------------------------------------------------

def _expect_mapping(obj, key: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{key}: expected a mapping, got {type(obj).__name__}")
    return obj


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key {sorted(unknown)[0]!r}")


def _load_matrix(value, key: str, base_dir: str) -> np.ndarray:
    if isinstance(value, dict):
        _reject_unknown(value, {"csv"}, key)
        if "csv" not in value:
            raise ConfigError(f"{key}: matrix reference needs a 'csv' key")
        path = value["csv"]
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        try:
            return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))
        except OSError as exc:
            raise ConfigError(f"{key}: cannot read csv {path!r}: {exc}")
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a matrix as a list of rows")
    if arr.ndim != 2:
        raise ConfigError(f"{key}: expected a 2-d matrix, got shape {arr.shape}")
    return arr


def _parse_model(raw, base_dir: str) -> ModelSpec:
    section = _expect_mapping(raw, "model")
    _reject_unknown(section, {"builtin", "a", "b", "lambda", "win", "wout"},
                    "model")
    inline_keys = {"lambda", "win", "wout"} & set(section)
    if inline_keys and not section.get("builtin", False) is True:
        if len(inline_keys) != 3:
            missing = {"lambda", "win", "wout"} - inline_keys
            raise ConfigError(f"model: inline model missing key "
                              f"{sorted(missing)[0]!r}")
        Lam = _load_matrix(section["lambda"], "model.lambda", base_dir)
        Win = _load_matrix(section["win"], "model.win", base_dir)
        Wout = _load_matrix(section["wout"], "model.wout", base_dir)
        try:
            RnnModel(Lam, Win, Wout)  # validate dimensions and stability now
        except ValueError as exc:
            raise ConfigError(f"model: {exc}")
        return ModelSpec(builtin=False, Lambda=Lam, W_in=Win, W_out=Wout)
    if inline_keys:
        raise ConfigError("model: choose either builtin or inline matrices, "
                          "not both")
    if section.get("builtin", True) is False:
        raise ConfigError("model: builtin is false but no inline matrices "
                          "were given")
    try:
        return ModelSpec(builtin=True,
                         a=float(section.get("a", 0.0)),
                         b=float(section.get("b", 0.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}")


def _parse_tests(raw) -> tuple[TestId, ...]:
    if raw is None:
        raise ConfigError("tests: key is required")
    if isinstance(raw, str):
        raw = [tok for tok in raw.replace(",", " ").split() if tok]
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError("tests: expected a nonempty list of test names")
    tests = []
    for tok in raw:
        try:
            t = TestId.parse(str(tok))
        except ValueError as exc:
            raise ConfigError(f"tests: {exc}")
        if t not in tests:
            tests.append(t)
    return tuple(tests)


def default_compare_pairs(tests: tuple[TestId, ...]
                          ) -> tuple[tuple[TestId, TestId], ...]:
    """Guaranteed-inclusion pairs restricted to the selected tests."""
    return tuple((a, b) for a, b in GUARANTEED_INCLUSIONS
                 if a in tests and b in tests)


def load_config(path: str) -> SweepConfig:
    """Load and validate a sweep config file.

    Parse errors carry the YAML line; validation errors name the offending
    key.  Defaults: full 41x41 benchmark grid, serial execution, CSV outputs
    in the working directory.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"parse error in {path}{where}: {exc}")
    raw = _expect_mapping(raw, "config")
    _reject_unknown(raw, {"model", "grid", "tests", "solver", "output",
                          "compare", "parallelism", "seed",
                          "failure_threshold"}, "config")

    base_dir = os.path.dirname(os.path.abspath(path))
    model = _parse_model(raw.get("model"), base_dir)

    grid_raw = _expect_mapping(raw.get("grid"), "grid")
    _reject_unknown(grid_raw, {"a_min", "a_max", "a_steps",
                               "b_min", "b_max", "b_steps"}, "grid")
    defaults = GridSpec()
    try:
        grid = GridSpec(
            a_min=float(grid_raw.get("a_min", defaults.a_min)),
            a_max=float(grid_raw.get("a_max", defaults.a_max)),
            a_steps=int(grid_raw.get("a_steps", defaults.a_steps)),
            b_min=float(grid_raw.get("b_min", defaults.b_min)),
            b_max=float(grid_raw.get("b_max", defaults.b_max)),
            b_steps=int(grid_raw.get("b_steps", defaults.b_steps)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"grid: {exc}")

    tests = _parse_tests(raw.get("tests"))

    solver_raw = _expect_mapping(raw.get("solver"), "solver")
    _reject_unknown(solver_raw, {"name", "eps", "s_min", "tolerance",
                                 "max_iter"}, "solver")
    solver = SolverOptions(
        solver=solver_raw.get("name"),
        eps=(None if solver_raw.get("eps") is None
             else float(solver_raw["eps"])),
        s_min=float(solver_raw.get("s_min", 1e-6)),
        tolerance=(None if solver_raw.get("tolerance") is None
                   else float(solver_raw["tolerance"])),
        max_iter=(None if solver_raw.get("max_iter") is None
                  else int(solver_raw["max_iter"])))

    out_raw = _expect_mapping(raw.get("output"), "output")
    _reject_unknown(out_raw, {"records_path", "regions_path", "image_path"},
                    "output")
    output = OutputSpec(
        records_path=str(out_raw.get("records_path", "records.csv")),
        regions_path=str(out_raw.get("regions_path", "regions.csv")),
        image_path=(None if out_raw.get("image_path") is None
                    else str(out_raw["image_path"])))

    compare_raw = raw.get("compare")
    if compare_raw is None:
        compare = default_compare_pairs(tests)
    else:
        if not isinstance(compare_raw, (list, tuple)):
            raise ConfigError("compare: expected a list of test pairs")
        compare = []
        for entry in compare_raw:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ConfigError("compare: each entry must be a pair of "
                                  "test names")
            try:
                compare.append((TestId.parse(str(entry[0])),
                                TestId.parse(str(entry[1]))))
            except ValueError as exc:
                raise ConfigError(f"compare: {exc}")
        compare = tuple(compare)

    try:
        return SweepConfig(
            model=model, grid=grid, tests=tests, solver=solver,
            output=output, compare=compare,
            parallelism=int(raw.get("parallelism", 1)),
            seed=int(raw.get("seed", 0)),
            failure_threshold=float(raw.get("failure_threshold", 0.05)))
    except (TypeError,) as exc:
        raise ConfigError(str(exc))


# -- sweep execution --------------------------------------------------------

def _point_records(model: ModelSpec, a: float, b: float,
                   tests: tuple[TestId, ...],
                   options: SolverOptions) -> list[SweepRecord]:
    """Run the selected tests at one grid point (worker task)."""
    records = []
    try:
        built = model.build(a, b)
    except ValueError as exc:
        # Unstable or malformed model at this point: report every test as a
        # failure rather than aborting the sweep.
        log.error("model construction failed at (a=%g, b=%g): %s", a, b, exc)
        return [SweepRecord(a=a, b=b, test=t, status=SOLVER_FAILURE,
                            verified=False, margin=None, solve_ms=0.0)
                for t in tests]
    for t in tests:
        res = run_test(built, t, options)
        records.append(SweepRecord(
            a=a, b=b, test=t, status=res.status, verified=res.verified,
            margin=res.margin, solve_ms=res.solve_ms))
    return records


def _format_margin(margin: float | None) -> str:
    return "" if margin is None else repr(float(margin))


def _record_row(rec: SweepRecord) -> str:
    return ",".join([
        repr(float(rec.a)),
        repr(float(rec.b)),
        rec.test.name,
        rec.status,
        "true" if rec.verified else "false",
        _format_margin(rec.margin),
        format(rec.solve_ms, ".3f"),
    ])


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """Run the test battery over the grid; returns records sorted by
    ``(a, b, test)``.

    Records are streamed (unsorted) to ``records_path`` as they are
    produced, so partial results survive interruption; call
    :func:`emit_outputs` afterwards for the normalised artifacts.
    Per-point solver failures are aggregated, never raised.  Guaranteed
    inclusion pairs among the selected tests are audited automatically and
    violations logged as errors.
    """
    points = [(float(a), float(b))
              for a in config.grid.a_values()
              for b in config.grid.b_values()]
    tasks = [(config.model, a, b, config.tests, config.solver)
             for a, b in points]
    records: list[SweepRecord] = []

    stream_path = config.output.records_path
    os.makedirs(os.path.dirname(os.path.abspath(stream_path)), exist_ok=True)
    with open(stream_path, "w", encoding="utf-8", newline="\n") as stream:
        stream.write(RECORDS_HEADER + "\n")

        def consume(batch: list[SweepRecord]) -> None:
            records.extend(batch)
            for rec in batch:
                stream.write(_record_row(rec) + "\n")
            stream.flush()

        if config.parallelism == 1:
            for task in tasks:
                consume(_point_records(*task))
        else:
            with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
                for batch in pool.map(_point_records, *zip(*tasks)):
                    consume(batch)

    records.sort(key=_record_sort_key)
    for audit in audit_inclusions(records):
        for violation in audit.violations:
            log.error("inclusion violation: %s", violation)
    return records


# -- region comparison and audits -------------------------------------------

@dataclass(frozen=True)
class RegionMap:
    """Per-point classification of a test pair ``(A, B)``.

    Classes: ``both``, ``only_<A>``, ``only_<B>``, ``neither`` and
    ``failure`` (a solver failure or missing record on either side).
    """

    test_a: TestId
    test_b: TestId
    classes: dict[tuple[float, float], str]

    @property
    def only_a_label(self) -> str:
        return f"only_{self.test_a.name}"

    @property
    def only_b_label(self) -> str:
        return f"only_{self.test_b.name}"

    def counts(self) -> dict[str, int]:
        labels = ["both", self.only_a_label, self.only_b_label,
                  "neither", "failure"]
        out = {label: 0 for label in labels}
        for cls in self.classes.values():
            out[cls] = out.get(cls, 0) + 1
        return out


def compare_regions(records: list[SweepRecord], test_a: TestId,
                    test_b: TestId) -> RegionMap:
    """Classify every grid point against a test pair.

    A point is ``failure`` when either side is missing or ended in
    ``SolverFailure``; feasibility means a verified ``Feasible`` record.
    """
    status: dict[tuple[float, float], dict[TestId, str]] = {}
    for rec in records:
        status.setdefault((rec.a, rec.b), {})[rec.test] = rec.status
    classes: dict[tuple[float, float], str] = {}
    for point, by_test in sorted(status.items()):
        sa = by_test.get(test_a)
        sb = by_test.get(test_b)
        if sa is None or sb is None or SOLVER_FAILURE in (sa, sb):
            classes[point] = "failure"
            continue
        fa, fb = sa == FEASIBLE, sb == FEASIBLE
        if fa and fb:
            classes[point] = "both"
        elif fa:
            classes[point] = f"only_{test_a.name}"
        elif fb:
            classes[point] = f"only_{test_b.name}"
        else:
            classes[point] = "neither"
    rm = RegionMap(test_a=test_a, test_b=test_b, classes=classes)
    log.info("regions %s vs %s: %s", test_a.name, test_b.name, rm.counts())
    return rm


@dataclass(frozen=True)
class InclusionAudit:
    """Audit of one guaranteed inclusion (weaker feasible => stronger is)."""

    weaker: TestId
    stronger: TestId
    violations: tuple[str, ...]
    excluded: tuple[tuple[float, float], ...]  # solver-failure points

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_inclusions(records: list[SweepRecord]) -> list[InclusionAudit]:
    """Check every guaranteed inclusion pair covered by the records.

    Points where either test ended in ``SolverFailure`` are excluded from
    the check but reported, so an audit can pass only by actually deciding
    the points it covers.
    """
    present = {rec.test for rec in records}
    by_point: dict[tuple[float, float], dict[TestId, str]] = {}
    for rec in records:
        by_point.setdefault((rec.a, rec.b), {})[rec.test] = rec.status
    audits = []
    for weaker, stronger in GUARANTEED_INCLUSIONS:
        if weaker not in present or stronger not in present:
            continue
        violations = []
        excluded = []
        for point, by_test in sorted(by_point.items()):
            sw = by_test.get(weaker)
            ss = by_test.get(stronger)
            if sw is None or ss is None:
                continue
            if SOLVER_FAILURE in (sw, ss):
                excluded.append(point)
                continue
            if sw == FEASIBLE and ss == INFEASIBLE:
                violations.append(
                    f"{weaker.name} feasible but {stronger.name} infeasible "
                    f"at (a={point[0]:g}, b={point[1]:g})")
        audits.append(InclusionAudit(
            weaker=weaker, stronger=stronger,
            violations=tuple(violations), excluded=tuple(excluded)))
    return audits


# -- output emission ---------------------------------------------------------

# Scatter colors: pairs (I, II) and (III, IV) follow the benchmark's
# convention (green/magenta and red/blue); anything else gets the defaults.
_PAIR_COLORS = {
    (TestId.SSG, TestId.L2P_SSG): {"both": "#2ca02c", "only_b": "#e377c2"},
    (TestId.SSG_ZF_POL, TestId.SSG_ZF_POL_COP): {"both": "#d62728",
                                                 "only_b": "#1f77b4"},
}
_DEFAULT_COLORS = {"both": "#2ca02c", "only_b": "#e377c2"}
_NEUTRAL_COLORS = {"only_a": "#ff7f0e", "neither": "#d9d9d9",
                   "failure": "#000000"}


def _suffixed(path: str, suffix: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}_{suffix}{ext}"


def _write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _records_csv(records: list[SweepRecord]) -> str:
    rows = [RECORDS_HEADER]
    rows += [_record_row(rec) for rec in sorted(records, key=_record_sort_key)]
    return "\n".join(rows) + "\n"


def _regions_csv(region_map: RegionMap) -> str:
    rows = [REGIONS_HEADER]
    for (a, b), cls in sorted(region_map.classes.items()):
        rows.append(f"{a!r},{b!r},{cls}")
    return "\n".join(rows) + "\n"


def _region_svg(region_map: RegionMap) -> str:
    """Hand-rolled scatter of one region map (no plotting dependency)."""
    pair_colors = _PAIR_COLORS.get((region_map.test_a, region_map.test_b),
                                   _DEFAULT_COLORS)
    color_of = {
        "both": pair_colors["both"],
        region_map.only_b_label: pair_colors["only_b"],
        region_map.only_a_label: _NEUTRAL_COLORS["only_a"],
        "neither": _NEUTRAL_COLORS["neither"],
        "failure": _NEUTRAL_COLORS["failure"],
    }
    pts = sorted(region_map.classes.items())
    a_vals = sorted({p[0] for p, _ in pts})
    b_vals = sorted({p[1] for p, _ in pts})
    width, height, pad = 640, 420, 60
    plot_w, plot_h = width - pad - 180, height - 2 * pad

    def sx(a: float) -> float:
        if len(a_vals) == 1 or a_vals[-1] == a_vals[0]:
            return pad + plot_w / 2
        return pad + (a - a_vals[0]) / (a_vals[-1] - a_vals[0]) * plot_w

    def sy(b: float) -> float:
        if len(b_vals) == 1 or b_vals[-1] == b_vals[0]:
            return pad + plot_h / 2
        return pad + plot_h - (b - b_vals[0]) / (b_vals[-1] - b_vals[0]) * plot_h

    r = max(2.0, min(plot_w / max(len(a_vals), 1),
                     plot_h / max(len(b_vals), 1)) * 0.42)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad + plot_w / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">'
        f'{region_map.test_a.name} vs {region_map.test_b.name}</text>',
        f'<text x="{pad + plot_w / 2:.1f}" y="{height - 12}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12">a'
        f'</text>',
        f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {height / 2:.1f})">b</text>',
        f'<rect x="{pad}" y="{pad}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#888" stroke-width="1"/>',
    ]
    for (a, b), cls in pts:
        parts.append(
            f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="{r:.2f}" '
            f'fill="{color_of[cls]}"/>')
    counts = region_map.counts()
    legend_x = pad + plot_w + 16
    legend_y = pad
    for label in ["both", region_map.only_b_label, region_map.only_a_label,
                  "neither", "failure"]:
        parts.append(
            f'<rect x="{legend_x}" y="{legend_y}" width="10" '
            f'height="10" fill="{color_of[label]}"/>')
        parts.append(
            f'<text x="{legend_x + 14}" y="{legend_y + 9}" '
            f'font-family="sans-serif" font-size="9">'
            f'{label} ({counts.get(label, 0)})</text>')
        legend_y += 16
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_outputs(records: list[SweepRecord],
                 region_maps: list[RegionMap],
                 config: SweepConfig) -> dict[str, str]:
    """Write the records CSV, one regions CSV per map, and optional SVGs.

    Output is a pure function of the inputs (records sorted, fixed float
    formatting), so identical inputs produce byte-identical files.  Returns
    a name -> path map of everything written.
    """
    written: dict[str, str] = {}
    _write_text(config.output.records_path, _records_csv(records))
    written["records"] = config.output.records_path

    multi = len(region_maps) > 1
    for rm in region_maps:
        suffix = f"{rm.test_a.name}_vs_{rm.test_b.name}"
        path = (_suffixed(config.output.regions_path, suffix) if multi
                else config.output.regions_path)
        _write_text(path, _regions_csv(rm))
        written[f"regions:{suffix}"] = path
        if config.output.image_path is not None:
            img = (_suffixed(config.output.image_path, suffix) if multi
                   else config.output.image_path)
            _write_text(img, _region_svg(rm))
            written[f"image:{suffix}"] = img
    return written
