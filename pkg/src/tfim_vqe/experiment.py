"""Config-driven experiments: field sweeps, observables, oracle columns, CSV output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import time
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .ansatz import ENTANGLEMENT_PATTERNS, AnsatzKind, AnsatzSpec
from .errors import ConfigError, ContractError, DomainError, TfimVqeError
from .lattice import Lattice, TfimParams, build_tfim
from .observables import (
    FramePotentialEstimate,
    energy_variance,
    entanglement_entropy,
    EntropyMethod,
    frame_potential,
    magnetization,
    spin_correlation,
)
from .oracle import ITERATIVE_CAP, parity_resolved_ground
from .vqe import Method, OptimizerConfig, OptResult, VqeProblem, sweep_field

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "TFIM_VQE_OUTPUT_DIR"

CSV_COLUMNS = (
    "h_x",
    "dims",
    "extents",
    "n_qubits",
    "ansatz",
    "layers",
    "n_params",
    "optimizer",
    "restart_index",
    "converged",
    "energy",
    "energy_per_site",
    "variance",
    "magnetization",
    "abs_magnetization",
    "spin_correlation",
    "entropy_single_site",
    "entropy_half",
    "oracle_energy",
    "oracle_entropy_single_site",
    "n_iterations",
    "n_evaluations",
    "wall_time_s",
    "seed",
)


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class LatticeConfig:
    dims: int
    extents: tuple[int, ...]
    dedupe: bool = False


@dataclass(frozen=True)
class ModelConfig:
    field_grid: tuple[float, ...]
    j_z: float = -1.0
    sweep_mode: str = "warm"


@dataclass(frozen=True)
class AnsatzConfig:
    kind: AnsatzKind
    layers: int
    real_amplitudes: bool = False
    entanglement: str = "pairwise_full"

    @property
    def spec(self) -> AnsatzSpec:
        return AnsatzSpec(self.kind, self.layers, self.real_amplitudes, self.entanglement)


@dataclass(frozen=True)
class ObservablesConfig:
    variance: bool = True
    magnetization: bool = True
    spin_correlation: bool = True
    entropy_single_site: bool = True
    entropy_half: bool = True
    # qubit whose single-site entropy is reported
    single_site: int = 0
    # subsystem A of the "half" entropy; None means the first floor(N/2) sites
    half_partition: tuple[int, ...] | None = None


@dataclass(frozen=True)
class OracleConfig:
    enabled: bool = False
    k: int = 2


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    name: str = "run"
    formats: tuple[str, ...] = ("csv", "json")
    timings: bool = False


@dataclass(frozen=True)
class FramePotentialConfig:
    ansatze: tuple[AnsatzConfig, ...] = ()
    n_samples: int = 10_000
    t: int = 1
    bins: int = 50


@dataclass(frozen=True)
class ExperimentConfig:
    lattice: LatticeConfig
    model: ModelConfig
    ansatz: AnsatzConfig
    optimizer: OptimizerConfig
    observables: ObservablesConfig = ObservablesConfig()
    oracle: OracleConfig = OracleConfig()
    output: OutputConfig = OutputConfig()
    frame_potential: FramePotentialConfig = FramePotentialConfig()
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)

    def build_lattice(self) -> Lattice:
        return Lattice(self.lattice.dims, self.lattice.extents)


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _section(raw: dict, key: str, path: str, required: bool = True) -> dict:
    if key not in raw:
        if required:
            raise ConfigError(f"{path}{key}", "missing required section")
        return {}
    value = raw[key]
    if not isinstance(value, dict):
        raise ConfigError(f"{path}{key}", "must be an object")
    return value


def _take(section: dict, path: str, key: str, kind, default=..., check=None):
    full = f"{path}.{key}"
    if key not in section:
        if default is ...:
            raise ConfigError(full, "missing required field")
        return default
    value = section[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ConfigError(full, f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    if check is not None:
        message = check(value)
        if message:
            raise ConfigError(full, message)
    return value


def _reject_unknown(section: dict, path: str, allowed) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown field")


def _field_grid(value, path: str) -> tuple[float, ...]:
    if isinstance(value, dict):
        _reject_unknown(value, path, ("start", "stop", "step"))
        start = _take(value, path, "start", float)
        stop = _take(value, path, "stop", float)
        step = _take(value, path, "step", float, check=lambda s: None if s > 0 else "must be > 0")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError(path, "empty range")
        return tuple(round(start + i * step, 12) for i in range(count))
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "must be a non-empty list or a {start, stop, step} object")
    grid = []
    for i, h in enumerate(value):
        if isinstance(h, bool) or not isinstance(h, (int, float)) or not math.isfinite(h):
            raise ConfigError(f"{path}[{i}]", f"expected a finite number, got {h!r}")
        grid.append(float(h))
    return tuple(grid)


def _ansatz(section: dict, path: str) -> AnsatzConfig:
    _reject_unknown(section, path, ("kind", "layers", "real_amplitudes", "entanglement"))
    kind_raw = _take(section, path, "kind", str)
    try:
        kind = AnsatzKind.parse(kind_raw)
    except DomainError as exc:
        raise ConfigError(f"{path}.kind", str(exc)) from None
    layers = _take(section, path, "layers", int, check=lambda v: None if v >= 1 else "must be >= 1")
    real = _take(section, path, "real_amplitudes", bool, False)
    ent = _take(
        section,
        path,
        "entanglement",
        str,
        "pairwise_full",
        check=lambda v: None if v in ENTANGLEMENT_PATTERNS else f"must be one of {ENTANGLEMENT_PATTERNS}",
    )
    return AnsatzConfig(kind, layers, real, ent)


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a decoded JSON config; errors name the offending field path."""
    if not isinstance(raw, dict):
        raise ConfigError("$", "config must be a JSON object")
    _reject_unknown(
        raw,
        "$",
        ("schema", "lattice", "model", "ansatz", "optimizer", "observables", "oracle", "output", "frame_potential", "seed"),
    )
    schema = _take(raw, "$", "schema", int)
    if schema != SCHEMA_VERSION:
        raise ConfigError("$.schema", f"unsupported schema {schema}, expected {SCHEMA_VERSION}")
    seed = _take(raw, "$", "seed", int, 0)

    lat = _section(raw, "lattice", "$.")
    _reject_unknown(lat, "$.lattice", ("dims", "extents", "dedupe"))
    dims = _take(lat, "$.lattice", "dims", int, check=lambda v: None if v in (1, 2, 3) else "must be 1, 2 or 3")
    extents = _take(lat, "$.lattice", "extents", list)
    if any(isinstance(e, bool) or not isinstance(e, int) for e in extents):
        raise ConfigError("$.lattice.extents", "extents must be integers")
    try:
        Lattice(dims, tuple(extents))
    except DomainError as exc:
        raise ConfigError("$.lattice.extents", str(exc)) from None
    lattice = LatticeConfig(dims, tuple(extents), _take(lat, "$.lattice", "dedupe", bool, False))

    mod = _section(raw, "model", "$.")
    _reject_unknown(mod, "$.model", ("j_z", "field_grid", "sweep_mode"))
    if "field_grid" not in mod:
        raise ConfigError("$.model.field_grid", "missing required field")
    grid = _field_grid(mod["field_grid"], "$.model.field_grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("$.model.field_grid", "must be strictly ascending")
    if grid[0] < 0:
        raise ConfigError("$.model.field_grid", "field values must be >= 0")
    sweep_mode = _take(
        mod, "$.model", "sweep_mode", str, "warm", check=lambda v: None if v in ("warm", "cold_parallel") else "must be warm or cold_parallel"
    )
    model = ModelConfig(grid, _take(mod, "$.model", "j_z", float, -1.0), sweep_mode)

    ansatz = _ansatz(_section(raw, "ansatz", "$."), "$.ansatz")

    opt = _section(raw, "optimizer", "$.", required=False)
    known = {f.name for f in fields(OptimizerConfig)}
    _reject_unknown(opt, "$.optimizer", known)
    overrides: dict[str, Any] = {}
    for f in fields(OptimizerConfig):
        if f.name not in opt:
            continue
        if f.name == "method":
            value = _take(opt, "$.optimizer", "method", str)
            try:
                overrides["method"] = Method(value.upper())
            except ValueError:
                raise ConfigError("$.optimizer.method", f"must be one of {[m.value for m in Method]}") from None
        elif f.name in ("max_iterations", "history_size", "n_restarts", "seed"):
            overrides[f.name] = _take(opt, "$.optimizer", f.name, int)
        else:
            overrides[f.name] = _take(opt, "$.optimizer", f.name, float)
    overrides.setdefault("seed", seed)
    try:
        optimizer = OptimizerConfig.for_ansatz(ansatz.kind, **overrides)
    except DomainError as exc:
        raise ConfigError("$.optimizer", str(exc)) from None

    obs = _section(raw, "observables", "$.", required=False)
    flags = [f.name for f in fields(ObservablesConfig) if f.name not in ("single_site", "half_partition")]
    _reject_unknown(obs, "$.observables", flags + ["single_site", "half_partition"])
    values = {name: _take(obs, "$.observables", name, bool, True) for name in flags}
    n_sites = Lattice(dims, tuple(extents)).n_sites
    in_range = lambda v: None if 0 <= v < n_sites else f"must lie in [0, {n_sites})"  # noqa: E731
    values["single_site"] = _take(obs, "$.observables", "single_site", int, 0, check=in_range)
    half = _take(obs, "$.observables", "half_partition", list, None)
    if half is not None:
        if not half or len(set(half)) != len(half) or len(half) >= n_sites:
            raise ConfigError("$.observables.half_partition", "must be a proper non-empty set of sites")
        for i, q in enumerate(half):
            if isinstance(q, bool) or not isinstance(q, int) or in_range(q):
                raise ConfigError(f"$.observables.half_partition[{i}]", f"invalid site {q!r}")
        half = tuple(half)
    observables = ObservablesConfig(**values, half_partition=half)

    orc = _section(raw, "oracle", "$.", required=False)
    _reject_unknown(orc, "$.oracle", ("enabled", "k"))
    oracle = OracleConfig(
        _take(orc, "$.oracle", "enabled", bool, False),
        _take(orc, "$.oracle", "k", int, 2, check=lambda v: None if v >= 1 else "must be >= 1"),
    )

    out = _section(raw, "output", "$.", required=False)
    _reject_unknown(out, "$.output", ("directory", "name", "formats", "timings"))
    formats = tuple(_take(out, "$.output", "formats", list, ["csv", "json"]))
    for i, f in enumerate(formats):
        if f not in ("csv", "json"):
            raise ConfigError(f"$.output.formats[{i}]", f"unknown format {f!r}")
    output = OutputConfig(
        _take(out, "$.output", "directory", str, "results"),
        _take(out, "$.output", "name", str, "run"),
        formats,
        _take(out, "$.output", "timings", bool, False),
    )

    fp = _section(raw, "frame_potential", "$.", required=False)
    _reject_unknown(fp, "$.frame_potential", ("ansatze", "n_samples", "t", "bins"))
    items = _take(fp, "$.frame_potential", "ansatze", list, [])
    ansatze = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ConfigError(f"$.frame_potential.ansatze[{i}]", "must be an object")
        ansatze.append(_ansatz(item, f"$.frame_potential.ansatze[{i}]"))
    frame = FramePotentialConfig(
        tuple(ansatze),
        _take(fp, "$.frame_potential", "n_samples", int, 10_000, check=lambda v: None if v >= 2 else "must be >= 2"),
        _take(fp, "$.frame_potential", "t", int, 1, check=lambda v: None if v >= 1 else "must be >= 1"),
        _take(fp, "$.frame_potential", "bins", int, 50, check=lambda v: None if v >= 1 else "must be >= 1"),
    )
    return ExperimentConfig(lattice, model, ansatz, optimizer, observables, oracle, output, frame, seed, raw)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return parse_config(raw)


# --------------------------------------------------------------------------
# running


@dataclass
class RunRecord:
    h_x: float
    dims: int
    extents: str
    n_qubits: int
    ansatz: str
    layers: int
    n_params: int
    optimizer: str
    restart_index: int | None
    converged: bool | None
    energy: float | None = None
    energy_per_site: float | None = None
    variance: float | None = None
    magnetization: float | None = None
    abs_magnetization: float | None = None
    spin_correlation: float | None = None
    entropy_single_site: float | None = None
    entropy_half: float | None = None
    oracle_energy: float | None = None
    oracle_entropy_single_site: float | None = None
    n_iterations: int | None = None
    n_evaluations: int | None = None
    wall_time_s: float | None = None
    seed: int = 0
    config_hash: str = ""
    failed: bool = False

    def csv_row(self) -> list[str]:
        return [_format(getattr(self, name)) for name in CSV_COLUMNS]


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def output_directory(config: ExperimentConfig, override: str | os.PathLike | None = None) -> Path:
    """Explicit override, then the environment variable, then the config value."""
    return Path(override or os.environ.get(OUTPUT_DIR_ENV) or config.output.directory)


def _observe(record: RunRecord, problem: VqeProblem, params, obs: ObservablesConfig) -> None:
    state = problem.state(params)
    n = state.n_qubits
    record.energy = problem.energy(params)
    record.energy_per_site = record.energy / n
    if obs.variance:
        try:
            record.variance = energy_variance(state, problem.hamiltonian)
        except TfimVqeError:
            record.variance = None
    if obs.magnetization:
        record.magnetization, record.abs_magnetization = magnetization(state)
    if obs.spin_correlation and n % 2 == 0:
        record.spin_correlation = spin_correlation(state)
    if obs.entropy_single_site:
        record.entropy_single_site = entanglement_entropy(state, [obs.single_site])
    if obs.entropy_half:
        part = obs.half_partition or tuple(range(n // 2))
        record.entropy_half = entanglement_entropy(state, part, EntropyMethod.SCHMIDT)


def run_experiment(config: ExperimentConfig, out_dir: str | os.PathLike | None = None, write: bool = True) -> list[RunRecord]:
    """Sweep the field grid, attach observables and oracle values, write CSV + manifest."""
    lattice = config.build_lattice()
    spec = config.ansatz.spec
    circuit = spec.build(lattice, config.lattice.dedupe)
    start = time.perf_counter()
    results = sweep_field(
        lattice,
        spec,
        config.model.field_grid,
        config.optimizer,
        j_z=config.model.j_z,
        dedupe=config.lattice.dedupe,
        mode=config.model.sweep_mode,
    )
    sweep_time = time.perf_counter() - start
    records = []
    for h, result in zip(config.model.field_grid, results):
        point_start = time.perf_counter()
        record = _base_record(config, lattice, circuit.n_params, h, result)
        if not result.failed:
            problem = VqeProblem(build_tfim(lattice, TfimParams(h, config.model.j_z), config.lattice.dedupe), circuit)
            _observe(record, problem, result.best_params, config.observables)
            if config.oracle.enabled and lattice.n_sites <= ITERATIVE_CAP:
                ground = parity_resolved_ground(problem.hamiltonian, lattice.n_sites).ground
                record.oracle_energy = ground.value
                record.oracle_entropy_single_site = entanglement_entropy(ground.vector, [config.observables.single_site])
        if config.output.timings:
            record.wall_time_s = sweep_time / len(results) + time.perf_counter() - point_start
        records.append(record)
    if write:
        write_outputs(config, records, output_directory(config, out_dir), sweep_time)
    return records


def _base_record(config: ExperimentConfig, lattice: Lattice, n_params: int, h: float, result: OptResult) -> RunRecord:
    return RunRecord(
        h_x=h,
        dims=lattice.dims,
        extents="x".join(map(str, lattice.extents)),
        n_qubits=lattice.n_sites,
        ansatz=config.ansatz.kind.value,
        layers=config.ansatz.layers,
        n_params=n_params,
        optimizer=config.optimizer.method.value,
        restart_index=None if result.failed else result.restart_index,
        converged=None if result.failed else result.converged,
        n_iterations=None if result.failed else result.n_iterations,
        n_evaluations=None if result.failed else result.n_evaluations,
        seed=config.optimizer.seed,
        config_hash=config.config_hash,
        failed=result.failed,
    )


def records_to_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def write_outputs(config: ExperimentConfig, records: list[RunRecord], directory: Path, sweep_time: float) -> dict[str, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    if "csv" in config.output.formats:
        paths["csv"] = directory / f"{config.output.name}.csv"
        paths["csv"].write_text(records_to_csv(records))
    if "json" in config.output.formats:
        paths["json"] = directory / f"{config.output.name}.manifest.json"
        manifest = {
            "config_hash": config.config_hash,
            "config": config.raw,
            "seed": config.seed,
            "optimizer_seed": config.optimizer.seed,
            "failed_points": [r.h_x for r in records if r.failed],
            "versions": {
                "tfim_vqe": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "timings": {"sweep_s": sweep_time} if config.output.timings else {},
        }
        paths["json"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return paths


# --------------------------------------------------------------------------
# reference comparison


@dataclass(frozen=True)
class Deviation:
    h_x: float
    column: str
    value: float | None
    reference: float
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.value is not None and self.deviation <= self.tolerance


@dataclass
class ComparisonReport:
    deviations: list[Deviation]

    @property
    def passed(self) -> bool:
        return all(d.passed for d in self.deviations)

    @property
    def failures(self) -> list[Deviation]:
        return [d for d in self.deviations if not d.passed]

    def max_deviation(self, column: str) -> float:
        return max((d.deviation for d in self.deviations if d.column == column), default=0.0)

    def format(self) -> str:
        lines = []
        for d in self.deviations:
            status = "PASS" if d.passed else "FAIL"
            value = "missing" if d.value is None else f"{d.value:.6f}"
            lines.append(
                f"{status} h_x={d.h_x:g} {d.column}: value={value} reference={d.reference:.6f} "
                f"|dev|={d.deviation:.2e} tol={d.tolerance:.1e}"
            )
        lines.append("overall: " + ("PASS" if self.passed else f"FAIL ({len(self.failures)} of {len(self.deviations)})"))
        return "\n".join(lines)


def read_table(source) -> list[dict[str, str]]:
    """Rows of a CSV given as a path or as literal text (anything containing a newline)."""
    if isinstance(source, str) and "\n" in source:
        text = source
    else:
        text = Path(source).read_text()
    return list(csv.DictReader(io.StringIO(text)))


def bundled_reference() -> str:
    return resources.files("tfim_vqe").joinpath("data/chain10_reference.csv").read_text()


def _as_rows(records) -> list[dict[str, str]]:
    if isinstance(records, list) and records and isinstance(records[0], RunRecord):
        return [dict(zip(CSV_COLUMNS, r.csv_row())) for r in records]
    if isinstance(records, list):
        return records
    return read_table(records)


def compare_to_reference(
    records,
    reference,
    tolerances: dict[str, float] | None = None,
    column_map: dict[str, str] | None = None,
) -> ComparisonReport:
    """Per-row absolute deviations of result columns against a reference table.

    ``tolerances`` maps reference column -> tolerance; only those columns are
    checked. ``column_map`` maps a reference column to the result column that
    should be compared with it (default: the same name).
    """
    tolerances = tolerances or {"energy": 1e-2}
    column_map = column_map or {}
    rows = _as_rows(records)
    ref_rows = _as_rows(reference)
    ours = {round(float(r["h_x"]), 9): r for r in rows}
    theirs = {round(float(r["h_x"]), 9): r for r in ref_rows}
    if sorted(ours) != sorted(theirs):
        missing = sorted(set(theirs) ^ set(ours))
        raise ContractError(f"h_x grids differ; unmatched values {missing}")
    deviations = []
    for h in sorted(theirs):
        for ref_col, tol in tolerances.items():
            col = column_map.get(ref_col, ref_col)
            if ref_col not in theirs[h]:
                raise ContractError(f"reference has no column {ref_col!r}")
            if col not in ours[h]:
                raise ContractError(f"results have no column {col!r}")
            ref_value = float(theirs[h][ref_col])
            raw = ours[h][col]
            value = float(raw) if raw not in ("", None) else None
            dev = abs(value - ref_value) if value is not None else math.inf
            deviations.append(Deviation(h, ref_col, value, ref_value, dev, tol))
    return ComparisonReport(deviations)


# --------------------------------------------------------------------------
# frame potential report


def frame_potential_report(
    config: ExperimentConfig, out_dir: str | os.PathLike | None = None, write: bool = True
) -> dict[str, FramePotentialEstimate]:
    """F_t estimate per configured ansatz, plus overlap histograms and raw overlaps as CSV."""
    lattice = config.build_lattice()
    fp = config.frame_potential
    ansatze = fp.ansatze or (config.ansatz,)
    estimates: dict[str, FramePotentialEstimate] = {}
    for a in ansatze:
        label = f"{a.kind.value}_L{a.layers}" + ("_RA" if a.real_amplitudes else "")
        circuit = a.spec.build(lattice, config.lattice.dedupe)
        estimates[label] = frame_potential(circuit, 0, fp.t, fp.n_samples, config.seed)
    if write:
        directory = output_directory(config, out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        edges = np.linspace(0.0, 1.0, fp.bins + 1)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", *estimates])
        counts = {k: np.histogram(e.overlaps, bins=edges)[0] for k, e in estimates.items()}
        for i in range(fp.bins):
            w.writerow([repr(float(edges[i])), repr(float(edges[i + 1])), *(int(counts[k][i]) for k in estimates)])
        (directory / f"{config.output.name}.fp_histogram.csv").write_text(buf.getvalue())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ansatz", "t", "mean", "std_error", "n_samples", "seed"])
        for k, e in estimates.items():
            w.writerow([k, e.t, repr(e.mean), repr(e.std_error), e.n_samples, e.seed])
        (directory / f"{config.output.name}.fp_estimates.csv").write_text(buf.getvalue())
        for k, e in estimates.items():
            body = "overlap\n" + "".join(f"{v!r}\n" for v in e.overlaps)
            (directory / f"{config.output.name}.fp_overlaps_{k}.csv").write_text(body)
    return estimates


def record_dict(record: RunRecord) -> dict:
    return asdict(record)
