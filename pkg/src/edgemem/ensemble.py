"""Experiment orchestration: parameter sweeps, persistence, analysis.

A sweep walks the (J, delta, realization) grid, runs the full tomography
pipeline per realization and appends one metrics row per sampled time.  Each
realization is flushed to its own part file (atomically), so interrupted
sweeps resume by skipping completed triples; the merged results file is
assembled in a fixed sort order, which makes outputs byte-identical across
runs and worker counts.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

import edgemem
from edgemem.evolution import IntegratorConfig, SamplingSchedule
from edgemem.infometrics import (
    classical_capacity_lower,
    coherent_information,
    directed_encodings,
    directed_integrity,
    distinguish_probability,
    recovery_fraction,
    trace_distance,
    von_neumann_entropy,
)
from edgemem.model import (
    DisorderRealization,
    LOGICAL_BASIS_LABELS,
    ModelParams,
    build_hamiltonian,
    check_edge_commutation,
    edge_operators,
    prepare_state,
    sample_disorder,
)
from edgemem.paulis import StateVector, WeightedPauliSum
from edgemem.tomography import (
    ChannelMatrix,
    assemble_channel,
    channel_to_choi,
    input_preparations,
    reduced_edge_state_oracle,
    run_input_set,
    validate_cptp,
)

logger = logging.getLogger(__name__)

RESULTS_HEADER = ("realization_index,J,delta,t,I_x,I_y,I_z,"
                  "coherent_info,tp_error,choi_min_eig")

METRIC_NAMES = ("I_x", "I_y", "I_z", "coherent_info", "tp_error", "choi_min_eig")

QUANTITIES = ("I_x", "I_y", "I_z", "coherent_info")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


class ResumptionConflictError(RuntimeError):
    """Existing output directory belongs to a different configuration
    (CLI exit code 3)."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_amplitude_pair(site) -> np.ndarray:
    """One bulk-site state from JSON: two entries, each a number or [re, im]."""
    def as_complex(x):
        if isinstance(x, (list, tuple)):
            re, im = x
            return complex(float(re), float(im))
        return complex(float(x), 0.0)

    a, b = site
    return np.array([as_complex(a), as_complex(b)], dtype=np.complex128)


@dataclass
class ExperimentConfig:
    """Full experiment description; the defaults are the production protocol."""

    n_sites: int = 14
    J_list: tuple[float, ...] = (0.1, 0.075, 0.05, 0.025)
    delta_list: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5)
    n_realizations: int = 100
    t_max: float = 2000.0
    dt: float = 0.1
    sample_stride: int = 10
    master_seed: int = 123456789
    bulk_spec: str | list = "all-up"
    thresholds: dict = field(
        default_factory=lambda: {"integrity": 0.7, "coherent_info": 1.2})
    output_dir: str = "results"
    dump_channels: bool = False
    workers: int = 1
    krylov_tolerance: float = 1e-9
    max_krylov_dim: int = 30
    encoding_pair_style: str = "both-edges"
    trace_samples: int = 15

    def __post_init__(self) -> None:
        self.J_list = tuple(float(j) for j in self.J_list)
        self.delta_list = tuple(float(d) for d in self.delta_list)
        if self.n_sites < 5:
            raise ConfigError("n_sites must be >= 5")
        if not self.J_list or not self.delta_list:
            raise ConfigError("J_list and delta_list must be non-empty")
        if any(d < 0 for d in self.delta_list):
            raise ConfigError("delta values must be >= 0")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if self.t_max <= 0 or self.dt <= 0:
            raise ConfigError("t_max and dt must be positive")
        if self.sample_stride < 1:
            raise ConfigError("sample_stride must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.encoding_pair_style not in ("both-edges", "left-edge"):
            raise ConfigError("encoding_pair_style must be 'both-edges' or 'left-edge'")
        if isinstance(self.bulk_spec, str):
            if self.bulk_spec not in ("all-up", "all-plus"):
                raise ConfigError("bulk_spec must be 'all-up', 'all-plus' or a site list")
        else:
            try:
                self.bulk_spec = [_parse_amplitude_pair(site)
                                  for site in self.bulk_spec]
            except (TypeError, ValueError, IndexError) as exc:
                raise ConfigError(f"invalid fixed-product bulk_spec: {exc}") from exc
        unknown = set(self.thresholds) - {"integrity", "coherent_info"}
        if unknown:
            raise ConfigError(f"unknown threshold keys {sorted(unknown)}")
        self.thresholds = {"integrity": float(self.thresholds.get("integrity", 0.7)),
                           "coherent_info": float(self.thresholds.get("coherent_info", 1.2))}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["J_list"] = list(self.J_list)
        out["delta_list"] = list(self.delta_list)
        if not isinstance(self.bulk_spec, str):
            out["bulk_spec"] = [[[z.real, z.imag] for z in site]
                                for site in self.bulk_spec]
        return out

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, krylov_tolerance=self.krylov_tolerance,
                                max_krylov_dim=self.max_krylov_dim)

    def schedule(self) -> SamplingSchedule:
        return SamplingSchedule(t_max=self.t_max, sample_stride=self.sample_stride)

    def threshold_for(self, quantity: str) -> float:
        if quantity == "coherent_info":
            return self.thresholds["coherent_info"]
        return self.thresholds["integrity"]

    def conventions(self) -> dict:
        return {
            "site_ordering": "site 1 is the most significant bit of the basis index",
            "spin_convention": "bit 0 = spin up; Z|up> = +|up>",
            "y_convention": "Y = i*X*Z with the i carried by the stored phase",
            "logical_basis": list(LOGICAL_BASIS_LABELS),
            "vectorization": "row-major over the logical basis",
            "edge_encoding": "logical qubits on sites 1 and N; sites 2 and N-1 fixed to |+>",
            "encoding_pair_style": self.encoding_pair_style,
            "bulk_spec": self.bulk_spec if isinstance(self.bulk_spec, str) else "fixed-product",
            "prng": "numpy PCG64",
            "seed_derivation": "sha256('edgemem-disorder:<master_seed>:<index>')[:8] big-endian",
            "input_order": "4 basis states, then (plus, imag) for each index pair m<n",
        }


# ---------------------------------------------------------------------------
# single realization

@dataclass(frozen=True)
class RealizationRecord:
    J: float
    delta: float
    realization_index: int
    disorder: DisorderRealization
    times: np.ndarray
    metrics: dict[str, np.ndarray]
    channels: tuple[ChannelMatrix, ...] | None = None

    def csv_rows(self) -> list[str]:
        rows = []
        for k, t in enumerate(self.times):
            cells = [str(self.realization_index), _fmt(self.J), _fmt(self.delta),
                     _fmt(t)]
            cells += [_fmt(self.metrics[name][k]) for name in METRIC_NAMES]
            rows.append(",".join(cells))
        return rows


def run_realization(config: ExperimentConfig, J: float, delta: float,
                    realization_index: int) -> RealizationRecord:
    """Disorder draw -> Hamiltonian -> 16-input tomography -> channel metrics."""
    params = ModelParams(n_sites=config.n_sites, J=J, delta=delta,
                         master_seed=config.master_seed)
    dis = sample_disorder(params, realization_index)
    h = build_hamiltonian(params, dis)
    result = run_input_set(h, config.bulk_spec, config.schedule(),
                           config.integrator())
    encodings = directed_encodings(config.encoding_pair_style)

    n_times = result.times.size
    metrics = {name: np.empty(n_times) for name in METRIC_NAMES}
    channels = [] if config.dump_channels else None
    for k in range(n_times):
        channel = assemble_channel(result.states_at(k), t=float(result.times[k]))
        report = validate_cptp(channel)
        metrics["tp_error"][k] = report.trace_preservation_error
        metrics["choi_min_eig"][k] = report.choi_min_eigenvalue
        for enc, name in zip(encodings, ("I_x", "I_y", "I_z")):
            metrics[name][k] = directed_integrity(channel, enc)
        metrics["coherent_info"][k] = coherent_information(channel)
        if channels is not None:
            channels.append(channel)

    return RealizationRecord(
        J=J, delta=delta, realization_index=realization_index, disorder=dis,
        times=result.times, metrics=metrics,
        channels=tuple(channels) if channels is not None else None,
    )


# ---------------------------------------------------------------------------
# sweep persistence

def _triple_key(J: float, delta: float, index: int) -> str:
    return f"J={_fmt(J)}_delta={_fmt(delta)}_r={index:05d}"


def _complex_matrix_payload(matrix: np.ndarray) -> list[list[float]]:
    flat = np.asarray(matrix).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _write_channel_dump(path: Path, config: ExperimentConfig,
                        record: RealizationRecord) -> None:
    payload = {
        "header": {
            **config.conventions(),
            "J": record.J,
            "delta": record.delta,
            "realization_index": record.realization_index,
            "matrix_shape": [16, 16],
            "entry_format": "[re, im], row-major",
        },
        "times": [float(t) for t in record.times],
        "channel_matrices": [_complex_matrix_payload(c.matrix)
                             for c in record.channels],
        "choi_states": [_complex_matrix_payload(channel_to_choi(c).matrix)
                        for c in record.channels],
    }
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def _execute_triple(config: ExperimentConfig, J: float, delta: float,
                    index: int, out_dir: Path) -> tuple[str, str, str]:
    """Run one grid point and flush it; returns (key, status, detail)."""
    key = _triple_key(J, delta, index)
    parts_dir = out_dir / "parts"
    try:
        record = run_realization(config, J, delta, index)
        if config.dump_channels:
            channels_dir = out_dir / "channels"
            channels_dir.mkdir(exist_ok=True)
            _write_channel_dump(channels_dir / f"{key}.json", config, record)
        tmp = parts_dir / f"{key}.csv.tmp"
        with open(tmp, "w", newline="") as fh:
            fh.write("\n".join(record.csv_rows()) + "\n")
        os.replace(tmp, parts_dir / f"{key}.csv")
        return key, "ok", ""
    except Exception as exc:  # recorded with provenance; the sweep continues
        logger.exception("realization %s failed", key)
        tmp = parts_dir / f"{key}.error.tmp"
        with open(tmp, "w") as fh:
            fh.write(f"{type(exc).__name__}: {exc}\n")
        os.replace(tmp, parts_dir / f"{key}.error")
        return key, "error", f"{type(exc).__name__}: {exc}"


def _sweep_worker(config_dict: dict, J: float, delta: float, index: int,
                  out_dir: str) -> tuple[str, str, str]:
    config = ExperimentConfig.from_dict(config_dict)
    return _execute_triple(config, J, delta, index, Path(out_dir))


def build_manifest(config: ExperimentConfig) -> dict:
    realizations = []
    for delta in sorted(config.delta_list):
        for index in range(config.n_realizations):
            params = ModelParams(n_sites=config.n_sites, J=config.J_list[0],
                                 delta=delta, master_seed=config.master_seed)
            dis = sample_disorder(params, index)
            entry = dis.to_dict()
            entry["delta"] = delta
            realizations.append(entry)
    return {
        "package_version": edgemem.__version__,
        "config": config.to_dict(),
        "conventions": config.conventions(),
        "realizations": realizations,
    }


def _manifest_comparable(manifest: dict) -> dict:
    config = dict(manifest.get("config", {}))
    config.pop("workers", None)
    config.pop("output_dir", None)
    return {"package_version": manifest.get("package_version"), "config": config}


def scheduled_triples(config: ExperimentConfig) -> list[tuple[float, float, int]]:
    """The full grid in canonical (J, delta, index) ascending order."""
    return [(J, delta, index)
            for J in sorted(config.J_list)
            for delta in sorted(config.delta_list)
            for index in range(config.n_realizations)]


def merge_results(config: ExperimentConfig, out_dir: Path) -> tuple[Path, int, int]:
    """Build results.csv (and failures.csv) from the part files."""
    parts_dir = out_dir / "parts"
    results_path = out_dir / "results.csv"
    failures: list[str] = []
    n_rows = 0
    tmp = out_dir / "results.csv.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for J, delta, index in scheduled_triples(config):
            key = _triple_key(J, delta, index)
            part = parts_dir / f"{key}.csv"
            err = parts_dir / f"{key}.error"
            if part.exists():
                with open(part) as pf:
                    content = pf.read()
                fh.write(content)
                n_rows += content.count("\n")
            elif err.exists():
                failures.append(f"{key},{err.read_text().strip()}")
    os.replace(tmp, results_path)
    if failures:
        with open(out_dir / "failures.csv", "w", newline="") as fh:
            fh.write("key,error\n")
            fh.write("\n".join(failures) + "\n")
    return results_path, n_rows, len(failures)


def run_sweep(config: ExperimentConfig) -> dict:
    """Execute the grid, resuming over any completed (J, delta, index) triples."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "parts").mkdir(exist_ok=True)

    manifest = build_manifest(config)
    manifest_path = out_dir / "manifest.json"
    if manifest_path.exists():
        with open(manifest_path) as fh:
            existing = json.load(fh)
        if _manifest_comparable(existing) != _manifest_comparable(manifest):
            raise ResumptionConflictError(
                f"{manifest_path} belongs to a different configuration; "
                "refusing to mix results")
    else:
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=1)

    triples = scheduled_triples(config)
    parts_dir = out_dir / "parts"
    pending = [t for t in triples
               if not (parts_dir / f"{_triple_key(*t)}.csv").exists()
               and not (parts_dir / f"{_triple_key(*t)}.error").exists()]

    statuses: list[tuple[str, str, str]] = []
    if config.workers == 1 or not pending:
        for J, delta, index in pending:
            statuses.append(_execute_triple(config, J, delta, index, out_dir))
    else:
        config_dict = config.to_dict()
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_sweep_worker, config_dict, J, delta, index,
                                   str(out_dir))
                       for J, delta, index in pending]
            for fut in futures:
                statuses.append(fut.result())

    results_path, n_rows, n_failed = merge_results(config, out_dir)
    summary = {
        "n_scheduled": len(triples),
        "n_run": len(pending),
        "n_skipped": len(triples) - len(pending),
        "n_failed": n_failed,
        "n_rows": n_rows,
        "results_path": str(results_path),
    }
    logger.info("sweep complete: %s", summary)
    return summary


# ---------------------------------------------------------------------------
# analysis

def _load_results(results_dir: Path) -> dict:
    """Parse results.csv into per-(J, delta) trace blocks on a common grid."""
    path = results_dir / "results.csv"
    if not path.exists():
        raise ConfigError(f"no results.csv under {results_dir}")
    with open(path) as fh:
        header = fh.readline().strip()
        if header != RESULTS_HEADER:
            raise ConfigError(f"unexpected results header {header!r}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    by_cell: dict[tuple[float, float], dict[int, list[tuple[float, ...]]]] = {}
    for row in rows:
        index = int(row[0])
        J, delta, t = float(row[1]), float(row[2]), float(row[3])
        values = tuple(float(x) for x in row[4:])
        by_cell.setdefault((J, delta), {}).setdefault(index, []).append((t, *values))
    cells = {}
    for cell, per_real in sorted(by_cell.items()):
        indices = sorted(per_real)
        times = None
        traces = {name: [] for name in METRIC_NAMES}
        for index in indices:
            block = sorted(per_real[index])
            t_grid = np.array([entry[0] for entry in block])
            if times is None:
                times = t_grid
            elif t_grid.shape != times.shape or not np.array_equal(t_grid, times):
                raise ConfigError(
                    f"inconsistent time grids across realizations in cell {cell}")
            for pos, name in enumerate(METRIC_NAMES, start=1):
                traces[name].append([entry[pos] for entry in block])
        cells[cell] = {
            "indices": indices,
            "times": times,
            "traces": {name: np.asarray(vals) for name, vals in traces.items()},
        }
    return cells


def _default_tau_grid(quantity: str) -> np.ndarray:
    if quantity == "coherent_info":
        return np.round(np.arange(0.0, 2.0001, 0.1), 10)
    return np.round(np.arange(0.0, 1.0001, 0.05), 10)


def analyze(
    results_dir,
    quantity: str,
    tau_grid: Sequence[float] | None = None,
    t_grid: Sequence[float] | None = None,
    tau: float | None = None,
    trace_J: float | None = None,
    trace_delta: float | None = None,
    trace_samples: int | None = None,
    out_dir=None,
) -> dict:
    """Aggregate per-realization traces into the four standard tables.

    Writes recovery_vs_t.csv, recovery_vs_tau.csv, heatmap.csv and
    traces_sample.csv under ``out_dir`` (default: <results_dir>/analysis).
    """
    if quantity not in QUANTITIES:
        raise ConfigError(f"quantity must be one of {QUANTITIES}")
    results_dir = Path(results_dir)
    manifest_path = results_dir / "manifest.json"
    config = None
    if manifest_path.exists():
        with open(manifest_path) as fh:
            config = ExperimentConfig.from_dict(json.load(fh)["config"])
    if tau is None:
        tau = config.threshold_for(quantity) if config is not None else (
            1.2 if quantity == "coherent_info" else 0.7)
    if trace_samples is None:
        trace_samples = config.trace_samples if config is not None else 15
    tau_values = (np.asarray(list(tau_grid), dtype=float)
                  if tau_grid is not None else _default_tau_grid(quantity))

    cells = _load_results(results_dir)
    out_dir = Path(out_dir) if out_dir is not None else results_dir / "analysis"
    out_dir.mkdir(parents=True, exist_ok=True)

    def cell_times(cell) -> np.ndarray:
        times = cells[cell]["times"]
        if t_grid is None:
            return times
        wanted = np.asarray(list(t_grid), dtype=float)
        mask = np.isin(times, wanted)
        if not mask.any():
            raise ConfigError("t_grid selects no sampled times")
        return times[mask]

    # (a) recovery fraction versus time at the fixed threshold
    path_vs_t = out_dir / "recovery_vs_t.csv"
    with open(path_vs_t, "w", newline="") as fh:
        fh.write("quantity,J,delta,tau,t,fraction\n")
        for (J, delta), block in cells.items():
            stats = recovery_fraction(block["traces"][quantity], tau,
                                      block["times"], quantity)
            keep = np.isin(block["times"], cell_times((J, delta)))
            for t, frac in zip(stats.times[keep], stats.fraction[keep]):
                fh.write(f"{quantity},{_fmt(J)},{_fmt(delta)},{_fmt(tau)},"
                         f"{_fmt(t)},{_fmt(frac)}\n")

    # (b) final recovery fraction versus threshold
    path_vs_tau = out_dir / "recovery_vs_tau.csv"
    with open(path_vs_tau, "w", newline="") as fh:
        fh.write("quantity,J,delta,tau,fraction\n")
        for (J, delta), block in cells.items():
            for tv in tau_values:
                stats = recovery_fraction(block["traces"][quantity], float(tv),
                                          block["times"], quantity)
                fh.write(f"{quantity},{_fmt(J)},{_fmt(delta)},{_fmt(tv)},"
                         f"{_fmt(stats.final_fraction())}\n")

    # (c) heat map of the final recovery fraction over the grid
    j_values = sorted({J for J, _ in cells})
    d_values = sorted({delta for _, delta in cells})
    path_heat = out_dir / "heatmap.csv"
    with open(path_heat, "w", newline="") as fh:
        fh.write("delta," + ",".join(_fmt(J) for J in j_values) + "\n")
        for delta in d_values:
            row = [_fmt(delta)]
            for J in j_values:
                block = cells.get((J, delta))
                if block is None:
                    row.append("nan")
                    continue
                stats = recovery_fraction(block["traces"][quantity], tau,
                                          block["times"], quantity)
                row.append(_fmt(stats.final_fraction()))
            fh.write(",".join(row) + "\n")

    # (d) sample traces with their ensemble average for one grid cell
    if trace_J is None or trace_delta is None:
        trace_cell = sorted(cells)[0]
    else:
        trace_cell = (float(trace_J), float(trace_delta))
        if trace_cell not in cells:
            raise ConfigError(f"no results for cell {trace_cell}")
    block = cells[trace_cell]
    chosen = block["indices"][:trace_samples]
    sel = [block["indices"].index(i) for i in chosen]
    traces = block["traces"][quantity][sel]
    path_traces = out_dir / "traces_sample.csv"
    with open(path_traces, "w", newline="") as fh:
        fh.write("t," + ",".join(f"r{i}" for i in chosen) + ",mean\n")
        mean = traces.mean(axis=0)
        for k, t in enumerate(block["times"]):
            cells_row = [_fmt(t)] + [_fmt(traces[r, k]) for r in range(len(chosen))]
            cells_row.append(_fmt(mean[k]))
            fh.write(",".join(cells_row) + "\n")

    return {
        "recovery_vs_t": str(path_vs_t),
        "recovery_vs_tau": str(path_vs_tau),
        "heatmap": str(path_heat),
        "traces_sample": str(path_traces),
        "trace_cell": trace_cell,
        "tau": float(tau),
    }


# ---------------------------------------------------------------------------
# validation suite

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _dense_propagate(h: WeightedPauliSum, v0: StateVector, t: float) -> np.ndarray:
    """Independent dense eigendecomposition propagator (oracle path)."""
    dense = h.to_dense()
    w, u = np.linalg.eigh(dense)
    return u @ (np.exp(-1j * w * t) * (u.conj().T @ v0.amplitudes))


def run_validation_suite(n_sites: int = 6, seed: int = 20240) -> list[CheckResult]:
    """Fast cross-checks of every pipeline stage at small system size."""
    checks: list[CheckResult] = []
    rng = np.random.default_rng(seed)

    def record(name: str, passed: bool, detail: str) -> None:
        checks.append(CheckResult(name, bool(passed), detail))

    # matrix-free algebra versus dense matrices
    params = ModelParams(n_sites=n_sites, J=0.1, delta=1.0, master_seed=seed)
    dis = sample_disorder(params, 0)
    h = build_hamiltonian(params, dis)
    amps = rng.normal(size=2 ** n_sites) + 1j * rng.normal(size=2 ** n_sites)
    v = StateVector(n_sites, amps / np.linalg.norm(amps))
    from edgemem.paulis import apply_sum
    dense_out = h.to_dense() @ v.amplitudes
    err = np.linalg.norm(apply_sum(h, v) - dense_out) / np.linalg.norm(dense_out)
    record("pauli-dense-agreement", err <= 1e-12, f"relative error {err:.2e}")

    # boundary operators commute with the unperturbed Hamiltonian exactly
    params0 = ModelParams(n_sites=n_sites, J=0.0, delta=1.0, master_seed=seed)
    h0 = build_hamiltonian(params0, sample_disorder(params0, 0))
    report = check_edge_commutation(h0, edge_operators(n_sites))
    record("edge-operators-conserved", report.all_zero,
           "all six commutators vanish" if report.all_zero else "nonzero commutator")

    # Krylov propagator versus dense eigendecomposition
    from edgemem.evolution import step
    cfg = IntegratorConfig()
    state = prepare_state(input_preparations()[4], n_sites)
    target = _dense_propagate(h, state, 10.0)
    current = state
    for _ in range(100):
        current = step(h, current, cfg)
    fidelity = abs(np.vdot(target, current.amplitudes)) ** 2
    record("propagator-dense-oracle", fidelity >= 1.0 - 1e-8,
           f"fidelity deficit {1.0 - fidelity:.2e}")

    # tomographic reconstruction versus the disentangler partial trace
    schedule = SamplingSchedule(t_max=10.0, sample_stride=20)
    result = run_input_set(h, "all-up", schedule, cfg,
                           preparations=input_preparations()[:3])
    worst = 0.0
    for p_idx, prep in enumerate(result.preparations):
        v0 = prepare_state(prep, n_sites)
        for k, t in enumerate(result.times):
            dense_state = StateVector(n_sites, _dense_propagate(h, v0, float(t)))
            oracle = reduced_edge_state_oracle(dense_state)
            worst = max(worst, trace_distance(result.edge_states[p_idx, k], oracle))
    record("tomography-disentangler-oracle", worst <= 1e-8,
           f"max trace distance {worst:.2e}")

    # zero coupling keeps the edge channel the identity
    config = ExperimentConfig(
        n_sites=n_sites, J_list=(0.0,), delta_list=(1.0,), n_realizations=2,
        t_max=20.0, sample_stride=50, output_dir="unused")
    worst_dev = 0.0
    for index in range(2):
        rec = run_realization(config, 0.0, 1.0, index)
        for name, ref in (("I_x", 1.0), ("I_y", 1.0), ("I_z", 1.0),
                          ("coherent_info", 2.0)):
            worst_dev = max(worst_dev, float(np.max(np.abs(rec.metrics[name] - ref))))
    record("identity-channel-at-zero-coupling", worst_dev <= 1e-7,
           f"max metric deviation {worst_dev:.2e}")

    # CPTP certificate and data-processing inequality on a perturbed run
    config = ExperimentConfig(
        n_sites=n_sites, J_list=(0.1,), delta_list=(1.0,), n_realizations=1,
        t_max=5.0, sample_stride=10, output_dir="unused")
    rec = run_realization(config, 0.1, 1.0, 0)
    cptp_ok = (np.max(rec.metrics["tp_error"]) <= 1e-6
               and np.min(rec.metrics["choi_min_eig"]) >= -1e-6)
    record("cptp-certificate", bool(cptp_ok),
           f"tp_error {np.max(rec.metrics['tp_error']):.2e}, "
           f"min choi eig {np.min(rec.metrics['choi_min_eig']):.2e}")

    params = ModelParams(n_sites=n_sites, J=0.1, delta=1.0,
                         master_seed=config.master_seed)
    h = build_hamiltonian(params, sample_disorder(params, 0))
    res = run_input_set(h, "all-up", SamplingSchedule(t_max=5.0, sample_stride=50),
                        cfg)
    channel = assemble_channel(res.states_at(-1), t=5.0)
    dpi_ok = True
    for _ in range(20):
        a = _random_density(rng)
        b = _random_density(rng)
        before = trace_distance(a, b)
        after = trace_distance(channel.apply(a), channel.apply(b))
        if after > before + 1e-7:
            dpi_ok = False
            break
    record("data-processing-inequality", dpi_ok, "20 random state pairs")

    # measure sanity
    eye4 = np.eye(4) / 4.0
    pure = np.zeros((4, 4)); pure[0, 0] = 1.0
    metric_ok = (
        abs(trace_distance(pure, eye4) - 0.75) < 1e-12
        and abs(von_neumann_entropy(eye4) - 2.0) < 1e-12
        and abs(classical_capacity_lower(1.0) - 1.0) < 1e-12
        and abs(distinguish_probability(0.4) - 0.7) < 1e-12)
    record("measure-values", metric_ok, "trace distance, entropy, capacity spot checks")

    return checks


def _random_density(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / rho.trace().real
