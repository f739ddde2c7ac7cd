"""Monte-Carlo benchmark campaigns: config, runner, persistence.

A campaign is the cross product of sweep lists (matrix kinds x solvers x
n x k, optionally m) times a trial count. Each trial gets a seed derived
from the master seed and its own coordinates, never from its position in
the schedule, so results are independent of execution order and thread
count. Outputs are a fixed-header trials.csv, aggregates.json, and a
manifest; all non-timing bytes are reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .certify import measurement_bound
from .errors import BudgetExceededError, ConfigError
from .kernels import BACKEND
from .matrices import MatrixKind, build_matrix
from .metrics import (
    MetricReport,
    TRIAL_METRIC_KEYS,
    compute_trial_metrics,
    csv_value,
    is_success,
    json_value,
)
from .model import Amplitude, NoiseKind, NoiseModel, generate_sparse_signal, measure, sparsity_level
from .recovery import Solver, spec_for, recover
from .rng import derive_seed

TRIALS_CSV_HEADER = (
    "trial_id,seed,matrix_kind,solver,n,m,k,sampling_time_s,recovery_time_s,"
    "processing_time_s,recovery_error,mse,correlation,covariance,"
    "error_sparsity_count,error_sparsity_support,compression_ratio,snr_db,"
    "rsnr,hamming_distance,success,converged"
)


def default_threads() -> int:
    """Worker count from CSBENCH_THREADS; affects scheduling only, never results."""
    try:
        return max(1, int(os.environ.get("CSBENCH_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CampaignConfig:
    n_values: tuple[int, ...]
    k_values: tuple[int, ...]
    matrix_kinds: tuple[MatrixKind, ...]
    solvers: tuple[Solver, ...]
    trials: int
    seed: int
    m_values: tuple[int, ...] | None = None
    noise: NoiseModel = NoiseModel.none()
    success_threshold: float = 0.9
    amplitude: Amplitude = Amplitude.UNIT_GAUSSIAN
    normalize: bool = True
    archive: bool = False
    support_tol: float = 1e-8
    output_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "k_values", tuple(int(v) for v in self.k_values))
        object.__setattr__(self, "matrix_kinds",
                           tuple(MatrixKind(v) for v in self.matrix_kinds))
        object.__setattr__(self, "solvers", tuple(Solver(v) for v in self.solvers))
        if self.m_values is not None:
            object.__setattr__(self, "m_values",
                               tuple(int(v) for v in self.m_values))
        for field, values in (("n", self.n_values), ("matrix", self.matrix_kinds),
                              ("solver", self.solvers), ("k", self.k_values)):
            if not values:
                raise ConfigError(field, "sweep list must be non-empty")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")

    def resolved_m(self, n: int, k: int) -> tuple[int, ...]:
        """The m sweep for one (n, k) cell; defaulted from the sampling bound."""
        if self.m_values is not None:
            return self.m_values
        return (measurement_bound(n, max(k, 1), 2.0),)

    def to_json_dict(self) -> dict:
        return {
            "n": list(self.n_values),
            "k": list(self.k_values),
            "m": None if self.m_values is None else list(self.m_values),
            "matrix": [k.value for k in self.matrix_kinds],
            "solver": [s.value for s in self.solvers],
            "trials": self.trials,
            "seed": self.seed,
            "noise": {"kind": self.noise.kind.value, "sigma": self.noise.sigma},
            "success_threshold": self.success_threshold,
            "amplitude": self.amplitude.value,
            "normalize": self.normalize,
            "archive": self.archive,
            "support_tol": self.support_tol,
            "out": self.output_dir,
        }


# --------------------------------------------------------------------------
# Config parsing: strict JSON schema, unknown keys are hard errors.

_TOP_KEYS = {"n", "k", "m", "matrix", "solver", "trials", "seed", "noise",
             "success_threshold", "amplitude", "normalize", "archive",
             "support_tol", "out"}
_REQUIRED = ("n", "k", "matrix", "solver", "trials", "seed")


def _as_list(value) -> list:
    return value if isinstance(value, list) else [value]


def _int_list(doc: dict, key: str, minimum: int) -> tuple[int, ...]:
    values = _as_list(doc[key])
    if not values:
        raise ConfigError(key, "sweep list must be non-empty")
    out = []
    for idx, v in enumerate(values):
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"{key}[{idx}]", f"expected an integer, got {v!r}")
        if v < minimum:
            raise ConfigError(f"{key}[{idx}]", f"must be >= {minimum}, got {v}")
        out.append(v)
    return tuple(out)


def _enum_list(doc: dict, key: str, enum_cls) -> tuple:
    values = _as_list(doc[key])
    if not values:
        raise ConfigError(key, "sweep list must be non-empty")
    out = []
    for idx, v in enumerate(values):
        try:
            out.append(enum_cls(v))
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            raise ConfigError(f"{key}[{idx}]",
                              f"expected one of {allowed}, got {v!r}") from None
    return tuple(out)


def _noise_from(doc: dict) -> NoiseModel:
    raw = doc.get("noise")
    if raw is None:
        return NoiseModel.none()
    if not isinstance(raw, dict):
        raise ConfigError("noise", "expected an object {kind, sigma}")
    unknown = set(raw) - {"kind", "sigma"}
    if unknown:
        raise ConfigError(f"noise.{sorted(unknown)[0]}", "unknown key")
    kind = raw.get("kind", "none")
    sigma = raw.get("sigma", 0.0)
    if kind not in (NoiseKind.NONE.value, NoiseKind.AWGN.value):
        raise ConfigError("noise.kind", f"expected none or awgn, got {kind!r}")
    if not isinstance(sigma, (int, float)) or isinstance(sigma, bool) or sigma < 0:
        raise ConfigError("noise.sigma", f"must be a non-negative number, got {sigma!r}")
    if kind == NoiseKind.NONE.value and sigma != 0:
        raise ConfigError("noise.sigma", "must be 0 when kind is none")
    return NoiseModel.awgn(float(sigma)) if kind == NoiseKind.AWGN.value \
        else NoiseModel.none()


def parse_config(text: str) -> CampaignConfig:
    """Parse the campaign JSON document; omitted fields take defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    for key in _REQUIRED:
        if key not in doc:
            raise ConfigError(key, "required key missing")

    n_values = _int_list(doc, "n", minimum=1)
    k_values = _int_list(doc, "k", minimum=0)
    if max(k_values) > min(n_values):
        raise ConfigError("k", f"sparsity {max(k_values)} exceeds the smallest "
                               f"n {min(n_values)}")
    m_values = None
    if doc.get("m") is not None:
        m_values = _int_list(doc, "m", minimum=1)
        if max(m_values) > min(n_values):
            raise ConfigError("m", f"m {max(m_values)} exceeds the smallest "
                                   f"n {min(n_values)}")
    if not isinstance(doc["trials"], int) or isinstance(doc["trials"], bool) \
            or doc["trials"] < 1:
        raise ConfigError("trials", f"must be a positive integer, got {doc['trials']!r}")
    if not isinstance(doc["seed"], int) or isinstance(doc["seed"], bool):
        raise ConfigError("seed", f"must be an integer, got {doc['seed']!r}")

    threshold = doc.get("success_threshold", 0.9)
    if not isinstance(threshold, (int, float)) or isinstance(threshold, bool) \
            or not 0.0 < threshold <= 1.0:
        raise ConfigError("success_threshold", f"must lie in (0, 1], got {threshold!r}")
    support_tol = doc.get("support_tol", 1e-8)
    if not isinstance(support_tol, (int, float)) or isinstance(support_tol, bool) \
            or support_tol < 0:
        raise ConfigError("support_tol", f"must be >= 0, got {support_tol!r}")
    for key in ("normalize", "archive"):
        if key in doc and not isinstance(doc[key], bool):
            raise ConfigError(key, f"must be a boolean, got {doc[key]!r}")
    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out", f"must be a string path, got {out!r}")
    amplitude = doc.get("amplitude", Amplitude.UNIT_GAUSSIAN.value)
    try:
        amplitude = Amplitude(amplitude)
    except ValueError:
        allowed = ", ".join(a.value for a in Amplitude)
        raise ConfigError("amplitude", f"expected one of {allowed}, "
                                       f"got {amplitude!r}") from None

    return CampaignConfig(
        n_values=n_values, k_values=k_values,
        matrix_kinds=_enum_list(doc, "matrix", MatrixKind),
        solvers=_enum_list(doc, "solver", Solver),
        trials=doc["trials"], seed=doc["seed"], m_values=m_values,
        noise=_noise_from(doc), success_threshold=float(threshold),
        amplitude=amplitude, normalize=doc.get("normalize", True),
        archive=doc.get("archive", False), support_tol=float(support_tol),
        output_dir=out)


# --------------------------------------------------------------------------
# Runner.

@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    seed: int
    matrix_kind: MatrixKind
    solver: Solver
    n: int
    m: int
    k: int
    sampling_time: float
    recovery_time: float
    processing_time: float
    metrics: MetricReport
    success: bool
    converged: bool
    x: np.ndarray | None = None
    x_hat: np.ndarray | None = None

    def csv_row(self) -> str:
        v = self.metrics.values
        cells = [
            str(self.trial_id), str(self.seed), self.matrix_kind.value,
            self.solver.value, str(self.n), str(self.m), str(self.k),
            csv_value(self.sampling_time), csv_value(self.recovery_time),
            csv_value(self.processing_time),
        ]
        cells.extend(csv_value(v[key]) for key in TRIAL_METRIC_KEYS)
        cells.append("true" if self.success else "false")
        cells.append("true" if self.converged else "false")
        return ",".join(cells)


@dataclass(frozen=True)
class CampaignResult:
    config: CampaignConfig
    records: tuple[TrialRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def aggregates(self) -> list[dict]:
        return aggregate_records(self.records)


def _combos(config: CampaignConfig):
    for kind in config.matrix_kinds:
        for solver in config.solvers:
            for n in config.n_values:
                for k in config.k_values:
                    for m in config.resolved_m(n, k):
                        # identity admits no compression; it always runs square
                        yield kind, solver, n, (n if kind is MatrixKind.IDENTITY
                                                else m), k


def _run_trial(config: CampaignConfig, trial_id: int, kind: MatrixKind,
               solver: Solver, n: int, m: int, k: int, t: int) -> TrialRecord:
    trial_seed = derive_seed(config.seed, "trial", kind.value, solver.value,
                             n, m, k, t)
    t0 = time.perf_counter()
    matrix = build_matrix(kind, m, n, seed=derive_seed(trial_seed, "matrix"),
                          normalize=config.normalize)
    signal = generate_sparse_signal(n, k, config.amplitude,
                                    seed=derive_seed(trial_seed, "signal"))
    meas = measure(matrix, signal, config.noise,
                   seed=derive_seed(trial_seed, "noise"))
    spec = spec_for(solver, max(k, 1)) if solver is not Solver.BASIS_PURSUIT \
        else spec_for(solver)
    try:
        result = recover(matrix, meas, spec)
    except BudgetExceededError as exc:
        raise BudgetExceededError(
            f"trial {trial_id} ({kind.value}/{solver.value}, n={n}, m={m}, "
            f"k={k}): {exc}") from exc
    y_hat = matrix.entries @ result.x_hat
    report = compute_trial_metrics(signal, result.x_hat, meas.y, y_hat, m, n,
                                   support_tol=config.support_tol)
    if k == 0:
        # zero signal: every relative metric is undefined, so success means
        # the reconstruction is numerically zero-sparse too
        success = sparsity_level(result.x_hat, config.support_tol) == 0
    else:
        success = is_success(signal.values, result.x_hat,
                             config.success_threshold)
    processing = time.perf_counter() - t0
    return TrialRecord(
        trial_id=trial_id, seed=trial_seed, matrix_kind=kind, solver=solver,
        n=n, m=m, k=k, sampling_time=meas.sampling_time,
        recovery_time=result.recovery_time, processing_time=processing,
        metrics=report, success=success, converged=result.converged,
        x=signal.values if config.archive else None,
        x_hat=result.x_hat if config.archive else None)


def run_campaign(config: CampaignConfig,
                 threads: int | None = None) -> CampaignResult:
    """Execute the full sweep; deterministic apart from the timing fields."""
    tasks = []
    trial_id = 0
    for kind, solver, n, m, k in _combos(config):
        for t in range(config.trials):
            tasks.append((trial_id, kind, solver, n, m, k, t))
            trial_id += 1
    if threads is None:
        threads = default_threads()
    if threads <= 1:
        records = [_run_trial(config, *task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda task: _run_trial(config, *task),
                                    tasks))
    return CampaignResult(config=config, records=tuple(records))


# --------------------------------------------------------------------------
# Aggregation and persistence.

def _mean_std(values: list[float]) -> tuple[float | None, float | None, int]:
    finite = [v for v in values if v is not None and math.isfinite(v)]
    if not finite:
        return None, None, 0
    mean = sum(finite) / len(finite)
    var = sum((v - mean) ** 2 for v in finite) / len(finite)
    return mean, math.sqrt(var), len(finite)


def aggregate_records(records) -> list[dict]:
    """Group trials by (matrix kind, solver, n, k) and summarize each metric."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault(
            (rec.matrix_kind, rec.solver, rec.n, rec.k), []).append(rec)
    out = []
    for (kind, solver, n, k), recs in groups.items():
        metrics_summary = {}
        for key in TRIAL_METRIC_KEYS:
            mean, std, count = _mean_std([r.metrics.values[key] for r in recs])
            metrics_summary[key] = {"mean": json_value(mean),
                                    "stddev": json_value(std), "count": count}
        rsnr_values = [r.metrics.values["rsnr"] for r in recs]
        if any(v is not None and math.isinf(v) for v in rsnr_values):
            mean_rsnr = math.inf
        else:
            mean_rsnr, _, count = _mean_std(rsnr_values)
        success_rate = sum(1 for r in recs if r.success) / len(recs)
        out.append({
            "matrix_kind": kind.value, "solver": solver.value, "n": n, "k": k,
            "trials": len(recs),
            "success_rate": success_rate,
            "failure_rate": 1.0 - success_rate,
            "mean_rsnr": json_value(mean_rsnr),
            "metrics": metrics_summary,
        })
    return out


def _config_hash(config: CampaignConfig) -> str:
    canonical = json.dumps(config.to_json_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def write_outputs(result: CampaignResult, out_dir) -> dict:
    """Write trials.csv, aggregates.json, manifest.json (and the archive).

    Returns the manifest. Output bytes carry no timestamps; two runs with
    the same seed differ only in the timing columns.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [TRIALS_CSV_HEADER] + [rec.csv_row() for rec in result.records]
    (out / "trials.csv").write_text("\n".join(rows) + "\n")
    aggregates = {
        "success_threshold": result.config.success_threshold,
        "groups": result.aggregates(),
    }
    (out / "aggregates.json").write_text(json.dumps(aggregates, indent=2) + "\n")
    manifest = {
        "format": "csbench-campaign/1",
        "version": __version__,
        "kernel_backend": BACKEND,
        "config": result.config.to_json_dict(),
        "config_hash": _config_hash(result.config),
        "trial_rows": len(result.records),
        "timer": {"clock": "perf_counter",
                  "resolution_s": time.get_clock_info("perf_counter").resolution},
        "files": {"trials": "trials.csv", "aggregates": "aggregates.json"},
    }
    if result.config.archive:
        archive = [{"trial_id": rec.trial_id,
                    "x": [float(v) for v in rec.x],
                    "x_hat": [float(v) for v in rec.x_hat]}
                   for rec in result.records]
        (out / "archive.json").write_text(json.dumps(archive) + "\n")
        manifest["files"]["archive"] = "archive.json"
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_trials_csv(path) -> list[dict]:
    """Parse trials.csv back into typed dicts (numbers, bools, markers)."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRIALS_CSV_HEADER:
        raise ConfigError(str(path), "unexpected trials.csv header")
    header = lines[0].split(",")
    int_cols = {"trial_id", "seed", "n", "m", "k", "error_sparsity_count",
                "error_sparsity_support", "hamming_distance"}
    str_cols = {"matrix_kind", "solver"}
    bool_cols = {"success", "converged"}
    out = []
    for line in lines[1:]:
        cells = line.split(",")
        row = {}
        for name, cell in zip(header, cells):
            if name in str_cols:
                row[name] = cell
            elif name in bool_cols:
                row[name] = cell == "true"
            elif name in int_cols:
                row[name] = int(cell)
            else:
                row[name] = float(cell)
        out.append(row)
    return out
