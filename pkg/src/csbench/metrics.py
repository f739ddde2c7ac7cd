"""Per-trial reconstruction-quality metrics and the metric registry.

Every kernel here is a pure function of (original, recovered) vectors.
Quantities with zero denominators are never silently substituted: kernels
raise UndefinedMetricError, and report assembly turns that into an
explicit ``undefined`` marker (None in memory, "undefined" in JSON, nan
in CSV). A zero error energy likewise yields the ``infinite`` marker
(math.inf in memory, "infinite" in JSON, inf in CSV) for the SNR-style
ratios.

The registry classifies each catalog metric by the pipeline stage it
evaluates (sparse representation, sampling matrix, recovery).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType

import numpy as np

from .errors import InvalidArgumentError, UndefinedMetricError
from .model import SparseSignal, sparsity_level


def _pair(x, x_hat) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape or x.ndim != 1:
        raise InvalidArgumentError(
            f"vectors must be 1-d and equal length, got {x.shape} vs {x_hat.shape}")
    return x, x_hat


def recovery_error(x, x_hat) -> float:
    """Relative l2 reconstruction error |x - x_hat| / |x|."""
    x, x_hat = _pair(x, x_hat)
    denom = np.linalg.norm(x)
    if denom == 0.0:
        raise UndefinedMetricError("recovery error undefined for a zero signal")
    return float(np.linalg.norm(x - x_hat) / denom)


def mse(x, x_hat) -> float:
    x, x_hat = _pair(x, x_hat)
    if x.size == 0:
        raise InvalidArgumentError("mse needs at least one component")
    return float(np.mean((x - x_hat) ** 2))


def correlation(x, x_hat) -> float:
    """Product-moment correlation, clamped to [-1, 1] against rounding."""
    x, x_hat = _pair(x, x_hat)
    if x.size < 2:
        raise InvalidArgumentError("correlation needs at least two components")
    dx = x - np.mean(x)
    dy = x_hat - np.mean(x_hat)
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise UndefinedMetricError("correlation undefined for a constant vector")
    return float(min(1.0, max(-1.0, float(dx @ dy) / denom)))


def covariance(x, x_hat) -> float:
    """Population covariance (centered product averaged over components)."""
    x, x_hat = _pair(x, x_hat)
    if x.size == 0:
        raise InvalidArgumentError("covariance needs at least one component")
    return float(np.mean((x - np.mean(x)) * (x_hat - np.mean(x_hat))))


@dataclass(frozen=True)
class ErrorSparsity:
    count_delta: int
    support_mismatch: int


def error_sparsity(x: SparseSignal, x_hat, tol: float = 0.0) -> ErrorSparsity:
    """Sparsity drift of the reconstruction against the planted signal."""
    if tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x_hat.shape != (x.n,):
        raise InvalidArgumentError(f"x_hat must have shape ({x.n},)")
    hat_support = set(int(i) for i in np.flatnonzero(np.abs(x_hat) > tol))
    return ErrorSparsity(
        count_delta=len(hat_support) - x.k,
        support_mismatch=len(hat_support.symmetric_difference(x.support)))


def compression_ratio(m: int, n: int) -> float:
    if not 1 <= m <= n:
        raise InvalidArgumentError(f"need 1 <= m <= n, got m={m}, n={n}")
    return m / n


def snr_db(x, x_hat) -> float:
    """Signal-over-error energy ratio in decibels; math.inf on zero error."""
    x, x_hat = _pair(x, x_hat)
    signal = float(x @ x)
    if signal == 0.0:
        raise UndefinedMetricError("snr undefined for a zero signal")
    err = x - x_hat
    noise = float(err @ err)
    if noise == 0.0:
        return math.inf
    return 10.0 * math.log10(signal / noise)


def rsnr(x, x_hat) -> float:
    """Per-trial recovery SNR |x|^2 / |x - x_hat|^2; math.inf on zero error."""
    x, x_hat = _pair(x, x_hat)
    signal = float(x @ x)
    if signal == 0.0:
        raise UndefinedMetricError("rsnr undefined for a zero signal")
    err = x - x_hat
    noise = float(err @ err)
    if noise == 0.0:
        return math.inf
    return signal / noise


def default_hamming_tol(y) -> float:
    """Comparison tolerance 1e-6 * max(1, |y|_inf) for real-valued vectors."""
    y = np.asarray(y, dtype=np.float64)
    peak = float(np.max(np.abs(y))) if y.size else 0.0
    return 1e-6 * max(1.0, peak)


def hamming_distance(y, y_hat, tol: float) -> int:
    """Number of measurement coordinates differing by more than tol."""
    if tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    y, y_hat = _pair(y, y_hat)
    return int(np.count_nonzero(np.abs(y - y_hat) > tol))


def is_success(x, x_hat, threshold: float = 0.9) -> bool:
    """Recovery counts as success when relative error <= 1 - threshold."""
    if not 0.0 < threshold <= 1.0:
        raise InvalidArgumentError(f"threshold must be in (0, 1], got {threshold}")
    return recovery_error(x, x_hat) <= 1.0 - threshold


# ---------------------------------------------------------------------------
# Registry: which pipeline stage each catalog metric evaluates.

class Process(str, Enum):
    SPARSE_REPRESENTATION = "sparse_representation"
    SAMPLING_MATRIX = "sampling_matrix"
    RECOVERY = "recovery"


@dataclass(frozen=True)
class MetricDescriptor:
    name: str
    processes: frozenset[Process]
    formula: str

    def __post_init__(self):
        object.__setattr__(self, "processes", frozenset(self.processes))
        if not self.processes:
            raise InvalidArgumentError("a metric must evaluate at least one process")


_SR = Process.SPARSE_REPRESENTATION
_SM = Process.SAMPLING_MATRIX
_RC = Process.RECOVERY

_REGISTRY = (
    MetricDescriptor("Coherence", frozenset({_SM, _RC}),
                     "mu(A) = max over i<j of |<a_i, a_j>| for unit columns"),
    MetricDescriptor("RIP", frozenset({_SM}),
                     "(1 - d_k)|x|^2 <= |Ax|^2 <= (1 + d_k)|x|^2 on k-sparse x"),
    MetricDescriptor("NSP", frozenset({_RC}),
                     "no nonzero 2k-sparse vector in the null space"),
    MetricDescriptor("Sparsity", frozenset({_SR}),
                     "k = count of nonzero coefficients"),
    MetricDescriptor("Error sparsity", frozenset({_SR}),
                     "sparsity(x_hat) versus sparsity(x), plus support mismatch"),
    MetricDescriptor("Measurements bounds", frozenset({_SM, _RC}),
                     "m >= c * k * ln(n/k)"),
    MetricDescriptor("Recovery error, MSE", frozenset({_RC}),
                     "R = |x - x_hat|/|x|; MSE = |x - x_hat|^2 / n"),
    MetricDescriptor("Correlation/covariance", frozenset({_RC}),
                     "product-moment r(x, x_hat); population cov(x, x_hat)"),
    MetricDescriptor("Recovery time", frozenset({_RC}),
                     "wall-clock seconds spent in the solver"),
    MetricDescriptor("Sampling time", frozenset({_SM}),
                     "wall-clock seconds spent forming y = Ax"),
    MetricDescriptor("Compression ratio", frozenset({_SM, _RC}),
                     "m / n"),
    MetricDescriptor("Signal to error ratio", frozenset({_SM}),
                     "10 log10(|x|^2 / |x - x_hat|^2) dB"),
    MetricDescriptor("Recovery SNR", frozenset({_SM}),
                     "|x|^2 / |x - x_hat|^2 per trial"),
    MetricDescriptor("Recovery success rate/ Failure rate", frozenset({_SM}),
                     "share of trials with R <= 1 - threshold; its complement"),
    MetricDescriptor("Phase transmission diagram", frozenset({_SM}),
                     "success probability over the (m/n, k/m) plane"),
    MetricDescriptor("Recovered SNR", frozenset({_SM}),
                     "mean per-trial recovery SNR over an experiment set"),
    MetricDescriptor("Hamming distance", frozenset({_SM}),
                     "count of measurement coordinates off by more than tol"),
    MetricDescriptor("Complexity", frozenset({_SR, _SM, _RC}),
                     "asymptotic cost of the stage"),
)

_BY_NAME = {d.name: d for d in _REGISTRY}


def metric_registry() -> tuple[MetricDescriptor, ...]:
    """The full metric-to-process classification, in catalog order."""
    return _REGISTRY


def registry_lookup(name: str) -> MetricDescriptor:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown metric {name!r}") from None


# ---------------------------------------------------------------------------
# Per-trial report assembly.

TRIAL_METRIC_KEYS = (
    "recovery_error", "mse", "correlation", "covariance",
    "error_sparsity_count", "error_sparsity_support", "compression_ratio",
    "snr_db", "rsnr", "hamming_distance",
)


@dataclass(frozen=True)
class MetricReport:
    """Metric name -> value map; None marks undefined, math.inf infinite."""

    values: MappingProxyType
    tolerances: MappingProxyType

    def __post_init__(self):
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        object.__setattr__(self, "tolerances",
                           MappingProxyType(dict(self.tolerances)))

    def to_flat_json_dict(self) -> dict:
        return {name: json_value(v) for name, v in self.values.items()}


def json_value(v):
    """JSON form of a metric value: markers become strings."""
    if v is None:
        return "undefined"
    if isinstance(v, float) and math.isinf(v):
        return "infinite"
    return v


def csv_value(v) -> str:
    """CSV cell for a metric value: 17 significant digits, inf/nan markers."""
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return format(float(v), ".17g")


def compute_trial_metrics(x: SparseSignal, x_hat, y, y_hat, m: int, n: int,
                          support_tol: float = 1e-8,
                          hamming_tol: float | None = None) -> MetricReport:
    """Assemble every per-trial metric; zero-denominator cases become None."""
    xv = x.values
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if hamming_tol is None:
        hamming_tol = default_hamming_tol(y)
    es = error_sparsity(x, x_hat, support_tol)
    values: dict[str, float | int | None] = {}
    for name, fn in (("recovery_error", recovery_error), ("mse", mse),
                     ("correlation", correlation), ("covariance", covariance)):
        try:
            values[name] = fn(xv, x_hat)
        except UndefinedMetricError:
            values[name] = None
    values["error_sparsity_count"] = es.count_delta
    values["error_sparsity_support"] = es.support_mismatch
    values["compression_ratio"] = compression_ratio(m, n)
    for name, fn in (("snr_db", snr_db), ("rsnr", rsnr)):
        try:
            values[name] = fn(xv, x_hat)
        except UndefinedMetricError:
            values[name] = None
    values["hamming_distance"] = hamming_distance(y, y_hat, hamming_tol)
    return MetricReport(
        values=MappingProxyType(values),
        tolerances=MappingProxyType(
            {"support_tol": support_tol, "hamming_tol": hamming_tol}))
