"""Matrix-quality certification.

Answers "how good is this sampling operator" with the classical
certificates: mutual coherence against the Welch bound, spark, the null
space property order it implies, restricted isometry constants, and the
measurement-count bound m >= c * s * ln(n/s).

Spark and exact RIP are NP-hard in general; here they are computed by
honest exhaustive search at desk scale, with explicit budgets and a
``greater_than(cap)`` marker instead of a guessed value whenever the
search is truncated.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import BudgetExceededError, DegenerateMatrixError, InvalidArgumentError
from .matrices import MeasurementMatrix
from .rng import derive_seed, generator

SUBSET_BUDGET = 10**6
MONTE_CARLO_TRIALS = 10**4
# a singular value counts as zero below this multiple of the largest one
RANK_TOL_FACTOR = 1e-10


class RipMethod(str, Enum):
    EXHAUSTIVE = "exhaustive"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class SparkResult:
    """Smallest size of a linearly dependent column set, or a truncation marker.

    Exactly one of ``value`` (exact result, with a dependent ``witness``
    support) and ``cap`` (search exhausted sizes 1..cap without finding a
    dependent set, so spark > cap) is set.
    """

    value: int | None = None
    cap: int | None = None
    witness: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.value is None) == (self.cap is None):
            raise InvalidArgumentError("exactly one of value and cap must be set")
        if self.value is not None and self.value < 1:
            raise InvalidArgumentError("exact spark must be >= 1")
        if self.cap is not None and self.cap < 1:
            raise InvalidArgumentError("cap must be >= 1")
        if self.witness is not None:
            object.__setattr__(self, "witness", tuple(int(i) for i in self.witness))
            if self.value is None or len(self.witness) != self.value:
                raise InvalidArgumentError("witness must have exactly `value` columns")

    @property
    def is_exact(self) -> bool:
        return self.value is not None

    @property
    def lower_bound(self) -> int:
        """Certified bound: spark >= this, with equality when exact."""
        return self.value if self.value is not None else self.cap + 1

    def as_text(self) -> str:
        return str(self.value) if self.is_exact else f"greater_than({self.cap})"


@dataclass(frozen=True)
class RipEstimate:
    k: int
    delta: float
    method: RipMethod
    is_exact: bool
    trials: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgumentError("rip order k must be >= 1")
        if self.delta < 0:
            raise InvalidArgumentError("delta must be non-negative")
        if self.method is RipMethod.EXHAUSTIVE and not self.is_exact:
            raise InvalidArgumentError("exhaustive estimates are exact by definition")

    def method_text(self) -> str:
        if self.method is RipMethod.EXHAUSTIVE:
            return "exhaustive"
        return f"monte_carlo({self.trials})"


def coherence(matrix: MeasurementMatrix) -> float:
    """Mutual coherence: largest |<a_i, a_j>| over distinct normalized columns."""
    if matrix.n < 2:
        raise InvalidArgumentError("coherence needs at least two columns")
    a = matrix.entries
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise DegenerateMatrixError("coherence undefined for a zero column")
    g = (a / norms).T @ (a / norms)
    np.fill_diagonal(g, 0.0)
    return float(min(1.0, max(0.0, np.max(np.abs(g)))))


def welch_bound(m: int, n: int) -> float:
    """Lower bound sqrt((n-m)/(m(n-1))) on the coherence of any m x n frame."""
    if n < 2:
        raise InvalidArgumentError("welch bound needs n >= 2")
    if not 1 <= m <= n:
        raise InvalidArgumentError(f"need 1 <= m <= n, got m={m}, n={n}")
    return math.sqrt((n - m) / (m * (n - 1)))


def _numerical_rank(sub: np.ndarray) -> int:
    sv = np.linalg.svd(sub, compute_uv=False)
    return int(np.count_nonzero(sv > RANK_TOL_FACTOR * sv[0]))


def spark(matrix: MeasurementMatrix, cap: int | None = None,
          budget: int = SUBSET_BUDGET) -> SparkResult:
    """Smallest cardinality of a dependent column subset, by exhaustive search.

    Subset sizes 1..cap are tested in increasing order with a rank check
    (singular values below RANK_TOL_FACTOR times the largest count as
    zero). Any m+1 columns are automatically dependent, so sizes above m
    need no rank test. When ``cap`` is omitted it is chosen as the largest
    value whose cumulative subset count stays within ``budget``.
    """
    m, n = matrix.m, matrix.n
    cap_limit = min(m + 1, n)
    if cap is None:
        cap = _auto_cap(n, cap_limit, budget)
    if not 1 <= cap <= cap_limit:
        raise InvalidArgumentError(
            f"cap must be in [1, min(m+1, n)] = [1, {cap_limit}], got {cap}")
    a = matrix.entries
    for size in range(1, cap + 1):
        if size > m:
            return SparkResult(value=size, witness=tuple(range(size)))
        for support in itertools.combinations(range(n), size):
            if _numerical_rank(a[:, support]) < size:
                return SparkResult(value=size, witness=support)
    return SparkResult(cap=cap)


def _auto_cap(n: int, cap_limit: int, budget: int) -> int:
    cap, total = 1, n
    while cap < cap_limit:
        total += math.comb(n, cap + 1)
        if total > budget:
            break
        cap += 1
    return cap


def nsp_order(matrix: MeasurementMatrix, cap: int | None = None,
              budget: int = SUBSET_BUDGET) -> int:
    """Largest k such that distinct k-sparse signals have distinct measurements.

    Equivalently the largest k with 2k < spark. A truncated spark search
    (spark > cap) certifies the conservative order floor(cap / 2).
    """
    result = spark(matrix, cap=cap, budget=budget)
    if result.is_exact:
        return (result.value - 1) // 2
    return result.cap // 2


def _support_delta(a: np.ndarray, support) -> float:
    sub = a[:, list(support)]
    sv = np.linalg.svd(sub, compute_uv=False)
    smin_sq = 0.0 if len(support) > sub.shape[0] else float(sv[-1]) ** 2
    return max(float(sv[0]) ** 2 - 1.0, 1.0 - smin_sq)


def rip_constant(matrix: MeasurementMatrix, k: int,
                 method: RipMethod | str = RipMethod.EXHAUSTIVE,
                 budget: int = SUBSET_BUDGET,
                 trials: int = MONTE_CARLO_TRIALS, seed: int = 0) -> RipEstimate:
    """Restricted isometry constant of order k.

    delta_k is the worst-case deviation of any k-column submatrix from an
    isometry: max over supports S of max(sigma_max(A_S)^2 - 1,
    1 - sigma_min(A_S)^2). Exhaustive enumerates every support (refused
    beyond ``budget``); Monte Carlo maximizes over ``trials`` sampled
    supports and therefore reports a lower bound, marked inexact.
    """
    method = RipMethod(method)
    if not 1 <= k <= matrix.n:
        raise InvalidArgumentError(f"k must be in [1, {matrix.n}], got {k}")
    a = matrix.entries
    n = matrix.n
    if method is RipMethod.EXHAUSTIVE:
        required = math.comb(n, k)
        if required > budget:
            raise BudgetExceededError(
                f"exhaustive rip of order {k} needs C({n},{k}) = {required} "
                f"supports, over the budget of {budget}; use monte_carlo")
        delta = max(_support_delta(a, s)
                    for s in itertools.combinations(range(n), k))
        return RipEstimate(k=k, delta=delta, method=method, is_exact=True)
    if trials < 1:
        raise InvalidArgumentError("monte_carlo needs trials >= 1")
    delta = 0.0
    for i in range(trials):
        rng = generator(derive_seed(seed, "rip-support", i))
        support = rng.choice(n, size=k, replace=False)
        delta = max(delta, _support_delta(a, support))
    return RipEstimate(k=k, delta=delta, method=method, is_exact=False,
                       trials=trials)


_DELTA_LIMIT = math.sqrt(2.0) - 1.0


def rip_to_nsp_constant(delta2k: float) -> float:
    """Error-bound constant C = 2d / (1 - (1 + sqrt(2)) d) for d = delta_2k.

    Finite exactly on 0 < d < sqrt(2) - 1, the regime where the order-2k
    isometry constant certifies the null space property; diverges at the
    right endpoint.
    """
    if not 0.0 < delta2k < _DELTA_LIMIT:
        raise InvalidArgumentError(
            f"delta_2k must lie in (0, sqrt(2)-1), got {delta2k}")
    return 2.0 * delta2k / (1.0 - (1.0 + math.sqrt(2.0)) * delta2k)


def measurement_bound(n: int, s: int, c: float = 2.0) -> int:
    """Measurement count sufficient for s-sparse recovery: c * s * ln(n/s).

    Clamped below by 2s (uniqueness needs spark > 2s, hence m >= 2s) and
    above by n (never more measurements than samples).
    """
    if not 1 <= s <= n:
        raise InvalidArgumentError(f"need 1 <= s <= n, got s={s}, n={n}")
    if c <= 0:
        raise InvalidArgumentError(f"c must be positive, got {c}")
    return min(n, max(math.ceil(c * s * math.log(n / s)), 2 * s))


@dataclass(frozen=True)
class CertificationReport:
    """Bundle of all certificates for one matrix.

    For a column-normalized matrix, coherence >= welch_bound - 1e-12
    always (the Welch inequality); the builder asserts it.
    """

    coherence: float
    welch_bound: float
    spark: SparkResult
    nsp_order: int
    rip: tuple[RipEstimate, ...]
    min_measurements: int

    def __post_init__(self):
        object.__setattr__(self, "rip", tuple(self.rip))
        if not 0.0 <= self.coherence <= 1.0:
            raise InvalidArgumentError("coherence must lie in [0, 1]")
        if self.nsp_order < 0 or self.min_measurements < 1:
            raise InvalidArgumentError("bad report fields")

    def to_json_dict(self) -> dict:
        return {
            "coherence": self.coherence,
            "welch_bound": self.welch_bound,
            "spark": self.spark.value if self.spark.is_exact else self.spark.as_text(),
            "nsp_order": self.nsp_order,
            "rip": [{"k": e.k, "delta": e.delta, "method": e.method_text(),
                     "exact": e.is_exact} for e in self.rip],
            "min_measurements": self.min_measurements,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")


def certify_matrix(matrix: MeasurementMatrix, rip_orders=(1, 2),
                   target_sparsity: int | None = None, c: float = 2.0,
                   budget: int = SUBSET_BUDGET,
                   trials: int = MONTE_CARLO_TRIALS,
                   seed: int = 0) -> CertificationReport:
    """Run every certificate on one matrix and bundle the report.

    RIP orders whose exhaustive enumeration exceeds the budget fall back
    to Monte Carlo automatically. ``target_sparsity`` feeds the
    measurement bound; it defaults to the certified nsp order (at least 1).
    """
    mu = coherence(matrix)
    wb = welch_bound(matrix.m, matrix.n)
    if matrix.columns_normalized and mu < wb - 1e-12:
        raise DegenerateMatrixError(
            "welch inequality violated; matrix entries are inconsistent")
    spk = spark(matrix, budget=budget)
    order = (spk.value - 1) // 2 if spk.is_exact else spk.cap // 2
    estimates = []
    for k in rip_orders:
        if math.comb(matrix.n, k) <= budget:
            estimates.append(rip_constant(matrix, k, RipMethod.EXHAUSTIVE,
                                          budget=budget))
        else:
            estimates.append(rip_constant(matrix, k, RipMethod.MONTE_CARLO,
                                          trials=trials, seed=seed))
    s = target_sparsity if target_sparsity is not None else max(1, order)
    return CertificationReport(
        coherence=mu, welch_bound=wb, spark=spk, nsp_order=order,
        rip=tuple(estimates),
        min_measurements=measurement_bound(matrix.n, s, c))
