"""Signal model: sparse test signals, additive noise, and the forward map.

A length-N signal x with k nonzero entries is compressed by an M x N
measurement matrix A into y = A x (optionally plus white Gaussian noise).
This module owns the signal/noise/measurement value types and the
generators that plant synthetic sparse signals for benchmarking.

All values are immutable after construction (arrays are marked read-only)
and safe to share between threads.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .rng import generator


class Amplitude(str, Enum):
    """Distribution of the nonzero entries of a planted signal."""

    UNIT_GAUSSIAN = "unit_gaussian"
    SIGNED_ONES = "signed_ones"


class NoiseKind(str, Enum):
    NONE = "none"
    AWGN = "awgn"


@dataclass(frozen=True)
class NoiseModel:
    """Additive measurement noise; ``sigma == 0`` iff kind is NONE."""

    kind: NoiseKind = NoiseKind.NONE
    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidArgumentError("noise sigma must be non-negative")
        if (self.sigma == 0) != (self.kind == NoiseKind.NONE):
            raise InvalidArgumentError(
                "canonical form violated: sigma == 0 exactly when kind is 'none'")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(NoiseKind.NONE, 0.0)

    @classmethod
    def awgn(cls, sigma: float) -> "NoiseModel":
        """White Gaussian noise; sigma = 0 canonicalizes to the no-noise model."""
        if sigma == 0:
            return cls.none()
        return cls(NoiseKind.AWGN, float(sigma))


@dataclass(frozen=True)
class SparseSignal:
    """Length-n real vector with exactly k nonzeros on ``support``."""

    values: np.ndarray
    n: int
    support: tuple[int, ...]
    k: int

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.n <= 0 or v.shape != (self.n,):
            raise InvalidArgumentError(f"values must have shape ({self.n},)")
        supp = tuple(int(i) for i in self.support)
        object.__setattr__(self, "support", supp)
        if supp != tuple(sorted(set(supp))) or (supp and not 0 <= supp[0] <= supp[-1] < self.n):
            raise InvalidArgumentError("support must be sorted unique indices in [0, n)")
        if self.k != len(supp) or self.k > self.n:
            raise InvalidArgumentError("k must equal |support| and be <= n")
        mask = np.zeros(self.n, dtype=bool)
        mask[list(supp)] = True
        if np.any(v[~mask] != 0.0) or np.any(v[mask] == 0.0):
            raise InvalidArgumentError("values must be nonzero exactly on the support")

    @classmethod
    def from_values(cls, values, tol: float = 0.0) -> "SparseSignal":
        """Wrap a dense vector, deriving support from |values| > tol."""
        v = np.asarray(values, dtype=np.float64).copy()
        if v.ndim != 1 or v.size == 0:
            raise InvalidArgumentError("signal values must be a non-empty 1-d vector")
        v[np.abs(v) <= tol] = 0.0
        support = tuple(int(i) for i in np.flatnonzero(v))
        return cls(values=v, n=v.size, support=support, k=len(support))


@dataclass(frozen=True)
class Measurements:
    """Output of the forward map: y = A x (+ noise)."""

    y: np.ndarray
    noise: NoiseModel
    source_matrix_id: str
    sampling_time: float = 0.0

    def __post_init__(self):
        y = np.ascontiguousarray(np.asarray(self.y, dtype=np.float64))
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        if self.sampling_time < 0:
            raise InvalidArgumentError("sampling_time must be >= 0")

    @property
    def m(self) -> int:
        return self.y.size


def generate_sparse_signal(n: int, k: int, amplitude: Amplitude | str = Amplitude.UNIT_GAUSSIAN,
                           seed: int = 0) -> SparseSignal:
    """Plant a k-sparse signal of length n.

    The support is drawn uniformly without replacement; nonzero amplitudes
    are standard normal (``unit_gaussian``) or uniform +-1 (``signed_ones``).
    Identical (n, k, amplitude, seed) reproduce the signal bit for bit.
    """
    if n <= 0:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    if not 0 <= k <= n:
        raise InvalidArgumentError(f"k must be in [0, {n}], got {k}")
    amplitude = Amplitude(amplitude)
    rng = generator(seed)
    support = np.sort(rng.choice(n, size=k, replace=False))
    values = np.zeros(n)
    if k:
        if amplitude is Amplitude.UNIT_GAUSSIAN:
            amps = rng.standard_normal(k)
            # a standard normal draw is never exactly 0.0 in float64
        else:
            amps = rng.integers(0, 2, size=k) * 2.0 - 1.0
        values[support] = amps
    return SparseSignal(values=values, n=n, support=tuple(int(i) for i in support), k=k)


def sparsity_level(v, tol: float = 0.0) -> int:
    """Number of entries with magnitude strictly above tol."""
    if tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    v = np.asarray(v, dtype=np.float64)
    return int(np.count_nonzero(np.abs(v) > tol))


def measure(matrix, x: SparseSignal, noise: NoiseModel = NoiseModel.none(),
            seed: int = 0) -> Measurements:
    """Apply the forward map y = A x (+ seeded Gaussian noise).

    ``sampling_time`` records the wall-clock duration of the
    multiply-and-add alone; it is the sampling-speed metric for the
    matrix, not of signal or noise generation.
    """
    if matrix.n != x.n:
        raise InvalidArgumentError(
            f"dimension mismatch: matrix has n={matrix.n}, signal has n={x.n}")
    w = None
    if noise.kind is NoiseKind.AWGN:
        w = noise.sigma * generator(seed).standard_normal(matrix.m)
    t0 = time.perf_counter()
    y = matrix.entries @ x.values
    if w is not None:
        y = y + w
    elapsed = time.perf_counter() - t0
    return Measurements(y=y, noise=noise, source_matrix_id=matrix.matrix_id,
                        sampling_time=elapsed)


# ---------------------------------------------------------------------------
# Serialization.  CSV: the signal on one line, >= 17 significant digits.
# JSON: an envelope with the generation parameters alongside the data.

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_signal_csv(x: SparseSignal, path) -> None:
    Path(path).write_text(",".join(_fmt(v) for v in x.values) + "\n")


def load_signal_csv(path) -> SparseSignal:
    text = Path(path).read_text().strip()
    return SparseSignal.from_values([float(tok) for tok in text.split(",")])


def save_signal_json(x: SparseSignal, path, seed: int | None = None,
                     amplitude: str | None = None) -> None:
    doc = {"n": x.n, "k": x.k, "seed": seed, "amplitude": amplitude,
           "support": list(x.support), "data": [float(v) for v in x.values]}
    Path(path).write_text(json.dumps(doc) + "\n")


def load_signal_json(path) -> SparseSignal:
    doc = json.loads(Path(path).read_text())
    return SparseSignal.from_values(doc["data"])
