"""Measurement-matrix ensembles.

Builders for the standard compressed-sensing sampling operators: dense
Gaussian and Bernoulli, partial orthonormal DCT, Toeplitz and circulant
(convolution-style), plus identity as the no-compression baseline and a
Custom kind for matrices ingested from files.

Columns are l2-normalized by default; coherence and the restricted
isometry property are stated for unit columns, so the normalized form is
the one the certification module expects.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import DegenerateMatrixError, InvalidArgumentError
from .rng import generator

_UNIT_COLUMN_TOL = 1e-12


class MatrixKind(str, Enum):
    IDENTITY = "identity"
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    PARTIAL_DCT = "partial_dct"
    TOEPLITZ = "toeplitz"
    CIRCULANT = "circulant"
    CUSTOM = "custom"


@dataclass(frozen=True)
class MeasurementMatrix:
    """Immutable m x n real sampling operator.

    ``matrix_id`` is a content hash over (kind, shape, entries) used to tie
    Measurements back to the matrix that produced them.
    """

    entries: np.ndarray
    kind: MatrixKind
    m: int
    n: int
    columns_normalized: bool
    seed: int | None = None
    matrix_id: str = ""

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.entries, dtype=np.float64))
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "kind", MatrixKind(self.kind))
        if self.m <= 0 or self.n <= 0 or a.shape != (self.m, self.n):
            raise InvalidArgumentError(
                f"entries must have shape ({self.m}, {self.n}), got {a.shape}")
        if self.kind is MatrixKind.IDENTITY:
            if self.m != self.n:
                raise InvalidArgumentError("identity kind requires m = n")
        elif self.m > self.n:
            raise InvalidArgumentError(
                f"compression requires m <= n, got m={self.m} > n={self.n}")
        if not np.all(np.isfinite(a)):
            raise InvalidArgumentError("matrix entries must all be finite")
        if self.columns_normalized:
            norms = np.linalg.norm(a, axis=0)
            if np.max(np.abs(norms - 1.0)) > _UNIT_COLUMN_TOL:
                raise InvalidArgumentError(
                    "columns_normalized set but some column l2 norm deviates "
                    f"from 1 by more than {_UNIT_COLUMN_TOL}")
        # structure invariants only apply to the raw ensemble; per-column
        # scaling destroys constant diagonals
        if not self.columns_normalized:
            if self.kind is MatrixKind.TOEPLITZ and not _is_toeplitz(a):
                raise InvalidArgumentError("toeplitz kind requires constant diagonals")
            if self.kind is MatrixKind.CIRCULANT and not _is_circulant(a):
                raise InvalidArgumentError(
                    "circulant kind requires cyclically shifted rows")
        if not self.matrix_id:
            object.__setattr__(self, "matrix_id", _content_id(self.kind, a))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.entries, axis=0)


def _is_toeplitz(a: np.ndarray) -> bool:
    # constant along every diagonal <=> each row is the previous one shifted
    return bool(np.array_equal(a[1:, 1:], a[:-1, :-1]))


def _is_circulant(a: np.ndarray) -> bool:
    gen = a[0]
    idx = (np.arange(a.shape[1])[None, :] - np.arange(a.shape[0])[:, None]) % a.shape[1]
    return bool(np.array_equal(a, gen[idx]))


def _content_id(kind: MatrixKind, entries: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(kind.value.encode())
    h.update(np.array(entries.shape, dtype=np.int64).tobytes())
    h.update(entries.tobytes())
    return h.hexdigest()[:16]


def _normalize_columns(entries: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(entries, axis=0)
    if np.any(norms == 0):
        raise DegenerateMatrixError("cannot normalize a zero column")
    return entries / norms


def build_matrix(kind: MatrixKind | str, m: int, n: int, seed: int = 0,
                 normalize: bool = True) -> MeasurementMatrix:
    """Draw an m x n matrix from the named ensemble, deterministically in seed.

    Gaussian and Bernoulli entries are i.i.d.; PartialDCT keeps m rows of
    the n-point orthonormal DCT chosen uniformly without replacement;
    Toeplitz draws its first row and column i.i.d. standard normal;
    Circulant draws one generator row and cyclically shifts it. If
    ``normalize``, every column is scaled to unit l2 norm afterwards.
    """
    kind = MatrixKind(kind)
    if m <= 0 or n <= 0:
        raise InvalidArgumentError(f"m and n must be positive, got m={m}, n={n}")
    if kind is MatrixKind.CUSTOM:
        raise InvalidArgumentError(
            "custom matrices are ingested from files, not generated")
    if kind is MatrixKind.IDENTITY:
        if m != n:
            raise InvalidArgumentError(f"identity kind requires m = n, got {m} x {n}")
    elif m > n:
        raise InvalidArgumentError(f"m must not exceed n, got m={m} > n={n}")

    rng = generator(seed)
    if kind is MatrixKind.IDENTITY:
        entries = np.eye(n)
    elif kind is MatrixKind.GAUSSIAN:
        entries = rng.standard_normal((m, n))
    elif kind is MatrixKind.BERNOULLI:
        entries = rng.integers(0, 2, size=(m, n)) * 2.0 - 1.0
    elif kind is MatrixKind.PARTIAL_DCT:
        rows = np.sort(rng.choice(n, size=m, replace=False))
        entries = scipy.fft.dct(np.eye(n), axis=1, norm="ortho")[rows]
    elif kind is MatrixKind.TOEPLITZ:
        col = rng.standard_normal(m)
        row = rng.standard_normal(n)
        row[0] = col[0]
        entries = scipy.linalg.toeplitz(col, row)
    elif kind is MatrixKind.CIRCULANT:
        gen_row = rng.standard_normal(n)
        idx = (np.arange(n)[None, :] - np.arange(m)[:, None]) % n
        entries = gen_row[idx]
    else:  # pragma: no cover - enum is closed
        raise InvalidArgumentError(f"unknown matrix kind {kind!r}")

    if normalize:
        entries = _normalize_columns(entries)
    return MeasurementMatrix(entries=entries, kind=kind, m=m, n=n,
                             columns_normalized=normalize, seed=seed)


def custom_matrix(entries, normalize: bool = False,
                  seed: int | None = None) -> MeasurementMatrix:
    """Wrap externally supplied entries as a Custom-kind matrix."""
    a = np.asarray(entries, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise InvalidArgumentError("custom matrix entries must be a non-empty 2-d array")
    if normalize:
        a = _normalize_columns(a)
    return MeasurementMatrix(entries=a, kind=MatrixKind.CUSTOM,
                             m=a.shape[0], n=a.shape[1],
                             columns_normalized=normalize, seed=seed)


# ---------------------------------------------------------------------------
# Serialization.  CSV is row-major, one matrix row per line, every value
# printed with 17 significant digits so float64 round-trips exactly.
# The JSON envelope {kind, m, n, seed, normalized, data} carries provenance
# alongside the entries and is the ingestion path for Custom matrices.

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_matrix_csv(matrix: MeasurementMatrix, path) -> None:
    lines = [",".join(_fmt(v) for v in row) for row in matrix.entries]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix_csv(path, kind: MatrixKind | str = MatrixKind.CUSTOM,
                    normalized: bool | None = None) -> MeasurementMatrix:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            rows.append([float(tok) for tok in line.split(",")])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise InvalidArgumentError(f"malformed matrix CSV at {path}")
    a = np.asarray(rows, dtype=np.float64)
    if normalized is None:
        normalized = bool(np.max(np.abs(np.linalg.norm(a, axis=0) - 1.0))
                          <= _UNIT_COLUMN_TOL)
    return MeasurementMatrix(entries=a, kind=MatrixKind(kind), m=a.shape[0],
                             n=a.shape[1], columns_normalized=normalized)


def save_matrix_json(matrix: MeasurementMatrix, path) -> None:
    doc = {
        "kind": matrix.kind.value,
        "m": matrix.m,
        "n": matrix.n,
        "seed": matrix.seed,
        "normalized": matrix.columns_normalized,
        "data": [[float(v) for v in row] for row in matrix.entries],
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_matrix_json(path) -> MeasurementMatrix:
    doc = json.loads(Path(path).read_text())
    try:
        entries = np.asarray(doc["data"], dtype=np.float64)
        kind = MatrixKind(doc["kind"])
        m, n = int(doc["m"]), int(doc["n"])
        normalized = bool(doc["normalized"])
        seed = doc.get("seed")
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed matrix JSON at {path}: {exc}") from exc
    return MeasurementMatrix(entries=entries, kind=kind, m=m, n=n,
                             columns_normalized=normalized,
                             seed=None if seed is None else int(seed))
