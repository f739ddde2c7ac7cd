"""Sparse recovery solvers for y = Ax with x sparse.

Four routes to an estimate x_hat: greedy support pursuit (OMP),
hard-thresholded gradient iteration (IHT, fixed or normalized step), the
l1 relaxation solved by operator splitting (basis pursuit), and an
exhaustive least-squares search over all supports of a given size as the
desk-scale ground-truth oracle.

All solvers are deterministic functions of (matrix, measurements, spec)
and report wall-clock recovery time plus an honest ``converged`` flag.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.optimize

from . import kernels
from .errors import BudgetExceededError, InvalidArgumentError
from .kernels import pyref
from .matrices import MeasurementMatrix
from .model import Measurements

ORACLE_BUDGET = 10**6


class Solver(str, Enum):
    OMP = "omp"
    IHT = "iht"
    BASIS_PURSUIT = "bp"
    EXHAUSTIVE_ORACLE = "oracle"


class StepMode(str, Enum):
    """IHT step size: fixed 1.0, or renormalized from the active support."""

    FIXED = "fixed"
    NORMALIZED = "normalized"


@dataclass(frozen=True)
class RecoverySpec:
    """Solver choice plus stopping rules and per-solver knobs.

    ``residual_tol`` is the residual-norm stop for OMP, the iterate-change
    stop for IHT, and the radius of the measurement ball for basis
    pursuit (0 keeps the exact equality constraint). ``max_iterations``
    defaults per solver when left None (1000 for omp/iht, 5000 for bp).
    """

    solver: Solver
    target_sparsity: int | None = None
    residual_tol: float = 0.0
    max_iterations: int | None = None
    step_mode: StepMode = StepMode.NORMALIZED
    feasibility_tol: float = 1e-6
    optimality_tol: float = 1e-6
    penalty: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "solver", Solver(self.solver))
        object.__setattr__(self, "step_mode", StepMode(self.step_mode))
        if self.target_sparsity is not None and self.target_sparsity < 1:
            raise InvalidArgumentError("target_sparsity must be >= 1 when set")
        if self.residual_tol < 0:
            raise InvalidArgumentError("residual_tol must be >= 0")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidArgumentError("max_iterations must be >= 1")
        if self.feasibility_tol <= 0 or self.optimality_tol <= 0:
            raise InvalidArgumentError("tolerances must be positive")
        if self.penalty <= 0:
            raise InvalidArgumentError("penalty must be positive")
        if self.solver in (Solver.OMP, Solver.IHT, Solver.EXHAUSTIVE_ORACLE):
            if self.target_sparsity is None and not self.residual_tol > 0:
                raise InvalidArgumentError(
                    f"{self.solver.value} needs a stopping rule: set "
                    "target_sparsity or a positive residual_tol")
        if self.solver is Solver.IHT and self.target_sparsity is None:
            raise InvalidArgumentError("iht requires target_sparsity")
        if self.solver is Solver.EXHAUSTIVE_ORACLE and self.target_sparsity is None:
            raise InvalidArgumentError("the oracle requires target_sparsity")

    def resolved_max_iterations(self) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 5000 if self.solver is Solver.BASIS_PURSUIT else 1000


@dataclass(frozen=True)
class RecoveryResult:
    solver: Solver
    x_hat: np.ndarray
    iterations: int
    residual_norm: float
    recovery_time: float
    converged: bool

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x_hat, dtype=np.float64))
        x.setflags(write=False)
        object.__setattr__(self, "x_hat", x)
        object.__setattr__(self, "solver", Solver(self.solver))
        if self.iterations < 0 or self.residual_norm < 0 or self.recovery_time < 0:
            raise InvalidArgumentError("result counters must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "solver": self.solver.value,
            "x_hat": [float(v) for v in self.x_hat],
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "recovery_time_s": self.recovery_time,
            "converged": self.converged,
        }

    def save(self, path) -> None:
        import json

        Path(path).write_text(json.dumps(self.to_json_dict()) + "\n")


def _as_vector(y) -> np.ndarray:
    if isinstance(y, Measurements):
        return y.y
    return np.ascontiguousarray(np.asarray(y, dtype=np.float64))


def _check_dims(matrix: MeasurementMatrix, y: np.ndarray, spec: RecoverySpec):
    if y.ndim != 1 or y.size != matrix.m:
        raise InvalidArgumentError(
            f"measurement vector must have length m={matrix.m}, got {y.shape}")
    if spec.target_sparsity is not None and spec.target_sparsity > matrix.n:
        raise InvalidArgumentError(
            f"target_sparsity {spec.target_sparsity} exceeds n={matrix.n}")


def omp(matrix: MeasurementMatrix, y, spec: RecoverySpec) -> RecoveryResult:
    """Orthogonal matching pursuit; one new column per iteration."""
    if spec.solver is not Solver.OMP:
        raise InvalidArgumentError(f"spec.solver must be omp, got {spec.solver.value}")
    yv = _as_vector(y)
    _check_dims(matrix, yv, spec)
    a = matrix.entries
    kmax = spec.target_sparsity if spec.target_sparsity is not None \
        else min(matrix.m, matrix.n)
    max_iter = spec.resolved_max_iterations()
    t0 = time.perf_counter()
    x, iterations, status, deficient = kernels.omp_kernel(
        a, yv, kmax, spec.residual_tol, max_iter)
    if status == pyref.OMP_RANK_DEFICIENT:
        # compiled path cannot do the minimum-norm fallback; redo in python
        x, iterations, status, deficient = pyref.omp_kernel(
            a, yv, kmax, spec.residual_tol, max_iter)
    elapsed = time.perf_counter() - t0
    converged = status == pyref.OMP_TOL_STOP or (
        status == pyref.OMP_TARGET_REACHED and spec.target_sparsity is not None)
    if deficient:
        converged = False
    return RecoveryResult(
        solver=Solver.OMP, x_hat=x, iterations=iterations,
        residual_norm=float(np.linalg.norm(yv - a @ x)),
        recovery_time=elapsed, converged=converged)


def iht(matrix: MeasurementMatrix, y, spec: RecoverySpec) -> RecoveryResult:
    """Iterative hard thresholding from the zero iterate."""
    if spec.solver is not Solver.IHT:
        raise InvalidArgumentError(f"spec.solver must be iht, got {spec.solver.value}")
    yv = _as_vector(y)
    _check_dims(matrix, yv, spec)
    a = matrix.entries
    t0 = time.perf_counter()
    x, iterations, status = kernels.iht_kernel(
        a, yv, spec.target_sparsity, spec.step_mode is StepMode.FIXED,
        spec.residual_tol, spec.resolved_max_iterations())
    elapsed = time.perf_counter() - t0
    return RecoveryResult(
        solver=Solver.IHT, x_hat=x, iterations=iterations,
        residual_norm=float(np.linalg.norm(yv - a @ x)),
        recovery_time=elapsed, converged=status == pyref.IHT_CONVERGED)


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class _MeasurementProjector:
    """Projections onto {x : Ax = y} or {x : |Ax - y| <= radius} via one SVD."""

    def __init__(self, a: np.ndarray, y: np.ndarray, radius: float):
        m, n = a.shape
        u, sv, vt = np.linalg.svd(a, full_matrices=False)
        rank_tol = (sv[0] * max(m, n) * np.finfo(np.float64).eps) if sv.size else 0.0
        r = int(np.count_nonzero(sv > rank_tol))
        self.sv = sv[:r]
        self.u = u[:, :r]
        self.vt = vt[:r]
        self.b = self.u.T @ y
        self.y_perp_norm = float(np.linalg.norm(y - self.u @ self.b))
        self.radius = radius
        self.a = a
        self.y = y
        # x of minimum norm with Ax closest to y
        self.x_particular = self.vt.T @ (self.b / self.sv) if r else np.zeros(n)
        if radius > 0 and self.y_perp_norm >= radius:
            raise InvalidArgumentError(
                "residual_tol is not above the least-squares floor "
                f"{self.y_perp_norm:.3e}; the measurement ball is empty")

    def project(self, v: np.ndarray) -> np.ndarray:
        if self.radius == 0.0:
            return v - self.vt.T @ (self.vt @ v) + self.x_particular
        if np.linalg.norm(self.a @ v - self.y) <= self.radius:
            return v.copy()
        # shrink the row-space components until the residual meets the radius;
        # the residual is strictly decreasing in the multiplier
        av = self.vt @ v
        resid = self.sv * av - self.b
        target = self.radius**2 - self.y_perp_norm**2

        def excess(lam: float) -> float:
            return float(np.sum((resid / (1.0 + lam * self.sv**2)) ** 2)) - target

        hi = 1.0
        while excess(hi) > 0.0:
            hi *= 4.0
        lam = scipy.optimize.brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-14)
        xv = (av + lam * self.sv * self.b) / (1.0 + lam * self.sv**2)
        return v + self.vt.T @ (xv - av)


def basis_pursuit(matrix: MeasurementMatrix, y, spec: RecoverySpec) -> RecoveryResult:
    """Minimum-l1 reconstruction by alternating projection and shrinkage.

    Splits min |x|_1 s.t. x feasible into a constraint-projection step and
    a soft-threshold step coupled by a scaled dual variable, with a fixed
    penalty and no over-relaxation. The sparse iterate z is returned.
    Declared converged once the measurement residual of z is within
    feasibility_tol (relative to |y|) and both the split gap |x - z| and
    the dual movement fall under optimality_tol.
    """
    if spec.solver is not Solver.BASIS_PURSUIT:
        raise InvalidArgumentError(f"spec.solver must be bp, got {spec.solver.value}")
    yv = _as_vector(y)
    _check_dims(matrix, yv, spec)
    a = matrix.entries
    n = matrix.n
    t0 = time.perf_counter()
    y_norm = float(np.linalg.norm(yv))
    if y_norm == 0.0:
        return RecoveryResult(
            solver=Solver.BASIS_PURSUIT, x_hat=np.zeros(n), iterations=0,
            residual_norm=0.0, recovery_time=time.perf_counter() - t0,
            converged=True)
    projector = _MeasurementProjector(a, yv, spec.residual_tol)
    rho = spec.penalty
    z = np.zeros(n)
    u = np.zeros(n)
    converged = False
    iterations = 0
    for iterations in range(1, spec.resolved_max_iterations() + 1):
        x = projector.project(z - u)
        z_old = z
        z = _soft_threshold(x + u, 1.0 / rho)
        u = u + x - z
        split_gap = float(np.linalg.norm(x - z))
        dual_move = rho * float(np.linalg.norm(z - z_old))
        scale = max(1.0, float(np.linalg.norm(x)), float(np.linalg.norm(z)))
        if (split_gap <= spec.optimality_tol * scale
                and dual_move <= spec.optimality_tol * scale):
            feasibility = float(np.linalg.norm(a @ z - yv))
            feas_limit = max(spec.feasibility_tol * y_norm, spec.residual_tol)
            if feasibility <= feas_limit:
                converged = True
                break
    elapsed = time.perf_counter() - t0
    return RecoveryResult(
        solver=Solver.BASIS_PURSUIT, x_hat=z, iterations=iterations,
        residual_norm=float(np.linalg.norm(yv - a @ z)),
        recovery_time=elapsed, converged=converged)


def exhaustive_oracle(matrix: MeasurementMatrix, y, k: int,
                      budget: int = ORACLE_BUDGET) -> RecoveryResult:
    """Best k-sparse least-squares fit over every support, the ground truth.

    Supports are scanned in lexicographic order and a strict improvement
    is required to replace the incumbent, so ties resolve to the
    lexicographically smallest support.
    """
    yv = _as_vector(y)
    if yv.ndim != 1 or yv.size != matrix.m:
        raise InvalidArgumentError(
            f"measurement vector must have length m={matrix.m}, got {yv.shape}")
    if not 1 <= k <= matrix.n:
        raise InvalidArgumentError(f"k must be in [1, {matrix.n}], got {k}")
    required = math.comb(matrix.n, k)
    if required > budget:
        raise BudgetExceededError(
            f"oracle over supports of size {k} needs C({matrix.n},{k}) = "
            f"{required} least-squares solves, over the budget of {budget}")
    a = matrix.entries
    t0 = time.perf_counter()
    best_res = math.inf
    best_x = np.zeros(matrix.n)
    count = 0
    for support in itertools.combinations(range(matrix.n), k):
        count += 1
        sub = a[:, support]
        coef = np.linalg.lstsq(sub, yv, rcond=None)[0]
        res = float(np.linalg.norm(yv - sub @ coef))
        if res < best_res:
            best_res = res
            best_x = np.zeros(matrix.n)
            best_x[list(support)] = coef
    elapsed = time.perf_counter() - t0
    return RecoveryResult(
        solver=Solver.EXHAUSTIVE_ORACLE, x_hat=best_x, iterations=count,
        residual_norm=best_res, recovery_time=elapsed, converged=True)


def recover(matrix: MeasurementMatrix, y, spec: RecoverySpec) -> RecoveryResult:
    """Dispatch to the solver named in the spec."""
    if spec.solver is Solver.OMP:
        return omp(matrix, y, spec)
    if spec.solver is Solver.IHT:
        return iht(matrix, y, spec)
    if spec.solver is Solver.BASIS_PURSUIT:
        return basis_pursuit(matrix, y, spec)
    return exhaustive_oracle(matrix, y, spec.target_sparsity)


def spec_for(solver: Solver | str, k: int | None = None, **overrides) -> RecoverySpec:
    """Convenience builder used by the campaign and CLI layers."""
    solver = Solver(solver)
    base = RecoverySpec(solver=solver, target_sparsity=k, residual_tol=1e-12) \
        if solver in (Solver.OMP, Solver.IHT, Solver.EXHAUSTIVE_ORACLE) \
        else RecoverySpec(solver=solver)
    if overrides:
        base = replace(base, **overrides)
    return base
