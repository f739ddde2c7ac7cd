"""Empirical phase transition diagrams.

Sweeps the (delta, rho) plane, delta = m/n the compression ratio and
rho = k/m the relative sparsity, running seeded recovery trials per cell
and recording the empirical success probability. Trials are noiseless by
default, the classical setting for transition maps; an injected noise
model changes the data but not the success criterion.

Exports a CSV table and a self-contained SVG heatmap; the 50% contour can
be extracted afterwards with ``transition_boundary``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BudgetExceededError, InvalidArgumentError
from .matrices import MatrixKind, build_matrix
from .metrics import csv_value, is_success
from .model import Amplitude, NoiseModel, generate_sparse_signal, measure
from .recovery import RecoverySpec, Solver, recover, spec_for
from .rng import derive_seed

WORK_BUDGET = 10**6


def default_grid(points: int = 20) -> tuple[float, ...]:
    """Uniform grid over (0.05 .. 1.0], the default sweep for both axes."""
    return tuple(float(v) for v in np.linspace(0.05, 1.0, points))


def _check_grid(grid, label: str) -> tuple[float, ...]:
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise InvalidArgumentError(f"{label} must be non-empty")
    for g in grid:
        if not 0.0 < g <= 1.0:
            raise InvalidArgumentError(f"{label} values must lie in (0, 1], got {g}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgumentError(f"{label} must be strictly increasing")
    return grid


@dataclass(frozen=True)
class PhaseConfig:
    n: int = 200
    delta_grid: tuple[float, ...] = default_grid()
    rho_grid: tuple[float, ...] = default_grid()
    trials_per_cell: int = 50
    matrix_kind: MatrixKind = MatrixKind.GAUSSIAN
    solver: Solver = Solver.OMP
    success_threshold: float = 0.9
    seed: int = 0
    noise: NoiseModel = NoiseModel.none()
    amplitude: Amplitude = Amplitude.UNIT_GAUSSIAN
    work_budget: int = WORK_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "delta_grid", _check_grid(self.delta_grid, "delta_grid"))
        object.__setattr__(self, "rho_grid", _check_grid(self.rho_grid, "rho_grid"))
        object.__setattr__(self, "matrix_kind", MatrixKind(self.matrix_kind))
        object.__setattr__(self, "solver", Solver(self.solver))
        object.__setattr__(self, "amplitude", Amplitude(self.amplitude))
        if self.matrix_kind is MatrixKind.IDENTITY:
            # identity needs m = n, which rules out every cell with delta < 1
            raise InvalidArgumentError(
                "identity matrices admit no compression sweep; "
                "pick a random ensemble for phase diagrams")
        if self.n < 1:
            raise InvalidArgumentError("n must be positive")
        if self.trials_per_cell < 1:
            raise InvalidArgumentError("trials_per_cell must be >= 1")
        if not 0.0 < self.success_threshold <= 1.0:
            raise InvalidArgumentError("success_threshold must be in (0, 1]")


def cell_params(delta: float, rho: float, n: int) -> tuple[int, int]:
    """Map a (delta, rho) cell to integer (m, k); rounding is half-up."""
    if not (0.0 < delta <= 1.0 and 0.0 < rho <= 1.0):
        raise InvalidArgumentError("delta and rho must lie in (0, 1]")
    if n < 1:
        raise InvalidArgumentError("n must be positive")
    m = min(n, max(1, int(math.floor(delta * n + 0.5))))
    k = min(m, max(1, int(math.floor(rho * m + 0.5))))
    return m, k


@dataclass(frozen=True)
class PhaseGrid:
    """Per-cell results; axis 0 follows delta_grid, axis 1 follows rho_grid."""

    config: PhaseConfig
    m: np.ndarray
    k: np.ndarray
    trials: np.ndarray
    successes: np.ndarray
    success_prob: np.ndarray
    mean_recovery_time: np.ndarray

    def __post_init__(self):
        shape = (len(self.config.delta_grid), len(self.config.rho_grid))
        for name in ("m", "k", "trials", "successes", "success_prob",
                     "mean_recovery_time"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if arr.shape != shape:
                raise InvalidArgumentError(f"{name} must have shape {shape}")
        if np.any(self.successes > self.trials) or np.any(self.successes < 0):
            raise InvalidArgumentError("successes must lie in [0, trials]")

    def to_csv(self, path) -> None:
        lines = ["delta,rho,m,k,trials,successes,success_prob,mean_recovery_time_s"]
        for i, delta in enumerate(self.config.delta_grid):
            for j, rho in enumerate(self.config.rho_grid):
                lines.append(",".join([
                    csv_value(delta), csv_value(rho),
                    str(int(self.m[i, j])), str(int(self.k[i, j])),
                    str(int(self.trials[i, j])), str(int(self.successes[i, j])),
                    csv_value(float(self.success_prob[i, j])),
                    csv_value(float(self.mean_recovery_time[i, j])),
                ]))
        Path(path).write_text("\n".join(lines) + "\n")

    def to_svg(self, path, cell_size: int = 22) -> None:
        Path(path).write_text(render_svg(self, cell_size=cell_size))


def _solver_spec(solver: Solver, k: int) -> RecoverySpec:
    if solver is Solver.BASIS_PURSUIT:
        return spec_for(solver)
    return spec_for(solver, k)


def _run_cell(config: PhaseConfig, i: int, j: int) -> tuple[int, float]:
    n = config.n
    m, k = cell_params(config.delta_grid[i], config.rho_grid[j], n)
    spec = _solver_spec(config.solver, k)
    successes = 0
    time_total = 0.0
    for t in range(config.trials_per_cell):
        trial_seed = derive_seed(config.seed, "phase", i, j, t)
        matrix = build_matrix(config.matrix_kind, m, n,
                              seed=derive_seed(trial_seed, "matrix"))
        signal = generate_sparse_signal(n, k, config.amplitude,
                                        seed=derive_seed(trial_seed, "signal"))
        meas = measure(matrix, signal, config.noise,
                       seed=derive_seed(trial_seed, "noise"))
        result = recover(matrix, meas, spec)
        time_total += result.recovery_time
        if is_success(signal.values, result.x_hat, config.success_threshold):
            successes += 1
    return successes, time_total / config.trials_per_cell


def run_phase_diagram(config: PhaseConfig, threads: int | None = None) -> PhaseGrid:
    """Fill the success-probability grid; refuses oversized sweeps up front.

    Per-trial seeds are derived from (master seed, cell indices, trial
    index), so the grid is reproducible bit for bit regardless of thread
    count or execution order.
    """
    n_delta, n_rho = len(config.delta_grid), len(config.rho_grid)
    total = n_delta * n_rho * config.trials_per_cell
    if total > config.work_budget:
        raise BudgetExceededError(
            f"phase sweep needs {total} trials, over the budget of "
            f"{config.work_budget}")
    cells = [(i, j) for i in range(n_delta) for j in range(n_rho)]
    if threads is None or threads <= 1:
        results = [_run_cell(config, i, j) for i, j in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ij: _run_cell(config, *ij), cells))
    m = np.zeros((n_delta, n_rho), dtype=np.int64)
    k = np.zeros_like(m)
    successes = np.zeros_like(m)
    mean_time = np.zeros((n_delta, n_rho))
    for (i, j), (succ, mt) in zip(cells, results):
        m[i, j], k[i, j] = cell_params(config.delta_grid[i], config.rho_grid[j],
                                       config.n)
        successes[i, j] = succ
        mean_time[i, j] = mt
    trials = np.full((n_delta, n_rho), config.trials_per_cell, dtype=np.int64)
    return PhaseGrid(config=config, m=m, k=k, trials=trials, successes=successes,
                     success_prob=successes / trials,
                     mean_recovery_time=mean_time)


def transition_boundary(grid: PhaseGrid) -> tuple[tuple[float, float], ...]:
    """50% contour: for each delta, the rho where success crosses one half.

    Linear interpolation between the first adjacent pair of cells that
    straddles 0.5 going up the rho axis; columns that never cross are
    skipped.
    """
    points = []
    rho = grid.config.rho_grid
    for i, delta in enumerate(grid.config.delta_grid):
        probs = grid.success_prob[i]
        for j in range(len(rho) - 1):
            hi, lo = float(probs[j]), float(probs[j + 1])
            if hi >= 0.5 >= lo and hi > lo:
                frac = (hi - 0.5) / (hi - lo)
                points.append((float(delta), rho[j] + frac * (rho[j + 1] - rho[j])))
                break
    return tuple(points)


# ---------------------------------------------------------------------------
# SVG heatmap. Colors interpolate between two anchors in linear sRGB:
# #313695 (failure, probability 0) and #a50026 (success, probability 1).

_COLOR_LOW = "#313695"
_COLOR_HIGH = "#a50026"


def _srgb_to_linear(c: float) -> float:
    return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4


def _linear_to_srgb(c: float) -> float:
    return 12.92 * c if c <= 0.0031308 else 1.055 * c ** (1 / 2.4) - 0.055


def _hex_to_rgb(h: str) -> tuple[float, ...]:
    return tuple(int(h[i:i + 2], 16) / 255.0 for i in (1, 3, 5))


def ramp_color(p: float) -> str:
    """Two-anchor color ramp evaluated at probability p."""
    p = min(1.0, max(0.0, p))
    lo = [_srgb_to_linear(c) for c in _hex_to_rgb(_COLOR_LOW)]
    hi = [_srgb_to_linear(c) for c in _hex_to_rgb(_COLOR_HIGH)]
    mixed = [_linear_to_srgb(a + p * (b - a)) for a, b in zip(lo, hi)]
    return "#" + "".join(f"{round(255 * c):02x}" for c in mixed)


def render_svg(grid: PhaseGrid, cell_size: int = 22) -> str:
    """Self-contained heatmap; rho increases upward, delta rightward."""
    n_delta, n_rho = grid.success_prob.shape
    margin = 46
    width = margin + n_delta * cell_size + 12
    height = margin + n_rho * cell_size + 12
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for i in range(n_delta):
        for j in range(n_rho):
            x = margin + i * cell_size
            y = 12 + (n_rho - 1 - j) * cell_size
            color = ramp_color(float(grid.success_prob[i, j]))
            parts.append(f'<rect x="{x}" y="{y}" width="{cell_size}" '
                         f'height="{cell_size}" fill="{color}"/>')
    d0, d1 = grid.config.delta_grid[0], grid.config.delta_grid[-1]
    r0, r1 = grid.config.rho_grid[0], grid.config.rho_grid[-1]
    y_axis = 12 + n_rho * cell_size
    parts.extend([
        f'<text x="{margin}" y="{y_axis + 14}" font-size="10">{d0:g}</text>',
        f'<text x="{margin + (n_delta - 1) * cell_size}" y="{y_axis + 14}" '
        f'font-size="10">{d1:g}</text>',
        f'<text x="{margin // 2}" y="{y_axis + 28}" font-size="10">'
        'delta = m/n</text>',
        f'<text x="4" y="{y_axis}" font-size="10">{r0:g}</text>',
        f'<text x="4" y="20" font-size="10">{r1:g}</text>',
        f'<text x="4" y="{y_axis + 28}" font-size="10">rho = k/m</text>',
        '</svg>',
    ])
    return "\n".join(parts) + "\n"
