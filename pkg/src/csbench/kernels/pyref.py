"""Pure-Python reference kernels for the solver inner loops.

These are the fallback implementations used when the compiled extension
is unavailable. The compiled twin in ``_core`` follows the exact same
algorithm (same selection rules, same tie-breaking, same stopping
order), so the two backends agree to floating-point noise; the test
suite pins them together at 1e-9.

Kernels work on raw float64 arrays and return plain status codes; the
``recovery`` module owns validation, timing, and result packaging.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# omp_kernel statuses
OMP_TOL_STOP = 0         # residual norm fell to residual_tol
OMP_TARGET_REACHED = 1   # support grew to kmax columns
OMP_STALLED = 2          # max_iterations hit, or no usable column left
OMP_RANK_DEFICIENT = 3   # compiled backend only: caller must redo in python

# iht_kernel statuses
IHT_CONVERGED = 0        # iterate change fell to residual_tol (or fixpoint)
IHT_MAX_ITERATIONS = 1
IHT_STEP_BREAKDOWN = 2   # adaptive step denominator vanished on a live gradient


def omp_kernel(a: np.ndarray, y: np.ndarray, kmax: int, residual_tol: float,
               max_iterations: int):
    """Greedy support pursuit with a per-iteration least-squares refit.

    Each round picks the column with the largest |correlation| against the
    current residual (normalized by column norm, ties to the lowest
    index), then refits y on the grown support via the normal equations
    and a Cholesky solve. A rank-deficient support falls back to the
    minimum-norm least-squares solution and is flagged.

    Returns (x, iterations, status, rank_deficient).
    """
    m, n = a.shape
    col_norms = np.linalg.norm(a, axis=0)
    safe_norms = np.where(col_norms > 0.0, col_norms, 1.0)
    x = np.zeros(n)
    r = y.astype(np.float64, copy=True)
    support: list[int] = []
    selected = np.zeros(n, dtype=bool)
    deficient = False
    iterations = 0
    while True:
        if np.linalg.norm(r) <= residual_tol:
            status = OMP_TOL_STOP
            break
        if len(support) >= kmax:
            status = OMP_TARGET_REACHED
            break
        if iterations >= max_iterations:
            status = OMP_STALLED
            break
        corr = np.abs(a.T @ r) / safe_norms
        corr[col_norms == 0.0] = 0.0
        j = int(np.argmax(corr))  # argmax takes the first maximum: lowest index
        if corr[j] == 0.0 or selected[j]:
            status = OMP_STALLED
            break
        support.append(j)
        selected[j] = True
        iterations += 1
        sub = a[:, support]
        gram = sub.T @ sub
        rhs = sub.T @ y
        try:
            coef = scipy.linalg.cho_solve(
                scipy.linalg.cho_factor(gram, lower=True), rhs)
        except np.linalg.LinAlgError:
            coef = np.linalg.lstsq(sub, y, rcond=None)[0]
            deficient = True
        x = np.zeros(n)
        x[support] = coef
        r = y - sub @ coef
    return x, iterations, status, deficient


def hard_threshold(v: np.ndarray, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries, ties broken by lowest index."""
    if k >= v.size:
        return v.copy()
    out = np.zeros_like(v)
    if k > 0:
        order = np.argsort(-np.abs(v), kind="stable")
        keep = order[:k]
        out[keep] = v[keep]
    return out


def iht_kernel(a: np.ndarray, y: np.ndarray, k: int, fixed_step: bool,
               residual_tol: float, max_iterations: int):
    """Hard-thresholded gradient iteration x <- H_k(x + mu * A'(y - Ax)).

    Starts from zero. The step is either fixed at 1.0 or renormalized each
    round as |g_S|^2 / |A g_S|^2, where g_S is the gradient restricted to
    the current support (the full gradient while the support is empty).
    Stops when the iterate moves by at most residual_tol. A vanishing
    step denominator ends the run: silently when the restricted gradient
    is zero too (nothing can move: the iterate is stationary), as a
    breakdown otherwise.

    Returns (x, iterations, status).
    """
    n = a.shape[1]
    x = np.zeros(n)
    status = IHT_MAX_ITERATIONS
    iterations = 0
    for t in range(1, max_iterations + 1):
        g = a.T @ (y - a @ x)
        if fixed_step:
            mu = 1.0
        else:
            support = np.flatnonzero(x)
            if support.size:
                gs = np.zeros(n)
                gs[support] = g[support]
            else:
                gs = g
            num = float(gs @ gs)
            ags = a @ gs
            den = float(ags @ ags)
            if den == 0.0:
                if num == 0.0:
                    status = IHT_CONVERGED
                else:
                    status = IHT_STEP_BREAKDOWN
                break
            mu = num / den
        x_new = hard_threshold(x + mu * g, k)
        iterations = t
        if np.linalg.norm(x_new - x) <= residual_tol:
            x = x_new
            status = IHT_CONVERGED
            break
        x = x_new
    return x, iterations, status
