"""Joint multiplicative-update learning of all latent matrices.

One iteration sweeps the time-dependent latent matrices in order, then the
interaction matrix, then the transition matrix. Every step is an elementwise
nonnegativity-preserving ratio update, and the objective is non-increasing
across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .model import (
    EPS,
    Hyperparams,
    LatentState,
    evaluate_objective,
    reconstruct_on_edges,
)
from .network import LaplacianTriple
from .snapshots import SnapshotSeries

__all__ = ["step_latent", "step_interaction", "step_transition", "global_learn", "GlobalLearnResult"]


def _masked_reconstruction(series: SnapshotSeries, state: LatentState, t: int) -> sp.csr_matrix:
    rows, cols, _ = series.observed(t)
    pred = reconstruct_on_edges(state, t, rows, cols)
    return sp.csr_matrix((pred, (rows, cols)), shape=(series.n, series.n))


def step_latent(
    state: LatentState,
    series: SnapshotSeries,
    laplacian: LaplacianTriple,
    hyper: Hyperparams,
    t: int,
) -> np.ndarray:
    """One damped multiplicative update of U_t; returns the new matrix.

    The ratio's numerator collects the negative gradient parts and the
    denominator the positive ones, so an exact fit is a fixed point and zero
    entries stay zero. Temporal terms drop at the boundaries: the backward
    term at t = 0 and the forward term at t = T-1.
    """
    U, B, A = state.U[t], state.B, state.A
    G = series.snapshot(t)
    S = _masked_reconstruction(series, state, t)
    UB = U @ B
    UBt = U @ B.T
    num = G @ UBt + G.T @ UB
    den = S @ UBt + S.T @ UB
    if hyper.lam:
        num += hyper.lam * (laplacian.W @ U)
        den += hyper.lam * (laplacian.D @ U)
    if hyper.gamma and state.T > 1:
        if t > 0:
            num += hyper.gamma * (state.U[t - 1] @ A)
            den += hyper.gamma * U
        if t < state.T - 1:
            num += hyper.gamma * (state.U[t + 1] @ A.T)
            den += hyper.gamma * (U @ (A @ A.T))
    ratio = np.asarray(num) / np.maximum(np.asarray(den), EPS)
    return U * ratio**0.25


def step_interaction(
    state: LatentState, series: SnapshotSeries, hyper: Hyperparams
) -> np.ndarray:
    """One multiplicative update of the interaction matrix B (exponent 1)."""
    del hyper
    k = state.k
    num = np.zeros((k, k))
    den = np.zeros((k, k))
    for t in range(series.T):
        U = state.U[t]
        G = series.snapshot(t)
        S = _masked_reconstruction(series, state, t)
        num += U.T @ (G @ U)
        den += U.T @ (S @ U)
    return state.B * (num / np.maximum(den, EPS))


def step_transition(state: LatentState, hyper: Hyperparams) -> np.ndarray:
    """One multiplicative update of the transition matrix A.

    Sums run over consecutive snapshot pairs, i.e. t = 2..T in 1-based terms;
    requires at least two snapshots.
    """
    del hyper
    if state.T < 2:
        raise ValueError("transition update needs at least two snapshots")
    num = np.zeros_like(state.A)
    den = np.zeros_like(state.A)
    for t in range(1, state.T):
        num += state.U[t - 1].T @ state.U[t]
        den += state.U[t - 1].T @ state.U[t - 1] @ state.A
    return state.A * (num / np.maximum(den, EPS))


@dataclass
class GlobalLearnResult:
    state: LatentState
    objective_trace: list[float]
    iterations: int
    converged: bool


def _initial_state(series: SnapshotSeries, hyper: Hyperparams) -> LatentState:
    """Seeded uniform-(0,1] state; B rescaled once so the initial reconstruction
    matches the mean observed speed (a cold start at traffic scale otherwise
    spends dozens of iterations on pure rescaling)."""
    rng = np.random.default_rng(hyper.seed)
    n, k, T = series.n, hyper.k, series.T
    U = [1.0 - rng.random((n, k)) for _ in range(T)]
    B = 1.0 - rng.random((k, k))
    A = 1.0 - rng.random((k, k)) if T > 1 else np.eye(k)
    state = LatentState(U=U, B=B, A=A)
    obs_sum = 0.0
    obs_cnt = 0
    pred_sum = 0.0
    for t in range(T):
        rows, cols, vals = series.observed(t)
        if len(vals):
            obs_sum += float(vals.sum())
            obs_cnt += len(vals)
            pred_sum += float(reconstruct_on_edges(state, t, rows, cols).sum())
    if obs_cnt and pred_sum > 0:
        state.B = B * ((obs_sum / obs_cnt) / (pred_sum / obs_cnt))
    return state


def global_learn(
    series: SnapshotSeries,
    laplacian: LaplacianTriple,
    hyper: Hyperparams,
) -> GlobalLearnResult:
    """Jointly infer all U_t, B, A by cyclic multiplicative updates.

    Stops when the relative objective change drops below ``hyper.tol`` or
    after ``hyper.max_iters`` iterations. The trace holds the objective after
    initialization and after each iteration.
    """
    if series.T < 1:
        raise DataError("cannot learn from an empty series")
    cap = hyper.max_iters
    state = _initial_state(series, hyper)
    trace = [evaluate_objective(state, series, laplacian, hyper)]
    converged = False
    it = 0
    for it in range(1, cap + 1):
        for t in range(series.T):
            state.U[t] = step_latent(state, series, laplacian, hyper, t)
        state.B = step_interaction(state, series, hyper)
        if series.T > 1:
            state.A = step_transition(state, hyper)
        trace.append(evaluate_objective(state, series, laplacian, hyper))
        if abs(trace[-2] - trace[-1]) <= hyper.tol * max(abs(trace[-2]), EPS):
            converged = True
            break
    return GlobalLearnResult(state=state, objective_trace=trace, iterations=it, converged=converged)
