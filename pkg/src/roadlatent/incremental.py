"""Sequential feedback-driven latent adjustment with SCC-ordered propagation.

Instead of relearning everything per timestamp, the incremental learner
copies the previous latents, finds the vertices whose outgoing-edge
predictions are off by more than a tolerance band, and applies minimal-norm
per-vertex corrections, visiting candidates in reverse-topological SCC order
so that fixing a vertex does not undo corrections made downstream.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .global_learning import global_learn, step_transition
from .model import EPS, Hyperparams, LatentState
from .network import LaplacianTriple, SccOrdering
from .snapshots import SnapshotSeries

logger = logging.getLogger(__name__)

__all__ = [
    "CandidateSet",
    "select_candidates",
    "adjust_vertex",
    "incremental_update",
    "incremental_learn",
    "IncrementalUpdateInfo",
]


@dataclass
class CandidateSet:
    """Vertices queued for adjustment; traversal follows an SccOrdering."""

    members: set[int] = field(default_factory=set)

    def in_order(self, ordering: SccOrdering) -> list[int]:
        return sorted(self.members, key=lambda v: ordering.position[v])

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: int) -> bool:
        return v in self.members


def _violation_cut(delta: float) -> float:
    # corrections land predictions exactly on the delta boundary, so the
    # violation test must sit strictly (plus sub-tolerance slack) above it,
    # or freshly corrected edges would re-queue their endpoints forever
    return delta + 1e-6 * max(1.0, delta)


def select_candidates(
    U_prev: np.ndarray, B: np.ndarray, G_t: sp.spmatrix, delta: float
) -> CandidateSet:
    """Both endpoints of every observed edge whose prediction misses by over delta."""
    G_t = sp.csr_matrix(G_t)
    coo = G_t.tocoo()
    if coo.nnz == 0:
        return CandidateSet()
    P = U_prev @ B
    pred = np.einsum("ek,ek->e", P[coo.row], U_prev[coo.col])
    bad = np.abs(coo.data - pred) > _violation_cut(delta)
    members = set(coo.row[bad].tolist()) | set(coo.col[bad].tolist())
    return CandidateSet(members={int(v) for v in members})


def adjust_vertex(
    u_i: np.ndarray,
    B: np.ndarray,
    u_j: np.ndarray,
    y: float,
    delta: float,
    C: float,
) -> np.ndarray:
    """Minimal-norm correction of one latent row against one observed edge.

    Passive inside the delta band. When the edge is under-predicted the row
    moves up along d = B u_j by a capped exact step; when over-predicted, the
    step size is the root of the clamped prediction function, found by
    bisection (the clamp at zero makes the function piecewise linear).
    Always returns an elementwise nonnegative row.
    """
    d = B @ u_j
    yhat = float(u_i @ d)
    if abs(yhat - y) <= delta:
        return u_i
    dn2 = float(d @ d)
    if dn2 <= EPS:
        logger.warning("violated edge has zero adjustment direction; skipping")
        return u_i
    if yhat < y:
        alpha = min(C, max(abs(yhat - y) - delta, 0.0) / dn2)
        return np.maximum(u_i + alpha * d, 0.0)
    # over-prediction: f(theta) = max(u_i - theta*d, 0) . d - y - delta,
    # non-increasing with f(0) = yhat - y - delta > 0
    def f(theta: float) -> float:
        return float(np.maximum(u_i - theta * d, 0.0) @ d) - y - delta

    if f(C) >= 0:
        theta = C
    else:
        lo, hi = 0.0, C
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        theta = 0.5 * (lo + hi)
    return np.maximum(u_i - theta * d, 0.0)


@dataclass
class IncrementalUpdateInfo:
    """Per-update diagnostics: sweep counts, work counters, convergence flag."""

    sweeps: int = 0
    converged: bool = True
    vertex_visits: int = 0
    edge_adjustments: int = 0
    sweep_candidates: list[int] = field(default_factory=list)
    sweep_violated_edges: list[int] = field(default_factory=list)
    sweep_max_violation: list[float] = field(default_factory=list)


def incremental_update(
    U_prev: np.ndarray,
    B: np.ndarray,
    G_t: sp.spmatrix,
    ordering: SccOrdering,
    hyper: Hyperparams,
) -> tuple[np.ndarray, IncrementalUpdateInfo]:
    """Adjust the previous latents against one newly observed snapshot.

    Visits candidate vertices in SCC order, correcting each against its
    observed outgoing edges; a vertex leaves the queue once its row settles
    (squared change <= phi) and an out-neighbour re-enters whenever its edge
    becomes violated. Sweeps are capped at ``hyper.max_iters``; hitting the
    cap returns the current latents with ``converged=False``.
    """
    G_t = sp.csr_matrix(G_t)
    U = U_prev.copy()
    cand = select_candidates(U_prev, B, G_t, hyper.delta)
    info = IncrementalUpdateInfo()
    indptr, indices, data = G_t.indptr, G_t.indices, G_t.data
    cut = _violation_cut(hyper.delta)
    while cand.members and info.sweeps < hyper.max_iters:
        info.sweeps += 1
        snapshot_order = cand.in_order(ordering)
        info.sweep_candidates.append(len(snapshot_order))
        violated = 0
        max_violation = 0.0
        for i in snapshot_order:
            info.vertex_visits += 1
            old = U[i].copy()
            lo, hi = indptr[i], indptr[i + 1]
            for p in range(lo, hi):
                j, y = int(indices[p]), float(data[p])
                U[i] = adjust_vertex(U[i], B, U[j], y, hyper.delta, hyper.C)
                info.edge_adjustments += 1
            change = float(np.sum((U[i] - old) ** 2))
            if change <= hyper.phi:
                cand.members.discard(i)
            for p in range(lo, hi):
                j, y = int(indices[p]), float(data[p])
                err = abs(float(U[i] @ B @ U[j]) - y)
                if err > cut:
                    cand.members.add(j)
                    violated += 1
                    max_violation = max(max_violation, err)
        info.sweep_violated_edges.append(violated)
        info.sweep_max_violation.append(max_violation)
    info.converged = not cand.members
    return U, info


def incremental_learn(
    series: SnapshotSeries,
    laplacian: LaplacianTriple,
    hyper: Hyperparams,
    ordering: SccOrdering,
) -> LatentState:
    """Learn (U_1, B) once on the first snapshot, then roll forward.

    Later snapshots only trigger per-vertex feedback adjustments; the
    interaction matrix is treated as an inherent property and stays fixed.
    The transition matrix is fitted last by iterating its multiplicative
    update to convergence over the finished latent sequence.
    """
    if series.T < 1:
        raise DataError("cannot learn from an empty series")
    first = SnapshotSeries([series.snapshot(0)], series.span)
    result = global_learn(first, laplacian, hyper)
    B = result.state.B
    U_list = [result.state.U[0]]
    for t in range(1, series.T):
        U_t, info = incremental_update(U_list[-1], B, series.snapshot(t), ordering, hyper)
        if not info.converged:
            logger.warning("incremental update at t=%d hit the sweep cap (%d sweeps)", t, info.sweeps)
        U_list.append(U_t)
    if series.T > 1:
        rng = np.random.default_rng(hyper.seed)
        A = 1.0 - rng.random((hyper.k, hyper.k))
        state = LatentState(U=U_list, B=B, A=A)
        for _ in range(hyper.max_iters):
            A_new = step_transition(state, hyper)
            rel = float(np.abs(A_new - state.A).max()) / max(float(np.abs(state.A).max()), EPS)
            state.A = A_new
            if rel <= hyper.tol:
                break
    else:
        state = LatentState(U=U_list, B=B, A=np.eye(hyper.k))
    return state
