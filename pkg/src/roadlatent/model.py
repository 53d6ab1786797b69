"""Model state, hyperparameters, objective, gradient, completion, and prediction.

The model approximates each snapshot as G_t ~= U_t B U_t^T with nonnegative
per-vertex latent attributes U_t (n x k), a fixed attribute-interaction
matrix B (k x k), and a transition matrix A (k x k) with U_t ~= U_{t-1} A.
The loss is evaluated only on observed entries, smoothed by the graph
Laplacian, and tied across time by the transition term:

    sum_t ||Y_t o (G_t - U_t B U_t^T)||_F^2
    + lam * sum_t Tr(U_t^T L U_t)
    + gamma * sum_{t>=2} ||U_t - U_{t-1} A||_F^2
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .network import LaplacianTriple
from .snapshots import SnapshotSeries

__all__ = [
    "Hyperparams",
    "LatentState",
    "reconstruct_snapshot",
    "reconstruct_on_edges",
    "predict_ahead",
    "predict_on_edges",
    "evaluate_objective",
    "gradient_wrt_latent",
    "save_state",
    "load_state",
]

# floor applied to multiplicative-update denominators and other near-zero divisors
EPS = 1e-12


@dataclass(frozen=True)
class Hyperparams:
    """Learning knobs; defaults follow the experiment defaults plus invented caps.

    k: latent dimension; lam: Laplacian weight; gamma: transition weight;
    delta: prediction-error tolerance in speed units; phi: squared-Frobenius
    threshold under which a latent row counts as settled; C: aggressiveness
    cap of the per-vertex update; tol: relative objective-change convergence
    threshold; max_iters: iteration/sweep cap; seed: RNG seed.
    """

    k: int = 20
    lam: float = 2.0**3
    gamma: float = 2.0**-5
    delta: float = 1.0
    phi: float = 1e-2
    C: float = 1.0
    tol: float = 1e-4
    max_iters: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        for name in ("lam", "gamma", "delta", "phi", "C", "tol"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    def replace(self, **kw) -> "Hyperparams":
        d = asdict(self)
        d.update(kw)
        return Hyperparams(**d)


@dataclass
class LatentState:
    """Nonnegative latent attributes per timestamp plus interaction/transition."""

    U: list[np.ndarray]
    B: np.ndarray
    A: np.ndarray

    @property
    def T(self) -> int:
        return len(self.U)

    @property
    def n(self) -> int:
        return self.U[0].shape[0]

    @property
    def k(self) -> int:
        return self.B.shape[0]

    def copy(self) -> "LatentState":
        return LatentState(U=[u.copy() for u in self.U], B=self.B.copy(), A=self.A.copy())

    def check_nonnegative(self) -> bool:
        return (
            all(u.min() >= 0 for u in self.U)
            and self.B.min() >= 0
            and self.A.min() >= 0
        )


def _check_t(state: LatentState, t: int) -> None:
    if not 0 <= t < state.T:
        raise IndexError(f"timestamp index {t} out of range [0, {state.T})")


def reconstruct_snapshot(state: LatentState, t: int) -> np.ndarray:
    """Dense U_t B U_t^T for snapshot t (0-based); completes every entry."""
    _check_t(state, t)
    return state.U[t] @ state.B @ state.U[t].T


def reconstruct_on_edges(
    state: LatentState, t: int, rows: np.ndarray, cols: np.ndarray
) -> np.ndarray:
    """Values of U_t B U_t^T at the given entry positions only."""
    _check_t(state, t)
    P = state.U[t] @ state.B
    return np.einsum("ek,ek->e", P[rows], state.U[t][cols])


def predict_ahead(state: LatentState, h: int) -> np.ndarray:
    """Forecast h spans past the last snapshot: (U_T A^h) B (U_T A^h)^T."""
    if h < 1:
        raise ValueError(f"prediction horizon must be >= 1, got {h}")
    Uh = state.U[-1] @ np.linalg.matrix_power(state.A, h)
    return Uh @ state.B @ Uh.T


def predict_on_edges(state: LatentState, h: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    if h < 1:
        raise ValueError(f"prediction horizon must be >= 1, got {h}")
    Uh = state.U[-1] @ np.linalg.matrix_power(state.A, h)
    P = Uh @ state.B
    return np.einsum("ek,ek->e", P[rows], Uh[cols])


def _check_dims(state: LatentState, series: SnapshotSeries, laplacian: LaplacianTriple) -> None:
    if state.T != series.T:
        raise ValueError(f"state has T={state.T} but series has T={series.T}")
    n, k = state.U[0].shape
    if n != series.n:
        raise ValueError(f"state is {n}-vertex but series is {series.n}-vertex")
    if laplacian.L.shape != (n, n):
        raise ValueError(f"Laplacian shape {laplacian.L.shape} does not match n={n}")
    if state.B.shape != (k, k) or state.A.shape != (k, k):
        raise ValueError("B and A must both be k x k")


def _laplacian_quadratic(W: sp.csr_matrix, U: np.ndarray) -> float:
    """Tr(U^T L U) computed as 0.5 * sum_ij W_ij ||U_i - U_j||^2 (exactly nonnegative)."""
    coo = W.tocoo()
    upper = coo.row < coo.col
    r, c, w = coo.row[upper], coo.col[upper], coo.data[upper]
    diff = U[r] - U[c]
    return float(np.sum(w * np.einsum("ek,ek->e", diff, diff)))


def evaluate_objective(
    state: LatentState,
    series: SnapshotSeries,
    laplacian: LaplacianTriple,
    hyper: Hyperparams,
) -> float:
    """Masked reconstruction error + Laplacian smoothness + transition residual."""
    _check_dims(state, series, laplacian)
    total = 0.0
    for t in range(series.T):
        rows, cols, vals = series.observed(t)
        resid = vals - reconstruct_on_edges(state, t, rows, cols)
        total += float(resid @ resid)
        if hyper.lam:
            total += hyper.lam * _laplacian_quadratic(laplacian.W, state.U[t])
    if hyper.gamma:
        for t in range(1, series.T):
            diff = state.U[t] - state.U[t - 1] @ state.A
            total += hyper.gamma * float(np.sum(diff * diff))
    return total


def _masked_product(series: SnapshotSeries, state: LatentState, t: int) -> sp.csr_matrix:
    """Sparse Y_t o (U_t B U_t^T): the reconstruction evaluated at observed entries."""
    rows, cols, _ = series.observed(t)
    pred = reconstruct_on_edges(state, t, rows, cols)
    return sp.csr_matrix((pred, (rows, cols)), shape=(series.n, series.n))


def gradient_wrt_latent(
    state: LatentState,
    series: SnapshotSeries,
    laplacian: LaplacianTriple,
    hyper: Hyperparams,
    t: int,
) -> np.ndarray:
    """Exact derivative of the objective with respect to U_t.

    The masked quartic term contributes S U B^T + S^T U B with
    S = Y o (U B U^T); the transposed half matters whenever the observation
    pattern or B is asymmetric.
    """
    _check_dims(state, series, laplacian)
    _check_t(state, t)
    U, B, A = state.U[t], state.B, state.A
    G = series.snapshot(t)
    S = _masked_product(series, state, t)
    UBt = U @ B.T
    UB = U @ B
    g = -2.0 * (G @ UBt) - 2.0 * (G.T @ UB) + 2.0 * (S @ UBt) + 2.0 * (S.T @ UB)
    if hyper.lam:
        g += 2.0 * hyper.lam * (laplacian.L @ U)
    if hyper.gamma:
        if t > 0:
            g += 2.0 * hyper.gamma * (U - state.U[t - 1] @ A)
        if t < state.T - 1:
            g += 2.0 * hyper.gamma * (U @ (A @ A.T) - state.U[t + 1] @ A.T)
    return np.asarray(g)


_FORMAT_TAG = "roadlatent-state"
_FORMAT_VERSION = 1


def save_state(path, state: LatentState, hyper: Hyperparams | None = None) -> None:
    """Write the state as self-describing text with full round-trip precision."""
    lines = [f"{_FORMAT_TAG} {_FORMAT_VERSION}"]
    lines.append(f"dims {state.n} {state.k} {state.T}")
    if hyper is not None:
        lines.append("hyper " + json.dumps(asdict(hyper), sort_keys=True))
    def emit(name, M):
        lines.append(f"matrix {name} {M.shape[0]} {M.shape[1]}")
        for row in M:
            lines.append(" ".join(repr(float(x)) for x in row))
    for t, u in enumerate(state.U):
        emit(f"U{t}", u)
    emit("B", state.B)
    emit("A", state.A)
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_state(path) -> tuple[LatentState, Hyperparams | None]:
    """Read a state written by :func:`save_state`. Returns (state, hyper-or-None)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith(_FORMAT_TAG):
        raise DataError(f"{path}: not a {_FORMAT_TAG} file")
    version = int(lines[0].split()[1])
    if version != _FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    i = 1
    dims = None
    hyper = None
    mats: dict[str, np.ndarray] = {}
    while i < len(lines):
        ln = lines[i]
        if ln.startswith("dims "):
            dims = tuple(int(x) for x in ln.split()[1:])
            i += 1
        elif ln.startswith("hyper "):
            hyper = Hyperparams(**json.loads(ln[len("hyper "):]))
            i += 1
        elif ln.startswith("matrix "):
            _, name, r, c = ln.split()
            r, c = int(r), int(c)
            block = [
                np.array([float(tok) for tok in lines[i + 1 + j].split()])
                for j in range(r)
            ]
            mats[name] = np.vstack(block).reshape(r, c) if r else np.empty((0, c))
            i += 1 + r
        elif ln == "end":
            break
        else:
            raise DataError(f"{path}: unexpected line {i}: {ln!r}")
    if dims is None or "B" not in mats or "A" not in mats:
        raise DataError(f"{path}: incomplete state file")
    n, k, T = dims
    U = [mats[f"U{t}"] for t in range(T)]
    state = LatentState(U=U, B=mats["B"], A=mats["A"])
    if state.n != n or state.k != k:
        raise DataError(f"{path}: dims header does not match matrices")
    return state, hyper
