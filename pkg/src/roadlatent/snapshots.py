"""Traffic snapshot series: sparse speed matrices, ingestion, and hold-out masking."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .network import RoadNetwork

logger = logging.getLogger(__name__)

__all__ = [
    "SnapshotSeries",
    "ReadingRecord",
    "HoldoutMask",
    "build_snapshot_series",
    "mask_holdout",
]


@dataclass(frozen=True)
class ReadingRecord:
    """One sensor reading: minutes since epoch start, the edge it sits on, a speed."""

    timestamp: float
    src: int
    dst: int
    speed: float


class SnapshotSeries:
    """A sequence of n x n sparse nonnegative speed matrices G_1..G_T.

    An entry is *observed* iff it is strictly positive; the binary indicator
    mask Y_t is derived from that convention, never stored. ``span`` is the
    number of minutes each snapshot aggregates.
    """

    def __init__(self, snapshots: list[sp.spmatrix], span: float):
        if not snapshots:
            raise DataError("a snapshot series needs at least one snapshot")
        if span <= 0:
            raise DataError(f"span must be positive, got {span}")
        n = snapshots[0].shape[0]
        mats = []
        for t, g in enumerate(snapshots):
            g = sp.csr_matrix(g)
            if g.shape != (n, n):
                raise DataError(f"snapshot {t} has shape {g.shape}, expected ({n}, {n})")
            if g.nnz and g.data.min() < 0:
                raise DataError(f"snapshot {t} has negative speeds")
            g.eliminate_zeros()
            g.sort_indices()
            mats.append(g)
        self._mats = mats
        self.n = n
        self.span = float(span)
        self._obs_cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    @property
    def T(self) -> int:
        return len(self._mats)

    def snapshot(self, t: int) -> sp.csr_matrix:
        if not 0 <= t < self.T:
            raise IndexError(f"snapshot index {t} out of range [0, {self.T})")
        return self._mats[t]

    def observed(self, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rows, cols, values) of the observed entries of G_t, row-major order."""
        if t not in self._obs_cache:
            coo = self.snapshot(t).tocoo()
            self._obs_cache[t] = (coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data.copy())
        return self._obs_cache[t]

    def mask(self, t: int) -> sp.csr_matrix:
        """Binary indicator Y_t with ones exactly at observed entries."""
        g = self.snapshot(t).copy()
        g.data = np.ones_like(g.data)
        return g

    def observed_count(self, t: int) -> int:
        return self.snapshot(t).nnz

    def to_dense(self, t: int) -> np.ndarray:
        return self.snapshot(t).toarray()

    def copy(self) -> "SnapshotSeries":
        return SnapshotSeries([g.copy() for g in self._mats], self.span)

    def validate_on(self, network: RoadNetwork) -> None:
        """Check every observed entry lies on a topology edge."""
        if network.n != self.n:
            raise DataError(f"series is {self.n}-vertex but network has {network.n}")
        for t in range(self.T):
            rows, cols, _ = self.observed(t)
            for i, j in zip(rows, cols):
                if not network.has_edge(int(i), int(j)):
                    raise DataError(f"snapshot {t} has a reading on non-edge ({i},{j})")

    @classmethod
    def from_dense(cls, mats: list[np.ndarray], span: float) -> "SnapshotSeries":
        return cls([sp.csr_matrix(m) for m in mats], span)

    @classmethod
    def from_entries(
        cls,
        n: int,
        per_snapshot: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
        span: float,
    ) -> "SnapshotSeries":
        mats = [
            sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
            for rows, cols, vals in per_snapshot
        ]
        return cls(mats, span)


@dataclass(frozen=True)
class HoldoutMask:
    """Entries hidden from a series for scoring, with their true values."""

    t: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    value: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def for_snapshot(self, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        sel = self.t == t
        return self.src[sel], self.dst[sel], self.value[sel]


def build_snapshot_series(
    readings: list[ReadingRecord],
    network: RoadNetwork,
    span: float,
    T: int,
) -> SnapshotSeries:
    """Bucket readings into T consecutive span-minute intervals, averaging per edge.

    Readings outside [0, T*span) are dropped with a logged count, as are
    non-positive speeds (a zero speed would be indistinguishable from a
    missing entry). A reading on a pair that is not a topology edge is an
    error.
    """
    if span <= 0:
        raise DataError(f"span must be positive, got {span}")
    if T < 1:
        raise DataError(f"snapshot count must be >= 1, got {T}")
    sums: list[dict[tuple[int, int], float]] = [dict() for _ in range(T)]
    counts: list[dict[tuple[int, int], int]] = [dict() for _ in range(T)]
    out_of_window = 0
    nonpositive = 0
    for r in readings:
        if r.speed <= 0:
            nonpositive += 1
            continue
        if not (0 <= r.timestamp < T * span):
            out_of_window += 1
            continue
        if not network.has_edge(r.src, r.dst):
            raise DataError(f"reading references non-edge ({r.src},{r.dst})")
        b = int(r.timestamp // span)
        key = (r.src, r.dst)
        sums[b][key] = sums[b].get(key, 0.0) + r.speed
        counts[b][key] = counts[b].get(key, 0) + 1
    if out_of_window:
        logger.warning("rejected %d readings outside [0, %g) minutes", out_of_window, T * span)
    if nonpositive:
        logger.warning("rejected %d readings with non-positive speed", nonpositive)
    per_snapshot = []
    for b in range(T):
        keys = sorted(sums[b])
        rows = np.array([k[0] for k in keys], dtype=np.int64)
        cols = np.array([k[1] for k in keys], dtype=np.int64)
        vals = np.array([sums[b][k] / counts[b][k] for k in keys], dtype=float)
        per_snapshot.append((rows, cols, vals))
    return SnapshotSeries.from_entries(network.n, per_snapshot, span)


def mask_holdout(
    series: SnapshotSeries, rate: float, seed: int
) -> tuple[SnapshotSeries, HoldoutMask]:
    """Hide a seeded fraction of each snapshot's observed entries.

    Exactly floor(rate * observed) entries per snapshot are zeroed out; their
    true values are recorded for scoring. ``rate`` must lie in [0, 1).
    """
    if not 0 <= rate < 1:
        raise DataError(f"hold-out rate must be in [0, 1), got {rate}")
    rng = np.random.default_rng(seed)
    masked = []
    ts, srcs, dsts, vals = [], [], [], []
    for t in range(series.T):
        rows, cols, values = series.observed(t)
        n_hide = int(rate * len(values))
        dense = series.snapshot(t).copy()
        if n_hide > 0:
            pick = rng.choice(len(values), size=n_hide, replace=False)
            ts.append(np.full(n_hide, t, dtype=np.int64))
            srcs.append(rows[pick])
            dsts.append(cols[pick])
            vals.append(values[pick])
            dense[rows[pick], cols[pick]] = 0.0
            dense.eliminate_zeros()
        masked.append(dense)
    cat = lambda parts, dtype: (
        np.concatenate(parts) if parts else np.empty(0, dtype=dtype)
    )
    mask = HoldoutMask(
        t=cat(ts, np.int64), src=cat(srcs, np.int64), dst=cat(dsts, np.int64), value=cat(vals, float)
    )
    return SnapshotSeries(masked, series.span), mask
