"""Spatial nearest-neighbour completion baseline."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .errors import DataError
from .network import RoadNetwork
from .snapshots import SnapshotSeries

__all__ = ["knn_complete"]


def knn_complete(series: SnapshotSeries, network: RoadNetwork, K: int) -> SnapshotSeries:
    """Fill each missing topology edge with the mean of the K nearest observed edges.

    Nearness is Euclidean distance between edge midpoints; snapshots with
    fewer than K observed edges fall back to all of them. Purely spatial:
    each snapshot is completed independently.
    """
    if network.coords is None:
        raise DataError("nearest-neighbour completion needs vertex coordinates")
    if K < 1:
        raise ValueError(f"neighbour count must be >= 1, got {K}")
    ea = network.edge_array
    midpoints = 0.5 * (network.coords[ea[:, 0]] + network.coords[ea[:, 1]])
    edge_index = {(int(s), int(d)): idx for idx, (s, d) in enumerate(ea)}
    completed = []
    for t in range(series.T):
        rows, cols, vals = series.observed(t)
        if len(vals) == 0:
            raise DataError(f"snapshot {t} has no observed edges to interpolate from")
        obs_idx = np.array([edge_index[(int(i), int(j))] for i, j in zip(rows, cols)])
        obs_set = set(obs_idx.tolist())
        missing_idx = np.array([e for e in range(len(ea)) if e not in obs_set], dtype=np.int64)
        out = series.snapshot(t).tolil(copy=True)
        if len(missing_idx):
            tree = cKDTree(midpoints[obs_idx])
            kk = min(K, len(obs_idx))
            _, nbr = tree.query(midpoints[missing_idx], k=kk)
            nbr = np.atleast_2d(nbr.reshape(len(missing_idx), kk))
            fills = vals[nbr].mean(axis=1)
            out[ea[missing_idx, 0], ea[missing_idx, 1]] = fills
        completed.append(sp.csr_matrix(out))
    return SnapshotSeries(completed, series.span)
