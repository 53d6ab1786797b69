"""Planted-model synthetic data: geometric road networks with smooth latent fields.

Stands in for a proprietary sensor feed. Vertices get planar coordinates, the
topology connects each vertex to its nearest neighbours (directed), and the
planted latent attributes are smooth positive fields over the plane, so the
generated speeds carry the topology-correlated structure the model assumes.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .model import LatentState
from .network import RoadNetwork
from .snapshots import SnapshotSeries

__all__ = ["generate_synthetic"]

# lengthscale of the planted latent bumps, in coordinate units on [0,1]^2
_FIELD_SCALE = 0.45
# per-step latent jitter, as a fraction of the drift parameter
_JITTER = 0.2


def generate_synthetic(
    n: int,
    k: int,
    T: int,
    edge_density: float,
    noise_sd: float,
    missing_rate: float,
    drift: float,
    seed: int,
    speed_scale: float = 60.0,
    span: float = 5.0,
) -> tuple[RoadNetwork, SnapshotSeries, LatentState]:
    """Sample a network, a planted latent state, and the snapshots it generates.

    ``edge_density`` is the fraction of ordered vertex pairs kept as edges
    (realized as a nearest-neighbour graph over random planar coordinates).
    ``drift`` in [0, 1] controls non-stationarity twice over: it blends the
    planted transition between the identity and a random row-stochastic
    mixing matrix, and it sets the size of a per-step multiplicative jitter
    on the latents (the part no fixed transition can extrapolate). Speeds are
    U*_t B* U*_t^T on topology edges, plus zero-truncated Gaussian noise,
    with a ``missing_rate`` Bernoulli fraction of entries dropped.
    Deterministic for a fixed seed; returns the planted state as ground truth.
    """
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    if k < 1 or T < 1:
        raise ValueError(f"k and T must be >= 1, got k={k}, T={T}")
    if not 0 < edge_density <= 1:
        raise ValueError(f"edge_density must be in (0, 1], got {edge_density}")
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be >= 0, got {noise_sd}")
    if not 0 <= missing_rate < 1:
        raise ValueError(f"missing_rate must be in [0, 1), got {missing_rate}")
    if not 0 <= drift <= 1:
        raise ValueError(f"drift must be in [0, 1], got {drift}")
    if speed_scale <= 0:
        raise ValueError(f"speed_scale must be positive, got {speed_scale}")

    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2))

    # directed q-nearest-neighbour topology
    q = max(1, round(edge_density * (n - 1)))
    d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    edges = []
    for i in range(n):
        nearest = np.argpartition(d2[i], q - 1)[:q] if q < n - 1 else np.argsort(d2[i])[: n - 1]
        for j in nearest:
            edges.append((i, int(j)))
    network = RoadNetwork(n=n, edges=tuple(edges), coords=coords)
    ea = network.edge_array
    rows, cols = ea[:, 0], ea[:, 1]

    # planted latents: one smooth positive radial field per attribute
    centers = rng.random((k, 2))
    bump = ((coords[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    U1 = 0.1 + np.exp(-bump / (2 * _FIELD_SCALE**2))
    B = 1.0 - rng.random((k, k))
    M = 1.0 - rng.random((k, k))
    M /= M.sum(axis=1, keepdims=True)
    A = (1.0 - drift) * np.eye(k) + drift * M

    U_list = [U1]
    for _ in range(T - 1):
        step = U_list[-1] @ A
        if drift > 0:
            step = step * np.exp(rng.normal(0.0, _JITTER * drift, size=step.shape))
        U_list.append(step)

    # scale B so the first snapshot's mean edge speed hits speed_scale
    base = np.einsum("ek,ek->e", (U1 @ B)[rows], U1[cols])
    B = B * (speed_scale / base.mean())

    snapshots = []
    for t in range(T):
        P = U_list[t] @ B
        vals = np.einsum("ek,ek->e", P[rows], U_list[t][cols])
        if noise_sd > 0:
            vals = np.maximum(vals + rng.normal(0.0, noise_sd, size=len(vals)), 0.0)
        keep = np.ones(len(vals), dtype=bool)
        if missing_rate > 0:
            keep = rng.random(len(vals)) >= missing_rate
        keep &= vals > 0
        g = sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(n, n))
        snapshots.append(g)
    series = SnapshotSeries(snapshots, span=span)
    planted = LatentState(U=U_list, B=B, A=A)
    return network, series, planted
