"""Independent oracles shared across test modules.

Everything here recomputes expected values by a route independent of the
implementation under test: finite differences, brute-force reachability,
exhaustive scans, and a generic constrained minimizer.
"""

import numpy as np
import scipy.optimize

from roadlatent import evaluate_objective


def fd_gradient(state, series, laplacian, hyper, t, step=1e-6):
    """Central finite differences of the objective with respect to U_t."""
    base = state.copy()
    g = np.zeros_like(base.U[t])
    n, k = g.shape
    for i in range(n):
        for j in range(k):
            up = base.copy()
            up.U[t][i, j] += step
            down = base.copy()
            down.U[t][i, j] -= step
            g[i, j] = (
                evaluate_objective(up, series, laplacian, hyper)
                - evaluate_objective(down, series, laplacian, hyper)
            ) / (2 * step)
    return g


def brute_force_components(n, edges):
    """SCC labels by pairwise mutual reachability (BFS both ways)."""
    adj = [[] for _ in range(n)]
    for s, d in edges:
        adj[s].append(d)

    def reachable(src):
        seen = {src}
        stack = [src]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    reach = [reachable(v) for v in range(n)]
    labels = [-1] * n
    next_label = 0
    for v in range(n):
        if labels[v] != -1:
            continue
        for w in range(v, n):
            if labels[w] == -1 and v in reach[w] and w in reach[v]:
                labels[w] = next_label
        next_label += 1
    return labels


def partitions_equal(a, b):
    """Same partition up to label renaming."""
    mapping = {}
    for x, y in zip(a, b):
        if x in mapping and mapping[x] != y:
            return False
        mapping[x] = y
    return len(set(mapping.values())) == len(mapping)


def pa_objective(z, u_anchor, d, y, delta, C):
    """The per-vertex adjustment objective: 0.5||z - u||^2 + C * hinge band excess."""
    xi = max(0.0, abs(float(z @ d) - y) - delta)
    return 0.5 * float(np.sum((z - u_anchor) ** 2)) + C * xi


def pa_minimize(u_anchor, d, y, delta, C):
    """Constrained numerical minimizer of the adjustment objective over z >= 0.

    Solved as a smooth QP in (z, xi) with SLSQP from several starts; returns
    the best objective value found.
    """
    k = len(u_anchor)

    def fun(x):
        z, xi = x[:k], x[k]
        return 0.5 * float(np.sum((z - u_anchor) ** 2)) + C * xi

    def jac(x):
        z, xi = x[:k], x[k]
        return np.concatenate([z - u_anchor, [C]])

    cons = [
        {"type": "ineq", "fun": lambda x: x[k] + delta - (x[:k] @ d - y)},
        {"type": "ineq", "fun": lambda x: x[k] + delta - (y - x[:k] @ d)},
    ]
    bounds = [(0.0, None)] * k + [(0.0, None)]
    best = None
    starts = [u_anchor.copy(), np.zeros(k), np.maximum(u_anchor + (y - u_anchor @ d) * d / max(d @ d, 1e-12), 0.0)]
    for z0 in starts:
        xi0 = max(0.0, abs(float(z0 @ d) - y) - delta)
        res = scipy.optimize.minimize(
            fun, np.concatenate([z0, [xi0]]), jac=jac, bounds=bounds, constraints=cons,
            method="SLSQP", options={"maxiter": 400, "ftol": 1e-14},
        )
        val = pa_objective(np.maximum(res.x[:k], 0.0), u_anchor, d, y, delta, C)
        if best is None or val < best:
            best = val
    return best


def observed_mape(state, series):
    """Pooled relative error of the reconstruction on all observed entries."""
    from roadlatent import reconstruct_on_edges

    num = 0.0
    den = 0
    for t in range(series.T):
        rows, cols, vals = series.observed(t)
        pred = reconstruct_on_edges(state, t, rows, cols)
        num += float(np.sum(np.abs(pred - vals) / vals))
        den += len(vals)
    return num / den
