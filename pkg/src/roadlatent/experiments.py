"""Experiment protocols: completion, h-step prediction, and online forecasting."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import knn_complete
from .errors import ConfigError, DataError
from .global_learning import global_learn
from .incremental import incremental_learn, incremental_update
from .metrics import mape, rmse
from .model import Hyperparams, LatentState, predict_on_edges, reconstruct_on_edges
from .network import RoadNetwork, build_proximity_laplacian, update_ordering
from .snapshots import SnapshotSeries, mask_holdout

__all__ = [
    "ExperimentReport",
    "run_completion_experiment",
    "run_prediction_experiment",
    "run_online_forecast",
    "bench_incremental_speedup",
    "ONLINE_STRATEGIES",
]

ONLINE_STRATEGIES = ("inc", "old", "naive", "all")


@dataclass
class ExperimentReport:
    """Metrics, timings, and a config echo for one experiment run.

    Timings are wall-clock and excluded from reproducibility comparisons;
    everything else is a pure function of (inputs, config).
    """

    task: str
    config: dict
    metrics: dict[str, dict[str, float]] = field(default_factory=dict)
    timings: dict[str, dict[str, float]] = field(default_factory=dict)
    steps: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def deterministic_view(self) -> dict:
        """Everything that must be identical across reruns of the same config."""
        return {"task": self.task, "config": self.config, "metrics": self.metrics,
                "steps": self.steps, "notes": self.notes}

    def summary_text(self) -> str:
        lines = [f"== {self.task} =="]
        for key in sorted(self.config):
            lines.append(f"  config {key} = {self.config[key]}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        for method in sorted(self.metrics):
            parts = ", ".join(f"{m}={v:.6g}" for m, v in sorted(self.metrics[method].items()))
            lines.append(f"  {method}: {parts}")
        for method in sorted(self.timings):
            parts = ", ".join(f"{m}={v:.1f}ms" for m, v in sorted(self.timings[method].items()))
            lines.append(f"  {method} timing: {parts}")
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        """Tidy rows: record,method,name,value."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["record", "method", "name", "value"])
            for key in sorted(self.config):
                w.writerow(["config", "", key, self.config[key]])
            for method in sorted(self.metrics):
                for name, value in sorted(self.metrics[method].items()):
                    w.writerow(["metric", method, name, repr(value)])
            for method in sorted(self.timings):
                for name, value in sorted(self.timings[method].items()):
                    w.writerow(["timing", method, name, repr(value)])
            for row in self.steps:
                for name, value in sorted(row.items()):
                    if name in ("step", "method"):
                        continue
                    w.writerow([f"step_{row['step']}", row.get("method", ""), name, repr(value)])


def _score_holdout(truth: np.ndarray, pred: np.ndarray) -> dict[str, float]:
    return {"mape": mape(truth, pred), "rmse": rmse(truth, pred), "n_scored": float(len(truth))}


def _predict_mask_entries(state: LatentState, mask) -> np.ndarray:
    preds = np.empty(len(mask))
    for t in np.unique(mask.t):
        sel = mask.t == t
        preds[sel] = reconstruct_on_edges(state, int(t), mask.src[sel], mask.dst[sel])
    return preds


def run_completion_experiment(
    series: SnapshotSeries,
    network: RoadNetwork,
    hyper: Hyperparams,
    mask_rate: float = 0.2,
    knn_k: int = 5,
    methods: tuple[str, ...] = ("global", "inc", "naive", "knn"),
) -> ExperimentReport:
    """Hide a fraction of the observed entries, complete them, score on the hidden truth.

    Methods: `global` (joint learner), `inc` (feedback learner), `naive`
    (independent single-snapshot learner per timestamp), `knn` (spatial mean
    baseline; skipped with a note when the network has no coordinates).
    """
    report = ExperimentReport(
        task="completion",
        config={
            "mask_rate": mask_rate, "knn_k": knn_k, "n": network.n, "m": network.m,
            "T": series.T, "span": series.span, **_hyper_config(hyper),
        },
    )
    masked, mask = mask_holdout(series, mask_rate, hyper.seed)
    if len(mask) == 0:
        report.notes.append("empty hold-out (mask rate too small); metrics omitted")
        return report
    laplacian = build_proximity_laplacian(network)
    ordering = update_ordering(network)
    truth = mask.value
    for method in methods:
        t0 = time.perf_counter()
        if method == "global":
            state = global_learn(masked, laplacian, hyper).state
            t1 = time.perf_counter()
            preds = _predict_mask_entries(state, mask)
        elif method == "inc":
            state = incremental_learn(masked, laplacian, hyper, ordering)
            t1 = time.perf_counter()
            preds = _predict_mask_entries(state, mask)
        elif method == "naive":
            states = []
            for t in range(masked.T):
                single = SnapshotSeries([masked.snapshot(t)], masked.span)
                states.append(global_learn(single, laplacian, hyper).state)
            t1 = time.perf_counter()
            preds = np.empty(len(mask))
            for t in range(masked.T):
                sel = mask.t == t
                if sel.any():
                    preds[sel] = reconstruct_on_edges(states[t], 0, mask.src[sel], mask.dst[sel])
        elif method == "knn":
            if network.coords is None:
                report.notes.append("knn skipped: network has no coordinates")
                continue
            completed = knn_complete(masked, network, knn_k)
            t1 = time.perf_counter()
            preds = np.array(
                [completed.snapshot(int(t))[int(i), int(j)] for t, i, j in zip(mask.t, mask.src, mask.dst)]
            )
        else:
            raise ConfigError(f"unknown completion method {method!r}; choose from global/inc/naive/knn")
        t2 = time.perf_counter()
        report.metrics[method] = _score_holdout(truth, preds)
        report.timings[method] = {"train_ms": 1e3 * (t1 - t0), "predict_ms": 1e3 * (t2 - t1)}
    return report


def run_prediction_experiment(
    series: SnapshotSeries,
    network: RoadNetwork,
    hyper: Hyperparams,
    train_T: int,
    horizon: int,
) -> ExperimentReport:
    """Learn on the first train_T snapshots, forecast the next `horizon`, score each step."""
    if horizon < 1:
        raise ConfigError(f"prediction horizon must be >= 1, got {horizon}")
    if series.T < train_T + horizon:
        raise DataError(
            f"need at least {train_T + horizon} snapshots (T={train_T} + h={horizon}), have {series.T}"
        )
    report = ExperimentReport(
        task="prediction",
        config={
            "train_T": train_T, "horizon": horizon, "n": network.n, "m": network.m,
            "span": series.span, **_hyper_config(hyper),
        },
    )
    train = SnapshotSeries([series.snapshot(t) for t in range(train_T)], series.span)
    laplacian = build_proximity_laplacian(network)
    ordering = update_ordering(network)
    learners = {
        "global": lambda: global_learn(train, laplacian, hyper).state,
        "inc": lambda: incremental_learn(train, laplacian, hyper, ordering),
    }
    for method, learn in learners.items():
        t0 = time.perf_counter()
        state = learn()
        t1 = time.perf_counter()
        metrics: dict[str, float] = {}
        pooled_truth, pooled_pred = [], []
        for h in range(1, horizon + 1):
            rows, cols, vals = series.observed(train_T + h - 1)
            if len(vals) == 0:
                report.notes.append(f"snapshot {train_T + h - 1} has no observed entries; h={h} skipped")
                continue
            preds = predict_on_edges(state, h, rows, cols)
            metrics[f"mape@h{h}"] = mape(vals, preds)
            metrics[f"rmse@h{h}"] = rmse(vals, preds)
            pooled_truth.append(vals)
            pooled_pred.append(preds)
        if pooled_truth:
            all_truth = np.concatenate(pooled_truth)
            all_pred = np.concatenate(pooled_pred)
            metrics["mape"] = mape(all_truth, all_pred)
            metrics["rmse"] = rmse(all_truth, all_pred)
        t2 = time.perf_counter()
        report.metrics[method] = metrics
        report.timings[method] = {"train_ms": 1e3 * (t1 - t0), "predict_ms": 1e3 * (t2 - t1)}
    return report


def run_online_forecast(
    series: SnapshotSeries,
    network: RoadNetwork,
    hyper: Hyperparams,
    window_T: int,
    strategy: str,
) -> ExperimentReport:
    """Batch-window streaming protocol: predict one span ahead, reveal, proceed.

    The model is fit globally on each completed window; between boundaries the
    chosen strategy produces the per-step prediction:

    - ``inc``: adjust the latents with each revealed snapshot, predict through
      one transition step;
    - ``old``: keep the window-boundary latents, predict through i transition
      steps with no feedback;
    - ``naive``: refit a single-snapshot model on the latest revealed snapshot;
    - ``all``: refit the joint model on the entire revealed history.
    """
    if strategy not in ONLINE_STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}; choose from {'/'.join(ONLINE_STRATEGIES)}")
    if window_T < 1:
        raise ConfigError(f"window length must be >= 1, got {window_T}")
    if series.T < 2 * window_T:
        raise DataError(f"need a stream of >= {2 * window_T} snapshots, have {series.T}")
    report = ExperimentReport(
        task=f"online-{strategy}",
        config={
            "window_T": window_T, "strategy": strategy, "n": network.n, "m": network.m,
            "stream_T": series.T, "span": series.span, **_hyper_config(hyper),
        },
    )
    laplacian = build_proximity_laplacian(network)
    ordering = update_ordering(network)

    def window_series(start: int, stop: int) -> SnapshotSeries:
        return SnapshotSeries([series.snapshot(t) for t in range(start, stop)], series.span)

    t0 = time.perf_counter()
    state = global_learn(window_series(0, window_T), laplacian, hyper).state
    window_ms = 1e3 * (time.perf_counter() - t0)
    U_cur = state.U[-1]
    anchor = window_T - 1  # index of the last snapshot the window model saw

    step_mapes, step_rmses, step_ms = [], [], []
    for target in range(window_T, series.T):
        rows, cols, vals = series.observed(target)
        t_step0 = time.perf_counter()
        if strategy == "inc":
            Uh = U_cur @ state.A
            P = Uh @ state.B
            preds = np.einsum("ek,ek->e", P[rows], Uh[cols])
        elif strategy == "old":
            preds = predict_on_edges(state, target - anchor, rows, cols)
        elif strategy == "naive":
            single = SnapshotSeries([series.snapshot(target - 1)], series.span)
            s = global_learn(single, laplacian, hyper).state
            preds = reconstruct_on_edges(s, 0, rows, cols)
        else:  # all
            s = global_learn(window_series(0, target), laplacian, hyper).state
            preds = predict_on_edges(s, 1, rows, cols)
        # reveal the truth, then fold it in where the strategy uses feedback
        if strategy == "inc":
            U_cur, _ = incremental_update(U_cur, state.B, series.snapshot(target), ordering, hyper)
        step_ms.append(1e3 * (time.perf_counter() - t_step0))
        if len(vals):
            step_mapes.append(mape(vals, preds))
            step_rmses.append(rmse(vals, preds))
            report.steps.append(
                {"step": target, "method": strategy, "mape": step_mapes[-1], "rmse": step_rmses[-1]}
            )
        else:
            report.notes.append(f"snapshot {target} empty; step skipped in scoring")
        # recompute the window model at each boundary
        if strategy in ("inc", "old") and (target + 1) % window_T == 0 and target + 1 < series.T:
            t_re = time.perf_counter()
            state = global_learn(window_series(target + 1 - window_T, target + 1), laplacian, hyper).state
            window_ms += 1e3 * (time.perf_counter() - t_re)
            U_cur = state.U[-1]
            anchor = target
    if step_mapes:
        report.metrics[strategy] = {
            "mean_mape": float(np.mean(step_mapes)),
            "mean_rmse": float(np.mean(step_rmses)),
            "steps": float(len(step_mapes)),
        }
    report.timings[strategy] = {
        "window_train_ms": window_ms,
        "mean_step_ms": float(np.mean(step_ms)) if step_ms else 0.0,
        "total_step_ms": float(np.sum(step_ms)),
    }
    return report


def bench_incremental_speedup(
    n: int = 1000,
    k: int = 20,
    window_T: int = 10,
    edge_density: float = 0.005,
    noise_sd: float = 2.0,
    drift: float = 0.1,
    seed: int = 0,
    hyper: Hyperparams | None = None,
) -> ExperimentReport:
    """Wall-clock comparison: one global fit of a window vs per-timestamp updates."""
    from .synthetic import generate_synthetic

    if hyper is None:
        hyper = Hyperparams(k=k, seed=seed)
    network, series, _ = generate_synthetic(
        n=n, k=3, T=window_T, edge_density=edge_density, noise_sd=noise_sd,
        missing_rate=0.0, drift=drift, seed=seed,
    )
    laplacian = build_proximity_laplacian(network)
    ordering = update_ordering(network)
    report = ExperimentReport(
        task="bench",
        config={"n": n, "m": network.m, "window_T": window_T, **_hyper_config(hyper)},
    )
    t0 = time.perf_counter()
    result = global_learn(series, laplacian, hyper)
    global_s = time.perf_counter() - t0
    U_cur = result.state.U[0]
    inc_times = []
    for t in range(1, series.T):
        t1 = time.perf_counter()
        U_cur, _ = incremental_update(U_cur, result.state.B, series.snapshot(t), ordering, hyper)
        inc_times.append(time.perf_counter() - t1)
    mean_inc = float(np.mean(inc_times))
    report.metrics["bench"] = {
        "global_learn_s": global_s,
        "mean_incremental_update_s": mean_inc,
        "max_incremental_update_s": float(np.max(inc_times)),
        "speedup": global_s / mean_inc if mean_inc > 0 else float("inf"),
        "global_iterations": float(result.iterations),
    }
    return report


def _hyper_config(hyper: Hyperparams) -> dict:
    return {
        "k": hyper.k, "lambda": hyper.lam, "gamma": hyper.gamma, "delta": hyper.delta,
        "phi": hyper.phi, "C": hyper.C, "tol": hyper.tol, "max_iters": hyper.max_iters,
        "seed": hyper.seed,
    }
