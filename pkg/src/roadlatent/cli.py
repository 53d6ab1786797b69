"""Deterministic command-line front end.

Exit codes: 0 success, 1 configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import io as rio
from .errors import ConfigError, DataError
from .experiments import (
    ONLINE_STRATEGIES,
    bench_incremental_speedup,
    run_completion_experiment,
    run_online_forecast,
    run_prediction_experiment,
)
from .global_learning import global_learn
from .incremental import incremental_learn
from .model import Hyperparams, save_state
from .network import build_proximity_laplacian, update_ordering
from .snapshots import build_snapshot_series
from .synthetic import generate_synthetic

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; bad flags are configuration errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_hyper_flags(p: argparse.ArgumentParser) -> None:
    d = Hyperparams()
    p.add_argument("--k", type=int, default=d.k, help="latent dimension")
    p.add_argument("--lambda", dest="lam", type=float, default=d.lam, help="Laplacian weight")
    p.add_argument("--gamma", type=float, default=d.gamma, help="transition weight")
    p.add_argument("--delta", type=float, default=d.delta, help="prediction tolerance band (speed units)")
    p.add_argument("--phi", type=float, default=d.phi, help="latent-row settle threshold")
    p.add_argument("--C", type=float, default=d.C, help="aggressiveness cap of feedback updates")
    p.add_argument("--tol", type=float, default=d.tol, help="relative objective-change stop threshold")
    p.add_argument("--max-iters", type=int, default=d.max_iters, help="iteration/sweep cap")
    p.add_argument("--seed", type=int, default=d.seed, help="RNG seed")


def _hyper_from(args) -> Hyperparams:
    try:
        return Hyperparams(
            k=args.k, lam=args.lam, gamma=args.gamma, delta=args.delta, phi=args.phi,
            C=args.C, tol=args.tol, max_iters=args.max_iters, seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _load_inputs(args, need_coords=False):
    series = rio.load_series(args.series)
    coords_path = getattr(args, "coords", None)
    if need_coords and coords_path is None:
        guess = Path(args.network).parent / "coords.csv"
        if guess.exists():
            coords_path = guess
    network = rio.load_network(args.network, coords_path, n=series.n)
    series.validate_on(network)
    return series, network


def _emit_report(report, out_prefix):
    if out_prefix:
        out = Path(out_prefix)
        out.parent.mkdir(parents=True, exist_ok=True)
        report.write_csv(str(out) + ".csv")
    print(report.summary_text())


def _cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        network, series, planted = generate_synthetic(
            n=args.n, k=args.k, T=args.T, edge_density=args.edge_density,
            noise_sd=args.noise_sd, missing_rate=args.missing_rate, drift=args.drift,
            seed=args.seed, speed_scale=args.speed_scale, span=args.span,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    rio.save_network(network, out / "network.csv", out / "coords.csv")
    rio.save_series(series, out / "series")
    save_state(out / "planted_state.txt", planted)
    print(f"wrote network ({network.n} vertices, {network.m} edges), "
          f"{series.T} snapshots, planted state under {out}")
    return 0


def _cmd_ingest(args) -> int:
    network = rio.load_network(args.network, getattr(args, "coords", None))
    readings = rio.load_readings(args.readings)
    series = build_snapshot_series(readings, network, span=args.span, T=args.T)
    rio.save_series(series, args.out)
    observed = sum(series.observed_count(t) for t in range(series.T))
    print(f"wrote {series.T} snapshots ({observed} observed entries) to {args.out}")
    return 0


def _learn_common(args, incremental: bool) -> int:
    hyper = _hyper_from(args)
    series, network = _load_inputs(args)
    laplacian = build_proximity_laplacian(network)
    if incremental:
        ordering = update_ordering(network)
        state = incremental_learn(series, laplacian, hyper, ordering)
        trace = None
    else:
        result = global_learn(series, laplacian, hyper)
        state, trace = result.state, result.objective_trace
        print(f"converged={result.converged} iterations={result.iterations} "
              f"objective={trace[-1]:.6g}")
    save_state(args.out, state, hyper)
    if trace is not None and args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "objective"])
            for i, v in enumerate(trace):
                w.writerow([i, repr(v)])
    print(f"wrote model state to {args.out}")
    return 0


def _cmd_complete(args) -> int:
    hyper = _hyper_from(args)
    if not 0 <= args.mask_rate < 1:
        raise ConfigError(f"--mask-rate must be in [0, 1), got {args.mask_rate}")
    series, network = _load_inputs(args, need_coords=True)
    report = run_completion_experiment(
        series, network, hyper, mask_rate=args.mask_rate, knn_k=args.knn_k
    )
    _emit_report(report, args.out)
    return 0


def _cmd_predict(args) -> int:
    hyper = _hyper_from(args)
    if args.h < 1:
        raise ConfigError(f"--h must be >= 1, got {args.h}")
    if args.T < 1:
        raise ConfigError(f"--T must be >= 1, got {args.T}")
    series, network = _load_inputs(args)
    report = run_prediction_experiment(series, network, hyper, train_T=args.T, horizon=args.h)
    _emit_report(report, args.out)
    return 0


def _cmd_online(args) -> int:
    hyper = _hyper_from(args)
    if args.T < 1:
        raise ConfigError(f"--T must be >= 1, got {args.T}")
    series, network = _load_inputs(args)
    report = run_online_forecast(series, network, hyper, window_T=args.T, strategy=args.strategy)
    _emit_report(report, args.out)
    return 0


def _cmd_bench(args) -> int:
    hyper = _hyper_from(args)
    report = bench_incremental_speedup(
        n=args.n, k=args.k, window_T=args.T, edge_density=args.edge_density, seed=args.seed,
        hyper=hyper,
    )
    _emit_report(report, args.out)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="roadlatent", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic network + snapshot series")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--edge-density", type=float, default=0.1)
    p.add_argument("--noise-sd", type=float, default=2.0)
    p.add_argument("--missing-rate", type=float, default=0.2)
    p.add_argument("--drift", type=float, default=0.1)
    p.add_argument("--speed-scale", type=float, default=60.0)
    p.add_argument("--span", type=float, default=5.0)
    p.add_argument("--k", type=int, default=3, help="planted latent dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="aggregate a readings CSV into a snapshot series")
    p.add_argument("--network", required=True)
    p.add_argument("--coords")
    p.add_argument("--readings", required=True)
    p.add_argument("--span", type=float, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("learn", help="joint multiplicative learning over a series")
    p.add_argument("--series", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--coords")
    p.add_argument("--trace", help="write iteration,objective CSV here")
    _add_hyper_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=lambda a: _learn_common(a, incremental=False))

    p = sub.add_parser("learn-inc", help="incremental feedback learning over a series")
    p.add_argument("--series", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--coords")
    _add_hyper_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=lambda a: _learn_common(a, incremental=True))

    p = sub.add_parser("complete", help="hold-out completion experiment")
    p.add_argument("--series", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--coords")
    p.add_argument("--mask-rate", type=float, default=0.2)
    p.add_argument("--knn-k", type=int, default=5)
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_complete)

    p = sub.add_parser("predict", help="h-step-ahead forecast experiment")
    p.add_argument("--series", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--coords")
    p.add_argument("--T", type=int, required=True, help="training snapshots")
    p.add_argument("--h", type=int, required=True, help="prediction horizon")
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("online", help="batch-window streaming forecast")
    p.add_argument("--series", required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--coords")
    p.add_argument("--T", type=int, required=True, help="window length")
    p.add_argument("--strategy", choices=ONLINE_STRATEGIES, required=True)
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_online)

    p = sub.add_parser("bench", help="global vs incremental wall-clock benchmark")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--T", type=int, default=10, help="window length")
    p.add_argument("--edge-density", type=float, default=0.005)
    _add_hyper_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
