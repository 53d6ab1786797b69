"""CSV/JSON file formats: networks, readings, snapshot archives, hold-out masks."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .network import RoadNetwork
from .snapshots import HoldoutMask, ReadingRecord, SnapshotSeries

__all__ = [
    "load_network",
    "save_network",
    "load_coords",
    "save_coords",
    "load_readings",
    "save_readings",
    "load_series",
    "save_series",
    "load_mask",
    "save_mask",
]


def _open_csv(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file not found")
    return path.open(newline="")


def _require_header(reader, path, expected: list[str]):
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != expected:
        raise DataError(f"{path}: expected header {','.join(expected)!r}, got {header!r}")


def load_network(edge_path, coords_path=None, n: int | None = None) -> RoadNetwork:
    """Read a network from an edge CSV (`src,dst`), optionally with coordinates.

    The vertex count defaults to 1 + the largest id seen in either file.
    """
    edges = []
    with _open_csv(edge_path) as fh:
        reader = csv.reader(fh)
        _require_header(reader, edge_path, ["src", "dst"])
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                edges.append((int(row[0]), int(row[1])))
            except (ValueError, IndexError):
                raise DataError(f"{edge_path}:{lineno}: malformed edge row {row!r}")
    coords = None
    if coords_path is not None:
        pairs = {}
        with _open_csv(coords_path) as fh:
            reader = csv.reader(fh)
            _require_header(reader, coords_path, ["vertex", "x", "y"])
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    pairs[int(row[0])] = (float(row[1]), float(row[2]))
                except (ValueError, IndexError):
                    raise DataError(f"{coords_path}:{lineno}: malformed coordinate row {row!r}")
        max_id = max(pairs) if pairs else -1
    else:
        pairs = None
        max_id = -1
    if n is None:
        n = 1 + max(
            max((max(s, d) for s, d in edges), default=-1),
            max_id,
        )
        if n <= 0:
            raise DataError(f"{edge_path}: no vertices found")
    if pairs is not None:
        coords = np.zeros((n, 2))
        missing = [v for v in range(n) if v not in pairs]
        if missing:
            raise DataError(f"{coords_path}: missing coordinates for vertices {missing[:5]}")
        for v, xy in pairs.items():
            coords[v] = xy
    return RoadNetwork(n=n, edges=tuple(edges), coords=coords)


def save_network(network: RoadNetwork, edge_path, coords_path=None) -> None:
    with open(edge_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["src", "dst"])
        w.writerows(network.edges)
    if coords_path is not None:
        if network.coords is None:
            raise DataError("network has no coordinates to save")
        with open(coords_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex", "x", "y"])
            for v in range(network.n):
                w.writerow([v, repr(float(network.coords[v, 0])), repr(float(network.coords[v, 1]))])


def load_readings(path) -> list[ReadingRecord]:
    """Read sensor rows from a `timestamp,src,dst,speed` CSV."""
    out = []
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        _require_header(reader, path, ["timestamp", "src", "dst", "speed"])
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(ReadingRecord(float(row[0]), int(row[1]), int(row[2]), float(row[3])))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: malformed reading row {row!r}")
    return out


def save_readings(readings: list[ReadingRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "src", "dst", "speed"])
        for r in readings:
            w.writerow([repr(float(r.timestamp)), r.src, r.dst, repr(float(r.speed))])


def save_series(series: SnapshotSeries, directory) -> None:
    """Write one `src,dst,speed` CSV per snapshot plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"n": series.n, "T": series.T, "span": series.span}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for t in range(series.T):
        rows, cols, vals = series.observed(t)
        with (directory / f"snapshot_{t:04d}.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["src", "dst", "speed"])
            for i, j, v in zip(rows, cols, vals):
                w.writerow([int(i), int(j), repr(float(v))])


def load_series(directory) -> SnapshotSeries:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise DataError(f"{directory}: missing manifest.json")
    try:
        manifest = json.loads(manifest_path.read_text())
        n, T, span = int(manifest["n"]), int(manifest["T"]), float(manifest["span"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{manifest_path}: malformed manifest ({exc})")
    snapshots = []
    for t in range(T):
        path = directory / f"snapshot_{t:04d}.csv"
        rows, cols, vals = [], [], []
        with _open_csv(path) as fh:
            reader = csv.reader(fh)
            _require_header(reader, path, ["src", "dst", "speed"])
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    rows.append(int(row[0]))
                    cols.append(int(row[1]))
                    vals.append(float(row[2]))
                except (ValueError, IndexError):
                    raise DataError(f"{path}:{lineno}: malformed snapshot row {row!r}")
        snapshots.append(
            sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        )
    return SnapshotSeries(snapshots, span)


def save_mask(mask: HoldoutMask, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "src", "dst", "true_speed"])
        for t, i, j, v in zip(mask.t, mask.src, mask.dst, mask.value):
            w.writerow([int(t), int(i), int(j), repr(float(v))])


def load_mask(path) -> HoldoutMask:
    ts, srcs, dsts, vals = [], [], [], []
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        _require_header(reader, path, ["t", "src", "dst", "true_speed"])
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                ts.append(int(row[0]))
                srcs.append(int(row[1]))
                dsts.append(int(row[2]))
                vals.append(float(row[3]))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: malformed mask row {row!r}")
    return HoldoutMask(
        t=np.array(ts, dtype=np.int64),
        src=np.array(srcs, dtype=np.int64),
        dst=np.array(dsts, dtype=np.int64),
        value=np.array(vals, dtype=float),
    )
