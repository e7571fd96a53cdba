"""CSV artifacts and tick ingestion.

Floats are written in their shortest round-trip representation so every
emitted file re-ingests bit for bit.  Files are written to a temporary
sibling and renamed into place, so a failure never leaves a partial file.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .market import StepPath

PATH_FIELDS = ("time", "y1", "y2")
EVENT_FIELDS = ("asset", "k", "t_k", "e_k", "eta_k")
DURATION_FIELDS = ("asset", "k", "tau")
CLOCK_FIELDS = ("asset", "k", "t_k")
REPLICATION_FIELDS = ("experiment", "n", "rep", "seed", "estimate", "scaled_error")
SUMMARY_FIELDS = ("experiment", "n", "rmse", "ks_stat", "ks_p", "slope", "slope_se")
ESTIMATE_FIELDS = ("estimator", "theta_hat", "n", "m", "delta", "dt")
LEVELS_FIELDS = ("n", "entry", "empirical", "theoretical", "relative_error")
TICK_FIELDS = ("asset", "time", "logprice")


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def atomic_write_text(path, text: str):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(fields, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        if isinstance(row, dict):
            row = [row[f] for f in fields]
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, fields, rows):
    atomic_write_text(path, render_csv(fields, rows))


def read_csv(stream_or_path, fields=None) -> list[dict]:
    """Rows as dicts of strings; checks the header when ``fields`` is given."""
    if isinstance(stream_or_path, (str, os.PathLike)):
        with open(stream_or_path, newline="") as fh:
            return read_csv(fh, fields)
    reader = csv.DictReader(stream_or_path)
    if fields is not None and tuple(reader.fieldnames or ()) != tuple(fields):
        raise InputError(f"expected header {','.join(fields)}, got {','.join(reader.fieldnames or [])}")
    return list(reader)


@dataclass
class TickSeries:
    """Per-asset tick paths.  Each path holds the first price as its initial
    value and jumps at every later tick; ``start`` is the first time stamp."""

    paths: dict
    start: dict

    def normalised(self) -> dict:
        """Paths shifted to start at time 0 (earliest tick overall) and level 0."""
        origin = min(self.start.values())
        out = {}
        for asset, p in self.paths.items():
            out[asset] = StepPath(
                p.times - origin,
                p.values - p.initial,
                0.0,
                p.horizon - origin,
            )
        return out


def _parse_float(text, row_no, name):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise InputError(f"row {row_no}: {name} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise InputError(f"row {row_no}: {name} must be finite")
    return value


def ingest_ticks(stream) -> TickSeries:
    """Read ``asset,time,logprice`` rows into per-asset step paths.

    Time stamps must be nondecreasing within an asset; ties are kept.
    """
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("tick file is empty") from None
    if tuple(h.strip() for h in header) != TICK_FIELDS:
        raise InputError(f"tick header must be {','.join(TICK_FIELDS)}")
    data: dict = {}
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise InputError(f"row {row_no}: expected 3 fields, got {len(row)}")
        asset = row[0].strip()
        if not asset:
            raise InputError(f"row {row_no}: empty asset id")
        t = _parse_float(row[1], row_no, "time")
        p = _parse_float(row[2], row_no, "logprice")
        times, prices = data.setdefault(asset, ([], []))
        if times and t < times[-1]:
            raise InputError(f"row {row_no}: time {t} precedes the previous tick of asset {asset!r}")
        times.append(t)
        prices.append(p)
    if not data:
        raise InputError("tick file holds no rows")
    paths, start = {}, {}
    for asset, (times, prices) in data.items():
        t = np.asarray(times)
        p = np.asarray(prices)
        paths[asset] = StepPath(t[1:], p[1:], float(p[0]), float(t[-1]))
        start[asset] = float(t[0])
    return TickSeries(paths, start)
