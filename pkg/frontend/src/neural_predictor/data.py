"""Trace ingestion and sliding-window supervision.

Reads the traffic trace CSV contract (header
timestamp_s,frame_len_bytes,duration_us,interval_s,rate_mbps,rssi_dbm),
slots the busy intervals onto a fixed grid, aggregates slots into windows,
and builds (history -> mean of the next horizon windows) training pairs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

TRACE_HEADER = ["timestamp_s", "frame_len_bytes", "duration_us", "interval_s", "rate_mbps", "rssi_dbm"]

DEFAULT_SLOT_S = 0.005
DEFAULT_SLOTS_PER_WINDOW = 8


class TraceError(ValueError):
    """Trace file violates the CSV contract."""


def read_busy_intervals(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a trace CSV into (starts, ends) of busy airtime, seconds."""
    starts: list[float] = []
    ends: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = next(csv.reader([line]))
            if header is None:
                header = fields
                if header != TRACE_HEADER:
                    raise TraceError(f"bad header {header!r}")
                continue
            try:
                ts = float(fields[0])
                dur_us = float(fields[2])
            except (ValueError, IndexError):
                continue  # malformed rows are dropped, as in the simulator
            if dur_us < 0:
                continue
            starts.append(ts)
            ends.append(ts + dur_us * 1e-6)
    if header is None:
        raise TraceError("empty input: missing header line")
    if not starts:
        raise TraceError("trace has no usable rows")
    return np.asarray(starts), np.asarray(ends)


def interval_rates(path, slot_s: float = DEFAULT_SLOT_S, slots_per_window: int = DEFAULT_SLOTS_PER_WINDOW) -> np.ndarray:
    """Per-window idle fraction of the excitation source described by a trace."""
    starts, ends = read_busy_intervals(path)
    order = np.argsort(starts, kind="stable")
    merged_s: list[float] = []
    merged_e: list[float] = []
    for i in order:
        s, e = float(starts[i]), float(ends[i])
        if merged_e and s <= merged_e[-1]:
            merged_e[-1] = max(merged_e[-1], e)
        else:
            merged_s.append(s)
            merged_e.append(e)
    ms, me = np.asarray(merged_s), np.asarray(merged_e)
    total_slots = max(1, int(math.ceil(float(me.max()) / slot_s)))
    edges = np.arange(total_slots + 1) * slot_s
    lengths = me - ms
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    idx = np.searchsorted(ms, edges, side="right")
    seg = np.maximum(idx - 1, 0)
    partial = np.clip(edges - ms[seg], 0.0, lengths[seg])
    busy_cum = np.where(idx > 0, cum[seg] + partial, 0.0)
    busy = np.diff(busy_cum) >= 0.5 * slot_s
    n_windows = busy.size // slots_per_window
    if n_windows < 1:
        raise TraceError("trace too short for a single window")
    grouped = busy[: n_windows * slots_per_window].reshape(n_windows, slots_per_window)
    return np.mean(~grouped, axis=1).astype(np.float64)


@dataclass(frozen=True)
class WindowedDataset:
    history: np.ndarray  # (samples, L)
    target: np.ndarray  # (samples,) mean rate of the next horizon windows
    rates: np.ndarray  # raw per-window series the samples came from


def build_dataset(rates: np.ndarray, history_len: int, horizon: int) -> WindowedDataset:
    n = rates.size
    count = n - history_len - horizon + 1
    if count < 1:
        raise TraceError(f"need more than {history_len + horizon} windows, trace has {n}")
    hist = np.empty((count, history_len))
    target = np.empty(count)
    for i in range(count):
        t = history_len + i
        hist[i] = rates[t - history_len : t]
        target[i] = float(np.mean(rates[t : t + horizon]))
    return WindowedDataset(history=hist, target=target, rates=rates)
