"""Wi-Fi excitation traffic: captured-trace ingestion, truncated-Pareto on/off
generation, and windowed interval rates.

An OnOffProcess is a slotted view of the excitation source (1 = transmitting,
0 = idle).  The interval rate of a window is its idle fraction; a backscatter
tag can only reach the receiver during busy slots.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SLOT_S = 0.005

TRACE_HEADER = ["timestamp_s", "frame_len_bytes", "duration_us", "interval_s", "rate_mbps", "rssi_dbm"]

# Pareto shape per scenario and Wi-Fi channel.  Laboratory and shopping mall
# share identical values; both presets are kept.
PARETO_SHAPES = {
    "laboratory": {1: 0.57, 6: 0.54, 11: 0.43},
    "shopping_mall": {1: 0.57, 6: 0.54, 11: 0.43},
    "residential": {1: 0.16, 6: 0.09, 11: 0.04},
}


class TraceFormatError(ValueError):
    """Trace or prediction file violates its format contract."""


@dataclass(frozen=True)
class TraceRecord:
    timestamp_s: float
    frame_len_bytes: int
    duration_us: float
    interval_s: float
    rate_mbps: float
    rssi_dbm: float


@dataclass
class ParseResult:
    records: list
    dropped: list  # (line_number, reason)


@dataclass(frozen=True)
class OnOffProcess:
    slot_duration: float
    states: np.ndarray

    def __post_init__(self):
        states = np.ascontiguousarray(self.states, dtype=np.uint8)
        if self.slot_duration <= 0:
            raise ValueError("slot_duration must be positive")
        if states.size == 0:
            raise ValueError("process must be non-empty")
        object.__setattr__(self, "states", states)

    @property
    def n_slots(self) -> int:
        return int(self.states.size)


@dataclass(frozen=True)
class ParetoParams:
    alpha: float
    x_m: float = 1.0
    cap: float = 1000.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.x_m <= 0:
            raise ValueError("x_m must be positive")
        if not math.isfinite(self.cap) or self.cap < self.x_m:
            raise ValueError("cap must be finite and >= x_m")


def scenario_params(scenario: str, channel: int = 1, x_m: float = 1.0, cap: float = 1000.0) -> ParetoParams:
    try:
        alpha = PARETO_SHAPES[scenario][channel]
    except KeyError:
        raise KeyError(f"no preset for scenario={scenario!r} channel={channel}") from None
    return ParetoParams(alpha=alpha, x_m=x_m, cap=cap)


def parse_trace(source) -> ParseResult:
    """Read a trace CSV; malformed rows are dropped and reported by line number.

    source may be a path or an open text stream.  The header line must match
    the trace contract exactly; '#'-prefixed lines are comments.
    """
    if hasattr(source, "read"):
        return _parse_stream(source)
    with open(source, "r", encoding="utf-8", newline="") as fh:
        return _parse_stream(fh)


def _parse_stream(fh) -> ParseResult:
    records: list[TraceRecord] = []
    dropped: list[tuple[int, str]] = []
    header = None
    last_ts = -math.inf
    for lineno, raw in enumerate(fh, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = next(csv.reader([line]))
            if header != TRACE_HEADER:
                raise TraceFormatError(f"bad header {header!r}, expected {TRACE_HEADER!r}")
            continue
        fields = next(csv.reader([line]))
        if len(fields) != len(TRACE_HEADER):
            dropped.append((lineno, f"expected {len(TRACE_HEADER)} fields, got {len(fields)}"))
            continue
        try:
            rec = TraceRecord(
                timestamp_s=float(fields[0]),
                frame_len_bytes=int(float(fields[1])),
                duration_us=float(fields[2]),
                interval_s=float(fields[3]),
                rate_mbps=float(fields[4]),
                rssi_dbm=float(fields[5]),
            )
        except ValueError:
            dropped.append((lineno, "unparseable field"))
            continue
        if rec.duration_us < 0 or rec.interval_s < 0:
            dropped.append((lineno, "negative duration or interval"))
            continue
        if rec.timestamp_s < last_ts:
            dropped.append((lineno, "timestamp decreased"))
            continue
        last_ts = rec.timestamp_s
        records.append(rec)
    if header is None:
        raise TraceFormatError("empty input: missing header line")
    return ParseResult(records=records, dropped=dropped)


def write_trace(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in records:
            writer.writerow(
                [
                    repr(float(r.timestamp_s)),
                    int(r.frame_len_bytes),
                    repr(float(r.duration_us)),
                    repr(float(r.interval_s)),
                    repr(float(r.rate_mbps)),
                    repr(float(r.rssi_dbm)),
                ]
            )


def normalize_minmax(values) -> np.ndarray:
    """Affine map onto [0, 1]; a constant sequence maps to all zeros."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("values must be non-empty")
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def window_interval_rate(proc: OnOffProcess, start: int, length: int) -> float:
    """Fraction of idle slots in proc.states[start : start + length]."""
    if length < 1:
        raise ValueError("window length must be >= 1")
    if start < 0 or start + length > proc.n_slots:
        raise IndexError(f"window [{start}, {start + length}) outside [0, {proc.n_slots})")
    window = proc.states[start : start + length]
    return float(np.mean(window == 0))


def sample_pareto(params: ParetoParams, seed=None, size=None, rng: np.random.Generator | None = None):
    """Inverse-CDF truncated Pareto draw(s): min(x_m U^(-1/alpha), cap)."""
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(seed))
    u = 1.0 - rng.random(size)  # (0, 1]
    x = params.x_m * u ** (-1.0 / params.alpha)
    return np.minimum(x, params.cap) if size is not None else float(min(x, params.cap))


def truncated_pareto_mean(params: ParetoParams) -> float:
    """E[min(X, cap)] for X ~ Pareto(alpha, x_m)."""
    a, xm, c = params.alpha, params.x_m, params.cap
    tail = (xm / c) ** a
    if a == 1.0:
        body = xm * math.log(c / xm)
    else:
        body = a * xm**a * (c ** (1.0 - a) - xm ** (1.0 - a)) / (1.0 - a)
    return body + c * tail


def generate_onoff(
    params: ParetoParams,
    busy_slots: float = 20.0,
    total_slots: int = 10_000,
    seed=None,
    slot_duration: float = DEFAULT_SLOT_S,
) -> OnOffProcess:
    """Alternating busy/idle renewal process quantized onto slots.

    Busy runs have the fixed duration busy_slots; idle runs are truncated
    Pareto draws.  Durations are accumulated in continuous time and each slot
    takes the state that occupies the majority of it, so long-run busy/idle
    fractions are preserved.
    """
    if total_slots < 1:
        raise ValueError("total_slots must be >= 1")
    if busy_slots <= 0:
        raise ValueError("busy_slots must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    bounds = [0.0]
    t = 0.0
    busy_phase = True  # start with an excitation burst
    while t < total_slots:
        dur = busy_slots if busy_phase else sample_pareto(params, rng=rng)
        t += dur
        bounds.append(t)
        busy_phase = not busy_phase
    bounds = np.asarray(bounds)
    # busy runs are segments [bounds[0], bounds[1]), [bounds[2], bounds[3]), ...
    busy_starts = bounds[0:-1:2]
    busy_ends = bounds[1::2]
    edges = np.arange(total_slots + 1, dtype=np.float64)
    busy_cum_at = _busy_time_before(edges, busy_starts, busy_ends)
    busy_in_slot = np.diff(busy_cum_at)
    states = (busy_in_slot >= 0.5).astype(np.uint8)
    return OnOffProcess(slot_duration=slot_duration, states=states)


def _busy_time_before(t: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Total busy time in [0, t) for each t, given disjoint sorted busy segments."""
    lengths = ends - starts
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    idx = np.searchsorted(starts, t, side="right")
    seg = np.maximum(idx - 1, 0)
    partial = np.clip(t - starts[seg], 0.0, lengths[seg])
    return np.where(idx > 0, cum[seg] + partial, 0.0)


def records_to_process(records, slot_duration: float = DEFAULT_SLOT_S) -> OnOffProcess:
    """Slot a parsed trace: a slot is busy when frames cover most of it."""
    if not records:
        raise ValueError("trace has no records")
    starts = np.asarray([r.timestamp_s for r in records])
    ends = starts + np.asarray([r.duration_us * 1e-6 for r in records])
    horizon = float(ends.max())
    total_slots = max(1, int(math.ceil(horizon / slot_duration)))
    edges = np.arange(total_slots + 1, dtype=np.float64) * slot_duration
    busy_cum = _busy_overlap(edges, starts, ends)
    busy_in_slot = np.diff(busy_cum)
    states = (busy_in_slot >= 0.5 * slot_duration).astype(np.uint8)
    return OnOffProcess(slot_duration=slot_duration, states=states)


def _busy_overlap(t: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Like _busy_time_before but tolerates overlapping records by merging."""
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
    return _busy_time_before(t, np.asarray(merged_s), np.asarray(merged_e))


def process_to_records(proc: OnOffProcess, rate_mbps: float = 1.0, rssi_dbm: float = -40.0) -> list:
    """Render an on/off process as one trace record per busy run."""
    states = proc.states
    changes = np.flatnonzero(np.diff(states.astype(np.int8)))
    run_starts = np.concatenate([[0], changes + 1])
    run_ends = np.concatenate([changes + 1, [states.size]])
    records = []
    prev_end_s = 0.0
    for s, e in zip(run_starts, run_ends):
        if states[s] != 1:
            continue
        t0 = float(s * proc.slot_duration)
        dur_s = float((e - s) * proc.slot_duration)
        records.append(
            TraceRecord(
                timestamp_s=t0,
                frame_len_bytes=int(dur_s * rate_mbps * 1e6 / 8),
                duration_us=dur_s * 1e6,
                interval_s=max(0.0, t0 - prev_end_s),
                rate_mbps=rate_mbps,
                rssi_dbm=rssi_dbm,
            )
        )
        prev_end_s = t0 + dur_s
    return records
