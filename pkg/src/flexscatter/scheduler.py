"""Threshold scheduling and the energy/throughput/utility accounting, plus the
macro experiment that walks a traffic timeline under a scheduling policy.

The tag transmits only when the predicted interval rate of the upcoming
horizon falls below the threshold; held frames are retried at the next
decision epoch.  Energy charges 10 uJ per transmitted bit, so a rateless
session with n packets and M = N/2 costs exactly 10 (N/2)(n+1) uJ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig
from .code import CodeConfig, Frame
from .forecast import Forecast, ForecastRequest, predict_interval_rate
from .protocol import FrameSession, run_rateless_frame
from .traffic import OnOffProcess

POLICIES = ("no-scheduling", "predicted", "oracle")

TRANSMIT = "TRANSMIT"
HOLD = "HOLD"

DEFAULT_ENERGY_PER_BIT_UJ = 10.0


@dataclass(frozen=True)
class SchedulerConfig:
    w_i: float = 0.25
    history_len: int = 64
    horizon: int = 5
    n_max: int = 4
    code_rate_target: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.w_i < 1.0:
            raise ValueError("threshold w_i must lie strictly inside (0, 1)")
        if min(self.history_len, self.horizon, self.n_max) < 1:
            raise ValueError("history_len, horizon, and n_max must be >= 1")


@dataclass(frozen=True)
class LinkMetrics:
    ber: float
    energy_uj: float
    throughput_mbps: float
    utility: float
    elapsed_s: float
    frames_sent: int
    frames_deferred: int
    packets_total: int


def decide_transmit(forecast: Forecast, cfg: SchedulerConfig) -> str:
    """TRANSMIT iff the predicted rate is strictly under the threshold."""
    return TRANSMIT if forecast.predicted_rate < cfg.w_i else HOLD


def energy_consumed(n_bits: int, n_packets: int, per_bit_uj: float = DEFAULT_ENERGY_PER_BIT_UJ) -> float:
    """Session energy for a rateless exchange: per_bit * (N/2) * (n + 1)."""
    if n_packets < 1:
        raise ValueError("packet count must be >= 1")
    if n_bits % 2:
        raise ValueError("codeword length must be even")
    return per_bit_uj * (n_bits / 2) * (n_packets + 1)


def throughput(rate: float, p_e: float) -> float:
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("bit error rate must lie in [0, 1]")
    return rate * (1.0 - p_e)


def utility(t: float, e: float, alpha: float = 1.0, beta: float = 1.0) -> float:
    if e <= 0 or beta <= 0:
        raise ValueError("utility is undefined for non-positive energy")
    return alpha * t / (beta * e)


class _SlotMaskSource:
    """Per-frame mask provider reading slot states from a symbol cursor."""

    def __init__(self, states: np.ndarray, symbols_per_slot: int, start_symbol: int):
        self.states = states
        self.sps = symbols_per_slot
        self.cursor = start_symbol
        self.total = states.size * symbols_per_slot

    def __call__(self, attempt: int, n_symbols: int) -> np.ndarray:
        idx = (self.cursor + np.arange(n_symbols)) % self.total
        self.cursor += n_symbols
        return self.states[(idx // self.sps).astype(np.int64)]


def run_macro_experiment(
    policy: str,
    traffic: OnOffProcess,
    predictor: str,
    code: CodeConfig,
    ch: ChannelConfig,
    sched: SchedulerConfig,
    workload: int,
    slots_per_window: int = 8,
    frames_per_window: int = 2,
    rate_mbps: float = 1.0,
    energy_per_bit_uj: float = DEFAULT_ENERGY_PER_BIT_UJ,
    defer_cap: int = 64,
    external_table: dict | None = None,
    max_iters: int = 50,
    clamp: float = 5.0,
    stall_tol: float = 1e-4,
    norm_mode: str = "clip",
    seed: int | None = None,
    return_sessions: bool = False,
):
    """Walk the traffic window by window, scheduling workload frames.

    Decisions happen once per horizon block of windows; a transmitted block
    sends up to frames_per_window * horizon queued frames, spaced evenly over
    the block and masked by the actual slot states they land on.  Held frames
    carry over to the next block.  The timeline wraps cyclically if the
    workload outlasts it, and a block is force-transmitted after defer_cap
    consecutive holds so the queue cannot starve.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if workload < 1:
        raise ValueError("workload must be >= 1")
    if seed is None:
        seed = ch.seed
    states = traffic.states
    n_windows = states.size // slots_per_window
    hist_len, horizon = sched.history_len, sched.horizon
    if n_windows < hist_len + horizon:
        raise ValueError("traffic too short for the configured history and horizon")
    rates = np.mean(
        states[: n_windows * slots_per_window].reshape(n_windows, slots_per_window) == 0, axis=1
    )
    symbols_per_slot = max(1, int(round(traffic.slot_duration * rate_mbps * 1e6)))
    block_windows = horizon
    block_symbols = block_windows * slots_per_window * symbols_per_slot
    batch_limit = frames_per_window * block_windows
    block_duration_s = block_windows * slots_per_window * traffic.slot_duration

    frame_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(0xF4A3,))))
    queue = [Frame(frame_rng.integers(0, 2, code.k_bits).astype(np.uint8)) for _ in range(workload)]

    sessions: list[FrameSession] = []
    truth: list[np.ndarray] = []
    total_bits = 0
    total_err = 0
    info_bits = 0
    packets_total = 0
    frames_deferred = 0
    elapsed_s = 0.0
    defer_streak = 0
    frame_counter = 0
    block = 0

    def cyclic_rates(start: int, count: int) -> np.ndarray:
        idx = (start + np.arange(count)) % n_windows
        return rates[idx]

    while queue:
        w0 = (hist_len + block * block_windows) % n_windows
        future = cyclic_rates(w0, horizon)
        if policy == "no-scheduling":
            decision = TRANSMIT
        else:
            if policy == "oracle":
                forecast = predict_interval_rate(
                    "oracle", ForecastRequest(cyclic_rates(w0 - hist_len, hist_len), horizon), {"future": future}
                )
            else:
                context = None
                if predictor == "external":
                    context = {"table": external_table or {}, "index": block}
                forecast = predict_interval_rate(
                    predictor, ForecastRequest(cyclic_rates(w0 - hist_len, hist_len), horizon), context
                )
            decision = decide_transmit(forecast, sched)
            if decision == HOLD and defer_streak >= defer_cap:
                decision = TRANSMIT
        if decision == TRANSMIT:
            batch = min(len(queue), batch_limit)
            start_symbol = w0 * slots_per_window * symbols_per_slot
            stride = block_symbols // max(1, batch)
            for i in range(batch):
                frame = queue.pop(0)
                mask_source = _SlotMaskSource(states, symbols_per_slot, start_symbol + i * stride)
                session = run_rateless_frame(
                    frame,
                    code,
                    ch,
                    mask_source=mask_source,
                    n_max=sched.n_max,
                    frame_id=frame_counter,
                    code_seed=seed,
                    max_iters=max_iters,
                    clamp=clamp,
                    stall_tol=stall_tol,
                    norm_mode=norm_mode,
                )
                sessions.append(session)
                truth.append(frame.info_bits)
                total_err += int((session.final_hard != frame.info_bits).sum())
                info_bits += frame.info_bits.size
                total_bits += session.bits_sent
                packets_total += session.packets_sent
                elapsed_s += session.bits_sent / (rate_mbps * 1e6)
                frame_counter += 1
            defer_streak = 0
        else:
            frames_deferred += min(len(queue), batch_limit)
            elapsed_s += block_duration_s
            defer_streak += 1
        block += 1

    ber = total_err / info_bits
    energy = energy_per_bit_uj * total_bits
    tput = throughput(rate_mbps, ber)
    metrics = LinkMetrics(
        ber=ber,
        energy_uj=energy,
        throughput_mbps=tput,
        utility=utility(tput, energy),
        elapsed_s=elapsed_s,
        frames_sent=workload,
        frames_deferred=frames_deferred,
        packets_total=packets_total,
    )
    if return_sessions:
        return metrics, sessions
    return metrics
