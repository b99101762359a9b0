"""Rateless HARQ loop with two-bit feedback, plus the chase-combining ARQ baseline.

A session transmits the full N-bit codeword once.  On NACK the tag rebuilds
the code from fresh exponents and sends only the M new parity bits; the
receiver splices them with the carried information posterior, renormalizes,
and decodes again.  The ARQ baseline keeps one code, resends the identical
codeword, and sums channel LLRs across copies.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .channel import Channel, ChannelConfig, apply_excitation_mask, modulate_bpsk
from .code import CodeConfig, CodeInstance, Frame, encode_frame, instance_for_attempt
from .decoder import DEFAULT_CLAMP, DEFAULT_MAX_ITERS, bp_decode, combine_priors, normalize_llrs


class FeedbackError(ValueError):
    """Received feedback bits outside the {00, 11} alphabet."""


class Feedback(enum.Enum):
    ACK = "ACK"
    NACK = "NACK"


def encode_feedback(symbol: Feedback) -> np.ndarray:
    """ACK -> [1, 1], NACK -> [0, 0]."""
    bit = 1 if symbol is Feedback.ACK else 0
    return np.array([bit, bit], dtype=np.uint8)


def decode_feedback(bits) -> Feedback:
    b = np.asarray(bits, dtype=np.uint8)
    if b.shape != (2,) or b[0] != b[1]:
        raise FeedbackError(f"illegal feedback pattern {b.tolist()}")
    return Feedback.ACK if b[0] == 1 else Feedback.NACK


MaskSource = Callable[[int, int], np.ndarray]


@dataclass
class AttemptRecord:
    attempt: int
    exponents: tuple[int, int]
    bits_sent: int
    syndrome_ok: bool
    iterations: int
    info_hard: np.ndarray = field(repr=False)


@dataclass
class FrameSession:
    frame_id: int
    attempts: list[AttemptRecord]
    final_hard: np.ndarray
    resolved: bool

    @property
    def packets_sent(self) -> int:
        return len(self.attempts)

    @property
    def bits_sent(self) -> int:
        return sum(a.bits_sent for a in self.attempts)


def _attempt_channel(ch: ChannelConfig, frame_id: int, attempt: int) -> Channel:
    ss = np.random.SeedSequence(entropy=ch.seed, spawn_key=(frame_id, attempt))
    return Channel(ch, rng=np.random.Generator(np.random.PCG64(ss)))


def run_rateless_frame(
    frame: Frame,
    cfg: CodeConfig,
    ch: ChannelConfig,
    mask_source: Optional[MaskSource] = None,
    n_max: int = 4,
    frame_id: int = 0,
    code_seed: Optional[int] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    clamp: float = DEFAULT_CLAMP,
    stall_tol: float = 1e-4,
    norm_mode: str = "clip",
) -> FrameSession:
    """Run one frame through the rateless loop, at most n_max packets.

    Spliced priors are normalized in clip mode by default: a failed decode's
    posterior peaks well above the clamp, and rescaling the whole spliced
    vector by clamp/peak would push the fresh parity observations toward zero
    and starve the next decode.  Clipping bounds the carried beliefs while
    leaving new channel evidence intact; pass norm_mode="rescale" for the
    single-factor variant.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if code_seed is None:
        code_seed = ch.seed
    m_bits = cfg.m_bits
    attempts: list[AttemptRecord] = []
    posterior = None
    outcome = None
    for attempt in range(1, n_max + 1):
        inst = instance_for_attempt(cfg, code_seed, frame_id, attempt)
        codeword = encode_frame(inst, frame)
        tx_bits = codeword if attempt == 1 else codeword[:m_bits]
        llrs = _attempt_channel(ch, frame_id, attempt).transmit(modulate_bpsk(tx_bits))
        if mask_source is not None:
            llrs = apply_excitation_mask(llrs, mask_source(attempt, tx_bits.size))
        if attempt == 1:
            prior = llrs
        else:
            fresh = np.concatenate([llrs, posterior[m_bits:]])
            prior = normalize_llrs(combine_priors(fresh, posterior, m_bits), clamp, mode=norm_mode)
        outcome = bp_decode(inst, prior, max_iters=max_iters, stall_tol=stall_tol)
        posterior = outcome.posterior
        attempts.append(
            AttemptRecord(
                attempt=attempt,
                exponents=inst.exponents,
                bits_sent=int(tx_bits.size),
                syndrome_ok=outcome.ack,
                iterations=outcome.iterations_used,
                info_hard=outcome.hard[m_bits:].copy(),
            )
        )
        if outcome.ack:
            break
    return FrameSession(
        frame_id=frame_id,
        attempts=attempts,
        final_hard=outcome.hard[m_bits:].copy(),
        resolved=outcome.ack,
    )


def run_arq_frame(
    frame: Frame,
    cfg: CodeConfig,
    ch: ChannelConfig,
    mask_source: Optional[MaskSource] = None,
    n_max: int = 4,
    frame_id: int = 0,
    code_seed: Optional[int] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    stall_tol: float = 1e-4,
) -> FrameSession:
    """ARQ baseline: one fixed code, identical retransmissions, LLRs summed."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if code_seed is None:
        code_seed = ch.seed
    m_bits = cfg.m_bits
    inst = instance_for_attempt(cfg, code_seed, frame_id, 1)
    codeword = encode_frame(inst, frame)
    symbols = modulate_bpsk(codeword)
    attempts: list[AttemptRecord] = []
    llr_sum = np.zeros(codeword.size, dtype=np.float64)
    outcome = None
    for attempt in range(1, n_max + 1):
        llrs = _attempt_channel(ch, frame_id, attempt).transmit(symbols)
        if mask_source is not None:
            llrs = apply_excitation_mask(llrs, mask_source(attempt, codeword.size))
        llr_sum += llrs
        outcome = bp_decode(inst, llr_sum, max_iters=max_iters, stall_tol=stall_tol)
        attempts.append(
            AttemptRecord(
                attempt=attempt,
                exponents=inst.exponents,
                bits_sent=int(codeword.size),
                syndrome_ok=outcome.ack,
                iterations=outcome.iterations_used,
                info_hard=outcome.hard[m_bits:].copy(),
            )
        )
        if outcome.ack:
            break
    return FrameSession(
        frame_id=frame_id,
        attempts=attempts,
        final_hard=outcome.hard[m_bits:].copy(),
        resolved=outcome.ack,
    )


def session_records(session: FrameSession) -> list[dict]:
    """One JSON-ready record per attempt."""
    return [
        {
            "frame_id": session.frame_id,
            "attempt": a.attempt,
            "x": a.exponents[0],
            "y": a.exponents[1],
            "bits_sent": a.bits_sent,
            "syndrome_ok": bool(a.syndrome_ok),
        }
        for a in session.attempts
    ]


def write_sessions_jsonl(sessions, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for session in sessions:
            for rec in session_records(session):
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
