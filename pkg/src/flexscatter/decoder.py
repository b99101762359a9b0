"""Belief-propagation decoding with posterior carry-over support.

LLR convention throughout: positive means bit 0 is more likely.  Vectors are
plain float64 arrays, one entry per codeword bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import run_bp
from .code import CodeInstance

DEFAULT_MAX_ITERS = 50
DEFAULT_CLAMP = 5.0


@dataclass
class DecodeOutcome:
    ack: bool
    posterior: np.ndarray
    iterations_used: int
    hard: np.ndarray


def bp_decode(
    inst: CodeInstance,
    prior: np.ndarray,
    max_iters: int = DEFAULT_MAX_ITERS,
    stall_tol: float = 1e-4,
    min_sum: bool = False,
) -> DecodeOutcome:
    """Flooding sum-product decode on the instance's Tanner graph.

    Stops as soon as the hard decision satisfies every parity check.  ACK
    requires a zero syndrome and that every posterior entry carries actual
    information (no exact zeros); a fully erased input therefore reports NACK
    even though the all-zero word trivially satisfies the checks.
    """
    prior = np.asarray(prior, dtype=np.float64)
    if prior.size != inst.n_bits:
        raise ValueError(f"prior length {prior.size} != codeword length {inst.n_bits}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not np.isfinite(prior).all():
        raise ValueError("prior must be finite")
    chk_ptr, chk_var, var_ptr, var_edge = inst.tanner()
    posterior, hard, syndrome_ok, iters = run_bp(
        chk_ptr, chk_var, var_ptr, var_edge, prior, max_iters,
        stall_tol=stall_tol, min_sum=min_sum,
    )
    ack = bool(syndrome_ok) and bool((posterior != 0.0).all())
    return DecodeOutcome(ack=ack, posterior=posterior, iterations_used=iters, hard=hard)


def normalize_llrs(values: np.ndarray, clamp: float = DEFAULT_CLAMP, mode: str = "rescale") -> np.ndarray:
    """Limit LLRs to [-clamp, clamp].

    The default applies one linear factor clamp / max|v| to the whole vector
    when it exceeds the range, preserving relative magnitudes; mode="clip"
    truncates per element instead (sensitivity-study switch).
    """
    if clamp <= 0:
        raise ValueError("clamp must be positive")
    v = np.asarray(values, dtype=np.float64)
    if mode == "clip":
        return np.clip(v, -clamp, clamp)
    if mode != "rescale":
        raise ValueError(f"unknown normalization mode {mode!r}")
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    if peak <= clamp:
        return v.copy()
    return v * (clamp / peak)


def combine_priors(fresh: np.ndarray, previous_posterior: np.ndarray, m_bits: int) -> np.ndarray:
    """Splice retransmission priors: fresh parity [0, M), carried info [M, N)."""
    fresh = np.asarray(fresh, dtype=np.float64)
    prev = np.asarray(previous_posterior, dtype=np.float64)
    if fresh.shape != prev.shape:
        raise ValueError("vectors must have equal length")
    if not 0 < m_bits < fresh.size:
        raise ValueError("m_bits must satisfy 0 < M < N")
    out = np.empty_like(fresh)
    out[:m_bits] = fresh[:m_bits]
    out[m_bits:] = prev[m_bits:]
    return out


def hard_decide(posterior: np.ndarray) -> np.ndarray:
    """Bit 1 where the LLR is negative; exact zeros decide 0."""
    return (np.asarray(posterior, dtype=np.float64) < 0).astype(np.uint8)
