"""Pure-numpy flooding sum-product kernel, the fallback for the compiled one.

Message arrays are kept in check-major edge order (the order produced by
row-wise np.nonzero on H); var_edge regroups the same edges by variable for
the accumulation passes.  Exactly-zero messages (erasures) are handled without
division tricks: per check we count zero tanh factors and only the edge that
owns the single zero sees a nonzero exclusion product.
"""

from __future__ import annotations

import numpy as np

ATANH_CLIP = 1.0 - 1e-12

BACKEND_NAME = "python"


def run_bp(
    chk_ptr: np.ndarray,
    chk_var: np.ndarray,
    var_ptr: np.ndarray,
    var_edge: np.ndarray,
    prior: np.ndarray,
    max_iters: int,
    stall_tol: float = 1e-4,
    stall_min_iters: int = 10,
    min_sum: bool = False,
    check_every: bool = True,
):
    """Run flooding BP; returns (posterior, hard, syndrome_ok, iterations).

    Stops early when the hard decision satisfies every check (if check_every)
    or when the posterior moves less than stall_tol after stall_min_iters.
    """
    prior = np.asarray(prior, dtype=np.float64)
    n_chk = chk_ptr.size - 1
    starts = chk_ptr[:-1].astype(np.int64)
    echk = np.repeat(np.arange(n_chk, dtype=np.int64), np.diff(chk_ptr))
    vstarts = var_ptr[:-1].astype(np.int64)

    c2v = np.zeros(chk_var.size, dtype=np.float64)
    posterior = prior.copy()
    hard = (posterior < 0).astype(np.uint8)
    if check_every and _syndrome_ok(hard, chk_var, starts):
        return posterior, hard, True, 0

    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        v2c = posterior[chk_var] - c2v
        if min_sum:
            new_c2v = _check_update_minsum(v2c, chk_ptr)
        else:
            new_c2v = _check_update_tanh(v2c, starts, echk)
        delta = float(np.max(np.abs(new_c2v - c2v))) if new_c2v.size else 0.0
        c2v = new_c2v
        posterior = prior + np.add.reduceat(c2v[var_edge], vstarts)
        hard = (posterior < 0).astype(np.uint8)
        if check_every and _syndrome_ok(hard, chk_var, starts):
            return posterior, hard, True, it
        # Unchanged messages mean an exact fixed point: no later iteration can
        # differ, so stop regardless of the iteration count.
        if delta == 0.0:
            break
        if stall_tol > 0 and it >= stall_min_iters and delta < stall_tol:
            break
    ok = _syndrome_ok(hard, chk_var, starts)
    return posterior, hard, ok, iters


def _syndrome_ok(hard, chk_var, starts):
    syn = np.bitwise_xor.reduceat(hard[chk_var], starts)
    return not syn.any()


def _check_update_tanh(v2c, starts, echk):
    t = np.tanh(0.5 * v2c)
    zero = t == 0.0
    safe = np.where(zero, 1.0, t)
    prod = np.multiply.reduceat(safe, starts)
    zcnt = np.add.reduceat(zero.astype(np.int64), starts)
    prod_e = prod[echk]
    zcnt_e = zcnt[echk]
    excl = np.zeros_like(v2c)
    clean = zcnt_e == 0
    excl[clean] = prod_e[clean] / t[clean]
    lone = zero & (zcnt_e == 1)
    excl[lone] = prod_e[lone]
    np.clip(excl, -ATANH_CLIP, ATANH_CLIP, out=excl)
    return 2.0 * np.arctanh(excl)


def _check_update_minsum(v2c, chk_ptr):
    # Plain per-check exclusion loops; min-sum is a speed switch for callers
    # that opt out of the exact rule, not a hot path here.
    out = np.zeros_like(v2c)
    for j in range(chk_ptr.size - 1):
        s, e = int(chk_ptr[j]), int(chk_ptr[j + 1])
        msgs = v2c[s:e]
        for k in range(s, e):
            sgn = 1.0
            mag = np.inf
            for k2 in range(s, e):
                if k2 == k:
                    continue
                m = msgs[k2 - s]
                if m < 0:
                    sgn = -sgn
                elif m == 0.0:
                    sgn = 0.0
                a = abs(m)
                if a < mag:
                    mag = a
            out[k] = sgn * mag if sgn != 0.0 else 0.0
    return out
