"""Benchmark the compiled BP kernel against the pure-numpy fallback.

Usage: python benchmarks/bench_bp.py [--frames N] [--snr DB]

Decodes the same batch of noisy frames with both kernels and reports wall
time per decode plus the speedup.  Outcome equality is asserted on hard
decisions as a sanity check.
"""

import argparse
import time

import numpy as np

from flexscatter._kernels import python_ref
from flexscatter.channel import Channel, ChannelConfig, modulate_bpsk
from flexscatter.code import CodeConfig, Frame, build_instance, encode_frame

try:
    from flexscatter._kernels import _bp as compiled
except ImportError:
    compiled = None


def make_batch(cfg, frames, snr_db, seed=0):
    inst = build_instance(cfg, 1, 2)
    rng = np.random.default_rng(seed)
    priors = []
    for f in range(frames):
        u = rng.integers(0, 2, cfg.k_bits).astype(np.uint8)
        c = encode_frame(inst, Frame(u))
        chan = Channel(ChannelConfig(snr_db, seed=seed + f))
        priors.append(chan.transmit(modulate_bpsk(c)))
    return inst, priors


def run(kernel, inst, priors, max_iters):
    arrays = inst.tanner()
    hards = []
    t0 = time.perf_counter()
    for prior in priors:
        _, hard, _, _ = kernel.run_bp(*arrays, prior, max_iters)
        hards.append(hard)
    return time.perf_counter() - t0, hards


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=200)
    parser.add_argument("--snr", type=float, default=-2.0, help="Es/N0 in dB (low values exercise full iteration counts)")
    parser.add_argument("--max-iters", type=int, default=50)
    args = parser.parse_args()

    cfg = CodeConfig()
    inst, priors = make_batch(cfg, args.frames, args.snr)
    print(f"default code {inst.m_bits}x{inst.n_bits}, {args.frames} frames at {args.snr} dB, max {args.max_iters} iters")

    t_py, hards_py = run(python_ref, inst, priors, args.max_iters)
    print(f"python fallback: {t_py:.3f}s total, {1e3 * t_py / args.frames:.2f} ms/frame")

    if compiled is None:
        print("compiled kernel not built; install the package to compare")
        return

    t_cy, hards_cy = run(compiled, inst, priors, args.max_iters)
    print(f"cython kernel:   {t_cy:.3f}s total, {1e3 * t_cy / args.frames:.2f} ms/frame")
    print(f"speedup: {t_py / t_cy:.1f}x")

    mismatched = sum(not np.array_equal(a, b) for a, b in zip(hards_py, hards_cy))
    print(f"hard-decision mismatches: {mismatched}/{args.frames} (ulp-level tanh differences may flip marginal frames)")


if __name__ == "__main__":
    main()
