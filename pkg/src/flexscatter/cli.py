"""Command-line entry point.

    flexscatter <experiment> [--config FILE] [--seed U64] [--out PATH]
                [--format csv|json] [--trials N]
    flexscatter dump-code [--config FILE] [--seed U64] [--out PATH]

The config file is a flat JSON object overriding experiment defaults.  When
--seed is omitted the FLEXSCATTER_SEED environment variable is used, then 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .code import build_instance
from .experiments import REGISTRY, ExperimentConfig, ExperimentSpec, emit_results, run_sweep


def _load_config(path: str | None) -> ExperimentConfig:
    if not path:
        return ExperimentConfig()
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def _resolve_seed(arg_seed: int | None) -> int:
    if arg_seed is not None:
        return arg_seed
    env = os.environ.get("FLEXSCATTER_SEED")
    return int(env) if env else 0


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_code(cfg: ExperimentConfig, seed: int, out: str | None) -> None:
    from .code import sample_exponents

    code = cfg.code_config()
    x, y = sample_exponents(seed, 0, 1, code.exponent_range)
    inst = build_instance(code, x, y, attempt_id=1)
    text = (
        f"# H {inst.h.rows}x{inst.h.cols} (x={x}, y={y})\n"
        + inst.h.to_ascii()
        + f"# G {inst.g.rows}x{inst.g.cols}\n"
        + inst.g.to_ascii()
    )
    _write_output(text, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="flexscatter", description="Backscatter link simulation experiments")
    parser.add_argument("experiment", choices=sorted(REGISTRY) + ["dump-code"])
    parser.add_argument("--config", help="flat JSON config file overriding defaults")
    parser.add_argument("--seed", type=int, default=None, help="u64 seed (falls back to FLEXSCATTER_SEED, then 0)")
    parser.add_argument("--out", help="output path (stdout when omitted)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--trials", type=int, default=None, help="trials per grid point")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        seed = _resolve_seed(args.seed)
        if args.experiment == "dump-code":
            _dump_code(cfg, seed, args.out)
            return 0
        spec = ExperimentSpec(name=args.experiment, config=cfg, trials=args.trials, seed=seed)
        rows = run_sweep(spec)
        _write_output(emit_results(rows, args.format), args.out)
        return 0
    except OSError as err:
        print(f"flexscatter: i/o error: {err}", file=sys.stderr)
        return 1
    except (KeyError, ValueError) as err:
        print(f"flexscatter: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
