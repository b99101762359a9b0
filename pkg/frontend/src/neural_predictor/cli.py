"""Command-line entry point.

    neural-predictor train --trace <csv> --out-model <path> [--config <json>]
    neural-predictor predict --model <path> --trace <csv> --out <csv>
"""

from __future__ import annotations

import argparse
import json
import sys

from .emit import emit_prediction_trace
from .model import ModelArtifact, TrainingConfig, train_model


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="neural-predictor", description="Train/run the interval-rate forecaster")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a forecaster on a traffic trace")
    p_train.add_argument("--trace", required=True)
    p_train.add_argument("--out-model", required=True)
    p_train.add_argument("--config", help="JSON file overriding TrainingConfig defaults")

    p_pred = sub.add_parser("predict", help="emit a prediction-trace CSV for a trace")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--trace", required=True)
    p_pred.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            cfg = TrainingConfig()
            if args.config:
                with open(args.config, "r", encoding="utf-8") as fh:
                    cfg = TrainingConfig.from_dict(json.load(fh))
            artifact, report = train_model(args.trace, cfg)
            artifact.save(args.out_model)
            print(f"validation mse={report.mse:.6g} rmse={report.rmse:.6g} mae={report.mae:.6g}")
        else:
            artifact = ModelArtifact.load(args.model)
            rows = emit_prediction_trace(artifact, args.trace, args.out)
            print(f"wrote {rows} predictions")
        return 0
    except OSError as err:
        print(f"neural-predictor: i/o error: {err}", file=sys.stderr)
        return 1
    except (ValueError, TypeError) as err:
        print(f"neural-predictor: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
