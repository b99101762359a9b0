"""Render model forecasts as a prediction-trace CSV the simulator can load."""

from __future__ import annotations

import csv

import numpy as np

from .data import build_dataset, interval_rates
from .model import ModelArtifact

PREDICTION_HEADER = ["window_index", "predicted_rate"]


def emit_prediction_trace(artifact: ModelArtifact, trace_path, out_path) -> int:
    """Write one forecast per horizon-aligned decision block; returns the row count.

    Block b covers windows [L + b*H, L + (b+1)*H) of the trace, predicted from
    the L windows before it, matching the simulator's decision indexing.
    """
    cfg = artifact.config
    rates = interval_rates(trace_path, slots_per_window=cfg.slots_per_window)
    data = build_dataset(rates, cfg.history_len, cfg.horizon)
    n_blocks = (rates.size - cfg.history_len) // cfg.horizon
    histories = data.history[:: cfg.horizon][:n_blocks]
    preds = artifact.predict(histories)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICTION_HEADER)
        for b, value in enumerate(preds):
            writer.writerow([b, repr(float(np.clip(value, 0.0, 1.0)))])
    return int(preds.size)
