"""Interval-rate forecasting: baselines, a perfect-knowledge oracle, external
prediction tables, and forecast-quality metrics.

A forecast is the aggregate (mean) interval rate over the next horizon
windows, predicted from a history of per-window rates.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .traffic import TraceFormatError

DEFAULT_HISTORY = 64
DEFAULT_HORIZON = 5
DEFAULT_AR_ORDER = 8

PREDICTION_HEADER = ["window_index", "predicted_rate"]

METHODS = ("persistence", "moving-average", "ar", "oracle", "external")


@dataclass(frozen=True)
class ForecastRequest:
    history: np.ndarray
    horizon: int = DEFAULT_HORIZON

    def __post_init__(self):
        h = np.asarray(self.history, dtype=np.float64)
        if h.ndim != 1 or h.size < 1:
            raise ValueError("history must be a non-empty 1-D sequence")
        if h.min() < 0.0 or h.max() > 1.0:
            raise ValueError("history values must lie in [0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        object.__setattr__(self, "history", h)


@dataclass(frozen=True)
class Forecast:
    predicted_rate: float

    def __post_init__(self):
        if not 0.0 <= self.predicted_rate <= 1.0:
            raise ValueError("predicted_rate must lie in [0, 1]")


@dataclass(frozen=True)
class ForecastErrorReport:
    mse: float
    rmse: float
    mae: float


def fit_ar(series, order: int, ridge: float = 1e-6) -> np.ndarray:
    """Least-squares AR(order) coefficients, most recent lag first.

    Falls back to a ridge-regularized solve (with a warning) when the normal
    equations are singular.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < order + 1:
        raise ValueError(f"need at least {order + 1} samples to fit AR({order})")
    rows = x.size - order
    design = np.empty((rows, order))
    for lag in range(1, order + 1):
        design[:, lag - 1] = x[order - lag : order - lag + rows]
    target = x[order:]
    gram = design.T @ design
    rhs = design.T @ target
    try:
        coefs = np.linalg.solve(gram, rhs)
        if not np.isfinite(coefs).all():
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        warnings.warn("singular AR normal equations; using ridge-regularized solve")
        coefs = np.linalg.solve(gram + ridge * np.eye(order), rhs)
    return coefs


def _ar_forecast(history: np.ndarray, horizon: int, order: int) -> float:
    order = min(order, history.size - 1)
    if order < 1:
        return float(history[-1])
    coefs = fit_ar(history, order)
    window = history[-order:].tolist()
    preds = []
    for _ in range(horizon):
        nxt = float(np.dot(coefs, window[::-1]))
        preds.append(nxt)
        window = window[1:] + [nxt]
    return float(np.clip(np.mean(preds), 0.0, 1.0))


def predict_interval_rate(method: str, req: ForecastRequest, context: dict | None = None) -> Forecast:
    """Dispatch one forecast.

    oracle requires context["future"] (the true upcoming per-window rates);
    external requires context["table"] and context["index"].
    """
    if method == "persistence":
        rate = float(req.history[-1])
    elif method == "moving-average":
        rate = float(np.mean(req.history))
    elif method == "ar":
        order = DEFAULT_AR_ORDER if context is None else int(context.get("order", DEFAULT_AR_ORDER))
        rate = _ar_forecast(req.history, req.horizon, order)
    elif method == "oracle":
        if context is None or "future" not in context:
            raise ValueError("oracle forecasting requires ground-truth context['future']")
        future = np.asarray(context["future"], dtype=np.float64)
        if future.size < req.horizon:
            raise ValueError("ground truth shorter than the forecast horizon")
        rate = float(np.mean(future[: req.horizon]))
    elif method == "external":
        if context is None or "table" not in context or "index" not in context:
            raise ValueError("external forecasting requires context['table'] and context['index']")
        table = context["table"]
        idx = int(context["index"])
        if idx not in table:
            raise KeyError(f"no prediction for window {idx}")
        rate = float(table[idx])
    else:
        raise ValueError(f"unknown predictor {method!r}; expected one of {METHODS}")
    return Forecast(predicted_rate=float(np.clip(rate, 0.0, 1.0)))


def load_predictions(path) -> dict:
    """Read a prediction-trace CSV into {window_index: predicted_rate}."""
    table: dict[int, float] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = None
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = next(csv.reader([line]))
            if header is None:
                header = fields
                if header != PREDICTION_HEADER:
                    raise TraceFormatError(f"bad header {header!r}, expected {PREDICTION_HEADER!r}")
                continue
            try:
                idx = int(fields[0])
                rate = float(fields[1])
            except (ValueError, IndexError):
                raise TraceFormatError(f"line {lineno}: unparseable prediction row {line!r}") from None
            if idx in table:
                raise TraceFormatError(f"line {lineno}: duplicate window index {idx}")
            table[idx] = rate
    if header is None:
        raise TraceFormatError("empty input: missing header line")
    return table


def write_predictions(table: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PREDICTION_HEADER)
        for idx in sorted(table):
            writer.writerow([idx, repr(float(table[idx]))])


def eval_forecast(predicted, actual) -> ForecastErrorReport:
    p = np.asarray(predicted, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if p.shape != a.shape or p.size < 1:
        raise ValueError("predicted and actual must be equal-length, non-empty")
    err = p - a
    mse = float(np.mean(err**2))
    return ForecastErrorReport(mse=mse, rmse=float(np.sqrt(mse)), mae=float(np.mean(np.abs(err))))
