"""Recurrent interval-rate forecaster: training, serialization, inference."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .data import DEFAULT_SLOTS_PER_WINDOW, build_dataset, interval_rates


@dataclass(frozen=True)
class TrainingConfig:
    history_len: int = 64
    horizon: int = 5
    learning_rate: float = 0.0001
    batch_size: int = 64
    epochs: int = 100
    train_fraction: float = 0.8
    hidden_size: int = 32
    slots_per_window: int = DEFAULT_SLOTS_PER_WINDOW
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if min(self.history_len, self.horizon, self.batch_size, self.epochs, self.hidden_size) < 1:
            raise ValueError("all counts must be >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainingConfig":
        return cls(**raw)

    def fingerprint(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class ErrorReport:
    mse: float
    rmse: float
    mae: float


class RateForecaster(nn.Module):
    def __init__(self, hidden_size: int):
        super().__init__()
        self.gru = nn.GRU(input_size=1, hidden_size=hidden_size, batch_first=True)
        self.head = nn.Linear(hidden_size, 1)

    def forward(self, x):
        # x: (batch, history_len) of standardized rates
        _, state = self.gru(x.unsqueeze(-1))
        return self.head(state[-1]).squeeze(-1)


@dataclass
class ModelArtifact:
    state_dict: dict
    config: TrainingConfig
    input_mean: float
    input_std: float
    validation_mse: float

    def save(self, path) -> None:
        torch.save(
            {
                "state_dict": self.state_dict,
                "config": asdict(self.config),
                "input_mean": self.input_mean,
                "input_std": self.input_std,
                "validation_mse": self.validation_mse,
                "fingerprint": self.config.fingerprint(),
            },
            path,
        )

    @classmethod
    def load(cls, path) -> "ModelArtifact":
        blob = torch.load(path, weights_only=False)
        cfg = TrainingConfig(**blob["config"])
        if blob["fingerprint"] != cfg.fingerprint():
            raise ValueError("artifact fingerprint does not match its stored config")
        return cls(
            state_dict=blob["state_dict"],
            config=cfg,
            input_mean=blob["input_mean"],
            input_std=blob["input_std"],
            validation_mse=blob["validation_mse"],
        )

    def build_module(self) -> RateForecaster:
        module = RateForecaster(self.config.hidden_size)
        module.load_state_dict(self.state_dict)
        module.eval()
        return module

    def predict(self, histories: np.ndarray) -> np.ndarray:
        """Forecast the aggregate rate for each (L,) history row, clamped to [0, 1]."""
        module = self.build_module()
        x = (np.atleast_2d(histories) - self.input_mean) / self.input_std
        with torch.no_grad():
            out = module(torch.from_numpy(x.astype(np.float32)))
        return np.clip(out.numpy().astype(np.float64), 0.0, 1.0)


def _eval(module: RateForecaster, hist: np.ndarray, target: np.ndarray, mean: float, std: float) -> ErrorReport:
    x = torch.from_numpy(((hist - mean) / std).astype(np.float32))
    with torch.no_grad():
        pred = np.clip(module(x).numpy().astype(np.float64), 0.0, 1.0)
    err = pred - target
    mse = float(np.mean(err**2))
    return ErrorReport(mse=mse, rmse=float(np.sqrt(mse)), mae=float(np.mean(np.abs(err))))


def train_model(trace_path, cfg: TrainingConfig) -> tuple[ModelArtifact, ErrorReport]:
    """Fit the forecaster on a trace; returns the artifact and held-out errors.

    Supervision is a sliding window over the trace's per-window interval
    rates; the chronological first train_fraction of samples train the model
    and the rest are the validation split.  Fully deterministic per seed.
    """
    rates = interval_rates(trace_path, slots_per_window=cfg.slots_per_window)
    data = build_dataset(rates, cfg.history_len, cfg.horizon)
    n_train = int(data.history.shape[0] * cfg.train_fraction)
    if n_train < 1 or n_train == data.history.shape[0]:
        raise ValueError("not enough windows for the requested split")
    train_h, train_t = data.history[:n_train], data.target[:n_train]
    val_h, val_t = data.history[n_train:], data.target[n_train:]

    mean = float(train_h.mean())
    std = float(train_h.std()) or 1.0

    torch.set_num_threads(1)  # multi-threaded reductions break run-to-run determinism
    torch.manual_seed(cfg.seed)
    module = RateForecaster(cfg.hidden_size)
    optim = torch.optim.Adam(module.parameters(), lr=cfg.learning_rate)
    loss_fn = nn.MSELoss()
    order_rng = np.random.default_rng(cfg.seed)
    xs = torch.from_numpy(((train_h - mean) / std).astype(np.float32))
    ys = torch.from_numpy(train_t.astype(np.float32))

    module.train()
    for _ in range(cfg.epochs):
        perm = order_rng.permutation(n_train)
        for lo in range(0, n_train, cfg.batch_size):
            idx = perm[lo : lo + cfg.batch_size]
            optim.zero_grad()
            loss = loss_fn(module(xs[idx]), ys[idx])
            loss.backward()
            optim.step()
    module.eval()

    report = _eval(module, val_h, val_t, mean, std)
    artifact = ModelArtifact(
        state_dict={k: v.detach().clone() for k, v in module.state_dict().items()},
        config=cfg,
        input_mean=mean,
        input_std=std,
        validation_mse=report.mse,
    )
    return artifact, report
