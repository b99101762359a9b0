"""Offline recurrent forecaster for excitation interval rates.

Trains on traffic trace CSVs and emits prediction-trace files; the only
coupling to the link simulator is through those two file formats.
"""

from .model import ErrorReport, ModelArtifact, TrainingConfig, train_model
from .emit import emit_prediction_trace

__all__ = ["ErrorReport", "ModelArtifact", "TrainingConfig", "train_model", "emit_prediction_trace"]
