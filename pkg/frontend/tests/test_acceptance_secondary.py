"""Secondary acceptance: the learned forecaster plugged into the simulator.

Criterion 11: on held-out synthetic Pareto traffic, the trained model's
validation MSE beats the persistence baseline; its emitted prediction trace
loads through the simulator's reader; and scheduling with it lands between
the oracle and no-scheduling outcomes on the same traffic.

The whole pipeline (training, emission, macro walk) runs on 4-slot windows:
an MSE-trained model predicts conditional means, and only at that resolution
do conditional means dip below the transmit threshold often enough for
threshold scheduling to act on them (the fixed-length excitation bursts are
individually predictable there).
"""

import time

import numpy as np

from flexscatter.channel import ChannelConfig
from flexscatter.code import CodeConfig
from flexscatter.forecast import load_predictions
from flexscatter.scheduler import SchedulerConfig, run_macro_experiment
from flexscatter.traffic import (
    generate_onoff,
    parse_trace,
    process_to_records,
    records_to_process,
    scenario_params,
    write_trace,
)

from neural_predictor import TrainingConfig, train_model
from neural_predictor.data import build_dataset, interval_rates
from neural_predictor.emit import emit_prediction_trace

SLOTS_PER_WINDOW = 4


def _make_trace(path, seed, total_slots):
    proc = generate_onoff(scenario_params("laboratory", 1), busy_slots=20, total_slots=total_slots, seed=seed)
    write_trace(process_to_records(proc), path)
    return path


def test_criterion_11_neural_predictor(tmp_path):
    t0 = time.time()
    cfg = TrainingConfig(epochs=40, hidden_size=32, seed=4, slots_per_window=SLOTS_PER_WINDOW)
    train_trace = _make_trace(tmp_path / "train.csv", seed=101, total_slots=48_000)
    artifact, _ = train_model(train_trace, cfg)

    held_out = _make_trace(tmp_path / "held.csv", seed=707, total_slots=16_000)

    # forecast quality on the held-out trace vs the persistence baseline
    rates = interval_rates(held_out, slots_per_window=cfg.slots_per_window)
    data = build_dataset(rates, cfg.history_len, cfg.horizon)
    model_pred = artifact.predict(data.history)
    mse_model = float(np.mean((model_pred - data.target) ** 2))
    mse_persistence = float(np.mean((data.history[:, -1] - data.target) ** 2))
    beats_persistence = mse_model <= mse_persistence

    # the emitted file is readable through the simulator's loader
    pred_path = tmp_path / "pred.csv"
    rows = emit_prediction_trace(artifact, held_out, pred_path)
    table = load_predictions(pred_path)
    loads = len(table) == rows == (rates.size - cfg.history_len) // cfg.horizon

    # scheduling with the emitted predictions on the same traffic
    code = CodeConfig()
    sched = SchedulerConfig()
    traffic = records_to_process(parse_trace(held_out).records)
    ber = {}
    for policy, predictor, external in (
        ("no-scheduling", "ar", None),
        ("predicted", "external", table),
        ("oracle", "ar", None),
    ):
        runs = []
        for r in range(6):
            m = run_macro_experiment(
                policy, traffic, predictor, code, ChannelConfig(10.0, 4000 + r), sched,
                workload=40, external_table=external, slots_per_window=SLOTS_PER_WINDOW,
            )
            runs.append(m.ber)
        ber[policy] = float(np.mean(runs))
    between = ber["oracle"] <= ber["predicted"] <= ber["no-scheduling"]

    ok = beats_persistence and loads and between
    print(
        f"{'PASS' if ok else 'FAIL'} criterion 11: held-out MSE {mse_model:.4f} vs persistence "
        f"{mse_persistence:.4f}, {rows} predictions load, BER oracle/learned/none = "
        f"{ber['oracle']:.3e}/{ber['predicted']:.3e}/{ber['no-scheduling']:.3e} ({time.time()-t0:.0f}s)"
    )
    assert ok
