"""Named experiment sweeps with machine-readable results.

Every experiment is a pure function of (config, trials, seed) and produces
ResultRow records; identical inputs give byte-identical serialized output.
Desk-scale defaults keep each sweep within minutes; trial counts and grids
are overridable through the flat JSON config.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .channel import Channel, ChannelConfig, bernoulli_mask, modulate_bpsk
from .code import CodeConfig, Frame, IndexMatrixParams, build_instance, encode_frame
from .decoder import bp_decode
from .protocol import run_arq_frame, run_rateless_frame
from .scheduler import SchedulerConfig, run_macro_experiment, throughput, utility
from .traffic import generate_onoff, parse_trace, records_to_process, scenario_params
from .forecast import load_predictions


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat knob set; JSON config files override these defaults.

    snr_db = None lets each experiment apply its own default operating point.
    """

    snr_db: float | None = None
    z: int = 131
    m: int = 4
    n: int = 4
    a: int = 3
    b: int = 7
    x: int = 0
    y: int = 0
    exponent_lo: int = 0
    exponent_hi: int = 9
    w_i: float = 0.25
    history_len: int = 64
    delta_t: int = 5
    n_max: int = 4
    clamp: float = 5.0
    norm_mode: str = "clip"
    bp_max_iters: int = 50
    stall_tol: float = 1e-4
    pareto_alpha: float = 0.57
    pareto_xm: float = 1.0
    pareto_cap: float = 1000.0
    busy_slots: float = 20.0
    rate_mbps: float = 1.0
    energy_per_bit_uj: float = 10.0
    scenario: str = "laboratory"
    channel: int = 1
    slots_per_window: int = 8
    frames_per_window: int = 2
    workload: int = 50
    slices: int = 20
    predictor: str = "ar"
    trace_path: str = ""
    predictions_path: str = ""
    snr_list: tuple = ()
    ratio_list: tuple = ()
    n_max_list: tuple = ()
    x_list: tuple = ()

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        clean = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()}
        return cls(**clean)

    def code_config(self, x: int | None = None, y: int | None = None) -> CodeConfig:
        params = IndexMatrixParams(
            a=self.a, b=self.b, x=self.x if x is None else x, y=self.y if y is None else y, m=self.m, n=self.n
        )
        return CodeConfig(z=self.z, params=params, exponent_range=(self.exponent_lo, self.exponent_hi))

    def scheduler_config(self) -> SchedulerConfig:
        return SchedulerConfig(
            w_i=self.w_i,
            history_len=self.history_len,
            horizon=self.delta_t,
            n_max=self.n_max,
            code_rate_target=1.0 / (self.n_max + 1),
        )


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    params: dict
    metric: str
    mean: float
    stderr: float
    trials: int

    def params_key(self) -> str:
        return ";".join(f"{k}={self.params[k]}" for k in sorted(self.params))


def _sorted_rows(rows):
    return sorted(rows, key=lambda r: (r.experiment, r.metric, r.params_key()))


def emit_results(rows, fmt: str = "csv") -> str:
    if not rows:
        raise ValueError("no rows to emit")
    rows = _sorted_rows(rows)
    if fmt == "csv":
        lines = ["experiment,params,metric,mean,stderr,trials"]
        for r in rows:
            lines.append(f"{r.experiment},{r.params_key()},{r.metric},{r.mean!r},{r.stderr!r},{r.trials}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [
            {
                "experiment": r.experiment,
                "params": r.params_key(),
                "metric": r.metric,
                "mean": r.mean,
                "stderr": r.stderr,
                "trials": r.trials,
            }
            for r in rows
        ]
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _frame_bits(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.integers(0, 2, k).astype(np.uint8)


def _mean_stderr(per_trial: np.ndarray):
    mean = float(np.mean(per_trial))
    stderr = float(np.std(per_trial, ddof=1) / np.sqrt(per_trial.size)) if per_trial.size > 1 else 0.0
    return mean, stderr


def ber_fixed_code(cfg: ExperimentConfig, x: int, y: int, snr_db: float, trials: int, seed: int) -> np.ndarray:
    """Per-frame BER of single-shot decoding with one fixed-exponent code."""
    code = cfg.code_config()
    inst = build_instance(code, x, y)
    k = code.k_bits
    fr = np.empty(trials)
    frame_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(1,))))
    for t in range(trials):
        u = _frame_bits(frame_rng, k)
        c = encode_frame(inst, Frame(u))
        chan = Channel(ChannelConfig(snr_db, seed), rng=np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(2, t)))))
        out = bp_decode(inst, chan.transmit(modulate_bpsk(c)), max_iters=cfg.bp_max_iters, stall_tol=cfg.stall_tol)
        fr[t] = (out.hard[code.m_bits :] != u).mean()
    return fr


def _session_ber(cfg: ExperimentConfig, scheme: str, snr_db: float, trials: int, seed: int, n_max: int, ratio: float | None = None):
    """Per-frame BER (and per-frame packet counts) for protocol sessions."""
    code = cfg.code_config()
    k = code.k_bits
    run = run_rateless_frame if scheme == "rateless" else run_arq_frame
    frame_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(1,))))
    fr = np.empty(trials)
    packets = np.empty(trials, dtype=np.int64)
    bits = np.empty(trials, dtype=np.int64)
    ch = ChannelConfig(snr_db, seed)
    for t in range(trials):
        u = _frame_bits(frame_rng, k)
        mask_source = None
        if ratio is not None:
            mask_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(3, t))))
            mask_source = lambda attempt, n_sym: bernoulli_mask(n_sym, ratio, mask_rng)
        kwargs = {} if scheme == "arq" else {"clamp": cfg.clamp, "norm_mode": cfg.norm_mode}
        session = run(
            Frame(u), code, ch,
            mask_source=mask_source, n_max=n_max, frame_id=t,
            max_iters=cfg.bp_max_iters, stall_tol=cfg.stall_tol, **kwargs,
        )
        fr[t] = (session.final_hard != u).mean()
        packets[t] = session.packets_sent
        bits[t] = session.bits_sent
    return fr, packets, bits


def exp_exponent_invariance(cfg: ExperimentConfig, trials: int, seed: int):
    xs = cfg.x_list or (0, 1, 2, 3)
    snr = cfg.snr_db if cfg.snr_db is not None else -1.5
    rows = []
    for x in xs:
        fr = ber_fixed_code(cfg, int(x), cfg.y, snr, trials, seed)
        mean, se = _mean_stderr(fr)
        rows.append(ResultRow("exponent-invariance", {"x": int(x), "y": cfg.y, "snr_db": snr}, "ber", mean, se, trials))
    return rows


def exp_rateless_vs_qcldpc(cfg: ExperimentConfig, trials: int, seed: int):
    snrs = cfg.snr_list or (-3.0, -2.5, -2.0, -1.5, -1.0, 0.0)
    rows = []
    for snr in snrs:
        for scheme, n_max in (("rateless", cfg.n_max), ("qc-ldpc", 1)):
            fr, _, _ = _session_ber(cfg, "rateless", float(snr), trials, seed, n_max)
            mean, se = _mean_stderr(fr)
            rows.append(ResultRow("rateless-vs-qcldpc", {"scheme": scheme, "snr_db": float(snr)}, "ber", mean, se, trials))
    return rows


def exp_rate_sweep(cfg: ExperimentConfig, trials: int, seed: int):
    n_list = tuple(int(v) for v in (cfg.n_max_list or (1, 2, 3, 4, 5, 6)))
    snr = cfg.snr_db if cfg.snr_db is not None else 0.5
    per_n = ber_prefix_sweep(cfg, snr, trials, seed, max(n_list))
    rows = []
    for n in n_list:
        mean, se = _mean_stderr(per_n[n])
        rows.append(ResultRow("rate-sweep", {"n_max": n, "snr_db": snr}, "ber", mean, se, trials))
    return rows


def ber_prefix_sweep(cfg: ExperimentConfig, snr_db: float, trials: int, seed: int, n_top: int, ratio: float | None = None):
    """BER for every n_max in [1, n_top] from a single session per frame.

    A session run with n_max = n_top records the information hard decision
    after each attempt, so the n_max = k outcome is the decision at attempt
    min(k, packets_sent); all n_max values share the same channel noise.
    """
    code = cfg.code_config()
    k = code.k_bits
    frame_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(1,))))
    ch = ChannelConfig(snr_db, seed)
    per_n = {n: np.empty(trials) for n in range(1, n_top + 1)}
    for t in range(trials):
        u = _frame_bits(frame_rng, k)
        mask_source = None
        if ratio is not None:
            mask_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(3, t))))
            mask_source = lambda attempt, n_sym: bernoulli_mask(n_sym, ratio, mask_rng)
        session = run_rateless_frame(
            Frame(u), code, ch, mask_source=mask_source, n_max=n_top, frame_id=t,
            max_iters=cfg.bp_max_iters, clamp=cfg.clamp, stall_tol=cfg.stall_tol, norm_mode=cfg.norm_mode,
        )
        for n in range(1, n_top + 1):
            hard = session.attempts[min(n, session.packets_sent) - 1].info_hard
            per_n[n][t] = (hard != u).mean()
    return per_n


def exp_interval_sweep(cfg: ExperimentConfig, trials: int, seed: int):
    ratios = cfg.ratio_list or (0.0, 0.1, 0.2, 0.3, 0.4)
    snrs = cfg.snr_list or (cfg.snr_db if cfg.snr_db is not None else 10.0,)
    rows = []
    for snr in snrs:
        for ratio in ratios:
            fr, _, _ = _session_ber(cfg, "rateless", float(snr), trials, seed, cfg.n_max, ratio=float(ratio))
            mean, se = _mean_stderr(fr)
            rows.append(
                ResultRow("interval-sweep", {"snr_db": float(snr), "interval_ratio": float(ratio)}, "ber", mean, se, trials)
            )
    return rows


def exp_arq_compare(cfg: ExperimentConfig, trials: int, seed: int):
    snrs = cfg.snr_list or (-8.0, -7.0, -6.0, -5.0, -4.0, -3.0, -2.0, -1.0)
    rows = []
    for snr in snrs:
        for scheme in ("rateless", "arq"):
            fr, _, _ = _session_ber(cfg, scheme, float(snr), trials, seed, cfg.n_max)
            mean, se = _mean_stderr(fr)
            rows.append(ResultRow("arq-compare", {"scheme": scheme, "snr_db": float(snr)}, "ber", mean, se, trials))
    return rows


def exp_utility_threshold(cfg: ExperimentConfig, trials: int, seed: int):
    ratios = cfg.ratio_list or tuple(round(0.05 * i, 2) for i in range(11))
    n_list = tuple(int(v) for v in (cfg.n_max_list or (2, 4, 9)))
    snr = cfg.snr_db if cfg.snr_db is not None else 10.0
    rows = []
    for n_max in n_list:
        for ratio in ratios:
            fr, packets, bits = _session_ber(cfg, "rateless", snr, trials, seed, n_max, ratio=float(ratio))
            ber = float(np.mean(fr))
            mean_energy = cfg.energy_per_bit_uj * float(np.mean(bits))
            tput = throughput(cfg.rate_mbps, ber)
            point = {"n_max": n_max, "interval_ratio": float(ratio), "snr_db": snr}
            rows.append(ResultRow("utility-threshold", point, "utility", utility(tput, mean_energy), 0.0, trials))
            rows.append(ResultRow("utility-threshold", point, "ber", ber, 0.0, trials))
            rows.append(ResultRow("utility-threshold", point, "energy_uj", mean_energy, 0.0, trials))
            rows.append(ResultRow("utility-threshold", point, "packets", float(np.mean(packets)), 0.0, trials))
    return rows


def _macro_traffic(cfg: ExperimentConfig, slice_seed: int):
    if cfg.trace_path:
        return records_to_process(parse_trace(cfg.trace_path).records)
    params = scenario_params(cfg.scenario, cfg.channel, x_m=cfg.pareto_xm, cap=cfg.pareto_cap)
    min_windows = cfg.history_len + cfg.delta_t * (cfg.workload // max(1, cfg.frames_per_window * cfg.delta_t) + 16)
    total_slots = max(4000, min_windows * cfg.slots_per_window)
    return generate_onoff(params, busy_slots=cfg.busy_slots, total_slots=total_slots, seed=slice_seed)


def _macro_rows(name: str, cfg: ExperimentConfig, policies, trials: int, seed: int, scenario_tag: dict | None = None):
    rows = []
    workload = trials
    external = load_predictions(cfg.predictions_path) if cfg.predictions_path else None
    # mix the scenario into the traffic stream so presets that share parameters
    # still get independent realizations
    scenario_salt = zlib.crc32(cfg.scenario.encode()) % 9973
    for s in range(cfg.slices):
        traffic = _macro_traffic(cfg, seed + 1000 * (s + 1) + scenario_salt)
        for policy in policies:
            metrics = run_macro_experiment(
                policy,
                traffic,
                cfg.predictor,
                cfg.code_config(),
                ChannelConfig(cfg.snr_db if cfg.snr_db is not None else 10.0, seed + s),
                cfg.scheduler_config(),
                workload,
                slots_per_window=cfg.slots_per_window,
                frames_per_window=cfg.frames_per_window,
                rate_mbps=cfg.rate_mbps,
                energy_per_bit_uj=cfg.energy_per_bit_uj,
                external_table=external,
                max_iters=cfg.bp_max_iters,
                clamp=cfg.clamp,
                stall_tol=cfg.stall_tol,
                norm_mode=cfg.norm_mode,
            )
            point = {"policy": policy, "slice": s}
            if scenario_tag:
                point.update(scenario_tag)
            for metric, value in (
                ("ber", metrics.ber),
                ("energy_uj", metrics.energy_uj),
                ("throughput_mbps", metrics.throughput_mbps),
                ("utility", metrics.utility),
                ("elapsed_s", metrics.elapsed_s),
            ):
                rows.append(ResultRow(name, point, metric, float(value), 0.0, workload))
    return rows


def exp_macro_policies(cfg: ExperimentConfig, trials: int, seed: int):
    return _macro_rows("macro-policies", cfg, ("no-scheduling", "predicted", "oracle"), trials, seed)


def exp_scenario_pareto(cfg: ExperimentConfig, trials: int, seed: int):
    rows = []
    for scenario in ("laboratory", "shopping_mall", "residential"):
        scen_cfg = replace(cfg, scenario=scenario)
        rows.extend(
            _macro_rows("scenario-pareto", scen_cfg, ("no-scheduling", "predicted"), trials, seed, {"scenario": scenario})
        )
    return rows


REGISTRY = {
    "exponent-invariance": (exp_exponent_invariance, 500),
    "rateless-vs-qcldpc": (exp_rateless_vs_qcldpc, 500),
    "rate-sweep": (exp_rate_sweep, 500),
    "interval-sweep": (exp_interval_sweep, 500),
    "arq-compare": (exp_arq_compare, 500),
    "utility-threshold": (exp_utility_threshold, 200),
    "macro-policies": (exp_macro_policies, 50),
    "scenario-pareto": (exp_scenario_pareto, 50),
}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    config: ExperimentConfig = field(default_factory=ExperimentConfig)
    trials: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise ValueError(f"unknown experiment {self.name!r}; registered: {sorted(REGISTRY)}")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be >= 1")


def run_sweep(spec: ExperimentSpec):
    fn, default_trials = REGISTRY[spec.name]
    trials = spec.trials if spec.trials is not None else default_trials
    return _sorted_rows(fn(spec.config, trials, spec.seed))
