"""End-to-end transfer scenario: simulate, fit on the training window,
forecast the horizon, score against the target."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import align, metrics, rom
from .io import ConfigError, ScenarioConfig, WallConfig, read_frame
from .sim import FdWallConfig, TimeSeriesFrame, add_noise, fd_simulate, generate_weather, rollout
from .thermal import DiscreteSSM, StateSpaceModel, discretize, source_subspace, ssm_from_matrices, wall_ssm

STATE_CHANNELS = ("T_ext1", "T_ext2")


class PipelineError(RuntimeError):
    """A failure inside one pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class _stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, (PipelineError, ConfigError)):
            return False
        if isinstance(exc, (ValueError, ArithmeticError, np.linalg.LinAlgError, KeyError)):
            raise PipelineError(self.name, exc) from exc
        return False


def continuous_model(wall: WallConfig) -> StateSpaceModel:
    if wall.A is not None:
        return ssm_from_matrices(wall.A, wall.B)
    return wall_ssm(wall.spec)


def hours_to_steps(hours: float, dt: float) -> int:
    return int(round(hours * 3600.0 / dt))


def scenario_inputs(cfg: ScenarioConfig) -> TimeSeriesFrame:
    steps = hours_to_steps(cfg.total_hours, cfg.dt)
    if cfg.input_csv:
        frame = read_frame(cfg.input_csv)
        if "T_ext" not in frame.channels:
            raise ConfigError(f"[weather] input_csv: {cfg.input_csv} lacks a T_ext column")
        if abs(frame.dt - cfg.dt) > 1e-6 * cfg.dt:
            raise ConfigError(f"[weather] input_csv: timestep {frame.dt} s differs from dt {cfg.dt} s")
        if len(frame) < steps:
            raise ConfigError(f"[weather] input_csv: {len(frame)} rows, scenario needs {steps}")
        return frame.window(0, steps).select(("T_ext",))
    return generate_weather(cfg.weather, steps, cfg.dt)


def source_model(cfg: ScenarioConfig) -> DiscreteSSM:
    return discretize(continuous_model(cfg.source), cfg.dt)


def simulate_source(cfg: ScenarioConfig, inputs: TimeSeriesFrame) -> TimeSeriesFrame:
    ssm = source_model(cfg)
    x0 = None if cfg.initial_state is None else np.asarray(cfg.initial_state)
    return rollout(ssm, x0, inputs).select(ssm.state_names)


def simulate_target(cfg: ScenarioConfig, inputs: TimeSeriesFrame) -> TimeSeriesFrame:
    """Clean target measurements for the scenario."""
    if cfg.target_model == "csv":
        frame = read_frame(cfg.target_csv)
        missing = [c for c in STATE_CHANNELS if c not in frame.channels]
        if missing:
            raise ConfigError(f"[target] csv: {cfg.target_csv} lacks columns {missing}")
        if len(frame) < len(inputs):
            raise ConfigError(f"[target] csv: {len(frame)} rows, scenario needs {len(inputs)}")
        return frame.window(0, len(inputs)).select(STATE_CHANNELS)
    if cfg.target_model == "ssm":
        ssm = discretize(continuous_model(cfg.target), cfg.dt)
        x0 = None if cfg.initial_state is None else np.asarray(cfg.initial_state)
        return rollout(ssm, x0, inputs).select(ssm.state_names)
    fd = FdWallConfig(wall=cfg.target.spec, cells=cfg.fd_cells,
                      sensor_depths=tuple(cfg.fd_sensor_depths), substeps=cfg.fd_substeps,
                      sensor_names=STATE_CHANNELS)
    x0 = None if cfg.initial_state is None else float(np.mean(cfg.initial_state))
    return fd_simulate(fd, inputs, x0)


def noise_seed(cfg: ScenarioConfig) -> int:
    return cfg.noise.seed if cfg.noise is not None and cfg.noise.seed is not None else cfg.seed + 1


@dataclass(frozen=True)
class SimulatedData:
    inputs: TimeSeriesFrame
    source: TimeSeriesFrame
    target_clean: TimeSeriesFrame
    target: TimeSeriesFrame


def simulate(cfg: ScenarioConfig) -> SimulatedData:
    with _stage("inputs"):
        inputs = scenario_inputs(cfg)
    with _stage("source simulation"):
        src = simulate_source(cfg, inputs)
    with _stage("target simulation"):
        clean = simulate_target(cfg, inputs)
        tgt = clean
        if cfg.noise is not None:
            tgt = add_noise(clean, cfg.noise.mean, cfg.noise.sd, noise_seed(cfg))
    return SimulatedData(inputs=inputs, source=src, target_clean=clean, target=tgt)


def target_subspace(method: str, centered: rom.CenteredFrame, d: int) -> rom.Subspace:
    if method == "pod":
        return rom.pod(centered, d)
    if method == "dmd":
        return rom.dmd(centered, d)
    raise ConfigError(f"[experiment] rom: unknown method {method!r}")


@dataclass(frozen=True)
class TransferReport:
    """Everything one transfer run produces."""

    config: ScenarioConfig
    data: SimulatedData
    model: align.AlignmentModel
    train: align.ForecastResult
    forecast: align.ForecastResult
    metrics: dict
    embedded_residual: dict
    notes: tuple

    @property
    def improved(self) -> bool:
        m = self.metrics["forecast"]
        return m["post"].cv_rmse < m["pre"].cv_rmse


def _score(result: align.ForecastResult, truth: TimeSeriesFrame, window: str, channel="T_ext1"):
    t = truth.column(channel)
    return {"pre": metrics.evaluate(t, result.pre_aligned.column(channel), channel, window),
            "post": metrics.evaluate(t, result.aligned.column(channel), channel, window)}


def forecast_pipeline(cfg: ScenarioConfig, horizon: int | None = None) -> TransferReport:
    """Run one transfer scenario.

    ``horizon`` (hours) overrides ``cfg.forecast_hours``.  Metrics are
    computed on T_ext1 against the clean target; the alignment itself only
    sees the (possibly noisy) training window.
    """
    if horizon is not None:
        cfg = replace(cfg, forecast_hours=int(horizon))
    data = simulate(cfg)
    n_train = hours_to_steps(cfg.train_hours, cfg.dt)
    n_total = hours_to_steps(cfg.total_hours, cfg.dt)
    d = cfg.rank or cfg.n_states
    notes = []
    with _stage("source subspace"):
        v_s = source_subspace(continuous_model(cfg.source))
        if d < v_s.dim:
            v_s = rom.Subspace(basis=v_s.basis[:, :d], eigenvalues=v_s.eigenvalues[:d],
                               orthonormal=v_s.orthonormal, origin="physics")
    src_train = data.source.window(0, n_train)
    tgt_train = data.target.window(0, n_train)
    with _stage("target subspace"):
        v_t = target_subspace(cfg.rom, rom.center(tgt_train), d)
    with _stage("alignment"):
        model = align.fit(cfg.alignment, src_train, tgt_train, v_s, v_t)
    with _stage("forecast"):
        src_test = data.source.window(n_train, n_total)
        train_res = align.forecast_result(model, src_train, tgt_train)
        fc_res = align.forecast_result(model, src_test, data.target_clean.window(n_train, n_total))
        views = align.embedded_views(model, src_test, data.target_clean.window(n_train, n_total))
    with _stage("metrics"):
        scores = {"train": _score(train_res, data.target_clean.window(0, n_train), "train"),
                  "forecast": _score(fc_res, fc_res.target, "forecast")}
        emb = {"embedded": metrics.rms(views["target"], views["aligned"]),
               "lifted": metrics.rms(fc_res.target.values, fc_res.aligned.values)}
    if (cfg.alignment == "bergman" and d == cfg.n_states and v_s.orthonormal and v_t.orthonormal):
        notes.append("bergman with full-rank orthonormal bases: V_s M V_t^T = I, so the aligned "
                     "series equals the source series re-centred on the target training mean")
    if cfg.noise is not None:
        clean = data.target_clean.window(n_train, n_total)
        scores["noise_rms"] = {
            "measurement": metrics.rms(data.target.window(n_train, n_total).values, clean.values),
            "aligned": metrics.rms(fc_res.aligned.values, clean.values)}
    return TransferReport(config=cfg, data=data, model=model, train=train_res, forecast=fc_res,
                          metrics=scores, embedded_residual=emb, notes=tuple(notes))


def metric_rows(report: TransferReport) -> list[dict]:
    rows = []
    for window in ("train", "forecast"):
        pre, post = report.metrics[window]["pre"], report.metrics[window]["post"]
        rows.append({
            "window": window, "channel": pre.channel,
            "alignment": report.config.alignment, "rom": report.config.rom,
            "cv_rmse_pre": pre.cv_rmse, "cv_rmse_post": post.cv_rmse,
            "nmbe_pre": pre.nmbe, "nmbe_post": post.nmbe,
            "ashrae_pre": pre.passes_ashrae, "ashrae_post": post.passes_ashrae,
            "improved": post.cv_rmse < pre.cv_rmse,
        })
    return rows
