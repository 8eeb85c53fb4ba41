"""Command-line entry point.

Exit codes: 0 success, 1 invalid input (arguments, config, CSV), 2 numerical
failure inside a pipeline stage.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, align, rom
from .io import ConfigError, ScenarioConfig, format_float, load_config, write_frame, write_table
from .numerics import NumericsError
from .pipeline import (PipelineError, TransferReport, continuous_model, forecast_pipeline,
                       hours_to_steps, metric_rows, simulate, source_model)
from .sim import TimeSeriesFrame

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _stack(parts, channels=None) -> TimeSeriesFrame:
    first = parts[0]
    return TimeSeriesFrame(dt=first.dt, channels=channels or first.channels,
                           values=np.vstack([p.values for p in parts]), start_index=first.start_index)


def cmd_simulate(args) -> int:
    cfg = _scenario(args)
    data = simulate(cfg)
    out = Path(cfg.out_dir)
    write_frame(data.inputs, out / "inputs.csv")
    write_frame(data.source, out / "source.csv")
    write_frame(data.target, out / "target.csv")
    if cfg.noise is not None:
        write_frame(data.target_clean, out / "target_clean.csv")
    print(f"wrote {len(data.source)} steps to {out}")
    return EXIT_OK


def _error_frame(report: TransferReport) -> TimeSeriesFrame:
    parts = []
    for res in (report.train, report.forecast):
        pre, post = res.error_prealigned, res.error_postaligned
        parts.append(TimeSeriesFrame(
            dt=pre.dt, start_index=pre.start_index,
            channels=tuple(f"pre_{c}" for c in pre.channels) + tuple(f"post_{c}" for c in post.channels),
            values=np.hstack([pre.values, post.values])))
    return _stack(parts)


def report_markdown(report: TransferReport) -> str:
    cfg = report.config
    lines = ["# Transfer report", "",
             f"- source: {cfg.source.label}",
             f"- target: {cfg.target.label} ({cfg.target_model})",
             f"- reduced model: {cfg.rom}, alignment: {cfg.alignment}",
             f"- training: {cfg.train_hours} h, forecast: {cfg.forecast_hours} h, seed: {cfg.seed}",
             "",
             "| window | CV(RMSE) pre % | CV(RMSE) post % | NMBE pre % | NMBE post % | ASHRAE post |",
             "|---|---|---|---|---|---|"]
    for r in metric_rows(report):
        lines.append(f"| {r['window']} | {r['cv_rmse_pre']:.3f} | {r['cv_rmse_post']:.3f} | "
                     f"{r['nmbe_pre']:.3f} | {r['nmbe_post']:.3f} | "
                     f"{'pass' if r['ashrae_post'] else 'fail'} |")
    lines += ["", f"Forecast improved by alignment: {'yes' if report.improved else 'no'}",
              f"Embedded-space forecast RMS: {format_float(report.embedded_residual['embedded'])} K",
              f"Lifted forecast RMS: {format_float(report.embedded_residual['lifted'])} K"]
    if "noise_rms" in report.metrics:
        n = report.metrics["noise_rms"]
        lines += [f"Noisy measurement RMS vs clean target: {format_float(n['measurement'])} K",
                  f"Aligned forecast RMS vs clean target: {format_float(n['aligned'])} K"]
    for note in report.notes:
        lines += ["", f"Note: {note}"]
    return "\n".join(lines) + "\n"


def cmd_transfer(args) -> int:
    cfg = _scenario(args)
    report = forecast_pipeline(cfg)
    out = Path(cfg.out_dir)
    write_frame(_stack([report.train.aligned, report.forecast.aligned]), out / "aligned.csv")
    write_frame(_stack([report.train.pre_aligned, report.forecast.pre_aligned]), out / "pre_aligned.csv")
    write_frame(_stack([report.train.target, report.forecast.target]), out / "target.csv")
    write_frame(_error_frame(report), out / "error.csv")
    write_table(metric_rows(report), out / "metrics.csv")
    (out / "report.md").write_text(report_markdown(report), encoding="utf-8", newline="\n")
    (out / "model.txt").write_text(align.dumps_model(report.model), encoding="utf-8", newline="\n")
    if cfg.figures:
        from .plots import embedded_figure, transfer_figure
        transfer_figure(report, out / "transfer.svg")
        embedded_figure(report, out / "embedded.svg")
    m = report.metrics["forecast"]
    print(f"forecast CV(RMSE) {m['pre'].cv_rmse:.3f}% -> {m['post'].cv_rmse:.3f}%, "
          f"NMBE {m['pre'].nmbe:.3f}% -> {m['post'].nmbe:.3f}%")
    for note in report.notes:
        print(f"note: {note}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .reproduce import cells, run_grid, write_grid

    cells(args.grid or "")
    cfg = _scenario(args)
    rows = run_grid(args.grid, cfg, workers=args.jobs)
    out = Path(cfg.out_dir)
    write_grid(args.grid, rows, out, figures=cfg.figures)
    for r in rows:
        print(f"{r['source']:g}->{r['target']:g} {r['train_hours']}h {r['alignment']}: "
              f"{r['cv_rmse_pre']:.2f}% -> {r['cv_rmse_post']:.2f}%")
    return EXIT_OK


def _discrete_log(phi: np.ndarray, dt: float) -> np.ndarray:
    """Continuous generator ``log(Phi) / dt`` (principal branch).

    Complex-conjugate pairs are fine; eigenvalues on the closed negative
    real axis have no real logarithm and are refused.
    """
    from scipy.linalg import logm

    lam = np.linalg.eigvals(phi)
    if np.any((np.abs(lam.imag) <= 1e-12 * np.abs(lam).max()) & (lam.real <= 0)):
        raise NumericsError("operator has an eigenvalue on the non-positive real axis; no real logarithm")
    g = logm(phi)
    if np.max(np.abs(np.imag(g))) > 1e-9:
        raise NumericsError("matrix logarithm is not real")
    return np.real(g) / dt


def portraits_for(cfg: ScenarioConfig):
    """Portraits requested by ``cfg.portrait`` in physics, dmd order."""
    from .pipeline import _stage
    from .portrait import portrait
    from .thermal import source_subspace

    req = cfg.portrait
    out = []
    if req.operator in ("physics", "both"):
        with _stage("physics portrait"):
            ssm = continuous_model(cfg.source)
            disc = source_model(cfg)
            out.append(portrait("physics", req, disc.Phi, a=ssm.A, dt=cfg.dt,
                                basis=source_subspace(ssm).basis))
    if req.operator in ("dmd", "both"):
        data = simulate(cfg)
        with _stage("dmd portrait"):
            n_train = hours_to_steps(cfg.train_hours, cfg.dt)
            centered = rom.center(data.target.window(0, n_train))
            phi = rom.dmd_operator(centered)
            a = _discrete_log(phi, cfg.dt) if req.field == "continuous" else None
            try:
                basis = rom.dmd(centered, cfg.n_states).basis
            except rom.RomError:
                basis = None  # complex modes: no real principal directions to draw
            out.append(portrait("dmd", req, phi, a=a, dt=cfg.dt, basis=basis))
    return out


def cmd_portrait(args) -> int:
    from .portrait import field_rows, principal_angle_deg, trajectory_rows

    cfg = _scenario(args)
    if cfg.n_states != 2:
        raise ConfigError("[portrait] operator: portraits need a two-state model")
    ps = portraits_for(cfg)
    out = Path(cfg.out_dir)
    write_table([r for p in ps for r in field_rows(p)], out / "field.csv")
    write_table([r for p in ps for r in trajectory_rows(p, cfg.dt)], out / "trajectories.csv")
    if cfg.figures:
        from .plots import portrait_figure
        portrait_figure(ps, out / "portrait.svg")
    if len(ps) == 2 and ps[1].basis is not None:
        ang = principal_angle_deg(ps[0].basis[:, 0], ps[1].basis[:, 0])
        print(f"leading-direction angle physics vs dmd: {ang:.3f} deg")
    print(f"wrote {len(ps)} portrait(s) to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario config file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    common.add_argument("--seed", metavar="N", type=int, help="seed for weather and noise")

    p = _Parser(prog="wallsda", description="Wall thermal models with subspace-aligned transfer.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="write source, target and input series")
    sub.add_parser("transfer", parents=[common], help="fit, forecast and score one scenario")
    r = sub.add_parser("reproduce", parents=[common], help="run a named experiment grid")
    r.add_argument("--grid", metavar="NAME", help="calibration, training-size or cross-thickness")
    r.add_argument("--jobs", metavar="N", type=int, default=1, help="cells run in parallel")
    sub.add_parser("portrait", parents=[common], help="vector fields and free trajectories")
    return p


COMMANDS = {"simulate": cmd_simulate, "transfer": cmd_transfer,
            "reproduce": cmd_reproduce, "portrait": cmd_portrait}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("wallsda: a subcommand is required (simulate, transfer, reproduce, portrait)")
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("wallsda reproduce: --jobs must be >= 1")
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PipelineError, NumericsError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
