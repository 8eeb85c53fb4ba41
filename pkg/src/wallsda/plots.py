"""Figure rendering for reports.  Everything is written as SVG with the Agg
backend; the svg hash salt and date metadata are pinned so reruns produce
byte-identical files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "wallsda",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.0,
    "figure.dpi": 100,
}

COLORS = {"target": "0.2", "pre": "tab:blue", "aligned": "tab:red", "source": "tab:blue",
          "physics": "tab:blue", "dmd": "tab:orange", "printed": "0.6"}


def save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def transfer_figure(report, path, channel: str = "T_ext1"):
    """Target, raw SSM and aligned series over the training and forecast
    windows, with pre/post error traces underneath."""
    with plt.rc_context(STYLE):
        fig, (ax, ax_err) = plt.subplots(2, 1, figsize=(8, 5), sharex=True,
                                         gridspec_kw={"height_ratios": [2, 1]})
        tr, fc = report.train, report.forecast
        for res, style in ((tr, "-"), (fc, "--")):
            h = res.target.hours
            ax.plot(h, res.target.column(channel), color=COLORS["target"], lw=0.8)
            ax.plot(h, res.pre_aligned.column(channel), color=COLORS["pre"], lw=0.8, ls=style)
            ax.plot(h, res.aligned.column(channel), color=COLORS["aligned"], lw=0.8, ls=style)
            ax_err.plot(h, res.error_prealigned.column(channel), color=COLORS["pre"], lw=0.6)
            ax_err.plot(h, res.error_postaligned.column(channel), color=COLORS["aligned"], lw=0.6)
        split = fc.target.hours[0]
        for a in (ax, ax_err):
            a.axvline(split, color="0.5", lw=0.8, ls=":")
        ax.plot([], [], color=COLORS["target"], label="target")
        ax.plot([], [], color=COLORS["pre"], label="SSM (pre-aligned)")
        ax.plot([], [], color=COLORS["aligned"], label="aligned")
        ax.legend(loc="upper right", ncol=3)
        m = report.metrics["forecast"]
        ax.set_title(f"{channel}: forecast CV(RMSE) {m['pre'].cv_rmse:.2f}% -> {m['post'].cv_rmse:.2f}%, "
                     f"NMBE {m['pre'].nmbe:.2f}% -> {m['post'].nmbe:.2f}%")
        ax.set_ylabel(f"{channel} (°C)")
        ax_err.set_ylabel("error (°C)")
        ax_err.set_xlabel("hours")
        ax_err.axhline(0.0, color="0.7", lw=0.5)
        fig.tight_layout()
        return save(fig, path)


def embedded_figure(report, path):
    """Forecast window in the embedded coordinates and after lifting."""
    from . import align

    fc = report.forecast
    views = align.embedded_views(report.model, report.data.source.window(
        fc.target.start_index - report.data.source.start_index,
        fc.target.start_index - report.data.source.start_index + len(fc.target)), fc.target)
    with plt.rc_context(STYLE):
        fig, (ax_e, ax_l) = plt.subplots(1, 2, figsize=(8, 3.6))
        ax_e.plot(views["target"][:, 0], views["target"][:, -1], ".", ms=1.5,
                  color=COLORS["target"], label="target")
        ax_e.plot(views["aligned"][:, 0], views["aligned"][:, -1], ".", ms=1.5,
                  color=COLORS["aligned"], label="aligned")
        ax_e.set_xlabel("mode 1")
        ax_e.set_ylabel("mode 2")
        ax_e.set_title(f"embedded (rms {report.embedded_residual['embedded']:.3f})")
        ax_l.plot(fc.target.column("T_ext1"), fc.target.column("T_ext2"), ".", ms=1.5,
                  color=COLORS["target"], label="target")
        ax_l.plot(fc.aligned.column("T_ext1"), fc.aligned.column("T_ext2"), ".", ms=1.5,
                  color=COLORS["aligned"], label="aligned")
        ax_l.set_xlabel("T_ext1 (°C)")
        ax_l.set_ylabel("T_ext2 (°C)")
        ax_l.set_title(f"lifted (rms {report.embedded_residual['lifted']:.3f})")
        ax_l.legend(loc="upper left")
        fig.tight_layout()
        return save(fig, path)


def portrait_figure(portraits, path):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(portraits), figsize=(4.2 * len(portraits), 4), squeeze=False)
        for ax, p in zip(axes[0], portraits):
            v = p.velocity
            speed = np.hypot(v[:, 0], v[:, 1])
            ax.quiver(p.grid[:, 0], p.grid[:, 1], v[:, 0], v[:, 1], speed, cmap="Greys",
                      angles="xy", pivot="mid", width=0.004)
            for tr in p.trajectories:
                ax.plot(tr[:, 0], tr[:, 1], color=COLORS.get(p.label, "tab:red"), lw=1.2)
                ax.plot(tr[0, 0], tr[0, 1], "o", ms=3, color=COLORS.get(p.label, "tab:red"))
            if p.basis is not None:
                span = 0.4 * (p.grid[:, 0].max() - p.grid[:, 0].min())
                for j in range(p.basis.shape[1]):
                    b = p.basis[:, j] * span
                    ax.plot([-b[0], b[0]], [-b[1], b[1]], color="0.4", lw=0.8, ls="--")
            lo, hi = p.grid.min(axis=0), p.grid.max(axis=0)
            pad = 0.05 * (hi - lo)
            ax.set_xlim(lo[0] - pad[0], hi[0] + pad[0])
            ax.set_ylim(lo[1] - pad[1], hi[1] + pad[1])
            ax.set_xlabel("T_ext1 (°C)")
            ax.set_ylabel("T_ext2 (°C)")
            ax.set_title(p.label)
            ax.set_aspect("equal", adjustable="box")
        fig.tight_layout()
        return save(fig, path)


def grid_figure(rows, path, title: str):
    """Grouped bars: pre/post CV(RMSE) for this run next to the printed values."""
    labels = [f"{r['source']}->{r['target']}\n{r['train_hours']}h" for r in rows]
    x = np.arange(len(rows))
    w = 0.2
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.3 * len(rows)), 3.4))
        ax.bar(x - 1.5 * w, [r["cv_rmse_pre"] for r in rows], w, color=COLORS["pre"], label="SSM")
        ax.bar(x - 0.5 * w, [r["cv_rmse_post"] for r in rows], w, color=COLORS["aligned"], label="aligned")
        printed_pre = [np.nan if r["printed_pre"] == "" else r["printed_pre"] for r in rows]
        printed_post = [np.nan if r["printed_post"] == "" else r["printed_post"] for r in rows]
        ax.bar(x + 0.5 * w, printed_pre, w, color=COLORS["pre"], alpha=0.35, label="SSM (printed)")
        ax.bar(x + 1.5 * w, printed_post, w, color=COLORS["aligned"], alpha=0.35, label="aligned (printed)")
        ax.set_xticks(x)
        ax.set_xticklabels(labels)
        ax.set_ylabel("CV(RMSE) %")
        ax.set_title(title)
        ax.legend(ncol=2)
        fig.tight_layout()
        return save(fig, path)
