"""Matplotlib report figures for single runs and controller comparisons."""

from __future__ import annotations

from pathlib import Path as FsPath
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from poptrack.sim import RunLog  # noqa: E402
from poptrack.trajectory import Path  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 120,
}
COLORS = {"pid": "tab:red", "pure_pursuit": "tab:green", "stanley": "tab:orange", "pop": "tab:blue"}
LABELS = {"pid": "PID", "pure_pursuit": "Pure-Pursuit", "stanley": "Stanley", "pop": "POP"}


def _label(name: str) -> str:
    base = name.split("#")[0]
    return LABELS.get(base, name) + name[len(base):]


def _color(name: str) -> str | None:
    return COLORS.get(name.split("#")[0])


def _save(fig, filename: str | FsPath) -> None:
    # No timestamp metadata, so repeated runs produce identical files.
    fig.savefig(filename, metadata={"Software": None})
    plt.close(fig)


def plot_run(log: RunLog, path: Path, filename: str | FsPath) -> None:
    """Driven path over the reference, plus steering and crosstrack traces."""
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=(8, 7), constrained_layout=True)
        grid = fig.add_gridspec(3, 1, height_ratios=[3, 1, 1])
        ax_map = fig.add_subplot(grid[0])
        ax_map.plot(path.points[:, 0], path.points[:, 1], color="0.6", ls="--", label="reference")
        ax_map.plot(log.column("x"), log.column("y"), color=_color(log.controller), label=_label(log.controller))
        ax_map.set_aspect("equal", adjustable="datalim")
        ax_map.set_xlabel("x [m]")
        ax_map.set_ylabel("y [m]")
        ax_map.legend(loc="best")

        t = log.column("t")
        ax_steer = fig.add_subplot(grid[1])
        ax_steer.plot(t, np.degrees(log.column("steering")), color=_color(log.controller))
        ax_steer.set_ylabel("steering [deg]")
        ax_ct = fig.add_subplot(grid[2], sharex=ax_steer)
        ax_ct.plot(t, log.column("crosstrack"), color=_color(log.controller))
        ax_ct.set_ylabel("crosstrack [m]")
        ax_ct.set_xlabel("t [s]")
        _save(fig, filename)


def plot_comparison(logs: Sequence[RunLog], names: Sequence[str], path: Path, filename: str | FsPath) -> None:
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=(9, 8), constrained_layout=True)
        grid = fig.add_gridspec(3, 1, height_ratios=[3, 1, 1])
        ax_map = fig.add_subplot(grid[0])
        ax_map.plot(path.points[:, 0], path.points[:, 1], color="0.6", ls="--", label="reference")
        ax_steer = fig.add_subplot(grid[1])
        ax_ct = fig.add_subplot(grid[2], sharex=ax_steer)
        for log, name in zip(logs, names):
            color, label = _color(name), _label(name)
            t = log.column("t")
            ax_map.plot(log.column("x"), log.column("y"), color=color, label=label)
            ax_steer.plot(t, np.degrees(log.column("steering")), color=color, label=label)
            ax_ct.plot(t, log.column("crosstrack"), color=color, label=label)
        ax_map.set_aspect("equal", adjustable="datalim")
        ax_map.set_xlabel("x [m]")
        ax_map.set_ylabel("y [m]")
        ax_map.legend(loc="best")
        ax_steer.set_ylabel("steering [deg]")
        ax_ct.set_ylabel("crosstrack [m]")
        ax_ct.set_xlabel("t [s]")
        _save(fig, filename)
