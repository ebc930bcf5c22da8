"""Static PNG figures written next to the CSV artifacts.

Figures are a convenience view; the CSV files are the contract. The Agg
backend is forced so nothing ever needs a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no software/date stamps so reruns produce the same bytes
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def loss_curve(path, losses: Sequence[float], title: str = "training loss"):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(1, len(losses) + 1), losses, lw=1.5)
    ax.set_xlabel("epoch")
    ax.set_ylabel("pinball loss")
    ax.set_yscale("log" if len(losses) and min(losses) > 0 else "linear")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def forecasts(path, samples, pred_normalized: np.ndarray, rate_hz: float, max_cases: int = 6):
    """Truth against the q10..q90 band and median, in physical units."""
    n = min(max_cases, len(samples))
    cols = 2 if n > 1 else 1
    rows = int(np.ceil(n / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(6 * cols, 3 * rows), squeeze=False)
    for ax, s, p in zip(axes.ravel(), samples, pred_normalized):
        k = s.history_steps
        t_hist = (np.arange(-k, 1)) / rate_hz
        t_fut = np.arange(1, s.horizon + 1) / rate_hz
        phys = s.denormalize(p)
        ax.plot(t_hist, s.denormalize(s.y_hist), color="0.4", lw=1, label="history")
        ax.plot(t_fut, s.denormalize(s.y_future), color="k", lw=1, label="truth")
        ax.fill_between(t_fut, phys[:, 0], phys[:, -1], color="C0", alpha=0.3, label="q10-q90")
        ax.plot(t_fut, phys[:, p.shape[1] // 2], color="C0", lw=1.2, label="median")
        ax.set_title(s.case_id, fontsize=9)
        ax.set_xlabel("seconds after forecast start")
    for ax in axes.ravel()[n:]:
        ax.axis("off")
    axes.ravel()[0].legend(fontsize=7)
    return _save(fig, path)


def convergence(path, objective: Sequence[float], best_so_far: Sequence[float]):
    n = np.arange(1, len(objective) + 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(n, objective, s=12, color="0.5", label="trial")
    ax.step(n, best_so_far, where="post", color="C3", label="best so far")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def _sweep_axes(labels):
    # clean is drawn at the right edge, past the highest SNR
    numeric = [float(l) for l in labels if l != "clean"]
    top = max(numeric) if numeric else 0.0
    return [top + 10.0 if l == "clean" else float(l) for l in labels]


def noise_sweep(path, series: dict[str, list[tuple[str, dict]]]):
    """``series`` maps a legend name to [(snr label, metric dict), ...]."""
    keys = ("residual_mean", "residual_variance", "coverage")
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    for name, rows in series.items():
        labels = [r[0] for r in rows]
        x = _sweep_axes(labels)
        order = np.argsort(x)
        for ax, key in zip(axes, keys):
            y = np.array([r[1][key] for r in rows])
            ax.plot(np.array(x)[order], y[order], marker="o", label=name)
    for ax, key in zip(axes, keys):
        ax.set_xlabel("SNR (dB); rightmost point is clean")
        ax.set_title(key)
        ax.grid(alpha=0.3)
    axes[0].legend()
    return _save(fig, path)


def comparison(path, header: Sequence[str], rows: Sequence[Sequence]):
    """Grouped bars of every non-rank column."""
    cols = [i for i, h in enumerate(header) if i > 0 and not h.endswith(":rank")]
    models = [r[0] for r in rows]
    fig, axes = plt.subplots(1, len(cols), figsize=(3.2 * len(cols), 3.6), squeeze=False)
    for ax, c in zip(axes[0], cols):
        ax.bar(np.arange(len(models)), [float(r[c]) for r in rows], color="C0")
        ax.set_xticks(np.arange(len(models)))
        ax.set_xticklabels(models, rotation=60, fontsize=7)
        ax.set_title(header[c], fontsize=8)
    return _save(fig, path)
