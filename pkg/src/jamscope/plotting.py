"""Report figures rendered straight to PNG files (Agg backend, no display needed).

The CSV files written next to each figure are the data contract; the figures
are a convenience view of the same numbers.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}  # keep PNG bytes independent of the matplotlib build
_AXIS_LABEL = {"snr": "SNR (dB)", "jsr": "JSR (dB)"}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def accuracy_curve(series: dict, group_key: str, path, title=None) -> Path:
    """One line per entry of ``series``: name -> {group value: accuracy}."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for name, points in series.items():
        xs = sorted(points)
        ax.plot(xs, [100 * points[x] for x in xs], marker="o", label=name)
    ax.set_xlabel(_AXIS_LABEL.get(group_key, group_key))
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 102)
    ax.grid(alpha=0.3)
    if len(series) > 1:
        ax.legend()
    if title:
        ax.set_title(title)
    return _save(fig, path)


def confusion_heatmap(confusion, class_names, path, title=None) -> Path:
    """Row-normalized confusion matrix with raw counts printed in each cell."""
    conf = np.asarray(confusion)
    totals = conf.sum(axis=1, keepdims=True)
    frac = np.divide(conf, totals, out=np.zeros(conf.shape), where=totals > 0)
    k = len(class_names)
    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * k, 0.8 + 0.55 * k))
    im = ax.imshow(frac, cmap="Blues", vmin=0, vmax=1)
    for i in range(k):
        for j in range(k):
            if conf[i, j]:
                ax.text(j, i, int(conf[i, j]), ha="center", va="center", fontsize=7,
                        color="white" if frac[i, j] > 0.5 else "black")
    ax.set_xticks(range(k), class_names, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(k), class_names, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    fig.colorbar(im, ax=ax, fraction=0.046)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def per_class_bars(per_class, class_names, path, title=None) -> Path:
    acc = [np.nan if a is None else 100 * a for a in per_class]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(acc)), acc, color="tab:blue")
    ax.set_xticks(range(len(acc)), class_names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 102)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def training_history(history: list, path) -> Path:
    """Loss and accuracy per epoch from a list of cnn_train history rows."""
    epochs = [h["epoch"] for h in history]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(epochs, [h["train_loss"] for h in history], label="train")
    ax1.plot(epochs, [h["val_loss"] for h in history], label="validation")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("cross-entropy")
    ax1.legend()
    ax2.plot(epochs, [100 * h["train_acc"] for h in history], label="train")
    ax2.plot(epochs, [100 * h["val_acc"] for h in history], label="validation")
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("accuracy (%)")
    return _save(fig, path)


def spectrogram(image, path, extent=None, title=None) -> Path:
    """Grayscale spectrogram image with frequency increasing upward."""
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.imshow(image, cmap="gray", origin="lower", aspect="auto", extent=extent)
    ax.set_xlabel("time (us)" if extent else "time bin")
    ax.set_ylabel("frequency (kHz)" if extent else "frequency bin")
    if title:
        ax.set_title(title)
    return _save(fig, path)
