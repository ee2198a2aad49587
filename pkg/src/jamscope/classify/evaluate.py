"""Accuracy reports, confusion matrices and the softmax-threshold novelty filter."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..signals import CLOSED_SET

CLASS_NAMES = tuple(c.value for c in CLOSED_SET)
NOVEL_THRESHOLD = 0.95


@dataclass
class EvalReport:
    class_names: tuple
    overall: float
    per_class: list  # None where a class has no test samples
    confusion: np.ndarray  # rows = truth, columns = prediction
    group_key: str = "none"
    groups: dict = field(default_factory=dict)  # group value -> (accuracy, count)

    @property
    def n_samples(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "n_samples": self.n_samples,
            "overall_accuracy": self.overall,
            "per_class_accuracy": dict(zip(self.class_names, self.per_class)),
            "confusion": self.confusion.tolist(),
            "group_key": self.group_key,
            "groups": [{"value": k, "accuracy": a, "count": n} for k, (a, n) in sorted(self.groups.items())],
        }

    def write(self, out_dir, extra: Optional[dict] = None) -> dict:
        """Write report.json plus curves.csv, per_class.csv and confusion.csv; return the paths."""
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        doc = self.to_dict()
        if extra:
            doc.update(extra)
        paths = {k: out / f"{k}.csv" for k in ("curves", "per_class", "confusion")}
        paths["report"] = out / "report.json"
        paths["report"].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        with open(paths["curves"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self.group_key, "accuracy", "count"])
            for k, (a, n) in sorted(self.groups.items()):
                w.writerow([_fmt(k), _fmt(a), n])
        with open(paths["per_class"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["class", "accuracy", "count"])
            for name, a, n in zip(self.class_names, self.per_class, self.confusion.sum(axis=1)):
                w.writerow([name, "" if a is None else _fmt(a), int(n)])
        with open(paths["confusion"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["truth\\pred", *self.class_names])
            for name, row in zip(self.class_names, self.confusion):
                w.writerow([name, *(int(v) for v in row)])
        return paths


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def report_from_predictions(truth, pred, groups=None, group_key="none", class_names=CLASS_NAMES) -> EvalReport:
    truth = np.asarray(truth, dtype=int)
    pred = np.asarray(pred, dtype=int)
    if truth.size == 0:
        raise ValueError("cannot evaluate an empty test set")
    k = len(class_names)
    conf = np.zeros((k, k), dtype=int)
    np.add.at(conf, (truth, pred), 1)
    correct = truth == pred
    per_class = [float(conf[i, i] / conf[i].sum()) if conf[i].sum() else None for i in range(k)]
    by_group = {}
    if group_key != "none":
        g = np.asarray(groups, dtype=float)
        for value in np.unique(g):
            sel = g == value
            by_group[float(value)] = (float(correct[sel].mean()), int(sel.sum()))
    return EvalReport(tuple(class_names), float(correct.mean()), per_class, conf, group_key, by_group)


def evaluate(model, data, group_key="none", class_names=CLASS_NAMES) -> EvalReport:
    """Score ``model`` on a labelled set exposing ``images``, ``labels``, ``snr_db``, ``jsr_db``."""
    if group_key not in ("snr", "jsr", "none"):
        raise ValueError(f"group_key must be snr, jsr or none, not {group_key!r}")
    if len(data.labels) == 0:
        raise ValueError("cannot evaluate an empty test set")
    groups = None if group_key == "none" else getattr(data, f"{group_key}_db")
    return report_from_predictions(data.labels, model.predict(data.images), groups, group_key, class_names)


@dataclass(frozen=True)
class Novelty:
    novel: bool
    label: Optional[int] = None  # argmax class when known
    confidence: float = math.nan

    @property
    def class_name(self):
        return None if self.novel else CLASS_NAMES[self.label]


def novelty_from_proba(probs, threshold=NOVEL_THRESHOLD) -> list:
    probs = np.atleast_2d(probs)
    top = probs.max(axis=1)
    arg = probs.argmax(axis=1)
    return [Novelty(True, None, float(c)) if c < threshold else Novelty(False, int(a), float(c))
            for c, a in zip(top, arg)]


def detect_novel(model, image, threshold=NOVEL_THRESHOLD) -> Novelty:
    """Novel iff the largest softmax entry is below ``threshold``."""
    return novelty_from_proba(model.predict_proba(np.asarray(image)[None]), threshold)[0]


def novel_flag_rate(model, images, threshold=NOVEL_THRESHOLD) -> float:
    if len(images) == 0:
        raise ValueError("no images")
    return float(np.mean(model.predict_proba(images).max(axis=1) < threshold))
