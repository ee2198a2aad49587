"""Seeded spectrogram corpora over SNR/JSR grids, persisted as PNG files plus a JSON manifest.

Every sample owns a 64-bit seed derived by hashing ``(master_seed, class, snr,
jsr, index, split)``; all of its randomness (signal parameters, bits, jammer
draws, channel, noise) flows from that seed, so any record can be regenerated
on its own and the corpus is identical however generation is scheduled.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from . import version_string
from .channel import apply_channel, channel_from_tag
from .signals import BAND_HI, BAND_LO, CLOSED_SET, NOVEL_SET, SignalClass, class_index, synthesize
from .tfa import WindowSpec, analytic_signal, tf_distribution, to_image

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
FULL_SNR_GRID = (-6.0, -2.0, 2.0, 6.0, 10.0)
FULL_JSR_GRID = (-5.0, 0.0, 5.0, 10.0)
SPLITS = ("train", "test")


class DatasetError(RuntimeError):
    pass


class CorruptRecordError(DatasetError):
    def __init__(self, record_id, reason):
        super().__init__(f"record {record_id}: {reason}")
        self.record_id = record_id


@dataclass(frozen=True)
class SweepConfig:
    classes: tuple = CLOSED_SET
    snr_grid_db: tuple = FULL_SNR_GRID
    jsr_grid_db: tuple = (5.0,)
    channel: str = "gaussian"
    train_per_cell: int = 20
    test_per_cell: int = 10
    master_seed: int = 0
    image_size: tuple = (64, 64)
    tf_method: str = "spwvd"
    time_window: int = 33
    lag_window: int = 129
    n_freq_bins: int = 256

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "classes", tuple(SignalClass(c) for c in self.classes))
        set_(self, "snr_grid_db", tuple(float(v) for v in self.snr_grid_db))
        set_(self, "jsr_grid_db", tuple(float(v) for v in self.jsr_grid_db))
        set_(self, "image_size", tuple(int(v) for v in self.image_size))
        if not self.classes:
            raise DatasetError("class list is empty")
        if any(c.is_novel for c in self.classes):
            raise DatasetError("novel FM classes cannot be training labels")
        if len(set(self.classes)) != len(self.classes):
            raise DatasetError("class list has duplicates")
        if not self.snr_grid_db or not self.jsr_grid_db:
            raise DatasetError("SNR and JSR grids must be non-empty")
        if len(self.snr_grid_db) > 1 and len(self.jsr_grid_db) > 1:
            raise DatasetError("only one of the SNR and JSR grids may have more than one value")
        if self.train_per_cell < 1 or self.test_per_cell < 1:
            raise DatasetError("per-cell counts must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise DatasetError("master_seed must fit in 64 bits")
        channel_from_tag(self.channel)
        self.windows  # validates window lengths

    @property
    def windows(self) -> WindowSpec:
        return WindowSpec.hamming(self.time_window, self.lag_window)

    @property
    def n_cells(self) -> int:
        return len(self.snr_grid_db) * len(self.jsr_grid_db)

    def expected_counts(self) -> dict:
        per_class = self.n_cells * len(self.classes)
        return {"train": per_class * self.train_per_cell, "test": per_class * self.test_per_cell}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classes"] = [c.value for c in self.classes]
        d["image_size"] = list(self.image_size)
        d["snr_grid_db"] = list(self.snr_grid_db)
        d["jsr_grid_db"] = list(self.jsr_grid_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        return cls(**d)


def child_seed(master_seed, cls, snr_db, jsr_db, index, split) -> int:
    key = json.dumps([int(master_seed), SignalClass(cls).value, float(snr_db), float(jsr_db), int(index), split])
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "little")


def record_id(split, cls, snr_db, jsr_db, index) -> str:
    return f"{split}-{SignalClass(cls).value}-snr{snr_db:+g}-jsr{jsr_db:+g}-{index:05d}"


def spec_to_dict(spec):
    if spec is None:
        return None
    if is_dataclass(spec):
        return {"type": type(spec).__name__, **{k: spec_to_dict(v) for k, v in asdict(spec).items()}}
    if isinstance(spec, dict):
        return {k: spec_to_dict(v) for k, v in spec.items()}
    return spec


def spec_digest(syn) -> str:
    doc = {"class": syn.cls.value, "signal": spec_to_dict(syn.signal_spec), "jammer": spec_to_dict(syn.jammer_spec)}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def render_sample(cls, snr_db, jsr_db, seed, cfg: SweepConfig):
    """Synthesize, mix, pass through the channel and render one spectrogram image."""
    rng = np.random.default_rng(seed)
    syn = synthesize(cls, jsr_db, rng)
    noisy = apply_channel(syn.series, channel_from_tag(cfg.channel), snr_db, int(rng.integers(2**63)))
    grid = tf_distribution(analytic_signal(noisy), cfg.tf_method, cfg.windows, cfg.n_freq_bins)
    return to_image(grid, *cfg.image_size), syn


@dataclass
class DatasetManifest:
    config: SweepConfig
    records: list
    path: Optional[Path] = None
    generator: str = ""

    def counts(self) -> dict:
        out = {s: 0 for s in SPLITS}
        for r in self.records:
            out[r["split"]] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "generator": self.generator,
            "config": self.config.to_dict(),
            # Random carrier and jammer frequencies are drawn inside this band, as fractions of fs.
            "freq_band_fs": [BAND_LO, BAND_HI],
            "counts": self.counts(),
            "records": self.records,
        }


def _jobs(cfg: SweepConfig):
    for split, per_cell in (("train", cfg.train_per_cell), ("test", cfg.test_per_cell)):
        for cls in cfg.classes:
            for snr in cfg.snr_grid_db:
                for jsr in cfg.jsr_grid_db:
                    for i in range(per_cell):
                        yield split, cls, snr, jsr, i


def _build(args):
    cfg, split, cls, snr, jsr, i = args
    seed = child_seed(cfg.master_seed, cls, snr, jsr, i, split)
    image, syn = render_sample(cls, snr, jsr, seed, cfg)
    rid = record_id(split, cls, snr, jsr, i)
    record = {
        "id": rid,
        "label": cls.value,
        "label_index": class_index(cls),
        "snr_db": snr,
        "jsr_db": jsr,
        "jammed": cls.is_abnormal,
        "channel": cfg.channel,
        "seed": seed,
        "spec_digest": spec_digest(syn),
        "file": f"images/{rid}.png",
        "split": split,
    }
    return record, image


def _png_bytes(image: np.ndarray) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(image, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def generate_dataset(cfg: SweepConfig, out_dir, workers: int = 1) -> DatasetManifest:
    """Render every (class, cell, index, split) sample into ``out_dir`` and write manifest.json."""
    out = Path(out_dir)
    jobs = [(cfg, *j) for j in _jobs(cfg)]
    seeds = [child_seed(cfg.master_seed, c, s, j, i, sp) for _, sp, c, s, j, i in jobs]
    if len(set(seeds)) != len(seeds):
        raise DatasetError("child seed collision")  # 64-bit hash; should never happen

    records = []
    try:
        (out / "images").mkdir(parents=True, exist_ok=True)
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                results = pool.map(_build, jobs, chunksize=16)
                for record, image in results:
                    records.append(_write_image(out, record, image))
        else:
            for job in jobs:
                records.append(_write_image(out, *_build(job)))
    except OSError as exc:
        partial = DatasetManifest(cfg, sorted(records, key=lambda r: r["id"]), generator=version_string())
        doc = partial.to_dict()
        doc["partial"] = True
        try:
            (out / "manifest.partial.json").write_text(json.dumps(doc, indent=1, sort_keys=True))
        except OSError:
            pass
        raise DatasetError(f"dataset generation aborted after {len(records)} records: {exc}") from exc

    records.sort(key=lambda r: r["id"])
    manifest = DatasetManifest(cfg, records, out / "manifest.json", version_string())
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=1, sort_keys=True) + "\n")
    return manifest


def _write_image(out: Path, record, image):
    data = _png_bytes(image)
    (out / record["file"]).write_bytes(data)
    record["sha256"] = hashlib.sha256(data).hexdigest()
    return record


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("format_version") != FORMAT_VERSION:
        raise DatasetError(f"{path}: unsupported manifest version {doc.get('format_version')}")
    if doc.get("partial"):
        raise DatasetError(f"{path}: manifest is partial (generation was aborted)")
    return DatasetManifest(SweepConfig.from_dict(doc["config"]), doc["records"], path, doc.get("generator", ""))


@dataclass
class Dataset:
    """Decoded images in [0, 1] with labels and grid coordinates."""

    images: np.ndarray  # (n, h, w) float32
    labels: np.ndarray
    snr_db: np.ndarray
    jsr_db: np.ndarray
    split: np.ndarray
    ids: list = field(default_factory=list)

    def __len__(self):
        return len(self.labels)

    def subset(self, mask) -> "Dataset":
        mask = np.asarray(mask)
        idx = np.flatnonzero(mask) if mask.dtype == bool else mask
        return Dataset(self.images[idx], self.labels[idx], self.snr_db[idx], self.jsr_db[idx],
                       self.split[idx], [self.ids[i] for i in idx])

    @property
    def train(self) -> "Dataset":
        return self.subset(self.split == "train")

    @property
    def test(self) -> "Dataset":
        return self.subset(self.split == "test")

    def class_counts(self, n_classes=len(CLOSED_SET)) -> np.ndarray:
        return np.bincount(self.labels[self.labels >= 0], minlength=n_classes)


def load_dataset(manifest_path, split: Optional[str] = None) -> Dataset:
    manifest = read_manifest(manifest_path)
    root = Path(manifest_path).parent
    records = [r for r in manifest.records if split is None or r["split"] == split]
    h, w = manifest.config.image_size
    images = np.zeros((len(records), h, w), dtype=np.float32)
    for i, r in enumerate(records):
        path = root / r["file"]
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise CorruptRecordError(r["id"], f"cannot read {path}: {exc.strerror}") from exc
        if hashlib.sha256(data).hexdigest() != r.get("sha256"):
            raise CorruptRecordError(r["id"], "checksum mismatch")
        with Image.open(path) as im:
            arr = np.asarray(im)
        if arr.shape != (h, w) or arr.dtype != np.uint8:
            raise CorruptRecordError(r["id"], f"image shape {arr.shape} != {(h, w)}")
        images[i] = arr / np.float32(255)
    return Dataset(
        images,
        np.array([r["label_index"] for r in records], dtype=int),
        np.array([r["snr_db"] for r in records], dtype=float),
        np.array([r["jsr_db"] for r in records], dtype=float),
        np.array([r["split"] for r in records]),
        [r["id"] for r in records],
    )


def regenerate(record: dict, cfg: SweepConfig) -> np.ndarray:
    """Rebuild one record's image from its seed alone."""
    return render_sample(SignalClass(record["label"]), record["snr_db"], record["jsr_db"], record["seed"], cfg)[0]


def split_validation(data: Dataset, fraction=0.2, seed=0):
    """Stratified hold-out: returns (train, validation)."""
    rng = np.random.default_rng(seed)
    val = np.zeros(len(data), dtype=bool)
    for label in np.unique(data.labels):
        idx = np.flatnonzero(data.labels == label)
        n_val = int(round(fraction * idx.size))
        if idx.size > 1:
            n_val = min(max(n_val, 1), idx.size - 1)
        val[rng.choice(idx, n_val, replace=False)] = True
    return data.subset(~val), data.subset(val)


def novel_dataset(cfg: SweepConfig, snr_grid_db, per_cell, jsr_db=5.0, classes=NOVEL_SET, master_seed=None) -> Dataset:
    """In-memory novel-FM probes (BPSK plus a novel FM jammer at ``jsr_db``); labels are -1."""
    seed0 = cfg.master_seed if master_seed is None else master_seed
    images, snrs, ids = [], [], []
    for cls in classes:
        for snr in snr_grid_db:
            for i in range(per_cell):
                seed = child_seed(seed0, cls, snr, jsr_db, i, "novel")
                images.append(render_sample(cls, snr, jsr_db, seed, cfg)[0])
                snrs.append(float(snr))
                ids.append(record_id("novel", cls, snr, jsr_db, i))
    n = len(images)
    return Dataset(np.asarray(images, dtype=np.float32).reshape(n, *cfg.image_size) / np.float32(255),
                   np.full(n, -1), np.array(snrs), np.full(n, float(jsr_db)), np.full(n, "novel"), ids)


def default_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))
