"""Command-line entry point: ``jamscope {synth,dataset,train,eval,novel}``.

Options may come from an INI file (``--config``, one section per subcommand,
keys spelled like the long flags with underscores); flags given on the command
line win.  Each run logs its resolved options and writes them, together with
the package version, into every artifact it produces.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import plotting, version_string
from .channel import apply_channel, channel_from_tag
from .classify import (
    NOVEL_THRESHOLD,
    CompactCNN,
    TrainConfig,
    TrainingDiverged,
    cnn_train,
    evaluate,
    load_model,
    save_model,
    train_config_dict,
    train_gnb,
    train_knn,
)
from .dataset import (
    FULL_SNR_GRID,
    DatasetError,
    SweepConfig,
    default_workers,
    generate_dataset,
    load_dataset,
    novel_dataset,
    read_manifest,
    spec_to_dict,
    split_validation,
)
from .signals import CLOSED_SET, NOVEL_SET, SignalClass, SignalError, synthesize
from .tfa import WindowSpec, analytic_signal, tf_distribution, to_image

log = logging.getLogger("jamscope")

LARGE_RUN_WARN = 20_000  # records; beyond this a run takes hours on one core


class UsageError(Exception):
    """Bad or missing options (exit status 2)."""


def _floats(text):
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def _strs(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _bool(text):
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# name -> (type, default, help); default None means "no default"
OPTIONS = {
    "synth": {
        "signal_class": (str, None, "class tag, e.g. fh or single-tone"),
        "seed": (int, 0, "random seed"),
        "jsr": (float, 5.0, "jammer-to-signal ratio in dB"),
        "snr": (float, None, "add channel noise at this SNR in dB (default: clean)"),
        "channel": (str, "gaussian", "gaussian, rayleigh or freq-selective"),
        "out": (str, None, "output path prefix; writes PREFIX.iq and PREFIX.json"),
        "spectrogram": (_bool, False, "also write PREFIX.png (spectrogram image)"),
        "tf_method": (str, "spwvd", "wvd, pwvd or spwvd"),
    },
    "dataset": {
        "out_dir": (str, None, "directory for images/ and manifest.json"),
        "classes": (_strs, tuple(c.value for c in CLOSED_SET), "comma-separated class tags"),
        "snr_grid": (_floats, FULL_SNR_GRID, "comma-separated SNR values in dB"),
        "jsr_grid": (_floats, (5.0,), "comma-separated JSR values in dB"),
        "channel": (str, "gaussian", "gaussian, rayleigh or freq-selective"),
        "train_per_cell": (int, 20, "training samples per class and grid cell"),
        "test_per_cell": (int, 10, "test samples per class and grid cell"),
        "master_seed": (int, 0, "seed every record is derived from"),
        "tf_method": (str, "spwvd", "wvd, pwvd or spwvd"),
        "time_window": (int, 33, "SPWVD time-window length"),
        "lag_window": (int, 129, "SPWVD lag-window length"),
        "n_freq_bins": (int, 256, "frequency bins before resizing"),
        "image_size": (int, 64, "square image side in pixels"),
        "workers": (int, None, "worker processes (default: up to 4)"),
    },
    "train": {
        "manifest": (str, None, "dataset manifest.json"),
        "model": (str, "cnn", "knn, gnb or cnn"),
        "out": (str, None, "model file to write"),
        "k": (int, 5, "neighbours for knn"),
        "batch_size": (int, 32, "cnn minibatch size"),
        "lr": (float, 0.001, "cnn learning rate"),
        "max_epochs": (int, 50, "cnn epoch limit"),
        "patience": (int, 10, "cnn early-stop patience in epochs"),
        "lr_decay": (float, 0.5, "cnn learning-rate decay factor"),
        "seed": (int, 0, "cnn initialization and shuffling seed"),
        "val_fraction": (float, 0.2, "share of the training split held out for validation"),
    },
    "eval": {
        "model": (str, None, "model file"),
        "manifest": (str, None, "dataset manifest.json (its test split is scored)"),
        "group": (str, "snr", "snr, jsr or none"),
        "novel_threshold": (float, NOVEL_THRESHOLD, "max-softmax threshold for the novelty flag"),
        "out_dir": (str, None, "report directory"),
    },
    "novel": {
        "model": (str, None, "model file"),
        "manifest": (str, None, "dataset manifest.json (rendering config and false-novel baseline)"),
        "snr_grid": (_floats, None, "SNR values in dB (default: the manifest's grid)"),
        "per_cell": (int, 50, "probes per novel class and SNR"),
        "jsr": (float, 5.0, "novel-jammer JSR in dB"),
        "threshold": (float, NOVEL_THRESHOLD, "max-softmax threshold"),
        "master_seed": (int, None, "probe seed (default: the manifest's master seed)"),
        "out_dir": (str, None, "report directory"),
    },
}


def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jamscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=version_string())
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in OPTIONS.items():
        p = sub.add_parser(cmd, help=f"{cmd} subcommand")
        p.add_argument("--config", help="INI file; section [%s]" % cmd)
        for name, (typ, default, help_) in opts.items():
            flags = [_flag(name)]
            if name == "signal_class":
                flags.append("--class")
            if typ is _bool:
                p.add_argument(*flags, dest=name, action="store_const", const=True, default=None, help=help_)
            else:
                shown = "" if default is None else f" (default: {default})"
                p.add_argument(*flags, dest=name, type=str, default=None, help=help_ + shown)
        if cmd == "synth":
            p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                           help="override a drawn parameter, e.g. signal.carrier_freq=400000")
    return parser


def resolve(cmd: str, args: argparse.Namespace) -> dict:
    """Merge defaults, the config file section and explicit flags (in rising priority)."""
    opts = OPTIONS[cmd]
    from_file = {}
    if args.config:
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise UsageError(f"cannot read config file {args.config}")
        if cp.has_section(cmd):
            from_file = dict(cp.items(cmd))
        unknown = set(from_file) - set(opts)
        if unknown:
            raise UsageError(f"unknown keys in [{cmd}] of {args.config}: {', '.join(sorted(unknown))}")
    out = {}
    for name, (typ, default, _) in opts.items():
        raw = getattr(args, name)
        if raw is None:
            raw = from_file.get(name)
        try:
            out[name] = default if raw is None else typ(raw)
        except ValueError:
            raise UsageError(f"bad value for {_flag(name)}: {raw!r}") from None
    return out


def _require(opts, *names):
    missing = [_flag(n) for n in names if opts.get(n) in (None, "")]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _provenance(cmd, opts, **extra) -> dict:
    doc = {"command": cmd, "options": opts, "version": version_string()}
    doc.update(extra)
    return doc


def _portable(opts: dict, *path_keys) -> dict:
    # Paths vary between otherwise identical runs; record only their basenames.
    return {k: (Path(v).name if k in path_keys and v else v) for k, v in opts.items()}


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (tuple, set)):
        return list(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    raise TypeError(f"cannot serialize {type(v).__name__}")


# -- synth ------------------------------------------------------------------


def _parse_overrides(items) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        out[key.strip()] = tuple(parsed) if isinstance(parsed, list) else parsed
    return out


def write_iq(path, samples) -> None:
    """Interleaved little-endian float32 I/Q pairs."""
    s = np.asarray(samples, dtype=complex)
    inter = np.empty(2 * s.size, dtype="<f4")
    inter[0::2] = s.real
    inter[1::2] = s.imag
    Path(path).write_bytes(inter.tobytes())


def read_iq(path) -> np.ndarray:
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f4")
    if raw.size % 2:
        raise SignalError(f"{path}: odd number of float32 values")
    return raw[0::2].astype(float) + 1j * raw[1::2].astype(float)


def cmd_synth(opts, args) -> int:
    _require(opts, "signal_class", "out")
    try:
        cls = SignalClass(opts["signal_class"])
    except ValueError:
        tags = ", ".join(c.value for c in SignalClass)
        raise UsageError(f"unknown class {opts['signal_class']!r}; choose from {tags}") from None
    overrides = _parse_overrides(args.overrides)
    rng = np.random.default_rng(opts["seed"])
    try:
        syn = synthesize(cls, opts["jsr"], rng, overrides=overrides)
    except TypeError as exc:  # unknown field passed through dataclasses.replace
        raise SignalError(f"bad override: {exc}") from None
    series = syn.series
    if opts["snr"] is not None:
        series = apply_channel(series, channel_from_tag(opts["channel"]), opts["snr"], int(rng.integers(2**63)))

    prefix = Path(opts["out"])
    prefix.parent.mkdir(parents=True, exist_ok=True)
    iq_path = prefix.with_name(prefix.name + ".iq")
    write_iq(iq_path, series.samples)
    sidecar = _provenance("synth", _portable(opts, "out"), overrides=overrides)
    sidecar.update({
        "iq_file": iq_path.name,
        "sample_format": "float32 little-endian, interleaved I,Q",
        "n_samples": len(series),
        "sample_rate": series.sample_rate,
        "signal_spec": spec_to_dict(syn.signal_spec),
        "jammer_spec": spec_to_dict(syn.jammer_spec),
    })
    if opts["spectrogram"]:
        grid = tf_distribution(analytic_signal(series), opts["tf_method"], WindowSpec.hamming())
        png = prefix.with_name(prefix.name + ".png")
        Image.fromarray(to_image(grid), mode="L").save(png)
        sidecar["spectrogram_file"] = png.name
    _write_json(prefix.with_name(prefix.name + ".json"), sidecar)
    print(f"wrote {iq_path} ({len(series)} samples, class {cls.value})")
    return 0


# -- dataset ----------------------------------------------------------------


def sweep_config(opts) -> SweepConfig:
    n = opts["image_size"]
    return SweepConfig(
        classes=opts["classes"], snr_grid_db=opts["snr_grid"], jsr_grid_db=opts["jsr_grid"],
        channel=opts["channel"], train_per_cell=opts["train_per_cell"], test_per_cell=opts["test_per_cell"],
        master_seed=opts["master_seed"], image_size=(n, n), tf_method=opts["tf_method"],
        time_window=opts["time_window"], lag_window=opts["lag_window"], n_freq_bins=opts["n_freq_bins"],
    )


def cmd_dataset(opts, args) -> int:
    _require(opts, "out_dir")
    cfg = sweep_config(opts)
    total = sum(cfg.expected_counts().values())
    if total >= LARGE_RUN_WARN:
        log.warning("%d records requested; at roughly 0.07 s per record per core this will take a long time", total)
    workers = opts["workers"] or default_workers()
    manifest = generate_dataset(cfg, opts["out_dir"], workers=workers)
    counts = manifest.counts()
    print(f"wrote {manifest.path}: {counts['train']} train / {counts['test']} test records")
    return 0


# -- train ------------------------------------------------------------------


def _history_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        keys = list(rows[0])
        w.writerow(keys)
        for r in rows:
            w.writerow([f"{r[k]:.6g}" if isinstance(r[k], float) else r[k] for k in keys])


def _accuracy(model, data) -> float:
    return float(np.mean(model.predict(data.images) == data.labels))


def cmd_train(opts, args) -> int:
    _require(opts, "manifest", "out")
    kind = opts["model"]
    if kind not in ("knn", "gnb", "cnn"):
        raise UsageError(f"--model must be knn, gnb or cnn, not {kind!r}")
    train = load_dataset(opts["manifest"], "train")
    if len(train) == 0:
        raise DatasetError(f"{opts['manifest']} has no training records")
    n_classes = len(CLOSED_SET)
    meta = _provenance("train", _portable(opts, "manifest", "out"), manifest_sha256=_file_digest(opts["manifest"]))

    if kind == "knn":
        model = train_knn(train.images, train.labels, k=opts["k"], n_classes=n_classes)
        history = [{"epoch": 0, "train_acc": _accuracy(model, train)}]
    elif kind == "gnb":
        model = train_gnb(train.images, train.labels, n_classes=n_classes)
        history = [{"epoch": 0, "train_acc": _accuracy(model, train)}]
    else:
        cfg = TrainConfig(batch_size=opts["batch_size"], learning_rate=opts["lr"], max_epochs=opts["max_epochs"],
                          patience=opts["patience"], lr_decay=opts["lr_decay"], seed=opts["seed"])
        fit, val = split_validation(train, opts["val_fraction"], seed=opts["seed"])
        image_shape = tuple(train.images.shape[1:])
        model, history = cnn_train(CompactCNN(image_shape, n_classes=n_classes, seed=opts["seed"]),
                                   fit.images, fit.labels, val.images, val.labels, cfg)
        meta["train_config"] = train_config_dict(cfg)

    out = Path(opts["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out, meta)
    hist_path = out.with_name(out.stem + ".history.csv")
    _history_csv(hist_path, history)
    if kind == "cnn":
        plotting.training_history(history, out.with_name(out.stem + ".history.png"))
    last = history[-1]
    print(f"wrote {out} ({kind}); final train accuracy {last['train_acc']:.3f}")
    return 0


# -- eval -------------------------------------------------------------------


def cmd_eval(opts, args) -> int:
    _require(opts, "model", "manifest", "out_dir")
    if opts["group"] not in ("snr", "jsr", "none"):
        raise UsageError(f"--group must be snr, jsr or none, not {opts['group']!r}")
    model, header = load_model(opts["model"])
    test = load_dataset(opts["manifest"], "test")
    report = evaluate(model, test, opts["group"])
    extra = _provenance("eval", _portable(opts, "model", "manifest", "out_dir"),
                        model_kind=header["kind"], model_meta=header["meta"],
                        manifest_sha256=_file_digest(opts["manifest"]))
    if hasattr(model, "predict_proba"):
        top = model.predict_proba(test.images).max(axis=1)
        extra["novel_threshold"] = opts["novel_threshold"]
        extra["false_novel_rate"] = float(np.mean(top < opts["novel_threshold"]))

    out = Path(opts["out_dir"])
    paths = report.write(out, extra)
    title = f"{header['kind']} on {len(test)} test images"
    if report.groups:
        curve = {header["kind"]: {k: a for k, (a, _) in report.groups.items()}}
        plotting.accuracy_curve(curve, opts["group"], out / "accuracy.png", title)
    plotting.confusion_heatmap(report.confusion, report.class_names, out / "confusion.png", title)
    plotting.per_class_bars(report.per_class, report.class_names, out / "per_class.png", title)
    print(f"overall accuracy {report.overall:.4f} on {report.n_samples} samples; wrote {paths['report']}")
    for value, (acc, n) in sorted(report.groups.items()):
        print(f"  {opts['group']} {value:+g} dB: {acc:.4f} ({n})")
    return 0


# -- novel ------------------------------------------------------------------


def cmd_novel(opts, args) -> int:
    _require(opts, "model", "manifest", "out_dir")
    model, header = load_model(opts["model"])
    if not hasattr(model, "predict_proba"):
        raise UsageError(f"{header['kind']} models expose no class confidences")
    manifest = read_manifest(opts["manifest"])
    cfg = manifest.config
    snrs = opts["snr_grid"] or cfg.snr_grid_db
    seed = cfg.master_seed if opts["master_seed"] is None else opts["master_seed"]
    thr = opts["threshold"]

    rows = []
    for cls in NOVEL_SET:
        probes = novel_dataset(cfg, snrs, opts["per_cell"], opts["jsr"], (cls,), seed)
        flagged = model.predict_proba(probes.images).max(axis=1) < thr
        rows.append((cls.value, {s: float(flagged[probes.snr_db == s].mean()) for s in snrs}))
    test = load_dataset(opts["manifest"], "test")
    if len(test):
        flagged = model.predict_proba(test.images).max(axis=1) < thr
        rows.append(("in-distribution", {s: float(flagged[test.snr_db == s].mean()) if np.any(test.snr_db == s)
                                         else float("nan") for s in snrs}))

    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "novel.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["signal", *(f"{s:g}" for s in snrs)])
        for name, rates in rows:
            w.writerow([name, *(f"{rates[s]:.6f}" for s in snrs)])
    doc = _provenance("novel", _portable(opts, "model", "manifest", "out_dir"), model_kind=header["kind"],
                      model_meta=header["meta"], manifest_sha256=_file_digest(opts["manifest"]),
                      flag_rates={name: {f"{s:g}": r for s, r in rates.items()} for name, rates in rows})
    _write_json(out / "novel.json", doc)
    plotting.accuracy_curve({name: rates for name, rates in rows}, "snr", out / "novel.png",
                            f"share flagged novel (threshold {thr:g})")
    for name, rates in rows:
        print(f"{name:>20}: " + "  ".join(f"{s:+g} dB {100 * r:5.1f}%" for s, r in rates.items()))
    return 0


COMMANDS = {"synth": cmd_synth, "dataset": cmd_dataset, "train": cmd_train, "eval": cmd_eval, "novel": cmd_novel}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        opts = resolve(args.command, args)
        log.info("resolved %s options: %s", args.command, json.dumps(opts, sort_keys=True, default=_jsonable))
        return COMMANDS[args.command](opts, args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"jamscope {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, DatasetError, TrainingDiverged, OSError) as exc:
        print(f"jamscope {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
