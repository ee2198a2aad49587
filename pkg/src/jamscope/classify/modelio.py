"""Versioned binary model files.

Layout: magic ``JSCM``, uint16 LE format version, uint32 LE header length, a
UTF-8 JSON header (model kind, config, provenance, array names and shapes),
then every array as little-endian float32 in header order.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .cnn import CompactCNN
from .gnb import GaussianNB
from .knn import KNNClassifier

MAGIC = b"JSCM"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _arrays(model):
    if model.kind == "cnn":
        return dict(model.params)
    if model.kind == "knn":
        return {"exemplars": model.exemplars, "labels": model.labels}
    if model.kind == "gnb":
        return {"means": model.means, "variances": model.variances, "log_prior": model.log_prior}
    raise ModelFormatError(f"cannot serialize {type(model).__name__}")


def save_model(model, path, meta=None) -> None:
    arrays = _arrays(model)
    header = {
        "kind": model.kind,
        "config": model.config(),
        "meta": meta or {},
        "arrays": [{"name": k, "shape": list(np.shape(v))} for k, v in arrays.items()],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<HI", FORMAT_VERSION, len(blob)) + blob)
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())


def load_model(path):
    """Return ``(model, header)``."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file")
    version, hlen = struct.unpack("<HI", data[4:10])
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    header = json.loads(data[10 : 10 + hlen])
    offset = 10 + hlen
    arrays = {}
    for spec in header["arrays"]:
        count = int(np.prod(spec["shape"]))
        if offset + 4 * count > len(data):
            raise ModelFormatError(f"{path}: truncated at array {spec['name']}")
        arrays[spec["name"]] = np.frombuffer(data, "<f4", count, offset).reshape(spec["shape"]).copy()
        offset += 4 * count
    if offset != len(data):
        raise ModelFormatError(f"{path}: {len(data) - offset} trailing bytes")

    cfg = header["config"]
    kind = header["kind"]
    if kind == "cnn":
        model = CompactCNN(cfg["input_shape"], cfg["channels"], cfg["hidden"], cfg["n_classes"], dtype=cfg["dtype"])
        for k in model.params:
            model.params[k] = arrays[k].astype(model.dtype)
    elif kind == "knn":
        model = KNNClassifier(cfg["k"], cfg["n_classes"])
        model.exemplars = arrays["exemplars"]
        model.labels = arrays["labels"].astype(int)
    elif kind == "gnb":
        model = GaussianNB(cfg["n_classes"])
        model.means, model.variances, model.log_prior = arrays["means"], arrays["variances"], arrays["log_prior"]
    else:
        raise ModelFormatError(f"{path}: unknown model kind {kind!r}")
    return model, header
