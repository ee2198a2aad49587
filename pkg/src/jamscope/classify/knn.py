import numpy as np

from .features import as_features


class KNNClassifier:
    """Euclidean k-nearest-neighbour vote.

    Neighbours are ranked by (distance, label); a tied vote goes to the class
    with the smaller summed neighbour distance, then to the lower class index.
    """

    kind = "knn"

    def __init__(self, k=5, n_classes=9):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = int(k)
        self.n_classes = int(n_classes)
        self.exemplars = None
        self.labels = None

    def fit(self, x, labels):
        feats = as_features(x)
        labels = np.asarray(labels, dtype=int)
        if feats.shape[0] == 0:
            raise ValueError("empty training set")
        if self.k > feats.shape[0]:
            raise ValueError(f"k={self.k} exceeds training size {feats.shape[0]}")
        self.exemplars = feats.astype(np.float32)
        self.labels = labels
        self.n_classes = max(self.n_classes, int(labels.max()) + 1)
        return self

    def _vote(self, q):
        d2 = np.sum((self.exemplars - q) ** 2, axis=1, dtype=float)
        near = np.lexsort((self.labels, d2))[: self.k]
        lab = self.labels[near]
        votes = np.bincount(lab, minlength=self.n_classes)
        dist = np.bincount(lab, weights=np.sqrt(d2[near]), minlength=self.n_classes)
        cands = np.flatnonzero(votes == votes.max())
        return int(cands[np.argmin(dist[cands])])

    def predict(self, x):
        if self.exemplars is None:
            raise RuntimeError("model is not fitted")
        feats = as_features(x).astype(np.float32)
        return np.array([self._vote(q) for q in feats], dtype=int)

    def predict_proba(self, x):
        """Neighbour vote fractions (the tie-break is not reflected here)."""
        if self.exemplars is None:
            raise RuntimeError("model is not fitted")
        feats = as_features(x).astype(np.float32)
        out = np.zeros((len(feats), self.n_classes))
        for i, q in enumerate(feats):
            d2 = np.sum((self.exemplars - q) ** 2, axis=1, dtype=float)
            near = np.lexsort((self.labels, d2))[: self.k]
            out[i] = np.bincount(self.labels[near], minlength=self.n_classes) / self.k
        return out

    def config(self):
        return {"k": self.k, "n_classes": self.n_classes}


def train_knn(x, labels, k=5, n_classes=9) -> KNNClassifier:
    return KNNClassifier(k, n_classes).fit(x, labels)
