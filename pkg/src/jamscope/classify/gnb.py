import math

import numpy as np

from .features import as_features

VAR_FLOOR = 1e-6


class GaussianNB:
    """Gaussian naive Bayes with per-class, per-feature mean and (floored) variance.

    The floor is ``VAR_FLOOR`` times the largest global feature variance, so
    constant features cannot produce infinite likelihoods.
    """

    kind = "gnb"

    def __init__(self, n_classes=9):
        self.n_classes = int(n_classes)
        self.means = self.variances = self.log_prior = None

    def fit(self, x, labels):
        feats = as_features(x)
        labels = np.asarray(labels, dtype=int)
        self.n_classes = max(self.n_classes, int(labels.max()) + 1)
        counts = np.bincount(labels, minlength=self.n_classes)
        if np.any(counts == 1):
            bad = [int(c) for c in np.flatnonzero(counts == 1)]
            raise ValueError(f"classes {bad} have fewer than 2 samples")
        # Classes absent from the training set get a -inf prior and are never predicted.
        floor = max(VAR_FLOOR * float(feats.var(axis=0).max()), 1e-12)
        present = counts > 0
        means = np.zeros((self.n_classes, feats.shape[1]))
        var = np.ones((self.n_classes, feats.shape[1]))
        for c in np.flatnonzero(present):
            means[c] = feats[labels == c].mean(axis=0)
            var[c] = feats[labels == c].var(axis=0)
        # Stored as float32 so a saved model predicts exactly like the fitted one.
        self.means = means.astype(np.float32)
        self.variances = np.maximum(var, floor).astype(np.float32)
        with np.errstate(divide="ignore"):
            self.log_prior = np.log(counts / counts.sum()).astype(np.float32)
        return self

    def joint_log_likelihood(self, x):
        feats = as_features(x)
        mu = self.means.astype(float)
        var = self.variances.astype(float)
        ll = -0.5 * (np.sum(np.log(2 * math.pi * var), axis=1)[None, :]
                     + np.sum((feats[:, None, :] - mu[None]) ** 2 / var[None], axis=2))
        return ll + self.log_prior.astype(float)[None, :]

    def predict_proba(self, x):
        jll = self.joint_log_likelihood(x)
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, x):
        if self.means is None:
            raise RuntimeError("model is not fitted")
        return self.joint_log_likelihood(x).argmax(axis=1)

    def config(self):
        return {"n_classes": self.n_classes, "var_floor": VAR_FLOOR}


def train_gnb(x, labels, n_classes=9) -> GaussianNB:
    return GaussianNB(n_classes).fit(x, labels)
