"""Spectrogram classifiers: KNN and Gaussian naive Bayes baselines and a compact CNN."""

from .cnn import (CompactCNN, TrainConfig, TrainingDiverged, cnn_forward, cnn_gradients, cnn_train,
                  train_config_dict)
from .evaluate import (CLASS_NAMES, NOVEL_THRESHOLD, EvalReport, Novelty, detect_novel, evaluate,
                       novel_flag_rate, novelty_from_proba, report_from_predictions)
from .features import pooled_features
from .gnb import GaussianNB, train_gnb
from .knn import KNNClassifier, train_knn
from .modelio import ModelFormatError, load_model, save_model

__all__ = [
    "CLASS_NAMES", "NOVEL_THRESHOLD", "CompactCNN", "EvalReport", "GaussianNB", "KNNClassifier",
    "ModelFormatError", "Novelty", "TrainConfig", "TrainingDiverged", "cnn_forward", "cnn_gradients",
    "cnn_train", "detect_novel", "evaluate", "load_model", "novel_flag_rate", "novelty_from_proba",
    "pooled_features", "report_from_predictions", "save_model", "train_config_dict", "train_gnb", "train_knn",
]
