"""Classifier registry: five binary models behind one fit/predict contract.

Kinds: logreg, svm, rf, gb, dnn. All predictors map a probability or score
tie exactly at the decision boundary to the positive class.
"""
from .base import (
    CANONICAL_KINDS,
    ClassifierSpec,
    TrainMeta,
    default_params,
    fit,
    make_spec,
)
from .boosting import BoostModel, train_gradient_boosting
from .dnn import DnnModel, train_dnn
from .forest import ForestModel, train_random_forest
from .logreg import LogisticModel, train_logreg
from .svm import SvmModel, train_svm_smo

__all__ = [
    "CANONICAL_KINDS",
    "ClassifierSpec",
    "TrainMeta",
    "default_params",
    "fit",
    "make_spec",
    "BoostModel",
    "DnnModel",
    "ForestModel",
    "LogisticModel",
    "SvmModel",
    "train_gradient_boosting",
    "train_dnn",
    "train_random_forest",
    "train_logreg",
    "train_svm_smo",
]
