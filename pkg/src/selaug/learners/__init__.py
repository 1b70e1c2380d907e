"""Probabilistic binary classifiers built from scratch: CART trees, random
forests, and logistic regression, plus cross-fitted probability estimation
and model (de)serialization."""

from .base import ProbModel, predict_proba
from .crossfit import LEARNER_KINDS, LearnerSpec, cross_fit_probs, fit_labeled
from .forest import ForestModel, ForestParams, fit_forest
from .io import MODEL_VERSION, load_model, model_from_dict, model_to_dict, save_model
from .logistic import LogisticModel, LogisticParams, fit_logistic, logistic_loss
from .tree import TreeModel, TreeParams, fit_tree

__all__ = [
    "ProbModel",
    "predict_proba",
    "LearnerSpec",
    "LEARNER_KINDS",
    "cross_fit_probs",
    "fit_labeled",
    "ForestModel",
    "ForestParams",
    "fit_forest",
    "TreeModel",
    "TreeParams",
    "fit_tree",
    "LogisticModel",
    "LogisticParams",
    "fit_logistic",
    "logistic_loss",
    "MODEL_VERSION",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
]
