"""Weighted logistic regression via gradient descent with backtracking.

The objective is the weight-normalised negative log-likelihood plus an L2
penalty on the coefficients (intercept unpenalised):

    f(b, c) = [sum_i w_i * nll_i  +  (l2 / 2) * ||c||^2] / sum_i w_i

Normalising by total weight makes duplicating an example equivalent to
doubling its weight. Fitting is deterministic: zero initialisation, Armijo
backtracking line search, stop when the gradient max-norm drops below tol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from ..data import LabeledExample
from ..errors import ConfigError, DataError
from .base import ProbModel, examples_to_arrays

_ARMIJO_C = 1e-4
_MIN_STEP = 1e-18


@dataclass(frozen=True)
class LogisticParams:
    l2: float = 1e-3
    max_iter: int = 500
    tol: float = 1e-6


class LogisticModel(ProbModel):
    def __init__(self, coef: np.ndarray, intercept: float, converged: bool, n_iter: int):
        self.coef = np.asarray(coef, dtype=np.float64)
        self.intercept = float(intercept)
        self.converged = bool(converged)
        self.n_iter = int(n_iter)
        self.n_features = len(self.coef)

    def predict_proba(self, x):
        X, single = self._as_matrix(x)
        p = expit(X @ self.coef + self.intercept)
        return float(p[0]) if single else p


def _objective(X, y, w, W, l2, coef, intercept):
    z = X @ coef + intercept
    nll = np.logaddexp(0.0, z) - y * z
    return (float(w @ nll) + 0.5 * l2 * float(coef @ coef)) / W


def logistic_loss(model: LogisticModel, examples: Sequence[LabeledExample], l2: float) -> float:
    """The fitting objective evaluated at a model's coefficients."""
    X, y, w = examples_to_arrays(examples)
    return _objective(X, y, w, float(w.sum()), l2, model.coef, model.intercept)


def fit_logistic(
    examples: Sequence[LabeledExample],
    l2: float = 1e-3,
    max_iter: int = 500,
    tol: float = 1e-6,
    seed: int = 0,
) -> LogisticModel:
    """Fit by maximum likelihood; seed is accepted for interface parity with
    the tree learners but the optimisation itself is deterministic."""
    if l2 < 0:
        raise ConfigError(f"l2 must be >= 0, got {l2}")
    if max_iter < 1:
        raise ConfigError(f"max_iter must be >= 1, got {max_iter}")
    if tol <= 0:
        raise ConfigError(f"tol must be > 0, got {tol}")
    X, y, w = examples_to_arrays(examples)
    W = float(w.sum())
    k = X.shape[1]
    coef = np.zeros(k)
    intercept = 0.0

    step = 1.0
    converged = False
    it = 0
    fcur = _objective(X, y, w, W, l2, coef, intercept)
    for it in range(1, max_iter + 1):
        p = expit(X @ coef + intercept)
        resid = w * (p - y)
        g_coef = (X.T @ resid + l2 * coef) / W
        g_int = float(resid.sum()) / W
        gmax = max(float(np.max(np.abs(g_coef))) if k else 0.0, abs(g_int))
        if gmax < tol:
            converged = True
            break
        gsq = float(g_coef @ g_coef) + g_int * g_int
        step = min(step * 2.0, 1e6)
        while True:
            cand_coef = coef - step * g_coef
            cand_int = intercept - step * g_int
            fcand = _objective(X, y, w, W, l2, cand_coef, cand_int)
            if fcand <= fcur - _ARMIJO_C * step * gsq:
                break
            step *= 0.5
            if step < _MIN_STEP:
                break
        if step < _MIN_STEP:
            break
        coef, intercept, fcur = cand_coef, cand_int, fcand
    return LogisticModel(coef, intercept, converged, it)
