"""scikit-learn estimator wrapper around the kernel perceptron ERM learner."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ._validation import as_matrix
from .kernels import KernelSpec
from .learner import FitNotConverged, LearnerConfig, fit
from .teaching import TAG_DATA, TeachingSet

__all__ = ["KernelPerceptron"]


class KernelPerceptron(ClassifierMixin, BaseEstimator):
    """Kernel perceptron trained by minimizing the perceptron loss.

    The decision function is f(x) = sum_j c_j K(a_j, x) with the centers
    fixed to the training inputs (linear kernels are fit in primal
    coordinates).  Any two-class label encoding is accepted; the smaller
    class label is mapped to -1.

    Parameters follow the functional learner: ``kernel`` is one of
    ``linear``, ``polynomial``, ``gaussian`` or ``truncated_gaussian``, with
    ``degree``, ``sigma`` and ``truncation`` interpreted per family.
    """

    def __init__(self, kernel="gaussian", degree=3, sigma=0.9, truncation=5,
                 step_c=0.5, max_iters=20000, loss_tol=1e-6,
                 norm_low=0.9, norm_high=1.1, coeff_bound=None, random_state=0):
        self.kernel = kernel
        self.degree = degree
        self.sigma = sigma
        self.truncation = truncation
        self.step_c = step_c
        self.max_iters = max_iters
        self.loss_tol = loss_tol
        self.norm_low = norm_low
        self.norm_high = norm_high
        self.coeff_bound = coeff_bound
        self.random_state = random_state

    def _spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, degree=self.degree,
                          sigma=self.sigma if self.kernel in
                          ("gaussian", "truncated_gaussian") else None,
                          truncation=self.truncation
                          if self.kernel == "truncated_gaussian" else None)

    def _config(self) -> LearnerConfig:
        return LearnerConfig(max_iters=self.max_iters, step_c=self.step_c,
                             loss_tol=self.loss_tol,
                             norm_band=(self.norm_low, self.norm_high),
                             coeff_bound=self.coeff_bound,
                             seed=self.random_state)

    def fit(self, X, y):
        X = as_matrix(X, "X")
        y = np.asarray(y)
        if y.ndim != 1 or len(y) != len(X):
            raise ValueError("y must be a 1-d label vector matching X")
        self.classes_ = np.unique(y)
        if len(self.classes_) != 2:
            raise ValueError(f"expected exactly 2 classes, got {len(self.classes_)}")
        signs = np.where(y == self.classes_[1], 1, -1)
        ts = TeachingSet(X, signs, (TAG_DATA,) * len(X))
        try:
            self.model_ = fit(ts, self._spec(), self._config())
            self.converged_ = True
        except FitNotConverged as exc:
            self.model_ = exc.model
            self.converged_ = False
        margins = signs * self.model_.decision_values(X)
        self.final_loss_ = float(np.sum(np.maximum(-margins, 0.0)))
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this KernelPerceptron instance is not fitted yet")

    def decision_function(self, X):
        self._check_fitted()
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.model_.decision_values(X)

    def predict(self, X):
        values = self.decision_function(X)
        return np.where(values >= 0, self.classes_[1], self.classes_[0])
