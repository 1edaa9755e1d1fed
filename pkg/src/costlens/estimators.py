"""Scikit-learn compatible wrappers around the decision rules.

These estimators make the decision engine compose with sklearn pipelines
and model-selection tooling: parameters live in ``__init__``, ``fit``
validates them and freezes the fitted state, ``predict`` maps (..., N)
class-probability arrays to class indices. ``X`` may be a 2-D (n_samples,
n_classes) matrix, a (H, W, N) field tensor or a ProbabilityField; the
leading shape is preserved in the prediction.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .decision import decide_costs
from .validation import as_cost_entries, as_probability_array


class CostSensitiveDecider(BaseEstimator):
    """Expected-cost minimizing classifier over class-probability inputs.

    Parameters
    ----------
    cost_matrix : CostMatrix or array-like of shape (n_classes, n_classes)
        Confusion costs; rows are predictions, columns are targets.

    Attributes
    ----------
    cost_matrix_ : ndarray of shape (n_classes, n_classes)
        Validated float64 copy of the cost matrix.
    n_classes_ : int
        Number of classes the decider operates on.
    """

    def __init__(self, cost_matrix=None):
        self.cost_matrix = cost_matrix

    def fit(self, X=None, y=None):
        """Validate the cost matrix; ``X`` and ``y`` are accepted for API compatibility."""
        if self.cost_matrix is None:
            raise ValueError("cost_matrix must be set before fitting")
        entries = as_cost_entries(self.cost_matrix)
        self.cost_matrix_ = entries
        self.n_classes_ = entries.shape[0]
        return self

    def expected_cost(self, X) -> np.ndarray:
        """Expected cost of every candidate class, shape (..., n_classes)."""
        check_is_fitted(self, "cost_matrix_")
        probs = as_probability_array(X, num_classes=self.n_classes_)
        return np.einsum("...n,kn->...k", probs, self.cost_matrix_, optimize=False)

    def predict(self, X) -> np.ndarray:
        """Per-element argmin of expected cost; ties go to the lowest class index."""
        check_is_fitted(self, "cost_matrix_")
        probs = as_probability_array(X, num_classes=self.n_classes_)
        lead = probs.shape[:-1]
        flat = probs.reshape(-1, 1, self.n_classes_)
        return decide_costs(flat, self.cost_matrix_).reshape(lead)


class BayesDecider(BaseEstimator):
    """Maximum a-posteriori decisions: per-element argmax of the probabilities."""

    def fit(self, X=None, y=None):
        self.is_fitted_ = True
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "is_fitted_")
        return as_probability_array(X).argmax(axis=-1)


class MaximumLikelihoodDecider(BaseEstimator):
    """Prior-corrected decisions: argmax of p(k|x) / p(k).

    Parameters
    ----------
    priors : PriorVector or array-like of shape (n_classes,)
        Strictly positive class priors.
    """

    def __init__(self, priors=None):
        self.priors = priors

    def fit(self, X=None, y=None):
        if self.priors is None:
            raise ValueError("priors must be set before fitting")
        values = np.asarray(getattr(self.priors, "values", self.priors), dtype=np.float64)
        if values.ndim != 1 or np.any(values <= 0.0) or not np.all(np.isfinite(values)):
            raise ValueError("priors must be a vector of strictly positive values")
        self.priors_ = values
        self.n_classes_ = values.size
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "priors_")
        probs = as_probability_array(X, num_classes=self.n_classes_)
        return (probs / self.priors_).argmax(axis=-1)
