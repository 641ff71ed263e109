"""scikit-learn style front end for the optimal selection policy."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .simulator import policy_decisions
from .value_engine import GridSpec, build_value_table
from .variance_engine import build_variance_table


class OptimalOnlineSelector(TransformerMixin, BaseEstimator):
    """Optimal online policy for selecting an increasing subsequence.

    Each row of ``X`` is one sequence of draws in ``[0, 1)`` in arrival order.
    ``fit`` builds the value tables for sequences of length ``horizon`` (taken
    from ``X`` when ``horizon`` is None); ``transform`` returns the 0/1
    acceptance mask of the policy and ``predict`` the number of selections.

    Parameters
    ----------
    horizon : int or None
        Sequence length the policy is built for.
    grid_points : int
        Grid nodes on [0, 1] for the value tables.
    root_tolerance : float
        Tolerance of the threshold root solve.
    with_variance : bool
        Also build the conditional variance table.

    Attributes
    ----------
    value_table_, variance_table_ : fitted tables (the latter None unless requested)
    mean_length_ : expected number of selections
    variance_ : variance of the number of selections, when computed
    n_features_in_ : sequence length
    """

    def __init__(self, horizon=None, grid_points=4097, root_tolerance=1e-12, with_variance=False):
        self.horizon = horizon
        self.grid_points = grid_points
        self.root_tolerance = root_tolerance
        self.with_variance = with_variance

    def fit(self, X=None, y=None):
        if self.horizon is None:
            if X is None:
                raise ValueError("either set horizon or pass X to fit")
            n = self._validate_draws(X).shape[1]
        else:
            n = int(self.horizon)
            if X is not None:
                X = self._validate_draws(X, expected=n)
        grid = GridSpec(points=int(self.grid_points), root_tolerance=float(self.root_tolerance))
        self.value_table_ = build_value_table(n, grid)
        self.variance_table_ = build_variance_table(self.value_table_) if self.with_variance else None
        self.n_features_in_ = n
        self.mean_length_ = self.value_table_.mean_length()
        self.variance_ = None if self.variance_table_ is None else self.variance_table_.total_variance()
        return self

    def _validate_draws(self, X, expected=None):
        X = check_array(X, dtype=np.float64)
        if expected is not None and X.shape[1] != expected:
            raise ValueError(f"X has {X.shape[1]} columns, expected {expected}")
        if np.any(X < 0.0) or np.any(X >= 1.0):
            raise ValueError("draws must lie in [0, 1)")
        return X

    def transform(self, X):
        check_is_fitted(self, "value_table_")
        X = self._validate_draws(X, expected=self.n_features_in_)
        return policy_decisions(self.value_table_, X).astype(np.float64)

    def predict(self, X):
        check_is_fitted(self, "value_table_")
        X = self._validate_draws(X, expected=self.n_features_in_)
        return policy_decisions(self.value_table_, X).sum(axis=1)

    def score(self, X, y=None):
        """Mean number of selections per row."""
        return float(np.mean(self.predict(X)))
