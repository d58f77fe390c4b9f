"""Scikit-learn wrapper around the exact solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .model import Instance, search
from .solver import solve


def _as_value_vector(X, name="X"):
    """Coerce X to a 1-D int64 vector of query values."""
    X = check_array(X, ensure_2d=False, dtype=None, ensure_min_samples=1)
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if X.ndim != 1:
        raise ValueError(f"{name} must have shape (n_samples,) or (n_samples, 1)")
    if not np.issubdtype(X.dtype, np.number):
        raise ValueError(f"{name} must be numeric")
    values = np.asarray(X, dtype=np.float64)
    if not np.all(values == np.floor(values)):
        raise ValueError(f"{name} must contain integer values")
    return X.astype(np.int64)


class TwoWayDecisionTreeClassifier(BaseEstimator, ClassifierMixin):
    """Exact minimum-cost decision tree over ordered integer values.

    Each training sample is a distinct integer value; the fitted model is
    a binary tree of ``< k`` / ``= k`` tests (k drawn from the designated
    key values) that classifies every training value correctly while
    minimizing the weighted total number of tests performed, weights
    taken from ``sample_weight``.  This is classification over a finite
    universe: ``predict`` accepts exactly the values seen in ``fit``.

    Parameters
    ----------
    mode : {"full", "heaviest_first_only"}, default="full"
        Solver search space.  "full" is exact; "heaviest_first_only"
        restricts equality tests to the heaviest value reaching each
        node, which can be suboptimal (provided for comparison).

    max_records : int, default=None
        Cap on solver dictionary records; None uses the built-in default
        (also overridable via the DTOPT_MAX_RECORDS environment
        variable).

    Attributes
    ----------
    classes_ : ndarray
        Distinct labels (1-D y), or column indices (2-D indicator y).

    instance_ : Instance
        The solver-level problem built from the training data.

    tree_ : Internal or Leaf
        The optimal decision tree.

    cost_ : int
        Its total weighted test count.

    stats_ : SolveStats
        Size and timing counters from the solve.
    """

    def __init__(self, mode="full", max_records=None):
        self.mode = mode
        self.max_records = max_records

    def fit(self, X, y, sample_weight=None, test_keys=None):
        """Fit the exact tree.

        Parameters
        ----------
        X : array-like of shape (n_samples,) or (n_samples, 1)
            Distinct integer query values.

        y : array-like of shape (n_samples,) or (n_samples, n_classes)
            Class labels, or a 0/1 membership indicator allowing a value
            to belong to several classes (any one of them is then an
            acceptable prediction).

        sample_weight : array-like of shape (n_samples,), default=None
            Nonnegative integer access frequencies; default all ones.

        test_keys : array-like of bool of shape (n_samples,), default=None
            Which values may appear inside tests; default all.

        Returns
        -------
        self
        """
        values = _as_value_vector(X)
        n = values.shape[0]

        y = np.asarray(y)
        if y.ndim == 1:
            if y.shape[0] != n:
                raise ValueError("X and y have inconsistent lengths")
            self.classes_ = np.unique(y)
            indicator = np.zeros((n, self.classes_.shape[0]), dtype=bool)
            for ci, label in enumerate(self.classes_):
                indicator[:, ci] = y == label
        elif y.ndim == 2:
            if y.shape[0] != n:
                raise ValueError("X and y have inconsistent lengths")
            indicator = np.asarray(y, dtype=bool)
            if not indicator.any(axis=1).all():
                raise ValueError("every sample must belong to at least one class")
            self.classes_ = np.arange(indicator.shape[1])
        else:
            raise ValueError("y must be 1-D labels or a 2-D indicator matrix")

        if sample_weight is None:
            weights = np.ones(n, dtype=np.int64)
        else:
            weights = _as_value_vector(sample_weight, name="sample_weight")
            if weights.shape[0] != n:
                raise ValueError("sample_weight length does not match X")
            if (weights < 0).any():
                raise ValueError("sample_weight must be nonnegative")

        if test_keys is None:
            keys = np.ones(n, dtype=bool)
        else:
            keys = np.asarray(test_keys, dtype=bool)
            if keys.shape != (n,):
                raise ValueError("test_keys must be a boolean vector matching X")

        order = np.argsort(values, kind="stable")
        sorted_values = values[order]
        if np.any(np.diff(sorted_values) == 0):
            raise ValueError("query values must be distinct")

        class_spec = []
        for ci in range(indicator.shape[1]):
            members = tuple(int(v) for v in sorted_values[indicator[order][:, ci]])
            if members:
                class_spec.append((f"c{ci}", members))
        self._class_of_id = {
            cid: self.classes_[int(cid[1:])] for cid, _ in class_spec
        }

        self.instance_ = Instance(
            [int(v) for v in sorted_values],
            [int(w) for w in weights[order]],
            [bool(k) for k in keys[order]],
            class_spec,
        )
        result = solve(self.instance_, mode=self.mode, max_records=self.max_records)
        if result.status != "optimal":
            raise ValueError(
                "no decision tree classifies these values: some stretch of "
                "values without test keys spans multiple classes"
            )
        self.tree_ = result.tree
        self.cost_ = result.cost
        self.stats_ = result.stats
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """Classify values seen during fit.

        Returns, for each value, the label of the class the tree's search
        lands on; raises for values not in the training set.
        """
        check_is_fitted(self)
        values = _as_value_vector(X)
        out = []
        for v in values:
            rank = self.instance_.value_to_rank.get(int(v))
            if rank is None:
                raise ValueError(f"value {int(v)} was not in the training data")
            found = search(self.tree_, self.instance_, rank)
            out.append(self._class_of_id[found.class_id])
        return np.asarray(out)

    def decision_depths(self, X):
        """Number of tests performed for each value in X."""
        check_is_fitted(self)
        values = _as_value_vector(X)
        depths = []
        for v in values:
            rank = self.instance_.value_to_rank.get(int(v))
            if rank is None:
                raise ValueError(f"value {int(v)} was not in the training data")
            depths.append(search(self.tree_, self.instance_, rank).depth)
        return np.asarray(depths, dtype=np.int64)
