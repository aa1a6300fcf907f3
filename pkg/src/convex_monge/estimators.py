"""Scikit-learn style wrapper around the exact transport solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .transforms import sup_transform
from .transport import cost_matrix, solve_kantorovich


def _weights(w, n, name):
    if w is None:
        return np.full(n, 1.0 / n)
    w = check_array(w, ensure_2d=False, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {w.shape}")
    if np.any(w < 0):
        raise ValueError(f"{name} must be nonnegative")
    return w / w.sum()


class KantorovichTransport(TransformerMixin, BaseEstimator):
    """Exact discrete optimal transport for the cost ``|x - y|^2 / 2``.

    Parameters
    ----------
    max_iter : int, optional
        Pivot cap forwarded to the network simplex.

    Attributes
    ----------
    coupling_ : ndarray, shape (n_source, n_target)
        Dense optimal plan.
    phi_, psi_ : ndarray
        Tight Kantorovich potentials on the source and target points.
    cost_ : float
        Optimal transport cost.
    support_ : list of (i, j)
        Pairs carrying mass.

    Examples
    --------
    >>> import numpy as np
    >>> X = np.array([[0.0, 0.0], [1.0, 0.0]])
    >>> ot = KantorovichTransport().fit(X, X + [0.0, 2.0])
    >>> round(ot.cost_, 12)
    2.0
    """

    def __init__(self, max_iter=None):
        self.max_iter = max_iter

    def fit(self, X, Y, a=None, b=None):
        """Solve the transport problem from the rows of X to the rows of Y.

        ``a`` and ``b`` are optional masses (normalized to sum to one);
        uniform weights are used when omitted.
        """
        X = check_array(X, dtype=float)
        Y = check_array(Y, dtype=float)
        if X.shape[1] != Y.shape[1]:
            raise ValueError(f"X and Y dimensions differ: {X.shape[1]} != {Y.shape[1]}")
        a = _weights(a, len(X), "a")
        b = _weights(b, len(Y), "b")
        self.cost_matrix_ = cost_matrix(X, Y)
        plan, pot, report = solve_kantorovich(a, b, self.cost_matrix_, max_iter=self.max_iter)
        self.source_ = X
        self.target_ = Y
        self.plan_ = plan
        self.coupling_ = plan.todense()
        self.potentials_ = pot
        self.phi_ = pot.phi
        self.psi_ = pot.psi
        self.cost_ = report.primal_value
        self.support_ = report.support
        self.report_ = report
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Send each row x to the target minimizing ``|x - y_j|^2 / 2 - psi_j``.

        On fitted source points carrying mass this picks a point in the
        support of the plan.
        """
        check_is_fitted(self, "psi_")
        X = check_array(X, dtype=float)
        scores = cost_matrix(X, self.target_) - self.psi_[None, :]
        return self.target_[np.argmin(scores, axis=1)]

    def barycentric_map(self):
        """Mass-weighted mean target of each source point (NaN for empty rows)."""
        check_is_fitted(self, "coupling_")
        rows = self.coupling_.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return (self.coupling_ @ self.target_) / rows[:, None]

    def sup_transform(self):
        """``phi^box`` on the target points."""
        check_is_fitted(self, "phi_")
        return sup_transform(self.phi_, self.cost_matrix_, "M->N")
