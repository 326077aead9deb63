"""scikit-learn style wrappers around the heat flow and the certifier.

Each row of ``X`` is one function sampled on a 1-d grid with spacing ``h``
and first point ``origin``.  ``HeatFlowTransformer`` maps rows to their
heat evolution; ``ConcavityCertifier`` predicts whether each row is
certified F-concave on the grid.  Both fit into ``sklearn.pipeline``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .certify import CERTIFIED, check_F_concave, default_triples, kappa_threshold
from .grid import ConvexDomain, Grid, SampledFunction
from .heatflow import HeatFlowConfig, dirichlet_evolve, free_evolve
from .transforms import ConcavityTransform

__all__ = ["HeatFlowTransformer", "ConcavityCertifier", "validate_samples", "rows_to_functions"]


def validate_samples(X, min_points: int = 3) -> np.ndarray:
    """2-d float array of finite, nonnegative rows with at least ``min_points`` columns."""
    X = check_array(X, dtype=float, ensure_2d=True, ensure_min_features=min_points)
    if np.any(X < 0):
        i, j = np.argwhere(X < 0)[0]
        raise ValueError(f"negative sample X[{i}, {j}] = {X[i, j]!r}")
    return X


def rows_to_functions(X, origin: float, h: float) -> list[SampledFunction]:
    X = validate_samples(X)
    grid = Grid((float(origin),), float(h), (X.shape[1],))
    return [SampledFunction(grid, row) for row in X]


class HeatFlowTransformer(TransformerMixin, BaseEstimator):
    """Evolve each row by the heat semigroup for time ``t``.

    ``domain=None`` is free space; ``domain=(a, b)`` uses zero Dirichlet
    data on the interval.
    """

    def __init__(self, t=1.0, origin=0.0, h=1 / 64, domain=None, eps_trunc=1e-12):
        self.t = t
        self.origin = origin
        self.h = h
        self.domain = domain
        self.eps_trunc = eps_trunc

    def fit(self, X, y=None):
        X = validate_samples(X)
        if not self.t > 0:
            raise ValueError("t must be positive")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = validate_samples(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        out = np.empty_like(X)
        for i, u0 in enumerate(rows_to_functions(X, self.origin, self.h)):
            if not np.any(u0.values > 0):
                out[i] = 0.0
            elif self.domain is None:
                out[i] = free_evolve(u0, self.t, HeatFlowConfig(eps_trunc=self.eps_trunc)).values
            else:
                dom = ConvexDomain.interval(*self.domain)
                out[i] = dirichlet_evolve(u0, dom, self.t,
                                          HeatFlowConfig(scheme="dirichlet")).values
        return out


class ConcavityCertifier(BaseEstimator):
    """Predict ``True`` for rows certified F-concave on the grid.

    ``kappa=None`` runs the default kappa sweep and requires every scheduled
    kappa to be certified; a number checks that single kappa.  ``fit``
    stores the per-row reports in ``reports_``.
    """

    def __init__(self, family="logpower", parameter=2.0, kappa=None, tol=1e-9, origin=0.0,
                 h=1 / 64, seed=0):
        self.family = family
        self.parameter = parameter
        self.kappa = kappa
        self.tol = tol
        self.origin = origin
        self.h = h
        self.seed = seed

    def _transform(self) -> ConcavityTransform:
        return ConcavityTransform(self.family, float(self.parameter))

    def _certify(self, u):
        F = self._transform()
        if not np.any(u.values > 0):
            return None
        ts = default_triples(u, self.seed)
        if self.kappa is None:
            return kappa_threshold(u, F, triples=ts, tol=self.tol, seed=self.seed)
        return check_F_concave(u, F, self.kappa, ts, self.tol, self.seed)

    def fit(self, X, y=None):
        X = validate_samples(X)
        self._transform()
        self.n_features_in_ = X.shape[1]
        self.reports_ = [self._certify(u) for u in rows_to_functions(X, self.origin, self.h)]
        return self

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = validate_samples(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return np.array([_certified(self._certify(u))
                         for u in rows_to_functions(X, self.origin, self.h)], dtype=bool)

    def score(self, X, y):
        """Fraction of rows whose verdict matches ``y``."""
        return float(np.mean(self.predict(X) == np.asarray(y, dtype=bool)))


def _certified(rep) -> bool:
    if rep is None:  # the zero function is concave for every F
        return True
    if hasattr(rep, "all_certified"):
        return rep.all_certified
    return rep.verdict == CERTIFIED
