"""Closed-form coefficients for the quadratic (L2) smoothing criterion.

With weights ``W = diag(w)`` the optimal coefficients solve
``(lam W^-1 + G) theta = y``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionError, DomainError, NumericalError
from .kernel import as_gram_array


@dataclass(frozen=True, eq=False)
class L2Params:
    lam: float
    weights: np.ndarray = None

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if self.weights is not None:
            w = np.array(self.weights, dtype=float).reshape(-1)
            if not np.all(w > 0):
                raise DomainError("every weight must be positive")
            object.__setattr__(self, "weights", w)

    def weight_vector(self, N: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(N)
        if self.weights.size != N:
            raise DimensionError(f"{self.weights.size} weights for {N} samples")
        return self.weights


def _check(G, y):
    G = as_gram_array(G)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != G.shape[0]:
        raise DimensionError(f"y has length {y.size}, Gram matrix is {G.shape[0]}x{G.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise DomainError("observations must be finite")
    return G, y


def fit_l2(G, y, params: L2Params) -> np.ndarray:
    G, y = _check(G, y)
    w = params.weight_vector(y.size)
    K = G + np.diag(params.lam / w)
    try:
        theta = linalg.cho_solve(linalg.cho_factor(K), y)
    except linalg.LinAlgError:
        # rounding can break positive definiteness when lam is tiny
        try:
            with np.errstate(divide="ignore", invalid="ignore"):
                theta = linalg.solve(K, y)
        except linalg.LinAlgError as exc:
            raise NumericalError(f"L2 system is singular: {exc}") from exc
        if not np.all(np.isfinite(theta)):
            raise NumericalError("L2 system is singular")
    return theta


def objective_l2(theta, G, y, params: L2Params) -> float:
    """``lam theta^T G theta + sum_i w_i ((G theta)_i - y_i)^2``.

    This is the quadratic cost restricted to inputs in the span of the
    kernel functions, where the input energy equals ``theta^T G theta``.
    """
    G, y = _check(G, y)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != y.size:
        raise DimensionError(f"theta has length {theta.size}, expected {y.size}")
    w = params.weight_vector(y.size)
    Gt = G @ theta
    return float(params.lam * theta @ Gt + np.sum(w * (Gt - y) ** 2))
