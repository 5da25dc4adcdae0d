"""Single-input single-output linear system and its matrix exponential.

The system is

    x'(t) = A x(t) + b u(t),   y(t) = c^T x(t),   x(0) = 0,

and the only transcendental quantity needed downstream is ``exp(A t)``.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, DomainError

# Pade(13) coefficients and the largest 1-norm for which the degree-13
# approximant is accurate to double precision (Higham 2005).
_PADE13 = np.array([
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
])
_THETA13 = 5.371920351148152

RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Matrices ``(A, b, c)`` of a SISO linear system of order ``n``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float, ndmin=2)
        b = np.array(self.b, dtype=float).reshape(-1)
        c = np.array(self.c, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise DimensionError(f"A must be a non-empty square matrix, got shape {A.shape}")
        n = A.shape[0]
        if b.shape != (n,) or c.shape != (n,):
            raise DimensionError(
                f"b and c must have length {n}, got {b.shape[0]} and {c.shape[0]}")
        for name, arr in (("A", A), ("b", b), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} has non-finite entries")
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def controllability_matrix(self) -> np.ndarray:
        cols = [self.b]
        for _ in range(self.order - 1):
            cols.append(self.A @ cols[-1])
        return np.column_stack(cols)

    def observability_matrix(self) -> np.ndarray:
        rows = [self.c]
        for _ in range(self.order - 1):
            rows.append(self.A.T @ rows[-1])
        return np.vstack(rows)


class Minimality(NamedTuple):
    controllable: bool
    observable: bool


def _numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def check_minimal(model: StateSpaceModel) -> Minimality:
    """Rank tests of the controllability and observability matrices.

    Singular values below ``1e-10`` times the largest one count as zero.
    The result is advisory; nothing downstream requires a minimal system.
    """
    n = model.order
    return Minimality(
        controllable=_numerical_rank(model.controllability_matrix()) == n,
        observable=_numerical_rank(model.observability_matrix()) == n,
    )


def _pade13_batch(X):
    n = X.shape[-1]
    eye = np.broadcast_to(np.eye(n), X.shape)
    b = _PADE13
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2)
             + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * eye)
    V = (X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2)
         + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * eye)
    return np.linalg.solve(V - U, V + U)


def matrix_exponential(M, t=1.0):
    """Return ``exp(M t)`` by scaling and squaring around a Pade(13) core.

    ``t`` may be a scalar or an array of shape ``(k,)``; in the latter case
    the result has shape ``(k, n, n)``, one exponential per time.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix_exponential needs a square matrix, got shape {M.shape}")
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(M)) or not np.all(np.isfinite(t_arr)):
        raise DomainError("matrix_exponential got non-finite input")
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    if t_arr.ndim != 1:
        raise DimensionError("t must be a scalar or a 1-D array")

    X = t_arr[:, None, None] * M[None, :, :]
    norms = np.abs(X).sum(axis=1).max(axis=1)
    with np.errstate(divide="ignore"):
        s = np.where(norms > _THETA13, np.ceil(np.log2(norms / _THETA13)), 0.0)
    s = s.astype(int)
    R = _pade13_batch(X / np.exp2(s)[:, None, None])
    R[norms == 0] = np.eye(M.shape[0])  # exact at zero lag
    for k in range(int(s.max(initial=0))):
        todo = s > k
        R[todo] = R[todo] @ R[todo]
    return R[0] if scalar else R


def impulse_response(model: StateSpaceModel, tau):
    """``c^T exp(A tau) b`` for scalar or 1-D ``tau``."""
    E = matrix_exponential(model.A, tau)
    return E @ model.b @ model.c


def kernel_g(model: StateSpaceModel, t_i, t):
    """Kernel function attached to the sample instant ``t_i``.

    Equals ``c^T exp(A (t_i - t)) b`` for ``t < t_i`` and exactly ``0`` for
    ``t >= t_i``. ``t`` may be an array.
    """
    t_arr = np.asarray(t, dtype=float)
    if t_i <= 0 or np.any(t_arr < 0):
        raise DomainError(f"kernel_g needs t_i > 0 and t >= 0 (got t_i={t_i})")
    tau = np.atleast_1d(t_i - t_arr)
    out = np.zeros(tau.shape)
    live = tau > 0
    if np.any(live):
        out[live] = impulse_response(model, tau[live])
    return float(out[0]) if t_arr.ndim == 0 else out
