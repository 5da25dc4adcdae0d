"""Gram matrix of the kernel functions and the feature vectors built from it.

Entry ``(i, j)`` is the L2 inner product of the kernels for ``t_i`` and
``t_j``. Both vanish past their own instant, so the integral runs over
``[0, min(t_i, t_j)]``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, NumericalError
from .sysmodel import StateSpaceModel, impulse_response


@dataclass(frozen=True)
class QuadratureSettings:
    tol: float = 1e-10
    max_evals: int = 10**6

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError(f"quadrature tol must be positive, got {self.tol}")
        if self.max_evals < 5:
            raise DomainError(f"quadrature max_evals too small: {self.max_evals}")


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sampling instants ``0 < t_1 < ... < t_N`` and observed values."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float).reshape(-1)
        y = np.array(self.values, dtype=float).reshape(-1)
        validate_times(t)
        if y.shape != t.shape:
            raise DimensionError(f"{t.size} times but {y.size} values")
        if not np.all(np.isfinite(y)):
            raise DomainError("sample values must be finite")
        t.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", y)

    def __len__(self):
        return self.times.size

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


def validate_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size < 1:
        raise DimensionError("need at least one sampling instant")
    if not np.all(np.isfinite(t)):
        raise DomainError("sampling instants must be finite")
    if t[0] <= 0:
        raise DomainError(f"sampling instants must be positive, got t_1={t[0]}")
    bad = np.flatnonzero(np.diff(t) <= 0)
    if bad.size:
        k = bad[0] + 1
        raise DomainError(
            f"sampling instants must be strictly increasing: t[{k}]={t[k]} follows t[{k - 1}]={t[k - 1]}")
    return t


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    times: np.ndarray = field(repr=False)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def shape(self):
        return self.entries.shape

    def __len__(self):
        return self.entries.shape[0]


def as_gram_array(G) -> np.ndarray:
    """Accept a GramMatrix or any square array-like; return the float array."""
    arr = np.asarray(G, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"Gram matrix must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("Gram matrix has non-finite entries")
    return arr


def adaptive_simpson(f, a, b, tol=1e-10, max_evals=10**6, initial_panels=4):
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson with Richardson correction.

    Panels are refined breadth-first so that ``f`` is always called on a
    whole batch of nodes; ``f`` must therefore accept a 1-D array. A panel
    of width ``h`` is accepted once ``|S_left + S_right - S_whole| <= 15 tol h / (b - a)``.

    Returns ``(integral, evaluations)``. Raises :class:`NumericalError`
    when ``max_evals`` is exhausted.
    """
    if b <= a:
        return 0.0, 0
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    fx = f(np.linspace(a, b, 2 * initial_panels + 1))
    evals = fx.size
    flo, fmid, fhi = fx[0:-1:2], fx[1::2], fx[2::2]
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    ptol = np.full(lo.shape, tol / initial_panels)
    parts = []
    while lo.size:
        mid = 0.5 * (lo + hi)
        fq = f(np.concatenate([0.5 * (lo + mid), 0.5 * (mid + hi)]))
        evals += fq.size
        fl, fr = np.split(fq, 2)
        left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi)
        delta = left + right - whole
        done = np.abs(delta) <= 15.0 * ptol
        # panels that can no longer be split in floating point are accepted as is
        done |= (mid <= lo) | (mid >= hi)
        parts.extend((left + right + delta / 15.0)[done])
        keep = ~done
        if not keep.any():
            break
        if evals >= max_evals:
            raise NumericalError(
                f"adaptive Simpson exceeded {max_evals} evaluations on [{a}, {b}]")
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        flo, fl, fmid, fr, fhi = flo[keep], fl[keep], fmid[keep], fr[keep], fhi[keep]
        left, right, ptol = left[keep], right[keep], ptol[keep] / 2.0
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        flo, fhi = np.concatenate([flo, fmid]), np.concatenate([fmid, fhi])
        fmid = np.concatenate([fl, fr])
        whole = np.concatenate([left, right])
        ptol = np.concatenate([ptol, ptol])
    return math.fsum(parts), evals


def _product_integral(model, t_a, t_b, quad, where):
    upper = min(t_a, t_b)

    def integrand(s):
        h = impulse_response(model, np.concatenate([t_a - s, t_b - s]))
        ha, hb = np.split(h, 2)
        return ha * hb

    try:
        value, _ = adaptive_simpson(integrand, 0.0, upper, quad.tol, quad.max_evals)
    except NumericalError as exc:
        raise NumericalError(f"Gram quadrature failed for entry {where}: {exc}", where=where) from exc
    return value


def gram_matrix(model: StateSpaceModel, times, quad: QuadratureSettings = None) -> GramMatrix:
    """Assemble the Gram matrix by quadrature, computing ``i <= j`` and mirroring."""
    quad = quad or QuadratureSettings()
    t = validate_times(times)
    N = t.size
    G = np.empty((N, N))
    for i in range(N):
        for j in range(i, N):
            G[i, j] = G[j, i] = _product_integral(model, t[i], t[j], quad, (i, j))
    G.setflags(write=False)
    t = t.copy()
    t.setflags(write=False)
    return GramMatrix(G, t)


def feature_vector(G, i: int) -> np.ndarray:
    """Row ``i`` (0-based) of the Gram matrix."""
    arr = as_gram_array(G)
    N = arr.shape[0]
    if not 0 <= i < N:
        raise IndexError(f"feature index {i} out of range for N={N}")
    return arr[i].copy()


def cross_kernel(model: StateSpaceModel, t: float, times, quad: QuadratureSettings = None) -> np.ndarray:
    """Inner products of the kernel at an arbitrary instant ``t`` with every sample kernel.

    When ``t`` coincides with ``t_j`` this reproduces row ``j`` of the Gram matrix.
    """
    quad = quad or QuadratureSettings()
    ts = validate_times(times)
    if not 0.0 <= t <= ts[-1]:
        raise DomainError(f"t={t} outside [0, {ts[-1]}]")
    return np.array([_product_integral(model, t, ti, quad, (t, k)) for k, ti in enumerate(ts)])
