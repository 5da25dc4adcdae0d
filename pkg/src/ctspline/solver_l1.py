"""Robust coefficients from the epsilon-insensitive criterion.

The primal problem is

    minimize  1/2 ||theta||^2 + C sum_i |phi_i^T theta - y_i|_eps

with ``phi_i`` the i-th row of the Gram matrix. Writing the absolute
deviations with slack variables gives a convex QP whose dual, in the
combined variable ``beta = alpha - alpha_hat``, is

    minimize  1/2 beta^T Q beta - y^T beta + eps ||beta||_1
    subject to  -C <= beta_i <= C,

with ``Q = G G``. There is no intercept, hence no equality constraint: the
feasible set is a plain box. The primal solution is ``theta = G beta``.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionError, DomainError, ConvergenceError
from .kernel import as_gram_array

@dataclass(frozen=True)
class SvrParams:
    C: float
    epsilon: float
    tol: float = 1e-8
    max_iter: int = 10**6

    def __post_init__(self):
        if not self.C > 0:
            raise DomainError(f"C must be positive, got {self.C}")
        if not self.epsilon >= 0:
            raise DomainError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be at least 1, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class SolveDiagnostics:
    iterations: int
    gap: float
    relative_gap: float
    kkt_violation: float
    n_support: int
    alpha: np.ndarray
    alpha_hat: np.ndarray


def eps_insensitive(xi, epsilon: float):
    """``max(|xi| - epsilon, 0)``, elementwise for arrays."""
    if epsilon < 0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    out = np.maximum(np.abs(xi) - epsilon, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _check(G, y, theta=None):
    G = as_gram_array(G)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != G.shape[0]:
        raise DimensionError(f"y has length {y.size}, Gram matrix is {G.shape[0]}x{G.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise DomainError("observations must be finite")
    if theta is None:
        return G, y
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != y.size:
        raise DimensionError(f"theta has length {theta.size}, expected {y.size}")
    return G, y, theta


def objective_l1(theta, G, y, params: SvrParams) -> float:
    G, y, theta = _check(G, y, theta)
    loss = eps_insensitive(G @ theta - y, params.epsilon)
    return float(0.5 * theta @ theta + params.C * np.sum(loss))


def dual_objective(alpha, alpha_hat, G, y, params: SvrParams) -> float:
    G, y = _check(G, y)
    beta = np.asarray(alpha, dtype=float) - np.asarray(alpha_hat, dtype=float)
    theta = G @ beta
    return float(-0.5 * theta @ theta
                 - params.epsilon * np.sum(np.add(alpha, alpha_hat)) + y @ beta)


def duality_gap(theta, alpha, alpha_hat, G, y, params: SvrParams) -> float:
    """Primal objective at ``theta`` minus dual objective at ``(alpha, alpha_hat)``."""
    alpha = np.asarray(alpha, dtype=float)
    alpha_hat = np.asarray(alpha_hat, dtype=float)
    for name, a in (("alpha", alpha), ("alpha_hat", alpha_hat)):
        if np.any(a < 0) or np.any(a > params.C):
            raise DomainError(f"{name} must lie in [0, C={params.C}]")
    return objective_l1(theta, G, y, params) - dual_objective(alpha, alpha_hat, G, y, params)



# --- compensated arithmetic -------------------------------------------------
# Q = G G squares the conditioning of G, so residuals computed naively in
# double precision lose the digits needed for a 1e-8 certificate. Dot2
# (Ogita, Rump, Oishi) keeps the products and sums error-free.

_REFINE_STEPS = 6
_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _dot2(A, x, start=None):
    """``A @ x (+ start)`` as an unevaluated pair ``(hi, lo)`` in twice the working precision."""
    s = np.zeros(A.shape[0]) if start is None else np.array(start, dtype=float)
    c = np.zeros(A.shape[0])
    for k in range(A.shape[1]):
        p, pe = _two_prod(A[:, k], x[k])
        s, se = _two_sum(s, p)
        c += pe + se
    return _two_sum(s, c)


def _residuals(G, beta, y, beta_lo=None):
    """Accurate ``theta = G beta`` and ``r = G theta - y``.

    ``beta`` may carry a low-order part ``beta_lo``. Returns
    ``(theta, theta_lo, r_exact, r_rounded)``: ``theta`` is the double
    coefficient vector handed back to callers, ``theta_lo`` its rounding
    error, ``r_exact`` the residual of the exact ``G beta`` and
    ``r_rounded`` the residual of the rounded ``theta``.
    """
    if beta_lo is None:
        th, tl = _dot2(G, beta)
    else:
        th, tl = _dot2(np.hstack([G, G]), np.concatenate([beta, beta_lo]))
    rh, rl = _dot2(G, th, start=-y)
    r_rounded = rh + rl
    r_exact = r_rounded + G @ tl
    return th, tl, r_exact, r_rounded


def _kkt_violation(beta, grad, C, eps):
    """Per-coordinate violation of the dual optimality conditions.

    ``grad`` is ``Q beta - y``, the gradient of the smooth part of the dual.
    """
    v = np.maximum(np.abs(grad) - eps, 0.0)
    up, dn = grad + eps, grad - eps
    pos, neg = beta > 0, beta < 0
    v[pos] = np.abs(up[pos])
    v[neg] = np.abs(dn[neg])
    top, bottom = beta >= C, beta <= -C
    v[top] = np.maximum(up[top], 0.0)
    v[bottom] = np.maximum(-dn[bottom], 0.0)
    return v


def _certificate(G, beta, y, C, eps, beta_lo=None):
    """Duality gap of the returned ``theta`` against the dual point ``beta``.

    With ``theta = G beta`` the gap splits into per-sample terms
    ``C |r_i|_eps + eps |beta_i| + beta_i r_i``, each non-negative for
    ``|beta_i| <= C``. Summing those avoids cancelling two large objectives.
    The last two summands charge the rounding of ``theta`` to double.
    """
    th, tl, r, r_th = _residuals(G, beta, y, beta_lo)
    terms = C * np.maximum(np.abs(r_th) - eps, 0.0) + eps * np.abs(beta) + beta * r
    gap = float(np.sum(terms) + 0.5 * tl @ tl - tl @ (th + tl))
    return th, r, max(gap, 0.0)


# --- solvers ------------------------------------------------------------------

def _active_set(G, y, C, eps, tol, max_iter):
    """Primal active-set method on the dual (bounded NNLS in the style of Lawson and Hanson).

    Each coordinate of ``beta`` is either fixed (at 0 or at +-C) or free with
    a frozen sign. On the free set the dual is an unconstrained quadratic;
    its minimizer comes from a QR factorization of the free Gram columns,
    so ``G G`` is never formed. Steps that would cross zero or the box are
    shortened and the blocking coordinate is fixed. The outer loop frees the
    fixed coordinate with the largest KKT violation.

    Free coordinates are refined in double-double: a 1e-8 residual needs
    ``beta`` resolved below its own ulp once ``||G||^2`` is large.
    """
    N = y.size
    beta = np.zeros(N)
    lo = np.zeros(N)
    free = np.zeros(N, dtype=bool)
    sign = np.zeros(N)
    blocked = np.zeros(N, dtype=bool)

    def violation(beta, lo):
        _, _, r, _ = _residuals(G, beta, y, lo)
        return r, _kkt_violation(beta, r, C, eps)

    def solve_free(beta):
        A = G[:, free]
        _, R = linalg.qr(A, mode="economic")

        def normal_solve(rhs):
            z = linalg.solve_triangular(R, rhs, trans="T")
            return linalg.solve_triangular(R, z)

        v = G[:, ~free] @ beta[~free]
        hi = beta.copy()
        hi[free] = normal_solve(y[free] - eps * sign[free] - A.T @ v)
        lo = np.zeros(N)
        best, best_err = (hi, lo), np.inf
        for _ in range(_REFINE_STEPS):
            r, _ = violation(hi, lo)
            res = -(r[free] + eps * sign[free])
            err = np.abs(res).max()
            if err >= best_err:
                break
            best, best_err = (hi, lo), err
            hi, lo = hi.copy(), lo.copy()
            hi[free], lo[free] = _two_sum(hi[free], lo[free] + normal_solve(res))
        return best

    for it in range(max_iter):
        r, viol = violation(beta, lo)
        if viol.max() <= tol:
            return beta, lo, it, viol
        fixed_viol = np.where(free | blocked, 0.0, viol)
        i = int(np.argmax(fixed_viol))
        if fixed_viol[i] <= tol:
            # only free-set accuracy is lacking, or every violator is blocked
            if free.any():
                cand = solve_free(beta)
                if violation(*cand)[1].max() < viol.max():
                    beta, lo = cand
                    continue
            return beta, lo, it, viol
        if beta[i] == 0.0:
            sign[i] = 1.0 if r[i] + eps < 0 else -1.0
        else:
            sign[i] = np.sign(beta[i])
        free[i] = True
        start = beta.copy()

        for _ in range(N + 1):
            x, x_lo = solve_free(beta)
            cross_zero = free & (sign * x <= 0)
            cross_box = free & (sign * x > C)
            if not (cross_zero | cross_box).any():
                beta, lo = x, x_lo
                break
            d = x - beta
            steps = np.full(N, np.inf)
            steps[cross_zero] = -beta[cross_zero] / d[cross_zero]
            steps[cross_box] = (sign[cross_box] * C - beta[cross_box]) / d[cross_box]
            j = int(np.argmin(steps))
            beta = beta + np.clip(steps[j], 0.0, 1.0) * d
            lo = np.zeros(N)
            to_zero = free & (sign * beta <= 0)
            to_zero[j] |= cross_zero[j]
            to_box = free & ~to_zero & (sign * beta >= C)
            to_box[j] |= cross_box[j] and not cross_zero[j]
            beta[to_zero] = 0.0
            beta[to_box] = sign[to_box] * C
            free[to_zero | to_box] = False
            sign[to_zero] = 0.0
            if not free.any():
                break

        if np.array_equal(beta, start):
            # numerically stuck on this coordinate; try the others first
            blocked[i] = True
        else:
            blocked[:] = False

    _, viol = violation(beta, lo)
    return beta, lo, max_iter, viol


def _coordinate_descent(G, y, C, eps, tol, max_iter):
    """Cyclic exact coordinate minimization of the dual (soft threshold, then clip)."""
    N = y.size
    Q = G @ G
    Q = 0.5 * (Q + Q.T)
    diag = np.diag(Q).copy()
    beta = np.zeros(N)
    Qb = np.zeros(N)
    for sweep in range(max_iter):
        _, _, r, _ = _residuals(G, beta, y)
        viol = _kkt_violation(beta, r, C, eps)
        if viol.max() <= tol:
            return beta, None, sweep, viol
        for i in range(N):
            q, g, old = diag[i], Qb[i] - y[i], beta[i]
            if q > 0:
                z = old - g / q
                new = min(max(np.sign(z) * max(abs(z) - eps / q, 0.0), -C), C)
            else:
                # coordinate does not enter the quadratic part
                new = -C if g - eps > 0 else (C if g + eps < 0 else 0.0)
            if new != old:
                beta[i] = new
                Qb += Q[:, i] * (new - old)
        Qb = Q @ beta
    _, _, r, _ = _residuals(G, beta, y)
    return beta, None, max_iter, _kkt_violation(beta, r, C, eps)


_METHODS = {"active-set": _active_set, "cd": _coordinate_descent}


def fit_l1(G, y, params: SvrParams, method: str = "active-set"):
    """Minimize the robust objective; return ``(theta, diagnostics)``.

    ``method`` selects the dual solver: ``"active-set"`` (default, finite
    termination, insensitive to the conditioning of ``G G``) or ``"cd"``
    (cyclic coordinate descent, fine for well-conditioned Gram matrices).
    Either stops once the largest KKT violation is at most ``params.tol``;
    for ``"cd"``, ``params.max_iter`` counts sweeps, for ``"active-set"``
    working-set changes.

    Raises :class:`ConvergenceError` with the best iterate if the tolerance
    is not reached.
    """
    G, y = _check(G, y)
    try:
        solver = _METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(_METHODS)}") from None
    C, eps = params.C, params.epsilon
    beta, beta_lo, iterations, viol = solver(G, y, C, eps, params.tol, params.max_iter)
    theta, _, gap = _certificate(G, beta, y, C, eps, beta_lo)
    if viol.max() > params.tol:
        raise ConvergenceError(
            f"{method} solver stopped after {iterations} iterations with KKT violation "
            f"{viol.max():.3e} > tol {params.tol:.1e} (duality gap {gap:.3e})",
            theta=theta, gap=gap)
    primal = objective_l1(theta, G, y, params)
    diagnostics = SolveDiagnostics(
        iterations=iterations,
        gap=gap,
        relative_gap=gap / max(1.0, abs(primal)),
        kkt_violation=float(viol.max()),
        n_support=int(np.count_nonzero(beta)),
        alpha=np.maximum(beta, 0.0),
        alpha_hat=np.maximum(-beta, 0.0),
    )
    return theta, diagnostics
