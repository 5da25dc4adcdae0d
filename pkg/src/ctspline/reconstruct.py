"""From coefficients to curves: the optimal input and the simulated output.

The input is ``u(t) = sum_i theta_i g_i(t)``; the output comes from
integrating ``x' = A x + b u`` from ``x(0) = 0`` with classical RK4.
``u`` has kinks at the sample instants, so the integration mesh is the
uniform mesh refined with those instants (and with the output grid). No
step straddles a kink and the output at every sample instant and grid
point is a mesh value, not an interpolant.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionError, DomainError, NumericalError
from .kernel import as_gram_array, validate_times
from .sysmodel import StateSpaceModel, impulse_response

DEFAULT_GRID_POINTS = 501
DEFAULT_RK4_STEPS = 2000


@dataclass(frozen=True, eq=False)
class FitResult:
    theta: np.ndarray
    grid: np.ndarray
    u_curve: np.ndarray
    y_curve: np.ndarray
    fitted_at_samples: np.ndarray
    residuals: np.ndarray
    mode: str
    input_energy: float = float("nan")
    diagnostics: object = None


class Curves(NamedTuple):
    grid: np.ndarray
    u: np.ndarray
    y: np.ndarray
    y_at_samples: np.ndarray
    input_energy: float


class ErrorMetrics(NamedTuple):
    max_abs: float
    rms: float
    per_point: np.ndarray


def _coerce(theta, times):
    ts = validate_times(times)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != ts.size:
        raise DimensionError(f"{theta.size} coefficients for {ts.size} sample instants")
    return theta, ts


def _input_values(model, theta, times, t, left=False):
    # left=True gives the left limit, which differs from the value at a
    # sample instant when c^T b != 0
    tau = times[None, :] - t[:, None]
    live = (tau >= 0) if left else (tau > 0)
    h = np.zeros(tau.shape)
    if np.any(live):
        h[live] = impulse_response(model, tau[live])
    return h @ theta


def control_input(model: StateSpaceModel, theta, times, t):
    """``u(t) = sum_i theta_i g_i(t)`` for scalar or array ``t`` in ``[0, T]``."""
    theta, ts = _coerce(theta, times)
    t_arr = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t_arr).reshape(-1)
    if np.any(flat < 0) or np.any(flat > ts[-1]):
        raise DomainError(f"t outside [0, {ts[-1]}]")
    u = _input_values(model, theta, ts, flat)
    return float(u[0]) if t_arr.ndim == 0 else u.reshape(t_arr.shape)


def _mesh(T, steps, extra):
    nodes = np.union1d(np.linspace(0.0, T, steps + 1), extra)
    # drop near-duplicates produced by rounding
    keep = np.concatenate([[True], np.diff(nodes) > 1e-12 * max(T, 1.0)])
    nodes = nodes[keep]
    nodes[-1] = T
    return nodes


def simulate(model: StateSpaceModel, theta, times, nodes):
    """RK4 on the given mesh; returns ``(x, energy)`` at every node.

    The state is augmented with ``int_0^t u^2`` so the input energy comes
    out of the same integration (Simpson's rule per step, exact at kinks).
    """
    theta, ts = _coerce(theta, times)
    h = np.diff(nodes)
    u_start = _input_values(model, theta, ts, nodes[:-1])
    u_mid = _input_values(model, theta, ts, nodes[:-1] + 0.5 * h)
    u_end = _input_values(model, theta, ts, nodes[1:], left=True)

    A, b = model.A, model.b
    x = np.zeros((nodes.size, model.order))
    for k in range(h.size):
        hk, xk = h[k], x[k]
        k1 = A @ xk + b * u_start[k]
        k2 = A @ (xk + 0.5 * hk * k1) + b * u_mid[k]
        k3 = A @ (xk + 0.5 * hk * k2) + b * u_mid[k]
        k4 = A @ (xk + hk * k3) + b * u_end[k]
        x[k + 1] = xk + hk / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    energy = np.concatenate([[0.0], np.cumsum(h / 6.0 * (u_start**2 + 4.0 * u_mid**2 + u_end**2))])
    return x, energy


def output_curve(model: StateSpaceModel, theta, times, grid_points: int = DEFAULT_GRID_POINTS,
                 *, gram=None, steps: int = DEFAULT_RK4_STEPS, scale: Optional[float] = None,
                 check: bool = True) -> Curves:
    """Simulate the system driven by the optimal input on a uniform grid over ``[0, T]``.

    When ``gram`` is given (or ``check`` is true, in which case it is
    required) the simulated outputs at the sample instants are compared with
    ``G theta``; a mismatch above ``1e-6 (1 + scale)`` raises
    :class:`NumericalError`. ``scale`` defaults to ``max |G theta|``.
    """
    if grid_points < 2:
        raise DomainError(f"grid_points must be at least 2, got {grid_points}")
    if steps < 1:
        raise DomainError(f"steps must be at least 1, got {steps}")
    theta, ts = _coerce(theta, times)
    T = ts[-1]
    grid = np.linspace(0.0, T, grid_points)
    nodes = _mesh(T, steps, np.concatenate([ts, grid]))
    x, energy = simulate(model, theta, ts, nodes)
    y_nodes = x @ model.c
    y_grid = np.interp(grid, nodes, y_nodes)
    y_samples = np.interp(ts, nodes, y_nodes)
    u_grid = _input_values(model, theta, ts, grid)

    if check:
        if gram is None:
            raise ValueError("the cross-check needs the Gram matrix; pass gram= or check=False")
        expected = as_gram_array(gram) @ theta
        if scale is None:
            scale = np.abs(expected).max()
        err = np.abs(y_samples - expected)
        atol = 1e-6 * (1.0 + scale)
        if err.max() > atol:
            k = int(np.argmax(err))
            raise NumericalError(
                f"simulated output at t={ts[k]} is off by {err[k]:.3e} from G theta "
                f"(allowed {atol:.1e}); increase the number of RK4 steps", where=k)
    return Curves(grid, u_grid, y_grid, y_samples, float(energy[-1]))


def error_metrics(result, truth) -> ErrorMetrics:
    """Pointwise absolute error of the fitted output curve against ``truth`` on the grid."""
    y_curve = result.y_curve if hasattr(result, "y_curve") else np.asarray(result, dtype=float)
    truth = np.asarray(truth, dtype=float).reshape(-1)
    if truth.shape != y_curve.shape:
        raise DimensionError(f"truth has {truth.size} points, curve has {y_curve.size}")
    per_point = np.abs(y_curve - truth)
    return ErrorMetrics(float(per_point.max()), float(np.sqrt(np.mean(per_point**2))), per_point)


def make_result(model, gram, samples, theta, mode, grid_points=DEFAULT_GRID_POINTS,
                steps=DEFAULT_RK4_STEPS, diagnostics=None) -> FitResult:
    """Package coefficients, curves and residuals for one fit."""
    G = as_gram_array(gram)
    fitted = G @ np.asarray(theta, dtype=float)
    curves = output_curve(model, theta, samples.times, grid_points, gram=G, steps=steps,
                          scale=max(np.abs(samples.values).max(), np.abs(fitted).max()))
    return FitResult(
        theta=np.asarray(theta, dtype=float),
        grid=curves.grid,
        u_curve=curves.u,
        y_curve=curves.y,
        fitted_at_samples=fitted,
        residuals=fitted - samples.values,
        mode=mode,
        input_energy=curves.input_energy,
        diagnostics=diagnostics,
    )
