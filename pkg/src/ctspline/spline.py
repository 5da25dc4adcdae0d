"""One-call fitting: Gram matrix, coefficients, curves."""
from dataclasses import dataclass
from typing import Optional

from .kernel import GramMatrix, QuadratureSettings, SampleSet, gram_matrix
from .reconstruct import DEFAULT_GRID_POINTS, FitResult, make_result
from .solver_l1 import SvrParams, fit_l1
from .solver_l2 import L2Params, fit_l2
from .sysmodel import StateSpaceModel

MODES = ("l1", "l2")


@dataclass(frozen=True)
class FitConfig:
    mode: str
    l2: Optional[L2Params] = None
    l1: Optional[SvrParams] = None
    quad: QuadratureSettings = QuadratureSettings()
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "l2" and self.l2 is None:
            raise ValueError("mode 'l2' needs L2Params")
        if self.mode == "l1" and self.l1 is None:
            raise ValueError("mode 'l1' needs SvrParams")


def fit_spline(model: StateSpaceModel, samples: SampleSet, config: FitConfig,
               gram: Optional[GramMatrix] = None) -> FitResult:
    """Fit a spline to ``samples`` in the requested mode.

    A precomputed ``gram`` for the same model and sample times can be
    passed to skip the quadrature.
    """
    G = gram if gram is not None else gram_matrix(model, samples.times, config.quad)
    if config.mode == "l2":
        theta, diagnostics = fit_l2(G, samples.values, config.l2), None
    else:
        theta, diagnostics = fit_l1(G, samples.values, config.l1)
    return make_result(model, G, samples, theta, config.mode, config.grid_points,
                       diagnostics=diagnostics)
