"""Control-theoretic smoothing splines with quadratic or robust (epsilon-insensitive) fitting."""
from .errors import ConvergenceError, DimensionError, DomainError, NumericalError, SplineError
from .experiment import DemoSpec, generate_data, paper_system, paper_times, run_comparison
from .kernel import (GramMatrix, QuadratureSettings, SampleSet, adaptive_simpson, cross_kernel,
                     feature_vector, gram_matrix)
from .reconstruct import FitResult, control_input, error_metrics, output_curve
from .solver_l1 import SvrParams, duality_gap, eps_insensitive, fit_l1, objective_l1
from .solver_l2 import L2Params, fit_l2, objective_l2
from .spline import FitConfig, fit_spline
from .sysmodel import StateSpaceModel, check_minimal, kernel_g, matrix_exponential

__version__ = "0.1.0"
