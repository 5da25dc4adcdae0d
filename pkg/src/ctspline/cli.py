"""Command-line front end: ``fit``, ``demo`` and ``gram``.

Exit codes: 0 success, 2 malformed input, 3 solver did not converge,
4 numerical failure (quadrature or simulation cross-check), 5 the default
demo failed to show robustness.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import experiment
from .errors import ConvergenceError, DimensionError, DomainError, NumericalError
from .kernel import QuadratureSettings, SampleSet, gram_matrix
from .reconstruct import DEFAULT_GRID_POINTS
from .solver_l1 import SvrParams
from .solver_l2 import L2Params
from .spline import FitConfig, fit_spline
from .svgplot import Plot
from .sysmodel import StateSpaceModel, check_minimal

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_NUMERICAL, EXIT_NOT_ROBUST = 0, 2, 3, 4, 5


class InputError(Exception):
    pass


def fmt(v) -> str:
    """17 significant digits: lossless for doubles."""
    return f"{float(v):.17g}"


# --- parsing -----------------------------------------------------------------

def _number(obj, key, where, required=False, integer=False):
    if key not in obj:
        if required:
            raise InputError(f"{where}: missing required field \"{key}\"")
        return None
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise InputError(f"{where}: field \"{key}\" must be a finite number, got {v!r}")
    if integer and int(v) != v:
        raise InputError(f"{where}: field \"{key}\" must be an integer, got {v!r}")
    return int(v) if integer else float(v)


def load_config(path):
    """Parse a JSON run configuration into ``(model, FitConfig)``."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError("config: top level must be a JSON object")

    system = raw.get("system")
    if not isinstance(system, dict):
        raise InputError("config: missing required object \"system\"")
    for key in ("A", "b", "c"):
        if key not in system:
            raise InputError(f"system: missing required field \"{key}\"")
    try:
        model = StateSpaceModel(np.array(system["A"], dtype=float),
                                np.array(system["b"], dtype=float),
                                np.array(system["c"], dtype=float))
    except (ValueError, TypeError) as exc:
        raise InputError(f"system: {exc}") from exc

    fit = raw.get("fit")
    if not isinstance(fit, dict):
        raise InputError("config: missing required object \"fit\"")
    mode = fit.get("mode")
    if mode not in ("l1", "l2"):
        raise InputError(f"fit: field \"mode\" must be \"l1\" or \"l2\", got {mode!r}")
    l1 = l2 = None
    try:
        if mode == "l2":
            lam = _number(fit, "lambda", "fit", required=True)
            weights = fit.get("weights")
            if weights is not None:
                if not isinstance(weights, list):
                    raise InputError("fit: field \"weights\" must be a list of numbers")
                weights = np.array(weights, dtype=float)
            l2 = L2Params(lam, weights)
        else:
            C = _number(fit, "C", "fit", required=True)
            epsilon = _number(fit, "epsilon", "fit", required=True)
            tol = _number(fit, "tol", "fit")
            l1 = SvrParams(C, epsilon, tol if tol is not None else 1e-8)
    except (DomainError, ValueError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"fit: {exc}") from exc

    quad_raw = raw.get("quadrature", {})
    output = raw.get("output", {})
    if not isinstance(quad_raw, dict) or not isinstance(output, dict):
        raise InputError("config: \"quadrature\" and \"output\" must be objects")
    qtol = _number(quad_raw, "tol", "quadrature")
    qmax = _number(quad_raw, "max_evals", "quadrature", integer=True)
    grid_points = _number(output, "grid_points", "output", integer=True)
    try:
        quad = QuadratureSettings(qtol if qtol is not None else 1e-10,
                                  qmax if qmax is not None else 10**6)
    except DomainError as exc:
        raise InputError(f"quadrature: {exc}") from exc
    if grid_points is not None and grid_points < 2:
        raise InputError(f"output: field \"grid_points\" must be at least 2, got {grid_points}")
    config = FitConfig(mode, l2=l2, l1=l1, quad=quad,
                       grid_points=grid_points or DEFAULT_GRID_POINTS)
    return model, config


def load_samples(path) -> SampleSet:
    """Read a ``t,y`` CSV; line numbers in messages count the header as line 1."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read data {path}: {exc.strerror}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["t", "y"]:
        raise InputError(f"{path}: header must be \"t,y\", got {','.join(header or [])!r}")
    times, values = [], []
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise InputError(f"{path} line {line}: expected 2 columns, got {len(row)}")
        try:
            t, y = float(row[0]), float(row[1])
        except ValueError:
            raise InputError(f"{path} line {line}: cannot parse numbers from {row!r}") from None
        if not (math.isfinite(t) and math.isfinite(y)):
            raise InputError(f"{path} line {line}: values must be finite")
        if t <= 0:
            raise InputError(f"{path} line {line}: time t={t} must be positive")
        if times and t <= times[-1]:
            raise InputError(
                f"{path} line {line}: times must be strictly increasing (t={t} after t={times[-1]})")
        times.append(t)
        values.append(y)
    if not times:
        raise InputError(f"{path}: no data rows")
    return SampleSet(np.array(times), np.array(values))


# --- output --------------------------------------------------------------------

def _csv_text(header, rows):
    lines = [",".join(header)] if header else []
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _commit(files):
    """Write every ``(path, text)`` atomically; nothing is written until all text exists."""
    for path, text in files:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _curve_csv(result):
    return _csv_text(["t", "u", "y_fit"], zip(result.grid, result.u_curve, result.y_curve))


def _residual_path(output):
    output = Path(output)
    return output.with_name(f"{output.stem}.residuals.csv")


def _warn_if_not_minimal(model):
    flags = check_minimal(model)
    if not (flags.controllable and flags.observable):
        print(f"warning: system is not minimal (controllable={flags.controllable}, "
              f"observable={flags.observable}); fitting anyway", file=sys.stderr)


# --- commands ------------------------------------------------------------------

def cmd_fit(args):
    model, config = load_config(args.config)
    samples = load_samples(args.data)
    if config.l2 is not None and config.l2.weights is not None and config.l2.weights.size != len(samples):
        raise InputError(f"fit: field \"weights\" has {config.l2.weights.size} entries for {len(samples)} samples")
    _warn_if_not_minimal(model)
    result = fit_spline(model, samples, config)
    files = [
        (args.output, _curve_csv(result)),
        (_residual_path(args.output),
         _csv_text(["t_i", "y_i", "y_fit_i", "residual"],
                   zip(samples.times, samples.values, result.fitted_at_samples, result.residuals))),
    ]
    if args.plot:
        p = Plot(title=f"{config.mode.upper()} spline fit")
        p.line(result.grid, result.y_curve, label=f"{config.mode.upper()} fit")
        p.points(samples.times, samples.values, label="data")
        files.append((args.plot, p.render()))
    _commit(files)
    return EXIT_OK


def cmd_gram(args):
    model, config = load_config(args.config)
    samples = load_samples(args.data)
    _warn_if_not_minimal(model)
    G = gram_matrix(model, samples.times, config.quad)
    _commit([(args.output, _csv_text(None, G.entries))])
    return EXIT_OK


def _demo_spec(args):
    spec = experiment.DemoSpec()
    changes = {}
    for attr in ("seed", "noise_sigma", "outlier_offset", "outlier_index"):
        v = getattr(args, attr)
        if v is not None:
            changes[attr] = v
    if args.lam is not None:
        changes["l2"] = L2Params(args.lam)
    if args.C is not None or args.epsilon is not None:
        changes["l1"] = SvrParams(args.C if args.C is not None else spec.l1.C,
                                  args.epsilon if args.epsilon is not None else spec.l1.epsilon)
    try:
        return spec.replace(**changes), not changes
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _figures(report):
    s, t_grid = report.samples, report.l2.grid
    fig1 = Plot(title="Original curve, data and reconstructions")
    fig1.line(t_grid, report.truth_curve, label="sin 2t", color="#555555", style="dashed")
    fig1.line(t_grid, report.l1.y_curve, label="L1 fit", color="#d62728", style="solid")
    fig1.line(t_grid, report.l2.y_curve, label="L2 fit", color="#1f77b4", style="dashdot")
    fig1.points(s.times, s.values, label="data")
    fig2 = Plot(title="Regression error", ylabel="y_fit - sin 2t")
    fig2.line(t_grid, report.l1.y_curve - report.truth_curve, label="L1", color="#d62728")
    fig2.line(t_grid, report.l2.y_curve - report.truth_curve, label="L2", color="#1f77b4", style="dashdot")
    return fig1.render(), fig2.render()


def cmd_demo(args):
    try:
        spec, is_default = _demo_spec(args)
    except DomainError as exc:
        raise InputError(str(exc)) from exc
    report = experiment.run_comparison(spec)
    out = Path(args.out)
    fig1, fig2 = _figures(report)
    _commit([
        (out / "report.json", json.dumps(report.to_dict(), indent=2) + "\n"),
        (out / "l2_curve.csv", _curve_csv(report.l2)),
        (out / "l1_curve.csv", _curve_csv(report.l1)),
        (out / "comparison.svg", fig1),
        (out / "errors.svg", fig2),
    ])
    verdict = report.robustness_demonstrated
    print(f"L2 max error {report.l2_error.max_abs:.4f}, L1 max error {report.l1_error.max_abs:.4f}, "
          f"robustness_demonstrated={str(verdict).lower()}")
    if is_default and not verdict:
        return EXIT_NOT_ROBUST
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ctspline", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a spline to t,y data")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("demo", help="outlier-rejection comparison of both criteria")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--outlier-offset", type=float)
    p.add_argument("--outlier-index", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("gram", help="dump the Gram matrix as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_gram)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DomainError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
