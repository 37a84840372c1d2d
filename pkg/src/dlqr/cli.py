"""Command-line front end: `dlqr eval|stationary|landscape|gradcheck|descend`.

Problem files are JSON (see the model module schema). Sweeps write CSV
with deterministic row order; all numbers are printed with 17 significant
digits so downstream plots reproduce bit-faithfully.

Exit codes: 0 success, 2 not stabilizing, 3 input/schema error,
4 non-existence of the requested object, 5 check or solver failure.
"""

import argparse
import json
import re
import sys

import numpy as np

from .cost import block_lyapunov_residuals, evaluate
from .descent import DescentConfig, descend, random_stabilizing_init
from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    InitFailed,
    NonSquare,
    NotObservable,
    NotStabilizing,
    OptimalTransformNotFound,
    SchemaError,
    SingularInnovation,
    SingularTransform,
    SingularX12,
    SolverDiverged,
    Unstable,
)
from .gradient import analytic_gradient, finite_difference_gradient
from .matops import SolverConfig, spectral_radius
from .model import (
    assemble,
    controller_from_wire,
    controller_to_vector,
    is_stabilizing,
    load_problem,
    matrix_to_wire,
)
from .similarity import Transform, apply, optimal_transform, transformed_cost
from .stationary import stationary_candidate

GRADCHECK_DEFAULT_TOL = 1e-5

_SWEEP_TARGET = re.compile(r"^(A_K|B_K|C_K)(?:\[(\d+),(\d+)\])?$")


def _fmt(x):
    return f"{float(x):.17g}"


def _fmt_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows = ["[" + ", ".join(_fmt(v) for v in row) + "]" for row in M]
    return "[" + ", ".join(rows) + "]"


def _controller_wire(controller):
    return {
        "A_K": matrix_to_wire(controller.A_K),
        "B_K": matrix_to_wire(controller.B_K),
        "C_K": matrix_to_wire(controller.C_K),
    }


def _solver_config(tol):
    if tol is None:
        return SolverConfig()
    return SolverConfig(tol=tol)


def _load_controller_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON in controller file: {exc}") from exc
    return controller_from_wire(obj, "controller")


def _resolve_controller(problem, controller_path):
    if controller_path is not None:
        return _load_controller_file(controller_path)
    if problem.seed_controller is not None:
        return problem.seed_controller
    raise SchemaError("no controller: pass --controller or add seed_controller")


def cmd_eval(problem_file, controller_source=None, as_json=False, tol=None):
    """Evaluate the cost of one controller and print its certificates."""
    problem = load_problem(problem_file)
    controller = _resolve_controller(problem, controller_source)
    cfg = _solver_config(tol)
    report = evaluate(problem.plant, controller, problem.X, cfg)
    loop = assemble(problem.plant, controller)
    rho = spectral_radius(loop.A_cl)
    lam_P = float(np.min(np.linalg.eigvalsh(report.P)))
    lam_S = float(np.min(np.linalg.eigvalsh(report.Sigma)))
    residuals = block_lyapunov_residuals(problem.plant, controller, report)
    if as_json:
        print(
            json.dumps(
                {
                    "J": report.J,
                    "rho": rho,
                    "lambda_min_P": lam_P,
                    "lambda_min_Sigma": lam_S,
                    "residuals": residuals,
                }
            )
        )
    else:
        print(f"J                = {_fmt(report.J)}")
        print(f"rho(A_cl)        = {_fmt(rho)}")
        print(f"lambda_min(P)    = {_fmt(lam_P)}")
        print(f"lambda_min(Sigma) = {_fmt(lam_S)}")
        for key in sorted(residuals):
            print(f"residual {key}   = {_fmt(residuals[key])}")
    return 0


def cmd_stationary(problem_file, as_json=False, tol=None):
    """Construct the closed-form stationary controller and print it."""
    problem = load_problem(problem_file)
    cfg = _solver_config(tol)
    cert = stationary_candidate(problem.plant, problem.X, cfg)
    if as_json:
        print(
            json.dumps(
                {
                    "K_star": _controller_wire(cert.K_star),
                    "K_dagger": _controller_wire(cert.K_dagger),
                    "T_star": matrix_to_wire(cert.T_star.T),
                    "K_gain": matrix_to_wire(cert.K_gain),
                    "L_gain": matrix_to_wire(cert.L_gain),
                    "P_hat": matrix_to_wire(cert.P_hat),
                    "Sigma_hat": matrix_to_wire(cert.Sigma_hat),
                    "J": cert.J,
                    "residuals": cert.residuals,
                }
            )
        )
    else:
        print(f"K_star.A_K = {_fmt_matrix(cert.K_star.A_K)}")
        print(f"K_star.B_K = {_fmt_matrix(cert.K_star.B_K)}")
        print(f"K_star.C_K = {_fmt_matrix(cert.K_star.C_K)}")
        print(f"K_gain     = {_fmt_matrix(cert.K_gain)}")
        print(f"L_gain     = {_fmt_matrix(cert.L_gain)}")
        print(f"T_star     = {_fmt_matrix(cert.T_star.T)}")
        print(f"P_hat      = {_fmt_matrix(cert.P_hat)}")
        print(f"Sigma_hat  = {_fmt_matrix(cert.Sigma_hat)}")
        print(f"J          = {_fmt(cert.J)}")
        for key in sorted(cert.residuals):
            print(f"residual {key} = {_fmt(cert.residuals[key])}")
    return 0


def _parse_axis(spec):
    # NAME[i,j]=min:max:steps (indices optional for 1x1 matrices)
    if "=" not in spec:
        raise SchemaError(f"sweep '{spec}' must look like NAME[i,j]=min:max:steps")
    target, _, rng = spec.partition("=")
    m = _SWEEP_TARGET.match(target.strip())
    if m is None:
        raise SchemaError(f"sweep target '{target}' must be A_K, B_K or C_K [i,j]")
    parts = rng.split(":")
    if len(parts) != 3:
        raise SchemaError(f"sweep range '{rng}' must be min:max:steps")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise SchemaError(f"bad sweep range '{rng}': {exc}") from exc
    if steps < 2:
        raise SchemaError("sweep steps must be at least 2")
    if not lo < hi:
        raise SchemaError("sweep min must be below max")
    i = int(m.group(2)) if m.group(2) is not None else None
    j = int(m.group(3)) if m.group(3) is not None else None
    return (m.group(1), i, j), np.linspace(lo, hi, steps)


def _parse_fix(spec):
    if "=" not in spec:
        raise SchemaError(f"fix '{spec}' must look like NAME[i,j]=value")
    target, _, value = spec.partition("=")
    m = _SWEEP_TARGET.match(target.strip())
    if m is None:
        raise SchemaError(f"fix target '{target}' must be A_K, B_K or C_K [i,j]")
    try:
        v = float(value)
    except ValueError as exc:
        raise SchemaError(f"bad fix value '{value}': {exc}") from exc
    i = int(m.group(2)) if m.group(2) is not None else None
    j = int(m.group(3)) if m.group(3) is not None else None
    return (m.group(1), i, j), v


def _parse_orbit(spec):
    parts = spec.split(":")
    if len(parts) != 3:
        raise SchemaError(f"orbit range '{spec}' must be min:max:steps")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise SchemaError(f"bad orbit range '{spec}': {exc}") from exc
    if steps < 2:
        raise SchemaError("orbit steps must be at least 2")
    if not lo < hi:
        raise SchemaError("orbit min must be below max")
    return np.linspace(lo, hi, steps)


def _set_entry(mats, target, value):
    name, i, j = target
    M = mats[name]
    if i is None:
        if M.shape != (1, 1):
            raise SchemaError(f"{name} is {M.shape[0]}x{M.shape[1]}; use {name}[i,j]")
        i = j = 0
    if not (0 <= i < M.shape[0] and 0 <= j < M.shape[1]):
        raise SchemaError(f"{name}[{i},{j}] is out of bounds for shape {M.shape}")
    M[i, j] = value


def _csv_row(axis1, axis2, J, stabilizing, rho):
    a2 = _fmt(axis2) if axis2 is not None else ""
    jtxt = _fmt(J) if J is not None else ""
    return f"{_fmt(axis1)},{a2},{jtxt},{int(stabilizing)},{_fmt(rho)}"


def _write_lines(out_csv, lines):
    text = "\n".join(lines) + "\n"
    if out_csv is None:
        sys.stdout.write(text)
    else:
        with open(out_csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_landscape(
    problem_file,
    sweep_specs=(),
    fixes=(),
    orbit=None,
    out_csv=None,
    controller_source=None,
    tol=None,
):
    """Sweep controller entries (or the orbit parameter) and write CSV."""
    problem = load_problem(problem_file)
    plant = problem.plant
    cfg = _solver_config(tol)
    base = _resolve_controller(problem, controller_source)
    lines = ["axis1,axis2,J,stabilizing,rho"]

    if orbit is not None:
        if sweep_specs or fixes:
            raise SchemaError("--orbit cannot be combined with --sweep/--fix")
        ts = _parse_orbit(orbit)
        # Similarity preserves the closed-loop spectrum, so stability and
        # rho are those of the base controller for every t.
        rho = spectral_radius(assemble(plant, base).A_cl)
        stable = is_stabilizing(plant, base, cfg.stability_margin)
        report = evaluate(plant, base, problem.X, cfg) if stable else None
        for t in ts:
            if stable:
                transform = Transform.from_matrix(float(t) * np.eye(plant.n))
                J = transformed_cost(
                    plant, base, problem.X, transform, cfg, report=report
                )
            else:
                J = None
            lines.append(_csv_row(float(t), None, J, stable, rho))
        _write_lines(out_csv, lines)
        return 0

    if not sweep_specs:
        raise SchemaError("landscape needs --sweep (one or two) or --orbit")
    if len(sweep_specs) > 2:
        raise SchemaError("at most two sweep axes are supported")
    axes = [_parse_axis(s) for s in sweep_specs]
    fixed = [_parse_fix(s) for s in fixes]

    def cell(values):
        mats = {
            "A_K": base.A_K.copy(),
            "B_K": base.B_K.copy(),
            "C_K": base.C_K.copy(),
        }
        for target, v in fixed:
            _set_entry(mats, target, v)
        for (target, _), v in zip(axes, values):
            _set_entry(mats, target, v)
        controller = type(base)(**mats)
        loop = assemble(plant, controller)
        rho = spectral_radius(loop.A_cl)
        if rho < 1.0 - cfg.stability_margin:
            return evaluate(plant, controller, problem.X, cfg).J, True, rho
        return None, False, rho

    if len(axes) == 1:
        for v1 in axes[0][1]:
            J, stable, rho = cell([float(v1)])
            lines.append(_csv_row(float(v1), None, J, stable, rho))
    else:
        for v1 in axes[0][1]:
            for v2 in axes[1][1]:
                J, stable, rho = cell([float(v1), float(v2)])
                lines.append(_csv_row(float(v1), float(v2), J, stable, rho))
    _write_lines(out_csv, lines)
    return 0


def cmd_gradcheck(
    problem_file,
    controller_source=None,
    trials=20,
    seed=0,
    tol=GRADCHECK_DEFAULT_TOL,
    step=1e-6,
    as_json=False,
):
    """Compare analytic and finite-difference gradients; exit 5 on failure."""
    problem = load_problem(problem_file)
    plant = problem.plant
    controllers = []
    if controller_source is not None or problem.seed_controller is not None:
        controllers.append(_resolve_controller(problem, controller_source))
    for k in range(trials):
        controllers.append(random_stabilizing_init(plant, seed + k))
    worst = 0.0
    for controller in controllers:
        ga = analytic_gradient(plant, controller, problem.X)
        gf = finite_difference_gradient(plant, controller, problem.X, step=step)
        diff = np.sqrt(
            np.sum((ga.dA_K - gf.dA_K) ** 2)
            + np.sum((ga.dB_K - gf.dB_K) ** 2)
            + np.sum((ga.dC_K - gf.dC_K) ** 2)
        )
        worst = max(worst, float(diff) / (1.0 + ga.norm))
    passed = worst <= tol
    if as_json:
        print(
            json.dumps(
                {
                    "max_rel_err": worst,
                    "trials": len(controllers),
                    "tol": tol,
                    "pass": passed,
                }
            )
        )
    else:
        print(f"gradient check: {len(controllers)} controllers")
        print(f"max relative discrepancy = {_fmt(worst)} (tolerance {_fmt(tol)})")
        print("PASS" if passed else "FAIL")
    return 0 if passed else 5


def _candidate_distance(plant, X, final, cfg):
    # Parameter distance to the closed-form stationary controller, raw and
    # after canonicalizing the final iterate with its own optimal transform
    # (which removes the sub-tolerance drift along the orbit direction).
    cert = stationary_candidate(plant, X, cfg)
    raw = float(
        np.linalg.norm(controller_to_vector(final) - controller_to_vector(cert.K_star))
    )
    try:
        canonical_ctrl = apply(final, optimal_transform(plant, final, X, cfg))
        canonical = float(
            np.linalg.norm(
                controller_to_vector(canonical_ctrl)
                - controller_to_vector(cert.K_star)
            )
        )
    except (OptimalTransformNotFound, NotObservable, AssumptionViolated):
        canonical = raw
    return cert, raw, canonical


def cmd_descend(
    problem_file,
    seed=0,
    out_csv=None,
    as_json=False,
    step0=None,
    backtrack_factor=None,
    armijo_c=None,
    max_iter=None,
    grad_tol=None,
    tol=None,
):
    """Run gradient descent, write the per-iteration CSV, report the end."""
    problem = load_problem(problem_file)
    plant = problem.plant
    solver_cfg = _solver_config(tol)
    overrides = {
        k: v
        for k, v in {
            "step0": step0,
            "backtrack_factor": backtrack_factor,
            "armijo_c": armijo_c,
            "max_iter": max_iter,
            "grad_tol": grad_tol,
        }.items()
        if v is not None
    }
    cfg = DescentConfig(**overrides)
    if problem.seed_controller is not None:
        init = problem.seed_controller
    else:
        init = random_stabilizing_init(plant, seed)
    trace = descend(plant, problem.X, init, cfg, solver_cfg)
    lines = ["iter,J,grad_norm,step"]
    for k, step_rec in enumerate(trace.steps):
        lines.append(
            f"{k},{_fmt(step_rec.J)},{_fmt(step_rec.grad_norm)},{_fmt(step_rec.step)}"
        )
    _write_lines(out_csv, lines)
    final = trace.final_controller
    try:
        cert, raw, canonical = _candidate_distance(
            plant, problem.X, final, solver_cfg
        )
        distance = {"raw": raw, "canonical": canonical, "J_candidate": cert.J}
    except (SingularX12, AssumptionViolated, SolverDiverged) as exc:
        distance = None
        reason = str(exc)
    if as_json:
        print(
            json.dumps(
                {
                    "status": trace.status,
                    "iterations": trace.iterations,
                    "J": trace.final_J,
                    "grad_norm": trace.final_grad_norm,
                    "controller": _controller_wire(final),
                    "distance_to_candidate": distance,
                }
            )
        )
    else:
        print(f"status     = {trace.status}")
        print(f"iterations = {trace.iterations}")
        print(f"J          = {_fmt(trace.final_J)}")
        print(f"grad_norm  = {_fmt(trace.final_grad_norm)}")
        print(f"A_K        = {_fmt_matrix(final.A_K)}")
        print(f"B_K        = {_fmt_matrix(final.B_K)}")
        print(f"C_K        = {_fmt_matrix(final.C_K)}")
        if distance is not None:
            print(f"distance to stationary candidate (raw)       = {_fmt(distance['raw'])}")
            print(
                f"distance to stationary candidate (canonical) = {_fmt(distance['canonical'])}"
            )
            print(f"candidate J = {_fmt(distance['J_candidate'])}")
        else:
            print(f"stationary candidate unavailable: {reason}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="dlqr",
        description="Cost, gradients, transforms and descent for dynamic "
        "output-feedback LQR problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, controller=False, tol_help="solver tolerance"):
        p.add_argument("--problem", required=True, help="problem JSON file")
        p.add_argument("--json", action="store_true", dest="as_json")
        p.add_argument("--tol", type=float, default=None, help=tol_help)
        if controller:
            p.add_argument(
                "--controller",
                default=None,
                help="controller JSON file (defaults to the seed controller)",
            )

    p = sub.add_parser("eval", help="cost and certificates of one controller")
    common(p, controller=True)

    p = sub.add_parser("stationary", help="closed-form stationary controller")
    common(p)

    p = sub.add_parser("landscape", help="grid or orbit sweep to CSV")
    common(p, controller=True)
    p.add_argument(
        "--sweep",
        action="append",
        default=[],
        metavar="NAME[i,j]=MIN:MAX:STEPS",
        help="swept controller entry (repeat for a second axis)",
    )
    p.add_argument(
        "--fix",
        action="append",
        default=[],
        metavar="NAME[i,j]=VALUE",
        help="pinned controller entry",
    )
    p.add_argument(
        "--orbit",
        default=None,
        metavar="MIN:MAX:STEPS",
        help="sweep the similarity parameter t (controller transformed by t*I)",
    )
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    common(p, controller=True, tol_help="pass threshold on the relative discrepancy")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-6, help="finite-difference step")

    p = sub.add_parser("descend", help="stability-safeguarded gradient descent")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="trace CSV path (default stdout)")
    p.add_argument("--step0", type=float, default=None)
    p.add_argument("--backtrack", type=float, default=None)
    p.add_argument("--armijo", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--grad-tol", type=float, default=None)
    return parser


_INPUT_ERRORS = (
    SchemaError,
    AssumptionViolated,
    DimensionMismatch,
    NonSquare,
    SingularTransform,
    ValueError,
    OSError,
)


def _dispatch(args):
    if args.command == "eval":
        return cmd_eval(args.problem, args.controller, args.as_json, args.tol)
    if args.command == "stationary":
        return cmd_stationary(args.problem, args.as_json, args.tol)
    if args.command == "landscape":
        return cmd_landscape(
            args.problem,
            sweep_specs=args.sweep,
            fixes=args.fix,
            orbit=args.orbit,
            out_csv=args.out,
            controller_source=args.controller,
            tol=args.tol,
        )
    if args.command == "gradcheck":
        tol = args.tol if args.tol is not None else GRADCHECK_DEFAULT_TOL
        return cmd_gradcheck(
            args.problem,
            controller_source=args.controller,
            trials=args.trials,
            seed=args.seed,
            tol=tol,
            step=args.step,
            as_json=args.as_json,
        )
    if args.command == "descend":
        return cmd_descend(
            args.problem,
            seed=args.seed,
            out_csv=args.out,
            as_json=args.as_json,
            step0=args.step0,
            backtrack_factor=args.backtrack,
            armijo_c=args.armijo,
            max_iter=args.max_iter,
            grad_tol=args.grad_tol,
            tol=args.tol,
        )
    raise SchemaError(f"unknown command {args.command}")


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the exit-code contract reserves
        # 2 for stability failures and 3 for input errors.
        return 0 if exc.code == 0 else 3
    try:
        return _dispatch(args)
    except (NotStabilizing, NotObservable, Unstable) as exc:
        print(f"dlqr: not stabilizing: {exc}", file=sys.stderr)
        return 2
    except _INPUT_ERRORS as exc:
        print(f"dlqr: input error: {exc}", file=sys.stderr)
        return 3
    except (SingularX12, OptimalTransformNotFound) as exc:
        print(f"dlqr: non-existence: {exc}", file=sys.stderr)
        return 4
    except (SolverDiverged, SingularInnovation, InitFailed) as exc:
        print(f"dlqr: check failed: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
