"""Command-line front end.

Reads a flat key=value model config, runs one workflow, and writes CSV
tables / JSON summaries plus a plain-text report.  Exit codes: 0 on
success, 1 for configuration errors, 2 for model-validation failures,
3 for numerical failures; every error names the violated condition on
standard error.  Outputs are byte-identical across repeated runs with
the same inputs, whatever the parallelism degree.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import closed_form, config, moments, policy_eval, sde
from .errors import ConfigError, ExploratoryLqError, ModelValidationError, NumericalError
from .model import AffineGaussianPolicy, LqModel, check_model, derived_coeffs

COMMANDS = ("solve", "residual", "simulate", "evaluate", "cost", "sweep",
            "exact-vs-euler", "moments")
STOCHASTIC_COMMANDS = {"simulate", "evaluate", "cost", "exact-vs-euler", "moments"}

CONVERGENCE_DTS = (1e-2, 1e-3, 1e-4)
CONVERGENCE_HORIZON = 1.0
RESIDUAL_GRID = np.linspace(-10.0, 10.0, 41)


@dataclass
class RunSpec:
    """One resolved invocation: exactly one command, a validated-or-
    overridden model, simulation settings, and output destination."""

    command: str
    model: LqModel
    sim: dict
    out_dir: Path
    fmt: str = "csv"
    sweep: list = field(default_factory=list)
    override: bool = False
    parallelism: int = 1
    assumption_ok: bool = True


def _fmt(x) -> str:
    """Full-precision, round-trippable text for floats."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_table(path_base: Path, fmt: str, header: list[str], rows: list[tuple]):
    if fmt == "json":
        path = path_base.with_suffix(".json")
        _write_json(path, [dict(zip(header, row)) for row in rows])
        return path
    path = path_base.with_suffix(".csv")
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def emit_report(model: LqModel, *, assumption_ok: bool,
                mc_sections: list[str] | None = None) -> str:
    """Fixed-order plain-text summary of the closed-form solution."""
    record = closed_form.solution_record(
        model, allow_assumption_violation=not assumption_ok)
    bound = record["assumption_bound"]
    lines = [
        "model: " + " ".join(
            f"{name}={_fmt(getattr(model, name))}"
            for name in ("a", "b", "c", "d", "m", "n", "r", "p", "q", "rho", "lam")),
        f"assumption bound: {_fmt(bound)} vs rho={_fmt(model.rho)} "
        + ("(satisfied)" if model.rho > bound else "(VIOLATED)"),
        f"value: k2={_fmt(record['k2'])} k1={_fmt(record['k1'])} k0={_fmt(record['k0'])}",
        "policy: slope={slope} intercept={intercept} variance={variance}".format(
            **{k: _fmt(v) for k, v in record["policy"].items()}),
        f"classical: alpha0={_fmt(record['alpha0'])}",
        f"exploration cost: {_fmt(record['cost'])}",
    ]
    for section in mc_sections or []:
        lines.append(section)
    if not assumption_ok:
        lines.append("UNVERIFIED (assumption violated)")
    return "\n".join(lines) + "\n"


def _optimal_policy(spec: RunSpec) -> AffineGaussianPolicy:
    _, policy = closed_form.exploratory_solution(
        spec.model, allow_assumption_violation=spec.override)
    return policy


def _grid(spec: RunSpec) -> sde.PathGrid:
    return sde.PathGrid(dt=spec.sim["dt"], n_steps=spec.sim["n_steps"])


def _cmd_solve(spec: RunSpec) -> None:
    record = closed_form.solution_record(
        spec.model, allow_assumption_violation=spec.override)
    _write_json(spec.out_dir / "solution.json", record)
    report = emit_report(spec.model, assumption_ok=spec.assumption_ok)
    (spec.out_dir / "report.txt").write_text(report, encoding="utf-8")
    sys.stdout.write(report)


def _cmd_residual(spec: RunSpec) -> None:
    value, _ = closed_form.exploratory_solution(
        spec.model, allow_assumption_violation=spec.override)
    classical = closed_form.classical_solution(
        spec.model, allow_assumption_violation=spec.override)
    wvalue = closed_form.QuadraticValue(
        classical.alpha2, classical.alpha1, classical.alpha0)
    rows = [
        (float(x),
         float(closed_form.hjb_residual(spec.model, value, x, "exploratory")),
         float(closed_form.hjb_residual(spec.model, wvalue, x, "classical")))
        for x in RESIDUAL_GRID
    ]
    path = _write_table(spec.out_dir / "residual", spec.fmt,
                        ["x", "exploratory_residual", "classical_residual"], rows)
    sys.stdout.write(f"wrote {path}\n")


def _cmd_simulate(spec: RunSpec) -> None:
    policy = _optimal_policy(spec)
    grid = _grid(spec)
    batch = sde.simulate_exploratory(
        spec.model, policy, spec.sim["x0"], grid, spec.sim["seed"],
        spec.sim["n_paths"], parallelism=spec.parallelism)
    with open(spec.out_dir / "trajectories.csv", "w", encoding="utf-8") as fh:
        batch.write_csv(fh)
    _write_json(spec.out_dir / "summary.json", batch.summary())
    sys.stdout.write(f"wrote {spec.out_dir / 'trajectories.csv'}\n")


def _mc_section(label: str, estimate: policy_eval.ValueEstimate,
                target: float) -> str:
    err = abs(estimate.value - target)
    tol = 3.0 * estimate.std_error + estimate.truncation_bound
    verdict = "PASS" if err <= tol else "FAIL"
    return (f"{label}: estimate={_fmt(estimate.value)} target={_fmt(target)} "
            f"|err|={_fmt(err)} tol(3se+tail)={_fmt(tol)} {verdict}")


def _cmd_evaluate(spec: RunSpec) -> None:
    value, policy = closed_form.exploratory_solution(
        spec.model, allow_assumption_violation=spec.override)
    grid = _grid(spec)
    estimate = policy_eval.mc_value(
        spec.model, policy, spec.sim["x0"], grid, spec.sim["seed"],
        spec.sim["n_paths"], parallelism=spec.parallelism,
        allow_assumption_violation=spec.override)
    target = value(spec.sim["x0"])
    err = abs(estimate.value - target)
    tol = 3.0 * estimate.std_error + estimate.truncation_bound
    _write_json(spec.out_dir / "evaluate.json", {
        "estimate": estimate.as_dict(),
        "closed_form_value": target,
        "abs_error": err,
        "tolerance_3se_plus_tail": tol,
        "within_tolerance": bool(err <= tol),
        "x0": spec.sim["x0"],
    })
    report = emit_report(
        spec.model, assumption_ok=spec.assumption_ok,
        mc_sections=[_mc_section("mc value", estimate, target)])
    (spec.out_dir / "report.txt").write_text(report, encoding="utf-8")
    sys.stdout.write(report)


def _cmd_cost(spec: RunSpec) -> None:
    target = closed_form.exploration_cost(spec.model)
    grid = _grid(spec)
    estimate = policy_eval.mc_exploration_cost(
        spec.model, spec.sim["x0"], grid, spec.sim["seed"],
        spec.sim["n_paths"], parallelism=spec.parallelism)
    decomposition = closed_form.exploration_cost_decomposition(
        spec.model, spec.sim["x0"])
    _write_json(spec.out_dir / "cost.json", {
        "closed_form": target,
        "decomposition_check": decomposition,
        "mc_estimate": estimate.as_dict(),
    })
    report = emit_report(
        spec.model, assumption_ok=spec.assumption_ok,
        mc_sections=[_mc_section("mc exploration cost", estimate, target)])
    (spec.out_dir / "report.txt").write_text(report, encoding="utf-8")
    sys.stdout.write(report)


def _cmd_sweep(spec: RunSpec) -> None:
    points = closed_form.lambda_sweep(spec.model, spec.sweep,
                                      probe_x=spec.sim["x0"])
    rows = [(p.lam, p.variance, p.value_gap, p.cost, p.mean_at_probe, p.probe_x)
            for p in points]
    path = _write_table(
        spec.out_dir / "sweep", spec.fmt,
        ["lambda", "variance", "value_gap", "cost", "mean_at_probe", "probe_x"],
        rows)
    sys.stdout.write(f"wrote {path}\n")


def _cmd_exact_vs_euler(spec: RunSpec) -> None:
    model = spec.model
    if abs(model.d) <= 1e-12:
        method = "d0"
        policy = AffineGaussianPolicy(0.0, -model.q / model.n, model.lam / model.n)
        value = None
    elif abs(model.c) <= 1e-12:
        method = "c0"
        policy = AffineGaussianPolicy(0.0, -model.q / model.n, model.lam / model.n)
        value = None
    else:
        method = "doss_saussman"
        value, policy = closed_form.exploratory_solution(
            model, allow_assumption_violation=spec.override)
    rows = []
    for dt in CONVERGENCE_DTS:
        grid = sde.PathGrid(dt=dt, n_steps=int(round(CONVERGENCE_HORIZON / dt)))
        euler = sde.simulate_exploratory(
            model, policy, spec.sim["x0"], grid, spec.sim["seed"],
            spec.sim["n_paths"], record_paths=False,
            parallelism=spec.parallelism)
        exact = sde.exact_batch(
            model, spec.sim["x0"], grid, spec.sim["seed"], spec.sim["n_paths"],
            method=method, value=value)
        worst, mean = sde.strong_error(euler, exact)
        rows.append((dt, sde.endpoint_rms_error(euler, exact), worst, mean,
                     method, spec.sim["n_paths"]))
    path = _write_table(
        spec.out_dir / "convergence", spec.fmt,
        ["dt", "rms_endpoint_error", "max_endpoint_error",
         "mean_endpoint_error", "method", "n_paths"], rows)
    sys.stdout.write(f"wrote {path}\n")


def _cmd_moments(spec: RunSpec) -> None:
    policy = _optimal_policy(spec)
    grid = _grid(spec)
    coeffs = derived_coeffs(spec.model, policy)
    curves = moments.moment_curves(coeffs, spec.sim["x0"])
    n_nodes = 41 if grid.n_steps >= 40 else grid.n_steps + 1
    nodes = np.unique(np.linspace(0, grid.n_steps, n_nodes).astype(int))
    batch = sde.simulate_exploratory(
        spec.model, policy, spec.sim["x0"], grid, spec.sim["seed"],
        spec.sim["n_paths"], record_paths=False, checkpoints=tuple(nodes),
        parallelism=spec.parallelism)
    rows = []
    for node in nodes:
        t = node * grid.dt
        mc_mean, mc_m2, se_mean, se_m2 = batch.checkpoint_stats(int(node))
        rows.append((
            t, float(curves.mean(t)), float(curves.second(t)),
            float(curves.second_classical(t)), curves.case_tag,
            mc_mean, mc_m2, se_mean, se_m2))
    path = _write_table(
        spec.out_dir / "moments", spec.fmt,
        ["t", "n", "m", "m_hat", "case_tag",
         "mc_mean", "mc_m2", "mc_se_mean", "mc_se_m2"], rows)
    sys.stdout.write(f"wrote {path}\n")


_DISPATCH = {
    "solve": _cmd_solve,
    "residual": _cmd_residual,
    "simulate": _cmd_simulate,
    "evaluate": _cmd_evaluate,
    "cost": _cmd_cost,
    "sweep": _cmd_sweep,
    "exact-vs-euler": _cmd_exact_vs_euler,
    "moments": _cmd_moments,
}


def run(spec: RunSpec) -> int:
    """Execute one resolved RunSpec; returns the process exit status."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    _DISPATCH[spec.command](spec)
    return 0


def build_spec(args, mapping: dict[str, str]) -> RunSpec:
    model = config.model_from_mapping(mapping)
    sim = config.sim_settings(mapping)
    if args.seed is not None:
        sim["seed"] = args.seed
    if args.parallelism is not None:
        sim["parallelism"] = args.parallelism
    if args.command in STOCHASTIC_COMMANDS and sim["seed"] is None:
        raise ConfigError(
            f"command {args.command!r} is stochastic: provide --seed or sim.seed "
            "(no wall-clock default)")
    sweep = config.sweep_lambdas(mapping) if args.command == "sweep" else []
    violations = check_model(model)
    assumption_ok = not any(v.condition == "rho>assumption_bound" for v in violations)
    if args.override_assumptions:
        # The override forgives only the discount-rate bound.
        hard = [v for v in violations if v.condition != "rho>assumption_bound"]
        if hard:
            raise ModelValidationError(hard)
    elif violations:
        raise ModelValidationError(violations)
    return RunSpec(
        command=args.command,
        model=model,
        sim=sim,
        out_dir=Path(args.out),
        fmt=config.output_format(mapping),
        sweep=sweep,
        override=args.override_assumptions,
        parallelism=sim["parallelism"],
        assumption_ok=assumption_ok,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="explq",
        description="Entropy-regularized exploratory LQ control workflows")
    parser.add_argument("--config", required=True, help="key=value model config")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--seed", type=int, default=None,
                        help="64-bit seed; mandatory for stochastic commands")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--override-assumptions", action="store_true",
                        help="run despite a violated discount-rate bound; "
                             "results are marked UNVERIFIED")
    parser.add_argument("--parallelism", type=int, default=None,
                        help="worker count for path simulation")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        sys.stderr.write("error: --seed must fit in 64 bits\n")
        return 1
    try:
        mapping = config.load_config(args.config)
        spec = build_spec(args, mapping)
        return run(spec)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 1
    except ModelValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 3
    except ExploratoryLqError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
