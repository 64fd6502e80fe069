"""Experiment driver: solve | spsa | orders | sweep | simulate | phdist.

Configs are JSON documents (schema documented in the README); bundled
experiment configs ship with the package and can be referenced by bare name
(e.g. ``fig3a``).  All randomness flows from a single ``seed`` field, so
reruns with the same config are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import dp, orders, policy as policy_mod, sim
from .model import (
    ConstrainedSocial,
    DetectionModel,
    DiscreteObs,
    GaussianObs,
    QuickestClassicalDelay,
    QuickestPredictiveDelay,
    RiskSensitive,
    Scheduling,
    SocialStopping,
    TransientDetection,
    validate_model,
)


class ConfigError(ValueError):
    pass


def _need(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required field {key!r}")
    return cfg[key]


def _matrix(value, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: not a numeric array ({exc})") from None
    return arr


def parse_model(cfg: dict, where: str = "model") -> DetectionModel:
    transition = _matrix(_need(cfg, "transition", where), f"{where}.transition")
    initial = _matrix(_need(cfg, "initial", where), f"{where}.initial")
    obs_cfg = _need(cfg, "observation", where)
    if "discrete" in obs_cfg:
        obs = DiscreteObs(_matrix(obs_cfg["discrete"], f"{where}.observation.discrete"))
    elif "gaussian" in obs_cfg:
        g = obs_cfg["gaussian"]
        obs = GaussianObs(
            _matrix(_need(g, "means", f"{where}.observation.gaussian"), "means"),
            _matrix(_need(g, "variances", f"{where}.observation.gaussian"), "variances"),
        )
    else:
        raise ConfigError(f"{where}.observation: expected 'discrete' or 'gaussian'")
    try:
        return DetectionModel(transition, initial, obs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


_FAMILIES = {
    "quickest_predictive": (QuickestPredictiveDelay, ["alpha", "beta", "d", "rho", "op_cost"]),
    "quickest_classical": (QuickestClassicalDelay, ["alpha", "beta", "d", "rho", "false_alarm"]),
    "transient": (TransientDetection, ["alpha", "beta", "delays", "rho", "false_alarm"]),
    "risk_sensitive": (RiskSensitive, ["risk", "beta", "d"]),
    "social_stopping": (SocialStopping, ["d", "beta", "rho", "local_costs", "include_welfare"]),
    "constrained_social": (ConstrainedSocial, ["local_costs", "d", "beta", "rho"]),
    "scheduling": (Scheduling, ["alpha1", "alpha2", "c1", "c2", "g", "rho", "obs_hi", "confusion"]),
}

_ARRAY_FIELDS = {"false_alarm", "delays", "local_costs", "c1", "c2", "g", "confusion"}


def parse_cost(cfg: dict, where: str = "cost") -> object:
    family = _need(cfg, "family", where)
    if family not in _FAMILIES:
        raise ConfigError(f"{where}.family: unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    cls, fields = _FAMILIES[family]
    kwargs = {}
    for key in fields:
        if key not in cfg:
            continue
        value = cfg[key]
        if key == "obs_hi":
            value = DiscreteObs(_matrix(value, f"{where}.obs_hi"))
        elif key in _ARRAY_FIELDS and value is not None:
            value = _matrix(value, f"{where}.{key}")
        kwargs[key] = value
    unknown = set(cfg) - set(fields) - {"family"}
    if unknown:
        raise ConfigError(f"{where}: unknown fields {sorted(unknown)} for family {family!r}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_config(ref: str) -> dict:
    """Load a config by path, or by bundled name (e.g. ``fig3a``)."""
    path = Path(ref)
    if path.exists():
        text = path.read_text()
    else:
        candidate = resources.files("phasestop.configs").joinpath(f"{ref}.json")
        if not candidate.is_file():
            raise ConfigError(f"config {ref!r}: no such file and no bundled config with that name")
        text = candidate.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {ref!r}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {ref!r}: top level must be an object")
    return cfg


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / name
    target.write_text(text, newline="\n")
    return target


def _grid_for(cfg: dict, model: DetectionModel) -> dp.SimplexGrid:
    m = int(cfg.get("grid", {}).get("m", 20))
    return dp.build_grid(model.n_states, m)


def _solve_from_config(cfg: dict):
    model = parse_model(_need(cfg, "model", "config"))
    spec = parse_cost(_need(cfg, "cost", "config"))
    problems = validate_model(model, cfg.get("validation", "relaxed"))
    if problems:
        raise ConfigError("config.model: " + "; ".join(problems))
    grid = _grid_for(cfg, model)
    sol = dp.value_iterate(
        model,
        spec,
        grid,
        horizon=cfg.get("horizon"),
        tol=cfg.get("tol"),
        bins=int(cfg.get("bins", 101)),
    )
    return model, spec, grid, sol


def cmd_solve(cfg: dict, out_dir: Path, name: str) -> int:
    model, spec, grid, sol = _solve_from_config(cfg)
    regions = dp.extract_regions(sol, grid)
    violations = dp.convexity_check(regions.stop_indices, grid)
    crossings = {
        "toward_last_vertex": dp.line_crossing_check(sol, grid, model.n_states),
        "toward_first_vertex": dp.line_crossing_check(sol, grid, 1),
    }
    try:
        assumptions = orders.check_assumptions(model, spec).lines()
    except ValueError:
        assumptions = []
    _write(out_dir, f"{name}_solution.csv", dp.solution_csv(sol, grid, regions))
    report = {
        "grid_points": grid.n_points,
        "sweeps": sol.sweeps,
        "sup_delta": sol.sup_delta,
        "stop_points": int(len(regions.stop_indices)),
        "stop_components": len(regions.stop_components),
        "continue_components": len(regions.continue_components),
        "convexity_violations": len(violations),
        "max_line_crossings": crossings,
        "assumptions": assumptions,
    }
    _write(out_dir, f"{name}_report.json", json.dumps(report, indent=2) + "\n")
    for line in assumptions:
        print(line)
    print(
        f"{name}: stop={report['stop_points']}/{grid.n_points} "
        f"components stop={report['stop_components']} continue={report['continue_components']} "
        f"convexity_violations={report['convexity_violations']} "
        f"crossings={crossings['toward_last_vertex']}/{crossings['toward_first_vertex']}"
    )
    return 0


def cmd_orders(cfg: dict, out_dir: Path, name: str) -> int:
    model = parse_model(_need(cfg, "model", "config"))
    spec = parse_cost(_need(cfg, "cost", "config"))
    report = orders.check_assumptions(model, spec)
    for line in report.lines():
        print(line)
    _write(out_dir, f"{name}_orders.txt", "\n".join(report.lines()) + "\n")
    return 0


def cmd_sweep(cfg: dict, out_dir: Path, name: str) -> int:
    spec = parse_cost(_need(cfg, "cost", "config"))
    entries = _need(cfg, "models", "config")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("config.models: expected a non-empty list of {label, model} objects")
    labels = [str(_need(e, "label", "config.models[]")) for e in entries]
    models = [parse_model(_need(e, "model", "config.models[]")) for e in entries]
    grid = _grid_for(cfg, models[0])
    res = dp.value_monotonicity_sweep(
        models,
        spec,
        grid,
        horizon=cfg.get("horizon"),
        tol=cfg.get("tol"),
        labels=labels,
        bins=int(cfg.get("bins", 101)),
    )
    for label, sol in zip(labels, res.solutions):
        _write(out_dir, f"{name}_{label}_solution.csv", dp.solution_csv(sol, grid))
    if not res.comparable:
        print("warning: transition matrices are not ordered; verdict: not comparable")
        verdict = "not comparable"
    else:
        verdict = "ordered" if res.monotone else "ordering violated"
    slack = min(res.pointwise_min_slack) if res.pointwise_min_slack else 0.0
    print(f"{name}: verdict={verdict} min_pointwise_slack={slack:.3g}")
    _write(
        out_dir,
        f"{name}_verdict.json",
        json.dumps(
            {
                "labels": labels,
                "premise_ordered": res.premise_ordered,
                "pointwise_min_slack": res.pointwise_min_slack,
                "verdict": verdict,
            },
            indent=2,
        )
        + "\n",
    )
    return 0


def cmd_spsa(cfg: dict, out_dir: Path, name: str) -> int:
    model = parse_model(_need(cfg, "model", "config"))
    spec = parse_cost(_need(cfg, "cost", "config"))
    report = None
    try:
        report = orders.check_assumptions(model, spec)
    except ValueError:
        pass
    if report is not None and not report.passed:
        print(
            "warning: threshold-structure assumptions failed "
            f"({', '.join(report.failed_names())}); optimizing anyway"
        )
    gains = cfg.get("gains", {})
    try:
        params = policy_mod.SpsaParams(
            step=float(gains.get("step", 0.1)),
            stability=float(gains.get("stability", 10.0)),
            step_decay=float(gains.get("step_decay", 0.602)),
            perturb=float(gains.get("perturb", 0.05)),
            perturb_decay=float(gains.get("perturb_decay", 0.602)),
        )
    except ValueError as exc:
        raise ConfigError(f"config.gains: {exc}") from None
    seed = int(cfg.get("seed", 0))
    rng = np.random.default_rng(seed)
    n_priors = int(cfg.get("priors", 100))
    priors = rng.dirichlet(np.ones(model.n_states), size=n_priors)
    iterations = int(cfg.get("iterations", 200))
    restarts = int(cfg.get("restarts", 5))
    max_steps = cfg.get("max_steps")
    if iterations == 0:
        init = np.asarray(cfg.get("init_phi", np.zeros(model.n_states - 1)), dtype=float)
        result = policy_mod.spsa_optimize(
            model, spec, init, 0, params, priors, rng, max_steps=max_steps
        )
        score = float("nan")
    else:
        result, score = policy_mod.optimize_with_restarts(
            model,
            spec,
            iterations,
            params,
            priors,
            rng,
            restarts=restarts,
            max_steps=max_steps,
        )
    buf = io.StringIO()
    dim = model.n_states - 1
    head = (
        ["iteration"]
        + [f"phi{k}" for k in range(dim)]
        + [f"theta{k}" for k in range(dim)]
        + ["batch_cost"]
    )
    buf.write(",".join(head) + "\n")
    for n in range(result.phi_trace.shape[0]):
        cost = f"{result.costs[n - 1]:.17g}" if 1 <= n <= result.costs.size else ""
        row = (
            [str(n)]
            + [f"{v:.17g}" for v in result.phi_trace[n]]
            + [f"{v:.17g}" for v in result.theta_trace[n]]
            + [cost]
        )
        buf.write(",".join(row) + "\n")
    _write(out_dir, f"{name}_trace.csv", buf.getvalue())
    summary = {
        "theta": [float(v) for v in result.final_theta],
        "phi": [float(v) for v in result.final_phi],
        "evaluation_cost": None if np.isnan(score) else float(score),
        "feasible": bool(policy_mod.theta_is_mlr_increasing(result.final_theta)),
    }
    _write(out_dir, f"{name}_policy.json", json.dumps(summary, indent=2) + "\n")
    print(f"{name}: theta={summary['theta']} cost={summary['evaluation_cost']}")
    return 0


def _policy_from_config(cfg: dict, model: DetectionModel):
    src = _need(cfg, "policy", "config")
    if "theta" in src:
        theta = _matrix(src["theta"], "config.policy.theta")
        if theta.size != model.n_states - 1:
            raise ConfigError(
                f"config.policy.theta: expected {model.n_states - 1} coefficients, got {theta.size}"
            )
        return policy_mod.LinearThresholdPolicy(theta)
    if "solution" in src:
        path = Path(src["solution"])
        if not path.exists():
            raise ConfigError(f"config.policy.solution: no such file {path}")
        with path.open() as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ConfigError("config.policy.solution: empty solution file")
        coord_keys = sorted(
            (k for k in rows[0] if k.startswith("c") and k[1:].isdigit()),
            key=lambda k: int(k[1:]),
        )
        coords = np.array([[int(r[k]) for k in coord_keys] for r in rows])
        actions = np.array([int(r["policy"]) for r in rows])
        if len(coord_keys) != model.n_states:
            raise ConfigError(
                "config.policy.solution: grid dimension does not match the model"
            )
        m = int(coords[0].sum())
        grid = dp.build_grid(len(coord_keys), m)
        ordered = np.empty(grid.n_points, dtype=int)
        for c, a in zip(coords, actions):
            ordered[grid.index_of(tuple(c))] = a
        return dp.GridPolicy(grid, ordered)
    raise ConfigError("config.policy: expected 'theta' or 'solution'")


def cmd_simulate(cfg: dict, out_dir: Path, name: str) -> int:
    model = parse_model(_need(cfg, "model", "config"))
    spec = parse_cost(_need(cfg, "cost", "config"))
    n = int(_need(cfg, "trajectories", "config"))
    if n <= 0:
        raise ConfigError("config.trajectories: must be positive")
    pol = _policy_from_config(cfg, model)
    seed = int(cfg.get("seed", 0))
    max_steps = int(cfg.get("max_steps", 10_000))
    record = int(cfg.get("record", 1))
    rng = np.random.default_rng(seed)
    priors = np.tile(np.asarray(model.initial, dtype=float), (n, 1))
    batch = sim.simulate_batch(
        model, spec, pol, priors, rng, max_steps=max_steps, transformed=False
    )
    d = getattr(spec, "d", 1.0)
    beta = getattr(spec, "beta", 1.0)
    summary = sim.decompose_from_times(batch.tau, batch.tau0, d, beta, batch.censored)
    _write(
        out_dir,
        f"{name}_summary.json",
        json.dumps(
            {
                "trajectories": summary.n,
                "mean_delay": summary.mean_delay,
                "false_alarm_rate": summary.false_alarm_rate,
                "criterion": summary.criterion,
                "stderr": summary.stderr,
                "censored": summary.n_censored,
                "mean_cost": float(batch.costs.mean()),
            },
            indent=2,
        )
        + "\n",
    )
    rec_rng = np.random.default_rng(seed + 1)
    for k in range(min(record, n)):
        traj = sim.sample_trajectory(model, pol, max_steps=max_steps, rng=rec_rng)
        _write(out_dir, f"{name}_trajectory{k}.csv", sim.trajectory_csv(traj))
    print(
        f"{name}: criterion={summary.criterion:.6g} (se {summary.stderr:.2g}) "
        f"delay={summary.mean_delay:.6g} false_alarm={summary.false_alarm_rate:.6g}"
    )
    return 0


def cmd_phdist(cfg: dict, out_dir: Path, name: str) -> int:
    from .model import ph_pmf

    model = parse_model(_need(cfg, "model", "config"))
    k_max = int(cfg.get("k_max", 200))
    dist = ph_pmf(model, k_max, tag=cfg.get("validation", "relaxed"))
    buf = io.StringIO()
    buf.write("k,pmf,cumulative\n")
    cum = dist.partial_sums()
    for k, (p, c) in enumerate(zip(dist.pmf, cum)):
        buf.write(f"{k},{p:.17g},{c:.17g}\n")
    _write(out_dir, f"{name}_phdist.csv", buf.getvalue())
    print(f"{name}: mass within {k_max} steps = {cum[-1]:.12g}")
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "spsa": cmd_spsa,
    "orders": cmd_orders,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "phdist": cmd_phdist,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phasestop",
        description="Sequential-detection experiments on the belief simplex",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in _COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", required=True, help="config path or bundled name")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default="results", help="output directory")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        name = Path(args.config).stem
        return _COMMANDS[args.command](cfg, Path(args.out), name)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
