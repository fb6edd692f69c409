"""Command-line harness: single solves, accuracy-grid scaling studies and
sample-size validation.

Configs are JSON with four sections (problem, orders, oracle, algo) plus a
seed; unknown keys are rejected.  Outputs are line-delimited JSON traces,
a JSON summary and CSV tables, all byte-reproducible for a fixed config
and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks
from .bounds import complexity_budget
from .driver import RunReport, TerminationKind, run
from .oracles import ExactOracle, NoisyOracle, StochasticConfig, SubsampledOracle, sample_size, subsampled_eval
from .params import AlgoParams, Schedule
from .problems import (
    Dataset,
    Problem,
    load_dataset,
    make_quadratic,
    make_quartic,
    make_rosenbrock,
    make_sigmoid_problem,
    make_synthetic_dataset,
)
from .taylor import Orders

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3

_PROBLEM_KEYS = {
    "quadratic": {"name", "diag", "x0"},
    "quartic": {"name", "n", "box_radius", "x0"},
    "rosenbrock": {"name", "x0"},
    "sigmoid-synthetic": {"name", "N", "n", "data_seed", "x0"},
    "sigmoid-file": {"name", "path", "x0"},
}
_ORACLE_KEYS = {"kind", "noise_fraction", "t_bar", "t"}
_ALGO_KEYS = {f for f in AlgoParams.__dataclass_fields__}
_TOP_KEYS = {"problem", "orders", "oracle", "algo", "seed"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated run description; round-trips exactly through JSON."""

    problem: dict = field(default_factory=lambda: {"name": "quadratic"})
    orders: dict = field(default_factory=lambda: {"p": 1, "q": 1, "beta": 1.0})
    oracle: dict = field(default_factory=lambda: {"kind": "exact"})
    algo: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(
            problem=dict(raw.get("problem", {"name": "quadratic"})),
            orders=dict(raw.get("orders", {"p": 1, "q": 1, "beta": 1.0})),
            oracle=dict(raw.get("oracle", {"kind": "exact"})),
            algo=dict(raw.get("algo", {})),
            seed=int(raw.get("seed", 0)),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        name = self.problem.get("name")
        if name not in _PROBLEM_KEYS:
            raise ConfigError(f"unknown problem {name!r}; choose from {sorted(_PROBLEM_KEYS)}")
        unknown = set(self.problem) - _PROBLEM_KEYS[name]
        if unknown:
            raise ConfigError(f"unknown problem keys for {name}: {sorted(unknown)}")
        unknown = set(self.orders) - {"p", "q", "beta"}
        if unknown:
            raise ConfigError(f"unknown orders keys: {sorted(unknown)}")
        kind = self.oracle.get("kind", "exact")
        if kind not in ("exact", "noisy", "subsampled"):
            raise ConfigError(f"unknown oracle kind {kind!r}")
        unknown = set(self.oracle) - _ORACLE_KEYS
        if unknown:
            raise ConfigError(f"unknown oracle keys: {sorted(unknown)}")
        unknown = set(self.algo) - _ALGO_KEYS
        if unknown:
            raise ConfigError(f"unknown algo keys: {sorted(unknown)}")

    def to_dict(self) -> dict:
        return {
            "problem": dict(self.problem),
            "orders": dict(self.orders),
            "oracle": dict(self.oracle),
            "algo": dict(self.algo),
            "seed": self.seed,
        }

    def build_orders(self) -> Orders:
        return Orders(
            p=int(self.orders.get("p", 1)),
            q=int(self.orders.get("q", 1)),
            beta=float(self.orders.get("beta", 1.0)),
        )

    def build_params(self) -> AlgoParams:
        algo = dict(self.algo)
        if "schedule" in algo:
            algo["schedule"] = Schedule(algo["schedule"])
        return AlgoParams(**algo)


def build_problem(cfg: RunConfig) -> tuple[Problem, Dataset | None, np.ndarray]:
    spec = cfg.problem
    name = spec["name"]
    dataset = None
    if name == "quadratic":
        diag = spec.get("diag", [1.0, 2.0])
        problem = make_quadratic(np.asarray(diag, dtype=float))
        x0 = np.ones(problem.n)
    elif name == "quartic":
        problem = make_quartic(int(spec.get("n", 2)), float(spec.get("box_radius", 3.0)))
        x0 = 0.9 * np.ones(problem.n)
    elif name == "rosenbrock":
        problem = make_rosenbrock()
        x0 = np.array([-1.2, 1.0])
    elif name == "sigmoid-synthetic":
        dataset = make_synthetic_dataset(
            int(spec.get("N", 10_000)), int(spec.get("n", 20)), int(spec.get("data_seed", 1234))
        )
        problem = make_sigmoid_problem(dataset)
        x0 = np.zeros(problem.n)
    elif name == "sigmoid-file":
        dataset = load_dataset(spec["path"])
        problem = make_sigmoid_problem(dataset)
        x0 = np.zeros(problem.n)
    else:  # pragma: no cover - validate() rejects this earlier
        raise ConfigError(f"unknown problem {name!r}")
    if "x0" in spec:
        x0 = np.asarray(spec["x0"], dtype=float)
        if x0.shape != (problem.n,):
            raise ConfigError(f"x0 must have dimension {problem.n}")
    return problem, dataset, x0


def build_oracle(cfg: RunConfig, problem: Problem, dataset: Dataset | None, params: AlgoParams, orders: Orders):
    kind = cfg.oracle.get("kind", "exact")
    if kind == "exact":
        return ExactOracle(problem)
    if kind == "noisy":
        return NoisyOracle(problem, float(cfg.oracle.get("noise_fraction", 0.9)), seed=cfg.seed)
    if dataset is None:
        raise ConfigError("subsampled oracle requires a sigmoid dataset problem")
    stoch = StochasticConfig(
        t_bar=float(cfg.oracle.get("t_bar", 0.1)),
        t=cfg.oracle.get("t"),
        seed=cfg.seed,
    )
    return SubsampledOracle.for_eps(dataset, stoch, params.eps, orders)


def execute(cfg: RunConfig) -> tuple[RunReport, Problem, Dataset | None, np.ndarray]:
    orders = cfg.build_orders()
    params = cfg.build_params()
    problem, dataset, x0 = build_problem(cfg)
    oracle = build_oracle(cfg, problem, dataset, params, orders)
    report = run(oracle, x0, params, orders)
    return report, problem, dataset, x0


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def record_to_json(rec) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "k": rec.k,
        "sigma": rec.sigma,
        "omega": rec.omega,
        "rho": rec.rho,
        "step_norm": rec.step_norm,
        "success": rec.success,
        "delta_k": rec.delta_k,
        "eps_ladder": list(rec.eps_ladder),
        "shrinks": rec.shrinks,
        "flags": [[stage, flag] for stage, flag in rec.flags],
        "fun_evals": rec.fun_evals,
        "deriv_evals": {str(j): c for j, c in rec.deriv_evals},
        "component_evals": rec.component_evals,
        "extras": rec.extras,
        "x_inf": rec.x_inf,
    }


def write_trace(path: Path, report: RunReport) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for rec in report.trace:
            fh.write(json.dumps(record_to_json(rec), sort_keys=True) + "\n")


def summarize(report: RunReport, problem: Problem, x0: np.ndarray) -> dict:
    orders = report.orders
    budget = None
    bounds_ok = None
    L = problem.lipschitz.get(orders.p)
    if L is not None and problem.f_low is not None:
        b = complexity_budget(L, float(problem.value(x0)), problem.f_low, report.params, orders)
        budget = {
            "sigma_max": b.sigma_max,
            "omega_min": b.omega_min,
            "kappa_s": b.kappa_s,
            "kappa_p": b.kappa_p,
            "max_successful": b.max_successful,
            "max_total": b.max_total,
            "nu_max": b.nu_max,
            "max_fun_evals": b.max_fun_evals,
            "max_deriv_evals": b.max_deriv_evals,
        }
        bounds_ok = not checks.all_violations(report, b)
    return {
        "schema_version": SCHEMA_VERSION,
        "status": report.status.kind.value,
        "k_final": report.status.k_final,
        "delta_at_exit": report.status.delta_at_exit,
        "phi_at_exit": report.status.phi,
        "x_final": [float(v) for v in report.x_final],
        "totals": {
            "iterations": report.n_complete,
            "successful": report.n_successful,
            "shrinks": report.total_shrinks,
            "fun_evals": report.counters.fun_evals,
            "deriv_evals": {str(j): c for j, c in sorted(report.counters.deriv_evals.items())},
            "component_evals": report.counters.component_evals,
            "sigma_max_observed": report.sigma_max_observed,
        },
        "budget": budget,
        "bounds_ok": bounds_ok,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig, out_dir: Path) -> int:
    report, problem, _, x0 = execute(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace(out_dir / "trace.jsonl", report)
    summary = summarize(report, problem, x0)
    with open(out_dir / "summary.json", "w", encoding="ascii") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(
        f"{problem.name}: status={summary['status']} iterations={summary['totals']['iterations']} "
        f"successful={summary['totals']['successful']} fun_evals={summary['totals']['fun_evals']}"
    )
    if report.status.kind is TerminationKind.BUDGET:
        return EXIT_BUDGET
    return EXIT_OK


def parse_eps_grid(text: str) -> list[float]:
    """LO:HI:POINTS, log-spaced and emitted from LO to HI."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("eps grid must be LO:HI:POINTS")
    lo, hi, points = float(parts[0]), float(parts[1]), int(parts[2])
    if points < 1 or lo <= 0.0 or hi <= 0.0:
        raise ConfigError("eps grid needs positive endpoints and at least one point")
    if points == 1:
        return [lo]
    return [float(v) for v in np.geomspace(lo, hi, points)]


def cmd_scaling(cfg: RunConfig, eps_grid: list[float], out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    violations = []
    for i, eps in enumerate(eps_grid):
        sub = RunConfig.from_dict(cfg.to_dict())
        sub.algo["eps"] = eps
        sub.seed = cfg.seed + 1_000_003 * i
        report, problem, _, x0 = execute(sub)
        orders = report.orders
        L = problem.lipschitz.get(orders.p)
        budget = None
        if L is not None and problem.f_low is not None:
            budget = complexity_budget(L, float(problem.value(x0)), problem.f_low, report.params, orders)
            violations += [f"eps={eps:g}: {v}" for v in checks.all_violations(report, budget)]
        else:
            violations += [f"eps={eps:g}: {v}" for v in checks.counting_violations(report)]
        rows.append(
            {
                "eps": eps,
                "successful_iters": report.n_successful,
                "total_iters": report.n_complete,
                "fun_evals": report.counters.fun_evals,
                "deriv_evals": sum(report.counters.deriv_evals.values()),
                "component_evals": report.counters.component_evals,
                "theorem_bound_succ": budget.max_successful if budget else "",
                "theorem_bound_total": budget.max_total if budget else "",
            }
        )
    path = out_dir / "scaling.csv"
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    pts = [(math.log(r["eps"]), math.log(max(1, r["successful_iters"]))) for r in rows]
    if len(pts) >= 2:
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        slope = float(np.polyfit(xs, ys, 1)[0])
        print(f"log-log slope of successful iterations vs eps: {slope:.3f} (informational)")
    for v in violations:
        print(f"BOUND VIOLATION: {v}", file=sys.stderr)
    print(f"wrote {path}")
    return EXIT_VIOLATION if violations else EXIT_OK


def _tensor_error(j: int, approx, exact) -> float:
    if j == 0:
        return abs(approx - exact)
    if j == 1:
        return float(np.linalg.norm(approx - exact))
    return float(np.max(np.abs(np.linalg.eigvalsh(approx - exact))))


def cmd_sample_check(cfg: RunConfig, trials: int, eps_fracs: list[float], out_dir: Path) -> int:
    orders = cfg.build_orders()
    params = cfg.build_params()
    _, dataset, x0 = build_problem(cfg)
    if dataset is None:
        raise ConfigError("sample-check requires a sigmoid dataset problem")
    stoch = StochasticConfig(
        t_bar=float(cfg.oracle.get("t_bar", 0.1)),
        t=cfg.oracle.get("t"),
        seed=cfg.seed,
    )
    t = stoch.resolve_t(params.eps, orders)
    N, n = dataset.size, dataset.dim
    dims = {0: 2, 1: n + 1, 2: 2 * n}

    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    violations = []
    for j in (0, 1, 2):
        exact = subsampled_eval(dataset, x0, j, N, np.random.default_rng(0))
        for frac in eps_fracs:
            eps_j = frac * dataset.kappa_bounds[j]
            if eps_j <= 0.0:
                continue
            m = sample_size(dataset.kappa_bounds[j], eps_j, t, dims[j], N)
            rng = np.random.default_rng([cfg.seed, j, int(1e9 * frac)])
            failures = 0
            for _ in range(trials):
                approx = subsampled_eval(dataset, x0, j, m, rng)
                if _tensor_error(j, approx, exact) > eps_j:
                    failures += 1
            rate = failures / trials
            threshold = t + 3.0 * math.sqrt(t * (1.0 - t) / trials)
            ok = rate <= threshold
            if not ok:
                violations.append(f"order {j}, eps={eps_j:g}: rate {rate:.4f} > {threshold:.4f}")
            rows.append(
                {
                    "order": j,
                    "eps_j": eps_j,
                    "sample_size": m,
                    "trials": trials,
                    "failures": failures,
                    "rate": rate,
                    "threshold": threshold,
                    "ok": ok,
                }
            )
    path = out_dir / "sample_check.csv"
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    for v in violations:
        print(f"SAMPLE-SIZE VIOLATION: {v}", file=sys.stderr)
    print(f"wrote {path}")
    return EXIT_VIOLATION if violations else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--config", type=Path, help="JSON config file")
    sub.add_argument("--eps", type=float, help="target accuracy override")
    sub.add_argument("--seed", type=int, help="seed override")
    sub.add_argument("--out", type=Path, default=Path("."), help="output directory")
    sub.add_argument("--schedule", choices=[s.value for s in Schedule], help="accuracy schedule")
    sub.add_argument("--oracle", choices=["exact", "noisy", "subsampled"], help="oracle kind")
    sub.add_argument("--noise-fraction", type=float, help="noisy-oracle error fraction")
    sub.add_argument("--p", type=int, help="model degree")
    sub.add_argument("--q", type=int, help="optimality order")
    sub.add_argument("--problem", help="problem name override")


def _load_config(args) -> RunConfig:
    raw = {}
    if args.config is not None:
        with open(args.config, "r", encoding="ascii") as fh:
            raw = json.load(fh)
    cfg = RunConfig.from_dict(raw)
    if args.problem is not None:
        cfg.problem = {"name": args.problem}
    if args.eps is not None:
        cfg.algo["eps"] = args.eps
    if args.seed is not None:
        cfg.seed = args.seed
    if args.schedule is not None:
        cfg.algo["schedule"] = args.schedule
    if args.oracle is not None:
        cfg.oracle["kind"] = args.oracle
    if getattr(args, "noise_fraction", None) is not None:
        cfg.oracle["noise_fraction"] = args.noise_fraction
    if args.p is not None:
        cfg.orders["p"] = args.p
    if args.q is not None:
        cfg.orders["q"] = args.q
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dynreg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the solver once and write the trace")
    _add_common(p_solve)

    p_scaling = sub.add_parser("scaling", help="run over an accuracy grid and check bounds")
    _add_common(p_scaling)
    p_scaling.add_argument("--eps-grid", default="1e-1:1e-5:5", help="LO:HI:POINTS, log spaced")

    p_check = sub.add_parser("sample-check", help="validate subsample sizes empirically")
    _add_common(p_check)
    p_check.add_argument("--trials", type=int, default=2000)
    p_check.add_argument("--eps-frac", default="0.1", help="comma-separated fractions of kappa_j")

    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "solve":
            return cmd_solve(cfg, args.out)
        if args.command == "scaling":
            return cmd_scaling(cfg, parse_eps_grid(args.eps_grid), args.out)
        fracs = [float(v) for v in args.eps_frac.split(",") if v]
        return cmd_sample_check(cfg, args.trials, fracs, args.out)
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
