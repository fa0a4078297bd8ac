"""Command line front end: plan printing, seeded runs, budget-constrained
K sweeps, and a self-check suite.

Exit codes: 0 success, 2 configuration or usage error, 3 infeasible start
point, 4 self-check failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import estimators, fedsim, planner, problems, vecspace
from .estimators import SmoothingConfig
from .fedsim import FedTopology, InfeasibleStartError, StepPolicy
from .planner import ConfigurationError, ProblemConstants
from .problems import NoiseModel
from .vecspace import Geometry, RngStream


class ConfigError(ValueError):
    """Malformed experiment configuration."""


_TOP_KEYS = {
    "problem",
    "algorithm",
    "scheme",
    "feedback",
    "topology",
    "budget",
    "sweep",
    "constants",
    "repeat",
    "out",
    "seed",
    "p",
    "step",
    "x0",
    "geometry",
    "mode",
}
_PROBLEM_KEYS = {"kind", "d", "seed", "delta", "noise", "matrix"}
_TOPOLOGY_KEYS = {"B", "K", "N"}
_SWEEP_KEYS = {"K", "B"}
_CONSTANTS_KEYS = {"d", "M", "M2", "G", "R", "eps"}
_STEP_KEYS = {"l_fgamma", "sigma", "c_eta"}


def _reject_unknown(block: dict, allowed: set, where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(cfg, _TOP_KEYS, "top-level")
    for key, allowed in (
        ("problem", _PROBLEM_KEYS),
        ("topology", _TOPOLOGY_KEYS),
        ("sweep", _SWEEP_KEYS),
        ("constants", _CONSTANTS_KEYS),
        ("step", _STEP_KEYS),
    ):
        if key in cfg:
            if not isinstance(cfg[key], dict):
                raise ConfigError(f"{key} must be a JSON object")
            _reject_unknown(cfg[key], allowed, key)
    return cfg


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _build_problem(cfg: dict):
    block = cfg.get("problem")
    if not isinstance(block, dict):
        raise ConfigError("config needs a problem block")
    kind = block.get("kind")
    if kind == "simplex-linf":
        if "d" not in block or "seed" not in block:
            raise ConfigError("simplex-linf needs d and seed")
        return problems.make_simplex_test_problem(int(block["d"]), int(block["seed"]))
    if kind == "bilinear-game":
        if "matrix" not in block:
            raise ConfigError("bilinear-game needs a matrix")
        return problems.make_bilinear_game(np.asarray(block["matrix"], dtype=np.float64))
    raise ConfigError(f"unknown problem kind {kind!r}")


def _build_noise(cfg: dict) -> NoiseModel:
    block = cfg.get("problem", {})
    delta = float(block.get("delta", 0.0))
    kind = block.get("noise", "uniform" if delta > 0 else "none")
    try:
        return NoiseModel(kind=kind, level=delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _set_diameter(feasible: vecspace.FeasibleSet, d: int) -> float | None:
    if feasible.kind == "simplex":
        return math.sqrt(2.0)
    if feasible.kind == "ball":
        return 2.0 * feasible.radius
    if feasible.kind == "box":
        return (feasible.hi - feasible.lo) * math.sqrt(d)
    return None


def _build_constants(cfg: dict, problem=None) -> ProblemConstants:
    over = cfg.get("constants", {})
    vals: dict = {}
    if isinstance(problem, problems.StochasticProblem):
        vals = {
            "d": problem.d,
            "M": problem.lip_m,
            "M2": problem.lip_m2,
            "G": problem.value_bound,
            "R": _set_diameter(problem.feasible, problem.d),
        }
    elif isinstance(problem, problems.SaddleProblem):
        vals = {
            "d": problem.d_x + problem.d_y,
            "M": max(problem.lip_m2_x, problem.lip_m2_y),
            "M2": max(problem.lip_m2_x, problem.lip_m2_y),
            "G": float(np.max(np.abs(problem.matrix))) if problem.matrix is not None else None,
            "R": fedsim.product_simplex_radius(problem.d_x, problem.d_y),
        }
    vals.update({k: over[k] for k in over})
    missing = [k for k in ("d", "M", "M2", "R", "eps") if vals.get(k) is None]
    if missing:
        raise ConfigError(f"constants are incomplete: missing {missing}")
    try:
        return ProblemConstants(
            d=int(vals["d"]),
            M=float(vals["M"]),
            M2=float(vals["M2"]),
            R=float(vals["R"]),
            eps=float(vals["eps"]),
            G=None if vals.get("G") is None else float(vals["G"]),
        )
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad constants: {exc}") from exc


def _require(cfg: dict, keys) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError(f"config is missing required keys: {missing}")


def _effective_p(cfg: dict, scheme: str) -> int:
    p = cfg.get("p")
    if p is None:
        return 1 if scheme == "l1" else 2
    if p not in (1, 2):
        raise ConfigError("p must be 1 or 2")
    return int(p)


def _topology(cfg: dict) -> FedTopology:
    block = cfg.get("topology")
    if not isinstance(block, dict):
        raise ConfigError("config needs a topology block with B, K, N")
    try:
        return FedTopology(B=int(block["B"]), K=int(block["K"]), N=int(block["N"]))
    except KeyError as exc:
        raise ConfigError(f"topology is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _policy_and_config(
    cfg: dict, consts: ProblemConstants, scheme: str, feedback: str
) -> tuple[StepPolicy, SmoothingConfig]:
    p = _effective_p(cfg, scheme)
    gamma = planner.smoothing_gamma(consts, scheme)
    grad_lip = planner.grad_lipschitz(consts, scheme)
    sigma = math.sqrt(planner.sigma_sq_bound(consts, scheme, feedback, p))
    policy = StepPolicy(l_fgamma=grad_lip, sigma=sigma, r_scale=consts.R)
    step = cfg.get("step", {})
    if "l_fgamma" in step:
        policy.l_fgamma = float(step["l_fgamma"])
    if "sigma" in step:
        policy.sigma = float(step["sigma"])
    if "c_eta" in step:
        policy.c_eta = float(step["c_eta"])
    smoothing = SmoothingConfig(scheme=scheme, feedback=feedback, gamma=gamma, p=p)
    return policy, smoothing


def _geometry(cfg: dict, feasible: vecspace.FeasibleSet) -> Geometry:
    kind = cfg.get("geometry", "euclidean")
    try:
        return Geometry(kind, feasible)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_params(cfg: dict, out_dir: str | None) -> int:
    _require(cfg, ["algorithm", "scheme", "feedback"])
    problem = _build_problem(cfg) if "problem" in cfg else None
    consts = _build_constants(cfg, problem)
    plan = planner.plan(
        cfg["algorithm"], consts, cfg["scheme"], cfg["feedback"], cfg.get("p")
    )
    text = json.dumps(plan.to_dict(), indent=2, sort_keys=True)
    print(text)
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / "plan.json").write_text(text + "\n", encoding="utf-8")
    return 0


def _single_run(problem, cfg, topology, seed, policy, smoothing, noise, geometry, chash):
    algorithm = cfg["algorithm"]
    x0 = np.asarray(cfg["x0"], dtype=np.float64) if "x0" in cfg else None
    if algorithm == "mb-asgd":
        return fedsim.run_minibatch_acc_sgd(
            problem, smoothing, topology, seed, policy,
            noise=noise, geometry=geometry, x0=x0, config_hash=chash,
        )
    if algorithm == "sm-asgd":
        return fedsim.run_single_machine_acc_sgd(
            problem, smoothing, topology, seed, policy,
            noise=noise, geometry=geometry, x0=x0, config_hash=chash,
        )
    raise ConfigError(f"algorithm {algorithm!r} has no simulation runner")


def _single_smp_run(game, cfg, topology, seed, smoothing, noise, chash):
    algorithm = cfg["algorithm"]
    step = cfg.get("step", {})
    sigma = float(step.get("sigma", 0.0))
    runner = fedsim.run_minibatch_smp if algorithm == "mb-smp" else fedsim.run_single_machine_smp
    return runner(
        game,
        smoothing,
        smoothing,
        topology,
        seed,
        noise=noise,
        sigma=sigma,
        geometry_kind=cfg.get("geometry", "euclidean"),
        config_hash=chash,
    )


def cmd_run(cfg: dict, out_dir: str | None, seed: int | None, repeat: int | None) -> int:
    _require(cfg, ["problem", "algorithm", "scheme", "feedback", "topology"])
    if "budget" in cfg or "sweep" in cfg:
        raise ConfigError("run takes an explicit topology, not a budget sweep")
    if cfg["algorithm"] in ("local-acsa", "fedac"):
        raise ConfigError(
            f"algorithm {cfg['algorithm']!r} is planner-only and has no simulation runner"
        )
    problem = _build_problem(cfg)
    noise = _build_noise(cfg)
    topology = _topology(cfg)
    consts = _build_constants(cfg, problem)
    base_seed = int(seed if seed is not None else cfg.get("seed", 0))
    n_runs = int(repeat if repeat is not None else cfg.get("repeat", 1))
    if n_runs < 1:
        raise ConfigError("repeat must be at least 1")
    out = Path(out_dir if out_dir is not None else cfg.get("out", "runs"))
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)

    scheme, feedback = cfg["scheme"], cfg["feedback"]
    is_saddle = isinstance(problem, problems.SaddleProblem)
    if is_saddle and cfg["algorithm"] not in ("mb-smp", "sm-smp"):
        raise ConfigError("saddle problems run under mb-smp or sm-smp")
    if not is_saddle and cfg["algorithm"] in ("mb-smp", "sm-smp"):
        raise ConfigError("mb-smp and sm-smp need a saddle problem")

    policy, smoothing = _policy_and_config(cfg, consts, scheme, feedback)
    geometry = None if is_saddle else _geometry(cfg, problem.feasible)

    records = []
    for i in range(n_runs):
        run_seed = base_seed + i
        if is_saddle:
            trace = _single_smp_run(problem, cfg, topology, run_seed, smoothing, noise, chash)
        else:
            trace = _single_run(
                problem, cfg, topology, run_seed, policy, smoothing, noise, geometry, chash
            )
        fname = f"run_seed{run_seed}.csv"
        (out / fname).write_text(trace.to_csv(), encoding="utf-8")
        records.append(
            {
                "seed": run_seed,
                "final_value": trace.final.value,
                "final_gap": trace.final.gap,
                "calls": trace.final.calls,
                "file": fname,
            }
        )
    gaps = [r["final_gap"] for r in records]
    finite = [g for g in gaps if not math.isnan(g)]
    summary = {
        "command": "run",
        "config_hash": chash,
        "algorithm": cfg["algorithm"],
        "scheme": scheme,
        "feedback": feedback,
        "runs": records,
        "mean_final_gap": float(np.mean(finite)) if finite else None,
        "std_final_gap": float(np.std(finite, ddof=1)) if len(finite) > 1 else 0.0,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _rank(values) -> np.ndarray:
    """Average ranks, 1-based."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    rx, ry = _rank(xs), _rank(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0:
        return 0.0
    return float(rx @ ry) / denom


def cmd_sweep_k(
    cfg: dict, out_dir: str | None, seed: int | None, repeat: int | None, threads: int
) -> int:
    _require(cfg, ["problem", "algorithm", "budget", "sweep"])
    if "topology" in cfg:
        raise ConfigError("sweep-k takes a budget and K list, not an explicit topology")
    if cfg["algorithm"] not in ("mb-asgd", "sm-asgd"):
        raise ConfigError("sweep-k supports mb-asgd and sm-asgd")
    sweep = cfg["sweep"]
    if "K" not in sweep or not isinstance(sweep["K"], list) or not sweep["K"]:
        raise ConfigError("sweep needs a non-empty K list")
    budget = int(cfg["budget"])
    if budget < 1:
        raise ConfigError("budget must be positive")
    workers = int(sweep.get("B", 1))
    feedback = cfg.get("feedback", "two-point")
    problem = _build_problem(cfg)
    noise = _build_noise(cfg)
    consts = _build_constants(cfg, problem)
    base_seed = int(seed if seed is not None else cfg.get("seed", 0))
    n_runs = int(repeat if repeat is not None else cfg.get("repeat", 1))
    out = Path(out_dir if out_dir is not None else cfg.get("out", "runs"))
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)

    ks = []
    for k in sweep["K"]:
        k = int(k)
        if budget % k != 0:
            print(f"warning: K={k} does not divide budget {budget}, skipped", file=sys.stderr)
            continue
        ks.append(k)
    if not ks:
        raise ConfigError("no K in the sweep divides the budget")

    tasks = []
    for scheme in ("l1", "l2"):
        policy, smoothing = _policy_and_config(cfg, consts, scheme, feedback)
        geometry = _geometry(cfg, problem.feasible)
        for k in ks:
            topo = FedTopology(B=workers, K=k, N=budget // k)
            for i in range(n_runs):
                tasks.append((scheme, k, base_seed + i, topo, policy, smoothing, geometry))

    def _work(task):
        scheme, k, run_seed, topo, policy, smoothing, geometry = task
        trace = _single_run(problem, cfg, topo, run_seed, policy, smoothing, noise, geometry, chash)
        return (scheme, k, run_seed), trace.final.gap

    results = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for key, gap in pool.map(_work, tasks):
                results[key] = gap
    else:
        for task in tasks:
            key, gap = _work(task)
            results[key] = gap

    rows = []
    summary_rows = []
    for scheme in ("l1", "l2"):
        for k in ks:
            gaps = np.array([results[(scheme, k, base_seed + i)] for i in range(n_runs)])
            mean = float(gaps.mean())
            se = float(gaps.std(ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else 0.0
            rows.append(
                f"{scheme},{k},{budget // k},{workers},{n_runs},{mean!r},{se!r}"
            )
            summary_rows.append(
                {"scheme": scheme, "K": k, "N": budget // k, "B": workers,
                 "mean_final_gap": mean, "se_final_gap": se}
            )
    csv_text = "scheme,K,N,B,repeat,mean_final_gap,se_final_gap\n" + "\n".join(rows) + "\n"
    (out / "sweep.csv").write_text(csv_text, encoding="utf-8")

    rho = {}
    for scheme in ("l1", "l2"):
        means = [r["mean_final_gap"] for r in summary_rows if r["scheme"] == scheme]
        rho[scheme] = spearman(ks, means)
    summary = {
        "command": "sweep-k",
        "config_hash": chash,
        "budget": budget,
        "K": ks,
        "rows": summary_rows,
        "spearman": rho,
    }
    (out / "sweep_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    for scheme in ("l1", "l2"):
        print(f"scheme={scheme} spearman(K, mean_final_gap)={rho[scheme]:.4f}")
    return 0


def _check(name: str, ok: bool, detail: str, lines: list) -> None:
    lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")


def cmd_validate(mode: str = "quick") -> int:
    """Statistical self-checks of the sampling and estimation layer."""
    if mode not in ("quick", "full"):
        raise ConfigError("validate mode must be quick or full")
    n = 10_000 if mode == "quick" else 100_000
    lines: list[str] = []

    # direction sampling: zero mean, and isotropic second moment under l2
    for scheme, p_dir in (("l1", 1), ("l2", 2)):
        d = 5
        e = vecspace.sample_sphere_batch(n, d, p_dir, RngStream(11, (0,)))
        stat = float(np.linalg.norm(e.mean(axis=0)))
        se = math.sqrt(float(e.var(axis=0, ddof=1).sum()) / n)
        _check(f"sphere-mean-zero[{scheme}]", stat <= 4.0 * se,
               f"|mean|={stat:.2e} limit={4.0 * se:.2e}", lines)
    e = vecspace.sample_sphere_batch(n, 5, 2, RngStream(12, (0,)))
    cov = (e.T @ e) / n
    dev = float(np.linalg.norm(cov - np.eye(5) / 5.0)) / float(np.linalg.norm(np.eye(5) / 5.0))
    _check("sphere-isotropy[l2,d=5]", dev <= 0.1, f"relative deviation={dev:.3f}", lines)

    # estimator mean against the exact gradient of a linear objective
    d = 50
    c = RngStream(13, (0,)).gen.standard_normal(d)
    c /= np.linalg.norm(c)
    probe = problems.StochasticProblem(
        d=d,
        value=lambda x, xi=None: float(c @ x),
        feasible=vecspace.FeasibleSet("unconstrained"),
        lip_m=1.0,
        lip_m2=1.0,
        value_bound=1.0,
        value_batch=lambda pts, seeds: pts @ c,
    )
    for scheme in ("l1", "l2"):
        for feedback in ("two-point", "one-point"):
            cfg = SmoothingConfig(scheme=scheme, feedback=feedback, gamma=0.1)
            oracle = problems.ZerothOrderOracle(probe, cfg.gamma)
            rows, _ = estimators._estimate_rows(
                oracle, np.zeros(d), cfg, n, RngStream(14, (0,))
            )
            err = float(np.linalg.norm(rows.mean(axis=0) - c))
            se = math.sqrt(float(rows.var(axis=0, ddof=1).sum()) / n)
            _check(f"unbiasedness[{scheme},{feedback}]", err <= 3.0 * se,
                   f"|mean-grad|={err:.2e} limit={3.0 * se:.2e}", lines)

    # smoothed value sandwiched between f and f plus the scheme overhead
    d = 20 if mode == "quick" else 100
    sp = problems.make_simplex_test_problem(d, seed=7)
    pts = 5 if mode == "quick" else 20
    rng = RngStream(15, (0,))
    for scheme in ("l1", "l2"):
        gamma = 0.05
        cfg = SmoothingConfig(scheme=scheme, feedback="two-point", gamma=gamma)
        overhead = (2.0 / math.sqrt(d)) * gamma * sp.lip_m2 if scheme == "l1" else gamma * sp.lip_m2
        ok = True
        worst = ""
        for j in range(pts):
            x = vecspace.project(rng.gen.dirichlet(np.ones(d)), sp.feasible)
            est, se = estimators.mc_smoothed_value(sp, x, cfg, n, rng.substream(j))
            fx = sp.value(x, None)
            if not (fx - 3.0 * se <= est <= fx + overhead + 3.0 * se):
                ok = False
                worst = f" point {j}: f={fx:.6f} est={est:.6f} se={se:.2e}"
        _check(f"smoothing-sandwich[{scheme}]", ok, f"{pts} points, gamma={gamma}{worst}", lines)

    # estimator second moment under its ceiling, with and without corruption
    d = 10
    c10 = RngStream(16, (0,)).gen.standard_normal(d)
    c10 /= np.linalg.norm(c10)
    lin10 = problems.StochasticProblem(
        d=d,
        value=lambda x, xi=None: float(c10 @ x),
        feasible=vecspace.FeasibleSet("ball"),
        lip_m=1.0,
        lip_m2=1.0,
        value_bound=1.2,
        value_batch=lambda pts, seeds: pts @ c10,
    )
    consts = ProblemConstants(d=d, M=1.0, M2=1.0, R=2.0, eps=0.1, G=1.2)
    for scheme in ("l1", "l2"):
        gamma = planner.smoothing_gamma(consts, scheme)
        for feedback in ("two-point", "one-point"):
            dmax = planner.max_noise("mb-asgd", consts, scheme, feedback)
            ok = True
            detail = []
            for delta in (0.0, 0.5 * dmax):
                cfg = SmoothingConfig(scheme=scheme, feedback=feedback, gamma=gamma)
                noise = NoiseModel("uniform", delta) if delta > 0 else NoiseModel()
                oracle = problems.ZerothOrderOracle(lin10, gamma, noise, seed=17)
                mean, se = estimators.second_moment_estimate(
                    oracle, np.zeros(d), cfg, n, RngStream(18, (0,))
                )
                bound = planner.second_moment_ceiling(
                    d, 1.0, 1.2, gamma, delta, scheme, feedback
                )
                detail.append(f"delta={delta:.1e}: {mean:.3g} vs {bound:.3g}")
                if mean - 3.0 * se > bound:
                    ok = False
            _check(f"second-moment[{scheme},{feedback}]", ok, "; ".join(detail), lines)

    # corruption bias grows along the predicted slope in the noise level
    d = 50
    gamma = 0.1
    deltas = [0.0, 1e-5, 1e-4, 1e-3]
    for scheme in ("l1", "l2"):
        cfg = SmoothingConfig(scheme=scheme, feedback="two-point", gamma=gamma)
        bias = estimators.worst_case_bias_probe(d, cfg, deltas, n, seed=19)
        theory = d / gamma if scheme == "l1" else math.sqrt(d) / gamma
        num = sum(b * dl for b, dl in zip(bias, deltas))
        den = sum(dl * dl for dl in deltas)
        slope = num / den
        ratio = slope / theory
        _check(f"noise-bias-slope[{scheme}]", 1.0 / 3.0 <= ratio <= 3.0,
               f"slope={slope:.3g} theory={theory:.3g} ratio={ratio:.2f}", lines)

    failed = sum(1 for l in lines if l.startswith("FAIL"))
    for line in lines:
        print(line)
    print(f"{len(lines) - failed}/{len(lines)} checks passed ({mode} mode)")
    return 4 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zofl",
        description="Gradient-free federated optimization: plans, runs, sweeps, self-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("params", "run", "sweep-k", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a JSON experiment config")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--repeat", type=int, help="number of seeded repetitions")
        p.add_argument("--threads", type=int, help="worker threads for sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            mode = "quick"
            if args.config:
                mode = load_config(args.config).get("mode", "quick")
            return cmd_validate(mode)
        if not args.config:
            raise ConfigError(f"{args.command} requires --config")
        cfg = load_config(args.config)
        if args.command == "params":
            return cmd_params(cfg, args.out)
        if args.command == "run":
            return cmd_run(cfg, args.out, args.seed, args.repeat)
        threads = args.threads
        if threads is None:
            threads = int(os.environ.get("ZOFL_THREADS", "1"))
        return cmd_sweep_k(cfg, args.out, args.seed, args.repeat, max(1, threads))
    except (ConfigError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleStartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
