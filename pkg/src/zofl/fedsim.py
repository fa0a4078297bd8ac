"""Simulated federated runs: accelerated gradient descent (minibatch and
single-machine), the extragradient mirror method for saddle problems, and a
plain local-averaging diagnostic loop.

Determinism contract: worker w in round n draws from RngStream(seed, (w, n)),
rounds aggregate worker parts in worker-id order, and traces carry a null
elapsed_ms, so one (config, seed) pair maps to one byte sequence regardless of
scheduling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .estimators import SmoothingConfig, batch_grad, saddle_operator_estimate
from .problems import (
    NoiseModel,
    SaddleProblem,
    StochasticProblem,
    ZerothOrderOracle,
    exact_gap,
)
from .vecspace import (
    Geometry,
    RngStream,
    as_vector,
    feasible_center,
    prox_step,
    set_distance,
)


class InfeasibleStartError(ValueError):
    """Requested start point lies outside the feasible set."""


@dataclass(frozen=True)
class FedTopology:
    """B workers, K local oracle interactions per worker and round, N rounds."""

    B: int
    K: int
    N: int

    def __post_init__(self):
        if self.B < 1 or self.K < 1 or self.N < 1:
            raise ValueError("topology components must be positive integers")


@dataclass
class StepPolicy:
    """Step size min(1/(2*l_fgamma), c_eta * r_scale * sqrt(batch) / (sigma * sqrt(t))).

    batch is the number of averaged samples behind each step, which divides
    the per-sample deviation sigma. Either branch may be disabled by a zero
    constant, but not both.
    """

    l_fgamma: float
    sigma: float
    r_scale: float
    c_eta: float = 1.0

    def step(self, t: int, batch: int) -> float:
        if t < 1 or batch < 1:
            raise ValueError("t and batch must be positive")
        base = math.inf if self.l_fgamma <= 0 else 1.0 / (2.0 * self.l_fgamma)
        if self.sigma <= 0:
            if math.isinf(base):
                raise ValueError("step policy needs l_fgamma or sigma positive")
            return base
        return min(base, self.c_eta * self.r_scale * math.sqrt(batch) / (self.sigma * math.sqrt(t)))


@dataclass
class AcSgdState:
    """Accelerated iterate pair: prox center x and running average x_ag."""

    x: np.ndarray
    x_ag: np.ndarray
    t: int = 0


@dataclass
class SmpState:
    """Extragradient state: prox center r and the weighted sum of query points w."""

    r: tuple
    w_sum: tuple
    weight: float
    eta: float

    def averaged(self) -> tuple:
        if self.weight <= 0:
            return tuple(np.array(b, copy=True) for b in self.r)
        return tuple(b / self.weight for b in self.w_sum)


@dataclass
class TraceRow:
    round: int
    calls: int
    value: float
    gap: float
    elapsed_ms: int
    seed: int
    config_hash: str


CSV_HEADER = "round,calls,value,gap,elapsed_ms,seed,config_hash"


@dataclass
class Trace:
    rows: list = field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.round},{r.calls},{r.value!r},{r.gap!r},{r.elapsed_ms},{r.seed},{r.config_hash}"
            )
        return "\n".join(lines) + "\n"


def aggregate_round(parts) -> np.ndarray:
    """Count-weighted merge of per-worker sample sums.

    parts are (worker_id, vector_sum, count) triples; ids must be unique. The
    accumulation runs in ascending worker id so the result does not depend on
    arrival order.
    """
    parts = sorted(parts, key=lambda p: p[0])
    ids = [p[0] for p in parts]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate worker ids in round aggregation")
    if not parts:
        raise ValueError("empty round")
    total = 0
    acc = np.zeros_like(np.asarray(parts[0][1], dtype=np.float64))
    for _, vec, count in parts:
        if count < 1:
            raise ValueError("part counts must be positive")
        acc = acc + np.asarray(vec, dtype=np.float64)
        total += int(count)
    return acc / total


def product_simplex_radius(d_x: int, d_y: int) -> float:
    """Euclidean diameter proxy of a product of two probability simplexes."""
    return math.sqrt(2.0 - 1.0 / d_x - 1.0 / d_y)


def _validate_start(x0, feasible, d: int) -> np.ndarray:
    x0 = as_vector(x0, d)
    if set_distance(x0, feasible) > 1e-9:
        raise InfeasibleStartError(
            f"start point at distance {set_distance(x0, feasible):.3e} from the set"
        )
    return x0.copy()


def _true_value(problem: StochasticProblem, x: np.ndarray) -> float:
    return float(problem.value(x, None))


def _gap(problem: StochasticProblem, value: float) -> float:
    return value - problem.f_star if problem.f_star is not None else math.nan


def run_minibatch_acc_sgd(
    problem: StochasticProblem,
    cfg: SmoothingConfig,
    topology: FedTopology,
    seed: int,
    policy: StepPolicy,
    noise: NoiseModel = NoiseModel(),
    geometry: Optional[Geometry] = None,
    x0: Optional[np.ndarray] = None,
    config_hash: str = "",
) -> Trace:
    """Accelerated descent with B workers collecting K estimates per round.

    Each round every worker samples K gradient estimates at the shared
    midpoint; the count-weighted average drives one accelerated step. The
    value column reports the noiseless objective at the averaged iterate.
    """
    geom = geometry if geometry is not None else Geometry("euclidean", problem.feasible)
    x = _validate_start(
        x0 if x0 is not None else feasible_center(problem.feasible, problem.d),
        problem.feasible,
        problem.d,
    )
    x_ag = x.copy()
    oracles = [
        ZerothOrderOracle(problem, cfg.gamma, noise, seed=seed, worker=w)
        for w in range(topology.B)
    ]
    trace = Trace()
    batch = topology.B * topology.K
    for n in range(1, topology.N + 1):
        alpha = 2.0 / (n + 2.0)
        x_md = (1.0 - alpha) * x_ag + alpha * x
        parts = []
        for w in range(topology.B):
            rng = RngStream(seed, (w, n))
            gs = batch_grad(oracles[w], x_md, cfg, topology.K, rng)
            parts.append((w, gs.g * topology.K, topology.K))
        g = aggregate_round(parts)
        eta = policy.step(n, batch)
        x = prox_step(x, g, eta, geom)
        x_ag = (1.0 - alpha) * x_ag + alpha * x
        calls = sum(o.calls for o in oracles)
        val = _true_value(problem, x_ag)
        trace.append(TraceRow(n, calls, val, _gap(problem, val), 0, seed, config_hash))
    return trace


def run_single_machine_acc_sgd(
    problem: StochasticProblem,
    cfg: SmoothingConfig,
    topology: FedTopology,
    seed: int,
    policy: StepPolicy,
    noise: NoiseModel = NoiseModel(),
    geometry: Optional[Geometry] = None,
    x0: Optional[np.ndarray] = None,
    config_hash: str = "",
) -> Trace:
    """Sequential accelerated descent: K single-sample steps per round, N rounds.

    The worker index is fixed at 0 and topology.B is ignored; round n reuses
    the stream key (0, n) across its K steps, so B=K=1 reproduces the
    minibatch runner bit for bit.
    """
    geom = geometry if geometry is not None else Geometry("euclidean", problem.feasible)
    x = _validate_start(
        x0 if x0 is not None else feasible_center(problem.feasible, problem.d),
        problem.feasible,
        problem.d,
    )
    x_ag = x.copy()
    oracle = ZerothOrderOracle(problem, cfg.gamma, noise, seed=seed, worker=0)
    trace = Trace()
    for n in range(1, topology.N + 1):
        rng = RngStream(seed, (0, n))
        for k in range(1, topology.K + 1):
            t = (n - 1) * topology.K + k
            alpha = 2.0 / (t + 2.0)
            x_md = (1.0 - alpha) * x_ag + alpha * x
            gs = batch_grad(oracle, x_md, cfg, 1, rng)
            eta = policy.step(t, 1)
            x = prox_step(x, gs.g, eta, geom)
            x_ag = (1.0 - alpha) * x_ag + alpha * x
        val = _true_value(problem, x_ag)
        trace.append(TraceRow(n, oracle.calls, val, _gap(problem, val), 0, seed, config_hash))
    return trace


def run_local_average_loop(
    problem: StochasticProblem,
    cfg: SmoothingConfig,
    topology: FedTopology,
    seed: int,
    policy: StepPolicy,
    noise: NoiseModel = NoiseModel(),
    geometry: Optional[Geometry] = None,
    x0: Optional[np.ndarray] = None,
    config_hash: str = "",
) -> Trace:
    """Diagnostic local-steps-then-average loop, without acceleration.

    This is a generic baseline for eyeballing communication/computation
    trade-offs; it is not one of the planned prescriptions and carries no
    accuracy guarantee of its own.
    """
    geom = geometry if geometry is not None else Geometry("euclidean", problem.feasible)
    x = _validate_start(
        x0 if x0 is not None else feasible_center(problem.feasible, problem.d),
        problem.feasible,
        problem.d,
    )
    oracles = [
        ZerothOrderOracle(problem, cfg.gamma, noise, seed=seed, worker=w)
        for w in range(topology.B)
    ]
    trace = Trace()
    for n in range(1, topology.N + 1):
        parts = []
        for w in range(topology.B):
            rng = RngStream(seed, (w, n))
            xl = x.copy()
            for k in range(1, topology.K + 1):
                t = (n - 1) * topology.K + k
                gs = batch_grad(oracles[w], xl, cfg, 1, rng)
                xl = prox_step(xl, gs.g, policy.step(t, 1), geom)
            parts.append((w, xl, 1))
        x = aggregate_round(parts)
        calls = sum(o.calls for o in oracles)
        val = _true_value(problem, x)
        trace.append(TraceRow(n, calls, val, _gap(problem, val), 0, seed, config_hash))
    return trace


def smp_step_size(
    mode: str,
    L: float,
    sigma: float,
    V: float,
    R: float,
    topology: FedTopology,
) -> float:
    """Constant extragradient step size for the minibatch or sequential mode."""
    if mode not in ("mb-smp", "sm-smp"):
        raise ValueError(f"unknown mode {mode!r}")
    base = math.inf if L <= 0 else 1.0 / (math.sqrt(3.0) * L)
    spread = V * V + 2.0 * sigma * sigma
    if spread <= 0:
        if math.isinf(base):
            raise ValueError("step size needs L or a positive deviation")
        return base
    if mode == "mb-smp":
        stoch = 7.0 * R * math.sqrt(2.0 * topology.B * topology.K / (7.0 * topology.N * spread))
    else:
        stoch = 7.0 * R * math.sqrt(2.0 / (7.0 * topology.K * topology.N * spread))
    return min(base, stoch)


def smp_query_point(state: SmpState, est_at_r: tuple, geoms: tuple) -> tuple:
    """Leading half-step of the extragradient update."""
    return tuple(
        prox_step(state.r[i], est_at_r[i], state.eta, geoms[i]) for i in range(len(state.r))
    )


def smp_step(state: SmpState, est_at_r: tuple, est_at_w: tuple, geoms: tuple) -> SmpState:
    """One extragradient update; accumulates the query point into the average."""
    w_pt = smp_query_point(state, est_at_r, geoms)
    state.r = tuple(
        prox_step(state.r[i], est_at_w[i], state.eta, geoms[i]) for i in range(len(state.r))
    )
    state.w_sum = tuple(state.w_sum[i] + state.eta * w_pt[i] for i in range(len(w_pt)))
    state.weight += state.eta
    return state


def _exact_operator(game: SaddleProblem, z: tuple) -> tuple:
    A = game.matrix
    if A is None:
        raise ValueError("exact operator mode needs the payoff matrix")
    x, y = z
    return (A @ y, -(A.T @ x))


def _round_saddle_estimate(oracles, rngs, z, cfg_x, cfg_y, K: int) -> tuple:
    """Average of K estimates per worker, merged in worker-id order."""
    d_x = z[0].size
    parts = []
    for w, (oracle, rng) in enumerate(zip(oracles, rngs)):
        acc = np.zeros(d_x + z[1].size)
        for _ in range(K):
            s = saddle_operator_estimate(oracle, z, cfg_x, cfg_y, rng)
            acc += np.concatenate([s.g_x, s.g_y])
        parts.append((w, acc, K))
    g = aggregate_round(parts)
    return (g[:d_x], g[d_x:])


def _saddle_geoms(game: SaddleProblem, kind: str) -> tuple:
    return (Geometry(kind, game.set_x), Geometry(kind, game.set_y))


def _saddle_row(
    game: SaddleProblem, state: SmpState, n: int, calls: int, seed: int, config_hash: str
) -> TraceRow:
    z_bar = state.averaged()
    val = float(game.value(z_bar[0], z_bar[1], None))
    gap = exact_gap(game, z_bar) if game.matrix is not None else math.nan
    return TraceRow(n, calls, val, gap, 0, seed, config_hash)


def run_minibatch_smp(
    game: SaddleProblem,
    cfg_x: SmoothingConfig,
    cfg_y: SmoothingConfig,
    topology: FedTopology,
    seed: int,
    noise: NoiseModel = NoiseModel(),
    sigma: float = 0.0,
    r_scale: Optional[float] = None,
    z0: Optional[tuple] = None,
    exact_operator: bool = False,
    geometry_kind: str = "euclidean",
    config_hash: str = "",
) -> Trace:
    """Extragradient method with per-round minibatch operator estimates.

    Each of the N rounds queries the operator at the current center and at the
    leading point, averaging B*K single-sample estimates per query point (or
    using the exact bilinear operator when exact_operator is set, which counts
    no oracle calls). sigma feeds the step size only.
    """
    geoms = _saddle_geoms(game, geometry_kind)
    if z0 is None:
        z0 = (feasible_center(game.set_x, game.d_x), feasible_center(game.set_y, game.d_y))
    z = (
        _validate_start(z0[0], game.set_x, game.d_x),
        _validate_start(z0[1], game.set_y, game.d_y),
    )
    R = r_scale if r_scale is not None else product_simplex_radius(game.d_x, game.d_y)
    eta = smp_step_size("mb-smp", game.lip_operator, sigma, game.affine_slack, R, topology)
    state = SmpState(
        r=z, w_sum=(np.zeros(game.d_x), np.zeros(game.d_y)), weight=0.0, eta=eta
    )
    oracles = [
        ZerothOrderOracle(game, max(cfg_x.gamma, cfg_y.gamma), noise, seed=seed, worker=w)
        for w in range(topology.B)
    ]
    trace = Trace()
    for n in range(1, topology.N + 1):
        if exact_operator:
            est_r = _exact_operator(game, state.r)
            w_pt = smp_query_point(state, est_r, geoms)
            est_w = _exact_operator(game, w_pt)
        else:
            rngs = [RngStream(seed, (w, n)) for w in range(topology.B)]
            est_r = _round_saddle_estimate(oracles, rngs, state.r, cfg_x, cfg_y, topology.K)
            w_pt = smp_query_point(state, est_r, geoms)
            est_w = _round_saddle_estimate(oracles, rngs, w_pt, cfg_x, cfg_y, topology.K)
        smp_step(state, est_r, est_w, geoms)
        calls = sum(o.calls for o in oracles)
        trace.append(_saddle_row(game, state, n, calls, seed, config_hash))
    return trace


def run_single_machine_smp(
    game: SaddleProblem,
    cfg_x: SmoothingConfig,
    cfg_y: SmoothingConfig,
    topology: FedTopology,
    seed: int,
    noise: NoiseModel = NoiseModel(),
    sigma: float = 0.0,
    r_scale: Optional[float] = None,
    z0: Optional[tuple] = None,
    exact_operator: bool = False,
    geometry_kind: str = "euclidean",
    config_hash: str = "",
) -> Trace:
    """Sequential extragradient: K single-sample iterations per round, N rounds."""
    geoms = _saddle_geoms(game, geometry_kind)
    if z0 is None:
        z0 = (feasible_center(game.set_x, game.d_x), feasible_center(game.set_y, game.d_y))
    z = (
        _validate_start(z0[0], game.set_x, game.d_x),
        _validate_start(z0[1], game.set_y, game.d_y),
    )
    R = r_scale if r_scale is not None else product_simplex_radius(game.d_x, game.d_y)
    eta = smp_step_size("sm-smp", game.lip_operator, sigma, game.affine_slack, R, topology)
    state = SmpState(
        r=z, w_sum=(np.zeros(game.d_x), np.zeros(game.d_y)), weight=0.0, eta=eta
    )
    oracle = ZerothOrderOracle(game, max(cfg_x.gamma, cfg_y.gamma), noise, seed=seed, worker=0)
    trace = Trace()
    for n in range(1, topology.N + 1):
        rng = RngStream(seed, (0, n))
        for _ in range(topology.K):
            if exact_operator:
                est_r = _exact_operator(game, state.r)
                w_pt = smp_query_point(state, est_r, geoms)
                est_w = _exact_operator(game, w_pt)
            else:
                est_r = _round_saddle_estimate([oracle], [rng], state.r, cfg_x, cfg_y, 1)
                w_pt = smp_query_point(state, est_r, geoms)
                est_w = _round_saddle_estimate([oracle], [rng], w_pt, cfg_x, cfg_y, 1)
            smp_step(state, est_r, est_w, geoms)
        trace.append(_saddle_row(game, state, n, oracle.calls, seed, config_hash))
    return trace
