"""Problem containers, bounded-noise models, and the function-value oracle.

A problem exposes only zeroth-order information: value(x, xi) where xi is an
integer seed selecting the stochastic realization (ignored by deterministic
problems). All oracle access goes through ZerothOrderOracle, which counts
calls, adds bounded noise, and rejects queries outside the smoothed domain.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .vecspace import (
    FeasibleSet,
    RngStream,
    as_vector,
    feasible_center,
    project,
    set_distance,
    set_distance_batch,
)


class DomainError(ValueError):
    """Query point outside the feasible set inflated by gamma."""


@dataclass
class StochasticProblem:
    """Minimization problem min_{x in feasible} E_xi f(x, xi).

    lip_m / lip_m2 bound the Lipschitz constant and the second moment of the
    subgradient norm; value_bound caps |f| on the inflated domain. value_batch,
    when provided, evaluates an (m, d) block of points against an (m,) array of
    seeds and must agree with value row by row.
    """

    d: int
    value: Callable[[np.ndarray, Optional[int]], float]
    feasible: FeasibleSet
    lip_m: float
    lip_m2: float
    value_bound: float
    f_star: Optional[float] = None
    value_batch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    meta: dict = field(default_factory=dict)

    def eval_batch(self, pts: np.ndarray, seeds: np.ndarray) -> np.ndarray:
        if self.value_batch is not None:
            return np.asarray(self.value_batch(pts, seeds), dtype=np.float64)
        return np.array([self.value(pts[i], int(seeds[i])) for i in range(pts.shape[0])])


@dataclass
class SaddleProblem:
    """Convex-concave problem min_x max_y E_xi phi(x, y, xi) on set_x times set_y.

    lip_operator bounds the Lipschitz constant of the monotone operator
    (grad_x, -grad_y); affine_slack is zero for bilinear payoffs. matrix, when
    set, enables exact-operator evaluation for diagnostics.
    """

    d_x: int
    d_y: int
    value: Callable[[np.ndarray, np.ndarray, Optional[int]], float]
    set_x: FeasibleSet
    set_y: FeasibleSet
    lip_m2_x: float
    lip_m2_y: float
    lip_operator: float
    affine_slack: float = 0.0
    matrix: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NoiseModel:
    """Bounded oracle corruption: |delta| <= level on every call.

    kind "none": exact values. "uniform": i.i.d. U[-level, level] per call from
    the oracle's own stream. "sign-adversarial": a deterministic function of the
    query point (hash of the 1e-9-quantized coordinates), so repeated queries at
    the same point see the same corruption.
    """

    kind: str = "none"
    level: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "uniform", "sign-adversarial"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.level < 0:
            raise ValueError("noise level must be nonnegative")


def _adversarial_noise(x: np.ndarray, level: float) -> float:
    q = np.round(np.asarray(x, dtype=np.float64) / 1e-9).astype(np.int64)
    h = hashlib.blake2b(q.tobytes(), digest_size=8).digest()
    u = int.from_bytes(h, "little") / 2.0**64
    return level * (2.0 * u - 1.0)


class ZerothOrderOracle:
    """Counts value queries, injects noise, enforces the inflated domain.

    gamma sets the domain slack: queries must lie within gamma (plus rounding
    tolerance) of the feasible set, matching the solvers' x +- gamma*e probes.
    The uniform-noise stream is keyed by (seed, (worker,)) so distinct workers
    draw independent corruption sequences.
    """

    _DOMAIN_TOL = 1e-9

    def __init__(
        self,
        problem,
        gamma: float,
        noise: NoiseModel = NoiseModel(),
        seed: int = 0,
        worker: int = 0,
    ):
        if gamma < 0:
            raise ValueError("gamma must be nonnegative")
        self.problem = problem
        self.gamma = float(gamma)
        self.noise = noise
        self.calls = 0
        self._noise_gen = None
        if noise.kind == "uniform":
            self._noise_gen = RngStream(seed, (worker,)).gen

    def reset_calls(self) -> None:
        self.calls = 0

    def _delta(self, x: np.ndarray) -> float:
        if self.noise.kind == "none" or self.noise.level == 0.0:
            return 0.0
        if self.noise.kind == "uniform":
            return float(self._noise_gen.uniform(-self.noise.level, self.noise.level))
        return _adversarial_noise(x, self.noise.level)

    def _check_domain(self, x: np.ndarray, feasible: FeasibleSet) -> None:
        if set_distance(x, feasible) > self.gamma + self._DOMAIN_TOL:
            raise DomainError(
                f"query at distance {set_distance(x, feasible):.3e} from the set "
                f"exceeds gamma={self.gamma:.3e}"
            )

    def value(self, x: np.ndarray, xi: Optional[int] = None) -> float:
        x = as_vector(x, self.problem.d)
        self._check_domain(x, self.problem.feasible)
        self.calls += 1
        return float(self.problem.value(x, xi)) + self._delta(x)

    def value_batch(self, pts: np.ndarray, seeds: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        if pts.shape[1] != self.problem.d:
            raise ValueError(f"expected width {self.problem.d}, got {pts.shape[1]}")
        dist = set_distance_batch(pts, self.problem.feasible)
        if np.any(dist > self.gamma + self._DOMAIN_TOL):
            raise DomainError(
                f"batch query at distance {float(dist.max()):.3e} from the set "
                f"exceeds gamma={self.gamma:.3e}"
            )
        m = pts.shape[0]
        self.calls += m
        vals = self.problem.eval_batch(pts, np.asarray(seeds))
        if self.noise.kind == "none" or self.noise.level == 0.0:
            return vals
        if self.noise.kind == "uniform":
            return vals + self._noise_gen.uniform(-self.noise.level, self.noise.level, size=m)
        return vals + np.array([_adversarial_noise(pts[i], self.noise.level) for i in range(m)])

    def saddle_value(self, x: np.ndarray, y: np.ndarray, xi: Optional[int] = None) -> float:
        p = self.problem
        x = as_vector(x, p.d_x)
        y = as_vector(y, p.d_y)
        self._check_domain(x, p.set_x)
        self._check_domain(y, p.set_y)
        self.calls += 1
        delta = self._delta(np.concatenate([x, y]))
        return float(p.value(x, y, xi)) + delta

    def saddle_value_batch(self, xs: np.ndarray, ys: np.ndarray, seeds: np.ndarray) -> np.ndarray:
        p = self.problem
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        if np.any(set_distance_batch(xs, p.set_x) > self.gamma + self._DOMAIN_TOL) or np.any(
            set_distance_batch(ys, p.set_y) > self.gamma + self._DOMAIN_TOL
        ):
            raise DomainError("batch query outside the inflated domain")
        m = xs.shape[0]
        self.calls += m
        vals = np.array([float(p.value(xs[i], ys[i], int(seeds[i]))) for i in range(m)])
        if self.noise.kind == "none" or self.noise.level == 0.0:
            return vals
        if self.noise.kind == "uniform":
            return vals + self._noise_gen.uniform(-self.noise.level, self.noise.level, size=m)
        return vals + np.array(
            [_adversarial_noise(np.concatenate([xs[i], ys[i]]), self.noise.level) for i in range(m)]
        )


def noisy_value(oracle: ZerothOrderOracle, x: np.ndarray, xi=None) -> float:
    """One counted, noise-corrupted oracle query.

    xi may be an integer seed, an RngStream (one integer is drawn from it), or
    None for deterministic problems.
    """
    if isinstance(xi, RngStream):
        xi = int(xi.gen.integers(2**63))
    return oracle.value(x, xi)


# (d, seed) -> (b, f_star, x_star); the refinement pass is costly enough to cache
_SIMPLEX_CACHE: dict = {}


def make_simplex_test_problem(d: int, seed: int) -> StochasticProblem:
    """f(x) = <b, x> + ||x||_inf on the probability simplex, b ~ U[0,1]^d.

    b is drawn once from RngStream(seed, (0,)); the xi argument is ignored.
    The exact minimum is attached as f_star.
    """
    key = (int(d), int(seed))
    if key not in _SIMPLEX_CACHE:
        b = RngStream(seed, (0,)).gen.uniform(0.0, 1.0, size=d)
        f_star, x_star = _simplex_linf_minimum(b)
        _SIMPLEX_CACHE[key] = (b, f_star, x_star)
    b, f_star, x_star = _SIMPLEX_CACHE[key]
    feasible = FeasibleSet("simplex")

    def value(x, xi=None, _b=b):
        return float(_b @ x) + float(np.max(np.abs(x)))

    def value_batch(pts, seeds, _b=b):
        return pts @ _b + np.max(np.abs(pts), axis=1)

    return StochasticProblem(
        d=d,
        value=value,
        feasible=feasible,
        lip_m=float(np.linalg.norm(b)) + 1.0,
        lip_m2=float(np.linalg.norm(b)) + 1.0,
        value_bound=float(np.max(np.abs(b))) + 1.0,
        f_star=f_star,
        value_batch=value_batch,
        meta={"kind": "simplex-linf", "d": int(d), "seed": int(seed), "b": b.tolist()},
    )


def _simplex_linf_minimum(b: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact minimum of <b,x> + ||x||_inf on the simplex.

    Candidates put mass 1/k on the k smallest entries of b; a projected
    subgradient pass from the best candidate guards against degenerate ties.
    """
    d = b.size
    order = np.argsort(b, kind="stable")
    csum = np.cumsum(b[order])
    ks = np.arange(1, d + 1)
    vals = csum / ks + 1.0 / ks
    k_best = int(np.argmin(vals))
    x = np.zeros(d)
    x[order[: k_best + 1]] = 1.0 / (k_best + 1)
    best_val = float(vals[k_best])
    best_x = x.copy()

    m2 = float(np.linalg.norm(b)) + 1.0
    r = math.sqrt(2.0)
    feasible = FeasibleSet("simplex")
    for t in range(1, 100001):
        g = b.copy()
        g[int(np.argmax(np.abs(x)))] += math.copysign(1.0, x[int(np.argmax(np.abs(x)))]) if np.max(np.abs(x)) > 0 else 0.0
        x = project(x - (r / (m2 * math.sqrt(t))) * g, feasible)
        v = float(b @ x) + float(np.max(np.abs(x)))
        if v < best_val:
            best_val = v
            best_x = x.copy()
    return best_val, best_x


def brute_force_min(problem: StochasticProblem, budget: int = 100000) -> float:
    """Reference minimum value, for attaching f_star to test problems.

    Problems tagged simplex-linf get the exact enumeration; anything else gets
    shrinking-radius random local search from 16 starts within the budget.
    """
    if problem.meta.get("kind") == "simplex-linf":
        b = np.asarray(problem.meta["b"], dtype=np.float64)
        return _simplex_linf_minimum(b)[0]
    rng = RngStream(12345, (0,)).gen
    d = problem.d
    feasible = problem.feasible
    iters = max(1, budget // 16)
    best = math.inf
    for s in range(16):
        x = project(feasible_center(feasible, d) + rng.standard_normal(d), feasible)
        fx = float(problem.value(x, 0))
        radius = 1.0
        for _ in range(iters):
            cand = project(x + radius * rng.standard_normal(d), feasible)
            fc = float(problem.value(cand, 0))
            if fc < fx:
                x, fx = cand, fc
            else:
                radius *= 0.995
        best = min(best, fx)
    return best


def make_bilinear_game(A: np.ndarray) -> SaddleProblem:
    """min_x max_y x^T A y on a product of probability simplexes."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    d_x, d_y = A.shape

    def value(x, y, xi=None, _A=A):
        return float(x @ _A @ y)

    return SaddleProblem(
        d_x=d_x,
        d_y=d_y,
        value=value,
        set_x=FeasibleSet("simplex"),
        set_y=FeasibleSet("simplex"),
        lip_m2_x=float(np.max(np.linalg.norm(A, axis=0))),
        lip_m2_y=float(np.max(np.linalg.norm(A, axis=1))),
        lip_operator=float(np.max(np.abs(A))),
        affine_slack=0.0,
        matrix=A,
        meta={"kind": "bilinear-game", "A": A.tolist()},
    )


def exact_gap(game: SaddleProblem, z: tuple[np.ndarray, np.ndarray]) -> float:
    """Duality gap max_y phi(x, y) - min_x phi(x, y) for a bilinear game."""
    if game.matrix is None:
        raise ValueError("exact_gap needs the payoff matrix")
    x, y = z
    A = game.matrix
    return float(np.max(A.T @ x) - np.min(A @ y))


def problem_to_json(problem) -> str:
    meta = dict(problem.meta)
    if not meta.get("kind"):
        raise ValueError("only factory-built problems serialize")
    return json.dumps(meta, sort_keys=True)


def problem_from_json(text: str):
    meta = json.loads(text)
    kind = meta.get("kind")
    if kind == "simplex-linf":
        return make_simplex_test_problem(meta["d"], meta["seed"])
    if kind == "bilinear-game":
        return make_bilinear_game(np.asarray(meta["A"], dtype=np.float64))
    raise ValueError(f"unknown problem kind {kind!r}")
