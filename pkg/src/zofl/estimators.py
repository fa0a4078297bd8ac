"""Gradient and saddle-operator estimators built from function values only.

All estimators probe the oracle at x +- gamma*e for random directions e on the
unit l1 or l2 sphere, with the stochastic seed xi shared between the paired
evaluations. The returned vector uses sign(e) components under the l1 scheme
and e itself under the l2 scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import StochasticProblem, ZerothOrderOracle
from .vecspace import (
    FeasibleSet,
    RngStream,
    as_vector,
    sample_ball_batch,
    sample_sphere_batch,
    sign_vector,
)

SCHEMES = ("l1", "l2")
FEEDBACKS = ("one-point", "two-point")


@dataclass(frozen=True)
class SmoothingConfig:
    """Estimator settings: smoothing scheme, feedback mode, radius, norm exponent.

    p is the exponent of the norm measuring the problem geometry; its dual q
    (inf when p=1) is the norm applied to gradient estimates.
    """

    scheme: str
    feedback: str
    gamma: float
    p: int = 2

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.feedback not in FEEDBACKS:
            raise ValueError(f"feedback must be one of {FEEDBACKS}, got {self.feedback!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.p not in (1, 2):
            raise ValueError("p must be 1 or 2")

    @property
    def q(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def direction_exponent(self) -> int:
        return 1 if self.scheme == "l1" else 2


@dataclass
class GradientSample:
    g: np.ndarray
    calls: int


@dataclass
class OperatorSample:
    g_x: np.ndarray
    g_y: np.ndarray
    calls: int


def _direction_rows(e: np.ndarray, scheme: str) -> np.ndarray:
    return sign_vector(e) if scheme == "l1" else e


def _estimate_rows(
    oracle: ZerothOrderOracle, x: np.ndarray, cfg: SmoothingConfig, m: int, rng: RngStream
) -> tuple[np.ndarray, int]:
    """m single-sample gradient estimates as rows of an (m, d) array.

    Draw order is fixed: the m directions in one bulk draw, then the m shared
    seeds. Identical (stream, m) inputs give identical rows bit for bit.
    """
    d = oracle.problem.d
    x = as_vector(x, d)
    e = sample_sphere_batch(m, d, cfg.direction_exponent, rng)
    seeds = rng.gen.integers(0, 2**63, size=m)
    dirs = _direction_rows(e, cfg.scheme)
    if cfg.feedback == "two-point":
        v_plus = oracle.value_batch(x[None, :] + cfg.gamma * e, seeds)
        v_minus = oracle.value_batch(x[None, :] - cfg.gamma * e, seeds)
        coef = (d / (2.0 * cfg.gamma)) * (v_plus - v_minus)
        calls = 2 * m
    else:
        v_plus = oracle.value_batch(x[None, :] + cfg.gamma * e, seeds)
        coef = (d / cfg.gamma) * v_plus
        calls = m
    return coef[:, None] * dirs, calls


def batch_grad(
    oracle: ZerothOrderOracle, x: np.ndarray, cfg: SmoothingConfig, m: int, rng: RngStream
) -> GradientSample:
    """Average of m independent single-sample estimates."""
    if m < 1:
        raise ValueError("batch size must be at least 1")
    rows, calls = _estimate_rows(oracle, x, cfg, m, rng)
    return GradientSample(g=rows.mean(axis=0), calls=calls)


def two_point_grad(
    oracle: ZerothOrderOracle, x: np.ndarray, cfg: SmoothingConfig, rng: RngStream
) -> GradientSample:
    if cfg.feedback != "two-point":
        raise ValueError("config is not two-point")
    return batch_grad(oracle, x, cfg, 1, rng)


def one_point_grad(
    oracle: ZerothOrderOracle, x: np.ndarray, cfg: SmoothingConfig, rng: RngStream
) -> GradientSample:
    if cfg.feedback != "one-point":
        raise ValueError("config is not one-point")
    return batch_grad(oracle, x, cfg, 1, rng)


def saddle_operator_estimate(
    oracle: ZerothOrderOracle,
    z: tuple[np.ndarray, np.ndarray],
    cfg_x: SmoothingConfig,
    cfg_y: SmoothingConfig,
    rng: RngStream,
) -> OperatorSample:
    """Estimate (grad_x, -grad_y) by perturbing both blocks simultaneously.

    Fresh directions per block, one shared xi, and the block values taken from
    the same one or two oracle queries; the y block is negated because the
    operator ascends in y.
    """
    p = oracle.problem
    x, y = as_vector(z[0], p.d_x), as_vector(z[1], p.d_y)
    if cfg_x.feedback != cfg_y.feedback:
        raise ValueError("blocks must share the feedback mode")
    e_x = sample_sphere_batch(1, p.d_x, cfg_x.direction_exponent, rng)[0]
    e_y = sample_sphere_batch(1, p.d_y, cfg_y.direction_exponent, rng)[0]
    xi = int(rng.gen.integers(0, 2**63))
    dx, dy = _direction_rows(e_x, cfg_x.scheme), _direction_rows(e_y, cfg_y.scheme)
    if cfg_x.feedback == "two-point":
        v_plus = oracle.saddle_value(x + cfg_x.gamma * e_x, y + cfg_y.gamma * e_y, xi)
        v_minus = oracle.saddle_value(x - cfg_x.gamma * e_x, y - cfg_y.gamma * e_y, xi)
        g_x = (p.d_x / (2.0 * cfg_x.gamma)) * (v_plus - v_minus) * dx
        g_y = -(p.d_y / (2.0 * cfg_y.gamma)) * (v_plus - v_minus) * dy
        calls = 2
    else:
        v_plus = oracle.saddle_value(x + cfg_x.gamma * e_x, y + cfg_y.gamma * e_y, xi)
        g_x = (p.d_x / cfg_x.gamma) * v_plus * dx
        g_y = -(p.d_y / cfg_y.gamma) * v_plus * dy
        calls = 1
    return OperatorSample(g_x=g_x, g_y=g_y, calls=calls)


def mc_smoothed_value(
    problem: StochasticProblem, x: np.ndarray, cfg: SmoothingConfig, n: int, rng: RngStream
) -> tuple[float, float]:
    """Monte Carlo estimate of the ball-smoothed value with its standard error.

    Evaluates the problem directly (no oracle noise, no call counting): this is
    a measurement utility, not an optimization primitive.
    """
    x = as_vector(x, problem.d)
    e = sample_ball_batch(n, problem.d, cfg.direction_exponent, rng)
    seeds = rng.gen.integers(0, 2**63, size=n)
    vals = problem.eval_batch(x[None, :] + cfg.gamma * e, seeds)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return est, se


def _dual_sq_norms(rows: np.ndarray, q) -> np.ndarray:
    if q == math.inf:
        return np.max(np.abs(rows), axis=1) ** 2
    return np.sum(rows * rows, axis=1)


def second_moment_estimate(
    oracle: ZerothOrderOracle, x: np.ndarray, cfg: SmoothingConfig, n: int, rng: RngStream
) -> tuple[float, float]:
    """Mean and standard error of ||g||_q^2 over n single-sample estimates."""
    rows, _ = _estimate_rows(oracle, x, cfg, n, rng)
    sq = _dual_sq_norms(rows, cfg.q)
    mean = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return mean, se


def worst_case_bias_probe(
    d: int,
    cfg: SmoothingConfig,
    deltas,
    n: int,
    seed: int,
    r: np.ndarray | None = None,
) -> np.ndarray:
    """Empirical estimator bias norm per noise level, under aligned corruption.

    The probe function is delta(x') = level * sign(<x' - x0, r>) with x0 = 0:
    the zero function plus the corruption profile that maximizes the bias
    transferred into the estimate along r. Each level reuses the same stream
    key, so the direction draws are shared and the returned curve isolates the
    level dependence. Two-point configs only.
    """
    if cfg.feedback != "two-point":
        raise ValueError("bias probe is defined for two-point feedback")
    if r is None:
        r = np.zeros(d)
        r[0] = 1.0
    r = as_vector(r, d)
    out = np.empty(len(list(deltas)))
    for i, level in enumerate(deltas):
        lv = float(level)

        def value(x, xi=None, _lv=lv):
            return _lv * float(np.sign(r @ x))

        def value_batch(pts, seeds, _lv=lv):
            return _lv * np.sign(pts @ r)

        probe = StochasticProblem(
            d=d,
            value=value,
            feasible=FeasibleSet("unconstrained"),
            lip_m=0.0,
            lip_m2=0.0,
            value_bound=lv,
            value_batch=value_batch,
        )
        oracle = ZerothOrderOracle(probe, cfg.gamma)
        rows, _ = _estimate_rows(oracle, np.zeros(d), cfg, n, RngStream(seed, (0,)))
        out[i] = float(np.linalg.norm(rows.mean(axis=0)))
    return out
