"""Resource planner: turns problem constants and a target accuracy into a full
federated run prescription (smoothing radius, gradient Lipschitz constant,
variance and noise ceilings, and the rounds/local-steps/batch split).

All numeric coefficients are fixed design constants of the supported methods;
they are intentionally written out literally rather than derived at runtime.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

ALGORITHMS = ("mb-asgd", "sm-asgd", "local-acsa", "fedac", "mb-smp", "sm-smp")
SCHEMES = ("l1", "l2")
FEEDBACKS = ("one-point", "two-point")

# algorithm family -> accelerated (asgd), accelerated federated (fedac), or
# proximal mirror (smp); the noise ceiling constant depends only on the family
_FAMILY = {
    "mb-asgd": "asgd",
    "sm-asgd": "asgd",
    "local-acsa": "asgd",
    "fedac": "fedac",
    "mb-smp": "smp",
    "sm-smp": "smp",
}

# (family, feedback, scheme) -> c in max allowed oracle corruption
# eps^2 / (c * sqrt(d) * M2 * R)
_NOISE_C = {
    ("asgd", "two-point", "l1"): 24.0,
    ("asgd", "two-point", "l2"): 12.0,
    ("asgd", "one-point", "l1"): 12.0,
    ("asgd", "one-point", "l2"): 12.0,
    ("fedac", "two-point", "l1"): 24.0,
    ("fedac", "two-point", "l2"): 16.0,
    ("fedac", "one-point", "l1"): 16.0,
    ("fedac", "one-point", "l2"): 16.0,
    ("smp", "two-point", "l1"): 24.0,
    ("smp", "two-point", "l2"): 8.0,
    ("smp", "one-point", "l1"): 8.0,
    ("smp", "one-point", "l2"): 8.0,
}


class ConfigurationError(ValueError):
    """Constants are missing or inconsistent for the requested plan."""


@dataclass(frozen=True)
class ProblemConstants:
    """Scalar inputs of the planner.

    M bounds the objective's Lipschitz constant, M2 the second moment of the
    subgradient norm, G the magnitude of function values on the inflated
    domain (required only for one-point feedback), R the diameter proxy of the
    feasible set, eps the target accuracy.
    """

    d: int
    M: float
    M2: float
    R: float
    eps: float
    G: Optional[float] = None

    def __post_init__(self):
        if self.d < 1:
            raise ConfigurationError("d must be a positive integer")
        for name in ("M", "M2", "R", "eps"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.G is not None and not self.G > 0:
            raise ConfigurationError("G must be positive when provided")


@dataclass(frozen=True)
class FedPlan:
    """Complete run prescription. total == rounds * local_steps * batch exactly."""

    algorithm: str
    scheme: str
    feedback: str
    gamma: float
    grad_lip: float
    sigma_sq: float
    max_noise: float
    N: int
    K: int
    B: int
    T: int

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "scheme": self.scheme,
            "feedback": self.feedback,
            "gamma": self.gamma,
            "grad_lip": self.grad_lip,
            "sigma_sq": self.sigma_sq,
            "max_noise": self.max_noise,
            "N": self.N,
            "K": self.K,
            "B": self.B,
            "T": self.T,
        }


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


def _check(scheme: str, feedback: str) -> None:
    _check_scheme(scheme)
    if feedback not in FEEDBACKS:
        raise ConfigurationError(f"feedback must be one of {FEEDBACKS}, got {feedback!r}")


def _default_p(scheme: str, p: Optional[int]) -> int:
    if p is None:
        return 1 if scheme == "l1" else 2
    if p not in (1, 2):
        raise ConfigurationError("p must be 1 or 2")
    return p


def _min_q_log(p: int, d: int) -> float:
    q = math.inf if p == 1 else p / (p - 1)
    return min(q, math.log(d))


def kappa(p: int, d: int, scheme: str, feedback: str) -> float:
    """Dimension factor of the estimator's second-moment bound."""
    _check(scheme, feedback)
    p = _default_p(scheme, p)
    if d < 1:
        raise ConfigurationError("d must be a positive integer")
    if feedback == "two-point":
        if scheme == "l1":
            return 48.0 * (1.0 + math.sqrt(2.0)) ** 2 * d ** (2.0 - 2.0 / p)
        return math.sqrt(2.0) * _min_q_log(p, d) * d ** (2.0 - 2.0 / p)
    if scheme == "l1":
        return float(d) ** (4.0 - 2.0 / p)
    return _min_q_log(p, d) * d ** (3.0 - 2.0 / p)


def smoothing_gamma(consts: ProblemConstants, scheme: str) -> float:
    """Smoothing radius matched to the target accuracy."""
    _check_scheme(scheme)
    if scheme == "l1":
        return math.sqrt(consts.d) * consts.eps / (4.0 * consts.M2)
    return consts.eps / (2.0 * consts.M2)


def grad_lipschitz(consts: ProblemConstants, scheme: str, gamma: Optional[float] = None) -> float:
    """Gradient Lipschitz constant of the smoothed objective.

    With the default radius this equals 2*sqrt(d)*M*M2/eps under both schemes.
    """
    _check_scheme(scheme)
    if gamma is None:
        gamma = smoothing_gamma(consts, scheme)
    if not gamma > 0:
        raise ConfigurationError("gamma must be positive")
    if scheme == "l1":
        return consts.d * consts.M / (2.0 * gamma)
    return math.sqrt(consts.d) * consts.M / gamma


def sigma_sq_bound(
    consts: ProblemConstants, scheme: str, feedback: str, p: Optional[int] = None
) -> float:
    """Bound on the second moment of a single gradient estimate, in the dual norm."""
    _check(scheme, feedback)
    p = _default_p(scheme, p)
    d, M2 = consts.d, consts.M2
    if feedback == "two-point":
        if scheme == "l1":
            return 48.0 * (1.0 + math.sqrt(2.0)) ** 2 * d ** (2.0 - 2.0 / p) * M2**2
        return 2.0 * math.sqrt(2.0) * _min_q_log(p, d) * d ** (2.0 - 2.0 / p) * M2**2
    if consts.G is None:
        raise ConfigurationError("one-point feedback needs the value bound G")
    core = consts.G**2 * M2**2 / consts.eps**2
    if scheme == "l1":
        return 32.0 * d ** (3.0 - 2.0 / p) * core
    return 8.0 * _min_q_log(p, d) * d ** (3.0 - 2.0 / p) * core


def second_moment_ceiling(
    d: int,
    M2: float,
    G: Optional[float],
    gamma: float,
    delta: float,
    scheme: str,
    feedback: str,
    p: Optional[int] = None,
) -> float:
    """Ceiling on E||g||_q^2 for one estimate at radius gamma and noise level delta.

    Unlike sigma_sq_bound, which bakes in the accuracy-matched radius, this
    form keeps gamma and the corruption level explicit.
    """
    _check(scheme, feedback)
    p = _default_p(scheme, p)
    if not gamma > 0:
        raise ConfigurationError("gamma must be positive")
    kap = kappa(p, d, scheme, feedback)
    if feedback == "two-point":
        if scheme == "l1":
            spread = d**2 * delta**2 / (12.0 * (1.0 + math.sqrt(2.0)) ** 2 * gamma**2)
        else:
            spread = d**2 * delta**2 / (math.sqrt(2.0) * gamma**2)
        return kap * (M2**2 + spread)
    if G is None:
        raise ConfigurationError("one-point feedback needs the value bound G")
    return kap * (G**2 + delta**2) / gamma**2


def max_noise(algorithm: str, consts: ProblemConstants, scheme: str, feedback: str) -> float:
    """Largest oracle corruption level that leaves the accuracy target intact."""
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    _check(scheme, feedback)
    c = _NOISE_C[(_FAMILY[algorithm], feedback, scheme)]
    return consts.eps**2 / (c * math.sqrt(consts.d) * consts.M2 * consts.R)


def _ceil_pos(x: float) -> int:
    return max(1, math.ceil(x))


def plan(
    algorithm: str,
    consts: ProblemConstants,
    scheme: str,
    feedback: str,
    p: Optional[int] = None,
) -> FedPlan:
    """Full prescription for one algorithm/scheme/feedback triple.

    N is communication rounds, K local oracle interactions per worker and
    round, B the number of workers (equivalently the round batch multiplier);
    the single-machine variants move the whole budget into K.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    _check(scheme, feedback)
    p = _default_p(scheme, p)
    if feedback == "one-point" and consts.G is None:
        raise ConfigurationError("one-point feedback needs the value bound G")
    if not consts.eps < consts.M2 * consts.R:
        warnings.warn(
            f"target eps={consts.eps} is not below M2*R={consts.M2 * consts.R}; "
            "the plan degenerates to single-step budgets",
            stacklevel=2,
        )

    d, M, M2, R, eps = consts.d, consts.M, consts.M2, consts.R, consts.eps
    gamma = smoothing_gamma(consts, scheme)
    kap = kappa(p, d, scheme, feedback)
    ssq = sigma_sq_bound(consts, scheme, feedback, p)
    energy = R**2 / eps**2

    # rounds target of the accelerated methods; the l1 scheme carries the
    # sqrt(2) heavier constant
    accel_rounds = (
        (4.0 * math.sqrt(6.0) if scheme == "l1" else 4.0 * math.sqrt(3.0))
        * d**0.25
        * math.sqrt(M * M2)
        * R
        / eps
    )
    # the minibatch l2 two-point variance budget carries one extra factor d
    var_2pt = kap * M2**2

    if algorithm == "mb-asgd":
        K = 1
        if feedback == "two-point":
            N = _ceil_pos(accel_rounds)
            mb_var = var_2pt * d if scheme == "l2" else var_2pt
            B = _ceil_pos(1152.0 * mb_var * energy / (K * N))
        else:
            N = _ceil_pos(4.0 * math.sqrt(3.0) * d**0.25 * math.sqrt(M * M2) * R / eps)
            B = _ceil_pos(576.0 * ssq * energy / (K * N))
    elif algorithm == "sm-asgd":
        N, B = 1, 1
        if feedback == "two-point":
            K = _ceil_pos(1152.0 * var_2pt * energy)
        else:
            K = _ceil_pos(576.0 * ssq * energy)
    elif algorithm == "local-acsa":
        N = 1
        if feedback == "two-point":
            K = _ceil_pos(accel_rounds)
            B = _ceil_pos(1152.0 * var_2pt * energy / (K * N))
        else:
            K = _ceil_pos(4.0 * math.sqrt(3.0) * d**0.25 * math.sqrt(M * M2) * R / eps)
            B = _ceil_pos(576.0 * ssq * energy / (K * N))
    elif algorithm == "fedac":
        B = 1
        lip_plan = d * M / gamma if scheme == "l1" else math.sqrt(d) * M / gamma
        N = _ceil_pos(8.0**1.5 * math.sqrt(lip_plan) * R / math.sqrt(eps))
        if feedback == "two-point":
            fed_var = 2.0 * var_2pt * (d if scheme == "l2" else 1.0)
        else:
            fed_var = ssq
        K = _ceil_pos(fed_var * energy / N)
    elif algorithm == "mb-smp":
        N, K = 1, 1
        if feedback == "two-point":
            B = _ceil_pos(1568.0 * var_2pt * energy)
        else:
            B = _ceil_pos(784.0 * ssq * energy)
    else:  # sm-smp
        N, B = 1, 1
        if feedback == "two-point":
            K = _ceil_pos(1568.0 * var_2pt * energy)
        else:
            K = _ceil_pos(784.0 * ssq * energy)

    return FedPlan(
        algorithm=algorithm,
        scheme=scheme,
        feedback=feedback,
        gamma=gamma,
        grad_lip=grad_lipschitz(consts, scheme),
        sigma_sq=ssq,
        max_noise=max_noise(algorithm, consts, scheme, feedback),
        N=int(N),
        K=int(K),
        B=int(B),
        T=int(N) * int(K) * int(B),
    )
