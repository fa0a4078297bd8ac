"""Dense vectors, p-norms, random directions on l1/l2 spheres and balls,
projections, and prox (Bregman) steps for the feasible sets used by the solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# A DenseVector is a 1-D float64 ndarray with finite entries.
DenseVector = np.ndarray


def as_vector(x, d: int | None = None) -> np.ndarray:
    """Validate and return x as a finite 1-D float64 array."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if d is not None and v.size != d:
        raise ValueError(f"expected length {d}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite components")
    return v


class RngStream:
    """Reproducible random stream keyed by (seed, stream id).

    The stream id is a tuple of integers (typically (worker, round)); the draw
    counter is the underlying generator's position. Identical (seed, key) gives
    an identical draw sequence on every platform and thread schedule.
    """

    __slots__ = ("seed", "key", "_gen")

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self._gen = None

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def substream(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(i) for i in ids))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"


@dataclass(frozen=True)
class FeasibleSet:
    """Descriptor of the sets the solvers project onto.

    kind: "unconstrained" | "simplex" | "box" | "ball"
    box uses [lo, hi]^d; ball is the l2 ball of the given radius.
    """

    kind: str
    lo: float = 0.0
    hi: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("unconstrained", "simplex", "box", "ball"):
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.kind == "box" and not self.lo < self.hi:
            raise ValueError("box needs lo < hi")
        if self.kind == "ball" and not self.radius > 0:
            raise ValueError("ball needs a positive radius")


@dataclass(frozen=True)
class Geometry:
    """Prox geometry: Euclidean everywhere, or entropy on the simplex."""

    kind: str
    feasible: FeasibleSet = field(default_factory=lambda: FeasibleSet("unconstrained"))

    def __post_init__(self):
        if self.kind not in ("euclidean", "entropy"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "entropy" and self.feasible.kind != "simplex":
            raise ValueError("entropy geometry only combines with the simplex")


def norm(x: np.ndarray, p) -> float:
    """l_p norm for p in {1, 2, inf}."""
    x = np.asarray(x, dtype=np.float64)
    if p == 1:
        return float(np.sum(np.abs(x)))
    if p == 2:
        return float(np.sqrt(np.sum(x * x)))
    if p == math.inf or p == np.inf:
        return float(np.max(np.abs(x)))
    raise ValueError(f"unsupported norm order {p!r}")


def sample_sphere_batch(n: int, d: int, p: int, rng: RngStream) -> np.ndarray:
    """n i.i.d. directions uniform on the unit l_p sphere, as an (n, d) array.

    p=2: normalized Gaussians. p=1: normalized i.i.d. Laplace draws (cone
    measure on the l1 sphere). Zero draws (probability 0) are redrawn.
    """
    if d < 1 or n < 1:
        raise ValueError("need n >= 1 and d >= 1")
    g = rng.gen
    if p == 2:
        e = g.standard_normal((n, d))
        nrm = np.linalg.norm(e, axis=1)
    elif p == 1:
        e = g.laplace(0.0, 1.0, size=(n, d))
        nrm = np.sum(np.abs(e), axis=1)
    else:
        raise ValueError(f"unsupported sphere exponent {p!r}")
    while np.any(nrm == 0.0):
        bad = nrm == 0.0
        redraw = g.standard_normal((int(bad.sum()), d)) if p == 2 else g.laplace(size=(int(bad.sum()), d))
        e[bad] = redraw
        nrm[bad] = np.linalg.norm(redraw, axis=1) if p == 2 else np.sum(np.abs(redraw), axis=1)
    return e / nrm[:, None]


def sample_sphere(d: int, p: int, rng: RngStream) -> np.ndarray:
    """One direction uniform on the unit l_p sphere (p in {1, 2})."""
    return sample_sphere_batch(1, d, p, rng)[0]


def sample_ball_batch(n: int, d: int, p: int, rng: RngStream) -> np.ndarray:
    """n points uniform in the unit l_p ball: U^{1/d} times a sphere sample."""
    e = sample_sphere_batch(n, d, p, rng)
    u = rng.gen.random(n) ** (1.0 / d)
    return e * u[:, None]


def sample_ball(d: int, p: int, rng: RngStream) -> np.ndarray:
    return sample_ball_batch(1, d, p, rng)[0]


def sign_vector(e: np.ndarray) -> np.ndarray:
    """Componentwise sign with sign(0) = 0."""
    return np.sign(np.asarray(e, dtype=np.float64))


def project_simplex_batch(x: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex.

    Sort-and-threshold; exact up to float rounding.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    u = np.sort(x, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, x.shape[1] + 1)
    cond = u - css / idx > 0
    rho = x.shape[1] - np.argmax(cond[:, ::-1], axis=1) - 1
    theta = css[np.arange(x.shape[0]), rho] / (rho + 1)
    return np.maximum(x - theta[:, None], 0.0)


def project(x: np.ndarray, feasible: FeasibleSet) -> np.ndarray:
    """Euclidean projection onto the feasible set. Idempotent."""
    x = np.asarray(x, dtype=np.float64)
    if feasible.kind == "unconstrained":
        return x.copy()
    if feasible.kind == "simplex":
        return project_simplex_batch(x[None, :])[0]
    if feasible.kind == "box":
        return np.clip(x, feasible.lo, feasible.hi)
    # ball
    nrm = float(np.linalg.norm(x))
    if nrm <= feasible.radius:
        return x.copy()
    return x * (feasible.radius / nrm)


def set_distance(x: np.ndarray, feasible: FeasibleSet) -> float:
    """Euclidean distance from x to the set."""
    if feasible.kind == "unconstrained":
        return 0.0
    return float(np.linalg.norm(x - project(x, feasible)))


def set_distance_batch(x: np.ndarray, feasible: FeasibleSet) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if feasible.kind == "unconstrained":
        return np.zeros(x.shape[0])
    if feasible.kind == "simplex":
        proj = project_simplex_batch(x)
    elif feasible.kind == "box":
        proj = np.clip(x, feasible.lo, feasible.hi)
    else:
        nrm = np.linalg.norm(x, axis=1, keepdims=True)
        scale = np.minimum(1.0, feasible.radius / np.maximum(nrm, 1e-300))
        proj = x * scale
    return np.linalg.norm(x - proj, axis=1)


def feasible_center(feasible: FeasibleSet, d: int) -> np.ndarray:
    """A canonical interior point, used as the default start."""
    if feasible.kind == "simplex":
        return np.full(d, 1.0 / d)
    if feasible.kind == "box":
        return np.full(d, 0.5 * (feasible.lo + feasible.hi))
    return np.zeros(d)


# Coordinates below this floor are clamped before the entropy update so the
# multiplicative step cannot absorb a zero permanently.
_ENTROPY_FLOOR = 1e-15


def prox_step(r: np.ndarray, xi: np.ndarray, eta: float, geom: Geometry) -> np.ndarray:
    """argmin_z <eta*xi, z> + V_r(z) over geom.feasible.

    Euclidean: project(r - eta*xi). Entropy on the simplex: z_i proportional to
    r_i * exp(-eta*xi_i), renormalized.
    """
    r = np.asarray(r, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    if geom.kind == "euclidean":
        return project(r - eta * xi, geom.feasible)
    rc = np.maximum(r, _ENTROPY_FLOOR)
    # subtract the max exponent for overflow safety; cancels in normalization
    a = -eta * xi
    z = rc * np.exp(a - np.max(a))
    z = np.maximum(z, _ENTROPY_FLOOR)
    return z / z.sum()
