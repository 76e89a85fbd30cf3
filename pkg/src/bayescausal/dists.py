"""Seeded random streams and the handful of densities the model needs.

Every sampling function takes ``rng`` as either an :class:`RngState` or an
already-constructed :class:`numpy.random.Generator`.  Passing an
``RngState`` builds a fresh generator, so the call is a pure function of
its arguments; passing a ``Generator`` advances it in place, which is what
the sampler does inside a single sequential chain.

The bit generator is PCG64 seeded through ``SeedSequence(seed,
spawn_key=(stream, *subkeys))``.  ``GENERATOR_VERSION`` names that
recipe; change it if the recipe ever changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

GENERATOR_VERSION = "pcg64/seedseq/v1"

_U64 = 1 << 64
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class RngState:
    """A (seed, stream) pair identifying one reproducible random stream."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < _U64:
                raise ArgumentError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self, *subkeys: int) -> np.random.Generator:
        """Fresh generator for this stream, optionally for a keyed substream."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *map(int, subkeys)))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream: int) -> "RngState":
        """Same seed, different stream id."""
        return RngState(self.seed, stream)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    raise ArgumentError(f"expected RngState or numpy Generator, got {type(rng).__name__}")


def normal_sample(mean, sd, rng, size=None):
    """Draw from N(mean, sd**2).  ``sd == 0`` returns ``mean`` exactly."""
    if np.any(np.asarray(sd) < 0):
        raise ArgumentError(f"sd must be non-negative, got {sd!r}")
    z = as_generator(rng).standard_normal(size)
    return mean + sd * z


def normal_logpdf(x, mean=0.0, sd=1.0):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return -0.5 * LOG_2PI - np.log(sd) - 0.5 * z * z


@dataclass(frozen=True)
class BvnParams:
    """Bivariate normal for the pair (Y(1), Y(0)).

    ``mu1`` and ``mu0`` may be arrays (one mean per subject); the scale and
    correlation fields are shared.
    """

    mu1: float
    mu0: float
    sigma1: float
    sigma0: float
    rho: float

    def __post_init__(self):
        if not (self.sigma1 >= 0 and self.sigma0 >= 0):
            raise ArgumentError("sigma1 and sigma0 must be non-negative")
        if not abs(self.rho) <= 1:
            raise ArgumentError(f"rho must lie in [-1, 1], got {self.rho!r}")

    def covariance(self) -> np.ndarray:
        c = self.rho * self.sigma1 * self.sigma0
        return np.array([[self.sigma1**2, c], [c, self.sigma0**2]])


def bvn_conditional(p: BvnParams, observed_arm: int, observed_value):
    """Mean and sd of the unobserved arm given the observed one.

    Works elementwise when ``observed_arm``/``observed_value`` (or the means
    in ``p``) are arrays.  ``|rho| == 1`` gives a degenerate conditional
    with sd 0.
    """
    arm = np.asarray(observed_arm)
    if not np.all((arm == 0) | (arm == 1)):
        raise ArgumentError(f"observed_arm must be 0 or 1, got {observed_arm!r}")
    treated = arm == 1
    mu_obs = np.where(treated, p.mu1, p.mu0)
    mu_miss = np.where(treated, p.mu0, p.mu1)
    sd_obs = np.where(treated, p.sigma1, p.sigma0)
    sd_miss = np.where(treated, p.sigma0, p.sigma1)
    if np.any(sd_obs == 0):
        raise ArgumentError("observed-arm sd is zero; conditional is undefined")
    mean = mu_miss + p.rho * (sd_miss / sd_obs) * (np.asarray(observed_value, dtype=float) - mu_obs)
    sd = sd_miss * math.sqrt(max(0.0, 1.0 - p.rho * p.rho))
    if mean.ndim == 0:
        return float(mean), float(sd)
    return mean, np.broadcast_to(sd, mean.shape).astype(float)


def bvn_logpdf(p: BvnParams, y1, y0):
    """Exact bivariate normal log-density of (y1, y0)."""
    if abs(p.rho) >= 1:
        raise ArgumentError("bivariate normal density is degenerate for |rho| >= 1")
    if p.sigma1 <= 0 or p.sigma0 <= 0:
        raise ArgumentError("bivariate normal density needs positive sds")
    z1 = (np.asarray(y1, dtype=float) - p.mu1) / p.sigma1
    z0 = (np.asarray(y0, dtype=float) - p.mu0) / p.sigma0
    omr2 = 1.0 - p.rho * p.rho
    quad = (z1 * z1 - 2.0 * p.rho * z1 * z0 + z0 * z0) / omr2
    return -LOG_2PI - math.log(p.sigma1) - math.log(p.sigma0) - 0.5 * math.log(omr2) - 0.5 * quad


def simplex_from_exponentials(raw) -> np.ndarray:
    """Normalize unit-exponential draws onto the simplex."""
    raw = np.asarray(raw, dtype=float)
    return raw / raw.sum(axis=-1, keepdims=True)


def dirichlet_ones(n: int, rng, size=None) -> np.ndarray:
    """Draw weights from Dirichlet(1, ..., 1) on ``n`` points.

    ``size`` prepends batch dimensions, e.g. ``size=T`` gives a (T, n) array.
    """
    if n < 1:
        raise ArgumentError(f"n must be at least 1, got {n}")
    shape = (n,) if size is None else (*np.atleast_1d(size), n)
    return simplex_from_exponentials(as_generator(rng).standard_exponential(shape))


def expit(x):
    """Logistic function, branch-stable for large |x|."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def bernoulli_expit(linear, rng):
    """Draw 1 with probability expit(linear), else 0."""
    p = expit(linear)
    u = as_generator(rng).random(np.shape(p))
    out = (u < p).astype(np.int64)
    return out if out.ndim else int(out)
