"""Parameters, prior, and the unnormalized log joint posterior.

The joint posterior is over the model parameters and the vector of missing
counterfactuals ``ym`` (one per subject, in data order).  There is no
propensity-score parameter: under ignorability the treatment mechanism
factors out of the posterior, so it has nowhere to live here.

All evaluation is on the constrained scale.  Reparameterization Jacobians
belong to the sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .dgp import ObservedData, ObservedRecord
from .dists import BvnParams, bvn_logpdf, normal_logpdf
from .errors import ArgumentError

RHO_BOUND = 0.9


@dataclass(frozen=True)
class ParamVector:
    """Covariate law (eta, tau), Y(1) and Y(0) regressions, cross-world rho.

    Not validated on construction: degenerate values (zero scales) are
    useful in tests.  :func:`log_prior` returns -inf outside the support.
    """

    eta: float
    tau: float
    beta01: float
    beta11: float
    sigma1: float
    beta00: float
    beta10: float
    sigma0: float
    rho: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.eta, self.tau, self.beta01, self.beta11, self.sigma1,
             self.beta00, self.beta10, self.sigma0, self.rho]
        )

    @classmethod
    def from_array(cls, values) -> "ParamVector":
        return cls(*(float(v) for v in values))

    def replace(self, **changes) -> "ParamVector":
        return replace(self, **changes)

    def is_valid(self) -> bool:
        return self.tau > 0 and self.sigma1 > 0 and self.sigma0 > 0 and abs(self.rho) < RHO_BOUND

    def mean1(self, l):
        return self.beta01 + self.beta11 * np.asarray(l, dtype=float)

    def mean0(self, l):
        return self.beta00 + self.beta10 * np.asarray(l, dtype=float)

    def bvn(self, l) -> BvnParams:
        return BvnParams(self.mean1(l), self.mean0(l), self.sigma1, self.sigma0, self.rho)

    def cate(self, l):
        return (self.beta01 - self.beta00) + (self.beta11 - self.beta10) * np.asarray(l, dtype=float)


PARAM_NAMES = tuple(f.name for f in fields(ParamVector))


def log_prior(p: ParamVector) -> float:
    """Flat on everything, uniform on rho over (-0.9, 0.9); constants dropped."""
    return 0.0 if p.is_valid() else -math.inf


def assemble_pair(rec: ObservedRecord, ym_i: float) -> tuple[float, float]:
    """Return (y1, y0) by placing the factual in arm ``rec.a``."""
    return (rec.y, ym_i) if rec.a == 1 else (ym_i, rec.y)


def assemble_complete(data: ObservedData, ym) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`assemble_pair` over a whole dataset."""
    ym = np.asarray(ym, dtype=float)
    t = data.treated
    return np.where(t, data.y, ym), np.where(t, ym, data.y)


def log_joint_posterior(p: ParamVector, ym, data: ObservedData) -> float:
    """Unnormalized log f(ym, params | observed data)."""
    ym = np.asarray(ym, dtype=float)
    if ym.shape != (len(data),):
        raise ArgumentError(f"ym has length {ym.size}, data has {len(data)} records")
    lp = log_prior(p)
    if lp == -math.inf:
        return lp
    y1, y0 = assemble_complete(data, ym)
    outcome = bvn_logpdf(p.bvn(data.l), y1, y0)
    covariate = normal_logpdf(data.l, p.eta, p.tau)
    # fixed summation order keeps results bit-stable
    return float(lp + math.fsum(outcome) + math.fsum(covariate))
