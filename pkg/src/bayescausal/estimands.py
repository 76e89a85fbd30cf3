"""Posterior draws of ITE, SATE, CATE and PATE from a fitted chain.

Sample-level estimands (ITE, SATE) read the imputed counterfactuals.
Population-level ones (CATE, PATE) use only the parameter draws; the
counterfactuals play no role in them.

PATE needs the CATE averaged over a covariate law.  Four ways to do that:

``closed_form``
    plug each draw's eta into the linear CATE.
``parametric_mc``
    average the CATE over S simulated covariates from N(eta, tau).
``bayesian_bootstrap``
    Dirichlet(1, ..., 1)-weighted sum of the CATE at the observed covariates,
    fresh weights for every draw.
``empirical``
    plain average of the CATE at the observed covariates.  This ignores
    uncertainty about the covariate law and is too concentrated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgp import fmt
from .dists import as_generator, dirichlet_ones
from .errors import ArgumentError
from .model import ParamVector
from .sampler import PosteriorDraws

BACKENDS = ("closed_form", "parametric_mc", "bayesian_bootstrap", "empirical")
BACKEND_ALIASES = {
    "closed": "closed_form",
    "mc": "parametric_mc",
    "bb": "bayesian_bootstrap",
    "ecdf": "empirical",
    **{b: b for b in BACKENDS},
}
DEFAULT_S = 1000


@dataclass(frozen=True, eq=False)
class EstimandDraws:
    kind: str  # "ITE", "SATE", "CATE" or "PATE"
    values: np.ndarray
    backend: str | None = None
    mc_S: int | None = None
    subject: int | None = None
    l: float | None = None

    @property
    def label(self) -> str:
        if self.kind == "ITE":
            return f"ite:{self.subject}"
        if self.kind == "CATE":
            return f"cate:{fmt(self.l)}"
        return self.kind.lower()

    @property
    def backend_label(self) -> str:
        if self.backend == "parametric_mc":
            return f"parametric_mc(S={self.mc_S})"
        return self.backend or ""

    def __len__(self) -> int:
        return len(self.values)


def _cate_intercept_slope(chain: PosteriorDraws):
    intercept = chain.param("beta01") - chain.param("beta00")
    slope = chain.param("beta11") - chain.param("beta10")
    return intercept, slope


def ite_matrix(chain: PosteriorDraws) -> np.ndarray:
    """(T, n) array of ITE draws for every subject."""
    d = chain.data
    return np.where(d.treated, d.y - chain.counterfactuals, chain.counterfactuals - d.y)


def ite_draws(chain: PosteriorDraws, subject: int) -> EstimandDraws:
    if not 0 <= subject < chain.n:
        raise ArgumentError(f"subject index {subject} out of range for n={chain.n}")
    ym = chain.counterfactuals[:, subject]
    y = chain.data.y[subject]
    values = y - ym if chain.data.a[subject] == 1 else ym - y
    return EstimandDraws("ITE", values, subject=subject)


def sate_draws(chain: PosteriorDraws) -> EstimandDraws:
    return EstimandDraws("SATE", ite_matrix(chain).mean(axis=1))


def cate_draws(chain: PosteriorDraws, l: float) -> EstimandDraws:
    intercept, slope = _cate_intercept_slope(chain)
    return EstimandDraws("CATE", intercept + slope * l, l=float(l))


def pate_closed(chain: PosteriorDraws) -> EstimandDraws:
    intercept, slope = _cate_intercept_slope(chain)
    return EstimandDraws("PATE", intercept + slope * chain.param("eta"), backend="closed_form")


def pate_mc(chain: PosteriorDraws, S: int, rng, chunk: int = 512) -> EstimandDraws:
    """Average the CATE over S covariates drawn from N(eta_t, tau_t), per draw t."""
    if S < 1:
        raise ArgumentError("S must be at least 1")
    gen = as_generator(rng)
    intercept, slope = _cate_intercept_slope(chain)
    eta, tau = chain.param("eta"), chain.param("tau")
    out = np.empty(len(chain))
    for lo in range(0, len(chain), chunk):
        hi = min(lo + chunk, len(chain))
        L = eta[lo:hi, None] + tau[lo:hi, None] * gen.standard_normal((hi - lo, S))
        centre = intercept[lo:hi] + slope[lo:hi] * eta[lo:hi]
        cates = intercept[lo:hi, None] + slope[lo:hi, None] * L
        # averaging deviations keeps a degenerate covariate law exact
        out[lo:hi] = centre + (cates - centre[:, None]).mean(axis=1)
    return EstimandDraws("PATE", out, backend="parametric_mc", mc_S=S)


def mc_conditional_mean(p: ParamVector, l: float, arm: int, B: int, rng) -> float:
    """Average of B simulated outcomes under ``arm`` at covariate ``l``."""
    if B < 1:
        raise ArgumentError("B must be at least 1")
    if arm not in (0, 1):
        raise ArgumentError("arm must be 0 or 1")
    mu = float(p.mean1(l) if arm == 1 else p.mean0(l))
    sd = p.sigma1 if arm == 1 else p.sigma0
    z = as_generator(rng).standard_normal(B)
    return mu + float(np.mean(sd * z))


def cate_matrix(chain: PosteriorDraws) -> np.ndarray:
    """(T, n) array: each draw's CATE at each observed covariate value."""
    intercept, slope = _cate_intercept_slope(chain)
    return intercept[:, None] + slope[:, None] * chain.data.l[None, :]


def _weighted_cate(chain: PosteriorDraws, weights) -> np.ndarray:
    weights = np.broadcast_to(np.asarray(weights, dtype=float), (len(chain), chain.n))
    return (cate_matrix(chain) * weights).sum(axis=1)


def pate_bb(chain: PosteriorDraws, rng, weights=None) -> EstimandDraws:
    """Bayesian-bootstrap PATE.  ``weights`` overrides the Dirichlet draws (n or (T, n))."""
    if weights is None:
        weights = dirichlet_ones(chain.n, rng, size=len(chain))
    return EstimandDraws("PATE", _weighted_cate(chain, weights), backend="bayesian_bootstrap")


def pate_ecdf(chain: PosteriorDraws) -> EstimandDraws:
    uniform = np.full(chain.n, 1.0 / chain.n)
    return EstimandDraws("PATE", _weighted_cate(chain, uniform), backend="empirical")


def pate_draws(chain: PosteriorDraws, backend: str, rng=None, S: int = DEFAULT_S) -> EstimandDraws:
    """Dispatch on backend name (full name or short alias)."""
    try:
        backend = BACKEND_ALIASES[backend]
    except KeyError:
        raise ArgumentError(f"unknown PATE backend {backend!r}; choose from {sorted(BACKEND_ALIASES)}") from None
    if backend == "closed_form":
        return pate_closed(chain)
    if backend == "empirical":
        return pate_ecdf(chain)
    if rng is None:
        raise ArgumentError(f"backend {backend} needs an rng")
    if backend == "parametric_mc":
        return pate_mc(chain, S, rng)
    return pate_bb(chain, rng)


def parse_which(which: str) -> tuple[str, str | None]:
    """Split ``ite:i``, ``sate``, ``cate:l`` or ``pate:backend`` into (kind, argument)."""
    kind, _, arg = which.partition(":")
    kind = kind.strip().lower()
    if kind == "sate":
        if arg:
            raise ArgumentError("sate takes no argument")
        return kind, None
    if kind in ("ite", "cate", "pate") and arg:
        return kind, arg
    raise ArgumentError(f"cannot parse estimand {which!r}; expected ite:i, sate, cate:l or pate:backend")


def estimand_from_spec(chain: PosteriorDraws, which: str, rng=None, S: int = DEFAULT_S) -> EstimandDraws:
    kind, arg = parse_which(which)
    if kind == "sate":
        return sate_draws(chain)
    if kind == "ite":
        try:
            i = int(arg)
        except ValueError:
            raise ArgumentError(f"ITE subject must be an integer index, got {arg!r}") from None
        return ite_draws(chain, i)
    if kind == "cate":
        try:
            l = float(arg)
        except ValueError:
            raise ArgumentError(f"CATE covariate must be a number, got {arg!r}") from None
        return cate_draws(chain, l)
    return pate_draws(chain, arg, rng=rng, S=S)


def write_estimand_draws(est: EstimandDraws, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("draw,kind,backend,value\n")
        for t, v in enumerate(est.values):
            fh.write(f"{t},{est.label},{est.backend_label},{fmt(v)}\n")


def write_estimand_summaries(estimates, path, level: float = 0.95) -> None:
    from .diagnostics import summarize

    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("kind,backend,mean,sd,ci_lo,ci_hi\n")
        for est in estimates:
            s = summarize(est.values, level)
            fh.write(f"{est.label},{est.backend_label},{fmt(s.mean)},{fmt(s.sd)},{fmt(s.ci[0])},{fmt(s.ci[1])}\n")
