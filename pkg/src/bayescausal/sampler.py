"""Metropolis-in-Gibbs sampler for the joint posterior of parameters and counterfactuals.

Each iteration does two things:

1. impute every subject's missing potential outcome from its conditional
   distribution given the factual outcome, the covariate and the current
   parameters (an exact conditional-normal draw by default, or a
   per-subject random-walk Metropolis step);
2. update the parameters given the completed data, one block at a time,
   with Gaussian random-walk Metropolis on an unconstrained scale.

Parameter blocks and their unconstrained coordinates::

    beta1      (beta01, beta11)
    beta0      (beta00, beta10)
    sigma1     log sigma1
    sigma0     log sigma0
    covariate  (eta, log tau)
    rho        atanh(rho / 0.9)

Step sizes adapt during warmup only (Robbins-Monro on the log step) and are
frozen afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Mapping

import numpy as np

from .dgp import ObservedData, fmt
from .dists import as_generator, bvn_conditional, bvn_logpdf
from .errors import ArgumentError, InitializationError, ParseError
from .model import PARAM_NAMES, RHO_BOUND, ParamVector, assemble_complete, log_joint_posterior

LOG_2PI = math.log(2.0 * math.pi)

# unconstrained coordinate layout
_THETA_INDEX = {
    "beta01": 0, "beta11": 1, "beta00": 2, "beta10": 3,
    "sigma1": 4, "sigma0": 5, "eta": 6, "tau": 7, "rho": 8,
}
BLOCKS = {
    "beta1": (0, 1),
    "beta0": (2, 3),
    "sigma1": (4,),
    "sigma0": (5,),
    "covariate": (6, 7),
    "rho": (8,),
}
_BLOCK_ORDER = tuple(BLOCKS)
_N_Z = sum(len(ix) for ix in BLOCKS.values())


@dataclass(frozen=True)
class SamplerConfig:
    warmup: int = 5000
    keep: int = 5000
    thin: int = 1
    step_beta1: float = 0.2
    step_beta0: float = 0.2
    step_sigma1: float = 0.2
    step_sigma0: float = 0.2
    step_covariate: float = 0.2
    step_rho: float = 0.5
    # None means 0.44 for scalar blocks and 0.35 for two-dimensional ones
    adapt_target: float | None = None
    init: object = "auto"
    fixed: Mapping[str, float] = field(default_factory=dict)
    imputation: str = "exact"
    imputation_step: float = 1.0

    def __post_init__(self):
        if int(self.warmup) != self.warmup or self.warmup < 0:
            raise ArgumentError("warmup must be a non-negative integer")
        if int(self.keep) != self.keep or self.keep < 1:
            raise ArgumentError("keep must be a positive integer")
        if int(self.thin) != self.thin or self.thin < 1:
            raise ArgumentError("thin must be a positive integer")
        for b in _BLOCK_ORDER:
            if not self.step(b) > 0:
                raise ArgumentError(f"step_{b} must be positive")
        if not self.imputation_step > 0:
            raise ArgumentError("imputation_step must be positive")
        if self.adapt_target is not None and not 0.1 < self.adapt_target < 0.9:
            raise ArgumentError("adapt_target must lie in (0.1, 0.9)")
        if self.imputation not in ("exact", "metropolis"):
            raise ArgumentError(f"imputation must be 'exact' or 'metropolis', got {self.imputation!r}")
        if not (self.init == "auto" or isinstance(self.init, ParamVector)):
            raise ArgumentError("init must be 'auto' or a ParamVector")
        unknown = set(self.fixed) - set(PARAM_NAMES)
        if unknown:
            raise ArgumentError(f"cannot fix unknown parameters: {sorted(unknown)}")
        probe = ParamVector(0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0).replace(**self.fixed)
        if not probe.is_valid():
            raise ArgumentError("fixed values must lie inside the prior support")

    def step(self, block: str) -> float:
        return getattr(self, f"step_{block}")

    def target(self, block: str) -> float:
        if self.adapt_target is not None:
            return self.adapt_target
        return 0.44 if len(BLOCKS[block]) == 1 else 0.35


SAMPLER_FIELDS = tuple(f.name for f in fields(SamplerConfig))


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """Retained draws: a (T, 9) parameter array and a (T, n) counterfactual array."""

    params: np.ndarray
    counterfactuals: np.ndarray
    data: ObservedData
    acceptance: Mapping[str, float] = field(default_factory=dict)
    step_sizes: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        params = np.atleast_2d(np.asarray(self.params, dtype=float))
        ym = np.atleast_2d(np.asarray(self.counterfactuals, dtype=float))
        if params.shape[1] != len(PARAM_NAMES):
            raise ArgumentError(f"params must have {len(PARAM_NAMES)} columns")
        if ym.shape != (params.shape[0], len(self.data)):
            raise ArgumentError("counterfactuals must be (T, n) with T matching params and n matching data")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "counterfactuals", ym)

    @classmethod
    def from_params(cls, params, counterfactuals, data) -> "PosteriorDraws":
        """Build from a sequence of ParamVector (handy for tests and hand-made chains)."""
        return cls(np.array([p.as_array() for p in params]), counterfactuals, data)

    def __len__(self) -> int:
        return self.params.shape[0]

    @property
    def n(self) -> int:
        return len(self.data)

    def param(self, name: str) -> np.ndarray:
        return self.params[:, PARAM_NAMES.index(name)]

    def param_vector(self, t: int) -> ParamVector:
        return ParamVector.from_array(self.params[t])

    def __iter__(self):
        for t in range(len(self)):
            yield self.param_vector(t)


# -- transforms -------------------------------------------------------------

def _to_theta(p: ParamVector) -> np.ndarray:
    th = np.empty(_N_Z)
    th[0], th[1], th[2], th[3] = p.beta01, p.beta11, p.beta00, p.beta10
    th[4], th[5] = math.log(p.sigma1), math.log(p.sigma0)
    th[6], th[7] = p.eta, math.log(p.tau)
    th[8] = math.atanh(p.rho / RHO_BOUND)
    return th


def _from_theta(th) -> ParamVector:
    return ParamVector(
        eta=float(th[6]), tau=math.exp(th[7]),
        beta01=float(th[0]), beta11=float(th[1]), sigma1=math.exp(th[4]),
        beta00=float(th[2]), beta10=float(th[3]), sigma0=math.exp(th[5]),
        rho=RHO_BOUND * math.tanh(th[8]),
    )


class _CompleteStats:
    """Centered cross-products of (l, y1, y0); make each posterior evaluation O(1)."""

    __slots__ = ("n", "lbar", "y1bar", "y0bar", "sll", "s11", "s00", "s10", "s1l", "s0l")

    def __init__(self, l, y1, y0):
        self.n = len(l)
        n = self.n
        self.lbar, self.y1bar, self.y0bar = float(l.sum()) / n, float(y1.sum()) / n, float(y0.sum()) / n
        lc, c1, c0 = l - self.lbar, y1 - self.y1bar, y0 - self.y0bar
        self.sll = float(lc @ lc)
        self.s11 = float(c1 @ c1)
        self.s00 = float(c0 @ c0)
        self.s10 = float(c1 @ c0)
        self.s1l = float(c1 @ lc)
        self.s0l = float(c0 @ lc)

    def log_post(self, th) -> float:
        """Equal to log_joint_posterior at the constrained point (prior included)."""
        b01, b11, b00, b10, ls1, ls0, eta, ltau, u = th
        r = RHO_BOUND * math.tanh(u)
        if not abs(r) < RHO_BOUND:
            return -math.inf
        n = self.n
        c1 = self.y1bar - b01 - b11 * self.lbar
        c0 = self.y0bar - b00 - b10 * self.lbar
        q11 = self.s11 - 2.0 * b11 * self.s1l + b11 * b11 * self.sll + n * c1 * c1
        q00 = self.s00 - 2.0 * b10 * self.s0l + b10 * b10 * self.sll + n * c0 * c0
        q10 = self.s10 - b10 * self.s1l - b11 * self.s0l + b11 * b10 * self.sll + n * c1 * c0
        s1, s0, tau = math.exp(ls1), math.exp(ls0), math.exp(ltau)
        if s1 == 0.0 or s0 == 0.0 or tau == 0.0 or math.isinf(s1) or math.isinf(s0) or math.isinf(tau):
            return -math.inf
        omr2 = 1.0 - r * r
        quad = (q11 / (s1 * s1) - 2.0 * r * q10 / (s1 * s0) + q00 / (s0 * s0)) / omr2
        outcome = -n * (LOG_2PI + ls1 + ls0 + 0.5 * math.log(omr2)) - 0.5 * quad
        dl = self.lbar - eta
        ql = self.sll + n * dl * dl
        covariate = -n * (0.5 * LOG_2PI + ltau) - 0.5 * ql / (tau * tau)
        return outcome + covariate

    def log_target(self, th) -> float:
        """Log posterior on the unconstrained scale (adds the log-Jacobian)."""
        lp = self.log_post(th)
        if lp == -math.inf:
            return lp
        t = math.tanh(th[8])
        jac = th[4] + th[5] + th[7] + math.log(RHO_BOUND) + math.log1p(-t * t)
        return lp + jac


def _free_mask(fixed) -> np.ndarray:
    free = np.ones(_N_Z)
    for name in fixed:
        free[_THETA_INDEX[name]] = 0.0
    return free


def _sweep(th, stats: _CompleteStats, steps: Mapping[str, float], free, z, u):
    """One Metropolis accept/reject per block.  Returns (theta, {block: accepted})."""
    # plain floats: numpy scalar arithmetic is several times slower here
    th = [float(v) for v in th]
    z, u, free = z.tolist(), u.tolist(), free.tolist()
    cur = stats.log_target(th)
    accepted = {}
    k = 0
    for j, block in enumerate(_BLOCK_ORDER):
        prop = th.copy()
        step = steps[block]
        for i in BLOCKS[block]:
            prop[i] += step * free[i] * z[k]
            k += 1
        new = stats.log_target(prop)
        log_ratio = new - cur
        if math.isnan(log_ratio):
            ok = False
        else:
            ok = log_ratio >= 0.0 or (u[j] > 0.0 and math.log(u[j]) < log_ratio) or (u[j] == 0.0)
        if ok:
            th, cur = prop, new
        accepted[block] = ok
    return np.array(th), accepted


def _stats_for(data: ObservedData, ym) -> _CompleteStats:
    y1, y0 = assemble_complete(data, ym)
    return _CompleteStats(data.l, y1, y0)


# -- public operations ------------------------------------------------------

def impute_counterfactuals(p: ParamVector, data: ObservedData, rng) -> np.ndarray:
    """Exact draw of every missing potential outcome from its conditional normal."""
    mean, sd = bvn_conditional(p.bvn(data.l), data.a, data.y)
    z = as_generator(rng).standard_normal(len(data))
    return np.atleast_1d(mean + sd * z)


def impute_counterfactuals_mh(p: ParamVector, data: ObservedData, ym, step: float, rng):
    """Symmetric random-walk Metropolis update of each counterfactual.

    Returns the new vector and a boolean array of per-subject acceptances.
    """
    gen = as_generator(rng)
    ym = np.asarray(ym, dtype=float)
    prop = ym + step * gen.standard_normal(len(data))
    u = gen.random(len(data))
    bvn = p.bvn(data.l)
    cur1, cur0 = assemble_complete(data, ym)
    new1, new0 = assemble_complete(data, prop)
    log_ratio = bvn_logpdf(bvn, new1, new0) - bvn_logpdf(bvn, cur1, cur0)
    with np.errstate(divide="ignore"):
        ok = np.log(u) < log_ratio
    return np.where(ok, prop, ym), ok


def update_params(ym, data: ObservedData, current: ParamVector, cfg: SamplerConfig, rng):
    """One blockwise Metropolis sweep over the parameters given completed data.

    Returns the new ParamVector and ``{block: accepted}``.
    """
    ym = np.asarray(ym, dtype=float)
    if ym.shape != (len(data),):
        raise ArgumentError("ym length must match the data")
    gen = as_generator(rng)
    z = gen.standard_normal(_N_Z)
    u = gen.random(len(_BLOCK_ORDER))
    steps = {b: cfg.step(b) for b in _BLOCK_ORDER}
    th, accepted = _sweep(_to_theta(current), _stats_for(data, ym), steps, _free_mask(cfg.fixed), z, u)
    return _from_theta(th), accepted


def init_auto(data: ObservedData, rng=None) -> ParamVector:
    """Least-squares start: per-arm regressions, covariate moments, rho = 0.

    ``rng`` is only used to jitter the start on retries (see ``run_chain``).
    """
    coefs = {}
    for arm in (1, 0):
        sel = data.a == arm
        m = int(sel.sum())
        if m < 2:
            raise InitializationError(
                f"treatment arm {arm} has {m} subject(s); automatic initialization needs at "
                "least 2 per arm, pass an explicit init instead"
            )
        X = np.column_stack([np.ones(m), data.l[sel]])
        beta, *_ = np.linalg.lstsq(X, data.y[sel], rcond=None)
        resid = data.y[sel] - X @ beta
        sd = math.sqrt(float(resid @ resid) / max(m - 2, 1))
        coefs[arm] = (float(beta[0]), float(beta[1]), max(sd, 1e-6))
    tau = float(np.std(data.l, ddof=1)) if len(data) > 1 else 1.0
    p = ParamVector(
        eta=float(np.mean(data.l)), tau=max(tau, 1e-6),
        beta01=coefs[1][0], beta11=coefs[1][1], sigma1=coefs[1][2],
        beta00=coefs[0][0], beta10=coefs[0][1], sigma0=coefs[0][2],
        rho=0.0,
    )
    if rng is not None:
        gen = as_generator(rng)
        th = _to_theta(p)
        th[:8] += 0.1 * gen.standard_normal(8)
        p = _from_theta(th)
    return p


def _initial_state(data, cfg, gen, retries=10):
    auto = isinstance(cfg.init, str)
    for attempt in range(retries if auto else 1):
        p = init_auto(data, gen if attempt else None) if auto else cfg.init
        p = p.replace(**cfg.fixed)
        if not p.is_valid():
            continue
        mean, _ = bvn_conditional(p.bvn(data.l), data.a, data.y)
        ym = np.atleast_1d(np.asarray(mean, dtype=float))
        if math.isfinite(log_joint_posterior(p, ym, data)):
            return p, ym
    raise InitializationError("log posterior is not finite at the initial point")


def run_chain(data: ObservedData, cfg: SamplerConfig, rng) -> PosteriorDraws:
    """Run one chain: ``warmup`` adaptive iterations, then ``keep * thin`` frozen ones."""
    if len(data) < 2:
        raise ArgumentError("need at least 2 subjects")
    gen = as_generator(rng)
    p, ym = _initial_state(data, cfg, gen)
    th = _to_theta(p)
    free = _free_mask(cfg.fixed)
    log_steps = {b: math.log(cfg.step(b)) for b in _BLOCK_ORDER}
    log_imp_step = math.log(cfg.imputation_step)
    metropolis = cfg.imputation == "metropolis"

    T = cfg.keep
    out_params = np.empty((T, len(PARAM_NAMES)))
    out_ym = np.empty((T, len(data)))
    acc_count = dict.fromkeys(_BLOCK_ORDER, 0)
    imp_acc = 0.0
    kept = 0
    post_iters = 0
    total = cfg.warmup + T * cfg.thin
    for it in range(total):
        warm = it < cfg.warmup
        if metropolis:
            ym, ok = impute_counterfactuals_mh(p, data, ym, math.exp(log_imp_step), gen)
            rate = float(ok.mean())
        else:
            ym = impute_counterfactuals(p, data, gen)
        steps = {b: math.exp(log_steps[b]) for b in _BLOCK_ORDER}
        z = gen.standard_normal(_N_Z)
        u = gen.random(len(_BLOCK_ORDER))
        th, accepted = _sweep(th, _stats_for(data, ym), steps, free, z, u)
        p = _from_theta(th)
        if warm:
            gain = (it + 1) ** -0.6
            for b in _BLOCK_ORDER:
                log_steps[b] += gain * (accepted[b] - cfg.target(b))
            if metropolis:
                log_imp_step += gain * (rate - 0.44)
            continue
        post_iters += 1
        for b in _BLOCK_ORDER:
            acc_count[b] += accepted[b]
        if metropolis:
            imp_acc += rate
        if (it - cfg.warmup + 1) % cfg.thin == 0:
            out_params[kept] = p.as_array()
            out_ym[kept] = ym
            kept += 1

    acceptance = {b: acc_count[b] / post_iters for b in _BLOCK_ORDER}
    step_sizes = {b: math.exp(log_steps[b]) for b in _BLOCK_ORDER}
    if metropolis:
        acceptance["imputation"] = imp_acc / post_iters
        step_sizes["imputation"] = math.exp(log_imp_step)
    return PosteriorDraws(out_params, out_ym, data, acceptance, step_sizes)


def run_chains(data: ObservedData, cfg: SamplerConfig, rng_state, chains: int = 4) -> list[PosteriorDraws]:
    """Independent chains on consecutive stream ids starting at ``rng_state.stream``."""
    return [run_chain(data, cfg, rng_state.child(rng_state.stream + k)) for k in range(chains)]


# -- draw export ------------------------------------------------------------

def draw_columns(n: int) -> list[str]:
    return list(PARAM_NAMES) + [f"ym_{i}" for i in range(1, n + 1)]


def write_draws(chain: PosteriorDraws, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(draw_columns(chain.n)) + "\n")
        for prow, yrow in zip(chain.params, chain.counterfactuals):
            fh.write(",".join(fmt(v) for v in prow))
            if len(yrow):
                fh.write("," + ",".join(fmt(v) for v in yrow))
            fh.write("\n")


def read_draws(path, data: ObservedData) -> PosteriorDraws:
    """Read a draw table written by :func:`write_draws` for the given data."""
    expected = draw_columns(len(data))
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != expected:
            raise ParseError(
                f"draw table header does not match data with n={len(data)} "
                f"(got {len(header)} columns, expected {len(expected)})",
                row=1,
            )
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(expected):
                raise ParseError(f"expected {len(expected)} fields, got {len(parts)}", row=lineno)
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                raise ParseError("non-numeric field", row=lineno) from None
    if not rows:
        raise ParseError("draw table has no rows", row=2)
    arr = np.array(rows)
    k = len(PARAM_NAMES)
    return PosteriorDraws(arr[:, :k], arr[:, k:], data)
