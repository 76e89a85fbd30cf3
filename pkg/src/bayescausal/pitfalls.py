"""Deliberately incorrect procedures, kept for side-by-side comparison.

None of these is a valid posterior for the estimand it is usually
mistaken for.  Each one stays centred on its correct counterpart but is
too dispersed, because Monte Carlo simulation noise leaks into the
posterior spread:

``ppi_pate``
    "posterior predictive imputation" for the PATE: at each observed
    covariate simulate one outcome per arm and average the differences.
``ppi_ite``
    a "subject-level effect" from simulating both potential outcomes of
    one subject independently, even though the factual one is observed.
``keil_style``
    resample m covariates from the observed ones, simulate one outcome per
    arm at each, average.  m defaults to n.

Everything exported here carries a ``pitfall_`` prefix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgp import ObservedData, fmt
from .dists import as_generator
from .errors import ArgumentError
from .estimands import cate_draws, pate_ecdf
from .model import ParamVector
from .sampler import PosteriorDraws

PITFALL_NAMES = ("ppi_pate", "ppi_ite", "keil_style")


def _one_outcome_per_arm(p: ParamVector, l, gen, B: int = 1) -> np.ndarray:
    """y(1) - y(0) from B independent simulations per arm at each l (averaged)."""
    if B < 1:
        raise ArgumentError("B must be at least 1")
    l = np.asarray(l, dtype=float)
    z1 = gen.standard_normal((B,) + l.shape).mean(axis=0)
    z0 = gen.standard_normal((B,) + l.shape).mean(axis=0)
    return p.cate(l) + (p.sigma1 * z1 - p.sigma0 * z0)


def _average(diffs) -> float:
    diffs = np.asarray(diffs, dtype=float)
    return float((diffs * (1.0 / diffs.size)).sum())


def pitfall_ppi_pate_draw(p: ParamVector, data: ObservedData, rng, B: int = 1) -> float:
    return _average(_one_outcome_per_arm(p, data.l, as_generator(rng), B))


def pitfall_ppi_ite_draw(p: ParamVector, l_i: float, rng, B: int = 1) -> float:
    return float(_one_outcome_per_arm(p, l_i, as_generator(rng), B))


def pitfall_keil_style_draw(p: ParamVector, data: ObservedData, m: int, rng) -> float:
    if m < 1:
        raise ArgumentError("m must be at least 1")
    gen = as_generator(rng)
    idx = gen.integers(0, len(data), size=m)
    return _average(_one_outcome_per_arm(p, data.l[idx], gen))


@dataclass(frozen=True, eq=False)
class PitfallReport:
    name: str
    draws: np.ndarray
    reference_draws: np.ndarray

    @property
    def sd_ratio(self) -> float:
        return float(np.std(self.draws, ddof=1) / np.std(self.reference_draws, ddof=1))

    @property
    def mean_pitfall(self) -> float:
        return float(np.mean(self.draws))

    @property
    def mean_reference(self) -> float:
        return float(np.mean(self.reference_draws))

    @property
    def sd_pitfall(self) -> float:
        return float(np.std(self.draws, ddof=1))

    @property
    def sd_reference(self) -> float:
        return float(np.std(self.reference_draws, ddof=1))


def pitfall_report(chain: PosteriorDraws, name: str, rng, subject: int = 0, m: int | None = None) -> PitfallReport:
    """Run a pitfall at every retained draw and pair it with the correct estimand.

    References: the empirical-distribution PATE for ``ppi_pate`` and
    ``keil_style``; the CATE at the subject's covariate for ``ppi_ite``.
    """
    gen = as_generator(rng)
    data = chain.data
    if name == "ppi_pate":
        draws = [pitfall_ppi_pate_draw(p, data, gen) for p in chain]
        ref = pate_ecdf(chain).values
    elif name == "ppi_ite":
        if not 0 <= subject < chain.n:
            raise ArgumentError(f"subject index {subject} out of range for n={chain.n}")
        l_i = float(data.l[subject])
        draws = [pitfall_ppi_ite_draw(p, l_i, gen) for p in chain]
        ref = cate_draws(chain, l_i).values
    elif name == "keil_style":
        m = len(data) if m is None else m
        draws = [pitfall_keil_style_draw(p, data, m, gen) for p in chain]
        ref = pate_ecdf(chain).values
    else:
        raise ArgumentError(f"unknown pitfall {name!r}; choose from {PITFALL_NAMES}")
    return PitfallReport(name, np.array(draws), np.asarray(ref))


def pitfall_write_report(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("name,mean_pitfall,mean_reference,sd_pitfall,sd_reference,sd_ratio\n")
        for r in reports:
            fh.write(
                f"{r.name},{fmt(r.mean_pitfall)},{fmt(r.mean_reference)},"
                f"{fmt(r.sd_pitfall)},{fmt(r.sd_reference)},{fmt(r.sd_ratio)}\n"
            )
