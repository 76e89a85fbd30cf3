"""Posterior summaries and convergence diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError


class DegenerateChainWarning(UserWarning):
    """Draws are constant, so there is no information to measure."""


@dataclass(frozen=True)
class Summary:
    mean: float
    sd: float
    ci: tuple[float, float]
    level: float

    @property
    def width(self) -> float:
        return self.ci[1] - self.ci[0]

    def covers(self, value: float) -> bool:
        return self.ci[0] <= value <= self.ci[1]


def summarize(values, level: float = 0.95) -> Summary:
    """Mean, sd (ddof=1) and the central percentile interval.

    Quantiles interpolate linearly between order statistics (numpy's
    default ``linear`` method, Hyndman-Fan type 7).
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size < 2:
        raise ArgumentError("summarize needs at least 2 draws")
    if not 0 < level < 1:
        raise ArgumentError("level must lie in (0, 1)")
    lo, hi = np.quantile(values, [(1 - level) / 2, (1 + level) / 2], method="linear")
    if lo == hi and np.ptp(values) == 0:
        # floating-point summation would leave ~1e-16 of spurious spread
        c = float(values[0])
        return Summary(c, 0.0, (c, c), level)
    return Summary(float(values.mean()), float(values.std(ddof=1)), (float(lo), float(hi)), level)


def autocorrelation(values) -> np.ndarray:
    """Sample autocorrelation at every lag (biased autocovariance, FFT)."""
    x = np.asarray(values, dtype=float)
    x = x - x.mean()
    n = x.size
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n] / n
    return acov / acov[0]


def ess(values) -> float:
    """Effective sample size with Geyer's initial positive sequence truncation.

    Capped at the number of draws.  Constant input returns 0.0 and emits a
    :class:`DegenerateChainWarning`.
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n < 10:
        raise ArgumentError("ess needs at least 10 draws")
    if np.ptp(x) == 0:
        warnings.warn("constant chain: effective sample size defined as 0", DegenerateChainWarning, stacklevel=2)
        return 0.0
    rho = autocorrelation(x)
    pairs = rho[: n - n % 2].reshape(-1, 2).sum(axis=1)
    total = 0.0
    for gamma in pairs:
        if gamma <= 0:
            break
        total += gamma
    tau = -1.0 + 2.0 * total
    return float(min(n / tau, n))


def rhat(chains) -> float:
    """Split-chain potential scale reduction (Gelman et al., BDA3 form).

    Each chain is cut into two halves (the middle draw of an odd-length
    chain is dropped) and the between/within variance ratio is computed
    over the halves.  A single chain is accepted and gives its own split
    statistic.
    """
    arrays = [np.asarray(c, dtype=float).ravel() for c in chains]
    if not arrays:
        raise ArgumentError("rhat needs at least one chain")
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ArgumentError("all chains must have equal length")
    if n < 10:
        raise ArgumentError("chains must have at least 10 draws")
    half = n // 2
    halves = np.array([h for a in arrays for h in (a[:half], a[n - half:])])
    within = halves.var(axis=1, ddof=1).mean()
    between = half * halves.mean(axis=1).var(ddof=1)
    if within == 0:
        return float("nan") if between == 0 else float("inf")
    var_plus = (half - 1) / half * within + between / half
    return float(np.sqrt(var_plus / within))
