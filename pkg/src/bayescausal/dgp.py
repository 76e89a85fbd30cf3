"""Synthetic data from the confounded bivariate-normal potential-outcomes model.

    l_i            ~ N(eta, tau)
    a_i | l_i      ~ Bernoulli(expit(gamma0 + gamma1 * l_i))
    (y1_i, y0_i)   ~ BVN((beta01 + beta11 l_i, beta00 + beta10 l_i), sigma1, sigma0, rho_true)

Defaults give CATE psi(l) = 5 - 9 l and PATE 5.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .dists import as_generator, bernoulli_expit
from .errors import ArgumentError, ParseError, ValidationError


@dataclass(frozen=True)
class DgpConfig:
    n: int = 50
    eta: float = 0.0
    tau: float = 1.0
    gamma0: float = 1.0
    gamma1: float = 2.0
    beta01: float = 10.0
    beta11: float = -4.0
    beta00: float = 5.0
    beta10: float = 5.0
    sigma1: float = 1.0
    sigma0: float = 1.0
    rho_true: float = 0.0

    def __post_init__(self):
        # zero scales are accepted: they give the noiseless limit used in tests
        if int(self.n) != self.n or self.n < 2:
            raise ArgumentError(f"n must be an integer >= 2, got {self.n!r}")
        for name in ("tau", "sigma1", "sigma0"):
            if not getattr(self, name) >= 0:
                raise ArgumentError(f"{name} must be non-negative")
        if not abs(self.rho_true) <= 1:
            raise ArgumentError("rho_true must lie in [-1, 1]")

    @property
    def cate_intercept(self) -> float:
        return self.beta01 - self.beta00

    @property
    def cate_slope(self) -> float:
        return self.beta11 - self.beta10

    @property
    def pate(self) -> float:
        return self.cate_intercept + self.cate_slope * self.eta

    def cate(self, l):
        return self.cate_intercept + self.cate_slope * l


DGP_FIELDS = tuple(f.name for f in fields(DgpConfig))


class CompleteRecord(NamedTuple):
    y1: float
    y0: float
    a: int
    l: float


class ObservedRecord(NamedTuple):
    y: float
    a: int
    l: float


@dataclass(frozen=True, eq=False)
class ObservedData:
    """Column view of the observed records (factual y, treatment a, covariate l)."""

    y: np.ndarray
    a: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.int64))
        object.__setattr__(self, "l", np.asarray(self.l, dtype=float))
        if not (self.y.shape == self.a.shape == self.l.shape) or self.y.ndim != 1:
            raise ArgumentError("y, a, l must be 1-d arrays of equal length")
        if not np.all((self.a == 0) | (self.a == 1)):
            raise ArgumentError("treatment a must be 0 or 1")

    @classmethod
    def from_records(cls, records) -> "ObservedData":
        records = list(records)
        if not records:
            return cls(np.empty(0), np.empty(0, dtype=np.int64), np.empty(0))
        y, a, l = zip(*records)
        return cls(np.array(y), np.array(a), np.array(l))

    def __len__(self) -> int:
        return len(self.y)

    def __iter__(self) -> Iterator[ObservedRecord]:
        for y, a, l in zip(self.y, self.a, self.l):
            yield ObservedRecord(float(y), int(a), float(l))

    def __getitem__(self, idx) -> "ObservedData":
        idx = np.atleast_1d(np.arange(len(self))[idx])
        return ObservedData(self.y[idx], self.a[idx], self.l[idx])

    def __eq__(self, other):
        if not isinstance(other, ObservedData):
            return NotImplemented
        return (
            np.array_equal(self.y, other.y)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.l, other.l)
        )

    @property
    def treated(self) -> np.ndarray:
        return self.a == 1


@dataclass(frozen=True, eq=False)
class CompleteData:
    y1: np.ndarray
    y0: np.ndarray
    a: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        for name in ("y1", "y0", "l"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.int64))
        if not (self.y1.shape == self.y0.shape == self.a.shape == self.l.shape):
            raise ArgumentError("complete-data columns must have equal length")

    @classmethod
    def from_records(cls, records) -> "CompleteData":
        records = list(records)
        if not records:
            e = np.empty(0)
            return cls(e, e, np.empty(0, dtype=np.int64), e)
        y1, y0, a, l = zip(*records)
        return cls(np.array(y1), np.array(y0), np.array(a), np.array(l))

    def __len__(self) -> int:
        return len(self.y1)

    def __iter__(self) -> Iterator[CompleteRecord]:
        for row in zip(self.y1, self.y0, self.a, self.l):
            yield CompleteRecord(float(row[0]), float(row[1]), int(row[2]), float(row[3]))

    def __eq__(self, other):
        if not isinstance(other, CompleteData):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ("y1", "y0", "a", "l"))


@dataclass(frozen=True)
class TruthRecord:
    ites: np.ndarray
    sate: float
    cate_intercept: float
    cate_slope: float
    pate: float

    def cate(self, l):
        return self.cate_intercept + self.cate_slope * l


def generate_complete(cfg: DgpConfig, rng, n: int | None = None) -> CompleteData:
    """Simulate ``n`` (default ``cfg.n``) complete records."""
    gen = as_generator(rng)
    n = cfg.n if n is None else n
    l = cfg.eta + cfg.tau * gen.standard_normal(n)
    a = bernoulli_expit(cfg.gamma0 + cfg.gamma1 * l, gen)
    z1 = gen.standard_normal(n)
    z2 = gen.standard_normal(n)
    r = cfg.rho_true
    y1 = cfg.beta01 + cfg.beta11 * l + cfg.sigma1 * z1
    y0 = cfg.beta00 + cfg.beta10 * l + cfg.sigma0 * (r * z1 + np.sqrt(1.0 - r * r) * z2)
    return CompleteData(y1, y0, np.atleast_1d(a), l)


def mask(complete: CompleteData) -> ObservedData:
    """Keep the factual outcome of each record and drop the counterfactual."""
    y = np.where(complete.a == 1, complete.y1, complete.y0)
    return ObservedData(y, complete.a.copy(), complete.l.copy())


def true_estimands(complete: CompleteData, cfg: DgpConfig) -> TruthRecord:
    if len(complete) == 0:
        raise ArgumentError("true_estimands needs at least one record")
    ites = complete.y1 - complete.y0
    return TruthRecord(
        ites=ites,
        sate=float(np.mean(ites)),
        cate_intercept=cfg.cate_intercept,
        cate_slope=cfg.cate_slope,
        pate=cfg.pate,
    )


# -- tabular files ----------------------------------------------------------

OBSERVED_HEADER = ("y", "a", "l")
COMPLETE_HEADER = ("y1", "y0", "a", "l")


def fmt(x) -> str:
    """Shortest round-tripping text for a float."""
    return repr(float(x))


def _read_rows(path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError("file is empty; expected header " + ",".join(header), row=1)
        if tuple(h.strip() for h in first) != header:
            raise ParseError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", row=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=lineno)
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise ParseError(f"non-numeric field in {row!r}", row=lineno) from None
            yield lineno, values


def _treatment(value: float, lineno: int) -> int:
    if value not in (0.0, 1.0):
        raise ValidationError(f"treatment a must be 0 or 1, got {value:g}", row=lineno)
    return int(value)


def load_observed(path) -> ObservedData:
    """Read ``y,a,l`` rows.  Row numbers in errors count the header as row 1."""
    records = [
        ObservedRecord(y, _treatment(a, lineno), l)
        for lineno, (y, a, l) in _read_rows(path, OBSERVED_HEADER)
    ]
    return ObservedData.from_records(records)


def load_complete(path) -> CompleteData:
    records = [
        CompleteRecord(y1, y0, _treatment(a, lineno), l)
        for lineno, (y1, y0, a, l) in _read_rows(path, COMPLETE_HEADER)
    ]
    return CompleteData.from_records(records)


def write_observed(data: ObservedData, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(OBSERVED_HEADER) + "\n")
        for r in data:
            fh.write(f"{fmt(r.y)},{r.a},{fmt(r.l)}\n")


def write_complete(data: CompleteData, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(COMPLETE_HEADER) + "\n")
        for r in data:
            fh.write(f"{fmt(r.y1)},{fmt(r.y0)},{r.a},{fmt(r.l)}\n")


def write_truth(truth: TruthRecord, path) -> None:
    """Two-column ``quantity,value`` table: population truths then per-subject ITEs."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("quantity,value\n")
        fh.write(f"sate,{fmt(truth.sate)}\n")
        fh.write(f"cate_intercept,{fmt(truth.cate_intercept)}\n")
        fh.write(f"cate_slope,{fmt(truth.cate_slope)}\n")
        fh.write(f"pate,{fmt(truth.pate)}\n")
        for i, v in enumerate(truth.ites):
            fh.write(f"ite_{i},{fmt(v)}\n")
