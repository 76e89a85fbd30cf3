"""Flat ``key = value`` config files for the data generator and the sampler.

Keys are the field names of :class:`DgpConfig` and :class:`SamplerConfig`;
anything else is an error.  Blank lines and ``#`` comments are ignored.
Mapping-valued sampler fields use ``name:value`` pairs separated by commas::

    n = 50
    warmup = 5000
    fixed = rho:0.85
    init = auto
"""

from __future__ import annotations

from dataclasses import fields

from .dgp import DGP_FIELDS, DgpConfig
from .errors import ParseError
from .model import PARAM_NAMES, ParamVector
from .sampler import SAMPLER_FIELDS, SamplerConfig

_INT_FIELDS = {"n", "warmup", "keep", "thin"}
_STR_FIELDS = {"imputation"}


def _mapping(text: str, lineno: int) -> dict[str, float]:
    out = {}
    if not text.strip():
        return out
    for item in text.split(","):
        name, sep, value = item.partition(":")
        name = name.strip()
        if not sep or name not in PARAM_NAMES:
            raise ParseError(f"expected name:value with a parameter name, got {item.strip()!r}", row=lineno)
        try:
            out[name] = float(value)
        except ValueError:
            raise ParseError(f"bad number in {item.strip()!r}", row=lineno) from None
    return out


def _value(key: str, text: str, lineno: int):
    if key in _STR_FIELDS:
        return text
    if key == "fixed":
        return _mapping(text, lineno)
    if key == "init":
        if text == "auto":
            return text
        values = _mapping(text, lineno)
        missing = set(PARAM_NAMES) - set(values)
        if missing:
            raise ParseError(f"explicit init must set every parameter; missing {sorted(missing)}", row=lineno)
        return ParamVector(**values)
    if key == "adapt_target" and text in ("auto", "none", ""):
        return None
    try:
        if key in _INT_FIELDS:
            return int(text)
        return float(text)
    except ValueError:
        raise ParseError(f"{key}: cannot parse {text!r}", row=lineno) from None


def parse_config_text(text: str) -> dict:
    values = {}
    known = set(DGP_FIELDS) | set(SAMPLER_FIELDS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", row=lineno)
        if key not in known:
            raise ParseError(f"unknown key {key!r}", row=lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", row=lineno)
        values[key] = _value(key, val.strip(), lineno)
    return values


def load_config(path) -> tuple[DgpConfig, SamplerConfig]:
    """Read a config file; unspecified fields keep their defaults."""
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    dgp = DgpConfig(**{k: v for k, v in values.items() if k in DGP_FIELDS})
    sampler = SamplerConfig(**{k: v for k, v in values.items() if k in SAMPLER_FIELDS})
    return dgp, sampler


def format_config(dgp: DgpConfig | None = None, sampler: SamplerConfig | None = None) -> str:
    """Inverse of :func:`load_config` for the given configs."""
    lines = []
    for cfg in (dgp, sampler):
        if cfg is None:
            continue
        for f in fields(cfg):
            v = getattr(cfg, f.name)
            if f.name == "fixed":
                v = ",".join(f"{k}:{x!r}" for k, x in v.items())
            elif isinstance(v, ParamVector):
                v = ",".join(f"{k}:{getattr(v, k)!r}" for k in PARAM_NAMES)
            elif v is None:
                v = "auto"
            lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
