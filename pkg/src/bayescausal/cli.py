"""Command-line entry point: simulate, fit, estimate, pitfalls, coverage."""

from __future__ import annotations

import argparse
import sys

from . import coverage as cov
from .config import load_config
from .dgp import DgpConfig, generate_complete, load_observed, mask, true_estimands, write_complete, write_observed, write_truth
from .dists import RngState
from .errors import ArgumentError, InitializationError, ParseError, ValidationError
from .estimands import DEFAULT_S, estimand_from_spec, write_estimand_draws, write_estimand_summaries
from .pitfalls import pitfall_report, pitfall_write_report
from .sampler import SamplerConfig, read_draws, run_chain, write_draws

PITFALL_CLI_NAMES = {"ppi_pate": "ppi_pate", "ppi_ite": "ppi_ite", "keil": "keil_style", "keil_style": "keil_style"}


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _configs(path):
    if path is None:
        return DgpConfig(), SamplerConfig()
    return load_config(path)


def cmd_simulate(args):
    dgp, _ = _configs(args.config)
    complete = generate_complete(dgp, RngState(args.seed))
    write_observed(mask(complete), args.out_observed)
    if args.out_complete:
        write_complete(complete, args.out_complete)
    if args.out_truth:
        write_truth(true_estimands(complete, dgp), args.out_truth)


def cmd_fit(args):
    _, sampler = _configs(args.config)
    data = load_observed(args.data)
    chain = run_chain(data, sampler, RngState(args.seed))
    write_draws(chain, args.out_draws)


def cmd_estimate(args):
    data = load_observed(args.data)
    chain = read_draws(args.draws, data)
    est = estimand_from_spec(chain, args.which, rng=RngState(args.seed), S=args.S)
    write_estimand_draws(est, args.out)
    if args.summary:
        write_estimand_summaries([est], args.summary, level=args.level)


def cmd_pitfalls(args):
    if not args.i_know_this_is_wrong:
        raise ArgumentError(
            "pitfall procedures are not valid estimators; pass --i-know-this-is-wrong to emit them"
        )
    data = load_observed(args.data)
    chain = read_draws(args.draws, data)
    name = PITFALL_CLI_NAMES[args.name]
    report = pitfall_report(chain, name, RngState(args.seed), subject=args.subject, m=args.m)
    pitfall_write_report([report], args.out)


def cmd_coverage(args):
    dgp, sampler = _configs(args.config)
    reports = cov.coverage_study(
        dgp, sampler, args.replicates, args.level, RngState(args.seed), S=args.S, workers=args.workers
    )
    cov.write_coverage(reports, args.out, nominal=args.level)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bayescausal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--config")
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out-observed", required=True)
    p.add_argument("--out-complete")
    p.add_argument("--out-truth")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="run the sampler and write posterior draws")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--out-draws", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("estimate", help="extract estimand draws from posterior draws")
    p.add_argument("--draws", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--which", required=True, help="ite:i (0-based), sate, cate:l, or pate:closed|mc|bb|ecdf")
    p.add_argument("--S", type=int, default=DEFAULT_S, help="covariate draws per posterior draw for pate:mc")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="also write kind,backend,mean,sd,ci_lo,ci_hi here")
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("pitfalls", help="run a known-incorrect procedure next to its correct counterpart")
    p.add_argument("--draws", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--name", required=True, choices=sorted(PITFALL_CLI_NAMES))
    p.add_argument("--i-know-this-is-wrong", action="store_true")
    p.add_argument("--subject", type=int, default=0, help="0-based subject for ppi_ite")
    p.add_argument("--m", type=int, help="resample size for keil (default n)")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pitfalls)

    p = sub.add_parser("coverage", help="repeated-sampling coverage study")
    p.add_argument("--config")
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--S", type=int, default=DEFAULT_S)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ArgumentError, ParseError, ValidationError, InitializationError, OSError, ValueError) as exc:
        msg = " ".join(str(exc).split())
        print(f"bayescausal {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
