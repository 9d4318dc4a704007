"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 verification failure.
Summaries are printed as ``key: value`` lines.
"""

from __future__ import annotations

import argparse
import sys

from . import matio
from .bounds import (
    amgm_margin,
    certificate,
    competing_bounds,
    required_samples,
    tail_bound,
    verify_claims,
)
from .errors import AmmError, ConfigError, MatrixFormatError
from .harness import compare_schemes, load_config, run_experiment
from .matcore import PairedMatrices, SpectralStats, generate_matrix, spectrum_for_target_sr
from .sampler import (
    SamplingDistribution,
    SamplingScheme,
    build_distribution,
    relative_spectral_error,
    sketch as run_sketch,
)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(items) -> None:
    for key, value in items:
        if isinstance(value, float):
            value = matio.format_scalar(value)
        print(f"{key}: {value}")


def _load_pair(a_path, b_path) -> PairedMatrices:
    A, B = matio.read_matrix(a_path), matio.read_matrix(b_path)
    if A.shape[1] != B.shape[1]:
        raise UsageError(f"column mismatch: A has {A.shape[1]} columns, B has {B.shape[1]}")
    return PairedMatrices(A, B)


def cmd_gen(args) -> int:
    if not 1 <= args.target_sr <= min(args.rows, args.cols):
        raise UsageError(f"target_sr must lie in [1, {min(args.rows, args.cols)}]")
    sigma = spectrum_for_target_sr(args.target_sr, min(args.rows, args.cols))
    M = generate_matrix(args.rows, args.cols, sigma, args.seed)
    matio.write_matrix(args.out, M)
    stats = SpectralStats.of(M)
    _emit([
        ("rows", args.rows),
        ("cols", args.cols),
        ("seed", args.seed),
        ("spectral_norm", stats.spectral_norm),
        ("frobenius_norm", stats.frobenius_norm),
        ("stable_rank", stats.stable_rank),
    ])
    return EXIT_OK


def cmd_dist(args) -> int:
    P = _load_pair(args.a, args.b)
    dist = build_distribution(P, args.scheme)
    p = dist.probabilities
    if args.out:
        matio.write_matrix(args.out, p[None, :])
    _emit([
        ("scheme", dist.scheme.value),
        ("n", dist.n),
        ("probabilities", ",".join(matio.format_scalar(x) for x in p)),
        ("sum", float(p.sum())),
        ("min_p", float(p.min())),
        ("max_p", float(p.max())),
        ("amgm_margin", amgm_margin(P, dist)),
    ])
    return EXIT_OK


def cmd_sketch(args) -> int:
    if args.m < 1:
        raise UsageError("m must be at least 1")
    P = _load_pair(args.a, args.b)
    est = run_sketch(P, args.scheme, args.m, args.seed)
    matio.write_matrix(args.out, est.estimate)
    cert = certificate(P)
    items = [
        ("scheme", SamplingScheme.parse(args.scheme).value),
        ("m", args.m),
        ("seed", args.seed),
        ("relative_error", relative_spectral_error(est, P)),
    ]
    items += [(f"cert_{k}", v) for k, v in cert.to_dict().items()]
    for t in (1.0, 3.0, 5.0):
        tail = tail_bound(cert, args.m, t)
        items += [(f"theorem_deviation_t{t:g}", tail.deviation), (f"theorem_failure_t{t:g}", tail.failure_prob)]
    _emit(items)
    return EXIT_OK


def cmd_bounds(args) -> int:
    if not 0 < args.epsilon < 1:
        raise UsageError("epsilon must lie in (0, 1)")
    if args.sr_a < 1 or args.sr_b < 1 or args.c <= 0 or args.n < 1:
        raise UsageError("need sr_a, sr_b >= 1, c > 0 and n >= 1")
    plan = required_samples(args.sr_a, args.sr_b, args.epsilon, args.c)
    comp = competing_bounds(args.sr_a, args.sr_b, args.epsilon, args.n)
    _emit([
        ("sr_a", float(args.sr_a)),
        ("sr_b", float(args.sr_b)),
        ("epsilon", float(args.epsilon)),
        ("c", float(args.c)),
        ("m_required", plan.m_required),
        ("plan_t", plan.t),
        ("plan_deviation", plan.tail.deviation),
        ("plan_failure_prob", plan.tail.failure_prob),
        ("order_proposed", comp.proposed),
        ("order_dkm", comp.dkm),
        ("order_rotation", comp.rotation),
    ])
    return EXIT_OK


def cmd_verify(args) -> int:
    P = _load_pair(args.a, args.b)
    if args.dist:
        p = matio.read_matrix(args.dist)
        if p.shape[0] != 1:
            raise UsageError("distribution file must hold a single row")
        dist = SamplingDistribution(p[0], None)
    else:
        dist = build_distribution(P, args.scheme)
    report = verify_claims(P, dist)
    for c in report.checks:
        status = "ok" if c.passed else "VIOLATED"
        line = f"{c.name}: {status} value={matio.format_scalar(c.value)} bound={matio.format_scalar(c.bound)}"
        if c.detail:
            line += f" ({c.detail})"
        print(line)
    if report.claim1 is not None:
        print(f"claim1_min_margin: {matio.format_scalar(float(report.claim1.margins.min()))}")
    print(f"result: {'pass' if report.passed else 'fail'}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_bench(args) -> int:
    config = load_config(args.config)
    if args.compare:
        report = compare_schemes(config)
    else:
        report = run_experiment(config)
    paths = report.write(args.out_dir)
    _emit([(k, str(v)) for k, v in paths.items()])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ammsketch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    schemes = [s.value for s in SamplingScheme]

    p = sub.add_parser("gen", help="write a synthetic matrix with a given stable rank")
    p.add_argument("rows", type=int)
    p.add_argument("cols", type=int)
    p.add_argument("target_sr", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("dist", help="print the sampling distribution for a pair")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--scheme", choices=schemes, default="proposed")
    p.add_argument("--out", help="also write the probabilities as a 1 x n CSV matrix")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("sketch", help="estimate A B^T from m sampled outer products")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--scheme", choices=schemes, default="proposed")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("bounds", help="sample-size planner and competing sample-count expressions")
    p.add_argument("--sr-a", type=float, required=True)
    p.add_argument("--sr-b", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--c", type=float, default=4.0)
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="exact checks of the bound's ingredients")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--scheme", choices=schemes, default="proposed")
    p.add_argument("--dist", help="1 x n CSV of probabilities to verify instead of a built scheme")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--compare", action="store_true", help="require >= 2 schemes (common random numbers)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, MatrixFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AmmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
