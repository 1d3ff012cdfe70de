"""Command-line entry point: ``kbhammer {simulate,identify,campaign,plotdata}``.

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
3 campaign failure rate above 10%.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import baseline_fit
from .campaign import MAX_FAILURE_RATE, run_campaign, write_campaign
from .datagen import ExperimentConfig, generate_run
from .em import EmConfig, em_fit
from .errors import DatasetError, NumericalError
from .io import experiments_from_config, fmt, read_config, read_dataset, truth_path_for, write_dataset, write_truth
from .metrics import normalize
from .nonlinearity import polynomial_basis
from .plotdata import emit_plotdata

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_CAMPAIGN = 0, 1, 2, 3

log = logging.getLogger("kbhammer")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_rows(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_simulate(args):
    cfg = ExperimentConfig(nu=args.nu, snr=args.snr, N=args.N, n=args.n, p=args.p)
    data, truth = generate_run(cfg, args.seed, polynomial_basis(args.p))
    out = Path(args.output)
    tpath = truth_path_for(out)
    write_dataset(out, data, n=args.n, truth_file=tpath)
    write_truth(tpath, truth, snr=args.snr, seed=args.seed)
    print(f"wrote {out} and {tpath}")
    return EXIT_OK


def cmd_identify(args):
    data, meta = read_dataset(args.input)
    n = args.n or meta.get("n") or min(100, data.N)
    basis = polynomial_basis(args.p)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    if args.estimator == "kbh":
        est = em_fit(data, basis, n, EmConfig(tol=args.tol, max_iter=args.max_iter,
                                              rng_seed=args.seed))
        g, c = est.g_hat, est.c_hat
        sigma2, beta = est.theta_hat.sigma2, est.theta_hat.beta
        trace = [(r.iteration, fmt(r.nll), "" if r.q is None else fmt(r.q), fmt(r.theta.sigma2),
                  fmt(r.theta.beta)) for r in est.trace.records]
        summary = f"{est.trace.termination_reason} after {est.iterations} iterations"
    else:
        est = baseline_fit(data, basis, n)
        g, c = est.g_hat, est.c_hat
        sigma2, beta = est.residual_norm ** 2 / data.N, None
        trace = []
        summary = f"residual norm {est.residual_norm:.6g}"
    g, c = normalize(g, c)
    _write_rows(out / "g_hat.csv", ["k", "g"], [(k + 1, fmt(v)) for k, v in enumerate(g)])
    _write_rows(out / "c_hat.csv", ["i", "c"], [(i + 1, fmt(v)) for i, v in enumerate(c)])
    theta_rows = [(f"c_{i + 1}", fmt(v)) for i, v in enumerate(c)]
    theta_rows += [("sigma2", fmt(sigma2)), ("beta", "" if beta is None else fmt(beta))]
    _write_rows(out / "theta.csv", ["name", "value"], theta_rows)
    _write_rows(out / "trace.csv", ["iteration", "nll", "q", "sigma2", "beta"], trace)
    print(f"{args.estimator}: {summary}; outputs in {out}")
    return EXIT_OK


def cmd_campaign(args):
    experiments = read_config(args.config) if args.config else experiments_from_config({})
    result = run_campaign(experiments, runs=args.runs, seed=args.seed, jobs=args.jobs,
                          tol=args.tol, max_iter=args.max_iter)
    write_campaign(result, args.output)
    if not result.rows:
        log.warning("campaign has no runs; wrote empty result files")
        return EXIT_OK
    rate = result.failure_rate
    print(f"{len(result.rows)} result rows in {args.output} (failure rate {rate:.1%})")
    if rate > MAX_FAILURE_RATE:
        print(f"error: failure rate {rate:.1%} exceeds {MAX_FAILURE_RATE:.0%}", file=sys.stderr)
        return EXIT_CAMPAIGN
    return EXIT_OK


def cmd_plotdata(args):
    runs = [int(r) for r in args.runs.split(",")] if args.runs else None
    written = emit_plotdata(args.campaign_dir, args.output, runs)
    print(f"wrote {len(written)} files")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="kbhammer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw one benchmark dataset (plus ground-truth file)")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--nu", type=int, default=4)
    p.add_argument("--snr", type=float, default=10.0)
    p.add_argument("--N", type=int, default=500)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=7)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("identify", help="identify a Hammerstein model from a dataset file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--n", type=int, default=None, help="impulse-response length")
    p.add_argument("--p", type=int, default=7, help="polynomial basis dimension")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=["kbh", "baseline"], default="kbh")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("campaign", help="run a Monte Carlo campaign")
    p.add_argument("--config", help="key = value file (nu, snr, N, n, p, runs, seed)")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=200)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("plotdata", help="emit boxplot summaries and overlays from a campaign")
    p.add_argument("campaign_dir")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--runs", default=None, help="comma-separated run indices for overlays")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
