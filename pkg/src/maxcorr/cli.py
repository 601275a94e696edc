"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 data degeneracy (zero-variance
column), 4 assertion/verdict failure, 5 Monte Carlo refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import limit_sims, moment_oracle, stats_core
from .dataio import DataFormatError, read_csv_matrix, write_upper_triangle_csv
from .distributions import parse_distribution
from .rng import THREADS_ENV, default_threads
from .seqkit import parse_sequence

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_ASSERT, EXIT_REFUSED = 0, 2, 3, 4, 5


class InputError(Exception):
    pass


def _fail(msg: str, code: int = EXIT_INPUT) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    return lo, hi


def _threads(args) -> int:
    return args.threads if args.threads is not None else default_threads()


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- stat --------------------------------------------------------------------


def cmd_stat(args) -> int:
    try:
        x, _ = read_csv_matrix(args.input)
        x = stats_core.as_data_matrix(x, min_rows=2, min_cols=2)
    except (OSError, DataFormatError, ValueError) as exc:
        return _fail(str(exc))
    threads = _threads(args)
    try:
        if args.statistic == "W":
            res = stats_core.w_statistic(x, workers=threads)
            print(f"W={res.value!r} i={res.i} j={res.j}")
            return EXIT_OK
        z, report = stats_core.standardize_columns(x, args.zero_variance)
    except stats_core.ZeroVarianceError as exc:
        return _fail(f"{exc} (use --zero-variance drop to skip them)", EXIT_DEGENERATE)
    if report.dropped:
        print(f"dropped zero-variance columns: {report.dropped}", file=sys.stderr)
    if z.shape[1] < 2:
        return _fail("fewer than two usable columns", EXIT_DEGENERATE)
    kept = report.kept
    if args.statistic == "L":
        res = stats_core.l_statistic(z, workers=threads)
        print(f"L={res.value!r} i={kept[res.i]} j={kept[res.j]}")
        return EXIT_OK
    corr = stats_core.correlation_matrix(z, workers=threads)
    # report pairs in the original column numbering
    pairs = [(kept[i], kept[j], v) for i, j, v in corr.pairs()]
    if args.output:
        write_upper_triangle_csv(pairs, args.output)
        print(f"wrote {args.output}")
    else:
        print("i,j,rho")
        for i, j, v in pairs:
            print(f"{i},{j},{v!r}")
    return EXIT_OK


# -- simulate ----------------------------------------------------------------

_SIM_FLAGS = {
    "dist": "dist_u",
    "dist_v": "dist_v",
    "c": "c",
    "n": "n_grid",
    "reps": "reps",
    "alpha": "alpha",
    "norm": "normalization",
    "seed": "master_seed",
}


def _load_sim_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    if "subcommand" in data:  # a run manifest
        data = data.get("config", {})
    return dict(data)


def resolve_sim_config(args) -> tuple[limit_sims.SimConfig, dict]:
    """Merge config file and flags (flags win). Returns the SimConfig and check options."""
    raw = _load_sim_config(args.config) if args.config else {}
    check = {k: raw.pop(k) for k in ("expect", "band", "slack") if k in raw}
    mode = raw.pop("mode", None)
    for flag, key in _SIM_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            raw[key] = value
    if args.mode is not None:
        mode = args.mode
    if mode == "W":
        raw["dist_v"] = None
    elif mode == "T" and raw.get("dist_v") is None:
        raise InputError("--mode T needs --dist-v")
    for key in ("expect", "band", "slack"):
        value = getattr(args, key)
        if value is not None:
            check[key] = list(value) if key == "band" else value
    if "master_seed" not in raw:
        raise InputError("--seed is required (no silent nondeterminism)")
    missing = [k for k in ("dist_u", "n_grid", "reps") if k not in raw]
    if missing:
        raise InputError(f"missing settings: {', '.join(missing)}")
    try:
        cfg = limit_sims.SimConfig.from_dict(raw)
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(str(exc)) from None
    if "expect" in check and check["expect"] not in limit_sims.EXPECTATIONS:
        raise InputError(f"--expect must be one of {limit_sims.EXPECTATIONS}")
    if "expect" in check:
        check.setdefault("band", [1.75, 2.25])
        check.setdefault("slack", 0.25)
    if "expect" in check and len(cfg.n_grid) < 3:
        raise InputError("--expect needs at least 3 grid points")
    return cfg, check


def cmd_simulate(args) -> int:
    try:
        cfg, check = resolve_sim_config(args)
    except InputError as exc:
        return _fail(str(exc))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        result = limit_sims.run_experiment(cfg, workers=_threads(args))
    except limit_sims.InfeasibleConfig as exc:
        return _fail(str(exc))
    outputs = {
        "records": "records.csv",
        "summary": "summary.csv",
        "plot_data": "plot.dat",
        "manifest": "manifest.json",
    }
    limit_sims.write_records_csv(result, out_dir / outputs["records"])
    limit_sims.write_summary_csv(result, out_dir / outputs["summary"])
    limit_sims.write_plot_data(result, out_dir / outputs["plot_data"])

    verdict = None
    if "expect" in check:
        verdict = limit_sims.trend_assert(result, check["expect"], band=tuple(check["band"]),
                                          slack=check["slack"])
    manifest = {
        "subcommand": "simulate",
        "version": __version__,
        "master_seed": cfg.master_seed,
        "config": {**cfg.to_dict(), **check},
        "outputs": outputs,
    }
    if verdict is not None:
        manifest["trend"] = verdict.to_dict()
    _write_json(manifest, out_dir / outputs["manifest"])

    for row in result.summary:
        print(f"n={row.n:<8d} median={row.median:.6f} q05={row.q05:.6f} q95={row.q95:.6f}")
    if verdict is None:
        return EXIT_OK
    print(f"{verdict.expectation}: {'PASS' if verdict.passed else 'FAIL'} ({verdict.detail})")
    return EXIT_OK if verdict.passed else EXIT_ASSERT


# -- oracle ------------------------------------------------------------------


def cmd_oracle(args) -> int:
    try:
        dist = parse_distribution(args.dist)
        if args.check == "sandwich":
            report = moment_oracle.sandwich_check(
                dist, parse_sequence(args.alpha_seq), parse_sequence(args.beta_seq), args.N)
            ok = report.verdict == "holds"
        elif args.check == "series":
            report = moment_oracle.series_classify(dist, args.alpha, args.beta)
            ok = report.agree
        elif args.check == "sqrt-nlogn":
            report = moment_oracle.sqrt_nlogn_condition(dist, args.m)
            ok = report.agree
        else:
            if args.seed is None:
                return _fail("--seed is required for lemma1 (no silent nondeterminism)")
            report = moment_oracle.lemma1_ratio(
                dist, args.m, parse_sequence(args.u), args.n, args.reps, args.seed,
                workers=_threads(args))
            # sub-additivity: the max event is covered by the union of the subset events
            ok = report.ratio <= 1 + 3 * report.ci_half_width
    except moment_oracle.MonteCarloRefused as exc:
        return _fail(f"refused: {exc}", EXIT_REFUSED)
    except ValueError as exc:
        return _fail(str(exc))
    payload = {"check": args.check, "dist": dist.to_text(), **report.to_dict()}
    _write_json(payload, args.output)
    return EXIT_OK if ok else EXIT_ASSERT


# -- parser ------------------------------------------------------------------


def _add_threads(p):
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1); never changes results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxcorr",
        description="Max-entry statistics of sample correlation matrices, moment/series "
                    "oracles and limit-theorem simulations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}",
                        help="show the version and exit")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("stat", help="compute L_n, W_n or the correlation matrix of a CSV file",
                       description="Compute a statistic of an n x p CSV matrix (rows = samples). "
                                   "Column indices in the output are 0-based.")
    p.add_argument("input", help="CSV file; comma-delimited, optional header row")
    p.add_argument("--statistic", choices=["L", "W", "corr"], default="L",
                   help="L: max |correlation|; W: max |uncentered cross product|; "
                        "corr: upper-triangle correlations (default: L)")
    p.add_argument("--zero-variance", choices=["error", "drop"], default="error",
                   help="policy for constant columns (default: error, exit 3)")
    p.add_argument("--output", default=None,
                   help="where --statistic corr writes its CSV (default: stdout)")
    _add_threads(p)
    p.set_defaults(func=cmd_stat)

    p = sub.add_parser("simulate", help="Monte Carlo run of W_n or T_n ratios over a grid of n",
                       description="Run a Monte Carlo experiment. Flags override values from "
                                   "--config; the resolved configuration is written to "
                                   "manifest.json next to the results.")
    p.add_argument("--config", default=None,
                   help="JSON config (SimConfig fields, or a previous manifest.json)")
    p.add_argument("--dist", default=None,
                   help="distribution of the entries (of U in T mode), e.g. 'pareto(a=3.2)'")
    p.add_argument("--dist-v", default=None, help="distribution of V entries (T mode)")
    p.add_argument("--mode", choices=["W", "T"], default=None,
                   help="W: one array, W_n; T: two arrays, T_n (default: W unless --dist-v)")
    p.add_argument("--norm", choices=list(limit_sims.NORMALIZATIONS), default=None,
                   help="normalizer: power (n^alpha) or sqrt-nlogn (default: sqrt-nlogn)")
    p.add_argument("--alpha", type=float, default=None,
                   help="exponent for --norm power, 1/2 < alpha <= 1")
    p.add_argument("--c", type=float, default=None, help="p_n = round(c * n) (default: 1)")
    p.add_argument("--n", type=_int_list, default=None,
                   help="comma-separated, strictly increasing sample sizes")
    p.add_argument("--reps", type=int, default=None, help="replications per grid point")
    p.add_argument("--seed", type=int, default=None, help="master seed (required)")
    p.add_argument("--expect", choices=list(limit_sims.EXPECTATIONS), default=None,
                   help="trend assertion to check; failure exits 4")
    p.add_argument("--band", type=_band, default=None,
                   help="LO,HI band for --expect to_two (default: 1.75,2.25)")
    p.add_argument("--slack", type=float, default=None,
                   help="slack above 2 for --expect bounded_by_two (default: 0.25)")
    p.add_argument("--out-dir", default=".",
                   help="directory for records.csv, summary.csv, plot.dat, manifest.json")
    _add_threads(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="moment/series equivalence checks (JSON report)",
                       description="Run one oracle check and print a JSON report. Exit 0 when "
                                   "the check holds or the two sides agree, 4 otherwise.")
    checks = p.add_subparsers(dest="check", required=True, metavar="CHECK")

    q = checks.add_parser("sandwich", help="two-sided bound of E|X| by a weighted tail series",
                          description="Check c^-1 S <= E|X| <= beta_1 + (B+1) c S with "
                                      "S = sum alpha_n P(|X| >= beta_n).")
    q.add_argument("--dist", required=True, help="distribution, e.g. 'pareto(a=2)'")
    q.add_argument("--alpha-seq", default="const1",
                   help="weights alpha_n: const<k>, linear, power(e), power-log(e), explicit(...)")
    q.add_argument("--beta-seq", default="linear", help="thresholds beta_n, same forms as --alpha-seq")
    q.add_argument("--N", type=int, default=10**6, help="number of series terms (default: 10^6)")
    q.add_argument("--output", default=None, help="write the JSON report here (default: stdout)")
    q.set_defaults(func=cmd_oracle)

    q = checks.add_parser("series", help="sum n^alpha P(|X|>n^beta) vs E|X|^((alpha+1)/beta)",
                          description="Classify the series and the moment separately and "
                                      "report whether they agree.")
    q.add_argument("--dist", required=True, help="distribution, e.g. 'pareto(a=3)'")
    q.add_argument("--alpha", type=float, required=True, help="weight exponent, > 0")
    q.add_argument("--beta", type=float, required=True, help="threshold exponent, > 0")
    q.add_argument("--output", default=None, help="write the JSON report here (default: stdout)")
    q.set_defaults(func=cmd_oracle)

    q = checks.add_parser("lemma1", help="Monte Carlo max-product vs union-bound ratio",
                          description="Estimate P(max over m-subsets of prod |X| >= u_n) / "
                                      "[C(n,m) P(prod of m >= u_n)]. Exit 5 when too few "
                                      "hits are expected.")
    q.add_argument("--dist", required=True, help="distribution, e.g. 'pareto(a=3.2)'")
    q.add_argument("--m", type=int, default=2, help="number of factors (default: 2)")
    q.add_argument("--u", default="linear", help="threshold sequence u_n (default: linear)")
    q.add_argument("--n", type=int, required=True, help="number of iid values per replication")
    q.add_argument("--reps", type=int, default=10**6, help="replications (default: 10^6)")
    q.add_argument("--seed", type=int, default=None, help="master seed (required)")
    q.add_argument("--output", default=None, help="write the JSON report here (default: stdout)")
    _add_threads(q)
    q.set_defaults(func=cmd_oracle)

    q = checks.add_parser("sqrt-nlogn", help="series at sqrt(n ln n) vs log-adjusted moment",
                          description="Compare sum n^m P(prod of m >= sqrt(n ln n)) with "
                                      "E[prod^(2(m+1)) / ln(e+prod)^(m+1)].")
    q.add_argument("--dist", required=True, help="distribution, e.g. 'pareto(a=7)'")
    q.add_argument("--m", type=int, default=2, help="number of factors (default: 2)")
    q.add_argument("--output", default=None, help="write the JSON report here (default: stdout)")
    q.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
