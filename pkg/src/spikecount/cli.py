"""Command line interface.

Exit codes: 0 success, 1 input error, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import io
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy import integrate

from . import harness, reference
from .errors import (
    AggregationError,
    ConfigurationError,
    DomainError,
    InputError,
    NumericalError,
)
from .estimators import (
    GAP_DN_CONSTANT,
    GapEstimatorSettings,
    KnSettings,
    estimate_q_known_variance,
    estimate_q_unknown_variance,
    kn_estimate_result,
)
from .model import AspectRatio, SpikeSpec, bulk_edges, mp_density
from .sampling import SampleSeed, read_matrix, read_spectrum, sample_spectrum, spectrum_from_data
from .tracy_widom import tw1_cdf, tw1_cdf_fredholm, tw1_upper_quantile

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

SEED_ENV = "SPIKE_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return harness.DEFAULT_ROOT_SEED
    try:
        seed = int(raw, 0)
    except ValueError:
        raise ConfigurationError(f"{SEED_ENV}={raw!r} is not an integer") from None
    if not 0 <= seed < 2**64:
        raise ConfigurationError(f"{SEED_ENV} must be a 64-bit unsigned integer")
    return seed


def _emit(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _timestamp(args) -> str | None:
    if args.no_timestamp:
        return None
    return "generated " + datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


# ----------------------------------------------------------------------------
# estimate

def cmd_estimate(args) -> int:
    if args.kind == "spectrum":
        spectrum = read_spectrum(args.input)
    else:
        spectrum = spectrum_from_data(read_matrix(args.input))
    p, n = spectrum.p, spectrum.n

    report = {"p": p, "n": n, "estimator": args.estimator}
    if args.estimator == "gap":
        settings = GapEstimatorSettings(s_max=args.smax, dn_override=args.dn, dn_constant=args.dn_const)
        s_max = settings.resolve_s_max(p)
        if args.variance is not None:
            q = estimate_q_known_variance(spectrum, args.variance, settings)
            d = settings.threshold(n, p)
            lam = spectrum.values / args.variance
            gaps = (lam[: s_max + 1] - lam[1 : s_max + 2]).tolist()
            report.update(q_hat=q, sigma2=args.variance, sigma2_estimated=False, dn=d, converged=True)
        else:
            result = estimate_q_unknown_variance(spectrum, settings)
            gaps = result.gaps
            report.update(q_hat=result.q_hat, sigma2=result.sigma2_hat, sigma2_estimated=True,
                          dn=result.threshold_used, converged=result.converged,
                          iterations=[[q, s] for q, s in result.iterations])
        report["s_max"] = s_max
        report["leading_gaps"] = gaps[: min(len(gaps), args.show_gaps)]
    else:
        settings = KnSettings(gamma=args.gamma, k_max=args.kmax, sigma2=args.variance,
                              centering=args.kn_centering)
        result = kn_estimate_result(spectrum, settings)
        report.update(q_hat=result.q_hat, sigma2=result.sigma2_hat,
                      sigma2_estimated=args.variance is None, gamma=args.gamma,
                      s_gamma=result.threshold_used, converged=result.converged)

    if args.json_style:
        text = json.dumps(report, indent=2) + "\n"
    else:
        lines = [f"q_hat: {report['q_hat']}"]
        label = "sigma2_hat" if report["sigma2_estimated"] else "sigma2"
        lines.append(f"{label}: {report['sigma2']:.6g}")
        if args.estimator == "gap":
            lines.append(f"dn: {report['dn']:.6g}")
            lines.append("leading_gaps: " + " ".join(f"{g:.6g}" for g in report["leading_gaps"]))
        else:
            lines.append(f"s_gamma: {report['s_gamma']:.6g} (gamma={args.gamma})")
        if report["sigma2_estimated"]:
            lines.append(f"converged: {str(report['converged']).lower()}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


# ----------------------------------------------------------------------------
# simulate / tables

def _load_experiment(args) -> harness.ExperimentConfig:
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        config = harness.load_config(text)
    elif args.model is not None:
        config = harness.get_config(args.model)
    else:
        raise ConfigurationError("simulate needs --model or --config")
    seed = args.seed if args.seed is not None else (_default_seed() if args.config is None else None)
    return config.with_overrides(replications=args.reps, root_seed=seed)


def cmd_simulate(args) -> int:
    if args.list:
        for config in harness.builtin_configs():
            sizes = " ".join(f"({p},{n})" for p, n in config.sizes)
            sys.stdout.write(f"{config.model_id}\t{config.estimator}\t{sizes}\t{config.description}\n")
        return EXIT_OK
    config = _load_experiment(args)
    results = harness.run_experiment(config, threads=args.threads)
    rows = harness.result_rows(config, results)
    if args.json_style:
        text = harness.format_json(rows)
    else:
        text = harness.format_csv(rows, header_comment=_timestamp(args))
    _emit(text, args.out)
    return EXIT_OK


def table_rows(table_id: str, replications=None, root_seed=None, threads=1) -> list:
    """Run every experiment behind a reference table and grade rows against their bands."""
    rows = []
    for config_id in reference.config_ids(table_id):
        config = harness.get_config(config_id).with_overrides(replications, root_seed)
        targets = [t for t in reference.TABLES[table_id] if t.config_id == config_id]
        sizes = tuple((t.p, t.n) for t in targets)
        config = dataclasses.replace(config, sizes=sizes)
        results = harness.run_experiment(config, threads=threads)
        bands = reference.bands_for(table_id, config_id, config.replications)
        for row, target in zip(harness.result_rows(config, results), targets):
            row["table"] = table_id
            verdicts = []
            for metric, value in target.targets.items():
                row[f"target_{metric}"] = value
                if metric in bands and row.get(metric) is not None:
                    ok = abs(row[metric] - value) <= bands[metric]
                    row[f"band_{metric}"] = bands[metric]
                    row[f"pass_{metric}"] = "pass" if ok else "fail"
                    verdicts.append(ok)
            row["pass"] = "pass" if all(verdicts) else "fail"
            rows.append(row)
    return rows


def _extra_columns(rows) -> list:
    seen = []
    for row in rows:
        for key in row:
            if key.startswith(("target_", "band_", "pass_")) and key not in seen:
                seen.append(key)
    return ["table"] + seen + ["pass"]


def plot_data_csv(rows) -> str:
    """Frequency of a correct count against sample size, one curve per experiment."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model_id", "p", "n", "c", "freq_correct", "target_freq_correct"])
    for row in rows:
        writer.writerow([row["model_id"], row["p"], row["n"], f"{row['c']:.6g}",
                         f"{row['freq_correct']:.6g}", row.get("target_freq_correct", "")])
    return buf.getvalue()


def cmd_tables(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    rows = table_rows(args.table_id, args.reps, seed, args.threads)
    if args.json_style:
        text = harness.format_json(rows)
    else:
        text = harness.format_csv(rows, _extra_columns(rows), header_comment=_timestamp(args))
    _emit(text, args.out)
    if args.plot_data:
        Path(args.plot_data).write_text(plot_data_csv(rows))
    return EXIT_OK


# ----------------------------------------------------------------------------
# mp-check / tw-check

def mp_check_report(c, sigma2, p, n, seed, bins=30) -> dict:
    ratio = AspectRatio(p, n)
    law = bulk_edges(ratio.c if c is None else c, sigma2)
    spectrum = sample_spectrum(SpikeSpec((), sigma2), ratio, SampleSeed(seed, 0))
    lam = spectrum.values
    positive = lam[lam > 0]
    counts, edges = np.histogram(positive, bins=bins, range=(min(law.b_minus, positive.min()),
                                                             max(law.b_plus, positive.max())))
    total = lam.size
    histogram = []
    for left, right, count in zip(edges[:-1], edges[1:], counts):
        width = right - left
        lo, hi = max(left, law.b_minus), min(right, law.b_plus)
        mass = integrate.quad(mp_density, lo, hi, args=(law,))[0] if hi > lo else 0.0
        histogram.append({"bin_left": float(left), "bin_right": float(right),
                          "empirical_density": float(count / (total * width)),
                          "mp_density": mass / width})
    return {
        "c": law.c, "sigma2": sigma2, "p": p, "n": n, "seed": seed,
        "trace_mean": float(lam.mean()),
        "trace_mean_rel_error": float(lam.mean() / sigma2 - 1),
        "largest_eigenvalue": float(lam[0]), "b_plus": law.b_plus,
        "smallest_positive_eigenvalue": float(positive.min()), "b_minus": law.b_minus,
        "histogram": histogram,
    }


def cmd_mp_check(args) -> int:
    p, n = args.p, args.n
    if args.c is not None:
        if p is None and n is not None:
            p = int(round(args.c * n))
        elif n is None and p is not None:
            n = int(round(p / args.c))
        elif p is None and n is None:
            n = 1000
            p = int(round(args.c * n))
        if abs(p / n - args.c) > 1e-9 * max(1.0, args.c):
            raise ConfigurationError(f"--c {args.c} is inconsistent with p/n = {p}/{n}")
    p = 300 if p is None else p
    n = 1000 if n is None else n
    if args.sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {args.sigma2}")
    seed = args.seed if args.seed is not None else _default_seed()
    report = mp_check_report(None, args.sigma2, p, n, seed, args.bins)
    if args.json_style:
        text = json.dumps(report, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["quantity", "empirical", "analytic"])
        writer.writerow(["trace_mean", f"{report['trace_mean']:.6f}", f"{report['sigma2']:.6f}"])
        writer.writerow(["largest_eigenvalue", f"{report['largest_eigenvalue']:.6f}", f"{report['b_plus']:.6f}"])
        writer.writerow(["smallest_positive_eigenvalue", f"{report['smallest_positive_eigenvalue']:.6f}",
                         f"{report['b_minus']:.6f}"])
        buf.write("\n")
        writer.writerow(["bin_left", "bin_right", "empirical_density", "mp_density"])
        for h in report["histogram"]:
            writer.writerow([f"{h['bin_left']:.6f}", f"{h['bin_right']:.6f}",
                             f"{h['empirical_density']:.6f}", f"{h['mp_density']:.6f}"])
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def cmd_tw_check(args) -> int:
    rows = []
    for gamma in args.gamma:
        s = tw1_upper_quantile(gamma)
        F = tw1_cdf(s)
        rows.append({"gamma": gamma, "s": s, "cdf_at_s": F, "round_trip_error": abs(F - (1 - gamma)),
                     "oracle_cdf_at_s": tw1_cdf_fredholm(s)})
    if args.json_style:
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gamma", "s", "cdf_at_s", "round_trip_error", "oracle_cdf_at_s"])
        for r in rows:
            writer.writerow([f"{r['gamma']:.6g}", f"{r['s']:.6f}", f"{r['cdf_at_s']:.8f}",
                             f"{r['round_trip_error']:.3e}", f"{r['oracle_cdf_at_s']:.8f}"])
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


# ----------------------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spikecount", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common_out(p):
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--json-style", action="store_true", help="emit a JSON document")

    def runner_flags(p):
        p.add_argument("--reps", type=_positive_int, default=None, help="replications override")
        p.add_argument("--seed", type=_seed, default=None, help=f"root seed (default: ${SEED_ENV} or built-in)")
        p.add_argument("--threads", type=_positive_int, default=1)
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")

    est = sub.add_parser("estimate", help="estimate the spike count of a data matrix or spectrum")
    est.add_argument("--input", required=True)
    est.add_argument("--kind", choices=("data_matrix", "spectrum"), default="data_matrix")
    est.add_argument("--variance", type=float, default=None, help="known noise variance")
    est.add_argument("--estimator", choices=("gap", "kn"), default="gap")
    est.add_argument("--smax", type=_positive_int, default=None)
    est.add_argument("--dn", type=float, default=None, help="override the gap threshold")
    est.add_argument("--dn-const", type=float, default=GAP_DN_CONSTANT,
                     help="multiplier of sqrt(2 log log n) in the threshold")
    est.add_argument("--gamma", type=float, default=0.005, help="KN test level")
    est.add_argument("--kmax", type=_positive_int, default=None)
    est.add_argument("--kn-centering", choices=("reduced", "full"), default="reduced")
    est.add_argument("--show-gaps", type=int, default=10, help="number of leading gaps to print")
    common_out(est)
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="run one Monte Carlo experiment")
    sim.add_argument("--model", default=None, help="built-in experiment id (see --list)")
    sim.add_argument("--config", default=None, help="TOML experiment file")
    sim.add_argument("--list", action="store_true", help="list built-in experiments")
    runner_flags(sim)
    common_out(sim)
    sim.set_defaults(func=cmd_simulate)

    tab = sub.add_parser("tables", help="reproduce a reference simulation table")
    tab.add_argument("table_id", choices=reference.TABLE_IDS)
    tab.add_argument("--plot-data", default=None, help="also write frequency-vs-size curve data here")
    runner_flags(tab)
    common_out(tab)
    tab.set_defaults(func=cmd_tables)

    mp = sub.add_parser("mp-check", help="compare a null spectrum with the Marchenko-Pastur law")
    mp.add_argument("--c", type=float, default=None)
    mp.add_argument("--sigma2", type=float, default=1.0)
    mp.add_argument("--p", type=_positive_int, default=None)
    mp.add_argument("--n", type=_positive_int, default=None)
    mp.add_argument("--seed", type=_seed, default=None)
    mp.add_argument("--bins", type=_positive_int, default=30)
    common_out(mp)
    mp.set_defaults(func=cmd_mp_check)

    tw = sub.add_parser("tw-check", help="print Tracy-Widom upper quantiles")
    tw.add_argument("--gamma", type=float, nargs="+", default=[0.5, 0.05, 0.005])
    common_out(tw)
    tw.set_defaults(func=cmd_tw_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DomainError) as exc:
        code, err = EXIT_INPUT, exc
    except OSError as exc:
        code, err = EXIT_INPUT, exc
    except (ConfigurationError, AggregationError) as exc:
        code, err = EXIT_CONFIG, exc
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        code, err = EXIT_NUMERIC, exc
    sys.stderr.write(f"spikecount: error: {err}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
