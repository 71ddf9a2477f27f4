"""Command-line interface: ``lifi-uplink <verb> [options]``.

Every verb writes a CSV with a header row to ``--out`` (default stdout).
Exit codes: 0 success, 1 configuration error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from .config import ConfigError, parse_config, parse_range
from .montecarlo import RoomLayout, empirical_factor_cdf, empirical_pathloss_cdf, mc_average_rate
from .modulation import rate_table
from .network_stats import (
    average_rate,
    cdf_xi,
    outage_probability,
    pdf_xi,
    xi_db,
)
from .pathloss_stats import cdf_G, path_loss_levels, pdf_G, pdf_G_atom, r0_peak
from .validation import CSV_HEADER, SUITES, run_suite

VERBS = ("rate-curve", "pathloss-cdf", "pathloss-pdf", "factor-cdf", "factor-pdf", "avg-rate", "simulate", "validate")


def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return repr(x)


def _write(rows, header, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _xi_grid(args, cfg):
    lo, hi, n = parse_range(args.xi_db, "--xi-db") if args.xi_db else cfg.run["xi_db"]
    return np.linspace(lo, hi, n)


def _path_loss_grid(cfg, r, n):
    if r <= 0:
        top = r0_peak(cfg.geom, cfg.optics)
    else:
        top = float(path_loss_levels(r, cfg.geom, cfg.optics, cfg.orient)[4])
    return np.linspace(0.0, 1.02 * top, n)


def cmd_rate_curve(args, cfg):
    db = _xi_grid(args, cfg)
    rate, m, fs = rate_table(10 ** (db / 10), args.mode, cfg.modulation, cfg.chain)
    return ["xi_db", "rate_bps", "M_star", "fs_star"], [
        (d, r, str(int(k)), f) for d, r, k, f in zip(db, rate, m, fs)
    ]


def cmd_pathloss_cdf(args, cfg):
    r = cfg.run["r"]
    T = _path_loss_grid(cfg, r, cfg.run["t_points"])
    ana = np.atleast_1d(cdf_G(T, r, cfg.lambda_b, cfg.geom, cfg.optics, cfg.orient))
    ecdf = empirical_pathloss_cdf(r, cfg.lambda_b, cfg.run["trials"], cfg.run["seed"],
                                  cfg.geom, cfg.optics, cfg.orient, cfg.run["workers"])
    emp = ecdf(T)
    return ["T", "F_analytic", "F_empirical", "abs_err"], list(zip(T, ana, emp, np.abs(ana - emp)))


def cmd_pathloss_pdf(args, cfg):
    r = cfg.run["r"]
    T = _path_loss_grid(cfg, r, cfg.run["t_points"])[1:]
    f = np.atleast_1d(pdf_G(T, r, cfg.lambda_b, cfg.geom, cfg.optics, cfg.orient))
    atom = float(pdf_G_atom(r, cfg.lambda_b, cfg.geom, cfg.optics, cfg.orient))
    rows = [(0.0, math.nan, atom)] + [(t, v, 0.0) for t, v in zip(T, f)]
    return ["T", "pdf_analytic", "atom"], rows


def _factor_setup(cfg, args):
    sc = cfg.scenario()
    db = _xi_grid(args, cfg)
    xi = np.concatenate([[0.0], 10 ** (db / 10)])
    return sc, xi


def cmd_factor_cdf(args, cfg):
    sc, xi = _factor_setup(cfg, args)
    ana = np.atleast_1d(cdf_xi(xi, sc))
    layout = RoomLayout(args.layout or cfg.layout.kind, cfg.layout.side)
    ecdf = empirical_factor_cdf(layout, cfg.run["trials"], cfg.run["seed"], sc, cfg.run["workers"],
                                cfg.shared_blockers)
    return ["xi_db", "F_analytic", "F_empirical"], list(zip(xi_db(xi), ana, ecdf(xi)))


def cmd_factor_pdf(args, cfg):
    sc, xi = _factor_setup(cfg, args)
    xi = xi[1:]
    f = np.atleast_1d(pdf_xi(xi, sc))
    per_db = f * xi * math.log(10) / 10
    rows = [(-math.inf, math.nan, math.nan, outage_probability(sc))]
    rows += [(d, a, b, 0.0) for d, a, b in zip(xi_db(xi), f, per_db)]
    return ["xi_db", "pdf_per_hz", "pdf_per_db", "atom"], rows


def cmd_avg_rate(args, cfg):
    sweep = [float(v) for v in (args.lambda_a or cfg.run["lambda_a_sweep"])]
    layout = RoomLayout(args.layout or "infinite-ppp", cfg.layout.side)
    rows = []
    for i, la in enumerate(sweep):
        sc = cfg.scenario(lambda_a=la)
        ana = average_rate(args.mode, sc, cfg.modulation, cfg.chain)
        mc, se = mc_average_rate(layout, args.mode, cfg.run["trials"], cfg.run["seed"] + i, sc,
                                 cfg.modulation, cfg.chain, cfg.run["workers"], cfg.shared_blockers)
        rows.append((la, ana, mc, se))
    return ["lambda_a", "rate_bps_analytic", "rate_bps_mc", "mc_stderr"], rows


def cmd_simulate(args, cfg):
    sc, xi = _factor_setup(cfg, args)
    layout = RoomLayout(args.layout or cfg.layout.kind, cfg.layout.side)
    ecdf = empirical_factor_cdf(layout, cfg.run["trials"], cfg.run["seed"], sc, cfg.run["workers"],
                                cfg.shared_blockers)
    return ["xi_db", "F_empirical"], list(zip(xi_db(xi), ecdf(xi)))


COMMANDS = {
    "rate-curve": cmd_rate_curve,
    "pathloss-cdf": cmd_pathloss_cdf,
    "pathloss-pdf": cmd_pathloss_pdf,
    "factor-cdf": cmd_factor_cdf,
    "factor-pdf": cmd_factor_pdf,
    "avg-rate": cmd_avg_rate,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lifi-uplink", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--preset", help="named preset applied before the file and overrides")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="dotted-path override, repeatable")
    p.add_argument("--seed", type=int, help="random seed (default 42)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials")
    p.add_argument("--workers", type=int, help="worker threads for Monte Carlo batches")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    p.add_argument("--mode", choices=("adaptive", "fixed"), default="adaptive")
    p.add_argument("--xi-db", help="channel-factor grid lo:hi:n in dB")
    p.add_argument("--layout", choices=("infinite-ppp", "finite-square", "finite-ppp"))
    p.add_argument("--lambda-a", type=float, nargs="+", help="AP densities for avg-rate")
    p.add_argument("--suite", default="all", choices=("all",) + tuple(SUITES),
                   help="validation suite (validate only)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    for flag, key in ((args.seed, "seed"), (args.trials, "trials"), (args.workers, "workers")):
        if flag is not None:
            overrides.append(f"run.{key}={flag}")
    try:
        cfg = parse_config(args.config, args.preset, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.verb == "validate":
        names = list(SUITES) if args.suite == "all" else [args.suite]
        results = []
        for name in names:
            results.extend(run_suite(name, cfg, args.trials, cfg.run["seed"], cfg.run["workers"]))
        for res in results:
            print(res.report_line(), file=sys.stderr)
        _write([r.csv_row() for r in results if r.deterministic], CSV_HEADER, args.out)
        return 0 if all(r.passed for r in results) else 2

    header, rows = COMMANDS[args.verb](args, cfg)
    _write(rows, header, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
