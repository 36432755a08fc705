"""Command-line interface tying the analysis and simulation together.

Subcommands:
  analyze    critical time + criterion classification for a graph pair
  constants  the scalar constants and small closed-form tables
  walk       sampler diagnostics, Monte Carlo f, success lower bound
  simulate   first-passage ensembles on implicit power graphs
  verify     run the full acceptance suite

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .critical import (critical_time, diagonal_time_constant,
                       directed_chain_ratio, solve_alpha_star, solve_theta)
from .criterion import POSITIVE, not_sharp_margin, sup_f_classify
from .errors import (FrontierExhaustedError, GraphError,
                     InvalidDistributionError, NoMarginError, NumericalError,
                     PowerFppError, TolUnreachableError, UnreachableError)
from .graphs import build_graph, load_graph
from .reports import emit_report
from .simulate import make_weight_model, run_ensemble
from .walk import get_sampler, mc_f_estimate, success_lower_bound

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, InvalidDistributionError, UnreachableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (TolUnreachableError, FrontierExhaustedError, NoMarginError,
            NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PowerFppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="powerfpp")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="critical time and criterion classification")
    pa.add_argument("--graph", required=True, help="graph JSON file")
    pa.add_argument("--from", dest="src", required=True)
    pa.add_argument("--to", dest="dst", required=True)
    pa.add_argument("--tol", type=float, default=1e-10)
    pa.add_argument("--grid", type=int, default=24)
    pa.add_argument("--depth", type=int, default=12)
    pa.add_argument("--margin", action="store_true",
                    help="extract a margin certificate when POSITIVE")
    pa.add_argument("--out", default="-")
    pa.add_argument("--format", choices=["json", "csv"], default="json",
                    help="csv emits the evaluated criterion grid")
    pa.set_defaults(func=cmd_analyze)

    pc = sub.add_parser("constants", help="scalar constants and tables")
    pc.add_argument("--rho", type=float, default=1.0)
    pc.add_argument("--diagonal", action="store_true")
    pc.add_argument("--theta-grid", type=int, default=0,
                    help="emit a table of the hypercube distance constant")
    pc.add_argument("--kq", type=int, default=0,
                    help="emit critical times of complete graphs up to q")
    pc.add_argument("--directed-chain", type=int, default=0,
                    help="emit t*/k for the directed chain up to k")
    pc.add_argument("--out", default="-")
    pc.set_defaults(func=cmd_constants)

    pw = sub.add_parser("walk", help="conditioned-walk diagnostics")
    pw.add_argument("--graph", required=True)
    pw.add_argument("--from", dest="src", required=True)
    pw.add_argument("--to", dest="dst", required=True)
    pw.add_argument("--samples", type=int, default=10000)
    pw.add_argument("--seed", type=int, default=0)
    pw.add_argument("--mc-f", default=None, metavar="S,T",
                    help="Monte Carlo estimate of the criterion function")
    pw.add_argument("--success-lb", type=int, default=0, metavar="N",
                    help="lower-bound functional on the N-fold power")
    pw.add_argument("--out", default="-")
    pw.set_defaults(func=cmd_walk)

    ps = sub.add_parser("simulate", help="first-passage ensembles")
    ps.add_argument("--graph", required=True)
    ps.add_argument("--from", dest="src", required=True)
    ps.add_argument("--to", dest="dst", required=True)
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--replicas", type=int, default=100)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--weights", default="exp:1")
    ps.add_argument("--hamming", type=int, default=None)
    ps.add_argument("--out", default="-")
    ps.set_defaults(func=cmd_simulate)

    pv = sub.add_parser("verify", help="run the acceptance suite")
    pv.add_argument("--only", default=None,
                    help="comma-separated criterion numbers")
    pv.set_defaults(func=cmd_verify)
    return p


def cmd_analyze(args) -> int:
    g = load_graph(args.graph)
    doc = {"tool_version": __version__, "graph": args.graph,
           "from": args.src, "to": args.dst}
    if args.src == args.dst:
        doc["t_star"] = 0.0
        doc["reachable"] = True
        emit_report(doc, "json", args.out)
        return EXIT_OK
    try:
        ts = critical_time(g, args.src, args.dst, tol=min(args.tol, 1e-10))
    except UnreachableError:
        doc["t_star"] = None
        doc["reachable"] = False
        emit_report(doc, "json", args.out)
        return EXIT_OK
    doc["t_star"] = ts.t_star
    doc["t_star_err"] = ts.abs_err
    doc["reachable"] = True
    report = sup_f_classify(g, args.src, args.dst, t_star=ts,
                            grid=args.grid, max_depth=args.depth)
    doc.update(report.to_dict())
    if args.margin and report.classification == POSITIVE:
        cert = not_sharp_margin(g, args.src, args.dst, report)
        doc["margin"] = {"s": cert.s, "t": cert.t, "alpha": cert.alpha,
                         "c": cert.c, "max_tilted_sum": cert.max_tilted_sum}
    if args.format == "csv":
        rows = [(s, t, val, err) for (s, t, val, err) in report.points]
        emit_report((["s", "t", "f_value", "f_err"], rows), "csv", args.out)
    else:
        emit_report(doc, "json", args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    doc = {"tool_version": __version__}
    doc["alpha_star"] = solve_alpha_star()
    doc["diagonal_constant"] = diagonal_time_constant(rho=args.rho)
    doc["rho"] = args.rho
    if args.theta_grid:
        doc["theta"] = [{"x": i / args.theta_grid,
                         "value": solve_theta(i / args.theta_grid)}
                        for i in range(args.theta_grid + 1)]
    if args.kq:
        from .graphs import complete_graph
        table = []
        for q in range(2, args.kq + 1):
            ts = critical_time(complete_graph(q), "0", "1", tol=1e-12)
            table.append({"q": q, "t_star": ts.t_star,
                          "lower": math.log(q) / (q - 1),
                          "upper": math.log(q + 1) / (q - 1)})
        doc["kq_critical_times"] = table
    if args.directed_chain:
        doc["directed_chain_ratio"] = [
            {"k": k, "ratio": directed_chain_ratio(k)}
            for k in range(1, args.directed_chain + 1)]
    emit_report(doc, "json", args.out)
    return EXIT_OK


def cmd_walk(args) -> int:
    g = load_graph(args.graph)
    ts = critical_time(g, args.src, args.dst, tol=1e-12)
    rng = np.random.default_rng(args.seed)
    doc = {"tool_version": __version__, "graph": args.graph,
           "from": args.src, "to": args.dst, "t_star": ts.t_star,
           "seed": args.seed, "samples": args.samples}
    sampler = get_sampler(g, args.src, args.dst, ts.t_star)
    doc["jump_length_law"] = {
        "lengths": sampler.law.lengths.tolist(),
        "probabilities": sampler.law.probabilities.tolist(),
        "tail_mass": sampler.law.tail_mass,
    }
    counts: dict = {}
    for _ in range(args.samples):
        jumps = sampler.sample(rng).num_jumps
        counts[jumps] = counts.get(jumps, 0) + 1
    doc["empirical_lengths"] = {str(k): v / args.samples
                                for k, v in sorted(counts.items())}
    if args.mc_f:
        s, t = (float(x) for x in args.mc_f.split(","))
        est = mc_f_estimate(g, args.src, args.dst, s, t, args.samples, rng,
                            t_star=ts.t_star)
        doc["mc_f"] = {"s": s, "t": t, "estimate": est.estimate,
                       "stderr": est.stderr}
    if args.success_lb:
        est = success_lower_bound(g, args.src, args.dst, args.success_lb,
                                  ts.t_star, args.samples, rng)
        doc["success_lower_bound"] = {"n": args.success_lb,
                                      "estimate": est.estimate,
                                      "stderr": est.stderr}
    emit_report(doc, "json", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = load_graph(args.graph)
    model = make_weight_model(args.weights)
    summary = run_ensemble(g, args.n, args.src, args.dst, model,
                           replicas=args.replicas, seed=args.seed,
                           hamming_k=args.hamming)
    doc = summary.to_dict()
    doc["tool_version"] = __version__
    emit_report(doc, "json", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_acceptance
    only = None
    if args.only:
        only = {int(x) for x in args.only.split(",")}
    results = run_acceptance(only=only)
    failed = [r for r in results if not r.passed]
    return EXIT_OK if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
