"""Command-line driver.

Exit status: 0 success, 1 unreadable or malformed input (including bad
arguments), 2 infeasible legalization, 3 solver limit reached.  With status 3
and an incumbent, all artifacts are still written.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import __version__, metrics
from .bnb import FEASIBLE_TIMEOUT
from .design import DesignError, parse_design, parse_placement, serialize_design, serialize_placement
from .flow import RunConfig, run_gp, run_init, run_legalize
from .generate import generate_design
from .lpfile import export_lp
from .milp import InfeasibleError, SolveTimeout, build_model, derive_relative_constraints
from .render import render_svg
from .separation import set_threads

log = logging.getLogger("nsplace")

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_TIMEOUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _add_flow_flags(p):
    g = p.add_argument_group("flow parameters")
    g.add_argument("--lns", type=float, default=1.0, help="net separation weight")
    g.add_argument("--ld", type=float, default=1.0, help="density weight")
    g.add_argument("--c", type=float, default=None, help="wirelength smoothing (mm)")
    g.add_argument("--alpha", type=float, default=1e-3, help="learning rate")
    g.add_argument("--momentum", type=float, default=0.9)
    g.add_argument("--iterations", type=int, default=5000, help="global placement budget")
    g.add_argument("--tol", type=float, default=1e-4, help="relative convergence tolerance")
    g.add_argument("--window", type=int, default=20, help="convergence window (iterations)")
    g.add_argument("--refresh", type=int, default=1, help="re-solve separators every k steps")
    g.add_argument("--pair-radius", type=float, default=None,
                   help="only separate nets whose boxes come this close (mm)")
    g.add_argument("--bin-size", type=float, default=None, help="density bin side (mm)")
    g.add_argument("--k", type=float, default=None,
                   help="relative-constraint gap threshold (mm); default 5%% of the board")
    g.add_argument("--no-rel-constraints", action="store_true",
                   help="solve the legalization MILP without derived relative constraints")
    g.add_argument("--time-cap", type=float, default=4 * 3600.0, help="MILP time cap (s)")
    g.add_argument("--node-limit", type=int, default=None, help="MILP node limit")
    g.add_argument("--seed", type=int, default=0)


def _config(a):
    return RunConfig(lambda_ns=a.lns, lambda_d=a.ld, c=a.c, alpha=a.alpha, momentum=a.momentum,
                     iterations=a.iterations, tol=a.tol, window=a.window, refresh=a.refresh,
                     k=a.k, bin_size=a.bin_size, time_cap=a.time_cap, node_limit=a.node_limit,
                     seed=a.seed, pair_radius=a.pair_radius,
                     use_relations=not a.no_rel_constraints)


def build_parser():
    p = _Parser(prog="nsplace", description="PCB component placement with net separation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for separator solves (default: NSPLACE_THREADS or all cores)")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic design")
    g.add_argument("--components", type=int, required=True)
    g.add_argument("--nets", type=int, required=True)
    g.add_argument("--width", type=float, required=True)
    g.add_argument("--height", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--utilization", type=float, default=0.5)
    g.add_argument("--dim-range", type=float, nargs=2, default=(1.0, 10.0), metavar=("MIN", "MAX"))
    g.add_argument("--pins-range", type=int, nargs=2, default=(2, 6), metavar=("MIN", "MAX"))
    g.add_argument("--fixed", type=int, default=0, help="number of locked components")
    g.add_argument("--layers", type=int, default=2)
    g.add_argument("-o", "--output", required=True)

    s = sub.add_parser("init", help="spectral seed plus orientation search")
    s.add_argument("design")
    s.add_argument("-o", "--output", required=True)
    _add_flow_flags(s)

    s = sub.add_parser("gp", help="global placement from a seed placement")
    s.add_argument("design")
    s.add_argument("placement")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--trace", help="per-iteration 'iter F wa ns d' file")
    _add_flow_flags(s)

    s = sub.add_parser("legalize", help="MILP legalization of a placement")
    s.add_argument("design")
    s.add_argument("placement")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--lp-out", help="also write the model in LP format")
    _add_flow_flags(s)

    s = sub.add_parser("eval", help="print metrics of a placement")
    s.add_argument("design")
    s.add_argument("placement")
    s.add_argument("--csv", help="write metric,value rows here")
    s.add_argument("--baseline", help="placement to report percent improvement against")

    s = sub.add_parser("render", help="SVG view of a placement")
    s.add_argument("design")
    s.add_argument("placement")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--hulls", action="store_true", help="draw net pin hulls")

    s = sub.add_parser("place", help="full flow: init, global placement, legalization, report")
    s.add_argument("design")
    s.add_argument("-o", "--output", required=True, help="placement file")
    s.add_argument("--report", help="CSV report file")
    s.add_argument("--svg", help="SVG rendering file")
    s.add_argument("--trace", help="global placement trace file")
    _add_flow_flags(s)
    return p


def _read_design(path):
    return parse_design(Path(path).read_text())


def _read_placement(path, design):
    return parse_placement(Path(path).read_text(), design)


def _write(path, text):
    Path(path).write_text(text)


def _legalize(design, placement, cfg, lp_out=None):
    """Returns ``(placement or None, exit status)``."""
    if lp_out:
        rels = derive_relative_constraints(placement, design, cfg.k) if cfg.use_relations else []
        _write(lp_out, export_lp(build_model(design, rels)))
    try:
        res = run_legalize(design, placement, cfg)
    except InfeasibleError as e:
        print(f"nsplace: {e}", file=sys.stderr)
        return None, EXIT_INFEASIBLE
    except SolveTimeout as e:
        print(f"nsplace: {e}", file=sys.stderr)
        return None, EXIT_TIMEOUT
    if res.status == FEASIBLE_TIMEOUT:
        print(f"nsplace: MILP limit reached after {res.nodes} nodes; keeping the best solution",
              file=sys.stderr)
        return res.placement, EXIT_TIMEOUT
    return res.placement, EXIT_OK


def _run(a):
    if a.cmd == "gen":
        d = generate_design(a.components, a.nets, a.width, a.height, seed=a.seed,
                            utilization=a.utilization, dim_range=tuple(a.dim_range),
                            n_fixed=a.fixed, pins_range=tuple(a.pins_range), layers=a.layers)
        _write(a.output, serialize_design(d))
        return EXIT_OK

    design = _read_design(a.design)
    if a.cmd == "init":
        _write(a.output, serialize_placement(run_init(design, _config(a)), design))
        return EXIT_OK
    if a.cmd == "gp":
        seed = _read_placement(a.placement, design)
        cfg = _config(a)
        if a.trace:
            with open(a.trace, "w") as tr:
                p = run_gp(design, seed, cfg, tr)
        else:
            p = run_gp(design, seed, cfg)
        _write(a.output, serialize_placement(p, design))
        return EXIT_OK
    if a.cmd == "legalize":
        gp = _read_placement(a.placement, design)
        p, status = _legalize(design, gp, _config(a), a.lp_out)
        if p is not None:
            _write(a.output, serialize_placement(p, design))
        return status
    if a.cmd == "eval":
        p = _read_placement(a.placement, design)
        base = None
        if a.baseline:
            base, _ = metrics.report(design, _read_placement(a.baseline, design))
        rep, _ = metrics.report(design, p)
        sys.stdout.write(rep.table(base))
        if a.csv:
            _write(a.csv, rep.to_csv(base))
        return EXIT_OK
    if a.cmd == "render":
        p = _read_placement(a.placement, design)
        _write(a.output, render_svg(design, p, hulls=a.hulls))
        return EXIT_OK
    if a.cmd == "place":
        cfg = _config(a)
        timings = {}
        t0 = time.perf_counter()
        p0 = run_init(design, cfg)
        timings["init"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        if a.trace:
            with open(a.trace, "w") as tr:
                p1 = run_gp(design, p0, cfg, tr)
        else:
            p1 = run_gp(design, p0, cfg)
        timings["gp"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        p2, status = _legalize(design, p1, cfg)
        timings["legalize"] = time.perf_counter() - t0
        if p2 is None:
            return status
        _write(a.output, serialize_placement(p2, design))
        rep, table = metrics.report(design, p2, timings)
        sys.stdout.write(table)
        if a.report:
            _write(a.report, rep.to_csv())
        if a.svg:
            _write(a.svg, render_svg(design, p2))
        return status
    raise AssertionError(a.cmd)


def main(argv=None):
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(a.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if a.threads is not None:
        if a.threads < 1:
            parser.error("--threads must be at least 1")
        set_threads(a.threads)
    try:
        return _run(a)
    except (DesignError, OSError, UnicodeDecodeError) as e:
        print(f"nsplace: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        # Invalid parameter values surface here (e.g. a nonpositive learning rate).
        print(f"nsplace: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
