"""Command line: ``mgrit-nn {sweep,speedup,verify,train-serial}``.

Output files land in ``--out`` (a ``.csv`` path or a directory), defaulting
to ``$MGRIT_NN_OUT`` or the working directory.  Every CSV starts with ``#``
lines holding the fully resolved configuration.
"""

import argparse
import csv
import io
import logging
import os
import sys
import time

from . import mgrit, oracle, perf
from .config import CONFIG_KEYS, PROBLEMS, coerce, make_config, read_config_file
from .network import init_weights, mean_abs_error
from .schedules import PRESETS, ConfigError

log = logging.getLogger("mgrit_nn")

OUT_ENV = "MGRIT_NN_OUT"
SWEEP_COLUMNS = ("N0", "levels", "cycle", "relaxation", "preset", "alpha_b", "alpha_max",
                 "iters", "rho", "converged", "wall_ms")


def run_sweep(config, on_row=None):
    """Solve once per N0; returns a list of row dicts in SWEEP_COLUMNS order."""
    data = config.dataset()
    preset = config.solver_preset()
    rows = []
    for n0 in config.n0:
        h, params = config.build(n0, data)
        t0 = time.perf_counter()
        rep = mgrit.solve(h, params)
        wall = 1e3 * (time.perf_counter() - t0)
        row = {
            "N0": n0, "levels": h.n_levels, "cycle": config.cycle,
            "relaxation": config.relax, "preset": config.preset,
            "alpha_b": preset.schedule.base, "alpha_max": preset.schedule.cap,
            "iters": rep.iters_label,
            "rho": "*" if not rep.converged or rep.rho is None else "%.6f" % rep.rho,
            "converged": rep.converged, "wall_ms": "%.1f" % wall,
            "report": rep,
        }
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


def header_lines(command, config):
    lines = ["# mgrit-nn %s" % command]
    for key, value in sorted(config.resolved().items()):
        lines.append("# %s = %s" % (key, value))
    return "\n".join(lines) + "\n"


def format_sweep_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow([r[c] for c in SWEEP_COLUMNS])
    return buf.getvalue()


def read_csv_rows(path):
    with open(path) as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def read_csv_header(path):
    """The ``# key = value`` lines of an output CSV, as config values."""
    values = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].partition("=")
            key = key.strip()
            if sep and key in CONFIG_KEYS:
                values[key] = coerce(key, value.strip())
    return values


def parse_iters(label):
    return int(str(label).rstrip("+"))


def run_speedup(config, iters=None, sweep_rows=None):
    """Speedup rows from explicit iteration counts, sweep rows, or a fresh sweep."""
    entries = []
    if sweep_rows is not None:
        for r in sweep_rows:
            entries.append((int(r["N0"]), int(r["levels"]), parse_iters(r["iters"]), r["cycle"]))
    else:
        if iters is None:
            iters = [parse_iters(r["iters"]) for r in run_sweep(config)]
        if len(iters) != len(config.n0):
            raise ConfigError("iters: got %d counts for %d N0 values"
                              % (len(iters), len(config.n0)))
        p = config.solver_preset()
        for n0, niter in zip(config.n0, iters):
            levels = len(mgrit.level_sizes(n0, p.m, config.max_coarse,
                                           two_level=config.cycle == "two-level"))
            entries.append((n0, levels, niter, config.cycle))
    return perf.speedup_rows(entries)


def format_table(rows):
    """Rows in the layout of a convergence table: N0 / Iters / rho."""
    width = max(6, *(len(str(r["N0"])) + 1 for r in rows))
    cells = {
        "N0": [str(r["N0"]) for r in rows],
        "Iters": [r["iters"] for r in rows],
        "rho": [r["rho"] if r["rho"] == "*" else "%.2f" % float(r["rho"]) for r in rows],
    }
    return "\n".join("%-6s|" % name + "".join(c.rjust(width) for c in vals)
                     for name, vals in cells.items())


def output_path(out, default_name):
    if out is None:
        out = os.environ.get(OUT_ENV, ".")
    if out.endswith(".csv"):
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return out
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, default_name)


def _config_from_args(args, base=None):
    file_values = dict(base or {})
    if args.config:
        file_values.update(read_config_file(args.config))
    overrides = {
        "preset": args.preset, "problem": args.problem, "n0": args.n0, "cycle": args.cycle,
        "relax": args.relax, "alpha_b": args.alpha_b, "alpha_max": args.alpha_max,
        "factor": args.factor, "m": args.m, "policy": args.policy, "seed": args.seed,
        "init": args.init, "max_coarse": args.max_coarse,
        "tol_coefficient": args.tol, "max_iters": args.max_iters, "workers": args.workers,
        "count": args.count, "bits": args.bits,
    }
    return make_config(file_values, overrides)


def cmd_sweep(args):
    config = _config_from_args(args)

    def show(row):
        log.info("N0=%d levels=%d iters=%s rho=%s (%.0f ms)", row["N0"], row["levels"],
                 row["iters"], row["rho"], float(row["wall_ms"]))
        if args.dump_dir:
            os.makedirs(args.dump_dir, exist_ok=True)
            mgrit.dump_checkpoint(row["report"].solution,
                                  os.path.join(args.dump_dir, "solution-N0-%d.txt" % row["N0"]))

    rows = run_sweep(config, on_row=show)
    path = output_path(args.out, "sweep-%s-%s-%s.csv" % (config.preset, config.problem,
                                                          config.cycle))
    with open(path, "w") as f:
        f.write(header_lines("sweep", config))
        f.write(format_sweep_csv(rows))
    print(format_table(rows))
    print("wrote %s" % path)
    return 0


def cmd_speedup(args):
    base = read_csv_header(args.from_csv) if args.from_csv else None
    config = _config_from_args(args, base)
    if args.from_csv:
        rows = run_speedup(config, sweep_rows=read_csv_rows(args.from_csv))
    else:
        iters = [int(v) for v in args.iters.split(",")] if args.iters else None
        rows = run_speedup(config, iters=iters)
    path = output_path(args.out, "speedup-%s-%s-%s.csv" % (config.preset, config.problem,
                                                            config.cycle))
    text = perf.format_speedup_csv(rows)
    with open(path, "w") as f:
        f.write(header_lines("speedup", config))
        f.write(text)
    sys.stdout.write(text)
    print("wrote %s" % path)
    return 0


def cmd_verify(args):
    results = oracle.verification_suite(seed=args.seed if args.seed is not None else 1,
                                        gradient_perturbation=args.inject_gradient_error)
    for r in results:
        print("%s  %-16s %s  [%.1fs]" % ("PASS" if r.passed else "FAIL", r.name, r.detail,
                                        r.seconds))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("%d check(s) failed: %s" % (len(failed), ", ".join(failed)))
        return 1
    print("all %d checks passed" % len(results))
    return 0


def cmd_train_serial(args):
    config = _config_from_args(args)
    data = config.dataset()
    topo = config.topology()
    alpha = args.alpha if args.alpha is not None else config.solver_preset().schedule.base
    w0 = init_weights(topo, config.seed, config.init_scheme())
    batch = data.batch()
    kept = []
    for j, w in oracle.iterate_training(topo, data, alpha, args.steps, w0,
                                        config.solver_preset().policy):
        if j < args.steps and j % args.every == 0:
            print("Error:" + str(mean_abs_error(topo, w, batch)))
        if args.checkpoint:
            kept.append(w)
    print("Final error after %d steps: %s" % (args.steps, mean_abs_error(topo, w, batch)))
    if args.checkpoint:
        mgrit.dump_checkpoint(kept, args.checkpoint)
    return 0


def _add_config_flags(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--problem", choices=PROBLEMS)
    p.add_argument("--n0", help="comma separated fine-level step counts")
    p.add_argument("--cycle", choices=mgrit.CYCLES)
    p.add_argument("--relax", choices=mgrit.RELAXATIONS)
    p.add_argument("--alpha-b", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--factor", type=float, help="geometric learning-rate growth factor")
    p.add_argument("--m", type=int, help="coarsening factor")
    p.add_argument("--policy", choices=("batch", "serialized"))
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=("uniform", "normal"))
    p.add_argument("--max-coarse", type=int)
    p.add_argument("--tol", type=float, help="halting tolerance coefficient")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--count", type=int, help="binary-addition instances")
    p.add_argument("--bits", type=int, help="binary-addition word length")
    p.add_argument("--out", help="output .csv file or directory (default $%s or .)" % OUT_ENV)


def build_parser():
    parser = argparse.ArgumentParser(prog="mgrit-nn", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v: residual per iteration, -vv: relaxation timings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="convergence table over a list of N0")
    _add_config_flags(p)
    p.add_argument("--dump-dir", help="write each converged solution as a text checkpoint")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("speedup", help="potential-speedup CSV from iteration counts")
    _add_config_flags(p)
    p.add_argument("--from-csv", help="sweep CSV to take N0, levels and iterations from")
    p.add_argument("--iters", help="comma separated iteration counts, one per N0")
    p.set_defaults(func=cmd_speedup)

    p = sub.add_parser("verify", help="run the oracle checks; nonzero exit on failure")
    p.add_argument("--seed", type=int)
    p.add_argument("--inject-gradient-error", type=float, default=0.0,
                   help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("train-serial", help="plain sequential training with an error trace")
    _add_config_flags(p)
    p.add_argument("--steps", type=int, default=60000)
    p.add_argument("--alpha", type=float)
    p.add_argument("--every", type=int, default=10000)
    p.add_argument("--checkpoint", help="write the weight trajectory here")
    p.set_defaults(func=cmd_train_serial)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print("mgrit-nn: config error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
