"""
Copyright (c) 2026 pkslab contributors
ALL RIGHTS RESERVED.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""
import logging
import coloredlogs
import os
import sys
import json
import argparse
import time

from pkslab import plot
from pkslab.config import (read_config, apply_env_overrides, apply_overrides,
                           parse_number)
from pkslab.error import PksLabError
from pkslab.helper import to_jsonable
from pkslab.profiles import get_profile, oseen_profile
from pkslab.linops import assemble, spectrum
from pkslab.experiment import run_experiment, run_evolution, sweep
from pkslab.report import (emit_report, emit_trajectory, print_report,
                           run_directory, summarize)


LOG = logging.getLogger(os.path.basename(__file__))

LOG_LEVEL_ENV = "PKSLAB_LOG_LEVEL"


def logging_setup(level="INFO", stream=None):
    os.environ["COLOREDLOGS_LOG_FORMAT"] \
        = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
    coloredlogs.install(level=level, stream=stream)


def parse_modes(s):
    """
    "0..4" -> [0, 1, 2, 3, 4]; "0,2,3" -> [0, 2, 3].
    """
    s = str(s).strip()
    if ".." in s:
        lo, hi = s.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in s.split(",") if x.strip()]


def _add_common(parser):
    parser.add_argument(
        "-v",
        "--verbose",
        help="Output debug messages.",
        required=False,
        default=False,
        dest="verbose",
        action="store_true")
    parser.add_argument(
        "--log",
        help="Redirect log to file.",
        required=False,
        default=None,
        dest="logfile")


def _add_config(parser):
    parser.add_argument(
        "-c",
        "--config",
        help="Experiment configuration file (YAML or JSON).",
        required=True,
        dest="config_path")
    parser.add_argument(
        "--set",
        help="Override a config value: key=value (repeatable).",
        required=False,
        default=list(),
        action="append",
        dest="overrides")
    parser.add_argument(
        "-o",
        "--out",
        help="Output directory (overwrites config).",
        required=False,
        default=None,
        dest="out")


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        description="pkslab: Patlak-Keller-Segel numerical laboratory")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("profile", help="Compute a self-similar profile.")
    _add_common(p)
    p.add_argument("--alpha", required=True, dest="alpha",
                   help="Mass, e.g. 12.5 or 4pi.")
    p.add_argument("--rmax", default=None, type=float, dest="rmax")
    p.add_argument("--points", default=None, type=int, dest="points")
    p.add_argument("--tol", default=None, type=float, dest="tol")
    p.add_argument("--model", default="pks", choices=("pks", "nse"),
                   dest="model")
    p.add_argument("--out", required=True, dest="out",
                   help="Profile CSV file.")

    p = sub.add_parser("spectrum", help="Spectra of the radial operators.")
    _add_common(p)
    p.add_argument("--alpha", required=True, dest="alpha")
    p.add_argument("--modes", default="0..4", dest="modes")
    p.add_argument("--kind", default="linearized",
                   choices=("linearized", "confined_fp", "fokker_planck"),
                   dest="kind")
    p.add_argument("--points", default=2048, type=int, dest="points")
    p.add_argument("--rmax", default=20.0, type=float, dest="rmax")
    p.add_argument("--count", default=10, type=int, dest="count")
    p.add_argument("--out", default=None, dest="out",
                   help="Write the spectrum reports as JSON.")

    p = sub.add_parser("evolve", help="Run a single evolution.")
    _add_common(p)
    _add_config(p)

    p = sub.add_parser("experiment", help="Run an experiment.")
    _add_common(p)
    _add_config(p)
    p.add_argument("--result-print", default=False, action="store_true",
                   dest="result_print", help="Print the check table.")
    p.add_argument("--no-plot", default=False, action="store_true",
                   dest="no_plot", help="Skip configured plots.")

    p = sub.add_parser("sweep", help="Run a parameter sweep.")
    _add_common(p)
    _add_config(p)
    p.add_argument("-j", "--jobs", default=1, type=int, dest="jobs",
                   help="Number of worker processes.")
    return parser.parse_args(argv)


def show_byebye(args, t_start=None, rc=0):
    print("*****************************************************")
    print("pkslab {} done (rc={})".format(args.command, rc))
    if t_start:
        print("Runtime: {0:.3f}s".format(time.time() - t_start))
    print("")
    return rc


def load_config(args):
    conf = read_config(args.config_path)
    conf = apply_env_overrides(conf)
    conf = apply_overrides(conf, args.overrides)
    if args.out:
        conf["output_dir"] = args.out
    return conf


def cmd_profile(args):
    alpha = float(parse_number(args.alpha))
    grid = {k: getattr(args, k) for k in ("points", "rmax", "tol")
            if getattr(args, k) is not None}
    if args.model == "nse":
        grid.pop("tol", None)
        p = oseen_profile(alpha, **grid)
    else:
        p = get_profile(alpha, **grid)
    p.to_csv(args.out)
    print(json.dumps(to_jsonable(p.header()), indent=2, sort_keys=True))
    return 0


def cmd_spectrum(args):
    alpha = float(parse_number(args.alpha))
    p = None
    if args.kind != "fokker_planck":
        p = get_profile(alpha, points=args.points, rmax=args.rmax)
    reports = list()
    for n in parse_modes(args.modes):
        r = spectrum(assemble(args.kind, n, p), count=args.count)
        reports.append(r.to_dict(count=args.count))
        print("n={} gap={:.8g} leading={}".format(
            n, r.gap, [round(float(e.real), 8)
                       for e in r.leading(5)]))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(to_jsonable(reports), f, indent=2)
        LOG.info("Wrote spectra to '{}'".format(args.out))
    return 0


def cmd_evolve(args):
    conf = load_config(args)
    traj, manifest = run_evolution(conf)
    path = run_directory(conf.get("output_dir", "runs"),
                         manifest["config_hash"])
    emit_trajectory(traj, manifest, path)
    return 0 if manifest["error"] is None else 1


def _plot(conf, report, path):
    for pconf in conf.get("plot") or list():
        for plotter in plot.get_by_name(pconf.get("name")).generate(pconf):
            plotter.plot(report, path)


def cmd_experiment(args):
    conf = load_config(args)
    report = run_experiment(conf)
    path, rc = emit_report(report)
    if not args.no_plot:
        _plot(conf, report, path)
    if args.result_print:
        print_report(report)
    return rc


def cmd_sweep(args):
    conf = load_config(args)
    reports = sweep(conf, args.jobs)
    rc = 0
    for r in reports:
        _, r_rc = emit_report(r)
        rc = max(rc, r_rc)
    base = conf.get("output_dir", "runs")
    os.makedirs(base, exist_ok=True)
    out = os.path.join(base, "sweep_{}.csv".format(conf.get("name")))
    summarize(reports).to_csv(out, index=False)
    LOG.info("Wrote sweep summary to '{}'".format(out))
    return rc


COMMANDS = {"profile": cmd_profile,
            "spectrum": cmd_spectrum,
            "evolve": cmd_evolve,
            "experiment": cmd_experiment,
            "sweep": cmd_sweep}


def main(argv=None):
    t_start = time.time()
    # CLI interface
    args = parse_args(argv)

    # configure logging
    if args.verbose:
        log_level = "DEBUG"
    else:
        log_level = os.environ.get(LOG_LEVEL_ENV, "INFO")
    log_stream = None  # default: stderr
    if args.logfile:
        log_stream = open(args.logfile, "w")
    logging_setup(level=log_level, stream=log_stream)

    try:
        rc = COMMANDS[args.command](args)
    except PksLabError as e:
        LOG.error("{}: {}".format(e.__class__.__name__, e))
        rc = 2
    show_byebye(args, t_start, rc)

    # cleanup
    if log_stream:
        log_stream.close()
    sys.exit(rc)
