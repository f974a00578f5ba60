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
import os
import json
import datetime
import numpy as np
import pandas as pd

from pkslab.error import ReportError
from pkslab.experiment import RunReport
from pkslab.helper import to_jsonable


LOG = logging.getLogger(os.path.basename(__file__))

FORMATS = ("json", "csv", "dat")


def run_directory(base, config_hash, timestamp=None):
    """
    <base>/<timestamp>-<config hash>
    """
    if timestamp is None:
        timestamp = datetime.datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    return os.path.join(base, "{}-{}".format(timestamp, config_hash))


def _write(path, writer):
    try:
        writer(path)
    except (IOError, OSError) as e:
        raise ReportError("could not write '{}': {}".format(path, e))
    LOG.debug("Wrote '{}'".format(path))


def write_dat(df, path, x=None):
    """
    Whitespace separated columns with a '# name ...' header (gnuplot).
    """
    cols = list(df.columns)
    if x is not None and x in cols:
        cols.remove(x)
        cols.insert(0, x)

    def writer(p):
        with open(p, "w") as f:
            f.write("# " + " ".join(str(c) for c in cols) + "\n")
            for row in df[cols].itertuples(index=False):
                f.write(" ".join(_dat_value(v) for v in row) + "\n")
    _write(path, writer)


def _dat_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, float, np.integer, np.floating)):
        return repr(float(v))
    return '"{}"'.format(v)


def emit_report(report, path=None, formats=FORMATS):
    """
    Write report.json, checks.csv and one .csv/.dat file per series.
    Returns (run directory, exit status): 0 iff all checks passed.
    """
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError("unknown report formats {}".format(sorted(unknown)))
    if path is None:
        path = run_directory(report.config.get("output_dir", "runs"),
                             report.config_hash)
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ReportError("could not create '{}': {}".format(path, e))
    if "json" in formats:
        def writer(p):
            with open(p, "w") as f:
                json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        _write(os.path.join(path, "report.json"), writer)
    if "csv" in formats:
        _write(os.path.join(path, "checks.csv"),
               lambda p: report.checks_dataframe().to_csv(p, index=False))
    for name, s in sorted(report.series.items()):
        df = s["data"]
        if "csv" in formats:
            _write(os.path.join(path, "{}.csv".format(name)),
                   lambda p: df.to_csv(p, index=False))
        if "dat" in formats:
            write_dat(df, os.path.join(path, "{}.dat".format(name)),
                      s.get("x"))
    rc = 0 if report.passed else 1
    LOG.info("Wrote report '{}' with {} checks ({} failed) to '{}'".format(
        report.name, len(report.checks), len(report.failed_checks), path))
    return path, rc


def load_report(path):
    """
    Read a report.json (or the run directory containing it).
    """
    if os.path.isdir(path):
        path = os.path.join(path, "report.json")
    try:
        with open(path, "r") as f:
            return RunReport.from_dict(json.load(f))
    except (IOError, OSError, ValueError, KeyError) as e:
        raise ReportError("could not read report '{}': {}".format(path, e))


def print_report(report):
    df = report.checks_dataframe()
    with pd.option_context("display.max_rows", None,
                           "display.max_colwidth", 60,
                           "display.width", 160):
        print(df[["name", "measured", "expected", "pass"]])
    print("overall: {}".format("PASS" if report.passed else "FAIL"))


def summarize(reports):
    """
    One row per report (sweeps).
    """
    return pd.DataFrame([{"name": r.name, "experiment": r.experiment,
                          "config_hash": r.config_hash, "seed": r.seed,
                          "checks": len(r.checks),
                          "failed": len(r.failed_checks),
                          "pass": r.passed} for r in reports])


def emit_trajectory(traj, manifest, path, field_dir="fields"):
    """
    diagnostics.csv/.dat, manifest.json and stored fields of an
    evolution run.
    """
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ReportError("could not create '{}': {}".format(path, e))
    df = traj.to_dataframe()
    _write(os.path.join(path, "diagnostics.csv"),
           lambda p: df.to_csv(p, index=False))
    write_dat(df, os.path.join(path, "diagnostics.dat"), traj.time_name)

    def writer(p):
        with open(p, "w") as f:
            json.dump(to_jsonable(manifest), f, indent=2, sort_keys=True)
    _write(os.path.join(path, "manifest.json"), writer)
    if traj.fields:
        fdir = os.path.join(path, field_dir)
        os.makedirs(fdir, exist_ok=True)
        for i, (t, u) in enumerate(zip(traj.times, traj.fields)):
            _write(os.path.join(fdir, "{:04d}_{}{:.6g}.field".format(
                i, traj.time_name, t)), u.to_file)
    if traj.final is not None:
        _write(os.path.join(path, "final.field"), traj.final.to_file)
    LOG.info("Wrote trajectory ({} snapshots) to '{}'".format(
        len(traj.times), path))
    return path
