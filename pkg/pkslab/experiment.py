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
import re
import copy
import time
import datetime
import contextlib
import concurrent.futures
import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from pkslab.config import (parse_number, expand_parameters, set_by_path,
                           read_config, REQUIRED_KEYS)
from pkslab.error import ConfigError, UnknownExperiment, SolverAbort
from pkslab.helper import (cartesian_product, config_hash, canonical_json,
                           to_jsonable, environment_stamp)
from pkslab.fields import (gaussian_field, gaussian_bump, heat_apply,
                           gradient, lp_norm, DEFAULT_WEIGHT_M)
from pkslab.measures import (Atom, MeasureData, CRITICAL_MASS,
                             DEFAULT_EPSILON, decompose, regularize,
                             default_start_time, min_pairwise_distance,
                             heat_measure, heat_lp_limit)
from pkslab.profiles import (get_profile, get_provider, profile_lipschitz,
                             zero_mode, sample_profile, profile_field,
                             tail_fit, virial_value, gaussian_closeness)
from pkslab.linops import (assemble, spectrum, gap_summary, weighted_residual,
                           cosine_similarity, fp_kernel_apply,
                           elliptic_mode_shoot, compare_translation_mode,
                           compare_zero_mode)
from pkslab.velocity import hls_ratio
from pkslab.energies import (coercivity_constant, coercivity_basis,
                             radial_linearized_energy, dissipation_physical)
from pkslab.evolve import (SolverConfig, evolve_physical, evolve_similarity,
                           evolve_linearized, sn_evolve, blowup_monitor,
                           detect_blowup, convergence_order)
from pkslab.fit import decay_rate


LOG = logging.getLogger(os.path.basename(__file__))

PI = np.pi
# keys that do not change the numbers of a run
_UNHASHED_KEYS = ("output_dir", "plot", "author")


def get_by_name(name):
    if name == "profile_suite":
        return ProfileSuite
    if name == "spectrum_suite":
        return SpectrumSuite
    if name == "self_similarity":
        return SelfSimilarity
    if name == "attractor":
        return Attractor
    if name == "lipschitz":
        return Lipschitz
    if name == "critical_mass":
        return CriticalMass
    if name == "sn_suite":
        return SnSuite
    if name == "energy_suite":
        return EnergySuite
    raise UnknownExperiment("experiment '{}' not implemented".format(name))


def alpha_name(a):
    """
    4pi -> "4pi", 0.2 -> "0.2".
    """
    q = a / PI
    if abs(q - round(q, 3)) < 1e-9:
        return "{:g}pi".format(round(q, 3))
    return "{:g}".format(a)


def hashable_config(conf):
    return {k: v for k, v in conf.items() if k not in _UNHASHED_KEYS}


class ExperimentConfig(object):
    """
    Validated experiment configuration (name, experiment, seed, params).
    """

    def __init__(self, conf):
        if isinstance(conf, ExperimentConfig):
            conf = conf.conf
        conf = copy.deepcopy(conf)
        for k in REQUIRED_KEYS:
            if conf.get(k) is None:
                raise ConfigError("missing key '{}'".format(k))
        try:
            conf["seed"] = int(conf["seed"])
        except (TypeError, ValueError):
            raise ConfigError("seed must be an integer: {!r}".format(
                conf["seed"]))
        conf.setdefault("params", dict())
        conf.setdefault("output_dir", "runs")
        if not isinstance(conf["params"], dict):
            raise ConfigError("params must be a mapping")
        # raises UnknownExperiment
        self.cls = get_by_name(conf["experiment"])
        self.conf = conf

    def __repr__(self):
        return "ExperimentConfig({})".format(self.conf)

    @classmethod
    def from_file(cls, path):
        return cls(read_config(path))

    @property
    def name(self):
        return self.conf["name"]

    @property
    def experiment(self):
        return self.conf["experiment"]

    @property
    def seed(self):
        return self.conf["seed"]

    @property
    def params(self):
        return self.conf["params"]

    @property
    def output_dir(self):
        return self.conf["output_dir"]

    @property
    def hash(self):
        return config_hash(hashable_config(self.conf))


class Check(object):
    """
    One verified statement: measured against expected with tolerance.
    """

    def __init__(self, name, measured, expected=None, tolerance=None,
                 passed=False, ref="", note=""):
        self.name = name
        self.measured = measured
        self.expected = expected
        self.tolerance = tolerance
        self.passed = bool(passed)
        self.ref = ref
        self.note = note

    def __repr__(self):
        return "Check({}, measured={}, expected={}, pass={})".format(
            self.name, self.measured, self.expected, self.passed)

    def to_dict(self):
        return to_jsonable({"name": self.name,
                            "measured": self.measured,
                            "expected": self.expected,
                            "tolerance": self.tolerance,
                            "pass": self.passed,
                            "ref": self.ref,
                            "note": self.note})

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], d.get("measured"), d.get("expected"),
                   d.get("tolerance"), d.get("pass", False), d.get("ref", ""),
                   d.get("note", ""))


class RunReport(object):
    """
    Checks and data series of one experiment run. The body (everything
    except environment, start time and wall clock) is deterministic
    given config and seed.
    """

    def __init__(self, name, experiment, config, seed, checks=None,
                 series=None, environment=None, started=None,
                 wall_clock=0.0):
        self.name = name
        self.experiment = experiment
        self.config = copy.deepcopy(config)
        self.seed = seed
        self.checks = list(checks or list())
        self.series = dict(series or dict())
        self.environment = environment or dict()
        self.started = started
        self.wall_clock = float(wall_clock)
        self.config_hash = config_hash(hashable_config(self.config))

    def __repr__(self):
        return "RunReport({}, {}, checks={}, pass={})".format(
            self.name, self.config_hash, len(self.checks), self.passed)

    def __eq__(self, other):
        return isinstance(other, RunReport) and \
            canonical_json(self.to_dict()) == canonical_json(other.to_dict())

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failed_checks(self):
        return [c for c in self.checks if not c.passed]

    def add_series(self, name, df, x=None, y=None):
        self.series[name] = {"x": x, "y": y, "data": df}

    def checks_dataframe(self):
        return pd.DataFrame([c.to_dict() for c in self.checks],
                            columns=["name", "measured", "expected",
                                     "tolerance", "pass", "ref", "note"])

    def body(self):
        series = dict()
        for k, s in sorted(self.series.items()):
            series[k] = {"x": s["x"], "y": s["y"],
                         "columns": s["data"].to_dict(orient="list")}
        return to_jsonable({"name": self.name,
                            "experiment": self.experiment,
                            "seed": self.seed,
                            "config": self.config,
                            "config_hash": self.config_hash,
                            "pass": self.passed,
                            "checks": [c.to_dict() for c in self.checks],
                            "series": series})

    def to_dict(self):
        d = self.body()
        d.update(to_jsonable({"environment": self.environment,
                              "started": self.started,
                              "wall_clock": self.wall_clock}))
        return d

    @classmethod
    def from_dict(cls, d):
        series = dict()
        for k, s in d.get("series", dict()).items():
            series[k] = {"x": s.get("x"), "y": s.get("y"),
                         "data": pd.DataFrame(s.get("columns", dict()))}
        return cls(d["name"], d["experiment"], d.get("config", dict()),
                   d.get("seed"),
                   [Check.from_dict(c) for c in d.get("checks", list())],
                   series, d.get("environment"), d.get("started"),
                   d.get("wall_clock", 0.0))


class BaseExperiment(object):
    """
    Base class of experiments. Subclasses define their default params
    and implement _run(), which records checks and series.
    """

    @classmethod
    def generate(cls, conf):
        """
        One experiment object per configuration.
        """
        return [cls(seed=conf.get("seed"), **conf.get("params", dict()))]

    def __init__(self, seed=0, **kwargs):
        self._configure(dict(), seed, kwargs)

    def _configure(self, p, seed, kwargs):
        unknown = set(kwargs) - set(p)
        if unknown:
            raise ConfigError("{}: unknown parameters {}".format(
                self.name, sorted(unknown)))
        p.update({k: parse_number(v) for k, v in kwargs.items()})
        if seed is None:
            raise ConfigError("{}: seed must be given".format(self.name))
        self.params = p
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)
        self.checks = list()
        self.series = dict()
        LOG.debug("Initialized experiment: {}".format(self))

    def __repr__(self):
        return "{}({})".format(self.name, self.params)

    @property
    def name(self):
        return self.__class__.__name__

    @property
    def short_name(self):
        return re.sub('[^A-Z]', '', self.name)

    def grid(self, points=None):
        p = self.params
        return {"points": int(points or p["points"]),
                "rmax": float(p["rmax"])}

    def run(self):
        self.checks = list()
        self.series = dict()
        self.rng = np.random.default_rng(self.seed)
        self._run()
        LOG.info("{}: {}/{} checks passed".format(
            self.name, sum(c.passed for c in self.checks), len(self.checks)))
        return self.checks, self.series

    def _run(self):
        """
        To be overwritten.
        """
        LOG.warning("BaseExperiment._run() not implemented.")

    @contextlib.contextmanager
    def guard(self, name, ref):
        """
        Turns errors raised inside the block into a failed check.
        """
        try:
            yield
        except Exception as e:
            LOG.exception("Check '{}' raised an error".format(name))
            self.checks.append(Check(
                name, None, None, None, False, ref,
                "{}: {}".format(e.__class__.__name__, e)))

    # check helpers

    def check(self, name, measured, expected, tolerance, passed, ref,
              note=""):
        c = Check(name, measured, expected, tolerance, passed, ref, note)
        LOG.info("{} {}: measured={} expected={} tol={}".format(
            "PASS" if c.passed else "FAIL", name, measured, expected,
            tolerance))
        self.checks.append(c)
        return c

    def check_close(self, name, measured, expected, tol, ref, note=""):
        ok = bool(np.isfinite(measured) and abs(measured - expected) <= tol)
        return self.check(name, measured, expected, tol, ok, ref, note)

    def check_rel(self, name, measured, expected, rtol, ref, note=""):
        ok = bool(np.isfinite(measured) and
                  abs(measured - expected) <= rtol * abs(expected))
        return self.check(name, measured, expected, rtol, ok, ref, note)

    def check_le(self, name, measured, bound, ref, note=""):
        ok = bool(np.isfinite(measured) and measured <= bound)
        return self.check(name, measured, "<= {:g}".format(bound), bound,
                          ok, ref, note)

    def check_ge(self, name, measured, bound, ref, note=""):
        ok = bool(np.isfinite(measured) and measured >= bound)
        return self.check(name, measured, ">= {:g}".format(bound), bound,
                          ok, ref, note)

    def check_range(self, name, measured, lo, hi, ref, note=""):
        ok = bool(np.isfinite(measured) and lo < measured < hi)
        return self.check(name, measured, "({:g}, {:g})".format(lo, hi),
                          None, ok, ref, note)

    def check_equal(self, name, measured, expected, ref, note=""):
        return self.check(name, measured, expected, None,
                          measured == expected, ref, note)

    def check_spread(self, name, values, factor, ref, note=""):
        """
        max / min of positive values within factor.
        """
        v = np.asarray(values, dtype=float)
        if len(v) == 0 or np.any(~np.isfinite(v)) or np.any(v <= 0):
            return self.check(name, None, "<= {:g}".format(factor), factor,
                              False, ref, "non-positive or missing values")
        return self.check_le(name, float(v.max() / v.min()), factor, ref,
                             note)

    def check_monotone(self, name, values, slack, ref, note=""):
        """
        Largest increase between consecutive values (relative to the
        magnitude of the series) at most slack.
        """
        v = np.asarray(values, dtype=float)
        v = v[np.isfinite(v)]
        if len(v) < 2:
            return self.check(name, None, "non-increasing", slack, False,
                              ref, "fewer than two finite values")
        scale = max(1.0, float(np.max(np.abs(v))))
        rise = float(np.max(np.diff(v))) / scale
        return self.check(name, rise, "non-increasing", slack,
                          rise <= slack, ref, note)

    def add_series(self, name, df, x=None, y=None):
        self.series[name] = {"x": x, "y": y, "data": df}


class ProfileSuite(BaseExperiment):
    """
    Identities of the self-similar profiles G_alpha.
    """

    def __init__(self, seed=0, **kwargs):
        p = {"alphas": [PI, 4 * PI, 7 * PI],
             "mass_tol": 1e-8,
             "virial_tol": 1e-5,
             "tail_alpha": 4 * PI,
             "tail_range": [8.0, 12.0],
             "tail_tol": 0.05,
             "small_alphas": [0.2, 0.1, 0.05],
             "small_spread": 0.25,
             "lipschitz_alpha": 4 * PI,
             "lipschitz_deltas": [0.1, 0.01],
             "lipschitz_factor": 1.5,
             "zero_mode_alpha": 4 * PI,
             "zero_mode_h": 1e-3,
             "zero_mode_points": 2048,
             "zero_mode_mass_tol": 1e-4,
             "zero_mode_residual_tol": 1e-3,
             "zero_mode_eigen_tol": 1e-4,
             "zero_mode_cosine_min": 0.999,
             "ladder": [PI, 2 * PI, 4 * PI, 6 * PI, 7 * PI],
             "points": 4096,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _run(self):
        p = self.params
        grid = self.grid()
        table = pd.DataFrame()
        for a in p["alphas"]:
            name = alpha_name(a)
            with self.guard("mass_" + name, "G_alpha has mass alpha"):
                pr = get_profile(a, **grid)
                self.check_rel("mass_" + name, pr.mass(), a, p["mass_tol"],
                               "G_alpha has mass alpha")
                if table.empty:
                    table["r"] = pr.nodes[::8]
                table["G_" + name] = pr.G[::8]
            with self.guard("virial_" + name, "virial identity"):
                pr = get_profile(a, **grid)
                self.check_rel("virial_" + name, pr.second_moment(),
                               virial_value(a), p["virial_tol"],
                               "virial identity")
        if not table.empty:
            self.add_series("profiles", table, "r",
                            [c for c in table.columns if c != "r"])

        ref = "Gaussian tail with algebraic correction"
        with self.guard("tail_slope", ref):
            fit = tail_fit(get_profile(p["tail_alpha"], **grid),
                           *p["tail_range"])
            self.check_close("tail_slope", fit["slope"],
                             fit["expected_slope"], p["tail_tol"], ref,
                             "r2={:.6f}".format(fit["r2"]))

        ref = "G_alpha - alpha G is quadratic in alpha"
        with self.guard("small_alpha_closeness", ref):
            vals = [gaussian_closeness(a, **grid) for a in p["small_alphas"]]
            spread = max(vals) / min(vals) - 1.0
            self.check_le("small_alpha_closeness", spread, p["small_spread"],
                          ref)
            self.add_series("small_alpha", pd.DataFrame(
                {"alpha": p["small_alphas"], "closeness": vals}),
                "alpha", "closeness")

        ref = "alpha -> G_alpha is Lipschitz in L1"
        with self.guard("profile_lipschitz", ref):
            a = p["lipschitz_alpha"]
            ratios = [profile_lipschitz(a, a + d, **grid) / d
                      for d in p["lipschitz_deltas"]]
            self.check_spread("profile_lipschitz", ratios,
                              p["lipschitz_factor"], ref)

        ref = "E_alpha^0 spans the kernel of L - Lambda_alpha"
        with self.guard("zero_mode", ref):
            a = p["zero_mode_alpha"]
            zg = self.grid(p["zero_mode_points"])
            e0 = zero_mode(a, p["zero_mode_h"], **zg)
            self.check_close("zero_mode_mass", e0.mass(), 1.0,
                             p["zero_mode_mass_tol"], ref)
            op = assemble("linearized", 0, get_profile(a, **zg))
            res = weighted_residual(op, e0.values, 0.0, DEFAULT_WEIGHT_M)
            self.check_le("zero_mode_residual", res,
                          p["zero_mode_residual_tol"], ref,
                          "m={:g}".format(DEFAULT_WEIGHT_M))
            rep = spectrum(op)
            i, lam = rep.closest(0.0)
            self.check_close("zero_mode_eigenvalue", float(lam.real), 0.0,
                             p["zero_mode_eigen_tol"], ref)
            cos = cosine_similarity(op, rep.eigenvectors[:, i], e0.values)
            self.check_ge("zero_mode_cosine", cos, p["zero_mode_cosine_min"],
                          ref)

        ref = "G_alpha(0) increases with alpha"
        with self.guard("peak_monotone", ref):
            peaks = [get_profile(a, **grid).peak for a in p["ladder"]]
            rise = float(np.min(np.diff(peaks)))
            self.check("peak_monotone", rise, "> 0", None, rise > 0, ref)
            self.add_series("peaks", pd.DataFrame(
                {"alpha": p["ladder"], "peak": peaks}), "alpha", "peak")


class SpectrumSuite(BaseExperiment):
    """
    Spectral gap, symmetry-forced eigenvalues, elliptic rigidity and the
    explicit Fokker-Planck kernel.
    """

    def __init__(self, seed=0, **kwargs):
        p = {"alphas": [PI, 2 * PI, 4 * PI, 6 * PI, 7 * PI],
             "modes": [0, 1, 2, 3, 4],
             "gap_min": 0.01,
             "translation_alphas": [PI, 4 * PI],
             "translation_tol": 1e-3,
             "small_alpha": 0.1,
             "small_gap_rtol": 0.1,
             "shoot_alpha": 4 * PI,
             "shoot_tol": 1e-2,
             "kernel_tau": 1.0,
             "kernel_n": 128,
             "kernel_half_width": 12.0,
             "kernel_rtol": 1e-8,
             "kernel_tol": 1e-4,
             "semigroup_tol": 1e-9,
             "points": 2048,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _run(self):
        p = self.params
        grid = self.grid()
        modes = [int(n) for n in p["modes"]]
        rows = list()
        ref = "mean-zero spectrum has a gap"
        for a in p["alphas"]:
            name = "gap_" + alpha_name(a)
            with self.guard(name, ref):
                s = gap_summary(get_profile(a, **grid), modes)
                self.check_ge(name, s["K_alpha"], p["gap_min"], ref,
                              "lambda_alpha={:.6g}".format(s["lambda_alpha"]))
                rows.extend(s["modes"])
        if rows:
            self.add_series("spectrum", pd.DataFrame(rows), "alpha", "gap")

        ref = "translations give the eigenvalue -1/2"
        for a in p["translation_alphas"]:
            name = "translation_" + alpha_name(a)
            with self.guard(name, ref):
                rep = spectrum(assemble("linearized", 1,
                                        get_profile(a, **grid)))
                _, lam = rep.closest(-0.5)
                self.check_close(name, float(lam.real), -0.5,
                                 p["translation_tol"], ref)

        ref = "gap tends to 1/2 as alpha -> 0"
        with self.guard("small_alpha_gap", ref):
            s = gap_summary(get_profile(p["small_alpha"], **grid), modes)
            self.check_rel("small_alpha_gap", s["K_alpha"], 0.5,
                           p["small_gap_rtol"], ref)
            self.check_rel("small_alpha_fp_gap", s["lambda_alpha"], 0.5,
                           p["small_gap_rtol"], ref)

        self._shooting(grid)
        self._kernel()

    def _shooting(self, grid):
        p = self.params
        a = p["shoot_alpha"]
        ref = "regular elliptic mode solutions are unbounded"
        with self.guard("elliptic_n0", ref):
            pr = get_profile(a, **grid)
            rep = elliptic_mode_shoot(pr, 0)
            self.check_equal("elliptic_n0_growth", rep["growth"],
                             "logarithmic", ref)
            dev = compare_zero_mode(pr, zero_mode(a, **grid), rep)
            self.check_le("elliptic_n0_zero_mode", dev, p["shoot_tol"], ref)
        with self.guard("elliptic_n1", ref):
            pr = get_profile(a, **grid)
            rep = elliptic_mode_shoot(pr, 1)
            dev, negative = compare_translation_mode(pr, rep)
            self.check_equal("elliptic_n1_growth", rep["growth"], "power_1",
                             ref)
            self.check("elliptic_n1_negative", negative, True, None,
                       negative, ref)
            self.check_le("elliptic_n1_translation", dev, p["shoot_tol"],
                          ref)
        with self.guard("elliptic_n2", ref):
            rep = elliptic_mode_shoot(get_profile(a, **grid), 2)
            self.check_equal("elliptic_n2_growth", rep["growth"], "power_2",
                             ref)

    def _kernel(self):
        p = self.params
        ref = "explicit Fokker-Planck kernel"
        with self.guard("kernel_oracle", ref):
            tau = p["kernel_tau"]
            f0 = gaussian_bump(int(p["kernel_n"]), p["kernel_half_width"],
                               mass=1.0, z=(1.0, 0.5), width=0.7)
            cfg = SolverConfig(rtol=p["kernel_rtol"], n_snapshots=1,
                               energy=False, max_dt=0.05)
            traj = sn_evolve(f0, 0.0, tau, list(), None, cfg,
                             frame="similarity")
            exact = fp_kernel_apply(f0, tau, 0.0)
            self.check_le("kernel_oracle", lp_norm(traj.final - exact, 1),
                          p["kernel_tol"], ref)
            half = fp_kernel_apply(f0, 0.5 * tau, 0.0)
            two = fp_kernel_apply(half, tau, 0.5 * tau)
            err = lp_norm(two - exact, 1) / lp_norm(exact, 1)
            self.check_le("kernel_semigroup", err, p["semigroup_tol"], ref)


class SelfSimilarity(BaseExperiment):
    """
    Self-similar solutions stay self-similar (PKS and Oseen vortex).
    """

    def __init__(self, seed=0, **kwargs):
        p = {"alpha": 4 * PI,
             "models": ["pks", "nse"],
             "n": 256,
             "half_width": 8.0,
             "t0": 1.0 / 16.0,
             "factor": 4.0,
             "n_snapshots": 12,
             "rtol": 1e-6,
             "sup_tol": 0.02,
             "mass_tol": 1e-8,
             "positivity_tol": 1e-8,
             "stationary_n": 128,
             "stationary_half_width": 16.0,
             "stationary_span": 3.0,
             "stationary_tol": 1e-3,
             "order_n": 128,
             "order_steps": 32,
             "order_min": 2.0,
             "points": 4096,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _run(self):
        p = self.params
        for model in p["models"]:
            self._physical(model)
        self._stationary()
        self._order()

    def _physical(self, model):
        p = self.params
        n, L = int(p["n"]), p["half_width"]
        t0 = p["t0"]
        ref = "t^{-1} G_alpha(x / sqrt(t)) is the mild solution"
        name = "self_similar_{}".format(model)
        with self.guard(name, ref):
            pr = get_provider(model, **self.grid())(p["alpha"])
            u0 = sample_profile(pr, t0, n=n, half_width=L)
            cfg = SolverConfig(model=model, t_start=t0,
                               t_end=p["factor"] * t0, rtol=p["rtol"],
                               n_snapshots=p["n_snapshots"],
                               store_fields=True, energy=False)
            traj = evolve_physical(u0, cfg)
            errs = list()
            for t, u in zip(traj.times, traj.fields):
                exact = sample_profile(pr, t, n=n, half_width=L,
                                       check_support=False)
                errs.append(t * float(np.max(np.abs(u.values -
                                                    exact.values))))
            df = traj.to_dataframe()
            df["self_similar_error"] = np.asarray(errs) / pr.peak
            self.add_series("diagnostics_" + model, df, "t",
                            "self_similar_error")
            self.check_le(name, float(np.max(errs)) / pr.peak, p["sup_tol"],
                          ref)
            mass = traj.series("mass")
            self.check_le("mass_conservation_" + model,
                          float(np.max(np.abs(mass - mass[0]))) / mass[0],
                          p["mass_tol"], "mass is conserved")
            if model == "pks":
                low = float(np.min(traj.series("min") /
                                   traj.series("sup")))
                self.check_ge("positivity_" + model, low,
                              -p["positivity_tol"], "solutions stay >= 0")

    def _stationary(self):
        p = self.params
        ref = "G_alpha is stationary in similarity variables"
        with self.guard("stationary", ref):
            pr = get_profile(p["alpha"], **self.grid())
            w0 = profile_field(pr, int(p["stationary_n"]),
                               p["stationary_half_width"])
            cfg = SolverConfig(rtol=p["rtol"], n_snapshots=p["n_snapshots"])
            traj = evolve_similarity(w0, None, (0.0, p["stationary_span"]),
                                     cfg, reference=w0)
            rel = float(np.max(traj.series("dist_l1"))) / w0.mass()
            self.add_series("stationary", traj.to_dataframe(), "tau",
                            "dist_l1")
            self.check_le("stationary", rel, p["stationary_tol"], ref)

    def _order(self):
        p = self.params
        ref = "time stepper converges at its design order"
        with self.guard("convergence_order", ref):
            pr = get_profile(p["alpha"], **self.grid())
            t0 = p["t0"]
            u0 = sample_profile(pr, t0, n=int(p["order_n"]),
                                half_width=p["half_width"])

            def run(dt):
                cfg = SolverConfig(t_start=t0, t_end=p["factor"] * t0,
                                   adaptive=False, dt=dt, n_snapshots=1,
                                   energy=False)
                return evolve_physical(u0, cfg).final

            span = (p["factor"] - 1.0) * t0
            r = convergence_order(run, span / p["order_steps"])
            self.check_ge("convergence_order", r["order"], p["order_min"],
                          ref, "diffs={}".format(r["diffs"]))


class Attractor(BaseExperiment):
    """
    A mass-alpha Gaussian relaxes to G_alpha in similarity variables.
    """

    def __init__(self, seed=0, **kwargs):
        p = {"alpha": 4 * PI,
             "n": 128,
             "half_width": 16.0,
             "tau_span": 8.0,
             "n_snapshots": 32,
             "rtol": 1e-7,
             "final_fraction": 0.1,
             "fit_window": [1.0, 6.0],
             "rate_factor": 2.0,
             "energy_slack": 1e-8,
             "virial_tol": 1e-3,
             "mass_tol": 1e-8,
             "points": 2048,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _run(self):
        p = self.params
        a = p["alpha"]
        ref = "G_alpha attracts the mass-alpha dynamics"
        with self.guard("attractor", ref):
            pr = get_profile(a, **self.grid())
            w0 = gaussian_field(int(p["n"]), p["half_width"], mass=a, t=1.0)
            cfg = SolverConfig(rtol=p["rtol"], n_snapshots=p["n_snapshots"])
            ref_field = profile_field(pr, int(p["n"]), p["half_width"],
                                      check_support=False)
            traj = evolve_similarity(w0, None, (0.0, p["tau_span"]), cfg,
                                     reference=ref_field)
            df = traj.to_dataframe()
            tau = np.asarray(traj.times)
            dist = traj.series("dist_l1")
            # second moment solves M' = 4 alpha (1 - alpha / 8 pi) - M
            vir = virial_value(a)
            m2 = traj.series("second_moment")
            pred = vir + (m2[0] - vir) * np.exp(-(tau - tau[0]))
            df["virial_prediction"] = pred
            self.add_series("attractor", df, "tau", "dist_l1")
            self.check_le("attractor_final_distance", dist[-1] / dist[0],
                          p["final_fraction"], ref)
            self.check_monotone("attractor_distance_decreasing", dist, 0.0,
                                ref)
            lo, hi = p["fit_window"]
            mask = (tau >= lo) & (tau <= hi)
            rate = decay_rate(tau[mask], dist[mask])["rate"]
            gap0 = spectrum(assemble("linearized", 0, pr)).gap
            f = p["rate_factor"]
            self.check_range("attractor_rate", rate, gap0 / f, gap0 * f,
                             ref, "radial gap {:.6g}".format(gap0))
            self.check_monotone("similarity_energy_decreasing",
                                traj.series("free_energy"),
                                p["energy_slack"],
                                "free energy is a Lyapunov functional")
            self.check_le("virial_along_flow",
                          float(np.max(np.abs(m2 - pred))) / vir,
                          p["virial_tol"], "virial identity")
            mass = traj.series("mass")
            self.check_le("mass_conservation",
                          float(np.max(np.abs(mass - mass[0]))) / mass[0],
                          p["mass_tol"], "mass is conserved")


class Lipschitz(BaseExperiment):
    """
    Solutions depend Lipschitz continuously on the data in total
    variation (atom + bump data).
    """

    def __init__(self, seed=0, **kwargs):
        p = {"alpha": 4 * PI,
             "deltas": [1e-2, 1e-3, 1e-4],
             "bump_mass": 1.0,
             "bump_center": [1.5, 0.0],
             "bump_width": 0.25,
             "eps": DEFAULT_EPSILON,
             "n": 128,
             "half_width": 8.0,
             "t0": 1.0 / 16.0,
             "t_end": 0.25,
             "dt": 1.0 / 512.0,
             "n_snapshots": 12,
             "factor": 2.0,
             "zero_tol": 1e-14,
             "points": 4096,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _initial(self, provider, delta):
        p = self.params
        bump = gaussian_bump(int(p["n"]), p["half_width"],
                             mass=p["bump_mass"] * (1.0 + delta),
                             z=tuple(p["bump_center"]),
                             width=p["bump_width"])
        mu = MeasureData([Atom((0.0, 0.0), p["alpha"] + delta)], bump,
                         nonnegative=True)
        return regularize(decompose(mu, p["eps"]), p["t0"], provider)

    def _solve(self, u0):
        p = self.params
        cfg = SolverConfig(t_start=p["t0"], t_end=p["t_end"],
                           adaptive=False, dt=p["dt"],
                           n_snapshots=p["n_snapshots"], store_fields=True,
                           energy=False)
        return evolve_physical(u0, cfg)

    def _distance(self, a, b):
        d = 0.0
        for t, u, v in zip(a.times, a.fields, b.fields):
            w = u - v
            d = max(d, lp_norm(w, 1) + t ** 0.25 * lp_norm(w, 4.0 / 3.0))
        return d

    def _run(self):
        p = self.params
        ref = "locally Lipschitz dependence in total variation"
        rows = list()
        with self.guard("lipschitz", ref):
            provider = get_provider("pks", **self.grid())
            base = self._solve(self._initial(provider, 0.0))
            for delta in [0.0] + list(p["deltas"]):
                other = self._solve(self._initial(provider, delta))
                D = self._distance(base, other)
                rows.append({"delta": delta, "Delta": D,
                             "ratio": D / delta if delta > 0 else np.nan})
                LOG.info("delta={:.1e}: Delta={:.6g}".format(delta, D))
            df = pd.DataFrame(rows)
            self.add_series("lipschitz", df, "delta", "ratio")
            self.check_le("lipschitz_zero", rows[0]["Delta"],
                          p["zero_tol"], ref)
            self.check_spread("lipschitz_ratio",
                              [r["ratio"] for r in rows[1:]], p["factor"],
                              ref)


class CriticalMass(BaseExperiment):
    """
    Global existence below 8 pi, blow-up above.
    """

    def __init__(self, seed=0, **kwargs):
        p = {"masses": [7 * PI, 10 * PI],
             "heat_time": 1.0,
             "t_start": 1.0,
             "blowup_n": 256,
             "blowup_half_width": 16.0,
             "blowup_t_end": 5.0,
             "blowup_max_dt": 1e-2,
             "bounded_n": 512,
             "bounded_half_width": 56.0,
             "bounded_t_end": 10.0,
             "bounded_max_dt": 0.1,
             "factor": 50.0,
             "mass_fraction": 0.9,
             "bounded_factor": 3.0,
             "n_snapshots": 40,
             "rtol": 1e-6,
             "min_dt": 1e-9,
             "mass_tol": 1e-8,
             "energy_slack": 1e-8,
             "points": 4096,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _run(self):
        for m in self.params["masses"]:
            self._mass(m)

    def _mass(self, m):
        p = self.params
        name = alpha_name(m)
        supercritical = m >= CRITICAL_MASS
        key = "blowup_" if supercritical else "bounded_"
        ref = "critical mass 8 pi"
        with self.guard("verdict_" + name, ref):
            u0 = gaussian_field(int(p[key + "n"]), p[key + "half_width"],
                                mass=m, t=p["heat_time"])
            cfg = SolverConfig(t_start=p["t_start"], t_end=p[key + "t_end"],
                               n_snapshots=p["n_snapshots"], spacing="log",
                               rtol=p["rtol"], min_dt=p["min_dt"],
                               max_dt=p[key + "max_dt"],
                               energy=not supercritical)
            monitor = blowup_monitor(u0, p["t_start"], p["factor"],
                                     p["mass_fraction"]) \
                if supercritical else None
            try:
                traj = evolve_physical(u0, cfg, monitor)
            except SolverAbort as e:
                LOG.warning("mass {}: {}".format(name, e))
                traj = e.trajectory
            verdict = detect_blowup(traj, p["factor"], p["mass_fraction"])
            self.add_series("diagnostics_" + name, traj.to_dataframe(), "t",
                            "t_sup")
            label = "blowup" if verdict["blowup"] else "bounded"
            self.check_equal("verdict_" + name, label,
                             "blowup" if supercritical else "bounded", ref,
                             "status={} max t|u|={:.6g} time={}".format(
                                 traj.status, verdict["max_t_sup"],
                                 verdict["time"]))
            if supercritical:
                return
            tsup = traj.series("t_sup")
            peak = get_profile(m, **self.grid()).peak
            self.check_le("bounded_t_sup_" + name, float(np.max(tsup)),
                          p["bounded_factor"] * max(tsup[0], peak),
                          "t |u|_inf stays bounded below 8 pi")
            mass = traj.series("mass")
            self.check_le("mass_conservation_" + name,
                          float(np.max(np.abs(mass - mass[0]))) / mass[0],
                          p["mass_tol"], "mass is conserved")
            self.check_monotone("free_energy_" + name,
                                traj.series("free_energy"),
                                p["energy_slack"],
                                "free energy is a Lyapunov functional")


class SnSuite(BaseExperiment):
    """
    The frozen-profile propagator S_N for atomic data.
    """

    def __init__(self, seed=0, **kwargs):
        p = {"alphas": [4 * PI, 2 * PI],
             "positions": [[-1.0, 0.0], [1.0, 0.0]],
             "nu_center": [0.0, 0.5],
             "nu_mass": 1.0,
             "nu_heat_factor": 1.0 / 16.0,
             "eps": DEFAULT_EPSILON,
             "n": 512,
             "half_width": 8.0,
             "s_factor": 0.25,
             "ladder": [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0],
             "factor": 2.0,
             "rtol": 1e-6,
             "heat_tol": 1e-10,
             "linearity_span": 0.125,
             "linearity_steps": 64,
             "linearity_tol": 1e-10,
             "mass_rtol": 1e-6,
             "decay_alpha": 4 * PI,
             "decay_n": 128,
             "decay_half_width": 12.0,
             "decay_span": 4.0,
             "decay_fit_from": 1.0,
             "decay_factor": 2.0,
             "heat_limit_ladder": [1.0 / 4.0, 1.0 / 16.0, 1.0 / 64.0],
             "heat_limit_tol": 0.05,
             "hls_fields": 8,
             "hls_bumps": 3,
             "hls_n": 128,
             "hls_half_width": 16.0,
             "hls_bound": 1.0,
             "hls_factor": 4.0,
             "operator_points": 2048,
             "points": 4096,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _run(self):
        p = self.params
        atoms = [Atom(tuple(z), a)
                 for z, a in zip(p["positions"], p["alphas"])]
        d = min_pairwise_distance(atoms)
        t0 = default_start_time(d)
        s = p["s_factor"] * t0
        n, L = int(p["n"]), p["half_width"]
        nu = gaussian_field(n, L, p["nu_mass"], tuple(p["nu_center"]),
                            t=t0 * p["nu_heat_factor"])
        provider = get_provider("pks", **self.grid())

        ref = "atomic decomposition of the data"
        with self.guard("decomposition", ref):
            mu = MeasureData(atoms, nu, nonnegative=True)
            dec = decompose(mu, p["eps"])
            self.check_equal("decomposition_atoms", dec.n_atoms, len(atoms),
                             ref, "d={:.6g}".format(dec.d))
            self.check_close("decomposition_distance", dec.d, d, 1e-12, ref)
            u0 = regularize(dec, t0, provider)
            self.check_rel("decomposition_mass", u0.mass(), mu.total_mass,
                           p["mass_rtol"], ref)

        ref = "S_N satisfies the hypercontractivity estimate"
        with self.guard("sn_hypercontractivity", ref):
            times = [s + l * t0 for l in p["ladder"]]
            cfg = SolverConfig(rtol=p["rtol"], energy=False)
            traj = sn_evolve(nu, s, times[-1], atoms, provider, cfg, t0=t0,
                             snapshot_times=times)
            df = traj.to_dataframe()
            self.add_series("sn_ladder", df, "elapsed", "scaled_l43")
            vals = [float(df["scaled_l43"][np.isclose(df["t"], t)].iloc[0])
                    for t in times]
            self.check_spread("sn_hypercontractivity", vals, p["factor"],
                              ref)

        ref = "S_N without atoms is the heat semigroup"
        with self.guard("sn_heat", ref):
            span = p["ladder"][-1] * t0
            cfg = SolverConfig(rtol=p["rtol"], n_snapshots=1, energy=False)
            f = sn_evolve(nu, s, s + span, list(), provider, cfg).final
            exact = heat_apply(nu, span)
            self.check_le("sn_heat", lp_norm(f - exact, 1) /
                          lp_norm(exact, 1), p["heat_tol"], ref)

        ref = "S_N is linear"
        with self.guard("sn_linearity", ref):
            span = p["linearity_span"] * t0
            cfg = SolverConfig(adaptive=False,
                               dt=span / p["linearity_steps"],
                               n_snapshots=1, energy=False)
            other = gaussian_bump(n, L, 1.0, (0.5, -0.5), width=0.2)
            a, b = 2.0, -0.5

            def S(f):
                return sn_evolve(f, s, s + span, atoms, provider, cfg,
                                 t0=t0).final

            lhs = S(nu * a + other * b)
            rhs = S(nu) * a + S(other) * b
            self.check_le("sn_linearity", lp_norm(lhs - rhs, 1) /
                          lp_norm(rhs, 1), p["linearity_tol"], ref)

        self._heat_limit(atoms, nu, t0)
        self._hls()
        self._decay(provider)

    def _heat_limit(self, atoms, nu, t0):
        p = self.params
        ref = "t^{1/4} |e^{t Delta} mu|_{4/3} tends to its atomic part"
        with self.guard("heat_lp_limit", ref):
            q = 4.0 / 3.0
            mu = MeasureData(atoms, nu, nonnegative=True)
            limit = heat_lp_limit(mu, q)
            rows = list()
            for frac in p["heat_limit_ladder"]:
                t = frac * t0
                u = heat_measure(mu, t)
                rows.append({"t": t, "ratio": t ** (1.0 - 1.0 / q) *
                             lp_norm(u, q) / limit})
            df = pd.DataFrame(rows)
            self.add_series("heat_limit", df, "t", "ratio")
            dev = np.abs(df["ratio"].values - 1.0)
            self.check_le("heat_lp_limit", float(dev[-1]),
                          p["heat_limit_tol"], ref,
                          "limit={:.6g}".format(limit))
            self.check_le("heat_lp_limit_trend", float(dev[-1]),
                          float(dev[0]), ref)

    def _hls(self):
        p = self.params
        ref = "|v|_4 <= C |u|_{4/3} uniformly in u"
        with self.guard("hls_ratio", ref):
            n, L = int(p["hls_n"]), p["hls_half_width"]
            ratios = list()
            for _ in range(int(p["hls_fields"])):
                u = None
                for _ in range(int(p["hls_bumps"])):
                    b = gaussian_bump(n, L, self.rng.uniform(0.5, 1.5),
                                      tuple(self.rng.uniform(-1.5, 1.5, 2)),
                                      width=self.rng.uniform(0.5, 0.8))
                    u = b if u is None else u + b
                ratios.append(hls_ratio(u))
            self.add_series("hls", pd.DataFrame(
                {"field": np.arange(len(ratios)), "ratio": ratios}),
                "field", "ratio")
            self.check_le("hls_ratio", float(np.max(ratios)),
                          p["hls_bound"], ref)
            self.check_spread("hls_ratio_spread", ratios, p["hls_factor"],
                              ref)

    def _decay(self, provider):
        p = self.params
        ref = "confined Fokker-Planck decay at the spectral gap"
        with self.guard("sn_decay", ref):
            a = p["decay_alpha"]
            G = profile_field(provider(a), int(p["decay_n"]),
                              p["decay_half_width"], check_support=False)
            f0 = gradient(G)[0]
            cfg = SolverConfig(rtol=p["rtol"], n_snapshots=16, energy=False)
            traj = sn_evolve(f0, 0.0, p["decay_span"], [Atom((0.0, 0.0), a)],
                             provider, cfg, frame="similarity")
            tau = np.asarray(traj.times)
            l1 = traj.series("l1")
            self.add_series("sn_decay", traj.to_dataframe(), "t", "l1")
            mask = tau >= p["decay_fit_from"]
            rate = decay_rate(tau[mask], l1[mask])["rate"]
            lam = gap_summary(get_profile(a, **self.grid(
                p["operator_points"])), (0, 1, 2))["lambda_alpha"]
            f = p["decay_factor"]
            self.check_range("sn_decay_rate", rate, lam / f, lam * f, ref,
                             "lambda_alpha={:.6g}".format(lam))


class EnergySuite(BaseExperiment):
    """
    Coercivity of the linearized free energy, its dissipation along the
    linearized flow and the physical energy balance.
    """

    def __init__(self, seed=0, **kwargs):
        p = {"alphas": [2 * PI, 4 * PI, 6 * PI],
             "basis_size": 12,
             "modes": [0, 1, 2, 3],
             "inequality_slack": 1e-10,
             "linear_alpha": 4 * PI,
             "n": 128,
             "half_width": 12.0,
             "tau_span": 4.0,
             "n_snapshots": 16,
             "rtol": 1e-7,
             "translation_rtol": 0.1,
             "energy_slack": 1e-10,
             "random_degree": 2,
             "rate_fraction": 0.5,
             "physical_mass": 4 * PI,
             "physical_n": 128,
             "physical_half_width": 16.0,
             "physical_span": [1.0, 2.0],
             "dissipation_rtol": 0.1,
             "points": 2048,
             "rmax": 20.0}
        self._configure(p, seed, kwargs)

    def _run(self):
        self._coercivity()
        self._translation()
        self._random()
        self._physical()

    def _coercivity(self):
        p = self.params
        modes = [int(n) for n in p["modes"]]
        ref = "linearized free energy is coercive"
        rows = list()
        for a in p["alphas"]:
            name = alpha_name(a)
            with self.guard("coercivity_" + name, ref):
                pr = get_profile(a, **self.grid())
                C = coercivity_constant(pr, int(p["basis_size"]), modes)
                self.check_range("coercivity_" + name, C, 0.0, 1.0, ref)
                worst = np.inf
                for n in modes:
                    _, Q = coercivity_basis(pr, n, int(p["basis_size"]))
                    for j in range(Q.shape[1]):
                        quad, inter, twoF = radial_linearized_energy(
                            pr, n, pr.G * Q[:, j])
                        worst = min(worst, (twoF - (1.0 - C) * quad) / quad)
                self.check_ge("coercivity_inequality_" + name, worst,
                              -p["inequality_slack"], ref)
                rows.append({"alpha": a, "C_alpha": C, "margin": worst})
        if rows:
            self.add_series("coercivity", pd.DataFrame(rows), "alpha",
                            "C_alpha")

    def _linear_run(self, f0, pr):
        p = self.params
        cfg = SolverConfig(rtol=p["rtol"], n_snapshots=p["n_snapshots"])
        return evolve_linearized(f0, pr, (0.0, p["tau_span"]), cfg)

    def _translation(self):
        p = self.params
        ref = "translation mode decays like exp(-tau/2)"
        with self.guard("translation_decay", ref):
            pr = get_profile(p["linear_alpha"], **self.grid())
            G = profile_field(pr, int(p["n"]), p["half_width"],
                              check_support=False)
            traj = self._linear_run(gradient(G)[0], pr)
            self.add_series("linearized_translation", traj.to_dataframe(),
                            "tau", "l2")
            rate = decay_rate(traj.times, traj.series("l2"))["rate"]
            self.check_rel("translation_decay", rate, 0.5,
                           p["translation_rtol"], ref)
            self.check_monotone("translation_energy",
                                traj.series("F_tilde"), p["energy_slack"],
                                "linearized free energy dissipates")

    def _random_data(self, G):
        p = self.params
        X, Y = G.grid.mesh()
        deg = int(p["random_degree"])
        q = np.zeros_like(X)
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                q += self.rng.normal() * X ** i * Y ** j
        v = G.values * q
        v -= v.sum() / G.values.sum() * G.values
        f = G.with_values(v)
        return f * (1.0 / lp_norm(f, 1))

    def _random(self):
        p = self.params
        ref = "mean-zero perturbations decay at the spectral gap"
        with self.guard("random_decay", ref):
            pr = get_profile(p["linear_alpha"], **self.grid())
            G = profile_field(pr, int(p["n"]), p["half_width"],
                              check_support=False)
            traj = self._linear_run(self._random_data(G), pr)
            self.add_series("linearized_random", traj.to_dataframe(), "tau",
                            "l2m")
            rate = decay_rate(traj.times, traj.series("l2m"))["rate"]
            K = gap_summary(pr)["K_alpha"]
            self.check_ge("random_decay", rate, p["rate_fraction"] * K, ref,
                          "K_alpha={:.6g}".format(K))
            self.check_monotone("random_energy", traj.series("F_tilde"),
                                p["energy_slack"],
                                "linearized free energy dissipates")

    def _physical(self):
        p = self.params
        ref = "free energy decreases at the rate of its dissipation"
        with self.guard("energy_balance", ref):
            t1, t2 = p["physical_span"]
            u0 = gaussian_field(int(p["physical_n"]),
                                p["physical_half_width"],
                                mass=p["physical_mass"], t=t1)
            cfg = SolverConfig(t_start=t1, t_end=t2, rtol=p["rtol"],
                               n_snapshots=p["n_snapshots"],
                               store_fields=True)
            traj = evolve_physical(u0, cfg)
            F = traj.series("free_energy")
            D = np.array([dissipation_physical(u, threshold=1.0)
                          for u in traj.fields])
            df = traj.to_dataframe()
            df["dissipation"] = D
            self.add_series("energy_balance", df, "t", "free_energy")
            self.check_monotone("physical_energy", F, p["energy_slack"],
                                "free energy is a Lyapunov functional")
            self.check_rel("energy_balance", F[0] - F[-1],
                           trapezoid(D, traj.times), p["dissipation_rtol"],
                           ref)


# running experiments

def run_experiment(cfg):
    """
    Execute one experiment. Module errors become failed checks.
    """
    cfg = ExperimentConfig(cfg)
    started = datetime.datetime.now().isoformat(timespec="seconds")
    t_start = time.time()
    LOG.info("*** Running experiment '{}' ({}) hash={}".format(
        cfg.name, cfg.experiment, cfg.hash))
    exp = cfg.cls.generate(cfg.conf)[0]
    checks, series = exp.run()
    report = RunReport(cfg.name, cfg.experiment, cfg.conf, cfg.seed, checks,
                       series, environment_stamp(), started,
                       time.time() - t_start)
    LOG.info("*** Experiment '{}' {} in {:.1f}s".format(
        cfg.name, "passed" if report.passed else "FAILED",
        report.wall_clock))
    return report


def expand_sweep(conf):
    """
    One config per point of the cartesian product of conf["sweep"].
    """
    sweep = conf.get("sweep") or dict()
    grid = {k: expand_parameters(v) for k, v in sweep.items()}
    r = list()
    for point in cartesian_product(grid):
        c = copy.deepcopy(conf)
        c.pop("sweep", None)
        for k, v in point.items():
            set_by_path(c, k, v)
        r.append(c)
    LOG.info("*** Expanded sweep to {} configurations".format(len(r)))
    return r


def _run_conf(conf):
    return run_experiment(conf).to_dict()


def sweep(conf, jobs=1):
    """
    Run all sweep points on a bounded process pool; reports are
    returned ordered by config hash.
    """
    variants = expand_sweep(conf)
    for v in variants:
        ExperimentConfig(v)
    if jobs <= 1 or len(variants) <= 1:
        reports = [run_experiment(v) for v in variants]
    else:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=int(jobs)) as ex:
            reports = [RunReport.from_dict(d)
                       for d in ex.map(_run_conf, variants)]
    return sorted(reports, key=lambda r: r.config_hash)


# single evolutions (CLI "evolve")

def evolution_params(params):
    p = {"frame": "physical",
         "model": "pks",
         "initial": {"atoms": [{"x": 0.0, "y": 0.0, "mass": 4 * PI}],
                     "nonnegative": True},
         "n": 128,
         "half_width": 8.0,
         "t_start": None,
         "t_end": 0.25,
         "tau_span": [0.0, 4.0],
         "eps": DEFAULT_EPSILON,
         "detect_blowup": False,
         "solver": dict(),
         "points": 4096,
         "rmax": 20.0}
    unknown = set(params) - set(p)
    if unknown:
        raise ConfigError("evolve: unknown parameters {}".format(
            sorted(unknown)))
    p.update({k: parse_number(v) for k, v in params.items()})
    return p


def run_evolution(conf):
    """
    Regularize measure data and evolve it. Returns (trajectory,
    manifest); aborted runs return their partial trajectory.
    """
    p = evolution_params(conf.get("params", dict()))
    provider = get_provider(p["model"], points=int(p["points"]),
                            rmax=p["rmax"])
    grid = {"n": int(p["n"]), "half_width": p["half_width"]}
    mu = MeasureData.from_dict(p["initial"], grid)
    dec = decompose(mu, p["eps"])
    solver = {k: parse_number(v) for k, v in p["solver"].items()}
    solver["model"] = p["model"]
    if p["frame"] == "physical":
        t0 = p["t_start"] or default_start_time(dec.d)
        u0 = regularize(dec, t0, provider, grid["n"], grid["half_width"])
        cfg = SolverConfig(t_start=t0, t_end=p["t_end"], **solver)
        monitor = blowup_monitor(u0, t0) \
            if p["detect_blowup"] and p["model"] == "pks" else None
        run = lambda: evolve_physical(u0, cfg, monitor)
    elif p["frame"] == "similarity":
        # tau = 0 is t = 1
        w0 = regularize(dec, 1.0, provider, grid["n"], grid["half_width"])
        cfg = SolverConfig(**solver)
        run = lambda: evolve_similarity(w0, provider, tuple(p["tau_span"]),
                                        cfg)
    else:
        raise ConfigError("unknown frame '{}'".format(p["frame"]))
    error = None
    try:
        traj = run()
    except SolverAbort as e:
        LOG.error("Evolution aborted: {}".format(e))
        traj = e.trajectory
        error = "{}: {}".format(e.__class__.__name__, e)
    manifest = {"name": conf.get("name"),
                "config": conf,
                "config_hash": config_hash(hashable_config(conf)),
                "solver": cfg.params,
                "frame": p["frame"],
                "status": traj.status,
                "steps": traj.steps,
                "rejected": traj.rejected,
                "error": error,
                "environment": environment_stamp()}
    if p["frame"] == "physical" and p["model"] == "pks":
        manifest["blowup"] = detect_blowup(traj)
    return traj, to_jsonable(manifest)
