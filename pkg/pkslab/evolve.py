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
import numpy as np
import pandas as pd

from pkslab.error import (CFLCollapse, NaNGuard, ConfinementFailure,
                          SupportOverflow, IntegratorError, PksLabError)
from pkslab.fields import (Field2D, WeightedNormSpec, norm_lpm, lp_norm,
                           dilate, DEFAULT_WEIGHT_M,
                           DEFAULT_SUPPORT_THRESHOLD)
from pkslab.measures import (CRITICAL_MASS, min_pairwise_distance, Atom,
                             default_start_time)
from pkslab.velocity import velocity_arrays, profile_velocity
from pkslab.profiles import profile_field
from pkslab.energies import (free_energy_physical, free_energy_similarity,
                             linearized_energy)
from pkslab.fit import order_of_convergence


LOG = logging.getLogger(os.path.basename(__file__))

MODELS = ("pks", "nse")
# Bogacki-Shampine 3(2): third and embedded second order weights
_B = (2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0)
_BHAT = (7.0 / 24.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 8.0)


class SolverConfig(object):
    """
    Time stepping parameters. Unknown keys are rejected.
    """

    def __init__(self, **kwargs):
        p = {"model": "pks",
             "cfl": 0.5,
             "max_dt": 1e-2,
             "min_dt": 1e-10,
             "dt": None,
             "adaptive": True,
             "rtol": 1e-6,
             "atol": 1e-12,
             "dealias": True,
             "t_start": None,
             "t_end": None,
             "n_snapshots": 20,
             "spacing": "linear",
             "weight_m": DEFAULT_WEIGHT_M,
             "store_fields": False,
             "support_threshold": DEFAULT_SUPPORT_THRESHOLD,
             "dump_dir": None,
             "energy": True,
             "max_steps": 1000000}
        unknown = set(kwargs) - set(p)
        if unknown:
            raise ValueError("unknown solver parameters: {}".format(
                sorted(unknown)))
        p.update({k: v for k, v in kwargs.items() if v is not None or
                  k in ("dt", "t_start", "t_end", "dump_dir")})
        self.params = p
        self.validate()

    def __repr__(self):
        return "SolverConfig({})".format(self.params)

    def __getattr__(self, name):
        try:
            return self.__dict__["params"][name]
        except KeyError:
            raise AttributeError(name)

    def validate(self):
        p = self.params
        if p["model"] not in MODELS:
            raise ValueError("unknown model '{}'".format(p["model"]))
        if not (0.0 < p["cfl"] <= 1.0):
            raise ValueError("CFL number must be in (0, 1]")
        if p["t_start"] is not None and p["t_end"] is not None:
            if not (p["t_end"] > p["t_start"] > 0):
                raise ValueError("need t_end > t_start > 0")
        if not p["adaptive"] and not (p["dt"] and p["dt"] > 0):
            raise ValueError("fixed step runs need dt > 0")
        if p["spacing"] not in ("linear", "log"):
            raise ValueError("snapshot spacing must be linear or log")
        if int(p["n_snapshots"]) < 1:
            raise ValueError("need at least one snapshot")

    def replace(self, **kwargs):
        p = dict(self.params)
        p.update(kwargs)
        return SolverConfig(**p)

    def snapshot_times(self, start, end):
        n = int(self.n_snapshots)
        if self.spacing == "log" and start > 0:
            return list(np.geomspace(start, end, n + 1)[1:])
        return list(np.linspace(start, end, n + 1)[1:])


class Diagnostics(object):
    """
    One row per snapshot.
    """

    def __init__(self):
        self.rows = list()

    def __len__(self):
        return len(self.rows)

    def record(self, row):
        self.rows.append(dict(row))

    def series(self, name):
        return np.array([r.get(name, np.nan) for r in self.rows],
                        dtype=float)

    def to_dataframe(self):
        return pd.DataFrame(self.rows)

    def to_csv(self, path):
        self.to_dataframe().to_csv(path, index=False)
        LOG.debug("Wrote {} diagnostics rows to '{}'".format(len(self), path))


class Trajectory(object):

    def __init__(self, frame, time_name="t"):
        self.frame = frame
        self.time_name = time_name
        self.times = list()
        self.fields = list()
        self.diagnostics = Diagnostics()
        self.final = None
        self.status = "running"
        self.steps = 0
        self.rejected = 0

    def __repr__(self):
        return "Trajectory({}, snapshots={}, steps={}, status={})".format(
            self.frame, len(self.times), self.steps, self.status)

    def add(self, t, field, row, store=False):
        if self.times and not t > self.times[-1]:
            return
        self.times.append(float(t))
        if store:
            self.fields.append(field)
        self.final = field
        self.diagnostics.record(row)

    def series(self, name):
        return self.diagnostics.series(name)

    def to_dataframe(self):
        return self.diagnostics.to_dataframe()


class LawsonStepper(object):
    """
    Integrating factor (Lawson) Bogacki-Shampine 3(2) for
    u_t = Delta u + N(t, u): diffusion exact in Fourier space,
    N advanced explicitly. rhs(t, u) returns (N_hat, speed) where speed
    bounds the CFL time step.
    """

    def __init__(self, grid, rhs, cfg):
        self.grid = grid
        self.rhs = rhs
        self.cfg = cfg
        self._cache = dict()

    def _E(self, h):
        m = self._cache.get(h)
        if m is None:
            m = np.exp(-h * self.grid.k2)
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[h] = m
        return m

    def _cfl_dt(self, speed):
        if speed <= 0:
            return np.inf
        return self.cfg.cfl * self.grid.h / speed

    def step(self, t, u_hat, k1, h):
        g = self.grid
        E1, E2, E4 = self._E(h), self._E(0.5 * h), self._E(0.25 * h)
        E34 = self._E(0.75 * h)
        U2 = E2 * (u_hat + 0.5 * h * k1)
        k2, _ = self.rhs(t + 0.5 * h, g.ifft(U2))
        U3 = E34 * u_hat + 0.75 * h * E4 * k2
        k3, _ = self.rhs(t + 0.75 * h, g.ifft(U3))
        base = E1 * k1
        mid = E2 * k2
        late = E4 * k3
        u_new = E1 * u_hat + h * (_B[0] * base + _B[1] * mid + _B[2] * late)
        values = g.ifft(u_new)
        k4, speed = self.rhs(t + h, values)
        err_hat = h * ((_B[0] - _BHAT[0]) * base + (_B[1] - _BHAT[1]) * mid
                       + (_B[2] - _BHAT[2]) * late - _BHAT[3] * k4)
        return u_new, values, k4, speed, err_hat

    def integrate(self, traj, u0, t0, t_end, snapshot_times, observe,
                  monitor=None, store=False, checkpoint=None):
        """
        Advance u0 from t0 to t_end, recording a row at t0 and at every
        snapshot time. monitor(t, values) -> True stops the run.
        """
        cfg = self.cfg
        g = self.grid
        u = np.array(u0, dtype=float)
        u_hat = g.fft(u)
        t = float(t0)
        traj.add(t, self._field(u), observe(t, u, 0.0), store)
        k1, speed = self.rhs(t, u)
        h_try = cfg.dt if cfg.dt else min(cfg.max_dt, self._cfl_dt(speed))
        h = h_try
        targets = [s for s in snapshot_times if s > t] or [t_end]
        warned = False
        for target in targets:
            while t < target - 1e-14 * max(1.0, abs(target)):
                if traj.steps >= cfg.max_steps:
                    raise IntegratorError(
                        "maximum number of steps {} reached at t={:.6g}"
                        .format(cfg.max_steps, t))
                h_cfl = self._cfl_dt(speed)
                if cfg.adaptive:
                    h = min(h_try, h_cfl, cfg.max_dt)
                else:
                    h = cfg.dt
                    if h > h_cfl and not warned:
                        LOG.warning("fixed dt={:.3g} above CFL limit "
                                    "{:.3g}".format(h, h_cfl))
                        warned = True
                h = min(h, target - t)
                if h < cfg.min_dt and target - t > cfg.min_dt:
                    self._record_abort(traj, t, u, h, observe)
                    traj.status = "cfl_collapse"
                    raise CFLCollapse(
                        "time step {:.3e} below {:.0e} at t={:.6g}"
                        .format(h, cfg.min_dt, t), traj)
                u_new, values, k4, speed_new, err_hat = self.step(
                    t, u_hat, k1, h)
                if not np.all(np.isfinite(values)):
                    self._nan_abort(traj, t, u)
                if cfg.adaptive:
                    err = np.max(np.abs(g.ifft(err_hat)))
                    scale = cfg.atol + cfg.rtol * np.max(np.abs(values))
                    ratio = err / scale
                    fac = 5.0 if ratio == 0 else \
                        min(5.0, max(0.2, 0.9 * ratio ** (-1.0 / 3.0)))
                    if ratio > 1.0:
                        traj.rejected += 1
                        h_try = h * fac
                        continue
                    h_try = max(h_try, h * fac) if h < h_try else h * fac
                t += h
                u_hat, u, k1, speed = u_new, values, k4, speed_new
                traj.steps += 1
                if checkpoint is not None:
                    checkpoint(t, u)
                if monitor is not None and monitor(t, u):
                    traj.add(t, self._field(u), observe(t, u, h), store)
                    traj.status = "stopped"
                    LOG.info("Run stopped by monitor at {}={:.6g}".format(
                        traj.time_name, t))
                    return traj
            traj.add(t, self._field(u), observe(t, u, h), store)
            LOG.debug("{} {}={:.6g} steps={} rejected={}".format(
                traj.frame, traj.time_name, t, traj.steps, traj.rejected))
        traj.status = "completed"
        return traj

    def _field(self, values):
        g = self.grid
        return Field2D(values, g.half_width, g.center)

    def _record_abort(self, traj, t, u, h, observe):
        try:
            traj.add(t, self._field(u), observe(t, u, h))
        except PksLabError as e:
            LOG.debug("no diagnostics for the aborted state: {}".format(e))
        traj.final = self._field(u)

    def _nan_abort(self, traj, t, u):
        traj.status = "nan"
        traj.final = self._field(u)
        path = None
        if self.cfg.dump_dir:
            os.makedirs(self.cfg.dump_dir, exist_ok=True)
            path = os.path.join(self.cfg.dump_dir,
                                "nan_state_t{:.6g}.field".format(t))
            traj.final.to_file(path)
        raise NaNGuard("non-finite state after t={:.6g}".format(t), traj,
                       path)


def _divergence_hat(grid, fx, fy, dealias):
    h = grid.ikx * grid.fft(fx) + grid.iky * grid.fft(fy)
    if dealias:
        h = h * grid.dealias_mask
    return h


def _norms(f, cfg):
    return {"mass": f.mass(),
            "sup": float(np.max(np.abs(f.values))),
            "min": float(f.values.min()),
            "l1": lp_norm(f, 1),
            "l43": lp_norm(f, 4.0 / 3.0),
            "l2m": norm_lpm(f, WeightedNormSpec(2, cfg.weight_m))}


def ball_mass(f, z, radius):
    r = f.grid.radius(z)
    return float(f.values[r <= radius].sum() * f.grid.cell_area)


# physical variables

def evolve_physical(u0, cfg, monitor=None):
    """
    u_t = Delta u - div(u v(u)) from cfg.t_start to cfg.t_end.
    """
    if cfg.t_start is None or cfg.t_end is None:
        raise ValueError("physical runs need t_start and t_end")
    g = u0.grid
    model = cfg.model
    if model == "pks" and u0.values.min() < -1e-12 * max(
            u0.values.max(), 0.0):
        raise ValueError("PKS initial data must be nonnegative")

    def rhs(t, u):
        vx, vy = velocity_arrays(g, u, model)
        nh = -_divergence_hat(g, u * vx, u * vy, cfg.dealias)
        return nh, float(np.max(np.hypot(vx, vy)))

    def observe(t, u, dt):
        f = Field2D(u, g.half_width, g.center)
        row = {"t": t, "dt": dt}
        row.update(_norms(f, cfg))
        row["t_sup"] = t * row["sup"]
        row["t_l43"] = t ** 0.25 * row["l43"]
        i, j = np.unravel_index(np.argmax(u), u.shape)
        row["sup_x"], row["sup_y"] = float(g.x[i]), float(g.y[j])
        row["ball_mass"] = ball_mass(f, (g.x[i], g.y[j]), np.sqrt(t))
        frac = g.tail_fraction(u)
        row["tail"] = frac
        if frac > cfg.support_threshold:
            raise SupportOverflow(frac, cfg.support_threshold,
                                  "evolve_physical at t={:.4g}".format(t))
        row["free_energy"] = np.nan
        if model == "pks" and cfg.energy:
            try:
                row["free_energy"] = free_energy_physical(
                    f, threshold=1.0).value
            except PksLabError as e:
                LOG.debug("free energy unavailable at t={:.4g}: {}"
                          .format(t, e))
        return row

    stepper = LawsonStepper(g, rhs, cfg)
    traj = Trajectory("physical", "t")
    LOG.info("Physical {} run t={:.4g} -> {:.4g} on n={} L={}".format(
        model, cfg.t_start, cfg.t_end, g.n, g.half_width))
    return stepper.integrate(traj, u0.values, cfg.t_start, cfg.t_end,
                             cfg.snapshot_times(cfg.t_start, cfg.t_end),
                             observe, monitor, cfg.store_fields)


def blowup_monitor(u0, t0, factor=50.0, mass_fraction=0.9):
    """
    Online version of detect_blowup: stops evolve_physical once t||u||_inf
    passed factor x its value at t0 with a critical mass concentrated
    within sqrt(t) of the maximum.
    """
    grid = u0.grid
    initial = t0 * float(np.max(u0.values))

    def monitor(t, u):
        if t * float(np.max(u)) <= factor * initial:
            return False
        i, j = np.unravel_index(np.argmax(u), u.shape)
        r = grid.radius((grid.x[i], grid.y[j]))
        m = float(u[r <= np.sqrt(t)].sum() * grid.cell_area)
        return m > mass_fraction * CRITICAL_MASS

    return monitor


def detect_blowup(traj, factor=50.0, mass_fraction=0.9):
    """
    Blow-up iff t||u||_inf exceeds factor x its initial value while the
    mass within sqrt(t) of the maximum exceeds mass_fraction * 8 pi.
    """
    tsup = traj.series("t_sup")
    r = {"blowup": False, "time": None, "max_t_sup": 0.0, "ratio": 0.0}
    if len(tsup) == 0 or not np.isfinite(tsup[0]) or tsup[0] <= 0:
        return r
    times = np.asarray(traj.times)
    bm = traj.series("ball_mass")
    ratio = tsup / tsup[0]
    r["max_t_sup"] = float(np.nanmax(tsup))
    r["ratio"] = float(np.nanmax(ratio))
    hit = (ratio > factor) & (bm > mass_fraction * CRITICAL_MASS)
    if np.any(hit):
        r["blowup"] = True
        r["time"] = float(times[np.argmax(hit)])
    return r


# similarity variables

def similarity_to_physical(w, t):
    """
    u(x) = t^{-1} w(x / sqrt(t)) on the same grid.
    """
    return dilate(w, np.sqrt(t))


def physical_to_similarity(u, t):
    """
    w(xi) = t u(sqrt(t) xi) on the same grid.
    """
    return dilate(u, 1.0 / np.sqrt(t))


def _drift_fields(g):
    X, Y = g.mesh()
    return 0.5 * X, 0.5 * Y, 0.5 * float(np.max(np.hypot(X, Y)))


def evolve_similarity(w0, profiles=None, tau_span=(0.0, 8.0), cfg=None,
                      reference=None):
    """
    w_tau = Delta w + 1/2 div(xi w) - div(w v(w)). The distance to the
    profile of the same mass (from profiles, or reference) is recorded.
    """
    cfg = cfg or SolverConfig()
    g = w0.grid
    model = cfg.model
    dx, dy, drift = _drift_fields(g)
    if reference is None and profiles is not None:
        reference = profile_field(profiles(w0.mass()), g.n, g.half_width,
                                  g.center, check_support=False)
    ref = None if reference is None else reference.values

    def rhs(t, w):
        vx, vy = velocity_arrays(g, w, model)
        nh = _divergence_hat(g, w * (dx - vx), w * (dy - vy), cfg.dealias)
        return nh, float(np.max(np.hypot(vx, vy))) + drift

    def observe(tau, w, dt):
        f = Field2D(w, g.half_width, g.center)
        row = {"tau": tau, "dt": dt}
        row.update(_norms(f, cfg))
        frac = g.tail_fraction(w)
        row["tail"] = frac
        if ref is not None:
            row["dist_l1"] = float(np.abs(w - ref).sum() * g.cell_area)
        X, Y = g.mesh()
        row["second_moment"] = float(np.sum(w * (X ** 2 + Y ** 2))
                                     * g.cell_area)
        row["free_energy"] = np.nan
        if model == "pks" and cfg.energy:
            try:
                row["free_energy"] = free_energy_similarity(
                    f, threshold=1.0).value
            except PksLabError as e:
                LOG.debug("free energy unavailable at tau={:.4g}: {}"
                          .format(tau, e))
        if frac > cfg.support_threshold:
            traj.add(tau, f, row)
            traj.status = "confinement_failure"
            raise ConfinementFailure(
                "mass fraction {:.3g} left the inner box at tau={:.4g}"
                .format(frac, tau), traj)
        return row

    stepper = LawsonStepper(g, rhs, cfg)
    traj = Trajectory("similarity", "tau")
    LOG.info("Similarity {} run tau={:.4g} -> {:.4g} on n={} L={}".format(
        model, tau_span[0], tau_span[1], g.n, g.half_width))
    return stepper.integrate(traj, w0.values, tau_span[0], tau_span[1],
                             _linear_times(cfg, tau_span), observe,
                             None, cfg.store_fields)


def _linear_times(cfg, span):
    n = int(cfg.n_snapshots)
    return list(np.linspace(span[0], span[1], n + 1)[1:])


# linearized flow around G_alpha

def evolve_linearized(f0, p, tau_span=(0.0, 4.0), cfg=None):
    """
    f_tau = L f - Lambda_alpha f with
    Lambda_alpha f = div(G v^f) + div(f v^G).
    """
    cfg = cfg or SolverConfig()
    g = f0.grid
    dx, dy, drift = _drift_fields(g)
    G = profile_field(p, g.n, g.half_width, g.center,
                      check_support=False).values
    gvx, gvy = profile_velocity(p, 1.0, (0.0, 0.0), g)
    gspeed = float(np.max(np.hypot(gvx, gvy)))

    def rhs(t, f):
        vx, vy = velocity_arrays(g, f, "pks")
        fx = f * (dx - gvx) - G * vx
        fy = f * (dy - gvy) - G * vy
        return _divergence_hat(g, fx, fy, cfg.dealias), gspeed + drift

    def observe(tau, f, dt):
        fld = Field2D(f, g.half_width, g.center)
        row = {"tau": tau, "dt": dt}
        row.update(_norms(fld, cfg))
        row["l2"] = lp_norm(fld, 2)
        row["F_tilde"] = np.nan
        row["dissipation"] = np.nan
        if cfg.energy:
            try:
                row["F_tilde"], row["dissipation"] = linearized_energy(
                    fld, p, threshold=1.0)
            except PksLabError as e:
                LOG.debug("linearized energy unavailable at tau={:.4g}: {}"
                          .format(tau, e))
        return row

    stepper = LawsonStepper(g, rhs, cfg)
    traj = Trajectory("linearized", "tau")
    LOG.info("Linearized run alpha={:.6g} tau={:.4g} -> {:.4g}".format(
        p.alpha, tau_span[0], tau_span[1]))
    return stepper.integrate(traj, f0.values, tau_span[0], tau_span[1],
                             _linear_times(cfg, tau_span), observe,
                             None, cfg.store_fields)


# frozen-profile propagator S_N(t, s)

def _centers(centers):
    return [c if isinstance(c, Atom) else Atom(c[0], c[1])
            for c in centers]


def sn_evolve(f0, s, t, centers, profiles, cfg=None, t0=None,
              frame="physical", snapshot_times=None):
    """
    f_t + div(f sum_j t^{-1/2} v^{G_j}((x - z_j)/sqrt(t))) = Delta f
    from s to t. In the similarity frame the centres are fixed points
    xi = z_j and the drift 1/2 div(xi f) is added (s, t are then tau).
    """
    cfg = cfg or SolverConfig()
    atoms = _centers(centers)
    if frame == "physical":
        if not (0.0 < s < t):
            raise ValueError("need 0 < s < t")
        if len(atoms) >= 2:
            d = min_pairwise_distance(atoms)
            if not d > 0:
                raise ValueError("centres must be distinct")
            t0 = default_start_time(d) if t0 is None else t0
            if t > s + t0 * (1.0 + 1e-12):
                raise ValueError(
                    "t - s = {:.4g} exceeds t0 = {:.4g}".format(t - s, t0))
    elif frame == "similarity":
        if not t > s:
            raise ValueError("need tau > tau'")
    else:
        raise ValueError("unknown frame '{}'".format(frame))
    g = f0.grid
    model = cfg.model
    profs = [(a.position, profiles(a.mass)) for a in atoms]
    if frame == "similarity":
        dx, dy, drift = _drift_fields(g)
        frozen = [profile_velocity(pr, 1.0, z, g, model) for z, pr in profs]
        vx = sum(v[0] for v in frozen) if frozen else np.zeros((g.n, g.n))
        vy = sum(v[1] for v in frozen) if frozen else np.zeros((g.n, g.n))
        speed = float(np.max(np.hypot(vx, vy))) + drift

        def rhs(tt, f):
            return (_divergence_hat(g, f * (dx - vx), f * (dy - vy),
                                    cfg.dealias), speed)
    else:
        def rhs(tt, f):
            vx = np.zeros((g.n, g.n))
            vy = np.zeros((g.n, g.n))
            for z, pr in profs:
                ax, ay = profile_velocity(pr, tt, z, g, model)
                vx += ax
                vy += ay
            if not profs:
                return np.zeros_like(g.k2, dtype=complex), 0.0
            return (-_divergence_hat(g, f * vx, f * vy, cfg.dealias),
                    float(np.max(np.hypot(vx, vy))))

    def observe(tt, f, dt):
        fld = Field2D(f, g.half_width, g.center)
        row = {"t": tt, "elapsed": tt - s, "dt": dt}
        row.update(_norms(fld, cfg))
        row["scaled_l43"] = (tt - s) ** 0.25 * row["l43"] \
            if tt > s else np.nan
        return row

    stepper = LawsonStepper(g, rhs, cfg)
    traj = Trajectory("sn_" + frame, "t")
    times = snapshot_times if snapshot_times is not None else \
        _linear_times(cfg, (s, t))
    times = sorted(x for x in times if s < x <= t)
    if not times or times[-1] < t:
        times.append(t)
    return stepper.integrate(traj, f0.values, s, t, times, observe, None,
                             cfg.store_fields)


def sn_propagate(f0, s, t, centers, profiles, cfg=None, t0=None):
    """
    S_N(t, s) f0 (physical variables).
    """
    cfg = (cfg or SolverConfig()).replace(n_snapshots=1, energy=False)
    return sn_evolve(f0, s, t, centers, profiles, cfg, t0).final


# refinement study

def convergence_order(run, dt, levels=3):
    """
    Fixed step refinement: run(dt) -> final Field2D for dt, dt/2, ...
    Returns the observed order from successive L1 differences.
    """
    if levels < 3:
        raise ValueError("need at least three refinement levels")
    dts = [dt / 2 ** i for i in range(levels)]
    finals = [run(h) for h in dts]
    diffs = [lp_norm(finals[i] - finals[i + 1], 1)
             for i in range(levels - 1)]
    hs = dts[:-1]
    order = order_of_convergence(hs, diffs) if min(diffs) > 0 else np.inf
    LOG.info("Observed order {:.3f} from dts {} (diffs {})".format(
        order, dts, diffs))
    return {"dts": dts, "diffs": diffs, "order": float(order)}
