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
import io
import json
import threading
import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator, CubicSpline

from pkslab.error import OutOfRange, NonConvergence, TailTruncation
from pkslab.fields import (Field2D, RadialField, cell_volumes,
                           uniform_nodes, poisson_radial,
                           radial_gauss_velocity, get_grid,
                           DEFAULT_SUPPORT_THRESHOLD)
from pkslab.fit import loglog_fit


LOG = logging.getLogger(os.path.basename(__file__))

CRITICAL_MASS = 8.0 * np.pi
MAX_ALPHA = 7.9 * np.pi
DEFAULT_POINTS = 4096
DEFAULT_RMAX = 20.0
DEFAULT_TOL = 1e-12
DEFAULT_THETA = 0.5
DEFAULT_MAX_ITER = 200000
TAIL_RATIO = 1e-10

# solved profiles, keyed by (alpha, points, rmax, tol, theta)
CACHE_PROFILES = dict()
_CACHE_LOCK = threading.Lock()


def standard_gaussian(r):
    """
    Unit mass Gaussian (4 pi)^{-1} exp(-|xi|^2 / 4).
    """
    return np.exp(-np.asarray(r) ** 2 / 4.0) / (4.0 * np.pi)


def virial_value(alpha):
    """
    Second moment of G_alpha: 4 alpha (1 - alpha / 8 pi).
    """
    return 4.0 * alpha * (1.0 - alpha / CRITICAL_MASS)


class SelfSimilarProfile(object):
    """
    Radial table of G_alpha, its potential c_alpha, the velocity
    c'_alpha and the normalization Z.
    """

    def __init__(self, alpha, nodes, G, c, vG, Z, residual=0.0,
                 iterations=0, kind="pks", params=None):
        self.alpha = float(alpha)
        self.nodes = np.asarray(nodes, dtype=float)
        self.G = np.asarray(G, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.vG = np.asarray(vG, dtype=float)
        self.Z = float(Z)
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.kind = kind
        self.params = dict(params or dict())
        self._interp = dict()
        self._volumes = None
        for a in (self.G, self.c, self.vG):
            a.flags.writeable = False

    def __repr__(self):
        return "SelfSimilarProfile({}, alpha={:.6g}, N={}, rmax={})".format(
            self.kind, self.alpha, len(self.nodes), self.rmax)

    @property
    def rmax(self):
        return float(self.nodes[-1])

    @property
    def volumes(self):
        if self._volumes is None:
            self._volumes = cell_volumes(self.nodes)
        return self._volumes

    @property
    def field(self):
        return RadialField(self.nodes, self.G)

    @property
    def potential(self):
        return RadialField(self.nodes, self.c)

    @property
    def velocity(self):
        return RadialField(self.nodes, self.vG)

    @property
    def peak(self):
        return float(self.G[0])

    def mass(self):
        return float(2.0 * np.pi * np.dot(self.volumes, self.G))

    def second_moment(self):
        return float(2.0 * np.pi * np.dot(self.volumes,
                                          self.nodes ** 2 * self.G))

    def virial_error(self):
        v = virial_value(self.alpha)
        return abs(self.second_moment() - v) / abs(v)

    def interpolate(self, name, r):
        """
        Monotone cubic interpolation of G, c or vG at radii r;
        G and vG vanish / follow the Gauss law beyond r_max.
        """
        f = self._interp.get(name)
        if f is None:
            f = PchipInterpolator(self.nodes, getattr(self, name),
                                  extrapolate=False)
            self._interp[name] = f
        r = np.asarray(r, dtype=float)
        out = f(np.minimum(r, self.rmax))
        outside = r > self.rmax
        if np.any(outside):
            if name == "G":
                out = np.where(outside, 0.0, out)
            elif name == "vG":
                out = np.where(outside,
                               -self.alpha / (2.0 * np.pi *
                                              np.maximum(r, self.rmax)),
                               out)
            else:
                out = np.where(outside,
                               self.c[-1] - self.alpha / (2.0 * np.pi) *
                               np.log(np.maximum(r, self.rmax) / self.rmax),
                               out)
        return out

    # persistence

    def header(self):
        return {"alpha": self.alpha, "Z": self.Z, "residual": self.residual,
                "virial_error": self.virial_error(),
                "iterations": self.iterations, "kind": self.kind,
                "params": self.params}

    def to_dataframe(self):
        return pd.DataFrame({"r": self.nodes, "G": self.G, "c": self.c,
                             "vG": self.vG})

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("# {}\n".format(json.dumps(self.header(),
                                               sort_keys=True)))
            self.to_dataframe().to_csv(f, index=False, float_format="%.17g")
        LOG.info("Wrote profile {} to '{}'".format(self, path))

    @classmethod
    def from_csv(cls, path):
        with open(path, "r") as f:
            head = f.readline()
            if not head.startswith("#"):
                raise ValueError("'{}' has no profile header".format(path))
            meta = json.loads(head[1:])
            df = pd.read_csv(io.StringIO(f.read()))
        return cls(meta["alpha"], df["r"].values, df["G"].values,
                   df["c"].values, df["vG"].values, meta["Z"],
                   meta.get("residual", 0.0), meta.get("iterations", 0),
                   meta.get("kind", "pks"), meta.get("params"))


def _check_alpha(alpha):
    if not (0.0 < alpha <= MAX_ALPHA):
        raise OutOfRange("alpha = {:.6g} outside (0, 7.9 pi]".format(alpha))


def profile_residual(alpha, nodes, G):
    """
    ||G - alpha e^{c - r^2/4} / Z||_inf / ||G||_inf.
    """
    T, _, _ = fixed_point_map(alpha, RadialField(nodes, G))
    return float(np.max(np.abs(G - T)) / np.max(np.abs(G)))


def fixed_point_map(alpha, g):
    """
    T(G) = alpha e^{c - r^2/4} / Z with c the radial potential of G.
    Returns (T, c, Z).
    """
    c = poisson_radial(g).values
    phi = c - g.nodes ** 2 / 4.0
    shift = phi.max()
    E = np.exp(phi - shift)
    Zs = 2.0 * np.pi * np.dot(g.volumes, E)
    return alpha * E / Zs, c, Zs * np.exp(shift)


def solve_profile(alpha, points=DEFAULT_POINTS, rmax=DEFAULT_RMAX,
                  tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                  theta=DEFAULT_THETA):
    """
    Damped fixed point G <- (1 - theta) G + theta alpha e^{c - r^2/4} / Z
    with the mass renormalized to alpha after every sweep.
    """
    _check_alpha(alpha)
    if not (0.0 < theta <= 1.0):
        raise ValueError("damping theta must be in (0, 1]")
    r = uniform_nodes(points, rmax)
    V = cell_volumes(r)
    G = alpha * standard_gaussian(r)
    G *= alpha / (2.0 * np.pi * np.dot(V, G))
    residual = np.inf
    for it in range(1, int(max_iter) + 1):
        T, c, Z = fixed_point_map(alpha, RadialField(r, G))
        residual = np.max(np.abs(G - T)) / np.max(T)
        if residual < tol:
            G = T
            break
        G = (1.0 - theta) * G + theta * T
        G *= alpha / (2.0 * np.pi * np.dot(V, G))
        if it % 1000 == 0:
            LOG.debug("alpha={:.6g} sweep {} residual {:.3e}".format(
                alpha, it, residual))
    else:
        raise NonConvergence(
            "profile alpha={:.6g} did not converge in {} sweeps "
            "(residual {:.3e})".format(alpha, max_iter, residual),
            iterations=max_iter, residual=residual)
    g = RadialField(r, G)
    T, c, Z = fixed_point_map(alpha, g)
    final_residual = float(np.max(np.abs(G - T)) / np.max(T))
    if G[-1] / G[0] > TAIL_RATIO:
        raise TailTruncation(
            "G(rmax)/G(0) = {:.3e} > {:.0e}; increase rmax".format(
                G[-1] / G[0], TAIL_RATIO))
    vG = radial_gauss_velocity(g).values
    p = SelfSimilarProfile(alpha, r, G, c, vG, Z, final_residual, it,
                           params={"points": int(points),
                                   "rmax": float(rmax), "tol": tol,
                                   "theta": theta})
    LOG.debug("Solved {} in {} sweeps (residual {:.3e}, virial error "
              "{:.3e})".format(p, it, final_residual, p.virial_error()))
    return p


def get_profile(alpha, points=DEFAULT_POINTS, rmax=DEFAULT_RMAX,
                tol=DEFAULT_TOL, theta=DEFAULT_THETA,
                max_iter=DEFAULT_MAX_ITER):
    """
    Cached solve_profile.
    """
    key = (float(alpha), int(points), float(rmax), float(tol), float(theta))
    with _CACHE_LOCK:
        p = CACHE_PROFILES.get(key)
    if p is not None:
        return p
    p = solve_profile(alpha, points, rmax, tol, max_iter, theta)
    with _CACHE_LOCK:
        return CACHE_PROFILES.setdefault(key, p)


def oseen_profile(alpha, points=DEFAULT_POINTS, rmax=DEFAULT_RMAX):
    """
    Oseen vortex alpha G (any real alpha) in the profile format.
    """
    r = uniform_nodes(points, rmax)
    G = alpha * standard_gaussian(r)
    c = poisson_radial(RadialField(r, G)).values
    vG = np.zeros_like(r)
    vG[1:] = -alpha * (1.0 - np.exp(-r[1:] ** 2 / 4.0)) / (2.0 * np.pi *
                                                           r[1:])
    return SelfSimilarProfile(alpha, r, G, c, vG, 4.0 * np.pi, 0.0, 0,
                              kind="oseen",
                              params={"points": int(points),
                                      "rmax": float(rmax)})


def get_provider(model="pks", **grid):
    """
    Callable alpha -> profile for the given model.
    """
    if model == "pks":
        return lambda a: get_profile(a, **grid)
    if model == "nse":
        return lambda a: oseen_profile(a, **grid)
    raise NotImplementedError("no profiles for model '{}'".format(model))


def profile_lipschitz(alpha, beta, m=None, **grid):
    """
    ||G_alpha - G_beta||_1 (and the L^2(m) norm if m is given).
    """
    pa = get_profile(alpha, **grid)
    pb = get_profile(beta, **grid)
    d = pa.G - pb.G
    V = pa.volumes
    l1 = float(2.0 * np.pi * np.dot(V, np.abs(d)))
    if m is None:
        return l1
    w = (1.0 + pa.nodes ** 2) ** m
    return l1, float(np.sqrt(2.0 * np.pi * np.dot(V, w * d * d)))


def zero_mode(alpha, h=1e-3, **grid):
    """
    E_alpha^0 = dG_lambda / dlambda at alpha by a centered difference.
    """
    if not h > 0:
        raise ValueError("finite difference step must be positive")
    _check_alpha(alpha)
    if alpha - h <= 0.0 or alpha + h > MAX_ALPHA:
        raise OutOfRange("alpha +- h leaves (0, 7.9 pi]")
    pp = get_profile(alpha + h, **grid)
    pm = get_profile(alpha - h, **grid)
    return RadialField(pp.nodes, (pp.G - pm.G) / (2.0 * h))


def sample_profile(p, t, z=(0.0, 0.0), n=256, half_width=16.0,
                   center=(0.0, 0.0), threshold=DEFAULT_SUPPORT_THRESHOLD,
                   check_support=True):
    """
    x -> t^{-1} G((x - z) / sqrt(t)) on the grid.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    g = get_grid(n, half_width, center)
    rho = g.radius(z) / np.sqrt(t)
    u = Field2D(p.interpolate("G", rho) / t, half_width, center)
    if check_support:
        g.check_support(u.values, threshold, "sample_profile")
    return u


def profile_field(p, n, half_width, center=(0.0, 0.0), **kwargs):
    """
    G itself on a similarity-variable grid (t = 1, z = 0).
    """
    return sample_profile(p, 1.0, (0.0, 0.0), n, half_width, center,
                          **kwargs)


def tail_fit(p, r_lo=8.0, r_hi=12.0):
    """
    Fit log(G e^{r^2/4}) = log A + s log r on [r_lo, r_hi].
    The asymptotic exponent is -alpha / 2 pi.
    """
    r = p.nodes
    mask = (r >= r_lo) & (r <= r_hi)
    f = loglog_fit(r[mask], p.G[mask] * np.exp(r[mask] ** 2 / 4.0))
    return {"slope": f["slope"], "prefactor": float(np.exp(f["intercept"])),
            "expected_slope": -p.alpha / (2.0 * np.pi),
            "alpha_over_Z": p.alpha / p.Z, "r2": f["r2"]}


def gradient_asymptotic_constant(p, outer=0.5):
    """
    max |c'(r) + alpha / (2 pi r)| r^2 over the outer part of the table.
    """
    r = p.nodes
    mask = r >= (1.0 - outer) * p.rmax
    return float(np.max(np.abs(p.vG[mask] + p.alpha / (2.0 * np.pi * r[mask]))
                        * r[mask] ** 2))


def log_gradient_residual(p, inner=0.8):
    """
    max |(log G)' - (c' - r/2)| / max |c' - r/2| on the inner nodes.
    """
    r = p.nodes
    d = CubicSpline(r, np.log(p.G))(r, 1)
    ref = p.vG - r / 2.0
    mask = r <= inner * p.rmax
    return float(np.max(np.abs(d[mask] - ref[mask])) /
                 np.max(np.abs(ref[mask])))


def gaussian_closeness(alpha, **grid):
    """
    ||G_alpha - alpha G||_1 / alpha^2.
    """
    p = get_profile(alpha, **grid)
    d = p.G - alpha * standard_gaussian(p.nodes)
    return float(2.0 * np.pi * np.dot(p.volumes, np.abs(d)) / alpha ** 2)
