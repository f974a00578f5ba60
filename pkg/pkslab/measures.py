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

from pkslab.error import CriticalAtom, NegativeMeasure
from pkslab.fields import (Field2D, gaussian_field, gaussian_bump,
                           heat_apply, get_grid, DEFAULT_SUPPORT_THRESHOLD)
from pkslab.profiles import sample_profile


LOG = logging.getLogger(os.path.basename(__file__))

CRITICAL_MASS = 8.0 * np.pi
DEFAULT_EPSILON = 0.5
# t0 = START_TIME_FACTOR * d^2, i.e. sqrt(t0) <= d / 8
START_TIME_FACTOR = 1.0 / 64.0
# relative slack for the nonnegativity of a diffuse density
_NEGATIVE_SLACK = 1e-12


class Atom(object):

    def __init__(self, position, mass):
        self.position = (float(position[0]), float(position[1]))
        self.mass = float(mass)

    def __repr__(self):
        return "Atom({}, {:.6g})".format(self.position, self.mass)

    def __eq__(self, other):
        return (isinstance(other, Atom) and self.position == other.position
                and self.mass == other.mass)

    def distance(self, other):
        return float(np.hypot(self.position[0] - other.position[0],
                              self.position[1] - other.position[1]))


def _as_atom(a):
    if isinstance(a, Atom):
        return a
    if isinstance(a, dict):
        return Atom((a["x"], a["y"]), a["mass"])
    z, m = a
    return Atom(z, m)


def merge_atoms(atoms, resolution=0.0):
    """
    Merge atoms at equal positions and (with a warning) atoms closer
    than resolution. Merged atoms sit at the mass-weighted centroid
    (first position if the masses cancel).
    """
    merged = list()
    for a in (_as_atom(x) for x in atoms):
        for i, b in enumerate(merged):
            d = a.distance(b)
            if d == 0.0 or d < resolution:
                if d > 0.0:
                    LOG.warning("Merging atoms {} and {} closer than one "
                                "grid cell".format(b, a))
                m = a.mass + b.mass
                if m != 0.0 and np.sign(a.mass) == np.sign(b.mass):
                    z = ((a.mass * a.position[0] + b.mass * b.position[0])
                         / m,
                         (a.mass * a.position[1] + b.mass * b.position[1])
                         / m)
                else:
                    z = b.position
                merged[i] = Atom(z, m)
                break
        else:
            merged.append(a)
    return merged


def min_pairwise_distance(atoms):
    d = np.inf
    for i in range(len(atoms)):
        for j in range(i + 1, len(atoms)):
            d = min(d, atoms[i].distance(atoms[j]))
    return float(d)


class MeasureData(object):
    """
    Finite measure sum_i alpha_i delta_{z_i} + mu_0 with a diffuse
    density mu_0 given as Field2D (or None).
    """

    def __init__(self, atoms=None, diffuse=None, nonnegative=False,
                 resolution=None, diffuse_spec=None):
        if resolution is None:
            resolution = diffuse.h if diffuse is not None else 0.0
        self.atoms = merge_atoms(atoms or list(), resolution)
        self.diffuse = diffuse
        self.diffuse_spec = diffuse_spec
        self.nonnegative = bool(nonnegative)
        if self.nonnegative:
            self._check_nonnegative()

    def __repr__(self):
        return "MeasureData(atoms={}, diffuse={})".format(
            self.atoms, self.diffuse)

    def _check_nonnegative(self):
        for a in self.atoms:
            if a.mass < 0:
                raise NegativeMeasure("negative atom {}".format(a))
        if self.diffuse is not None:
            v = self.diffuse.values
            if v.min() < -_NEGATIVE_SLACK * max(v.max(), 0.0):
                raise NegativeMeasure(
                    "diffuse part has minimum {:.3g}".format(v.min()))

    @property
    def atomic_norm(self):
        return float(sum(abs(a.mass) for a in self.atoms))

    @property
    def diffuse_norm(self):
        if self.diffuse is None:
            return 0.0
        return float(np.abs(self.diffuse.values).sum()
                     * self.diffuse.grid.cell_area)

    @property
    def tv_norm(self):
        return self.atomic_norm + self.diffuse_norm

    @property
    def total_mass(self):
        m = sum(a.mass for a in self.atoms)
        if self.diffuse is not None:
            m += self.diffuse.mass()
        return float(m)

    def is_zero(self):
        return (all(a.mass == 0.0 for a in self.atoms) and
                (self.diffuse is None or not self.diffuse.values.any()))

    # persistence

    def to_dict(self, field_path=None):
        d = {"atoms": [{"x": a.position[0], "y": a.position[1],
                        "mass": a.mass} for a in self.atoms],
             "nonnegative": self.nonnegative}
        if self.diffuse is not None:
            if self.diffuse_spec is not None:
                d["diffuse"] = dict(self.diffuse_spec)
            elif field_path is not None:
                self.diffuse.to_file(field_path)
                d["diffuse"] = {"path": field_path}
            else:
                raise ValueError(
                    "diffuse density needs a field_path to be serialized")
            d["grid"] = {"n": self.diffuse.n,
                         "half_width": self.diffuse.half_width,
                         "center": list(self.diffuse.center)}
        return d

    @classmethod
    def from_dict(cls, d, grid=None):
        """
        grid: {"n", "half_width"[, "center"]} for inline diffuse specs
        (taken from d["grid"] if present).
        """
        grid = d.get("grid", grid)
        diffuse = None
        spec = d.get("diffuse")
        if spec is not None:
            diffuse = diffuse_from_spec(spec, grid)
            if "path" in spec:
                spec = None
        return cls(d.get("atoms", list()), diffuse,
                   nonnegative=d.get("nonnegative", False),
                   diffuse_spec=spec)


def diffuse_from_spec(spec, grid):
    if "path" in spec:
        return Field2D.from_file(spec["path"])
    if spec.get("kind") != "gaussian":
        raise ValueError("unknown diffuse kind: {}".format(spec.get("kind")))
    if grid is None:
        raise ValueError("inline diffuse density requires a grid")
    return gaussian_bump(int(grid["n"]), float(grid["half_width"]),
                         mass=float(spec.get("mass", 1.0)),
                         z=tuple(spec.get("center", (0.0, 0.0))),
                         width=float(spec.get("width", 1.0)),
                         center=tuple(grid.get("center", (0.0, 0.0))))


def measure_norms(mu):
    """
    Total variation and atomic semi-norm of mu.
    """
    return mu.tv_norm, mu.atomic_norm


class DecompositionResult(object):

    def __init__(self, atoms, remainder, d, eps):
        self.atoms = atoms
        self.remainder = remainder
        self.d = d
        self.eps = eps

    def __repr__(self):
        return "DecompositionResult(N={}, d={:.4g}, eps={}, rest={:.4g})" \
            .format(len(self.atoms), self.d, self.eps,
                    self.remainder.atomic_norm)

    @property
    def n_atoms(self):
        return len(self.atoms)

    @property
    def nonnegative(self):
        return self.remainder.nonnegative


def decompose(mu, eps=DEFAULT_EPSILON):
    """
    Extract all atoms of mass >= eps; if the remaining small atoms
    still sum to >= eps, the largest of them are extracted as well.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if mu.nonnegative:
        for a in mu.atoms:
            if a.mass >= CRITICAL_MASS:
                raise CriticalAtom(a.position, a.mass)
    big = [a for a in mu.atoms if abs(a.mass) >= eps]
    small = sorted((a for a in mu.atoms if abs(a.mass) < eps),
                   key=lambda a: -abs(a.mass))
    while small and sum(abs(a.mass) for a in small) >= eps:
        big.append(small.pop(0))
    remainder = MeasureData(small, mu.diffuse, nonnegative=mu.nonnegative,
                            resolution=0.0, diffuse_spec=mu.diffuse_spec)
    r = DecompositionResult(big, remainder, min_pairwise_distance(big), eps)
    LOG.debug("Decomposed: {}".format(r))
    return r


def default_start_time(d, fallback=1.0 / 64.0):
    if not np.isfinite(d):
        return fallback
    return START_TIME_FACTOR * d * d


def heat_measure(mu, t, n=None, half_width=None, center=(0.0, 0.0)):
    """
    e^{t Delta} mu: atoms become heat kernels, the density is smoothed
    by the Fourier multiplier.
    """
    if not t > 0:
        raise ValueError("heat time must be positive")
    n, half_width, center = _grid_of(mu, n, half_width, center)
    v = np.zeros((n, n))
    for a in mu.atoms:
        v += gaussian_field(n, half_width, a.mass, a.position, t,
                            center).values
    if mu.diffuse is not None:
        v += heat_apply(mu.diffuse, t).values
    return Field2D(v, half_width, center)


def heat_lp_limit(mu, p):
    """
    lim_{t -> 0} t^{1 - 1/p} ||e^{t Delta} mu||_p; only atoms contribute.
    """
    p = float(p)
    c = (4.0 * np.pi) ** (1.0 / p - 1.0) * p ** (-1.0 / p)
    return float(c * sum(abs(a.mass) ** p for a in mu.atoms) ** (1.0 / p))


def _grid_of(mu, n, half_width, center):
    if mu.diffuse is not None:
        if n is not None and n != mu.diffuse.n:
            raise ValueError("grid differs from the diffuse density grid")
        return mu.diffuse.n, mu.diffuse.half_width, mu.diffuse.center
    if n is None or half_width is None:
        raise ValueError("a grid (n, half_width) is required")
    return int(n), float(half_width), center


def regularize(dec, t0, profiles, n=None, half_width=None,
               center=(0.0, 0.0), threshold=DEFAULT_SUPPORT_THRESHOLD):
    """
    Approximate solution at t0: e^{t0 Delta} of the remainder plus
    t0^{-1} G_{alpha_i}((x - z_i) / sqrt(t0)) for each extracted atom.
    profiles: callable alpha -> SelfSimilarProfile.
    """
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    rest = dec.remainder
    n, half_width, center = _grid_of(rest, n, half_width, center)
    v = np.zeros((n, n))
    if rest.atoms or rest.diffuse is not None:
        v += heat_measure(rest, t0, n, half_width, center).values
    for a in dec.atoms:
        p = profiles(a.mass)
        v += sample_profile(p, t0, a.position, n, half_width, center,
                            check_support=False).values
    u = Field2D(v, half_width, center)
    get_grid(n, half_width, center).check_support(u.values, threshold,
                                                  "regularize")
    LOG.debug("Regularized {} at t0={:.4g}: mass {:.10g}".format(
        dec, t0, u.mass()))
    return u
