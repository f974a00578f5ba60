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
from scipy import linalg, special

from pkslab.error import NegativeDensity, MeanNotZero, DivisionUnderflow
from pkslab.fields import poisson_free_space, DEFAULT_SUPPORT_THRESHOLD
from pkslab.linops import mode_poisson_kernel
from pkslab.profiles import profile_field


LOG = logging.getLogger(os.path.basename(__file__))

# w log w contributes 0 below this floor
ENTROPY_FLOOR = 1e-30
# tolerated negative undershoot relative to max w
NEGATIVE_SLACK = 1e-10
# |int f| / int |f| accepted as mean zero
MEAN_TOL = 1e-8
# integrals with 1/G only where G > ENERGY_FLOOR * max G
ENERGY_FLOOR = 1e-14
# f must vanish (relative to max |f|) where G is below the floor
UNDERFLOW_TOL = 1e-6
MIN_BASIS = 8


class EnergyReport(object):

    def __init__(self, entropy=0.0, moment=0.0, interaction=0.0):
        self.entropy = float(entropy)
        self.moment = float(moment)
        self.interaction = float(interaction)

    def __repr__(self):
        return "EnergyReport(value={:.10g}, entropy={:.6g}, moment={:.6g}, " \
            "interaction={:.6g})".format(self.value, self.entropy,
                                         self.moment, self.interaction)

    @property
    def value(self):
        return self.entropy + self.moment + self.interaction

    @property
    def finite(self):
        return bool(np.isfinite(self.value))

    def to_dict(self):
        return {"value": self.value, "entropy": self.entropy,
                "moment": self.moment, "interaction": self.interaction,
                "finite": self.finite}

    @classmethod
    def from_dict(cls, d):
        return cls(d["entropy"], d["moment"], d["interaction"])


def _nonnegative_values(w):
    v = w.values
    vmax = v.max() if v.size else 0.0
    if v.min() < -NEGATIVE_SLACK * max(vmax, 0.0):
        raise NegativeDensity("density has minimum {:.3g} (max {:.3g})"
                              .format(v.min(), vmax))
    return np.clip(v, 0.0, None)


def _entropy(v, dA):
    mask = v > ENTROPY_FLOOR
    return float(np.sum(v[mask] * np.log(v[mask])) * dA)


def _interaction(w, threshold):
    """
    -1/2 int w c_w = (1/4pi) int int w w log|x - y|.
    """
    if not w.values.any():
        return 0.0
    c = poisson_free_space(w, threshold=threshold)
    return float(-0.5 * np.sum(w.values * c.values) * w.grid.cell_area)


def free_energy_similarity(w, threshold=DEFAULT_SUPPORT_THRESHOLD):
    """
    G(w) = int w log w + 1/4 int w |xi|^2 - 1/2 int w c_w.
    """
    v = _nonnegative_values(w)
    dA = w.grid.cell_area
    X, Y = w.grid.mesh()
    return EnergyReport(_entropy(v, dA),
                        0.25 * float(np.sum(v * (X ** 2 + Y ** 2)) * dA),
                        _interaction(w.with_values(v), threshold))


def free_energy_physical(u, threshold=DEFAULT_SUPPORT_THRESHOLD):
    """
    F(u) = int u log u - 1/2 int u c_u.
    """
    v = _nonnegative_values(u)
    return EnergyReport(_entropy(v, u.grid.cell_area), 0.0,
                        _interaction(u.with_values(v), threshold))


def dissipation_physical(u, threshold=DEFAULT_SUPPORT_THRESHOLD):
    """
    int u |grad log u - grad c|^2 on the set where u is above the floor.
    """
    v = _nonnegative_values(u)
    if not v.any():
        return 0.0
    g = u.grid
    gx, gy = g.gradient(v)
    g.check_support(v, threshold, "dissipation_physical")
    cx, cy = g.potential_gradient(v)
    mask = v > ENERGY_FLOOR * v.max()
    fx = gx[mask] / v[mask] - cx[mask]
    fy = gy[mask] / v[mask] - cy[mask]
    return float(np.sum(v[mask] * (fx ** 2 + fy ** 2)) * g.cell_area)


def _profile_on_grid(f, p):
    G = profile_field(p, f.n, f.half_width, f.center,
                      check_support=False).values
    return G


def _energy_mask(f, G):
    mask = G > ENERGY_FLOOR * G.max()
    fmax = np.abs(f.values).max()
    if fmax > 0 and np.any(np.abs(f.values[~mask]) > UNDERFLOW_TOL * fmax):
        raise DivisionUnderflow(
            "f does not vanish where G_alpha is below {:.0e} of its peak"
            .format(ENERGY_FLOOR))
    return mask


def linearized_energy(f, p, threshold=DEFAULT_SUPPORT_THRESHOLD):
    """
    (F~, D) with F~ = 1/2 int f^2/G - 1/2 int f c_f and
    D = int G |grad(f/G) - grad c_f|^2, -Delta c_f = f.
    """
    g = f.grid
    dA = g.cell_area
    v = f.values
    total = np.abs(v).sum() * dA
    if total == 0.0:
        return 0.0, 0.0
    if abs(v.sum() * dA) > MEAN_TOL * total:
        raise MeanNotZero("int f = {:.3g} (int |f| = {:.3g})".format(
            v.sum() * dA, total))
    G = _profile_on_grid(f, p)
    mask = _energy_mask(f, G)
    g.check_support(v, threshold, "linearized_energy")
    c_hat = g.potential_hat(v)
    c = g.unpad(c_hat)
    cx = g.unpad(g.ikxp * c_hat)
    cy = g.unpad(g.ikyp * c_hat)
    F = 0.5 * np.sum(v[mask] ** 2 / G[mask]) * dA - 0.5 * np.sum(v * c) * dA
    # G grad(f/G) = grad f - f grad log G
    fx, fy = g.gradient(v)
    X, Y = g.mesh()
    rho = np.hypot(X, Y)
    dlog = p.interpolate("vG", rho) - rho / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        ex = np.where(rho > 0, X / rho, 0.0)
        ey = np.where(rho > 0, Y / rho, 0.0)
    jx = fx - v * dlog * ex - G * cx
    jy = fy - v * dlog * ey - G * cy
    D = np.sum((jx[mask] ** 2 + jy[mask] ** 2) / G[mask]) * dA
    return float(F), float(D)


# coercivity on radial modes

def coercivity_basis(p, n, size):
    """
    Radial basis q_j with f_j = G_alpha q_j, q_j = r^n L_j^{(n)}(r^2/4);
    for n = 0 the constant is removed and each q_j is shifted to make
    f_j mean zero. Returns (nodes, Q) with Q of shape (N, size).
    """
    if size < MIN_BASIS:
        raise ValueError("coercivity basis needs >= {} functions, got {}"
                         .format(MIN_BASIS, size))
    r = p.nodes
    x = r ** 2 / 4.0
    js = range(1, size + 1) if n == 0 else range(size)
    Q = np.column_stack([r ** n * special.eval_genlaguerre(j, n, x)
                         for j in js])
    if n == 0:
        w = p.volumes * p.G
        Q = Q - (w.dot(Q) / w.sum())[None, :]
    return r, Q


def _mode_forms(p, n, Q):
    """
    Gram matrices of int f^2 / G and int f c_f for f = G q.
    """
    r = p.nodes
    V = p.volumes
    if n > 0:
        r, V, Qm, G = r[1:], V[1:], Q[1:], p.G[1:]
    else:
        Qm, G = Q, p.G
    K = mode_poisson_kernel(r, n)
    A = Qm.T.dot((V * G)[:, None] * Qm)
    F = (V * G)[:, None] * Qm
    B = F.T.dot(K).dot(F)
    return A, 0.5 * (B + B.T)


def coercivity_constant(p, basis_size=12, modes=(0, 1, 2, 3)):
    """
    C_alpha = max of int f c_f / int f^2/G_alpha over mean-zero radial
    and low angular mode trial functions (generalized eigenproblem).
    """
    best = -np.inf
    per_mode = dict()
    for n in modes:
        _, Q = coercivity_basis(p, n, basis_size)
        A, B = _mode_forms(p, n, Q)
        # orthonormalize w.r.t. the weighted L^2 Gram matrix
        a, U = linalg.eigh(A)
        keep = a > 1e-12 * a.max()
        T = U[:, keep] / np.sqrt(a[keep])
        lam = linalg.eigvalsh(T.T.dot(B).dot(T))
        per_mode[n] = float(lam.max())
        best = max(best, per_mode[n])
    LOG.debug("Coercivity alpha={:.6g}: {}".format(p.alpha, per_mode))
    return float(best)


def radial_linearized_energy(p, n, a):
    """
    (int f^2/G, int f c_f, 2 F~) for the mode-n radial function f = a(r)
    on the profile nodes (angular factors dropped).
    """
    r, V, G = p.nodes, p.volumes, p.G
    if n > 0:
        r, V, G, a = r[1:], V[1:], G[1:], np.asarray(a)[1:]
    mask = G > ENERGY_FLOOR * G.max()
    quad = float(np.sum((V * a * a)[mask] / G[mask]))
    Va = V * a
    inter = float(Va.dot(mode_poisson_kernel(r, n)).dot(Va))
    return quad, inter, quad - inter
