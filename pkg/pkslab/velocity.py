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

from pkslab.fields import Field2D, DEFAULT_SUPPORT_THRESHOLD, lp_norm


LOG = logging.getLogger(os.path.basename(__file__))


class VelocityField(object):
    """
    Velocity components on a common grid. Keeps the spectra of the
    components on the doubled grid when they come from a free-space
    solve so that the divergence can be taken there.
    """

    def __init__(self, vx, vy, padded_hat=None):
        if not vx.same_grid(vy):
            raise ValueError("velocity components live on different grids")
        self.vx = vx
        self.vy = vy
        self._padded_hat = padded_hat

    def __repr__(self):
        return "VelocityField(n={}, L={}, max|v|={:.4g})".format(
            self.vx.n, self.vx.half_width, self.max_speed())

    @property
    def grid(self):
        return self.vx.grid

    def speed(self):
        return self.vx.with_values(np.hypot(self.vx.values, self.vy.values))

    def max_speed(self):
        return float(np.max(np.hypot(self.vx.values, self.vy.values)))

    def divergence(self):
        g = self.grid
        if self._padded_hat is not None:
            hx, hy = self._padded_hat
            return self.vx.with_values(g.unpad(g.ikxp * hx + g.ikyp * hy))
        return self.vx.with_values(g.divergence(self.vx.values,
                                                self.vy.values))

    def radial_component(self, z=(0.0, 0.0)):
        X, Y = self.grid.mesh()
        dx, dy = X - z[0], Y - z[1]
        r = np.hypot(dx, dy)
        r[r == 0] = 1.0
        return self.vx.with_values(
            (self.vx.values * dx + self.vy.values * dy) / r)

    def azimuthal_component(self, z=(0.0, 0.0)):
        X, Y = self.grid.mesh()
        dx, dy = X - z[0], Y - z[1]
        r = np.hypot(dx, dy)
        r[r == 0] = 1.0
        return self.vx.with_values(
            (-self.vx.values * dy + self.vy.values * dx) / r)

    def __add__(self, other):
        return VelocityField(self.vx + other.vx, self.vy + other.vy)

    def __mul__(self, a):
        return VelocityField(self.vx * a, self.vy * a)

    __rmul__ = __mul__


def _potential_hat(u, check_support, threshold, where):
    g = u.grid
    if check_support:
        g.check_support(u.values, threshold, where)
    return g.potential_hat(u.values)


def velocity_pks(u, check_support=True, threshold=DEFAULT_SUPPORT_THRESHOLD):
    """
    Chemotactic velocity v = grad c with -Delta c = u (kernel
    B(x) = -x / (2 pi |x|^2)).
    """
    g = u.grid
    c_hat = _potential_hat(u, check_support, threshold, "velocity_pks")
    hx = g.ikxp * c_hat
    hy = g.ikyp * c_hat
    return VelocityField(u.with_values(g.unpad(hx)),
                         u.with_values(g.unpad(hy)), (hx, hy))


def velocity_nse(omega, check_support=True,
                 threshold=DEFAULT_SUPPORT_THRESHOLD):
    """
    Biot-Savart velocity v = grad^perp Psi = (-d_y Psi, d_x Psi) with
    Delta Psi = omega, i.e. Psi = -c.
    """
    g = omega.grid
    c_hat = _potential_hat(omega, check_support, threshold, "velocity_nse")
    hx = g.ikyp * c_hat
    hy = -g.ikxp * c_hat
    return VelocityField(omega.with_values(g.unpad(hx)),
                         omega.with_values(g.unpad(hy)), (hx, hy))


def get_velocity_law(model):
    if model == "pks":
        return velocity_pks
    if model == "nse":
        return velocity_nse
    raise NotImplementedError("velocity law '{}' not implemented"
                              .format(model))


def hls_ratio(u, p=4.0 / 3.0, model="pks"):
    """
    ||v(u)||_q / ||u||_p with 1/q = 1/p - 1/2, bounded uniformly in u
    for p in (1, 2).
    """
    if not 1.0 < p < 2.0:
        raise ValueError("need 1 < p < 2, got {}".format(p))
    q = 1.0 / (1.0 / p - 0.5)
    norm_u = lp_norm(u, p)
    if norm_u == 0:
        return 0.0
    v = get_velocity_law(model)(u)
    return lp_norm(v.speed(), q) / norm_u


def velocity_arrays(grid, values, model="pks"):
    """
    Array version used inside the time steppers (no support check).
    """
    c_hat = grid.potential_hat(values)
    cx = grid.unpad(grid.ikxp * c_hat)
    cy = grid.unpad(grid.ikyp * c_hat)
    if model == "pks":
        return cx, cy
    return cy, -cx


def profile_velocity(p, t, z, grid, model="pks"):
    """
    Frozen self-similar velocity t^{-1/2} v^{G}((x - z) / sqrt(t)) of a
    profile centred at z. For the NSE law the field is rotated by +90
    degrees.
    """
    s = np.sqrt(t)
    X, Y = grid.mesh()
    dx, dy = (X - z[0]) / s, (Y - z[1]) / s
    rho = np.hypot(dx, dy)
    vr = radial_velocity_at(p, rho)
    with np.errstate(invalid="ignore", divide="ignore"):
        ex = np.where(rho > 0, dx / rho, 0.0)
        ey = np.where(rho > 0, dy / rho, 0.0)
    vx = vr * ex / s
    vy = vr * ey / s
    if model == "nse":
        vx, vy = -vy, vx
    return vx, vy


def radial_velocity_at(p, rho):
    """
    c'_alpha(rho) from the profile table; Gauss law beyond r_max.
    """
    return p.interpolate("vG", rho)
