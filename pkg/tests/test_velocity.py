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
import unittest
import numpy as np
from pkslab.error import SupportOverflow
from pkslab.fields import gaussian_field, gaussian_bump, get_grid
from pkslab.velocity import (VelocityField, velocity_pks, velocity_nse,
                             get_velocity_law, velocity_arrays,
                             profile_velocity, hls_ratio)
from pkslab.profiles import get_profile, sample_profile


def gauss_speed(r, mass, t):
    return mass * (1 - np.exp(-r ** 2 / (4 * t))) / (2 * np.pi * r)


class TestVelocityLaws(unittest.TestCase):

    def setUp(self):
        self.t = 0.25
        self.mass = 2.0
        self.u = gaussian_field(64, 8.0, mass=self.mass, t=self.t)
        X, Y = self.u.grid.mesh()
        self.r = np.hypot(X, Y)
        self.mask = (self.r > 0.5) & (self.r < 3.5)

    def _rel(self, a, b):
        return np.max(np.abs(a - b)) / np.max(np.abs(b))

    def test_pks_points_inward(self):
        v = velocity_pks(self.u)
        exact = -gauss_speed(self.r[self.mask], self.mass, self.t)
        vr = v.radial_component().values[self.mask]
        self.assertLess(self._rel(vr, exact), 1e-6)
        va = v.azimuthal_component().values[self.mask]
        self.assertLess(np.max(np.abs(va)), 1e-8)

    def test_pks_divergence(self):
        # div grad c = -u
        d = velocity_pks(self.u).divergence().values
        self.assertLess(self._rel(d, -self.u.values), 1e-6)

    def test_nse_rotates(self):
        v = velocity_nse(self.u)
        exact = gauss_speed(self.r[self.mask], self.mass, self.t)
        va = v.azimuthal_component().values[self.mask]
        self.assertLess(self._rel(va, exact), 1e-6)
        vr = v.radial_component().values[self.mask]
        self.assertLess(np.max(np.abs(vr)), 1e-8)

    def test_nse_divergence_free(self):
        v = velocity_nse(self.u)
        d = v.divergence().values
        self.assertLess(np.max(np.abs(d)) / v.max_speed(), 1e-8)

    def test_far_field(self):
        # |v| ~ M / (2 pi r) outside a compact nonnegative density
        n, L = 128, 16.0
        u = gaussian_bump(n, L, mass=2.0, z=(0.25, 0.0), width=0.5) + \
            gaussian_bump(n, L, mass=1.0, z=(-0.5, 0.0), width=0.4)
        X, Y = u.grid.mesh()
        r = np.hypot(X, Y)
        ring = (r > 6.0) & (r < 7.9)
        exact = u.mass() / (2 * np.pi * r[ring])
        for law in (velocity_pks, velocity_nse):
            speed = law(u).speed().values[ring]
            self.assertLess(np.max(np.abs(speed - exact) / exact), 0.01)

    def test_arrays_match_fields(self):
        g = self.u.grid
        vx, vy = velocity_arrays(g, self.u.values, "pks")
        v = velocity_pks(self.u)
        self.assertTrue(np.allclose(vx, v.vx.values))
        self.assertTrue(np.allclose(vy, v.vy.values))
        wx, wy = velocity_arrays(g, self.u.values, "nse")
        self.assertTrue(np.allclose(wx, vy))
        self.assertTrue(np.allclose(wy, -vx))

    def test_support(self):
        off = gaussian_field(64, 8.0, z=(5.0, 5.0), t=0.25)
        with self.assertRaises(SupportOverflow):
            velocity_pks(off)
        velocity_nse(off, check_support=False)

    def test_law_lookup(self):
        self.assertIs(get_velocity_law("pks"), velocity_pks)
        self.assertIs(get_velocity_law("nse"), velocity_nse)
        with self.assertRaises(NotImplementedError):
            get_velocity_law("sqg")

    def test_algebra(self):
        v = velocity_pks(self.u)
        w = v + 2.0 * v
        self.assertAlmostEqual(w.max_speed(), 3.0 * v.max_speed())
        with self.assertRaises(ValueError):
            VelocityField(self.u, gaussian_field(64, 4.0))


class TestHlsRatio(unittest.TestCase):

    def test_scale_invariant(self):
        a = hls_ratio(gaussian_field(128, 16.0, t=0.25))
        b = hls_ratio(gaussian_field(128, 16.0, mass=3.0, t=0.5))
        self.assertLess(abs(a / b - 1.0), 0.02)
        self.assertEqual(hls_ratio(gaussian_field(64, 8.0) * 0.0), 0.0)
        with self.assertRaises(ValueError):
            hls_ratio(gaussian_field(64, 8.0), p=2.0)

    def test_bounded_on_random_fields(self):
        rng = np.random.default_rng(7)
        ratios = list()
        for _ in range(10):
            u = None
            for _ in range(3):
                b = gaussian_bump(128, 16.0, mass=rng.uniform(0.5, 1.5),
                                  z=tuple(rng.uniform(-1.5, 1.5, 2)),
                                  width=rng.uniform(0.5, 0.8))
                u = b if u is None else u + b
            ratios.append(hls_ratio(u))
        ratios = np.array(ratios)
        self.assertTrue(np.all(ratios > 0.05))
        self.assertTrue(np.all(ratios < 1.0))
        self.assertLess(ratios.max() / ratios.min(), 4.0)


class TestProfileVelocity(unittest.TestCase):

    def test_self_similar_scaling(self):
        p = get_profile(2 * np.pi, points=1024, rmax=20.0)
        g = get_grid(64, 4.0)
        t = 0.25
        vx, vy = profile_velocity(p, t, (0.0, 0.0), g)
        X, Y = g.mesh()
        r = np.hypot(X, Y)
        mask = r > 0
        vr = (vx * X + vy * Y)[mask] / r[mask]
        exact = p.interpolate("vG", r[mask] / np.sqrt(t)) / np.sqrt(t)
        self.assertTrue(np.allclose(vr, exact))
        # NSE: rotated by +90 degrees
        wx, wy = profile_velocity(p, t, (0.0, 0.0), g, model="nse")
        self.assertTrue(np.allclose(wx, -vy))
        self.assertTrue(np.allclose(wy, vx))

    def test_matches_free_space_solve(self):
        # velocity of the sampled profile equals the tabulated c'
        p = get_profile(2 * np.pi, points=1024, rmax=20.0)
        t = 1.0 / 16.0
        u = sample_profile(p, t, n=128, half_width=4.0)
        g = u.grid
        vx, vy = velocity_arrays(g, u.values, "pks")
        px, py = profile_velocity(p, t, (0.0, 0.0), g)
        scale = np.max(np.hypot(px, py))
        self.assertLess(np.max(np.hypot(vx - px, vy - py)) / scale, 1e-3)


if __name__ == '__main__':
    unittest.main()
