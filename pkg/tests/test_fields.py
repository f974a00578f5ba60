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
from scipy import special
from scipy.interpolate import CubicSpline
from pkslab.error import SupportOverflow
from pkslab.fields import (SpectralGrid, Field2D, RadialField, get_grid,
                           gaussian_field, gaussian_bump, heat_apply,
                           gradient, laplacian, lp_norm, norm_lpm,
                           WeightedNormSpec, poisson_free_space, dilate,
                           uniform_nodes, poisson_radial,
                           radial_gauss_velocity, heat_apply_radial,
                           radial_average, gagliardo_nirenberg_ratio)


def radial_gaussian(r, mass=1.0, t=1.0):
    return mass / (4.0 * np.pi * t) * np.exp(-np.asarray(r) ** 2 / (4 * t))


class TestSpectralGrid(unittest.TestCase):

    def test_rejects_bad_sizes(self):
        with self.assertRaises(ValueError):
            SpectralGrid(100, 4.0)
        with self.assertRaises(ValueError):
            SpectralGrid(8, 4.0)
        with self.assertRaises(ValueError):
            SpectralGrid(64, 0.0)
        with self.assertRaises(ValueError):
            SpectralGrid(64, 4.0, kernel="fmm")

    def test_geometry(self):
        g = SpectralGrid(64, 8.0, center=(1.0, -1.0))
        self.assertAlmostEqual(g.h, 0.25)
        self.assertAlmostEqual(g.x[0], -7.0)
        self.assertAlmostEqual(g.y[-1], 7.0 - 0.25)
        self.assertEqual(g.k2.shape, (64, 33))

    def test_cache(self):
        self.assertIs(get_grid(64, 8.0), get_grid(64, 8.0))
        self.assertIsNot(get_grid(64, 8.0), get_grid(64, 4.0))

    def test_tail_fraction(self):
        g = get_grid(64, 8.0)
        u = gaussian_field(64, 8.0, t=0.25)
        self.assertLess(g.tail_fraction(u.values), 1e-6)
        off = gaussian_field(64, 8.0, z=(6.0, 0.0), t=0.25)
        self.assertGreater(g.tail_fraction(off.values), 0.5)
        with self.assertRaises(SupportOverflow):
            g.check_support(off.values)


class TestField2D(unittest.TestCase):

    def setUp(self):
        self.n = 64
        self.L = 8.0
        self.u = gaussian_field(self.n, self.L, mass=2.0, t=0.25)

    def test_validation(self):
        with self.assertRaises(ValueError):
            Field2D(np.zeros((4, 8)), 1.0)
        v = np.zeros((16, 16))
        v[1, 1] = np.nan
        with self.assertRaises(ValueError):
            Field2D(v, 1.0)
        with self.assertRaises(ValueError):
            self.u - gaussian_field(self.n, 4.0)

    def test_immutable(self):
        with self.assertRaises(ValueError):
            self.u.values[0, 0] = 1.0

    def test_arithmetic(self):
        d = 2.0 * self.u - self.u
        self.assertTrue(np.allclose(d.values, self.u.values))
        self.assertAlmostEqual((-self.u).mass(), -self.u.mass())

    def test_mass(self):
        self.assertAlmostEqual(self.u.mass(), 2.0, places=10)
        b = gaussian_bump(self.n, self.L, mass=0.5, z=(1.0, 0.5), width=0.5)
        self.assertAlmostEqual(b.mass(), 0.5, places=10)

    def test_bytes(self):
        f = Field2D.from_bytes(self.u.to_bytes())
        self.assertTrue(f.same_grid(self.u))
        self.assertTrue(np.array_equal(f.values, self.u.values))

    def test_heat_semigroup(self):
        v = heat_apply(self.u, 0.5)
        exact = gaussian_field(self.n, self.L, mass=2.0, t=0.75)
        self.assertLess(np.max(np.abs(v.values - exact.values)), 1e-8)
        self.assertAlmostEqual(v.mass(), 2.0, places=10)
        with self.assertRaises(ValueError):
            heat_apply(self.u, 0.0)

    def test_gradient_and_laplacian(self):
        X, Y = self.u.grid.mesh()
        gx, gy = gradient(self.u)
        ex = -X / (2 * 0.25) * self.u.values
        ey = -Y / (2 * 0.25) * self.u.values
        scale = np.max(np.abs(ex))
        self.assertLess(np.max(np.abs(gx.values - ex)) / scale, 1e-8)
        self.assertLess(np.max(np.abs(gy.values - ey)) / scale, 1e-8)
        # heat equation: Delta u = du/dt
        r2 = X ** 2 + Y ** 2
        dudt = self.u.values * (r2 / (4 * 0.25 ** 2) - 1.0 / 0.25)
        lap = laplacian(self.u).values
        self.assertLess(np.max(np.abs(lap - dudt)) / np.max(np.abs(dudt)),
                        1e-8)

    def test_norms(self):
        # ||u||_2^2 = M^2 / (8 pi t)
        self.assertAlmostEqual(lp_norm(self.u, 2) ** 2,
                               4.0 / (8 * np.pi * 0.25), places=8)
        self.assertAlmostEqual(lp_norm(self.u, 1), 2.0, places=10)
        self.assertAlmostEqual(lp_norm(self.u, np.inf),
                               float(self.u.values.max()))
        self.assertAlmostEqual(norm_lpm(self.u, WeightedNormSpec(2, 0)),
                               lp_norm(self.u, 2))
        self.assertGreater(norm_lpm(self.u, WeightedNormSpec(2, 5)),
                           lp_norm(self.u, 2))
        with self.assertRaises(ValueError):
            WeightedNormSpec(0.5)
        with self.assertRaises(ValueError):
            WeightedNormSpec(2, -1)

    def test_gagliardo_nirenberg(self):
        r = gagliardo_nirenberg_ratio(self.u)
        self.assertTrue(0.0 < r < 1.0)
        z = Field2D.zeros(self.n, self.L)
        self.assertEqual(gagliardo_nirenberg_ratio(z), 0.0)


class TestFreeSpacePoisson(unittest.TestCase):

    def test_gauss_law(self):
        # grad c = -M(r) / (2 pi r) e_r for -Delta c = u
        n, L, t, M = 64, 8.0, 0.25, 1.5
        u = gaussian_field(n, L, mass=M, t=t)
        g = u.grid
        cx, cy = g.potential_gradient(u.values)
        X, Y = g.mesh()
        r = np.hypot(X, Y)
        mask = (r > 0.5) & (r < 3.5)
        cr = (cx * X + cy * Y)[mask] / r[mask]
        exact = -M * (1 - np.exp(-r[mask] ** 2 / (4 * t))) / (2 * np.pi *
                                                             r[mask])
        self.assertLess(np.max(np.abs(cr - exact)) / np.max(np.abs(exact)),
                        1e-6)

    def test_potential(self):
        # c = -(M / 2pi) (log r + E1(r^2 / 4t) / 2)
        n, L, t, M = 64, 8.0, 0.25, 1.0
        u = gaussian_field(n, L, mass=M, t=t)
        c = poisson_free_space(u).values
        X, Y = u.grid.mesh()
        r = np.hypot(X, Y)
        mask = (r > 0.5) & (r < 3.5)
        exact = -M / (2 * np.pi) * (np.log(r[mask]) +
                                    0.5 * special.exp1(r[mask] ** 2 / (4 * t)))
        self.assertLess(np.max(np.abs(c[mask] - exact)) /
                        np.max(np.abs(exact)), 1e-6)

    def test_support_check(self):
        u = gaussian_field(64, 8.0, z=(5.0, 0.0), t=0.25)
        with self.assertRaises(SupportOverflow):
            poisson_free_space(u)
        c = poisson_free_space(u, check_support=False)
        self.assertTrue(np.all(np.isfinite(c.values)))


class TestDilate(unittest.TestCase):

    def test_gaussian(self):
        w = gaussian_field(64, 12.0, t=1.0)
        u = dilate(w, np.sqrt(2.0))
        exact = gaussian_field(64, 12.0, t=2.0)
        self.assertLess(np.max(np.abs(u.values - exact.values)), 1e-8)
        v = dilate(w, 1.0, heat_time=0.5)
        exact = gaussian_field(64, 12.0, t=1.5)
        self.assertLess(np.max(np.abs(v.values - exact.values)), 1e-8)

    def test_bad_factor(self):
        with self.assertRaises(ValueError):
            dilate(gaussian_field(64, 12.0), 0.0)


class TestRadialField(unittest.TestCase):

    def setUp(self):
        self.r = uniform_nodes(2001, 20.0)
        self.g = RadialField(self.r, radial_gaussian(self.r))

    def test_validation(self):
        with self.assertRaises(ValueError):
            RadialField([0.0], [1.0])
        with self.assertRaises(ValueError):
            RadialField([0.1, 0.2], [1.0, 1.0])
        with self.assertRaises(ValueError):
            RadialField([0.0, 0.2, 0.1], [1.0, 1.0, 1.0])

    def test_mass_and_moment(self):
        self.assertAlmostEqual(self.g.mass(), 1.0, places=4)
        # second moment 4t
        self.assertAlmostEqual(self.g.moment(2), 4.0, places=3)
        self.assertAlmostEqual(self.g.cumulative_mass()[-1], 1.0, places=4)

    def test_gauss_velocity(self):
        v = radial_gauss_velocity(self.g).values
        r = self.r[1:]
        exact = -(1 - np.exp(-r ** 2 / 4)) / (2 * np.pi * r)
        self.assertLess(np.max(np.abs(v[1:] - exact)), 1e-4)
        self.assertEqual(v[0], 0.0)

    def test_potential(self):
        c = poisson_radial(self.g).values
        # c ~ -(M / 2pi) log r at large r
        i = np.searchsorted(self.r, 15.0)
        self.assertAlmostEqual(c[i], -np.log(self.r[i]) / (2 * np.pi),
                               places=3)
        self.assertTrue(np.all(np.diff(c) < 0))

    def test_potential_matches_free_space(self):
        t = 0.25
        r = uniform_nodes(8192, 20.0)
        c = poisson_radial(RadialField(r, radial_gaussian(r, t=t)))
        u = gaussian_field(128, 8.0, t=t)
        free = poisson_free_space(u).values
        X, Y = u.grid.mesh()
        rho = np.hypot(X, Y)
        mask = (rho > 0.5) & (rho < 3.5)
        radial = CubicSpline(r, c.values)(rho[mask])
        self.assertLess(np.max(np.abs(radial - free[mask])) /
                        np.max(np.abs(free[mask])), 1e-6)

    def test_heat(self):
        h = heat_apply_radial(self.g, 0.5).values
        exact = radial_gaussian(self.r, t=1.5)
        mask = self.r < 6
        self.assertLess(np.max(np.abs(h[mask] - exact[mask])) /
                        exact.max(), 1e-3)

    def test_radial_average(self):
        u = gaussian_field(128, 8.0, t=0.5)
        nodes = np.linspace(0.0, 3.0, 13)
        avg = radial_average(u, nodes)
        exact = radial_gaussian(nodes, t=0.5)
        self.assertLess(np.nanmax(np.abs(avg - exact)) / exact.max(), 0.1)


if __name__ == '__main__':
    unittest.main()
