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
from pkslab.error import CriticalAtom, NegativeMeasure, SupportOverflow
from pkslab.fields import gaussian_field, gaussian_bump, lp_norm
from pkslab.measures import (Atom, MeasureData, merge_atoms, decompose,
                             default_start_time, heat_measure,
                             heat_lp_limit, regularize, measure_norms,
                             min_pairwise_distance, CRITICAL_MASS)
from pkslab.profiles import get_provider

# coarse profile tables keep the tests fast
GRID = {"points": 1024, "rmax": 20.0}


class TestAtoms(unittest.TestCase):

    def test_merge_equal_positions(self):
        atoms = merge_atoms([Atom((0, 0), 1.0), Atom((0, 0), 2.0),
                             Atom((1, 0), 0.5)])
        self.assertEqual(len(atoms), 2)
        self.assertAlmostEqual(atoms[0].mass, 3.0)

    def test_merge_below_resolution(self):
        atoms = merge_atoms([Atom((0, 0), 1.0), Atom((0.01, 0), 3.0)],
                            resolution=0.1)
        self.assertEqual(len(atoms), 1)
        self.assertAlmostEqual(atoms[0].mass, 4.0)
        self.assertAlmostEqual(atoms[0].position[0], 0.0075)

    def test_min_pairwise_distance(self):
        atoms = [Atom((0, 0), 1), Atom((3, 4), 1), Atom((0, 1), 1)]
        self.assertAlmostEqual(min_pairwise_distance(atoms), 1.0)
        self.assertEqual(min_pairwise_distance(atoms[:1]), np.inf)


class TestMeasureData(unittest.TestCase):

    def test_nonnegative(self):
        with self.assertRaises(NegativeMeasure):
            MeasureData([Atom((0, 0), -1.0)], nonnegative=True)
        neg = -1.0 * gaussian_field(64, 8.0, t=0.25)
        with self.assertRaises(NegativeMeasure):
            MeasureData(diffuse=neg, nonnegative=True)
        mu = MeasureData([Atom((0, 0), -1.0)], diffuse=neg)
        self.assertFalse(mu.nonnegative)

    def test_norms(self):
        d = gaussian_field(64, 8.0, mass=2.0, t=0.25)
        mu = MeasureData([Atom((0, 0), 1.0), Atom((1, 0), -0.5)], d)
        tv, atomic = measure_norms(mu)
        self.assertAlmostEqual(atomic, 1.5)
        self.assertAlmostEqual(tv, 3.5, places=8)
        self.assertAlmostEqual(mu.total_mass, 2.5, places=8)
        self.assertFalse(mu.is_zero())
        self.assertTrue(MeasureData().is_zero())

    def test_dict(self):
        d = {"atoms": [{"x": 0.0, "y": 0.0, "mass": 1.0}],
             "diffuse": {"kind": "gaussian", "center": [1.0, 0.0],
                         "mass": 0.5, "width": 0.5},
             "nonnegative": True}
        mu = MeasureData.from_dict(d, {"n": 64, "half_width": 8.0})
        self.assertEqual(mu.atoms, [Atom((0.0, 0.0), 1.0)])
        self.assertAlmostEqual(mu.diffuse.mass(), 0.5, places=8)
        back = mu.to_dict()
        self.assertEqual(back["diffuse"]["kind"], "gaussian")
        self.assertEqual(back["grid"]["n"], 64)

    def test_inline_diffuse_needs_grid(self):
        d = {"diffuse": {"kind": "gaussian"}}
        with self.assertRaises(ValueError):
            MeasureData.from_dict(d)
        with self.assertRaises(ValueError):
            MeasureData.from_dict({"diffuse": {"kind": "uniform"}},
                                  {"n": 64, "half_width": 8.0})


class TestDecompose(unittest.TestCase):

    def test_large_atoms(self):
        mu = MeasureData([Atom((0, 0), 4 * np.pi), Atom((2, 0), 0.1)])
        dec = decompose(mu, eps=0.5)
        self.assertEqual(dec.n_atoms, 1)
        self.assertEqual(len(dec.remainder.atoms), 1)
        self.assertEqual(dec.d, np.inf)

    def test_small_atoms_extracted_until_below_eps(self):
        mu = MeasureData([Atom((0, 0), 1.0), Atom((1, 0), 0.3),
                          Atom((2, 0), 0.3), Atom((3, 0), 0.1)])
        dec = decompose(mu, eps=0.5)
        self.assertEqual(dec.n_atoms, 2)
        rest = sum(abs(a.mass) for a in dec.remainder.atoms)
        self.assertLess(rest, 0.5)
        self.assertAlmostEqual(dec.d, 1.0)

    def test_remainder_has_nothing_left(self):
        configs = [
            [Atom((0, 0), 2.0), Atom((1, 0), 0.2), Atom((2, 0), 0.2),
             Atom((3, 0), 0.15), Atom((4, 0), 0.05)],
            [Atom((0, 0), -1.0), Atom((0, 1), 0.3), Atom((1, 1), -0.3),
             Atom((2, 1), 0.1), Atom((3, 1), -0.05)],
            [Atom((k, 0), 0.01 * k) for k in range(1, 12)],
            [Atom((0, 0), 4 * np.pi), Atom((5, 5), 0.49)]]
        for atoms in configs:
            for eps in (0.1, 0.5, 1.0):
                dec = decompose(MeasureData(atoms), eps)
                again = decompose(dec.remainder, eps)
                self.assertEqual(again.n_atoms, 0)
                self.assertEqual(len(again.remainder.atoms),
                                 len(dec.remainder.atoms))
                total = sum(abs(a.mass) for a in dec.remainder.atoms)
                self.assertLess(total, eps)

    def test_critical_atom(self):
        mu = MeasureData([Atom((0, 0), CRITICAL_MASS)], nonnegative=True)
        with self.assertRaises(CriticalAtom):
            decompose(mu)
        # signed data has no mass restriction
        mu = MeasureData([Atom((0, 0), CRITICAL_MASS)])
        self.assertEqual(decompose(mu).n_atoms, 1)

    def test_bad_eps(self):
        with self.assertRaises(ValueError):
            decompose(MeasureData(), eps=0.0)

    def test_default_start_time(self):
        self.assertAlmostEqual(default_start_time(2.0), 4.0 / 64.0)
        self.assertAlmostEqual(default_start_time(np.inf), 1.0 / 64.0)


class TestHeat(unittest.TestCase):

    def test_heat_measure(self):
        bump = gaussian_bump(64, 4.0, mass=0.5, z=(1.0, 0.0), width=0.3)
        mu = MeasureData([Atom((0, 0), 1.0)], bump)
        u = heat_measure(mu, 0.05)
        self.assertAlmostEqual(u.mass(), 1.5, places=8)
        with self.assertRaises(ValueError):
            heat_measure(MeasureData([Atom((0, 0), 1.0)]), 0.05)

    def test_heat_lp_limit(self):
        t = 0.05
        mu = MeasureData([Atom((0, 0), 2.0)])
        u = heat_measure(mu, t, n=128, half_width=4.0)
        for p in (2.0, 4.0 / 3.0):
            scaled = t ** (1 - 1 / p) * lp_norm(u, p)
            self.assertAlmostEqual(scaled / heat_lp_limit(mu, p), 1.0,
                                   places=6)


class TestRegularize(unittest.TestCase):

    def setUp(self):
        self.profiles = get_provider("pks", **GRID)

    def test_mass(self):
        bump = gaussian_bump(128, 8.0, mass=1.0, z=(1.5, 0.0), width=0.25)
        mu = MeasureData([Atom((0, 0), 4 * np.pi)], bump, nonnegative=True)
        dec = decompose(mu)
        u = regularize(dec, 1.0 / 16.0, self.profiles)
        self.assertAlmostEqual(u.mass() / (4 * np.pi + 1.0), 1.0, places=3)
        self.assertGreaterEqual(u.values.min(), -1e-12)

    def test_atoms_only(self):
        mu = MeasureData([Atom((-1, 0), 2 * np.pi), Atom((1, 0), np.pi)])
        dec = decompose(mu)
        t0 = default_start_time(dec.d)
        u = regularize(dec, t0, self.profiles, n=256, half_width=8.0)
        self.assertAlmostEqual(u.mass() / (3 * np.pi), 1.0, places=3)
        with self.assertRaises(ValueError):
            regularize(dec, 0.0, self.profiles, n=256, half_width=8.0)

    def test_support(self):
        mu = MeasureData([Atom((3.5, 0), np.pi)])
        with self.assertRaises(SupportOverflow):
            regularize(decompose(mu), 0.25, self.profiles, n=64,
                       half_width=4.0)


if __name__ == '__main__':
    unittest.main()
