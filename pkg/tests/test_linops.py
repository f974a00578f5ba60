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
from pkslab.error import UnresolvedGrid
from pkslab.fields import RadialField, gaussian_field, uniform_nodes
from pkslab.profiles import get_profile, zero_mode, standard_gaussian
from pkslab.linops import (assemble, spectrum, gap_summary,
                           weighted_residual, cosine_similarity,
                           mode_poisson_kernel, SpectrumReport,
                           fp_kernel_apply, elliptic_mode_shoot,
                           compare_translation_mode, compare_zero_mode)

GRID = {"points": 1024, "rmax": 20.0}


class TestAssemble(unittest.TestCase):

    def setUp(self):
        self.p = get_profile(4 * np.pi, **GRID)

    def test_errors(self):
        with self.assertRaises(ValueError):
            assemble("heat", 0, self.p)
        with self.assertRaises(ValueError):
            assemble("linearized", 0, None)
        with self.assertRaises(ValueError):
            assemble("linearized", -1, self.p)
        with self.assertRaises(UnresolvedGrid):
            assemble("fokker_planck", 0, nodes=uniform_nodes(128, 20.0))
        with self.assertRaises(ValueError):
            assemble("fokker_planck", 0, nodes=uniform_nodes(4096, 20.0))
        with self.assertRaises(ValueError):
            assemble("linearized", 0, self.p,
                     nodes=uniform_nodes(512, 25.0))

    def test_shapes(self):
        op0 = assemble("linearized", 0, self.p)
        op1 = assemble("linearized", 1, self.p)
        self.assertEqual(op0.size, 1024)
        # origin removed for n >= 1
        self.assertEqual(op1.size, 1023)
        self.assertEqual(op1.restrict(np.ones(1024)).shape, (1023,))

    def test_poisson_kernel(self):
        r = uniform_nodes(300, 10.0)
        for n in (0, 1, 3):
            K = mode_poisson_kernel(r if n == 0 else r[1:], n)
            self.assertTrue(np.allclose(K, K.T))
        K = mode_poisson_kernel(r[1:], 2)
        self.assertTrue(np.allclose(np.diag(K), 0.25))

    def test_mass_conservation(self):
        op = assemble("linearized", 0, self.p)
        f = np.cos(op.nodes) * op.G
        self.assertLess(abs(op.mean(op.apply(f))),
                        1e-8 * np.sum(op.V * np.abs(op.apply(f))))


class TestFokkerPlanckSpectrum(unittest.TestCase):

    def setUp(self):
        self.nodes = uniform_nodes(1024, 20.0)

    def test_radial_mode(self):
        s = spectrum(assemble("fokker_planck", 0, nodes=self.nodes))
        lead = s.leading(3).real
        self.assertTrue(np.allclose(lead, [0.0, -1.0, -2.0], atol=5e-3))
        self.assertFalse(s.mean_zero[0])
        self.assertLess(abs(s.gap - 1.0), 5e-3)

    def test_first_mode(self):
        s = spectrum(assemble("fokker_planck", 1, nodes=self.nodes))
        self.assertTrue(np.allclose(s.leading(2).real, [-0.5, -1.5],
                                    atol=5e-3))
        self.assertTrue(np.all(s.mean_zero))

    def test_eigenvectors(self):
        op = assemble("fokker_planck", 0, nodes=self.nodes)
        s = spectrum(op)
        for i in range(3):
            f = s.eigenvectors[:, i]
            lam = float(s.eigenvalues[i].real)
            self.assertLess(weighted_residual(op, f, lam), 1e-3)
            self.assertAlmostEqual(cosine_similarity(op, f, f), 1.0)
        # ground state is the Gaussian
        g = standard_gaussian(op.nodes)
        self.assertAlmostEqual(cosine_similarity(op, s.eigenvectors[:, 0],
                                                 g), 1.0, places=6)


class TestLinearizedSpectrum(unittest.TestCase):

    def test_translation_eigenvalue(self):
        p = get_profile(4 * np.pi, **GRID)
        s = spectrum(assemble("linearized", 1, p))
        _, lam = s.closest(-0.5)
        self.assertLess(abs(lam.real + 0.5), 5e-3)

    def test_zero_eigenvector(self):
        p = get_profile(4 * np.pi, **GRID)
        op = assemble("linearized", 0, p)
        e0 = zero_mode(4 * np.pi, **GRID)
        self.assertLess(weighted_residual(op, e0.values, 0.0, 5.0), 1e-3)
        s = spectrum(op)
        i, lam = s.closest(0.0)
        self.assertLess(abs(lam.real), 1e-4)
        self.assertGreater(cosine_similarity(op, s.eigenvectors[:, i],
                                             e0.values), 0.999)

    def test_gap(self):
        p = get_profile(4 * np.pi, **GRID)
        r = gap_summary(p, modes=(0, 1, 2))
        self.assertGreater(r["K_alpha"], 0.01)
        self.assertGreater(r["lambda_alpha"], 0.01)
        self.assertEqual(len(r["modes"]), 6)

    def test_small_alpha_gap(self):
        p = get_profile(0.1, **GRID)
        r = gap_summary(p, modes=(0, 1, 2))
        self.assertLess(abs(r["K_alpha"] / 0.5 - 1.0), 0.1)
        self.assertLess(abs(r["lambda_alpha"] / 0.5 - 1.0), 0.1)

    def test_report_dict(self):
        p = get_profile(np.pi, **GRID)
        s = spectrum(assemble("confined_fp", 1, p), count=5)
        d = s.to_dict(count=5)
        self.assertEqual(len(d["eigenvalues"]), 5)
        back = SpectrumReport.from_dict(d)
        self.assertEqual(back.gap, s.gap)
        self.assertEqual(back.eigenvalues[0], s.eigenvalues[0])


class TestFokkerPlanckKernel(unittest.TestCase):

    def test_gaussian_is_stationary(self):
        f = gaussian_field(64, 12.0, t=1.0)
        g = fp_kernel_apply(f, 1.0, 0.0)
        self.assertLess(np.max(np.abs(g.values - f.values)), 1e-8)

    def test_gaussian_relaxes(self):
        f = gaussian_field(64, 12.0, t=0.5)
        g = fp_kernel_apply(f, 1.0, 0.0)
        exact = gaussian_field(64, 12.0, t=1.0 - 0.5 * np.exp(-1.0))
        self.assertLess(np.max(np.abs(g.values - exact.values)), 1e-8)

    def test_radial(self):
        r = uniform_nodes(801, 20.0)
        f = RadialField(r, standard_gaussian(r))
        g = fp_kernel_apply(f, 0.5, 0.0)
        mask = r < 6.0
        self.assertLess(np.max(np.abs(g.values[mask] - f.values[mask])) /
                        f.values.max(), 1e-3)

    def test_errors(self):
        f = gaussian_field(64, 12.0)
        with self.assertRaises(ValueError):
            fp_kernel_apply(f, 0.0, 0.0)
        with self.assertRaises(TypeError):
            fp_kernel_apply(f.values, 1.0, 0.0)


class TestEllipticModes(unittest.TestCase):

    def setUp(self):
        self.p = get_profile(4 * np.pi, **GRID)

    def test_radial_mode(self):
        rep = elliptic_mode_shoot(self.p, 0)
        self.assertEqual(rep["growth"], "logarithmic")
        self.assertFalse(rep["bounded"])
        e0 = zero_mode(4 * np.pi, **GRID)
        self.assertLess(compare_zero_mode(self.p, e0, rep), 2e-2)

    def test_translation_mode(self):
        rep = elliptic_mode_shoot(self.p, 1)
        self.assertEqual(rep["growth"], "power_1")
        dev, negative = compare_translation_mode(self.p, rep)
        self.assertTrue(negative)
        self.assertLess(dev, 2e-2)

    def test_higher_mode(self):
        rep = elliptic_mode_shoot(self.p, 2)
        self.assertEqual(rep["growth"], "power_2")
        with self.assertRaises(ValueError):
            elliptic_mode_shoot(self.p, -1)


if __name__ == '__main__':
    unittest.main()
