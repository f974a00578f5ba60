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
from pkslab.helper import (cartesian_product, to_jsonable, canonical_json,
                           config_hash, environment_stamp)
from pkslab.fit import (linear_fit, loglog_fit, decay_rate,
                        order_of_convergence)


class TestHelper(unittest.TestCase):

    def test_cartesian_product(self):
        r = cartesian_product({"b": [1, 2], "a": ["x", "y", "z"]})
        self.assertEqual(len(r), 6)
        self.assertEqual(r[0], {"a": "x", "b": 1})
        self.assertEqual(r[-1], {"a": "z", "b": 2})
        self.assertEqual(cartesian_product({}), [{}])

    def test_to_jsonable(self):
        r = to_jsonable({"a": np.arange(3), "b": np.float64(0.5),
                         "c": np.bool_(True), "d": (np.int32(2), 1.0),
                         "e": float("nan")})
        self.assertEqual(r["a"], [0, 1, 2])
        self.assertIsInstance(r["a"][0], int)
        self.assertEqual(r["b"], 0.5)
        self.assertIs(r["c"], True)
        self.assertEqual(r["d"], [2, 1.0])
        self.assertIsNone(r["e"])

    def test_config_hash(self):
        a = {"seed": 1, "params": {"x": 1.0, "y": [1, 2]}}
        b = {"params": {"y": [1, 2], "x": 1.0}, "seed": 1}
        self.assertEqual(canonical_json(a), canonical_json(b))
        self.assertEqual(config_hash(a), config_hash(b))
        self.assertEqual(len(config_hash(a)), 12)
        self.assertNotEqual(config_hash(a), config_hash(dict(a, seed=2)))

    def test_environment_stamp(self):
        e = environment_stamp()
        for k in ("python", "numpy", "scipy", "pandas", "platform"):
            self.assertIn(k, e)


class TestFit(unittest.TestCase):

    def test_linear_fit(self):
        x = np.linspace(0, 1, 11)
        r = linear_fit(x, 3.0 * x - 2.0)
        self.assertAlmostEqual(r["slope"], 3.0)
        self.assertAlmostEqual(r["intercept"], -2.0)
        self.assertAlmostEqual(r["r2"], 1.0)

    def test_linear_fit_needs_samples(self):
        with self.assertRaises(ValueError):
            linear_fit([1.0], [2.0])
        with self.assertRaises(ValueError):
            linear_fit([1.0, 2.0, 3.0], [1.0, np.nan, 2.0])

    def test_loglog_fit(self):
        x = np.geomspace(1, 100, 9)
        r = loglog_fit(x, 5.0 * x ** -1.5)
        self.assertAlmostEqual(r["slope"], -1.5)

    def test_decay_rate(self):
        t = np.linspace(0, 4, 20)
        r = decay_rate(t, -2.0 * np.exp(-0.7 * t))
        self.assertAlmostEqual(r["rate"], 0.7)

    def test_order_of_convergence(self):
        h = np.array([0.1, 0.05, 0.025])
        self.assertAlmostEqual(order_of_convergence(h, 4.0 * h ** 3), 3.0)


if __name__ == '__main__':
    unittest.main()
