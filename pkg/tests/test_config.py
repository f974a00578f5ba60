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
import os
import shutil
import tempfile
import numpy as np
from pkslab.config import (parse_number, expand_parameters, set_by_path,
                           parse_override, apply_env_overrides,
                           apply_overrides, read_config)
from pkslab.error import ConfigError


class TestParseNumber(unittest.TestCase):

    def test_multiples_of_pi(self):
        self.assertAlmostEqual(parse_number("pi"), np.pi)
        self.assertAlmostEqual(parse_number("4pi"), 4 * np.pi)
        self.assertAlmostEqual(parse_number("0.5*pi"), 0.5 * np.pi)
        self.assertAlmostEqual(parse_number("-pi"), -np.pi)
        self.assertAlmostEqual(parse_number("7 pi"), 7 * np.pi)

    def test_plain_values(self):
        self.assertEqual(parse_number(3), 3)
        self.assertEqual(parse_number("1e-3"), 1e-3)
        self.assertEqual(parse_number("pks"), "pks")
        self.assertIsNone(parse_number(None))
        self.assertTrue(parse_number(True) is True)

    def test_nested(self):
        r = parse_number({"atoms": [{"x": 0.0, "mass": "4pi"}],
                          "alphas": ["pi", 2.0]})
        self.assertAlmostEqual(r["atoms"][0]["mass"], 4 * np.pi)
        self.assertEqual(r["atoms"][0]["x"], 0.0)
        self.assertAlmostEqual(r["alphas"][0], np.pi)
        self.assertEqual(r["alphas"][1], 2.0)


class TestExpandParameters(unittest.TestCase):

    def test_scalar_and_list(self):
        self.assertEqual(expand_parameters(5), [5])
        self.assertEqual(expand_parameters("pks"), ["pks"])
        self.assertEqual(expand_parameters([1, 2, 3]), [1, 2, 3])
        self.assertEqual(expand_parameters(None), [None])

    def test_range(self):
        self.assertEqual(expand_parameters({"min": 1, "max": 5, "step": 2}),
                         [1, 3, 5])
        r = expand_parameters({"min": 0.0, "max": 1.0, "step": 0.25})
        self.assertEqual(len(r), 5)
        self.assertAlmostEqual(r[-1], 1.0)

    def test_bad_range(self):
        with self.assertRaises(ValueError):
            expand_parameters({"min": 1, "max": 5})
        with self.assertRaises(ValueError):
            expand_parameters({"min": 1, "max": 5, "step": 0})


class TestOverrides(unittest.TestCase):

    def setUp(self):
        self.conf = {"name": "x", "experiment": "profile_suite", "seed": 1,
                     "params": {"points": 1024}}

    def test_set_by_path(self):
        c = set_by_path(dict(self.conf, params=dict()), "points", 2048)
        self.assertEqual(c["params"]["points"], 2048)
        c = set_by_path(dict(self.conf), "seed", 7)
        self.assertEqual(c["seed"], 7)
        c = set_by_path(dict(self.conf, params=dict()), "params.solver.rtol",
                        1e-8)
        self.assertEqual(c["params"]["solver"]["rtol"], 1e-8)

    def test_parse_override(self):
        self.assertEqual(parse_override("n=64"), ("n", 64))
        k, v = parse_override("alpha=4pi")
        self.assertEqual(k, "alpha")
        self.assertAlmostEqual(v, 4 * np.pi)
        self.assertEqual(parse_override("models=[pks, nse]"),
                         ("models", ["pks", "nse"]))
        with self.assertRaises(ConfigError):
            parse_override("n64")
        with self.assertRaises(ConfigError):
            parse_override("=3")

    def test_apply_overrides(self):
        c = apply_overrides(self.conf, ["points=2048", "seed=3"])
        self.assertEqual(c["params"]["points"], 2048)
        self.assertEqual(c["seed"], 3)
        # input stays untouched
        self.assertEqual(self.conf["params"]["points"], 1024)

    def test_env_overrides(self):
        env = {"PKSLAB_SEED": "5",
               "PKSLAB_PARAMS__POINTS": "512",
               "PKSLAB_LOG_LEVEL": "DEBUG",
               "HOME": "/root"}
        c = apply_env_overrides(self.conf, env)
        self.assertEqual(c["seed"], 5)
        self.assertEqual(c["params"]["points"], 512)
        self.assertNotIn("log_level", c["params"])

    def test_cli_wins_over_env(self):
        c = apply_env_overrides(self.conf, {"PKSLAB_SEED": "5"})
        c = apply_overrides(c, ["seed=6"])
        self.assertEqual(c["seed"], 6)


class TestReadConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def _write(self, text):
        path = os.path.join(self.tmp, "conf.yaml")
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_read(self):
        path = self._write("---\nname: test\nexperiment: profile_suite\n"
                           "seed: 1\n")
        conf = read_config(path)
        self.assertEqual(conf["name"], "test")
        self.assertEqual(conf["params"], dict())

    def test_missing_key(self):
        path = self._write("---\nname: test\nseed: 1\n")
        with self.assertRaises(ConfigError):
            read_config(path)

    def test_not_a_mapping(self):
        path = self._write("- 1\n- 2\n")
        with self.assertRaises(ConfigError):
            read_config(path)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            read_config(os.path.join(self.tmp, "nope.yaml"))


if __name__ == '__main__':
    unittest.main()
