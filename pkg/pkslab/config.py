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
import re
import copy
import yaml
import numpy as np

from pkslab.error import ConfigError

LOG = logging.getLogger(os.path.basename(__file__))

ENV_PREFIX = "PKSLAB_"
TOP_LEVEL_KEYS = ("name", "experiment", "seed", "author", "version",
                  "output_dir", "params", "sweep", "plot")
REQUIRED_KEYS = ("name", "experiment", "seed")

_PI_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)"
                    r"\s*\*?\s*pi\s*$")


def read_config(path):
    """
    Load a YAML (or JSON) experiment configuration and check
    the required keys.
    """
    try:
        with open(path, "r") as f:
            conf = yaml.safe_load(f)
        # do some basic validation on config
        if not isinstance(conf, dict):
            raise ConfigError("config root must be a mapping")
        for k in REQUIRED_KEYS:
            if k not in conf:
                raise ConfigError("missing key '{}'".format(k))
    except ConfigError as e:
        LOG.exception("Couldn't parse config '{}' {}".format(path, e))
        raise
    except Exception as e:
        LOG.exception("Couldn't parse config '{}' {}".format(path, e))
        raise ConfigError("couldn't parse config '{}': {}".format(path, e))
    conf.setdefault("params", dict())
    LOG.info("Loaded configuration: {}".format(path))
    return conf


def parse_number(v):
    """
    Numbers may be given as multiples of pi: "4pi", "0.5*pi", "pi".
    Anything else is returned unchanged (strings that look like floats
    are converted).
    """
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, (int, float, np.integer, np.floating)):
        return v
    if isinstance(v, str):
        m = _PI_RE.match(v)
        if m is not None:
            factor = m.group(1)
            if factor in ("", "+"):
                factor = "1"
            elif factor == "-":
                factor = "-1"
            return float(factor) * np.pi
        try:
            return float(v)
        except ValueError:
            return v
    if isinstance(v, list):
        return [parse_number(x) for x in v]
    if isinstance(v, dict):
        return {k: parse_number(x) for k, x in v.items()}
    return v


def expand_parameters(p):
    """
    Expand single values, lists or dicts to a
    list of parameters.
    """
    if p is None:
        return [None]
    p = parse_number(p)
    if isinstance(p, (int, float, np.integer, np.floating)):
        return [p]
    elif isinstance(p, str):
        return [p]
    elif isinstance(p, list):
        return p
    elif isinstance(p, dict):
        if not ("min" in p and "max" in p and "step" in p):
            raise ValueError(
                "range dict needs min, max and step: {}".format(p))
        lo, hi, step = (parse_number(p.get(k))
                        for k in ("min", "max", "step"))
        if step <= 0:
            raise ValueError("step must be positive: {}".format(p))
        # attention: max is included
        n = int(np.floor((hi - lo) / step + 1e-9)) + 1
        r = [lo + i * step for i in range(n)]
        if all(isinstance(x, (int, np.integer)) for x in (lo, hi, step)):
            r = [int(x) for x in r]
        return r
    raise ValueError("cannot expand config parameter: {}".format(p))


def set_by_path(conf, path, value):
    """
    Set conf["a"]["b"] = value for path "a.b"
    (a single key goes to params unless it is a top level key).
    """
    keys = path.split(".")
    if len(keys) == 1 and keys[0] not in TOP_LEVEL_KEYS:
        keys = ["params"] + keys
    d = conf
    for k in keys[:-1]:
        if not isinstance(d.get(k), dict):
            d[k] = dict()
        d = d[k]
    d[keys[-1]] = value
    return conf


def parse_override(s):
    """
    Parse "key=value" with YAML semantics for the value.
    """
    if "=" not in s:
        raise ConfigError("override '{}' is not of the form key=value"
                          .format(s))
    key, raw = s.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError("empty key in override '{}'".format(s))
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return key, parse_number(value)


def apply_env_overrides(conf, environ=None):
    """
    PKSLAB_<KEY>=value overrides top level keys or params.<key>.
    PKSLAB_LOG_LEVEL is reserved for the CLI.
    """
    environ = os.environ if environ is None else environ
    conf = copy.deepcopy(conf)
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX) or name == ENV_PREFIX + "LOG_LEVEL":
            continue
        key = name[len(ENV_PREFIX):].lower()
        if not key:
            continue
        _, value = parse_override("{}={}".format(key, environ[name]))
        LOG.info("Environment override {}={!r}".format(key, value))
        set_by_path(conf, key.replace("__", "."), value)
    return conf


def apply_overrides(conf, sets):
    """
    Apply CLI --set overrides (list of "key=value").
    """
    conf = copy.deepcopy(conf)
    for s in sets or list():
        key, value = parse_override(s)
        LOG.info("CLI override {}={!r}".format(key, value))
        set_by_path(conf, key, value)
    return conf
