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
import sys
import json
import hashlib
import platform
import itertools as it
import numpy as np


LOG = logging.getLogger(os.path.basename(__file__))


def cartesian_product(p_dict):
    """
    Compute Cartesian product on parameter dict:
    In:
        {"alpha": [1.0, 2.0], "points": [1024, 2048]}
    Out:
        [ {"alpha": 1.0, "points": 1024},
          {"alpha": 1.0, "points": 2048},
          {"alpha": 2.0, "points": 1024},
          {"alpha": 2.0, "points": 2048}
        ]
    """
    p_names = sorted(p_dict)
    return [dict(zip(p_names, prod)) for prod in it.product(
        *(p_dict[n] for n in p_names))]


def to_jsonable(obj):
    """
    Convert numpy scalars/arrays (also nested in dicts/lists)
    to plain Python objects.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not np.isfinite(v):
            # JSON has no inf/nan
            return None
        return v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def canonical_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True,
                      separators=(",", ":"))


def config_hash(conf, length=12):
    """
    Short SHA-256 hash of a (JSON serializable) config dict.
    """
    h = hashlib.sha256(canonical_json(conf).encode("utf-8")).hexdigest()
    return h[:length]


def environment_stamp():
    """
    Versions of the interpreter and the numerical stack.
    """
    import scipy
    import pandas
    return {"python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pandas.__version__,
            "platform": platform.platform()}
