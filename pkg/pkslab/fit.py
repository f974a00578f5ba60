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
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score


LOG = logging.getLogger(os.path.basename(__file__))


def linear_fit(x, y):
    """
    Least-squares line y = slope * x + intercept.
    Returns dict with slope, intercept and r2.
    """
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    y = np.asarray(y, dtype=float)
    if len(y) < 2:
        raise ValueError("need at least two samples to fit a line")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("cannot fit non-finite samples")
    m = LinearRegression()
    m.fit(x, y)
    r2 = r2_score(y, m.predict(x)) if len(y) > 2 else 1.0
    r = {"slope": float(m.coef_[0]),
         "intercept": float(m.intercept_),
         "r2": float(r2)}
    LOG.debug("Linear fit: {}".format(r))
    return r


def loglog_fit(x, y):
    """
    Power law y = A x^slope.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (x > 0) & (y > 0)
    return linear_fit(np.log(x[mask]), np.log(y[mask]))


def decay_rate(t, y):
    """
    Exponential rate lambda of y ~ B e^{-lambda t} (log-linear fit).
    """
    t = np.asarray(t, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    mask = y > 0
    r = linear_fit(t[mask], np.log(y[mask]))
    r["rate"] = -r["slope"]
    return r


def order_of_convergence(h, err):
    """
    Observed order p of err ~ C h^p.
    """
    return loglog_fit(h, err)["slope"]
