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
from scipy import linalg
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from pkslab.error import UnresolvedGrid, EigenSolverError, IntegratorError
from pkslab.fields import (Field2D, RadialField, cell_volumes,
                           radial_log_matrix, uniform_nodes, dilate,
                           heat_apply_radial)
from pkslab.profiles import standard_gaussian, DEFAULT_RMAX


LOG = logging.getLogger(os.path.basename(__file__))

KINDS = ("linearized", "confined_fp", "fokker_planck")
MIN_NODES = 256
MAX_NODES = 2048
DEFAULT_FP_POINTS = 2048
# relative size of sum V f below which an eigenvector counts as mean zero
MEAN_ZERO_TOL = 1e-6
# eigenpairs with ||M f - lam f|| above this (relative to max(|lam|, 1))
# are artifacts of the factorization
SPURIOUS_TOL = 1e-6


def mode_poisson_kernel(r, n):
    """
    Green's function of -Delta restricted to angular mode n on the
    nodes r: -log max(r, s) for n = 0, (r_< / r_>)^n / 2n otherwise.
    """
    r = np.asarray(r, dtype=float)
    if n == 0:
        return -radial_log_matrix(r)
    lo = np.minimum.outer(r, r)
    hi = np.maximum.outer(r, r)
    return (lo / hi) ** n / (2.0 * n)


class ModeOperator(object):
    """
    Dense radial-mode discretization of M f = div(G grad(f/G - K f)),
    finite volumes on the dual cells of the nodes, written as
    M = V^{-1} S (diag(1/G) - K V) with S symmetric tridiagonal.
    For n >= 1 the origin node is removed (f(0) = 0); at r_max a
    ghost node carries f = 0.
    """

    def __init__(self, kind, n, alpha, nodes, G, K=None):
        if kind not in KINDS:
            raise ValueError("unknown operator kind '{}'".format(kind))
        self.kind = kind
        self.n = int(n)
        self.alpha = alpha
        self.all_nodes = np.asarray(nodes, dtype=float)
        self.boundary = "dirichlet_rmax"
        Gfull = np.asarray(G, dtype=float)
        S, V = self._flux_matrix(self.all_nodes, Gfull, self.n)
        sl = slice(0, None) if self.n == 0 else slice(1, None)
        self.nodes = self.all_nodes[sl]
        self.G = Gfull[sl]
        self.V = V[sl]
        self.S = S
        self.K = K
        # well-scaled factors: M = -Q^{-1} Ahat C Q, Q = (V / G)^{1/2}
        vg = np.sqrt(self.V * self.G)
        self.Ahat = -S / np.outer(vg, vg)
        if K is None:
            self.C = None
            self.matrix = (S / self.V[:, None]) / self.G[None, :]
        else:
            self.C = np.eye(len(self.V)) - np.outer(vg, vg) * K
            H = np.diag(1.0 / self.G) - K * self.V[None, :]
            self.matrix = (S / self.V[:, None]).dot(H)
        if not np.all(np.isfinite(self.matrix)):
            raise EigenSolverError("operator matrix is not finite")
        LOG.debug("Assembled {}".format(self))

    def __repr__(self):
        return "ModeOperator({}, n={}, alpha={}, N={})".format(
            self.kind, self.n, self.alpha, len(self.nodes))

    @staticmethod
    def _flux_matrix(r, G, n):
        V = cell_volumes(r)
        N = len(r)
        dr = np.diff(r)
        rh = 0.5 * (r[1:] + r[:-1])
        flux = rh * np.sqrt(G[1:] * G[:-1]) / dr
        diag = np.zeros(N)
        diag[:-1] -= flux
        diag[1:] -= flux
        # ghost node beyond r_max
        diag[-1] -= r[-1] * G[-1] / dr[-1]
        if n > 0:
            diag[1:] -= V[1:] * n * n * G[1:] / r[1:] ** 2
        S = np.diag(diag) + np.diag(flux, 1) + np.diag(flux, -1)
        if n > 0:
            # f(0) = 0: drop the origin, its flux stays on the diagonal
            S = S[1:, 1:]
        return S, V

    @property
    def size(self):
        return len(self.nodes)

    def apply(self, f):
        return self.matrix.dot(f)

    def mean(self, f):
        """
        sum V_j f_j (the mass of a mode-0 function up to 2 pi).
        """
        return float(np.dot(self.V, f))

    def energy_norm(self, f):
        return float(np.sqrt(np.sum(self.V / self.G * np.abs(f) ** 2)))

    def weighted_norm(self, f, m=0.0):
        w = (1.0 + self.nodes ** 2) ** m
        return float(np.sqrt(np.sum(self.V * w * np.abs(f) ** 2)))

    def restrict(self, f):
        """
        Values on the unknowns from values on all nodes.
        """
        f = np.asarray(f)
        return f if len(f) == self.size else f[len(f) - self.size:]


def assemble(kind, n, p=None, nodes=None):
    """
    Discretize L - Lambda_alpha ("linearized"), L - div(f grad c_alpha)
    ("confined_fp") or L ("fokker_planck") on radial mode n.
    Defaults to the nodes of the profile.
    """
    if n < 0:
        raise ValueError("mode must be >= 0")
    if kind not in KINDS:
        raise ValueError("unknown operator kind '{}'".format(kind))
    if kind == "fokker_planck":
        r = uniform_nodes(DEFAULT_FP_POINTS, DEFAULT_RMAX) \
            if nodes is None else np.asarray(nodes, dtype=float)
        _check_nodes(r)
        return ModeOperator(kind, n, None, r, standard_gaussian(r))
    if p is None:
        raise ValueError("operator '{}' needs a profile".format(kind))
    if nodes is None:
        r, G = p.nodes, p.G
    else:
        r = np.asarray(nodes, dtype=float)
        if r[-1] > p.rmax:
            raise ValueError("nodes extend beyond the profile table")
        G = np.exp(PchipInterpolator(p.nodes, np.log(p.G))(r))
    _check_nodes(r)
    K = None
    if kind == "linearized":
        K = mode_poisson_kernel(r if n == 0 else r[1:], n)
    return ModeOperator(kind, n, p.alpha, r, G, K)


def _check_nodes(r):
    if len(r) < MIN_NODES:
        raise UnresolvedGrid("{} radial nodes < {}".format(len(r),
                                                           MIN_NODES))
    if len(r) > MAX_NODES:
        raise ValueError("dense operators are limited to {} nodes, got {}"
                         .format(MAX_NODES, len(r)))


class SpectrumReport(object):

    def __init__(self, kind, n, alpha, eigenvalues, mean_zero, gap,
                 residuals=None, eigenvectors=None, nodes=None):
        self.kind = kind
        self.n = n
        self.alpha = alpha
        self.eigenvalues = np.asarray(eigenvalues, dtype=complex)
        self.mean_zero = np.asarray(mean_zero, dtype=bool)
        self.gap = gap
        self.residuals = residuals or list()
        self.eigenvectors = eigenvectors
        self.nodes = nodes

    def __repr__(self):
        return "SpectrumReport({}, n={}, alpha={}, top={}, gap={:.6g})" \
            .format(self.kind, self.n, self.alpha,
                    np.round(self.eigenvalues[:3].real, 6), self.gap)

    def leading(self, count=5, mean_zero_only=False):
        ev = self.eigenvalues
        if mean_zero_only:
            ev = ev[self.mean_zero]
        return ev[:count]

    def closest(self, value):
        i = int(np.argmin(np.abs(self.eigenvalues - value)))
        return i, self.eigenvalues[i]

    def to_dict(self, count=20):
        return {"kind": self.kind, "n": self.n, "alpha": self.alpha,
                "eigenvalues": [[float(e.real), float(e.imag)]
                                for e in self.eigenvalues[:count]],
                "mean_zero": [bool(b) for b in self.mean_zero[:count]],
                "gap": float(self.gap), "residuals": self.residuals}

    @classmethod
    def from_dict(cls, d):
        ev = [complex(a, b) for a, b in d["eigenvalues"]]
        return cls(d["kind"], d["n"], d["alpha"], ev, d["mean_zero"],
                   d["gap"], d.get("residuals"))


def eigen_decomposition(op):
    """
    All eigenpairs of op.matrix (real spectrum), sorted by decreasing
    eigenvalue. Solved through the symmetric matrix
    Ahat^{1/2} C Ahat^{1/2}.
    """
    try:
        a, U = linalg.eigh(op.Ahat)
        a = np.clip(a, 0.0, None)
        if op.C is None:
            mu, Z = a, U
        else:
            R = (U * np.sqrt(a)).dot(U.T)
            B = R.dot(op.C).dot(R)
            mu, Y = linalg.eigh(0.5 * (B + B.T))
            Z = R.dot(Y)
    except (linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError("eigen-decomposition failed for {}: {}"
                               .format(op, e))
    lam = -mu
    order = np.argsort(-lam)
    lam = lam[order]
    F = Z[:, order] * np.sqrt(op.G / op.V)[:, None]
    norms = np.sqrt(np.sum(op.V[:, None] / op.G[:, None] * F ** 2, axis=0))
    norms[norms == 0] = 1.0
    return lam, F / norms


def spectrum(op, count=10):
    """
    Dense eigen-decomposition with the mean-zero filter for n = 0 and
    residuals of the leading count pairs. Pairs that do not satisfy
    M f = lam f (null directions of the factorization) are dropped.
    """
    lam, F = eigen_decomposition(op)
    w = (op.V / op.G)[:, None]
    D = op.matrix.dot(F) - F * lam[None, :]
    res = np.sqrt(np.sum(w * D ** 2, axis=0))
    keep = res <= SPURIOUS_TOL * np.maximum(np.abs(lam), 1.0)
    if not np.all(keep):
        LOG.debug("Dropped {} spurious eigenpairs of {}".format(
            int(np.sum(~keep)), op))
        lam, F, res = lam[keep], F[:, keep], res[keep]
    if op.n == 0:
        m = np.abs(op.V.dot(F))
        scale = op.V.dot(np.abs(F))
        mean_zero = m <= MEAN_ZERO_TOL * scale
    else:
        mean_zero = np.ones(len(lam), dtype=bool)
    if not np.any(mean_zero):
        raise EigenSolverError("no mean-zero eigenvectors for {}".format(op))
    gap = float(-np.max(lam[mean_zero]))
    rho = float(np.max(np.abs(lam)))
    residuals = list()
    for i in range(min(count, len(lam))):
        residuals.append({"index": i, "eigenvalue": float(lam[i]),
                          "residual": float(res[i] / rho),
                          "mean_zero": bool(mean_zero[i])})
    r = SpectrumReport(op.kind, op.n, op.alpha, lam.astype(complex),
                       mean_zero, gap, residuals, F, op.nodes)
    LOG.debug("Spectrum {}".format(r))
    return r


def weighted_residual(op, f, lam=0.0, m=0.0):
    """
    ||<r>^m (M f - lam f)||_2 / ||<r>^m f||_2 with 2D area weights.
    """
    f = op.restrict(f)
    nf = op.weighted_norm(f, m)
    if nf == 0.0:
        return 0.0
    return op.weighted_norm(op.apply(f) - lam * f, m) / nf


def cosine_similarity(op, f, g):
    """
    Cosine of the angle between f and g in the energy inner product.
    """
    f = op.restrict(f)
    g = op.restrict(g)
    w = op.V / op.G
    num = abs(np.sum(w * f * g))
    return float(num / (op.energy_norm(f) * op.energy_norm(g)))


def gap_summary(p, modes=(0, 1, 2, 3, 4)):
    """
    K_alpha from the linearized operator (mean-zero spectrum, worst
    mode) and lambda_alpha from the confined Fokker-Planck operator.
    """
    rows = list()
    for n in modes:
        for kind in ("linearized", "confined_fp"):
            s = spectrum(assemble(kind, n, p), count=3)
            rows.append({"alpha": p.alpha, "n": n, "kind": kind,
                         "gap": s.gap,
                         "leading": float(s.eigenvalues[0].real),
                         "leading_mean_zero": float(
                             s.leading(1, True)[0].real)})
    K = min(r["gap"] for r in rows if r["kind"] == "linearized")
    lam = min(r["gap"] for r in rows if r["kind"] == "confined_fp")
    LOG.info("alpha={:.6g}: K_alpha={:.6g}, lambda_alpha={:.6g}".format(
        p.alpha, K, lam))
    return {"alpha": p.alpha, "K_alpha": K, "lambda_alpha": lam,
            "modes": rows}


# explicit Fokker-Planck kernel

def fp_kernel_apply(f, tau, tau_prime):
    """
    Exact Fokker-Planck evolution from tau' to tau:
    f -> e^{a Delta} [s^{-2} f(./s)], s = e^{(tau'-tau)/2},
    a = 1 - e^{tau'-tau}. Accepts Field2D or RadialField.
    """
    if not tau > tau_prime:
        raise ValueError("fp_kernel_apply needs tau > tau'")
    a = -np.expm1(tau_prime - tau)
    s = np.exp(0.5 * (tau_prime - tau))
    if isinstance(f, Field2D):
        return dilate(f, s, heat_time=a)
    if isinstance(f, RadialField):
        r = f.nodes
        g = PchipInterpolator(r, f.values, extrapolate=False)(r / s)
        g = np.where(r / s <= r[-1], g, 0.0) / (s * s)
        return heat_apply_radial(f.with_values(g), a)
    raise TypeError("fp_kernel_apply expects Field2D or RadialField")


# elliptic mode ODE: (r f')' - (n^2/r) f + r G f = 0

def elliptic_mode_shoot(p, n, r_span=None, r0=1e-3, rtol=1e-10,
                        atol=1e-12):
    """
    Integrate the regular solution f ~ r^n outward and classify its
    behaviour at the end of r_span against {1, log r} (n = 0) or
    {r^n, r^-n}.
    """
    if n < 0:
        raise ValueError("mode must be >= 0")
    r_end = p.rmax if r_span is None else float(r_span[1])
    r0 = r0 if r_span is None else float(r_span[0])
    G0 = p.G[0]
    k = G0 * r0 * r0 / (4.0 * (n + 1))
    y0 = [r0 ** n * (1.0 - k), r0 ** n * (n - (n + 2) * k)]

    def rhs(r, y):
        g = p.interpolate("G", np.array([r]))[0]
        return [y[1] / r, (n * n / r) * y[0] - r * g * y[0]]

    sol = solve_ivp(rhs, (r0, r_end), y0, method="LSODA", rtol=rtol,
                    atol=atol, dense_output=True)
    if not sol.success:
        raise IntegratorError("mode {} shooting failed: {}".format(
            n, sol.message))
    rr = p.nodes[(p.nodes >= r0) & (p.nodes <= r_end)]
    f, rf = sol.sol(rr)
    fe, rfe = sol.y[0, -1], sol.y[1, -1]
    rep = {"n": int(n), "alpha": p.alpha, "r_end": r_end,
           "f_end": float(fe), "rf_end": float(rfe),
           "sign_changes": int(np.sum(np.diff(np.sign(f[1:])) != 0))}
    if n == 0:
        B = rfe
        A = fe - B * np.log(r_end)
        rep.update({"const": float(A), "log_coeff": float(B)})
        rep["growth"] = "logarithmic" if abs(B) > 1e-8 * max(1.0, abs(A)) \
            else "bounded"
    else:
        a = 0.5 * (fe + rfe / n) / r_end ** n
        b = 0.5 * (fe - rfe / n) * r_end ** n
        rep.update({"grow_coeff": float(a), "decay_coeff": float(b)})
        rep["growth"] = "power_{}".format(n) \
            if abs(a) * r_end ** n > 1e-8 * max(abs(fe), 1e-300) \
            else "bounded"
    rep["bounded"] = rep["growth"] == "bounded"
    rep["r"] = rr
    rep["f"] = f
    LOG.debug("Shooting n={} alpha={:.6g}: {}".format(
        n, p.alpha, rep["growth"]))
    return rep


def compare_translation_mode(p, rep):
    """
    n = 1: the regular solution against n_1 = G'/G = c' - r/2.
    Returns (max relative deviation, n_1 strictly negative).
    """
    r = rep["r"]
    n1 = np.interp(r, p.nodes, p.vG - p.nodes / 2.0)
    f = rep["f"]
    scale = np.dot(f, n1) / np.dot(f, f)
    dev = np.max(np.abs(scale * f - n1)) / np.max(np.abs(n1))
    return float(dev), bool(np.all(n1[r > 0] < 0))


def compare_zero_mode(p, e0, rep):
    """
    n = 0: the regular solution against e = E_alpha^0 / G_alpha.
    """
    r = rep["r"]
    e = np.interp(r, p.nodes, e0.values / p.G)
    f = rep["f"]
    scale = np.dot(f, e) / np.dot(f, f)
    return float(np.max(np.abs(scale * f - e)) / np.max(np.abs(e)))
