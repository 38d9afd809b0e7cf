"""Uniformized diffusion processes.

The uniformized process of a diffusion X started at (t0, x0) is the pointwise
probability integral transform U_t = F_t(X_t).  It is itself an Ito diffusion
with coefficients (all quantities evaluated at x = F_s^{-1}(u))

    mu~(u, s)    = dF_s/ds + mu(x, s) f_s(x) + 1/2 sigma^2(x, s) f_s'(x),
    sigma~(u, s) = sigma(x, s) f_s(x),

and its transition distribution is the conditional copula C_{t|s}(v|u), the
unique solution of the backward equation

    d_s C + mu~ d_u C + 1/2 sigma~^2 d_uu C = 0,     C -> 1[v >= u] as s -> t.

`kolmogorov_copula_residual` probes a proposed surface against that equation:
the time derivative is taken along the model's own conditional family (so a
wrong surface such as the independence density is detected), the u
derivatives against the supplied surface.

Simulation is exact: paths are drawn from the closed-form transition kernels
and pushed through the marginal CDF; the degenerate uniformized SDE is never
discretized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import central_diff, rel_step, require
from .copula import CopulaSurface
from .errors import DomainError
from .models import Model, PathEnsemble, simulate_paths

__all__ = [
    "UniformizedCoefficients", "uniformized_coefficients",
    "stationary_uniformized_coefficients",
    "kolmogorov_copula_residual", "conditional_du",
    "simulate_uniformized", "EmpiricalCopula", "empirical_copula",
    "pseudo_observations", "ks_statistic",
]

_DERIV_REL = 1e-5    # relative step for coefficient derivatives


def uniformized_coefficients(model: Model, u: float, s: float) -> tuple[float, float]:
    """Drift and diffusion coefficient of the uniformized process at (u, s).

    Marginal derivatives use registered analytic forms where the catalog
    provides them (Gaussian families, reflected Brownian motion) and central
    differences at relative step 1e-5 otherwise.
    """
    require(0.0 < u < 1.0, f"u = {u} lies on the boundary of (0, 1)")
    require(s > model.t0, f"need s > t0 = {model.t0}")
    marg = model.marginal(s)
    x = float(marg.quantile(u))
    f = float(marg.pdf(x))

    if marg.pdf_dx is not None:
        fp = float(marg.pdf_dx(x))
    else:
        fp = central_diff(lambda xx: float(marg.pdf(xx)), x, rel_step(x, _DERIV_REL))

    if marg.cdf_dt is not None:
        df_ds = float(marg.cdf_dt(x))
    else:
        h = rel_step(s, _DERIV_REL)
        require(s - h > model.t0, "s too close to t0 for the time derivative")
        df_ds = (float(model.marginal(s + h).cdf(x))
                 - float(model.marginal(s - h).cdf(x))) / (2.0 * h)

    mu_x = float(model.spec.drift(x, s))
    sg_x = float(model.spec.diffusion(x, s))
    return df_ds + mu_x * f + 0.5 * sg_x ** 2 * fp, sg_x * f


def stationary_uniformized_coefficients(model: Model, u: float) -> tuple[float, float]:
    """Time-homogeneous coefficients in the stationary regime.

        mu~(u)    = mu(x) g(x) + 1/2 sigma^2(x) g'(x),
        sigma~(u) = sigma(x) g(x),          x = G^{-1}(u).
    """
    if model.stationary is None:
        raise DomainError(f"model '{model.name}' admits no stationary law")
    require(0.0 < u < 1.0, f"u = {u} lies on the boundary of (0, 1)")
    law = model.stationary
    x = float(law.quantile(u))
    g = float(law.pdf(x))
    gp = float(law.pdf_dx(x))
    mu_x = float(model.spec.drift(x, 0.0))
    sg_x = float(model.spec.diffusion(x, 0.0))
    return mu_x * g + 0.5 * sg_x ** 2 * gp, sg_x * g


@dataclass(frozen=True)
class UniformizedCoefficients:
    """Coefficient evaluator bound to one model and its (x0, t0)."""

    model: Model

    @property
    def source(self) -> tuple[float, float]:
        return self.model.x0, self.model.t0

    @property
    def domain(self) -> tuple[float, float]:
        return 0.0, 1.0

    def drift(self, u: float, s: float) -> float:
        return uniformized_coefficients(self.model, u, s)[0]

    def diffusion(self, u: float, s: float) -> float:
        return uniformized_coefficients(self.model, u, s)[1]


# ---------------------------------------------------------------------------
# Backward-equation residual
# ---------------------------------------------------------------------------

def kolmogorov_copula_residual(surface: CopulaSurface, model: Model,
                               us=None, vs=None, h_u: float = 1e-3,
                               h_s: float = 1e-4) -> float:
    """Max backward-equation residual of the surface's conditional on a grid.

    Central differences: d_u and d_uu probe the supplied surface at step
    ``h_u``; d_s is taken along the model's own conditional family at step
    ``h_s``.  The grid must stay away from the boundaries of (0, 1).
    """
    us = np.asarray(us if us is not None else np.linspace(0.1, 0.9, 9), dtype=float)
    vs = np.asarray(vs if vs is not None else np.linspace(0.1, 0.9, 9), dtype=float)
    if us.min() - 2.0 * h_u <= 0.0 or us.max() + 2.0 * h_u >= 1.0 \
            or vs.min() <= 0.0 or vs.max() >= 1.0:
        raise DomainError("residual grid touches the boundary of the unit square")
    s, t = surface.time_pair
    require(s - h_s > model.t0 and s + h_s < t, "time pair too tight for the s-derivative")

    marg_t = model.marginal(t)
    marg_sp = model.marginal(s + h_s)
    marg_sm = model.marginal(s - h_s)
    xv = np.asarray(marg_t.quantile(vs), dtype=float)

    worst = 0.0
    for u in us:
        mu_c, sg_c = uniformized_coefficients(model, float(u), s)
        c_mid = np.asarray(surface.conditional(u, vs), dtype=float)
        c_up = np.asarray(surface.conditional(u + h_u, vs), dtype=float)
        c_dn = np.asarray(surface.conditional(u - h_u, vs), dtype=float)
        du1 = (c_up - c_dn) / (2.0 * h_u)
        du2 = (c_up - 2.0 * c_mid + c_dn) / (h_u * h_u)

        xu_p = float(marg_sp.quantile(u))
        xu_m = float(marg_sm.quantile(u))
        ds = (np.asarray(model.kernel.cdf(s + h_s, xu_p, t, xv), dtype=float)
              - np.asarray(model.kernel.cdf(s - h_s, xu_m, t, xv), dtype=float)) / (2.0 * h_s)

        resid = ds + mu_c * du1 + 0.5 * sg_c ** 2 * du2
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


def conditional_du(surface: CopulaSurface, u: float, v, h: float = 1e-4):
    """Central difference d/du of the conditional; used for reflection checks."""
    return (np.asarray(surface.conditional(u + h, v))
            - np.asarray(surface.conditional(u - h, v))) / (2.0 * h)


# ---------------------------------------------------------------------------
# Exact simulation and empirical copulas
# ---------------------------------------------------------------------------

def simulate_uniformized(model: Model, times, n_paths: int, rng=None,
                         seed=None) -> PathEnsemble:
    """Exact uniformized paths: sample X exactly, then map through F_t.

    The grid must start strictly after t0 (the marginal at t0 is degenerate).
    """
    ens = simulate_paths(model, times, n_paths, rng=rng, seed=seed)
    u_paths = np.empty_like(ens.paths)
    for i, t in enumerate(ens.times):
        marg = model.marginal(float(t))
        u_paths[:, i] = np.asarray(marg.cdf(ens.paths[:, i]), dtype=float)
    meta = dict(ens.meta)
    meta["uniformized"] = True
    return PathEnsemble(times=ens.times, paths=u_paths, seed=ens.seed, meta=meta)


class EmpiricalCopula:
    """Empirical CDF and binned density of pseudo-observations on [0, 1]^2."""

    def __init__(self, u, v):
        u = np.asarray(u, dtype=float).ravel()
        v = np.asarray(v, dtype=float).ravel()
        require(u.size == v.size and u.size > 0, "need a nonempty set of (u, v) pairs")
        if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)):
            raise DomainError("pairs must lie in the unit square")
        self.u, self.v = u, v

    @property
    def n(self) -> int:
        return self.u.size

    def cdf(self, u, v):
        """(1/N) sum 1[u_i <= u, v_i <= v]; broadcasts over array queries."""
        u_b, v_b = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        scalar = u_b.ndim == 0
        out = np.empty(np.atleast_1d(u_b).size)
        for i, (uq, vq) in enumerate(zip(np.atleast_1d(u_b).ravel(),
                                         np.atleast_1d(v_b).ravel())):
            out[i] = np.mean((self.u <= uq) & (self.v <= vq))
        return float(out[0]) if scalar else out.reshape(u_b.shape)

    def cdf_grid(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Values of the empirical CDF on the (k+1)x(k+1) uniform edge lattice.

        Returns (edges, C) with C[i, j] ~= Chat(edges[i], edges[j]); counting
        is via a 2-d histogram, exact up to samples landing exactly on edges.
        """
        edges = np.linspace(0.0, 1.0, k + 1)
        hist, _, _ = np.histogram2d(self.u, self.v, bins=[edges, edges])
        c = np.zeros((k + 1, k + 1))
        c[1:, 1:] = hist.cumsum(axis=0).cumsum(axis=1) / self.n
        return edges, c

    def binned_density(self, m: int = 20) -> np.ndarray:
        """m x m histogram density (rows index v, columns index u); integrates to 1."""
        edges = np.linspace(0.0, 1.0, m + 1)
        hist, _, _ = np.histogram2d(self.u, self.v, bins=[edges, edges])
        return hist.T * (m * m) / self.n


def empirical_copula(u, v) -> EmpiricalCopula:
    return EmpiricalCopula(u, v)


def pseudo_observations(x) -> np.ndarray:
    """Rank-based pseudo-observations (rank - 1/2)/n on (0, 1)."""
    x = np.asarray(x, dtype=float).ravel()
    ranks = np.argsort(np.argsort(x))
    return (ranks + 0.5) / x.size


def ks_statistic(sample, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between a sample and a CDF callable."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    require(x.size > 0, "empty sample")
    f = np.asarray(cdf(x), dtype=float)
    n = x.size
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    return float(max(np.max(grid_hi - f), np.max(f - grid_lo)))
