"""Information functionals against a reference density.

All quantities are computed by deterministic quadrature on the density's
canonical grid and carry a Richardson error estimate:

  relative_entropy    D(mu|nu)  = int p log(p/q)
  fisher_information  I(X)      = int (p')^2 / p = int score^2 dmu
  relative_fisher     I(mu|nu)  = int (score_mu - score_nu)^2 dmu
  shannon_entropy     h(X)      = -int p log p
  entropy_power       N(X)      = exp(2 h(X) / n)
  total_variation     TV        = int |p - q|   (in [0, 2])
  lsi_deficit                   = I(mu|gamma)/2 - D(mu|gamma)

The reference defaults to the standard Gaussian of matching dimension.
Products decompose coordinate-wise (entropy and divergence are additive
for independent coordinates); bivariate grids integrate in 2D.

Convention: contributions where p < 1e-300 are treated as exact zeros
(the x log x limit); Fisher integrands additionally exclude nodes with
p < 1e-290, and a density vanishing strictly inside its support raises
``InfiniteInformationError`` rather than returning a large number.
"""

from __future__ import annotations

import math

import numpy as np

from . import config
from .values import FunctionalValue
from .densities import (
    Density1D,
    GaussianDensity,
    Grid2DDensity,
    ProductDensity,
    gaussian_convolve,
    gaussian_convolve_2d,
    standard_gaussian,
)
from .errors import ArgumentError, InfiniteInformationError, SupportError
from .quadrature import GridSpec, integrate, integrate_values, integrate_values_2d

_LOG_2PI = math.log(2.0 * math.pi)


def dim_of(density) -> int:
    return getattr(density, "dim", 1)


def _std_log_pdf_1d(x: np.ndarray) -> np.ndarray:
    return -0.5 * x * x - 0.5 * _LOG_2PI


def _require_1d(nu, caller: str) -> Density1D:
    if nu is None:
        return standard_gaussian()
    if not isinstance(nu, Density1D):
        raise ArgumentError(f"{caller}: reference must be a 1D density here")
    return nu


# ---------------------------------------------------------------------------
# Relative entropy
# ---------------------------------------------------------------------------

def _relative_entropy_1d(mu: Density1D, nu: Density1D) -> FunctionalValue:
    t = mu.table
    log_q = np.asarray(nu.log_pdf(t.nodes), dtype=float)
    live = t.p >= config.LOG_ZERO_FLOOR
    violating = live & np.isneginf(log_q)
    if violating.any():
        x = t.nodes[int(np.argmax(violating))]
        raise SupportError(
            f"relative entropy undefined: mass at x={x:.6g} where the reference vanishes"
        )
    integrand = np.where(live, t.p * (t.log_p - np.where(live, log_q, 0.0)), 0.0)
    r = integrate_values(integrand, t.spec, refine=True)
    return FunctionalValue("D", r.value, r.abs_error_estimate)


def relative_entropy(mu, nu=None) -> FunctionalValue:
    """D(mu | nu); nu defaults to the standard Gaussian of mu's dimension."""
    if isinstance(mu, Density1D):
        return _relative_entropy_1d(mu, _require_1d(nu, "relative_entropy"))
    if isinstance(mu, ProductDensity):
        if nu is None:
            parts = [_relative_entropy_1d(f, standard_gaussian()) for f in mu.factors]
        elif isinstance(nu, ProductDensity) and nu.dim == mu.dim:
            parts = [
                _relative_entropy_1d(f, g) for f, g in zip(mu.factors, nu.factors)
            ]
        else:
            raise ArgumentError(
                "relative_entropy: product density needs a product reference of equal dimension"
            )
        return FunctionalValue(
            "D",
            math.fsum(p.value for p in parts),
            math.fsum(p.error_estimate for p in parts),
        )
    if isinstance(mu, Grid2DDensity):
        log_q = _reference_log_pdf_2d(mu, nu)
        p = np.exp(mu.log_values)
        live = p >= config.LOG_ZERO_FLOOR
        if (live & np.isneginf(log_q)).any():
            raise SupportError(
                "relative entropy undefined: mass where the 2D reference vanishes"
            )
        integrand = np.where(live, p * (mu.log_values - np.where(live, log_q, 0.0)), 0.0)
        r = integrate_values_2d(integrand, mu.spec_x, mu.spec_y, refine=True)
        return FunctionalValue("D", r.value, r.abs_error_estimate)
    raise ArgumentError(f"unsupported density type {type(mu).__name__}")


def _reference_log_pdf_2d(mu: Grid2DDensity, nu) -> np.ndarray:
    xs = mu.spec_x.nodes()[:, None]
    ys = mu.spec_y.nodes()[None, :]
    if nu is None:
        return _std_log_pdf_1d(xs) + _std_log_pdf_1d(ys)
    if isinstance(nu, ProductDensity) and nu.dim == 2:
        fx, fy = nu.factors
        return np.asarray(fx.log_pdf(xs[:, 0]))[:, None] + np.asarray(
            fy.log_pdf(ys[0, :])
        )[None, :]
    if isinstance(nu, Grid2DDensity):
        pts = np.stack(
            np.broadcast_arrays(xs, ys), axis=-1
        ).reshape(-1, 2)
        return np.asarray(nu.log_pdf(pts)).reshape(xs.shape[0], ys.shape[1])
    raise ArgumentError("2D reference must be None, a 2-factor product, or a 2D grid")


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------

def _fisher_mask_1d(p: np.ndarray) -> np.ndarray:
    live = p >= config.FISHER_DENSITY_FLOOR
    if not live.any():
        raise InfiniteInformationError("density below the Fisher floor everywhere")
    first, last = int(np.argmax(live)), len(live) - 1 - int(np.argmax(live[::-1]))
    if not live[first : last + 1].all():
        i = first + int(np.argmax(~live[first : last + 1]))
        raise InfiniteInformationError(
            f"density vanishes in the interior of its support (node {i}): "
            "Fisher information diverges"
        )
    return live


def _fisher_information_1d(mu: Density1D) -> FunctionalValue:
    t = mu.table
    live = _fisher_mask_1d(t.p)
    integrand = np.where(live, t.score * t.score * t.p, 0.0)
    r = integrate_values(integrand, t.spec, refine=True)
    var = mu.variance()
    if var > 0 and r.value < 1.0 / var - r.abs_error_estimate - 1e-6:
        from .errors import NumericalError

        raise NumericalError(
            f"Fisher information {r.value} below the Cramer-Rao floor 1/Var = {1.0 / var}"
        )
    return FunctionalValue("I_plain", r.value, r.abs_error_estimate)


def _grid2d_score_fields(mu: Grid2DDensity) -> tuple[np.ndarray, np.ndarray]:
    g = mu.log_values
    hx, hy = mu.spec_x.step, mu.spec_y.step
    gx = np.empty_like(g)
    gx[1:-1] = (g[2:] - g[:-2]) / (2 * hx)
    gx[0] = (g[1] - g[0]) / hx
    gx[-1] = (g[-1] - g[-2]) / hx
    gy = np.empty_like(g)
    gy[:, 1:-1] = (g[:, 2:] - g[:, :-2]) / (2 * hy)
    gy[:, 0] = (g[:, 1] - g[:, 0]) / hy
    gy[:, -1] = (g[:, -1] - g[:, -2]) / hy
    return gx, gy


def fisher_information(mu) -> FunctionalValue:
    """Plain Fisher information I(X) = int |grad log p|^2 dmu."""
    if isinstance(mu, Density1D):
        return _fisher_information_1d(mu)
    if isinstance(mu, ProductDensity):
        parts = [_fisher_information_1d(f) for f in mu.factors]
        return FunctionalValue(
            "I_plain",
            math.fsum(p.value for p in parts),
            math.fsum(p.error_estimate for p in parts),
        )
    if isinstance(mu, Grid2DDensity):
        p = np.exp(mu.log_values)
        gx, gy = _grid2d_score_fields(mu)
        live = p >= config.FISHER_DENSITY_FLOOR
        integrand = np.where(live, (gx * gx + gy * gy) * p, 0.0)
        r = integrate_values_2d(integrand, mu.spec_x, mu.spec_y, refine=True)
        return FunctionalValue("I_plain", r.value, r.abs_error_estimate)
    raise ArgumentError(f"unsupported density type {type(mu).__name__}")


def _relative_fisher_1d(mu: Density1D, nu: Density1D) -> FunctionalValue:
    t = mu.table
    live = _fisher_mask_1d(t.p)
    score_q = np.asarray(nu.score(t.nodes), dtype=float)
    diff = t.score - score_q
    integrand = np.where(live, diff * diff * t.p, 0.0)
    r = integrate_values(integrand, t.spec, refine=True)
    return FunctionalValue("I_rel", r.value, r.abs_error_estimate)


def relative_fisher(mu, nu=None) -> FunctionalValue:
    """I(mu | nu) = int |score_mu - score_nu|^2 dmu."""
    if isinstance(mu, Density1D):
        return _relative_fisher_1d(mu, _require_1d(nu, "relative_fisher"))
    if isinstance(mu, ProductDensity):
        if nu is None:
            parts = [_relative_fisher_1d(f, standard_gaussian()) for f in mu.factors]
        elif isinstance(nu, ProductDensity) and nu.dim == mu.dim:
            parts = [_relative_fisher_1d(f, g) for f, g in zip(mu.factors, nu.factors)]
        else:
            raise ArgumentError(
                "relative_fisher: product density needs a product reference of equal dimension"
            )
        return FunctionalValue(
            "I_rel",
            math.fsum(p.value for p in parts),
            math.fsum(p.error_estimate for p in parts),
        )
    if isinstance(mu, Grid2DDensity):
        if nu is not None:
            raise ArgumentError(
                "relative_fisher: 2D grids support only the standard Gaussian reference"
            )
        p = np.exp(mu.log_values)
        gx, gy = _grid2d_score_fields(mu)
        xs = mu.spec_x.nodes()[:, None]
        ys = mu.spec_y.nodes()[None, :]
        live = p >= config.FISHER_DENSITY_FLOOR
        integrand = np.where(
            live, ((gx + xs) ** 2 + (gy + ys) ** 2) * p, 0.0
        )
        r = integrate_values_2d(integrand, mu.spec_x, mu.spec_y, refine=True)
        return FunctionalValue("I_rel", r.value, r.abs_error_estimate)
    raise ArgumentError(f"unsupported density type {type(mu).__name__}")


# ---------------------------------------------------------------------------
# Entropy, entropy power, total variation
# ---------------------------------------------------------------------------

def _shannon_entropy_1d(mu: Density1D) -> FunctionalValue:
    t = mu.table
    live = t.p >= config.LOG_ZERO_FLOOR
    integrand = np.where(live, -t.p * t.log_p, 0.0)
    r = integrate_values(integrand, t.spec, refine=True)
    return FunctionalValue("h", r.value, r.abs_error_estimate)


def shannon_entropy(mu) -> FunctionalValue:
    """Differential entropy h(X) = -int p log p."""
    if isinstance(mu, Density1D):
        return _shannon_entropy_1d(mu)
    if isinstance(mu, ProductDensity):
        parts = [_shannon_entropy_1d(f) for f in mu.factors]
        return FunctionalValue(
            "h",
            math.fsum(p.value for p in parts),
            math.fsum(p.error_estimate for p in parts),
        )
    if isinstance(mu, Grid2DDensity):
        p = np.exp(mu.log_values)
        live = p >= config.LOG_ZERO_FLOOR
        integrand = np.where(live, -p * mu.log_values, 0.0)
        r = integrate_values_2d(integrand, mu.spec_x, mu.spec_y, refine=True)
        return FunctionalValue("h", r.value, r.abs_error_estimate)
    raise ArgumentError(f"unsupported density type {type(mu).__name__}")


def entropy_power(mu) -> FunctionalValue:
    """N(X) = exp(2 h(X) / n) for an n-coordinate density."""
    h = shannon_entropy(mu)
    n = dim_of(mu)
    value = math.exp(2.0 * h.value / n)
    return FunctionalValue("N", value, value * 2.0 * h.error_estimate / n)


def _merged_spec(a: Density1D, b: Density1D) -> GridSpec:
    sa, sb = a.eval_spec(), b.eval_spec()
    n = max(sa.n_points, sb.n_points)
    return GridSpec(min(sa.x_lo, sb.x_lo), max(sa.x_hi, sb.x_hi), n + (n + 1) % 2)


def total_variation(mu, nu=None) -> FunctionalValue:
    """int |p - q| over a grid covering both supports; lands in [0, 2]."""
    if isinstance(mu, Density1D):
        nu = _require_1d(nu, "total_variation")
        spec = _merged_spec(mu, nu)
        r = integrate(
            lambda x: np.abs(np.asarray(mu.pdf(x)) - np.asarray(nu.pdf(x))),
            spec,
            refine=True,
        )
        return FunctionalValue("TV", min(r.value, 2.0), r.abs_error_estimate)
    if isinstance(mu, ProductDensity):
        if mu.dim != 2:
            raise ArgumentError(
                "total_variation joint integral is implemented for 2 coordinates"
            )
        fx, fy = mu.factors
        n = config.DEFAULT_GRID_POINTS_2D
        sx, sy = fx.eval_spec(), fy.eval_spec()
        spec_x = GridSpec(sx.x_lo, sx.x_hi, n)
        spec_y = GridSpec(sy.x_lo, sy.x_hi, n)
        px = np.asarray(fx.pdf(spec_x.nodes()))[:, None]
        py = np.asarray(fy.pdf(spec_y.nodes()))[None, :]
        qx = np.exp(_std_log_pdf_1d(spec_x.nodes()))[:, None]
        qy = np.exp(_std_log_pdf_1d(spec_y.nodes()))[None, :]
        if nu is not None:
            raise ArgumentError(
                "total_variation: product densities support only the standard Gaussian reference"
            )
        r = integrate_values_2d(np.abs(px * py - qx * qy), spec_x, spec_y, refine=True)
        return FunctionalValue("TV", min(r.value, 2.0), r.abs_error_estimate)
    if isinstance(mu, Grid2DDensity):
        log_q = _reference_log_pdf_2d(mu, nu)
        integrand = np.abs(np.exp(mu.log_values) - np.exp(log_q))
        r = integrate_values_2d(integrand, mu.spec_x, mu.spec_y, refine=True)
        return FunctionalValue("TV", min(r.value, 2.0), r.abs_error_estimate)
    raise ArgumentError(f"unsupported density type {type(mu).__name__}")


# ---------------------------------------------------------------------------
# Deficit and the heat-flow derivative check
# ---------------------------------------------------------------------------

def lsi_deficit(mu) -> FunctionalValue:
    """I(mu|gamma)/2 - D(mu|gamma): nonnegative, zero only at translates."""
    i_rel = relative_fisher(mu)
    d = relative_entropy(mu)
    return FunctionalValue(
        "deficit",
        0.5 * i_rel.value - d.value,
        0.5 * i_rel.error_estimate + d.error_estimate + 1e-10,
    )


def _evolved(mu, t: float):
    if isinstance(mu, Density1D):
        return gaussian_convolve(mu, t)
    if isinstance(mu, Grid2DDensity):
        return gaussian_convolve_2d(mu, t)
    if isinstance(mu, ProductDensity):
        return ProductDensity([gaussian_convolve(f, t) for f in mu.factors])
    raise ArgumentError(f"unsupported density type {type(mu).__name__}")


def de_bruijn_residual(mu, t: float, h_step: float | None = None) -> float:
    """|d/dt h(X + sqrt(t) Z) - I(X + sqrt(t) Z)/2| by central differencing.

    The residual is O(h_step^2) plus quadrature error; the default step is
    1e-2 * sqrt(t).
    """
    if h_step is None:
        h_step = 1e-2 * math.sqrt(t)
    if not (t > h_step > 0):
        raise ArgumentError(f"need t > h_step > 0, got t={t}, h_step={h_step}")
    h_plus = shannon_entropy(_evolved(mu, t + h_step)).value
    h_minus = shannon_entropy(_evolved(mu, t - h_step)).value
    derivative = (h_plus - h_minus) / (2.0 * h_step)
    half_info = 0.5 * fisher_information(_evolved(mu, t)).value
    return abs(derivative - half_info)
