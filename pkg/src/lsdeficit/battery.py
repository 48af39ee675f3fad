"""Standard labeled battery of test densities.

A fixed, deterministic collection spanning the supported shapes: scaled
and shifted Gaussians, symmetric two-component mixtures, a quartic tilt
with a certified convexity floor, product combinations, and coupled 2D
Gaussian grids.  Labels are stable identifiers used in reports.
"""

from __future__ import annotations

from .densities import (
    Density,
    GaussianDensity,
    MixtureDensity,
    ProductDensity,
    TiltedDensity,
    bivariate_gaussian_grid,
)

_TILT_COEFFS = (0.0, 0.0, 0.25, 0.0, 0.05)


def _symmetric_mixture(gap: float) -> MixtureDensity:
    h = 0.5 * gap
    return MixtureDensity([(0.5, -h, 1.0), (0.5, h, 1.0)])


def standard_battery() -> list[tuple[str, Density]]:
    """Fresh instances each call; labels are stable across calls."""
    tilt = TiltedDensity(list(_TILT_COEFFS), convexity_lower_bound=0.5)
    members: list[tuple[str, Density]] = [
        ("gauss-narrow", GaussianDensity(0.0, 0.25)),
        ("gauss-sub", GaussianDensity(0.0, 0.64)),
        ("gauss-super", GaussianDensity(0.0, 1.5625)),
        ("gauss-wide", GaussianDensity(0.0, 4.0)),
        ("gauss-shift-pos", GaussianDensity(1.0, 1.0)),
        ("gauss-shift-neg", GaussianDensity(-1.0, 1.0)),
        ("mixture-gap1", _symmetric_mixture(1.0)),
        ("mixture-gap2", _symmetric_mixture(2.0)),
        ("tilted-quartic", tilt),
        (
            "product-mixed",
            ProductDensity([GaussianDensity(0.0, 0.25), _symmetric_mixture(2.0)]),
        ),
        (
            "product-tilted",
            ProductDensity(
                [
                    TiltedDensity(list(_TILT_COEFFS), convexity_lower_bound=0.5),
                    GaussianDensity(0.5, 1.0),
                ]
            ),
        ),
        ("grid2d-uncorrelated", bivariate_gaussian_grid(0.0)),
        ("grid2d-correlated", bivariate_gaussian_grid(0.5)),
    ]
    return members


BATTERY_LABELS: tuple[str, ...] = tuple(label for label, _ in standard_battery())
