"""Global numeric policy: grid sizes, support radius, floor constants.

The defaults here are deliberately conservative; every closed-form check in
the test suite runs against them.  ``LSD_GRID_POINTS`` overrides the 1D grid
size process-wide, the CLI flags override per invocation.
"""

from __future__ import annotations

import os

from .errors import ArgumentError

# 1D evaluation / storage grids.
DEFAULT_GRID_POINTS = 4096
# Per-axis resolution for bivariate grids (odd, so pure Simpson applies).
DEFAULT_GRID_POINTS_2D = 513
# Support truncation at mean +- RADIUS * sigma_eff.
DEFAULT_SUPPORT_RADIUS = 10.0

# Densities below this are treated as exact zero in x*log(x) expressions.
LOG_ZERO_FLOOR = 1e-300
# Points with density below this are excluded from Fisher integrands.
FISHER_DENSITY_FLOOR = 1e-290
# Sentinel for log densities outside the declared support.
NEG_INF = float("-inf")

ENV_GRID_POINTS = "LSD_GRID_POINTS"


def default_grid_points() -> int:
    """Resolve the 1D grid size, honouring the environment override."""
    raw = os.environ.get(ENV_GRID_POINTS)
    if raw is None:
        return DEFAULT_GRID_POINTS
    try:
        n = int(raw)
    except ValueError as exc:
        raise ArgumentError(f"{ENV_GRID_POINTS} must be an integer, got {raw!r}") from exc
    if n < 16:
        raise ArgumentError(f"{ENV_GRID_POINTS} must be >= 16, got {n}")
    return n
