"""Quadrature layer: weights, exactness, error estimates, 2D rule."""

import math

import numpy as np
import pytest

from lsdeficit.errors import ArgumentError, IntegrandError
from lsdeficit.quadrature import (
    GridSpec,
    expectation,
    integrate,
    integrate_values,
    integrate_values_2d,
    simpson_weights,
)


class TestGridSpec:
    def test_step_and_nodes(self):
        spec = GridSpec(-1.0, 1.0, 21)
        assert spec.step == pytest.approx(0.1)
        nodes = spec.nodes()
        assert nodes.shape == (21,)
        assert nodes[0] == -1.0 and nodes[-1] == 1.0

    def test_refined_doubles_intervals(self):
        spec = GridSpec(0.0, 1.0, 17)
        fine = spec.refined()
        assert fine.n_points == 33
        # every coarse node survives refinement
        assert np.allclose(fine.nodes()[::2], spec.nodes())

    def test_rejects_bad_bounds(self):
        with pytest.raises(ArgumentError):
            GridSpec(1.0, 1.0, 32)
        with pytest.raises(ArgumentError):
            GridSpec(0.0, math.inf, 32)
        with pytest.raises(ArgumentError):
            GridSpec(0.0, 1.0, 8)


class TestSimpsonWeights:
    def test_total_mass_is_interval_length(self):
        for n in (17, 18, 64, 101):
            w = simpson_weights(n, 0.25)
            assert math.fsum(w.tolist()) == pytest.approx(0.25 * (n - 1), rel=1e-14)

    def test_cubic_exactness_odd_and_even(self):
        # Simpson and the 3/8 tail are both degree-3 exact.
        for n in (33, 34):
            spec = GridSpec(-2.0, 3.0, n)
            x = spec.nodes()
            w = simpson_weights(n, spec.step)
            value = float(w @ (x**3 - 2 * x**2 + x - 5))
            exact = (3.0**4 - (-2.0) ** 4) / 4 - 2 * (3.0**3 - (-2.0) ** 3) / 3 \
                + (3.0**2 - (-2.0) ** 2) / 2 - 5 * 5.0
            assert value == pytest.approx(exact, abs=1e-12)

    def test_fourth_order_convergence(self):
        errs = []
        for n in (33, 65, 129):
            spec = GridSpec(0.0, math.pi, n)
            res = integrate(np.sin, spec)
            errs.append(abs(res.value - 2.0))
        assert errs[0] / errs[1] > 14  # ~16 for an O(h^4) rule
        assert errs[1] / errs[2] > 14


class TestIntegrate:
    def test_gaussian_mass(self):
        spec = GridSpec(-10.0, 10.0, 513)
        res = integrate(lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), spec)
        assert res.value == pytest.approx(1.0, abs=1e-12)

    def test_refine_reports_honest_error(self):
        # the Richardson estimate tracks the real error up to higher order
        spec = GridSpec(0.0, 1.0, 17)
        res = integrate(lambda x: np.exp(x), spec, refine=True)
        true_err = abs(res.value - (math.e - 1.0))
        assert true_err <= 1.05 * res.abs_error_estimate
        assert res.abs_error_estimate < 1e-6

    def test_shape_mismatch_rejected(self):
        spec = GridSpec(0.0, 1.0, 17)
        with pytest.raises(ArgumentError):
            integrate(lambda x: np.zeros(3), spec)

    def test_non_finite_integrand_named(self):
        spec = GridSpec(0.0, 1.0, 17)
        with pytest.raises(IntegrandError, match="node"):
            integrate(lambda x: np.where(x > 0.5, np.nan, 1.0), spec)


class TestIntegrateValues:
    def test_matches_callable_path(self):
        spec = GridSpec(-3.0, 3.0, 129)
        vals = np.cos(spec.nodes())
        a = integrate_values(vals, spec)
        b = integrate(np.cos, spec)
        assert a.value == b.value

    def test_refine_on_stored_values(self):
        spec = GridSpec(0.0, 2.0, 65)
        vals = np.exp(spec.nodes())
        res = integrate_values(vals, spec, refine=True)
        assert abs(res.value - (math.exp(2.0) - 1.0)) <= res.abs_error_estimate

    def test_even_node_count_supported(self):
        spec = GridSpec(0.0, 1.0, 64)
        vals = spec.nodes() ** 2
        res = integrate_values(vals, spec, refine=True)
        assert res.value == pytest.approx(1.0 / 3.0, abs=1e-12)


class TestExpectation:
    def test_second_moment_of_gaussian(self):
        from lsdeficit.densities import GaussianDensity

        mu = GaussianDensity(1.0, 4.0)
        res = expectation(mu, lambda x: x * x, refine=True)
        assert res.value == pytest.approx(5.0, abs=1e-9)


class Test2D:
    def test_separable_product(self):
        sx = GridSpec(-8.0, 8.0, 129)
        sy = GridSpec(-8.0, 8.0, 257)
        x = sx.nodes()[:, None]
        y = sy.nodes()[None, :]
        vals = np.exp(-0.5 * (x * x + y * y)) / (2 * math.pi)
        res = integrate_values_2d(vals, sx, sy)
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_polynomial_exactness(self):
        sx = GridSpec(0.0, 1.0, 17)
        sy = GridSpec(0.0, 2.0, 17)
        vals = (sx.nodes()[:, None] ** 3) * (sy.nodes()[None, :] ** 2)
        res = integrate_values_2d(vals, sx, sy)
        assert res.value == pytest.approx(0.25 * (8.0 / 3.0), abs=1e-13)

    def test_shape_checked(self):
        sx = GridSpec(0.0, 1.0, 17)
        sy = GridSpec(0.0, 1.0, 33)
        with pytest.raises(ArgumentError):
            integrate_values_2d(np.zeros((17, 17)), sx, sy)

    def test_nan_location_reported(self):
        sx = GridSpec(0.0, 1.0, 17)
        sy = GridSpec(0.0, 1.0, 17)
        vals = np.ones((17, 17))
        vals[3, 5] = np.inf
        with pytest.raises(IntegrandError):
            integrate_values_2d(vals, sx, sy)
