import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EPS, circle_points, random_star_curve
from hcflow.errors import DegenerateSegment
from hcflow.grid import (
    as_grid,
    backward_difference,
    compute_geometry,
    curvature_sup,
    discrete_energy,
    dot,
    grid_points,
    norm_0h,
    norm_1h,
    perp,
    polygon_length,
    signed_area,
)


class TestBackwardDifference:
    def test_constant_is_zero(self):
        v = np.tile([1.0, 0.0], (8, 1))
        assert np.all(backward_difference(v) == 0)

    def test_quarter_circle_entry(self):
        d = backward_difference(circle_points(4))
        # row 1 holds (v_1 - v_0) / h with h = 1/4
        np.testing.assert_allclose(d[1], [-4.0, 4.0], atol=1e-14)

    def test_alternating(self):
        v = np.stack([(-1.0) ** np.arange(4), np.zeros(4)], axis=-1)
        d = backward_difference(v)
        np.testing.assert_allclose(np.abs(d[:, 0]), 8.0)
        assert np.all(d[:, 1] == 0)

    def test_rejects_short_grid(self):
        with pytest.raises(ValueError):
            as_grid(np.zeros((3, 2)))


class TestNorms:
    @pytest.mark.parametrize("J", [4, 7, 64])
    def test_unit_constant(self, J):
        assert norm_0h(np.tile([1.0, 0.0], (J, 1))) == pytest.approx(1.0)

    def test_pythagorean_constant(self):
        assert norm_0h(np.tile([3.0, 4.0], (10, 1))) == pytest.approx(5.0)
        assert norm_1h(np.tile([1.0, 0.0], (10, 1))) == pytest.approx(1.0)
        assert norm_1h(np.zeros((10, 2))) == 0.0

    def test_circle_0h(self):
        assert norm_0h(circle_points(64)) == pytest.approx(1.0, rel=1e-14)

    def test_circle_1h_closed_form(self):
        J = 256
        h = 1 / J
        expected = math.sqrt(1 + (2 * math.sin(math.pi * h) / h) ** 2)
        assert norm_1h(circle_points(J)) == pytest.approx(expected, rel=1e-13)
        assert expected == pytest.approx(math.sqrt(1 + 4 * math.pi**2), abs=1e-3)

    def test_0h_bounded_by_1h(self, rng):
        for _ in range(20):
            v = rng.normal(size=(16, 2))
            assert norm_0h(v) <= norm_1h(v)


class TestGeometry:
    def test_regular_polygon(self):
        J = 16
        g = compute_geometry(circle_points(J))
        q = 2 * math.sin(math.pi / J) * J
        np.testing.assert_allclose(g.q, q, rtol=1e-14)
        assert q == pytest.approx(6.2429, abs=1e-4)
        u = 2 * np.pi * grid_points(J)
        np.testing.assert_allclose(g.theta, np.stack([-np.sin(u), np.cos(u)], axis=-1), atol=1e-14)

    def test_square(self):
        x = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
        g = compute_geometry(x)
        np.testing.assert_allclose(g.q, 8.0)
        for t in g.tau:
            assert sorted(np.abs(t)) == [0.0, 1.0]
        np.testing.assert_allclose(np.abs(g.theta), math.sqrt(0.5), rtol=1e-15)

    def test_hairpin_marks_theta_undefined(self):
        # tau_1 = +e1 then tau_2 = -e1
        x = np.array([[0.0, 0.0], [1.0, 0.0], [0.2, 0.0], [0.5, 1.0]])
        g = compute_geometry(x)
        assert not g.theta_defined[1]
        assert np.isnan(g.theta[1]).all()
        assert g.first_undefined_theta() == 1

    def test_degenerate_segment(self):
        x = circle_points(8)
        x[3] = x[2]
        with pytest.raises(DegenerateSegment) as exc:
            compute_geometry(x)
        assert exc.value.j == 3

    def test_orthogonality_identity(self, rng):
        for _ in range(50):
            g = compute_geometry(random_star_curve(rng, int(rng.integers(4, 200))))
            d = np.roll(g.tau, -1, axis=0) - g.tau
            assert np.max(np.abs(dot(d, g.theta))) <= 16 * EPS
            np.testing.assert_allclose(np.hypot(*g.tau.T), 1.0, atol=4 * EPS)

    def test_perp_is_clockwise(self):
        np.testing.assert_array_equal(perp(np.array([[0.0, 1.0]])), [[1.0, -0.0]])


class TestCurvatureAndLength:
    @pytest.mark.parametrize("J", [4, 16, 256])
    def test_circle_curvature_is_one(self, J):
        assert curvature_sup(compute_geometry(circle_points(J))) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("R", [0.25, 3.0])
    def test_scaled_circle(self, R):
        assert curvature_sup(compute_geometry(circle_points(32, R))) == pytest.approx(1 / R, rel=1e-12)

    def test_straight_run_contributes_nothing(self):
        # rectangle: only the corner vertices carry curvature
        x = np.array([[0, 0], [1, 0], [2, 0], [2, 1], [1, 1], [0, 1]], dtype=float)
        g = compute_geometry(x)
        dtau = np.roll(g.tau, -1, axis=0) - g.tau
        straight = [1, 4]  # tau_1 = tau_2 = +e1 and tau_4 = tau_5 = -e1
        assert np.all(dtau[straight] == 0)

    def test_inscribed_square_length(self):
        assert polygon_length(compute_geometry(circle_points(4))) == pytest.approx(4 * math.sqrt(2))

    def test_fine_polygon_length(self):
        J = 1024
        L = polygon_length(compute_geometry(circle_points(J)))
        assert L == pytest.approx(2 * J * math.sin(math.pi / J), rel=1e-13)
        # 2 pi - L = pi^3 / (3 J^2) + O(J^-4)
        assert 2 * math.pi - L == pytest.approx(math.pi**3 / (3 * J**2), rel=1e-5)

    def test_length_homogeneous(self, rng):
        x = random_star_curve(rng, 40)
        assert polygon_length(compute_geometry(2 * x)) == pytest.approx(
            2 * polygon_length(compute_geometry(x)), rel=1e-14
        )

    def test_energy_reduces_to_length(self):
        g = compute_geometry(circle_points(64))
        L = polygon_length(g)
        assert discrete_energy(g, np.zeros((64, 2))) == pytest.approx(L, rel=1e-14)
        assert discrete_energy(g, np.tile([1.0, 0.0], (64, 1))) == pytest.approx(1.5 * L, rel=1e-14)


def test_consistency_order_of_difference_quotient():
    """delta x approximates x_rho at the midpoint to second order."""
    errs = []
    for J in (32, 64):
        rho = grid_points(J)
        x = np.stack([np.cos(2 * np.pi * rho), 0.5 * np.sin(4 * np.pi * rho)], axis=-1)
        mid = rho - 0.5 / J
        xr = np.stack([-2 * np.pi * np.sin(2 * np.pi * mid), 2 * np.pi * np.cos(4 * np.pi * mid)], axis=-1)
        errs.append(np.max(np.abs(backward_difference(x) - xr)))
    assert 3.6 <= errs[0] / errs[1] <= 4.4


@settings(max_examples=60, deadline=None)
@given(
    J=st.integers(4, 80),
    angle=st.floats(0, 2 * np.pi),
    shift=st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    scale=st.floats(0.1, 10),
)
def test_geometry_equivariance(J, angle, shift, scale):
    x = circle_points(J) * [1.3, 0.8]
    c, s = math.cos(angle), math.sin(angle)
    Q = np.array([[c, -s], [s, c]])
    y = scale * x @ Q.T + np.array(shift)
    gx, gy = compute_geometry(x), compute_geometry(y)
    np.testing.assert_allclose(gy.q, scale * gx.q, rtol=1e-10)
    np.testing.assert_allclose(gy.tau, gx.tau @ Q.T, atol=1e-10)
    np.testing.assert_allclose(gy.theta, gx.theta @ Q.T, atol=1e-10)
    assert signed_area(y) > 0
