"""Unit tests for the background geometry."""

import numpy as np
import pytest

from src.background import (
    BlackHoleParams, Chart, Cutoff, TimeFunctionKind, box_one_form_numeric, damping_cutoff,
    inverse_tortoise, kerr_one_forms, linearized_kerr, metric_components, mu, regular_cutoff,
    star_cutoff, time_function_offset, time_function_slope, tortoise,
)
from src.errors import DomainError


class TestBlackHoleParams:
    """Test parameter validation."""

    def test_horizon_radius(self):
        """Test r_b = m + sqrt(m^2 - a^2)."""
        assert BlackHoleParams(1.0, 0.6).horizon_radius == pytest.approx(1.8)
        assert BlackHoleParams(2.0).horizon_radius == pytest.approx(4.0)

    def test_rejects_extremal_spin(self):
        """Test that a >= m is rejected."""
        with pytest.raises(DomainError):
            BlackHoleParams(1.0, 1.0)

    def test_rejects_nonpositive_mass(self):
        """Test that m <= 0 is rejected."""
        with pytest.raises(DomainError):
            BlackHoleParams(0.0)

    def test_require_schwarzschild(self):
        """Test that spin-dependent formulas refuse Kerr."""
        with pytest.raises(DomainError):
            mu(BlackHoleParams(1.0, 0.3), 4.0)


class TestTortoise:
    """Test the tortoise coordinate and its inverse."""

    def test_value(self):
        """Test r_* = r + 2m log(r - 2m)."""
        params = BlackHoleParams(1.0)
        assert tortoise(params, 4.0) == pytest.approx(4.0 + 2.0 * np.log(2.0))

    def test_inside_horizon_raises(self):
        """Test that r <= 2m is rejected."""
        with pytest.raises(DomainError):
            tortoise(BlackHoleParams(1.0), 2.0)

    def test_inverse(self):
        """Test that inverse_tortoise undoes tortoise from near the horizon to far out."""
        params = BlackHoleParams(1.0)
        r = np.array([2.001, 2.5, 3.0, 10.0, 100.0, 1000.0])
        assert inverse_tortoise(params, tortoise(params, r)) == pytest.approx(r, rel=1e-10)

    def test_mu(self):
        """Test mu = 1 - 2m/r."""
        assert mu(BlackHoleParams(1.0), 4.0) == pytest.approx(0.5)


class TestCutoff:
    """Test the smootherstep cutoffs."""

    def test_falling_endpoints(self):
        """Test values 1, 1/2 and 0 across the transition."""
        chi = Cutoff(3.0, 4.0)
        assert chi(2.0) == pytest.approx(1.0)
        assert chi(3.5) == pytest.approx(0.5)
        assert chi(5.0) == pytest.approx(0.0)

    def test_derivative_matches_difference(self):
        """Test the first derivative against a centered difference."""
        chi = Cutoff(3.0, 4.0, falling=False)
        h = 1e-5
        fd = (chi(3.3 + h) - chi(3.3 - h)) / (2 * h)
        assert chi(3.3, 1) == pytest.approx(fd, rel=1e-6)

    def test_named_cutoffs(self):
        """Test the supports of the named cutoffs."""
        params = BlackHoleParams(1.0)
        assert star_cutoff(params)(3.0) == pytest.approx(1.0)
        assert regular_cutoff(params)(3.0) == pytest.approx(0.0)
        assert damping_cutoff(params)(2.5) == pytest.approx(1.0)
        assert damping_cutoff(params)(3.0) == pytest.approx(0.0)

    def test_bad_interval(self):
        """Test that an empty interval is rejected."""
        with pytest.raises(DomainError):
            Cutoff(4.0, 3.0)


class TestMetric:
    """Test metric components."""

    def test_schwarzschild_components(self):
        """Test g_tt = mu and g_rr = -1/mu in Boyer-Lindquist form."""
        sample = metric_components(BlackHoleParams(1.0), (0.0, 4.0, 1.0, 0.0))
        assert sample.components[0, 0] == pytest.approx(0.5)
        assert sample.components[1, 1] == pytest.approx(-2.0)

    def test_kerr_inverse(self):
        """Test that the stored inverse inverts the Kerr metric."""
        sample = metric_components(BlackHoleParams(1.0, 0.5), (0.0, 5.0, 1.0, 0.0))
        assert sample.check() < 1e-10

    def test_regularized_chart_at_horizon(self):
        """Test that the chi = 0 chart is nondegenerate on the horizon."""
        params = BlackHoleParams(1.0, 0.5)
        sample = metric_components(params, (0.0, params.horizon_radius, 1.0, 0.0), Chart.REGULARIZED)
        assert sample.check() < 1e-9

    def test_axis_rejected(self):
        """Test that the polar axis is rejected."""
        with pytest.raises(DomainError):
            metric_components(BlackHoleParams(1.0), (0.0, 4.0, 0.0, 0.0))

    def test_linearized_kerr_mass_part(self):
        """Test the dt0^2 coefficient -2 mdot / r."""
        h = linearized_kerr(BlackHoleParams(1.0), 1.0, 0.0, (0.0, 4.0, 1.0, 0.0))
        assert h[0, 0] == pytest.approx(-0.5)
        assert np.allclose(h, h.T)

    def test_linearized_kerr_horizon_value(self):
        """Test the dt0^2 coefficient -1 at r = 2m."""
        h = linearized_kerr(BlackHoleParams(1.0), 1.0, 0.0, (0.0, 2.0, 1.0, 0.0))
        assert h[0, 0] == pytest.approx(-1.0)
        assert not np.any(linearized_kerr(BlackHoleParams(1.0), 0.0, 0.0, (0.0, 2.0, 1.0, 0.0)))

    def test_linearized_kerr_uses_spin_magnitude(self):
        """Test that reversing the angular momentum flips the axis, not the tensor."""
        params = BlackHoleParams(1.0)
        point = (0.0, 5.0, 0.8, 0.0)
        assert np.allclose(linearized_kerr(params, 0.3, -0.7, point),
                           linearized_kerr(params, 0.3, 0.7, point))

    @pytest.mark.parametrize('mdot,adot', [(1.0, 0.0), (0.0, 1.0), (0.3, 0.7)])
    @pytest.mark.parametrize('r', [2.0, 3.0, 7.5])
    def test_linearized_kerr_matches_difference(self, mdot, adot, r):
        """Test the linearized family against differences of the chi = 0 Kerr metric."""
        point = (0.0, r, 1.1, 0.0)
        errors = []
        for eps in (1e-3, 5e-4):
            # mass differences are centred; the spin enters through a and a^2 only
            plus = metric_components(BlackHoleParams(1.0 + eps * mdot, eps * adot), point,
                                     Chart.REGULARIZED).components
            minus = metric_components(BlackHoleParams(1.0 - eps * mdot, 0.0), point,
                                      Chart.REGULARIZED).components
            spin_only = metric_components(BlackHoleParams(1.0 + eps * mdot, 0.0), point,
                                          Chart.REGULARIZED).components
            difference = (spin_only - minus) / (2 * eps) + (plus - spin_only) / eps
            errors.append(np.max(np.abs(difference - linearized_kerr(BlackHoleParams(1.0), mdot, adot, point))))
        assert errors[0] < 1e-2
        # first order in eps
        assert errors[1] <= 0.6 * errors[0] + 1e-9

    def test_regularized_chart_is_ingoing_null_chart(self):
        """Test that chi = 0 at zero spin gives mu dt0^2 - 2 dt0 dr - r^2 dOmega^2."""
        r, theta = 5.0, 1.2
        g = metric_components(BlackHoleParams(1.0), (0.0, r, theta, 0.0), Chart.REGULARIZED).components
        expected = np.diag([1 - 2 / r, 0.0, -r ** 2, -r ** 2 * np.sin(theta) ** 2])
        expected[0, 1] = expected[1, 0] = -1.0
        assert np.allclose(g, expected, atol=1e-13)

    @pytest.mark.parametrize('spin', [0.0, 0.5, 0.9])
    def test_regularized_chart_is_coordinate_change(self, spin):
        """Test that chi = 0 pulls back Boyer-Lindquist by dt = dt0 - (r^2+a^2)/Delta dr, dphi = dphi0 - a/Delta dr."""
        params = BlackHoleParams(1.0, spin)
        r, theta = 4.0, 0.9
        delta = params.delta(r)
        jac = np.eye(4)
        jac[0, 1] = -(r ** 2 + spin ** 2) / delta
        jac[3, 1] = -spin / delta
        bl = metric_components(params, (0.0, r, theta, 0.0)).components
        reg = metric_components(params, (0.0, r, theta, 0.0), Chart.REGULARIZED).components
        assert np.allclose(jac.T @ bl @ jac, reg, atol=1e-11)


class TestTimeFunctions:
    """Test time-function offsets."""

    def test_null_minus_static(self):
        """Test t_0 - t = r_*."""
        params = BlackHoleParams(1.0)
        offset = time_function_offset(TimeFunctionKind.NULL0, TimeFunctionKind.STATIC, params, 5.0)
        assert offset == pytest.approx(tortoise(params, 5.0))

    def test_same_kind(self):
        """Test that the offset of a time function with itself vanishes."""
        params = BlackHoleParams(1.0)
        assert time_function_offset(TimeFunctionKind.STAR, TimeFunctionKind.STAR, params, 5.0) == 0.0

    def test_null_slope(self):
        """Test d(t_0 - t)/dr = 1/mu."""
        slope = time_function_slope(TimeFunctionKind.NULL0, BlackHoleParams(1.0))
        assert slope(4.0) == pytest.approx(2.0)

    def test_regular_agrees_far_away(self):
        """Test that the chi-regular time function is static for r >= 4m."""
        params = BlackHoleParams(1.0)
        assert time_function_offset(TimeFunctionKind.CHI_REGULAR, TimeFunctionKind.STATIC,
                                    params, 6.0) == 0.0

    @pytest.mark.parametrize('r', [4.0, 10.0, 250.0])
    def test_star_is_outgoing_far_away(self, r):
        """Test t_* - t = -r_* for r >= 4m."""
        params = BlackHoleParams(1.0)
        offset = time_function_offset(TimeFunctionKind.STAR, TimeFunctionKind.STATIC, params, r)
        assert offset == pytest.approx(-tortoise(params, r), rel=1e-12)

    @pytest.mark.parametrize('r', [2.05, 2.5, 3.0])
    def test_star_is_ingoing_near_horizon(self, r):
        """Test t_* = t_0 for r <= 3m."""
        params = BlackHoleParams(1.0)
        offset = time_function_offset(TimeFunctionKind.STAR, TimeFunctionKind.NULL0, params, r)
        assert offset == pytest.approx(0.0, abs=1e-12)

    def test_star_offsets_compose(self):
        """Test (t_* - t_0) + (t_0 - t) = t_* - t across the transition region."""
        params = BlackHoleParams(1.0)
        for r in (3.2, 3.5, 3.8):
            direct = time_function_offset(TimeFunctionKind.STAR, TimeFunctionKind.STATIC, params, r)
            chained = (time_function_offset(TimeFunctionKind.STAR, TimeFunctionKind.NULL0, params, r)
                       + time_function_offset(TimeFunctionKind.NULL0, TimeFunctionKind.STATIC, params, r))
            assert direct == pytest.approx(chained, rel=1e-12)


class TestKerrOneForms:
    """Test the explicit stationary Kerr 1-forms."""

    @pytest.mark.parametrize('name', ['omega0_1', 'omega0_2'])
    def test_in_kernel(self, name):
        """Test that the 1-form wave operator annihilates the form."""
        params = BlackHoleParams(1.0, 0.5)
        form = kerr_one_forms(params)[name]
        residual = box_one_form_numeric(params, form, 5.0, 1.0)
        assert np.max(np.abs(residual)) / np.max(np.abs(form(5.0, 1.0))) < 1e-5

    def test_dr_not_in_kernel(self):
        """Test that dr itself is not annihilated."""
        params = BlackHoleParams(1.0)
        residual = box_one_form_numeric(params, lambda r, th: np.array([0.0, 1.0, 0.0, 0.0]), 5.0, 1.0)
        assert np.max(np.abs(residual)) > 1e-3


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
