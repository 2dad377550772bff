"""Unit tests for the zero-mode catalog and its verification."""

import numpy as np
import pytest

from src.background import BlackHoleParams
from src.errors import DomainError, SectorError
from src.zero_modes import (
    Growth, KerrEntry, catalog, decay_exponent, entry, kerr_reduction_residual, verify_generalized,
    verify_pointwise_kerr, verify_stationary,
)

SCHWARZSCHILD = BlackHoleParams(1.0)
KERR = BlackHoleParams(1.0, 0.5)


class TestCatalog:
    """Test catalog contents."""

    def test_schwarzschild_names(self):
        """Test that the expected modes and dual states are listed."""
        names = {e.name for e in catalog(SCHWARZSCHILD)}
        for name in ('u_s0', 'u_s1', 'omega_s0', 'omega_v1', 'omega_hat_s1', 'h_s0', 'h_s1', 'h_v1',
                     'h_hat_s0', 'h_hat_s1', 'h_s0_dual', 'h_v1_dual'):
            assert name in names

    def test_growth_labels(self):
        """Test that hat entries grow linearly in time and carry their linear part."""
        for e in catalog(SCHWARZSCHILD):
            if e.name.startswith(('h_hat', 'omega_hat')):
                assert e.growth == Growth.LINEAR_IN_T
                assert e.linear is not None
            else:
                assert e.growth == Growth.STATIONARY

    def test_dual_entries_have_horizon_support(self):
        """Test that dual 1-form and 2-tensor states record their horizon parts."""
        for name in ('omega_s0_dual', 'h_s0_dual', 'h_v1_dual'):
            assert entry(SCHWARZSCHILD, name).distributional is not None

    def test_kerr_catalog(self):
        """Test that spinning backgrounds list only the explicit Kerr 1-forms."""
        entries = catalog(KERR)
        assert entries
        assert all(isinstance(e, KerrEntry) for e in entries)

    def test_unknown_entry(self):
        """Test lookup of a missing name."""
        with pytest.raises(SectorError):
            entry(SCHWARZSCHILD, 'omega_s7')

    def test_to_dict(self):
        """Test the serialized form of an entry."""
        data = entry(SCHWARZSCHILD, 'u_s1').to_dict()
        assert data['sector'] == 'scalar-l1-rank0'
        assert data['growth'] == 'Stationary'
        assert data['slots'] == ['u']
        assert data['dual'] is False


class TestStationaryVerification:
    """Test residuals of stationary entries."""

    @pytest.mark.parametrize('name', ['u_s0', 'u_s1'])
    def test_scalar_modes(self, name):
        """Test that 1 and (r - m) Y_1 solve the scalar wave equation."""
        result = verify_stationary(entry(SCHWARZSCHILD, name), SCHWARZSCHILD)
        assert result['residual'] < 1e-8
        assert result['operator'] == 'box'

    @pytest.mark.slow
    def test_constraint_mode(self):
        """Test that r^-1 (dt_0 - dr) solves the undamped constraint propagation equation."""
        result = verify_stationary(entry(SCHWARZSCHILD, 'omega_s0'), SCHWARZSCHILD)
        assert result['residual'] < 1e-8

    @pytest.mark.slow
    def test_linearized_mass(self):
        """Test that the mass perturbation solves the linearized Ricci equation."""
        result = verify_stationary(entry(SCHWARZSCHILD, 'g_dot_mass'), SCHWARZSCHILD)
        assert result['residual'] < 1e-8

    @pytest.mark.slow
    def test_finite_difference_order(self):
        """Test that FD4 reports roughly fourth-order convergence."""
        result = verify_stationary(entry(SCHWARZSCHILD, 'omega_s0'), SCHWARZSCHILD, scheme='FD4', points=100)
        assert result['order_estimate'] > 3

    def test_linear_growth_refused(self):
        """Test that generalized modes need the generalized check."""
        with pytest.raises(SectorError):
            verify_stationary(entry(SCHWARZSCHILD, 'omega_hat_s1'), SCHWARZSCHILD)

    def test_wrong_operator_kind(self):
        """Test that an unknown operator name is refused."""
        with pytest.raises(SectorError):
            verify_stationary(entry(SCHWARZSCHILD, 'u_s0'), SCHWARZSCHILD, operator='laplace')

    def test_generalized_on_stationary(self):
        """Test that a stationary entry has no linear residual."""
        result = verify_generalized(entry(SCHWARZSCHILD, 'u_s1'), SCHWARZSCHILD)
        assert result['residual_linear'] == 0.0
        assert result['residual'] < 1e-8

    @pytest.mark.slow
    @pytest.mark.parametrize('name', [
        'u_s0', 'u_s1', 'omega_s0', 'dt_flat', 'omega_s1', 'omega1_s1', 'omega_v1', 'h_s0', 'h_s1',
        'h_v1', 'g_dot_mass', 'g_dot_spin', 'u_s0_dual', 'u_s1_dual', 'omega_s0_dual', 'omega_s1_dual',
        'omega_v1_dual', 'h_s0_dual', 'h_s1_dual', 'h_v1_dual',
    ])
    def test_every_stationary_entry(self, name):
        """Test that each stationary entry (duals against the adjoint) is annihilated by its operator."""
        result = verify_stationary(entry(SCHWARZSCHILD, name), SCHWARZSCHILD)
        assert result['residual'] < 1e-8

    def test_stationary_list_is_complete(self):
        """Test that the stationary entries are exactly the ones checked above."""
        names = {e.name for e in catalog(SCHWARZSCHILD) if e.growth == Growth.STATIONARY}
        assert len(names) == 20
        assert {'omega_hat_s1', 'h_hat_s0', 'h_hat_s1'}.isdisjoint(names)

    @pytest.mark.slow
    @pytest.mark.parametrize('name', ['omega_hat_s1', 'h_hat_s0', 'h_hat_s1'])
    def test_generalized_modes(self, name):
        """Test L(0) h_1 = 0 and L(0) h_0 = -[L, t_0] h_1 for the linearly growing entries."""
        result = verify_generalized(entry(SCHWARZSCHILD, name), SCHWARZSCHILD)
        assert result['residual_linear'] < 1e-6
        assert result['residual'] < 1e-6


class TestKerr:
    """Test the pointwise Kerr checks."""

    def test_pointwise_residual(self):
        """Test the wave operator on the Kerr 1-forms away from the axis."""
        for e in catalog(KERR):
            result = verify_pointwise_kerr(e, [(5.0, np.pi / 2), (10.0, 1.0)])
            assert result['operator'] == 'box_kerr'
            assert result['residual'] < 1e-5

    def test_axis_refused(self):
        """Test that points on the axis are refused."""
        with pytest.raises(DomainError):
            verify_pointwise_kerr(catalog(KERR)[0], [(5.0, 0.0)])

    def test_inside_horizon_refused(self):
        """Test that points inside r_b are refused."""
        with pytest.raises(DomainError):
            verify_pointwise_kerr(catalog(KERR)[0], [(1.5, 1.0)])

    def test_zero_spin_reduction(self):
        """Test that the Kerr combination reduces to r^-1 (dt_0 - dr)."""
        assert kerr_reduction_residual(SCHWARZSCHILD) < 1e-12

    def test_reduction_needs_zero_spin(self):
        """Test that the reduction check refuses a spinning background."""
        with pytest.raises(DomainError):
            kerr_reduction_residual(KERR)


class TestDecay:
    """Test frame-normalized decay rates."""

    def test_growing_scalar(self):
        """Test that (r - m) grows like r."""
        assert decay_exponent(entry(SCHWARZSCHILD, 'u_s1'), SCHWARZSCHILD) == pytest.approx(1.0, abs=1e-3)

    def test_constraint_mode_decay(self):
        """Test that r^-1 (dt_0 - dr) decays like 1/r."""
        assert decay_exponent(entry(SCHWARZSCHILD, 'omega_s0'), SCHWARZSCHILD) == pytest.approx(-1.0, abs=1e-3)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
