"""Unit tests for harmonic sectors and sphere identities."""

import numpy as np
import pytest
import sympy as sp

from src.errors import SectorError
from src.harmonics import (
    SphereOperation, component_count, hodge_eigen, rotation_one_form, scalar, slots,
    sphere_averages, sphere_eigen, sphere_inner_product, vector, verify_sphere_identities,
)


class TestSector:
    """Test sector construction and slot layout."""

    def test_vector_needs_l1(self):
        """Test that l = 0 has no vector harmonic."""
        with pytest.raises(SectorError):
            vector(0)

    def test_bad_rank(self):
        """Test that rank 3 is rejected."""
        with pytest.raises(SectorError):
            scalar(2, 3)

    def test_spherical_metric_slots(self):
        """Test that l = 0 symmetric 2-tensors have no f_a or H_T slots."""
        assert slots(scalar(0, 2)) == ['ft_tt', 'ft_tr', 'ft_rr', 'H_L']

    def test_full_scalar_slots(self):
        """Test the seven scalar-type slots at l >= 2."""
        assert component_count(scalar(2, 2)) == 7

    def test_vector_l1_slots(self):
        """Test that the vector l = 1 tensor has no H_T slot."""
        assert slots(vector(1, 2)) == ['f_t', 'f_r']

    def test_one_form_slots(self):
        """Test rank-1 slots."""
        assert slots(scalar(0, 1)) == ['w_t', 'w_r']
        assert slots(scalar(1, 1)) == ['w_t', 'w_r', 'w_S']
        assert slots(vector(1)) == ['w_V']


class TestSphereEigen:
    """Test exact sphere eigenvalues."""

    def test_laplacian_by_rank(self):
        """Test l(l+1), l(l+1) - 1 and l(l+1) - 4 at l = 2."""
        assert sphere_eigen(SphereOperation.LAPLACIAN, scalar(2)) == 6
        assert sphere_eigen(SphereOperation.LAPLACIAN, scalar(2, 1)) == 5
        assert sphere_eigen(SphereOperation.LAPLACIAN, scalar(2, 2)) == 2

    def test_killing_fields(self):
        """Test that l = 1 vector harmonics are Killing (zero divergence of the symmetric gradient)."""
        assert sphere_eigen(SphereOperation.DIV_OF_SYM_GRAD, vector(1)) == 0
        assert sphere_eigen(SphereOperation.SYM_GRAD_SPLIT, vector(1)) == 0

    def test_scalar_sym_grad_split(self):
        """Test the pure-trace part -l(l+1)/2 of the symmetric gradient of dY."""
        assert sphere_eigen(SphereOperation.SYM_GRAD_SPLIT, scalar(1, 1)) == sp.Rational(-1)

    def test_trace_free_rank2_at_l1(self):
        """Test that no trace-free rank-2 harmonic exists at l = 1."""
        with pytest.raises(SectorError):
            sphere_eigen(SphereOperation.LAPLACIAN, scalar(1, 2))

    def test_hodge(self):
        """Test the Hodge eigenvalue l(l+1) on 1-forms."""
        assert hodge_eigen(vector(2)) == 6
        with pytest.raises(SectorError):
            hodge_eigen(scalar(2))


class TestRepresentatives:
    """Test explicit low-l representatives."""

    def test_averages(self):
        """Test avg cos^2 = 1/3, avg sin^2 = 2/3."""
        s1 = sphere_averages(scalar(1, 1))
        assert s1['Y2'] == sp.Rational(1, 3)
        assert s1['dY2'] == sp.Rational(2, 3)
        assert sphere_averages(vector(1))['V2'] == sp.Rational(2, 3)

    def test_rotation_about_z(self):
        """Test that rotation about z gives sin^2(theta) dphi."""
        theta = np.array([0.3, 1.0, 2.0])
        v_th, v_ph = rotation_one_form((0, 0, 1), theta, np.zeros(3))
        assert v_th == pytest.approx(np.zeros(3), abs=1e-14)
        assert v_ph == pytest.approx(np.sin(theta) ** 2)

    def test_inner_products(self):
        """Test orthogonality of rotations about orthogonal axes."""
        assert sphere_inner_product((0, 0, 1), (0, 0, 1)) == pytest.approx(2 / 3)
        assert sphere_inner_product((1, 0, 0), (1, 0, 0)) == pytest.approx(2 / 3)
        assert sphere_inner_product((1, 0, 0), (0, 0, 1)) == pytest.approx(0.0, abs=1e-12)


class TestGridIdentities:
    """Test the grid checks of the sphere eigenvalue relations."""

    def test_laplacian_converges(self):
        """Test second-order convergence of the Laplacian residual."""
        coarse = verify_sphere_identities(2, 64)['laplacian']
        fine = verify_sphere_identities(2, 128)['laplacian']
        assert coarse / fine > 3

    def test_constant_gradient(self):
        """Test that the l = 0 harmonic has zero gradient."""
        assert verify_sphere_identities(0, 64)['grad_constant'] == 0.0

    @pytest.mark.parametrize('l, names', [
        (1, ['laplacian_one_form', 'laplacian_vector', 'div_vector', 'div_sym_grad_scalar',
             'div_sym_grad_vector', 'div_trace_free_hess', 'sym_grad_split_scalar', 'sym_grad_split_vector']),
        (2, ['laplacian_trace_free', 'laplacian_trace_free_vector']),
    ])
    def test_every_identity_is_evaluated(self, l, names):
        """Test that the 1-form and trace-free identities are reported for l >= 1 and l >= 2."""
        report = verify_sphere_identities(l, 32)
        for name in names:
            assert name in report
        if l == 1:
            assert 'laplacian_trace_free' not in report

    @pytest.mark.slow
    @pytest.mark.parametrize('l', [1, 2, 3])
    def test_identities_hold_for_all_orders(self, l):
        """Test small, second-order residuals for every identity including m != 0 harmonics."""
        coarse = verify_sphere_identities(l, 64)
        fine = verify_sphere_identities(l, 128)
        assert set(coarse) == set(fine)
        for name, value in fine.items():
            assert value < 1e-2 * (1 + l * (l + 1)), name
            assert value <= coarse[name] / 3 + 1e-8, name

    def test_residuals_are_measured(self):
        """Test that the vector identities report their discretization error instead of a fixed zero."""
        report = verify_sphere_identities(3, 32)
        assert report['div_sym_grad_vector'] > 0
        assert report['laplacian_vector'] > 0

    def test_limits(self):
        """Test the l and resolution limits."""
        with pytest.raises(SectorError):
            verify_sphere_identities(4)
        with pytest.raises(SectorError):
            verify_sphere_identities(2, 16)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
