"""Unit tests for master equations, invariants and reconstruction."""

import numpy as np
import pytest
import sympy as sp

from src.errors import DomainError, SectorError
from src.master import (
    MasterKind, MasterProblem, dump_potential, first_order_residual, first_order_system,
    gauge_invariants, hat_d, l0_elimination, master_equation_residual, master_from_xyz,
    pure_gauge, reconstruct_xyz, scalar_l1_gauge_function, scalar_l1_static_solutions, vector_invariant, vector_l1_charge,
    vector_potential, zerilli_potential,
)
from src.spectral import outgoing_pair
from src.tools.covariant import M, R


class TestPotentials:
    """Test the master potentials."""

    def test_zerilli_value(self):
        """Test V = 110/729 for l = 2 at r = 3m."""
        assert zerilli_potential(1.0, 2, 3.0) == pytest.approx(110 / 729)

    def test_vector_effective_is_regge_wheeler(self):
        """Test mu V = mu (l(l+1)/r^2 - 6m/r^3)."""
        problem = MasterProblem.from_parity('vector', 2)
        assert vector_potential(1.0, 2, 3.0) == pytest.approx(4 / 9)
        assert problem.effective_potential(np.array([3.0]))[0] == pytest.approx(4 / 27)

    def test_large_r_falloff(self):
        """Test V ~ l(l+1)/r^2 far away."""
        r = 1e5
        assert zerilli_potential(1.0, 3, r) * r ** 2 == pytest.approx(12.0, rel=1e-3)

    def test_sector_checks(self):
        """Test that l < 2 is refused by the l >= 2 potentials."""
        with pytest.raises(SectorError):
            zerilli_potential(1.0, 1, 3.0)
        with pytest.raises(SectorError):
            MasterProblem(MasterKind.SCALAR_L2PLUS, 1)

    def test_inside_horizon(self):
        """Test that r <= 2m is refused."""
        with pytest.raises(DomainError):
            MasterProblem.from_parity('scalar', 2).potential(np.array([2.0, 3.0]))

    def test_dump_potential(self, tmp_path):
        """Test the CSV layout r, r_star, V."""
        problem = MasterProblem.from_parity('scalar', 2)
        path = dump_potential(problem, np.array([3.0, 4.0, 5.0]), tmp_path / 'v.csv')
        lines = path.read_text().splitlines()
        assert lines[0].startswith('# parity=scalar l=2')
        assert lines[1] == 'r,r_star,V'
        assert len(lines) == 5


class TestScalarL1:
    """Test the exact static l = 1 solutions."""

    @pytest.mark.parametrize('phi', [R, R / (2 * M) * sp.log(1 - 2 * M / R)])
    def test_closed_form_residual(self, phi):
        """Test that Phi_1 = r and Phi_2 = (r/2m) log(1 - 2m/r) solve the equation."""
        problem = MasterProblem.from_parity('scalar', 1)
        r = np.array([2.5, 3.0, 5.0, 10.0, 50.0])
        assert np.max(np.abs(master_equation_residual(phi, problem, r))) < 1e-10

    def test_sampled_solution_converges(self):
        """Test FD4 residual of the sampled second solution under refinement."""
        problem = MasterProblem.from_parity('scalar', 1)
        errors = []
        for n in (100, 200):
            r = np.linspace(3.0, 10.0, n)
            phi = scalar_l1_static_solutions(1.0, r)['phi2']
            errors.append(np.max(np.abs(master_equation_residual(phi, problem, r, scheme='FD4'))))
        assert errors[0] / errors[1] > 8

    def test_derivatives(self):
        """Test the tabulated derivative of Phi_2."""
        r = np.array([3.0, 4.0])
        h = 1e-6
        sol = scalar_l1_static_solutions(1.0, r)
        fd = (scalar_l1_static_solutions(1.0, r + h)['phi2'] - scalar_l1_static_solutions(1.0, r - h)['phi2']) / (2 * h)
        assert sol['dphi2'] == pytest.approx(fd, rel=1e-6)

    def test_gauge_function_solves_source_equation(self):
        """Test the static gauge function against its forced equation away from the grid ends."""
        r = np.linspace(2.001, 40.0, 20001)
        mu = 1 - 2 / r
        trace_F = np.exp(-(r - 5.0) ** 2)
        psi = scalar_l1_gauge_function(trace_F, r, 1.0)

        def d_star(y):
            return mu * np.gradient(y, r)

        residual = d_star(d_star(psi)) - 2 * mu / r ** 3 * psi - np.sqrt(2.0) * mu / (2 * r) * trace_F
        inside = (r > 3.0) & (r < 20.0)
        assert np.max(np.abs(residual[inside])) < 1e-4

    def test_gauge_function_needs_solver(self):
        """Test that a nonzero frequency without homogeneous solutions is refused."""
        r = np.linspace(3.0, 10.0, 50)
        with pytest.raises(DomainError):
            scalar_l1_gauge_function(np.ones_like(r), r, 1.0, sigma=0.5)


class TestInvariants:
    """Test gauge invariance of the invariant combinations."""

    def test_scalar_pure_gauge_vanishes(self):
        """Test that F~ and J vanish on pure gauge data."""
        data = pure_gauge((R ** 2, 1 / R), R ** 3)
        inv = gauge_invariants(data['f_tilde'], data['f'], data['H_L'], data['H_T'])
        assert all(sp.simplify(e) == 0 for e in inv.F_tilde)
        assert sp.simplify(inv.J) == 0

    def test_vector_pure_gauge_vanishes(self):
        """Test that J vanishes on f = r d(L/r), H_T = -(k/r) L."""
        L = R ** 2 + 1
        f = tuple(R * c for c in hat_d(L / R))
        J = vector_invariant(f, -sp.sqrt(5) / R * L)
        assert all(sp.simplify(c) == 0 for c in J)

    def test_scalar_needs_l1(self):
        """Test that k^2 < 2 is refused."""
        with pytest.raises(SectorError):
            gauge_invariants((0, 0, 0), (0, 0), 0, 0, k2=0)


class TestVectorL1:
    """Test the vector l = 1 charge."""

    def test_rotation_charge(self):
        """Test the constant charge of the linearized Kerr rotation."""
        result = vector_l1_charge((2 * M / R ** 2, 1 / R), 1.0)
        assert result['charge'] == pytest.approx(6.0)
        assert result['spread'] < 1e-10

    def test_pure_gauge_has_no_charge(self):
        """Test zero charge for f = r d(L/r) at zero frequency."""
        L = R ** 3
        f = tuple(R * c for c in hat_d(L / R, 0))
        assert vector_l1_charge(f, 1.0)['charge'] == pytest.approx(0.0, abs=1e-10)


class TestReconstruction:
    """Test the first-order system and its inversion."""

    def test_master_from_reconstruction_is_identity(self):
        """Test that Phi is recovered from the reconstructed (X, Y, Z) for arbitrary data."""
        r = np.linspace(3.0, 20.0, 50)
        phi = np.sin(r) + 0.3j * r
        dphi = np.cos(r) + 0.3j
        sigma = 0.5j
        X, Y, Zs = reconstruct_xyz(phi, dphi, sigma, 1.0, 2, r)
        back = master_from_xyz(X, Y, 1j * sigma * Zs, sigma, 1.0, 2, r)
        assert np.max(np.abs(back - phi)) < 1e-8

    def test_zero_frequency_refused(self):
        """Test that Phi from (X, Y, Z) needs sigma != 0."""
        with pytest.raises(DomainError):
            master_from_xyz(1.0, 1.0, 1.0, 0.0, 1.0, 2, 3.0)

    def test_system_shape(self):
        """Test the 3x3 system layout."""
        assert first_order_system(0.5, 1.0, 2, np.linspace(3, 4, 7)).shape == (3, 3, 7)

    @pytest.mark.slow
    def test_reconstructed_solution_solves_system(self):
        """Test fourth-order convergence of the first-order residual for a Zerilli solution."""
        problem = MasterProblem.from_parity('scalar', 2)
        sigma = 0.5j
        results = []
        for n in (101, 201):
            r = np.linspace(3.0, 20.0, n)
            psi, dpsi, _, _ = outgoing_pair(problem, sigma, r)
            mu = 1 - 2 / r
            X, Y, Zs = reconstruct_xyz(psi, dpsi / mu, sigma, 1.0, 2, r)
            results.append(first_order_residual(X, Y, Zs, sigma, 1.0, 2, r, 'FD4'))
        assert results[0]['system'] / results[1]['system'] > 10
        assert results[1]['constraint'] < 1e-8


class TestSphericalSector:
    """Test l = 0 elimination."""

    def test_mass_change(self):
        """Test that the mass perturbation is read off from the dt0^2 coefficient."""
        result = l0_elimination(-sp.Rational(7, 5) / R, 0, 0, 0, 1.0)
        assert result['m_dot'] == pytest.approx(0.7)
        assert result['spread'] < 1e-12
        assert result['residual'] < 1e-12


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
