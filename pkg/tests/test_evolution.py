"""Unit tests for time-domain evolution and signal analysis."""

import numpy as np
import pytest

from src.errors import ConvergenceError, DomainError
from src.evolution import (
    EvolutionResult, EvolutionRun, convergence_order, energy_monitor, evolve, fit_tail,
    matrix_pencil, ringdown_fit,
)
from src.master import MasterProblem

ZERILLI = MasterProblem.from_parity('scalar', 2)
FREE = MasterProblem.free()


def _short_run(problem, **kwargs):
    settings = dict(rstar_min=-50.0, rstar_max=100.0, h=0.1, duration=20.0, observers=[30.0], energy_every=5)
    settings.update(kwargs)
    return EvolutionRun(problem, **settings)


def _synthetic_result(energy):
    run = _short_run(FREE)
    t = np.arange(len(energy), dtype=float)
    return EvolutionResult(run, t, {}, t, np.asarray(energy, dtype=float), len(energy))


class TestRunChecks:
    """Test run parameter validation."""

    @pytest.mark.parametrize('kwargs', [{'cfl': 1.0}, {'order': 3}, {'h': 0.0}, {'observers': [500.0]}])
    def test_inadmissible(self, kwargs):
        """Test CFL, order, spacing and observer checks."""
        with pytest.raises(DomainError):
            _short_run(FREE, **kwargs).check()

    def test_reflection_free_time(self):
        """Test the first boundary echo at the default observer."""
        run = EvolutionRun(ZERILLI)
        assert run.reflection_free_until() == pytest.approx(651.0)

    def test_time_step(self):
        """Test dt = cfl * h and the scheme name."""
        run = _short_run(FREE, order=4)
        assert run.dt == pytest.approx(0.05)
        assert run.scheme == 'FD4'


class TestEvolve:
    """Test the method-of-lines integrator."""

    def test_free_pulse_splits(self):
        """Test that a time-symmetric pulse splits into two halves travelling at unit speed."""
        result = evolve(_short_run(FREE))
        i = int(np.argmin(np.abs(result.times - 20.0)))
        assert result.series[30.0][i] == pytest.approx(0.5, abs=1e-3)
        assert result.series[30.0][0] == pytest.approx(np.exp(-200 / 9), abs=1e-9)

    def test_energy_does_not_grow(self):
        """Test that the Zerilli energy stays bounded."""
        messages = []
        result = evolve(_short_run(ZERILLI), progress_callback=messages.append)
        assert len(result.energy) == result.steps // 5
        assert not energy_monitor(result)['growing']
        assert messages

    def test_rows(self):
        """Test the (t, Re, Im) rows of an observer."""
        result = evolve(_short_run(FREE, duration=1.0))
        rows = result.to_rows(30.0)
        assert len(rows) == result.steps + 1
        assert rows[0][0] == 0.0
        assert rows[0][2] == 0.0

    def test_blow_up_reported_without_energy_sampling(self):
        """Test that a non-finite field raises even when energy is never sampled."""
        def poisoned(x):
            phi = np.exp(-x ** 2)
            phi[np.argmin(np.abs(x + 40.0))] = np.nan
            return phi, np.zeros_like(x)

        run = _short_run(FREE, duration=1.0, energy_every=10 ** 9, initial_data=poisoned)
        with pytest.raises(ConvergenceError, match='non-finite field at t=0.05'):
            evolve(run)

    def test_blow_up_stops_refinement(self):
        """Test that the convergence study propagates a blow-up."""
        def overflowing(x):
            return np.full_like(x, np.inf), np.zeros_like(x)

        with pytest.raises(ConvergenceError):
            convergence_order(_short_run(FREE, duration=1.0, initial_data=overflowing))

    @pytest.mark.slow
    def test_second_order_convergence(self):
        """Test the self-convergence order of the FD2 scheme."""
        run = _short_run(FREE, h=0.4, duration=10.0)
        assert convergence_order(run) > 1.5


class TestEnergyMonitor:
    """Test energy drift bookkeeping."""

    def test_decreasing(self):
        """Test a monotone decrease."""
        report = energy_monitor(_synthetic_result([4.0, 3.0, 2.0, 1.0]))
        assert report['monotone']
        assert not report['growing']
        assert report['drift'] == pytest.approx(-0.75 * 1000 * 0.05 / 3)

    def test_increasing(self):
        """Test that growth is flagged."""
        report = energy_monitor(_synthetic_result([1.0, 2.0]))
        assert report['growing']
        assert not report['monotone']

    def test_too_short(self):
        """Test that one energy sample is not enough."""
        with pytest.raises(DomainError):
            energy_monitor(_synthetic_result([1.0]))


class TestTailFit:
    """Test late-time power-law fits."""

    def test_power_law(self):
        """Test the exponent of t^-3."""
        t = np.linspace(100.0, 1000.0, 500)
        fit = fit_tail(t, t ** -3.0, (200.0, 900.0))
        assert fit.power == pytest.approx(-3.0, abs=1e-8)
        assert fit.local_index[1:-1] == pytest.approx(-3.0, abs=1e-3)
        assert fit.in_tail

    def test_oscillation_flagged(self):
        """Test that sign changes mark the window as oscillation-dominated."""
        t = np.linspace(100.0, 1000.0, 500)
        fit = fit_tail(t, np.cos(t) * t ** -3.0, (200.0, 900.0))
        assert not fit.in_tail

    def test_window_too_small(self):
        """Test that a window needs five samples."""
        t = np.linspace(100.0, 1000.0, 10)
        with pytest.raises(DomainError):
            fit_tail(t, t ** -3.0, (100.0, 150.0))


class TestRingdown:
    """Test damped-sinusoid extraction."""

    def test_matrix_pencil_pair(self):
        """Test the two frequencies of a damped cosine."""
        dt = 0.1
        t = dt * np.arange(200)
        sigmas = matrix_pencil(np.exp(-0.1 * t) * np.cos(0.5 * t), dt, 2)
        assert sorted(sigmas, key=lambda s: s.real) == pytest.approx([-0.5 - 0.1j, 0.5 - 0.1j], abs=1e-8)

    def test_matrix_pencil_too_few_samples(self):
        """Test the sample count check."""
        with pytest.raises(DomainError):
            matrix_pencil(np.ones(4), 0.1, 3)

    def test_ringdown_fit(self):
        """Test recovery of a fundamental-mode-like signal."""
        t = np.arange(0.0, 100.0, 0.05)
        phi = 3.0 * np.exp(-0.088962 * t) * np.cos(0.373672 * t + 1.0)
        sigma = ringdown_fit(t, phi, (10.0, 90.0))
        assert sigma.real == pytest.approx(0.373672, abs=1e-5)
        assert sigma.imag == pytest.approx(-0.088962, abs=1e-5)

    def test_short_window(self):
        """Test that a ringdown window needs eight samples."""
        t = np.arange(0.0, 10.0, 0.05)
        with pytest.raises(DomainError):
            ringdown_fit(t, np.cos(t), (1.0, 2.0))


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
