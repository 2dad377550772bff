"""Unit tests for the acceptance guard and the stability pipeline."""

import json
import os
from pathlib import Path

import pytest

from src.config import RunConfig
from src.hooks.acceptance_guard import acceptance_guard_hook, check_report, get_acceptance_hooks
from src.pipeline import StabilityPipeline, write_csv, write_json


class TestAcceptanceGuard:
    """Test acceptance thresholds on computed reports."""

    def test_pairings(self):
        """Test relative and absolute pairing tolerances."""
        rows = [
            {'name': 's0_time', 'computed': 2.0 + 1e-6, 'expected': 2.0},
            {'name': 's0_quadratic', 'computed': 1e-7, 'expected': 0.0},
        ]
        assert check_report({'kind': 'pairings', 'rows': rows}) == []
        rows[1]['computed'] = 1e-4
        violations = check_report({'kind': 'pairings', 'rows': rows})
        assert len(violations) == 1
        assert 's0_quadratic' in violations[0]

    def test_complex_pairing(self):
        """Test that complex computed values are compared with their imaginary part."""
        rows = [{'name': 'v1', 'computed': [1.0, 0.5], 'expected': 1.0}]
        assert len(check_report({'kind': 'pairings', 'rows': rows})) == 1

    def test_verify_rows(self):
        """Test closed-form, Kerr and finite-difference rows."""
        rows = [
            {'entry': 'u_s0', 'operator': 'box', 'scheme': 'ClosedFormDiff', 'residual': 1e-12},
            {'entry': 'omega0_1', 'operator': 'box_kerr', 'scheme': 'FD4-pointwise', 'residual': 1e-9},
            {'entry': 'h_hat_s0', 'operator': 'gauge_fixed', 'scheme': 'ClosedFormDiff',
             'residual': 1e-7, 'residual_linear': 1e-12},
            {'entry': 'omega_s0', 'operator': 'constraint_prop', 'scheme': 'FD4',
             'residual': 1e-5, 'order_estimate': 3.9, 'nominal_order': 4},
        ]
        assert check_report({'kind': 'verify', 'rows': rows}) == []
        rows[0]['residual'] = 1e-7
        rows[3]['order_estimate'] = 2.0
        assert len(check_report({'kind': 'verify', 'rows': rows})) == 2

    def test_dual_kernel_row(self):
        """Test that a dual state failing the adjoint kernel check is reported for any scheme."""
        row = {'entry': 'h_v1_dual', 'operator': 'gauge_fixed', 'scheme': 'FD4', 'residual': 1e-5,
               'order_estimate': None, 'nominal_order': 4, 'dual_residual': 1e-12}
        assert check_report({'kind': 'verify', 'rows': [row]}) == []
        row['dual_residual'] = 1e-3
        violations = check_report({'kind': 'verify', 'rows': [row]})
        assert len(violations) == 1
        assert 'adjoint kernel' in violations[0]

    def test_failed_scan(self):
        """Test that a failed scan names the candidate mode."""
        report = {'kind': 'scan', 'passed': False, 'problem': 'poschl-teller-10',
                  'min_normalized_wronskian': 1e-9, 'threshold': 1e-3, 'mode': [0.0, 0.7]}
        violations = check_report(report)
        assert len(violations) == 1
        assert 'candidate mode' in violations[0]

    def test_qnm(self):
        """Test oracle agreement and damping of a quasinormal frequency."""
        good = {'kind': 'qnm', 'sigma': [0.3736717, -0.0889623], 'oracle': [0.3736717, -0.0889623]}
        assert check_report(good) == []
        assert len(check_report({**good, 'oracle': [0.38, -0.0889623]})) == 1
        assert len(check_report({'kind': 'qnm', 'sigma': [0.5, 0.1]})) == 1

    def test_cd_track(self):
        """Test damping and slope agreement."""
        report = {'kind': 'cd-track', 'all_damped': True, 'slope': [0.0, -1.95], 'predicted_slope': [0.0, -2.0]}
        assert check_report(report) == []
        assert len(check_report({**report, 'slope': [0.0, -1.5]})) == 1
        assert len(check_report({**report, 'all_damped': False})) == 1

    def test_evolve(self):
        """Test tail, convergence, ringdown and energy checks."""
        report = {'kind': 'evolve', 'tail': {'power': -3.1}, 'convergence_order': 1.95, 'nominal_order': 2,
                  'ringdown': [0.3740, -0.0890], 'qnm': [0.373672, -0.088962], 'energy_growing': False}
        assert check_report(report) == []
        bad = {**report, 'tail': {'power': -1.0}, 'convergence_order': 1.5,
               'ringdown': [0.40, -0.0890], 'energy_growing': True}
        assert len(check_report(bad)) == 4

    def test_missing_kind(self):
        """Test that a report without a kind is rejected."""
        assert check_report({}) == ["report has no 'kind'"]

    def test_hook(self):
        """Test hook decisions and the hook table."""
        assert acceptance_guard_hook('potential', {})['allow']
        decision = acceptance_guard_hook('qnm', {'sigma': [0.5, 0.1]})
        assert not decision['allow']
        assert decision['message'].startswith('ACCEPTANCE VIOLATIONS')
        hooks = get_acceptance_hooks()
        assert hooks['postCompute'] == [acceptance_guard_hook]
        assert hooks['preWrite'] == []


class TestWriters:
    """Test report writers."""

    def test_json_sorted(self, tmp_path):
        """Test sorted keys and a trailing newline."""
        path = write_json({'b': 1, 'a': 2}, tmp_path / 'out' / 'r.json')
        text = path.read_text()
        assert text.endswith('\n')
        assert list(json.loads(text)) == ['a', 'b']

    def test_csv_floats(self, tmp_path):
        """Test that floats are written in scientific notation."""
        path = write_csv(['x', 'y'], [(1.0, 'a')], tmp_path / 'r.csv')
        assert path.read_text().splitlines() == ['x,y', '1.000000000000e+00,a']


class TestStabilityPipeline:
    """Test end-to-end sessions."""

    def test_potential_session(self, tmp_path):
        """Test the potential workflow and the session layout."""
        pipeline = StabilityPipeline(base_dir=str(tmp_path), workers=1)
        config = RunConfig(command='potential')
        config.potential.points = 200
        result = pipeline.run(config, session_id='20260101_000000')
        assert result['success']
        assert result['passed']
        out = Path(result['output_dir'])
        assert out == tmp_path / 'data' / 'potential' / '20260101_000000'
        assert (out / 'potential.csv').exists()
        report = json.loads((out / 'report.json').read_text())
        assert report['kind'] == 'potential'
        assert 2.8 < report['r_peak'] < 3.3
        assert json.loads((out / 'config.json').read_text())['command'] == 'potential'

    def test_qnm_session(self, tmp_path):
        """Test that the computed root agrees with the continued fraction."""
        messages = []
        pipeline = StabilityPipeline(base_dir=str(tmp_path), workers=1)
        result = pipeline.run(RunConfig(command='qnm'), progress_callback=messages.append)
        assert result['success']
        assert result['passed'], result['violations']
        assert result['report']['sigma'][1] < 0
        assert messages

    def test_verify_session(self, tmp_path):
        """Test a verify run restricted to the scalar modes."""
        config = RunConfig(command='verify')
        config.verify.entries = ['u_s0', 'u_s1']
        result = StabilityPipeline(base_dir=str(tmp_path), workers=1).run(config)
        assert result['passed']
        assert [row['entry'] for row in result['report']['rows']] == ['u_s0', 'u_s1']

    def test_unknown_entry_is_usage_error(self, tmp_path):
        """Test that an unknown catalog name is reported as a usage error."""
        config = RunConfig(command='verify')
        config.verify.entries = ['nope']
        result = StabilityPipeline(base_dir=str(tmp_path), workers=1).run(config)
        assert not result['success']
        assert result['usage_error']
        assert 'nope' in result['error']

    def test_invalid_config_is_usage_error(self, tmp_path):
        """Test that validation failures do not create a session directory."""
        config = RunConfig(command='evolve')
        config.evolve.cfl = 2.0
        result = StabilityPipeline(base_dir=str(tmp_path), workers=1).run(config)
        assert not result['success']
        assert result['usage_error']
        assert result['output_dir'] is None

    @pytest.mark.slow
    @pytest.mark.skipif(
        not os.getenv('BHSTAB_WORKERS'),
        reason="Requires BHSTAB_WORKERS for the process pool"
    )
    def test_parallel_scan(self, tmp_path):
        """Test a scan through the worker pool."""
        config = RunConfig(command='scan')
        config.scan.re_min, config.scan.re_max = -0.5, 0.5
        config.scan.im_max = 0.5
        config.scan.step = 0.25
        result = StabilityPipeline(base_dir=str(tmp_path)).run(config)
        assert result['passed']
        assert Path(result['output_files']['scan.csv']).exists()


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
