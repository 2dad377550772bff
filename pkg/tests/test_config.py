"""Unit tests for run configuration loading and validation."""

import json

import pytest

from src.config import (
    CONFIG_VERSION, RunConfig, emit_defaults, load_config, output_root, parse_config,
    validate_config, worker_count,
)
from src.errors import ConfigError, ConvergenceError, DomainError, SingularPairingError


class TestParseConfig:
    """Test JSON parsing."""

    def test_minimal_config_fills_defaults(self):
        """Test that a minimal document gets every default."""
        config = parse_config('{"command": "scan"}')
        assert config.command == 'scan'
        assert config.version == CONFIG_VERSION
        assert config.scan.step == 0.05
        assert config.pairings.v_values == [1.5, 2.0, 3.0]

    def test_section_override(self):
        """Test that section values override defaults."""
        config = parse_config('{"command": "qnm", "qnm": {"l": 3, "parity": "vector"}}')
        assert config.qnm.l == 3
        assert config.qnm.parity == 'vector'
        assert config.qnm.tolerance == 1e-10

    def test_unknown_key_has_line(self):
        """Test that an unknown key is rejected with its line."""
        text = '{\n  "command": "scan",\n  "scan": {\n    "stepp": 0.1\n  }\n}'
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.line == 4
        assert 'stepp' in str(exc.value)

    def test_unknown_top_level_key(self):
        """Test that an unknown section is rejected."""
        with pytest.raises(ConfigError):
            parse_config('{"command": "scan", "plot": {}}')

    def test_invalid_json(self):
        """Test that malformed JSON reports its line."""
        with pytest.raises(ConfigError) as exc:
            parse_config('{\n  "command": \n}')
        assert exc.value.line is not None

    def test_superextremal_spin(self):
        """Test that spin >= mass is rejected."""
        with pytest.raises(ConfigError, match='spin'):
            parse_config('{"command": "verify", "background": {"mass": 1.0, "spin": 1.0}}')

    def test_master_equation_needs_l2(self):
        """Test that l = 1 is rejected for master-equation commands."""
        with pytest.raises(ConfigError):
            parse_config('{"command": "qnm", "qnm": {"l": 1}}')

    def test_control_parity_only_for_scan(self):
        """Test that the control potential is a scan-only option."""
        parse_config('{"command": "scan", "scan": {"parity": "control"}}')
        with pytest.raises(ConfigError):
            parse_config('{"command": "qnm", "qnm": {"parity": "control"}}')

    def test_wrong_version(self):
        """Test that another format version is rejected."""
        with pytest.raises(ConfigError, match='version'):
            parse_config('{"command": "scan", "version": "0"}')


class TestValidation:
    """Test physical invariant checks."""

    def test_cd_velocity(self):
        """Test that v <= 1 is rejected."""
        config = RunConfig(command='cd-track')
        config.cd_track.v = 1.0
        with pytest.raises(ConfigError):
            validate_config(config)

    def test_cfl_limit(self):
        """Test that CFL above 0.9 is rejected."""
        config = RunConfig(command='evolve')
        config.evolve.cfl = 1.0
        with pytest.raises(ConfigError):
            validate_config(config)

    def test_tail_window_order(self):
        """Test that a reversed tail window is rejected."""
        config = RunConfig(command='evolve')
        config.evolve.tail_window = [2000.0, 500.0]
        with pytest.raises(ConfigError):
            validate_config(config)

    def test_unknown_command(self):
        """Test that an unknown command is rejected."""
        with pytest.raises(ConfigError):
            validate_config(RunConfig(command='plot'))


class TestRoundTrip:
    """Test defaults emission and file loading."""

    @pytest.mark.parametrize('command', ['pairings', 'scan', 'evolve'])
    def test_emit_then_load(self, command, tmp_path):
        """Test that emitted defaults load back to the same RunConfig."""
        path = tmp_path / 'config.json'
        path.write_text(emit_defaults(command))
        assert load_config(str(path)) == RunConfig(command=command)

    def test_emitted_json_is_sorted(self):
        """Test that emitted defaults have a stable key order."""
        data = json.loads(emit_defaults('scan'))
        assert list(data) == sorted(data)

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file is a configuration error."""
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / 'absent.json'))


class TestEnvironment:
    """Test environment-driven settings."""

    def test_worker_count(self, monkeypatch):
        """Test BHSTAB_WORKERS."""
        monkeypatch.setenv('BHSTAB_WORKERS', '3')
        assert worker_count() == 3
        monkeypatch.setenv('BHSTAB_WORKERS', 'many')
        with pytest.raises(ConfigError):
            worker_count()

    def test_output_root(self, monkeypatch, tmp_path):
        """Test BHSTAB_OUTPUT_DIR."""
        monkeypatch.setenv('BHSTAB_OUTPUT_DIR', str(tmp_path))
        assert output_root() == tmp_path


class TestErrors:
    """Test the exception hierarchy."""

    def test_hierarchy(self):
        """Test base classes used by callers."""
        assert issubclass(DomainError, ValueError)
        assert issubclass(ConfigError, ValueError)
        assert issubclass(SingularPairingError, ConvergenceError)
        assert issubclass(ConvergenceError, RuntimeError)

    def test_convergence_history(self):
        """Test that iterates are kept."""
        err = ConvergenceError("no root", [1.0, 2.0])
        assert err.history == [1.0, 2.0]

    def test_config_line_prefix(self):
        """Test that the line is prefixed to the message."""
        assert str(ConfigError("bad key", 7)) == "line 7: bad key"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
