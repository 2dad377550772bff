"""Run configuration: per-command parameter records, JSON loading and validation."""

import json
import os
import re
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path
from typing import Dict, List, Optional

from .errors import ConfigError

CONFIG_VERSION = "1"

COMMANDS = ('potential', 'scan', 'qnm', 'cd-track', 'evolve', 'verify', 'pairings')
PARITIES = ('scalar', 'vector')


@dataclass
class BackgroundConfig:
    mass: float = 1.0
    spin: float = 0.0


@dataclass
class PotentialConfig:
    parity: str = 'scalar'
    l: int = 2
    r_max: float = 50.0
    points: int = 400
    out: Optional[str] = None


@dataclass
class ScanConfig:
    parity: str = 'scalar'
    l: int = 2
    re_min: float = -2.0
    re_max: float = 2.0
    im_min: float = 0.0
    im_max: float = 1.0
    step: float = 0.05
    exclusion: float = 0.05
    threshold: float = 1e-3
    out: Optional[str] = None


@dataclass
class QNMConfig:
    parity: str = 'scalar'
    l: int = 2
    sigma_re: float = 0.37
    sigma_im: float = -0.09
    tolerance: float = 1e-10
    max_iter: int = 100


@dataclass
class CDTrackConfig:
    v: float = 2.0
    gamma_min: float = 1e-4
    gamma_max: float = 1e-2
    gamma_points: int = 8
    points: int = 240
    r_max: float = 20.0


@dataclass
class EvolveConfig:
    parity: str = 'scalar'
    l: int = 2
    rstar_min: float = -300.0
    rstar_max: float = 2300.0
    h: float = 0.1
    cfl: float = 0.5
    duration: float = 2000.0
    pulse_center: float = 10.0
    pulse_width: float = 3.0
    observers: List[float] = field(default_factory=lambda: [50.0])
    order: int = 2
    tail_window: List[float] = field(default_factory=lambda: [500.0, 2000.0])
    ringdown_window: List[float] = field(default_factory=lambda: [80.0, 160.0])
    convergence: bool = False
    out: Optional[str] = None


@dataclass
class VerifyConfig:
    entries: List[str] = field(default_factory=list)
    scheme: str = 'ClosedFormDiff'
    points: int = 200
    gamma: float = 0.0
    v: float = 2.0


@dataclass
class PairingsConfig:
    v_values: List[float] = field(default_factory=lambda: [1.5, 2.0, 3.0])
    tolerance: float = 1e-5


SECTIONS = {
    'background': BackgroundConfig,
    'potential': PotentialConfig,
    'scan': ScanConfig,
    'qnm': QNMConfig,
    'cd_track': CDTrackConfig,
    'evolve': EvolveConfig,
    'verify': VerifyConfig,
    'pairings': PairingsConfig,
}


@dataclass
class RunConfig:
    command: str = 'pairings'
    version: str = CONFIG_VERSION
    background: BackgroundConfig = field(default_factory=BackgroundConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    qnm: QNMConfig = field(default_factory=QNMConfig)
    cd_track: CDTrackConfig = field(default_factory=CDTrackConfig)
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    pairings: PairingsConfig = field(default_factory=PairingsConfig)


def _line_of(text: str, key: str) -> Optional[int]:
    """Return the 1-based line on which a JSON key first appears."""
    match = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if not match:
        return None
    return text.count('\n', 0, match.start()) + 1


def _build_section(cls, data: Dict, text: str, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section '{prefix}' must be an object", _line_of(text, prefix))
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key '{prefix}.{key}'", _line_of(text, key))
    return cls(**data)


def validate_config(config: RunConfig) -> RunConfig:
    """
    Re-check the physical invariants of a configuration.

    Args:
        config: Parsed configuration

    Returns:
        The same configuration

    Raises:
        ConfigError: On any violated invariant
    """
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command '{config.command}'")
    if config.version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version '{config.version}'")

    bg = config.background
    if bg.mass <= 0:
        raise ConfigError(f"mass must be positive, got {bg.mass}")
    if bg.spin < 0 or bg.spin >= bg.mass:
        raise ConfigError(f"spin must satisfy 0 <= spin < mass, got spin={bg.spin}, mass={bg.mass}")

    for name in ('potential', 'scan', 'qnm', 'evolve'):
        section = getattr(config, name)
        allowed = PARITIES + ('control',) if name == 'scan' else PARITIES
        if section.parity not in allowed:
            raise ConfigError(f"{name}.parity must be one of {allowed}")
        if section.l < 2:
            raise ConfigError(f"{name}.l must be at least 2 for master equations")

    if config.scan.step <= 0 or config.scan.exclusion <= 0:
        raise ConfigError("scan.step and scan.exclusion must be positive")
    if config.cd_track.v <= 1:
        raise ConfigError("cd_track.v must exceed 1")
    if not 0 < config.cd_track.gamma_min < config.cd_track.gamma_max:
        raise ConfigError("cd_track requires 0 < gamma_min < gamma_max")
    if config.evolve.cfl > 0.9 or config.evolve.cfl <= 0:
        raise ConfigError("evolve.cfl must lie in (0, 0.9]")
    if config.evolve.order not in (2, 4):
        raise ConfigError("evolve.order must be 2 or 4")
    for key in ("tail_window", "ringdown_window"):
        window = getattr(config.evolve, key)
        if len(window) != 2 or not 0 <= window[0] < window[1]:
            raise ConfigError(f"evolve.{key} must be an increasing pair of times")
    if config.verify.scheme not in ('FD2', 'FD4', 'ClosedFormDiff'):
        raise ConfigError("verify.scheme must be FD2, FD4 or ClosedFormDiff")
    return config


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg}", e.lineno)

    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")

    kwargs = {}
    for key, value in data.items():
        if key in SECTIONS:
            kwargs[key] = _build_section(SECTIONS[key], value, text, key)
        elif key in ('command', 'version'):
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown key '{key}'", _line_of(text, key))

    return validate_config(RunConfig(**kwargs))


def load_config(path: str) -> RunConfig:
    """
    Load a RunConfig from a JSON file.

    Args:
        path: Path to the JSON document

    Returns:
        Validated RunConfig with defaults filled in
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config '{path}': {e}")
    return parse_config(text)


def dump_config(config: RunConfig) -> str:
    """Serialize a RunConfig to JSON text with a stable key order."""
    return json.dumps(asdict(config), indent=2, sort_keys=True)


def emit_defaults(command: str = 'pairings') -> str:
    """Return the default configuration for a command as JSON text."""
    return dump_config(validate_config(RunConfig(command=command)))


def worker_count() -> int:
    """Worker-pool size from BHSTAB_WORKERS, defaulting to the CPU count."""
    value = os.getenv('BHSTAB_WORKERS')
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ConfigError(f"BHSTAB_WORKERS must be an integer, got '{value}'")
    return os.cpu_count() or 1


def output_root() -> Path:
    """Base directory for session outputs (BHSTAB_OUTPUT_DIR or the repository root)."""
    value = os.getenv('BHSTAB_OUTPUT_DIR')
    if value:
        return Path(value)
    return Path(__file__).parent.parent
