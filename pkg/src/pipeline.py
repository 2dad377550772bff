"""Main stability-toolkit orchestrator: runs one workflow per session and writes its reports."""

import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .background import BlackHoleParams
from .config import RunConfig, dump_config, output_root, validate_config
from .errors import ConfigError, DomainError, SectorError
from .evolution import EvolutionRun, energy_monitor, evolve, convergence_order, fit_tail, ringdown_fit
from .hooks.acceptance_guard import get_acceptance_hooks
from .master import MasterProblem, dump_potential
from .pairings import all_constants, dual_kernel_residual
from .radial_ops import grid
from .spectral import find_root, scan_upper_half_plane, track_cd_root
from .tools.finite_diff import SCHEME_ORDERS
from .tools.leaver import leaver_frequency
from .zero_modes import Growth, KerrEntry, catalog, verify_generalized, verify_pointwise_kerr, verify_stationary

# errors the CLI reports as usage problems rather than computational failures
USAGE_ERRORS = (ConfigError, DomainError, SectorError)

KERR_POINTS = ((3.0, np.pi / 3), (5.0, np.pi / 2), (10.0, 2 * np.pi / 5))


def write_json(data: Dict, path: Path) -> Path:
    """Write a report with sorted keys so identical runs give identical files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def write_csv(header: List[str], rows, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{x:.12e}" if isinstance(x, float) else x for x in row])
    return path


class StabilityPipeline:
    """Orchestrates the toolkit workflows (potential, scan, qnm, cd-track, evolve, verify, pairings)."""

    def __init__(self, base_dir: Optional[str] = None, workers: Optional[int] = None):
        """
        Initialize the pipeline.

        Args:
            base_dir: Root for session directories (default BHSTAB_OUTPUT_DIR or the repository root)
            workers: Worker-pool size for scans (default BHSTAB_WORKERS or the CPU count)
        """
        self.base_dir = Path(base_dir) if base_dir else output_root()
        self.workers = workers
        self.hooks = get_acceptance_hooks()

        # Set up logging
        logging.basicConfig(
            level=logging.INFO,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        self.logger = logging.getLogger(__name__)

        self.workflows: Dict[str, Callable] = {
            'potential': self.run_potential,
            'scan': self.run_scan,
            'qnm': self.run_qnm,
            'cd-track': self.run_cd_track,
            'evolve': self.run_evolve,
            'verify': self.run_verify,
            'pairings': self.run_pairings,
        }

    def _setup_directories(self, kind: str, session_id: str) -> Dict[str, str]:
        """
        Create the session directory data/<kind>/<session_id>.

        Args:
            kind: Workflow name
            session_id: Unique session identifier (timestamp-based)

        Returns:
            Dictionary with directory paths
        """
        dirs = {'output': str(self.base_dir / 'data' / kind / session_id)}
        for dir_path in dirs.values():
            Path(dir_path).mkdir(parents=True, exist_ok=True)
        return dirs

    def run(self, config: RunConfig, progress_callback: Optional[Callable[[str], None]] = None,
            session_id: Optional[str] = None) -> Dict:
        """
        Run the workflow named by config.command.

        Args:
            config: Validated run configuration
            progress_callback: Optional callback for progress updates
            session_id: Override of the timestamp session id

        Returns:
            Dictionary with 'success', 'passed', 'report', 'violations' and output paths
        """
        kind = config.command
        session_id = session_id or datetime.now().strftime('%Y%m%d_%H%M%S')
        self.logger.info(f"Starting {kind} session: {session_id}")
        dirs = {}

        try:
            validate_config(config)
            dirs = self._setup_directories(kind, session_id)

            # Phase 1: compute
            self.logger.info(f"Phase 1: Running {kind}...")
            report, files = self.workflows[kind](config, dirs, progress_callback)

            # Phase 2: acceptance guards
            self.logger.info("Phase 2: Checking acceptance thresholds...")
            violations = []
            for hook in self.hooks['postCompute']:
                decision = hook(kind, report)
                if not decision['allow']:
                    violations.append(decision['message'])
            passed = not violations
            if passed:
                self.logger.info(f"✓ {kind} passed")
            else:
                for message in violations:
                    self.logger.warning(f"✗ {message}")

            # Phase 3: write outputs
            self.logger.info("Phase 3: Writing reports...")
            report = {'kind': kind, 'passed': passed, **report}
            files['report.json'] = str(write_json(report, Path(dirs['output']) / 'report.json'))
            files['config.json'] = str(Path(dirs['output']) / 'config.json')
            Path(files['config.json']).write_text(dump_config(config))
            for name, path in files.items():
                self.logger.info(f"✓ Generated: {name}")

            return {
                'success': True,
                'passed': passed,
                'session_id': session_id,
                'kind': kind,
                'report': report,
                'violations': violations,
                'output_dir': dirs['output'],
                'output_files': files,
            }

        except Exception as e:
            self.logger.error(f"{kind} failed: {str(e)}")
            return {
                'success': False,
                'passed': False,
                'session_id': session_id,
                'kind': kind,
                'error': str(e),
                'usage_error': isinstance(e, USAGE_ERRORS),
                'output_dir': dirs.get('output'),
            }

    # ---- workflows ----

    def _problem(self, parity: str, l: int, mass: float) -> MasterProblem:
        if parity == 'control':
            return MasterProblem.poschl_teller(mass)
        return MasterProblem.from_parity(parity, l, mass)

    def run_potential(self, config: RunConfig, dirs: Dict, progress_callback=None):
        cfg, mass = config.potential, config.background.mass
        problem = self._problem(cfg.parity, cfg.l, mass)
        params = BlackHoleParams(mass)
        r = grid(params, cfg.points, r_max=cfg.r_max * mass)
        path = Path(cfg.out) if cfg.out else Path(dirs['output']) / 'potential.csv'
        dump_potential(problem, r, path)
        v = problem.potential(r)
        peak = int(np.argmax(v))
        report = {
            'problem': problem.describe(),
            'points': len(r),
            'r_peak': float(r[peak]),
            'v_peak': float(v[peak]),
        }
        return report, {'potential.csv': str(path)}

    def run_scan(self, config: RunConfig, dirs: Dict, progress_callback=None):
        cfg, mass = config.scan, config.background.mass
        problem = self._problem(cfg.parity, cfg.l, mass)
        scan = scan_upper_half_plane(problem, (cfg.re_min, cfg.re_max), (cfg.im_min, cfg.im_max),
                                     step=cfg.step, exclusion=cfg.exclusion, threshold=cfg.threshold,
                                     workers=self.workers, progress_callback=progress_callback)
        path = Path(cfg.out) if cfg.out else Path(dirs['output']) / 'scan.csv'
        rows = [(float(s.real), float(s.imag), float(v)) for s, v in scan.samples]
        write_csv(['re_sigma', 'im_sigma', 'normalized_wronskian'], rows, path)
        return scan.to_dict(), {'scan.csv': str(path)}

    def run_qnm(self, config: RunConfig, dirs: Dict, progress_callback=None):
        cfg, mass = config.qnm, config.background.mass
        problem = self._problem(cfg.parity, cfg.l, mass)
        root = find_root(problem, complex(cfg.sigma_re, cfg.sigma_im), cfg.tolerance, cfg.max_iter)
        if progress_callback:
            progress_callback(f"🎯 Root {root.sigma:.10f} after {root.iterations} iterations")

        # Zerilli and Regge-Wheeler potentials share their spectrum
        oracle = leaver_frequency(cfg.l, 2, 0, mass, guess=root.sigma)
        report = {
            'problem': problem.describe(),
            'sigma': [root.sigma.real, root.sigma.imag],
            'iterations': root.iterations,
            'oracle': [oracle.real, oracle.imag],
        }
        return report, {}

    def run_cd_track(self, config: RunConfig, dirs: Dict, progress_callback=None):
        cfg, mass = config.cd_track, config.background.mass
        gammas = np.geomspace(cfg.gamma_min, cfg.gamma_max, cfg.gamma_points)
        track = track_cd_root(cfg.v, gammas, mass, cfg.points, cfg.r_max, progress_callback)
        return track.to_dict(), {}

    def run_evolve(self, config: RunConfig, dirs: Dict, progress_callback=None):
        cfg, mass = config.evolve, config.background.mass
        problem = self._problem(cfg.parity, cfg.l, mass)
        run = EvolutionRun(problem, cfg.rstar_min * mass, cfg.rstar_max * mass, cfg.h, cfg.cfl,
                           cfg.duration * mass, cfg.pulse_center * mass, cfg.pulse_width * mass,
                           [x * mass for x in cfg.observers], cfg.order)
        if cfg.tail_window[1] * mass > run.reflection_free_until():
            self.logger.warning(f"tail window ends after t = {run.reflection_free_until():.0f}, "
                                "when boundary signals can reach the observer")
        result = evolve(run, progress_callback)

        observer = run.observers[0]
        phi = result.series[observer]
        tail = fit_tail(result.times, phi, tuple(x * mass for x in cfg.tail_window))
        ringdown = ringdown_fit(result.times, phi, tuple(x * mass for x in cfg.ringdown_window))
        qnm = leaver_frequency(cfg.l, 2, 0, mass)
        energy = energy_monitor(result, start=cfg.ringdown_window[0] * mass)

        report = {
            'problem': problem.describe(),
            'observer': observer,
            'steps': result.steps,
            'tail': {'power': tail.power, 'uncertainty': tail.uncertainty, 'in_tail': tail.in_tail},
            'ringdown': [ringdown.real, ringdown.imag],
            'qnm': [qnm.real, qnm.imag],
            'energy_drift': energy['drift'],
            'energy_growing': energy['growing'],
            'nominal_order': cfg.order,
            'convergence_order': None,
        }
        if cfg.convergence:
            self.logger.info("Running self-convergence levels...")
            report['convergence_order'] = convergence_order(run, observer)

        files = {}
        for obs in run.observers:
            name = f"series_rstar_{obs:g}.csv"
            path = Path(dirs['output']) / name
            write_csv(['t', 're_phi', 'im_phi'], result.to_rows(obs), path)
            files[name] = str(path)
        if cfg.out:
            write_csv(['t', 're_phi', 'im_phi'], result.to_rows(observer), Path(cfg.out))
            files['out'] = cfg.out
        return report, files

    def run_verify(self, config: RunConfig, dirs: Dict, progress_callback=None):
        cfg = config.verify
        params = BlackHoleParams(config.background.mass, config.background.spin)
        entries = catalog(params)
        if cfg.entries:
            names = {e.name for e in entries}
            unknown = [n for n in cfg.entries if n not in names]
            if unknown:
                raise ConfigError(f"unknown catalog entries: {', '.join(unknown)}")
            entries = [e for e in entries if e.name in cfg.entries]

        rows = []
        for i, entry_ in enumerate(entries, 1):
            if progress_callback:
                progress_callback(f"🔬 [{i}/{len(entries)}] {entry_.name}")
            if isinstance(entry_, KerrEntry):
                points = [(r * params.mass, theta) for r, theta in KERR_POINTS]
                rows.append(verify_pointwise_kerr(entry_, points))
            elif entry_.growth == Growth.LINEAR_IN_T:
                rows.append(verify_generalized(entry_, params, cfg.gamma, cfg.v, cfg.scheme, cfg.points))
            else:
                row = verify_stationary(entry_, params, gamma=cfg.gamma, v=cfg.v, scheme=cfg.scheme,
                                        points=cfg.points)
                if entry_.dual:
                    row['dual_residual'] = dual_kernel_residual(entry_, params)
                row['nominal_order'] = SCHEME_ORDERS.get(cfg.scheme)
                rows.append(row)
        return {'scheme': cfg.scheme, 'rows': rows}, {}

    def run_pairings(self, config: RunConfig, dirs: Dict, progress_callback=None):
        cfg = config.pairings
        results = all_constants(config.background.mass, cfg.v_values, progress_callback)
        return {'tolerance': cfg.tolerance, 'rows': [r.to_dict() for r in results]}, {}
