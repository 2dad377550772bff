"""
Frequency-domain boundary-value machinery for the radial master equations.

Solutions are normalized by boundary series: Psi_h ~ exp(-i sigma r_*) at the horizon and
Psi_inf ~ exp(+i sigma r_*) at infinity, with time dependence exp(-i sigma t).
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy import linalg
from scipy.integrate import solve_ivp

from .background import BlackHoleParams, tortoise
from .config import worker_count
from .errors import ConvergenceError, DomainError
from .harmonics import scalar
from .master import MasterKind, MasterProblem
from .radial_ops import constraint_prop, gauge_fixed
from .tools.covariant import R
from .tools.finite_diff import diff_matrices

logger = logging.getLogger(__name__)

RTOL = 1e-12
HORIZON_OFFSET = 1e-4


class SeriesLocation(Enum):
    HORIZON = 'Horizon'
    INFINITY = 'Infinity'


class Classification(Enum):
    NO_MODE = 'NoMode'
    MODE_CANDIDATE = 'ModeCandidate'


@dataclass(frozen=True)
class BoundarySeries:
    """
    Psi = exp(-+ i sigma (r_* - r_*ref)) sum_n c_n s^n with s = r - 2m (horizon) or 1/r (infinity).

    At zero frequency the infinity branch is the decaying power law (r / r_ref)^lam.
    """

    location: SeriesLocation
    sigma: complex
    mass: float
    coefficients: np.ndarray
    r_ref: float
    lam: Optional[float] = None
    truncation: float = 0.0

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, r: float) -> Tuple[complex, complex]:
        """(Psi, dPsi/dr_*) at r."""
        m = self.mass
        mu = 1 - 2 * m / r
        params = BlackHoleParams(m)
        if self.location == SeriesLocation.INFINITY and self.lam is not None:
            psi = (r / self.r_ref) ** self.lam
            return complex(psi), complex(mu * self.lam * psi / r)
        c = self.coefficients
        n = np.arange(len(c))
        if self.location == SeriesLocation.HORIZON:
            s = r - 2 * m
            u = np.sum(c * s ** n)
            du = np.sum(n[1:] * c[1:] * s ** (n[1:] - 1))
            sign = -1
        else:
            s = 1 / r
            u = np.sum(c * s ** n)
            du = -np.sum(n[1:] * c[1:] * s ** (n[1:] + 1))
            sign = 1
        phase = np.exp(sign * 1j * self.sigma * (tortoise(params, r) - tortoise(params, self.r_ref)))
        return complex(phase * u), complex(phase * (sign * 1j * self.sigma * u + mu * du))


@dataclass
class ModeSearchResult:
    sigma: complex
    wronskian: complex
    normalized: float
    r_match: float
    r_infinity: float
    orders: Tuple[int, int]
    classification: Classification
    condition: float


@dataclass
class RootResult:
    sigma: complex
    iterations: int
    wronskian: complex
    history: List[complex] = field(default_factory=list)


@dataclass
class ScanReport:
    problem: str
    samples: List[Tuple[complex, float]]
    min_value: float
    argmin: complex
    threshold: float
    passed: bool
    mode: Optional[complex] = None

    def to_dict(self) -> Dict:
        return {
            'problem': self.problem,
            'min_normalized_wronskian': self.min_value,
            'argmin': [self.argmin.real, self.argmin.imag],
            'threshold': self.threshold,
            'passed': self.passed,
            'mode': None if self.mode is None else [self.mode.real, self.mode.imag],
            'points': len(self.samples),
        }


# ---- potential expansions ----

def _rational_taylor(expr, var, order: int) -> np.ndarray:
    """Taylor coefficients about var = 0 of a rational function."""
    num, den = sp.fraction(sp.cancel(sp.together(expr)))
    a = [complex(c) for c in sp.Poly(sp.expand(num), var).all_coeffs()[::-1]]
    d = [complex(c) for c in sp.Poly(sp.expand(den), var).all_coeffs()[::-1]]
    if d[0] == 0:
        raise DomainError(f"expansion point is a pole of {expr}")
    out = np.zeros(order + 1, dtype=complex)
    for n in range(order + 1):
        acc = a[n] if n < len(a) else 0.0
        for j in range(1, min(n, len(d) - 1) + 1):
            acc -= d[j] * out[n - j]
        out[n] = acc / d[0]
    return out


@lru_cache(maxsize=None)
def _potential_expansions(kind: MasterKind, l: int, mass: float, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """(Taylor of r^2 V_eff/mu in r - 2m, Taylor of V_eff/mu in 1/r)."""
    problem = MasterProblem(kind, l, mass)
    veff = problem.potential_expr()
    mu = 1 - 2 * sp.nsimplify(mass) / R
    W = sp.cancel(veff / mu)
    y, z = sp.symbols('y z')
    horizon = _rational_taylor((R ** 2 * W).subs(R, 2 * sp.nsimplify(mass) + y), y, order)
    infinity = _rational_taylor(W.subs(R, 1 / z), z, order + 2)
    return horizon, infinity


def _expansions(problem: MasterProblem, order: int) -> Tuple[np.ndarray, np.ndarray]:
    if problem.kind == MasterKind.CUSTOM:
        # custom potentials are taken to decay exponentially at both ends
        return np.zeros(order + 1, dtype=complex), np.zeros(order + 3, dtype=complex)
    return _potential_expansions(problem.kind, problem.l, float(problem.mass), order)


def _veff(problem: MasterProblem) -> Callable[[float], float]:
    if problem.kind == MasterKind.CUSTOM:
        return problem.custom
    return sp.lambdify(R, problem.potential_expr(), 'numpy')


def horizon_series(problem: MasterProblem, sigma: complex, order: int = 20,
                   r_ref: Optional[float] = None) -> BoundarySeries:
    """
    Frobenius series of the outgoing-at-horizon solution exp(-i sigma r_*) u(r).

    u solves r y u'' + (2m - 2 i sigma r^2) u' - r^2 W u = 0 with y = r - 2m, W = V_eff/mu.
    """
    if order > 40:
        raise DomainError(f"horizon series order must be at most 40, got {order}")
    m = problem.mass
    s = complex(sigma)
    w = _expansions(problem, order)[0]
    a = np.zeros(order + 1, dtype=complex)
    a[0] = 1.0
    kept = order
    for n in range(1, order + 1):
        denom = n * (2 * m * n - 8j * s * m ** 2)
        rhs = (-(n - 1) * (n - 2) + 8j * s * m * (n - 1)) * a[n - 1]
        if n >= 2:
            rhs += 2j * s * (n - 2) * a[n - 2]
        rhs += np.sum(w[:n] * a[n - 1::-1][:n])
        if abs(denom) < 1e-12 * max(1.0, abs(rhs)):
            logger.warning(f"resonant horizon recurrence at n={n}, sigma={s}; truncating series")
            kept = n - 1
            break
        a[n] = rhs / denom
    r_ref = 2 * m * (1 + HORIZON_OFFSET) if r_ref is None else r_ref
    coeffs = a[:kept + 1]
    y0 = r_ref - 2 * m
    trunc = float(abs(coeffs[-1]) * y0 ** kept)
    return BoundarySeries(SeriesLocation.HORIZON, s, m, coeffs, r_ref, truncation=trunc)


def infinity_series(problem: MasterProblem, sigma: complex, order: int = 60,
                    r_ref: Optional[float] = None) -> BoundarySeries:
    """
    Asymptotic series exp(i sigma r_*) sum b_n r^-n of the outgoing solution, optimally truncated at r_ref.

    At sigma = 0 the decaying power law r^lam, lam (lam - 1) = lim r^2 V_eff, is returned.
    """
    m = problem.mass
    s = complex(sigma)
    r_ref = radius_rule(problem, s) if r_ref is None else r_ref
    c = _expansions(problem, order)[1]
    if s == 0:
        c2 = c[2].real if len(c) > 2 else 0.0
        lam = 0.5 * (1 - np.sqrt(1 + 4 * c2))
        return BoundarySeries(SeriesLocation.INFINITY, s, m, np.ones(1, dtype=complex), r_ref, lam=lam)
    b = np.zeros(order + 1, dtype=complex)
    b[0] = 1.0
    # the envelope of consecutive terms ignores isolated vanishing coefficients
    best, best_n = np.inf, 0
    previous = abs(b[0])
    for n in range(1, order + 1):
        acc = n * (n - 1) * b[n - 1]
        if n >= 2:
            acc -= 2 * m * n * (n - 2) * b[n - 2]
        for j in range(2, min(n + 1, len(c) - 1) + 1):
            acc -= c[j] * b[n + 1 - j]
        b[n] = acc / (2j * s * n)
        term = abs(b[n]) / r_ref ** n
        envelope = term + previous
        previous = term
        if envelope < best:
            best, best_n = envelope, n
        elif envelope > 10 * best:
            break
    coeffs = b[:best_n + 1]
    return BoundarySeries(SeriesLocation.INFINITY, s, m, coeffs, r_ref, truncation=float(best))


def radius_rule(problem: MasterProblem, sigma: complex) -> float:
    """Outer matching radius: max(10^3, 50/|sigma|) m for real sigma, series-optimal otherwise."""
    m = problem.mass
    s = complex(sigma)
    if s == 0:
        return 1e3 * m
    if abs(s.imag) < 1e-12:
        return max(1e3, 50 / abs(s)) * m
    return max(30.0 * m, 15.0 / abs(s))


# ---- shooting ----

def _integrate(problem: MasterProblem, veff: Callable, sigma: complex, r0: float, r1: float,
               y0: Tuple[complex, complex], r_eval: Optional[np.ndarray] = None):
    m = problem.mass
    s2 = complex(sigma) ** 2

    def rhs(r, y):
        mu = 1 - 2 * m / r
        return [y[1] / mu, (veff(r) - s2) * y[0] / mu]

    scale = max(abs(y0[0]), abs(y0[1]), 1e-300)
    sol = solve_ivp(rhs, (r0, r1), np.array(y0, dtype=complex), method='DOP853', rtol=RTOL,
                    atol=1e-14 * scale, t_eval=r_eval)
    if not sol.success:
        raise ConvergenceError(f"radial integration failed between r={r0:g} and r={r1:g}: {sol.message}")
    return sol


def _match(problem: MasterProblem, sigma: complex, r_match: Optional[float], r_infinity: Optional[float],
           horizon_order: int, infinity_order: int):
    m = problem.mass
    r_match = 5 * m if r_match is None else r_match
    r_infinity = radius_rule(problem, sigma) if r_infinity is None else r_infinity
    if not 2 * m * (1 + HORIZON_OFFSET) < r_match < r_infinity:
        raise DomainError(f"matching radius {r_match} must lie between the series start points")
    veff = _veff(problem)
    hs = horizon_series(problem, sigma, horizon_order)
    ins = infinity_series(problem, sigma, infinity_order, r_ref=r_infinity)
    yh = _integrate(problem, veff, sigma, hs.r_ref, r_match, hs.evaluate(hs.r_ref)).y[:, -1]
    yi = _integrate(problem, veff, sigma, r_infinity, r_match, ins.evaluate(r_infinity)).y[:, -1]
    return yh, yi, hs, ins, r_match, r_infinity


def wronskian(problem: MasterProblem, sigma: complex, r_match: Optional[float] = None,
              r_infinity: Optional[float] = None, horizon_order: int = 20, infinity_order: int = 60) -> complex:
    """
    W(sigma) = Psi_h dPsi_inf/dr_* - dPsi_h/dr_* Psi_inf, independent of the matching radius.

    Raises:
        ConvergenceError: If the integration fails
    """
    yh, yi, *_ = _match(problem, complex(sigma), r_match, r_infinity, horizon_order, infinity_order)
    return complex(yh[0] * yi[1] - yh[1] * yi[0])


def evaluate_mode(problem: MasterProblem, sigma: complex, threshold: float = 1e-3,
                  r_match: Optional[float] = None, r_infinity: Optional[float] = None) -> ModeSearchResult:
    """Wronskian with its condition-normalized magnitude |W| / (|y_h| |y_inf|)."""
    sigma = complex(sigma)
    yh, yi, hs, ins, r_match, r_infinity = _match(problem, sigma, r_match, r_infinity, 20, 60)
    W = complex(yh[0] * yi[1] - yh[1] * yi[0])
    norm = float(np.linalg.norm(yh) * np.linalg.norm(yi))
    normalized = abs(W) / norm if norm > 0 else 0.0
    cls = Classification.MODE_CANDIDATE if normalized < threshold else Classification.NO_MODE
    return ModeSearchResult(sigma, W, normalized, r_match, r_infinity, (hs.order, ins.order), cls, norm)


def outgoing_pair(problem: MasterProblem, sigma: complex, r: np.ndarray) -> Tuple[np.ndarray, ...]:
    """Horizon- and infinity-outgoing solutions (Psi, dPsi/dr_*) sampled on increasing radii r."""
    r = np.asarray(r, dtype=float)
    veff = _veff(problem)
    hs = horizon_series(problem, sigma)
    r_inf = max(radius_rule(problem, sigma), r[-1])
    ins = infinity_series(problem, sigma, r_ref=r_inf)
    if r[0] < hs.r_ref:
        raise DomainError(f"grid starts at {r[0]} inside the horizon series start {hs.r_ref}")
    sol_h = _integrate(problem, veff, sigma, hs.r_ref, r[-1], hs.evaluate(hs.r_ref), r_eval=r)
    sol_i = _integrate(problem, veff, sigma, r_inf, r[0], ins.evaluate(r_inf), r_eval=r[::-1])
    return sol_h.y[0], sol_h.y[1], sol_i.y[0][::-1], sol_i.y[1][::-1]


# ---- scans and roots ----

def _scan_point(args):
    problem, sigma, threshold = args
    try:
        return sigma, evaluate_mode(problem, sigma, threshold).normalized
    except ConvergenceError as e:
        logger.warning(f"scan point {sigma} failed: {e}")
        return sigma, float('nan')


def scan_upper_half_plane(problem: MasterProblem, re_range: Tuple[float, float] = (-2.0, 2.0),
                          im_range: Tuple[float, float] = (0.0, 1.0), step: float = 0.05,
                          exclusion: float = 0.05, threshold: float = 1e-3,
                          workers: Optional[int] = None, refine: bool = True,
                          progress_callback: Optional[Callable[[str], None]] = None) -> ScanReport:
    """
    Minimum of the normalized Wronskian over a grid in Im sigma >= 0, |sigma| >= exclusion.

    The scan FAILS when the minimum drops below threshold or when a secant search started
    at the minimum converges to a root inside the scanned region.

    Args:
        problem: Master problem
        re_range, im_range: Rectangle bounds
        step: Grid spacing
        exclusion: Radius of the excluded disk around 0
        threshold: PASS threshold for the normalized Wronskian
        workers: Process count (default from BHSTAB_WORKERS)
        refine: Run the secant refinement from the minimum
        progress_callback: Optional progress sink
    """
    if step <= 0 or exclusion <= 0:
        raise DomainError("scan step and exclusion radius must be positive")
    if im_range[0] < 0:
        raise DomainError("the mode scan covers Im sigma >= 0 only")
    res = np.arange(re_range[0], re_range[1] + step / 2, step)
    ims = np.arange(im_range[0], im_range[1] + step / 2, step)
    sigmas = [complex(a, b) for b in ims for a in res if abs(complex(a, b)) >= exclusion]
    workers = worker_count() if workers is None else workers
    tasks = [(problem, s, threshold) for s in sigmas]
    if progress_callback:
        progress_callback(f"🔍 Scanning {len(sigmas)} frequencies for {problem.describe()}")
    if workers > 1 and problem.kind != MasterKind.CUSTOM:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(_scan_point, tasks, chunksize=8))
    else:
        samples = [_scan_point(t) for t in tasks]

    finite = [(s, v) for s, v in samples if np.isfinite(v)]
    if not finite:
        raise ConvergenceError("every scan point failed")
    argmin, min_value = min(finite, key=lambda item: item[1])
    passed = min_value > threshold
    mode = None
    if refine:
        try:
            root = find_root(problem, argmin, max_iter=50,
                             domain=(re_range[0], re_range[1], im_range[0], im_range[1]))
            if abs(root.sigma) >= exclusion and root.sigma.imag >= 0:
                mode = root.sigma
                passed = False
        except ConvergenceError:
            pass
    mark = '✓' if passed else '✗'
    logger.info(f"{mark} scan {problem.describe()}: min |W| = {min_value:.3e} at {argmin:.3f}")
    return ScanReport(problem.describe(), samples, float(min_value), argmin, threshold, passed, mode)


def find_root(problem: MasterProblem, sigma0: complex, tolerance: float = 1e-10, max_iter: int = 100,
              domain: Optional[Tuple[float, float, float, float]] = None,
              r_match: Optional[float] = None) -> RootResult:
    """
    Complex secant iteration on W(sigma) with the outer radius frozen at its sigma0 value.

    Args:
        domain: Optional (re_min, re_max, im_min, im_max) the iterates must stay in

    Raises:
        ConvergenceError: On leaving the domain or after max_iter iterations
    """
    sigma0 = complex(sigma0)
    r_inf = radius_rule(problem, sigma0)

    def W(s):
        return wronskian(problem, s, r_match=r_match, r_infinity=r_inf)

    s0, s1 = sigma0, sigma0 * (1 + 1e-4) + 1e-6
    w0, w1 = W(s0), W(s1)
    history = [s0, s1]
    for it in range(1, max_iter + 1):
        if w1 == w0:
            raise ConvergenceError("secant step degenerated (equal Wronskian values)", history)
        s2 = s1 - w1 * (s1 - s0) / (w1 - w0)
        history.append(s2)
        if domain is not None:
            re_min, re_max, im_min, im_max = domain
            if not (re_min <= s2.real <= re_max and im_min <= s2.imag <= im_max):
                raise ConvergenceError(f"root search left the domain at sigma = {s2}", history)
        if abs(s2 - s1) < tolerance * max(1.0, abs(s2)):
            logger.info(f"✓ root {s2.real:.10f} {s2.imag:+.10f}i after {it} iterations")
            return RootResult(s2, it, W(s2), history)
        s0, w0 = s1, w1
        s1, w1 = s2, W(s2)
    raise ConvergenceError(f"no convergence in {max_iter} iterations from sigma0 = {sigma0}", history)


# ---- constraint damping ----

@dataclass
class CDTrack:
    v: float
    gammas: np.ndarray
    roots: np.ndarray
    slope: complex
    predicted_slope: complex

    @property
    def all_damped(self) -> bool:
        return bool(np.all(self.roots.imag < 0))

    def to_dict(self) -> Dict:
        return {
            'v': self.v,
            'gamma': self.gammas.tolist(),
            'sigma': [[s.real, s.imag] for s in self.roots],
            'slope': [self.slope.real, self.slope.imag],
            'predicted_slope': [self.predicted_slope.real, self.predicted_slope.imag],
            'all_damped': self.all_damped,
        }


def _pencil(op, r: np.ndarray, scheme: str = 'FD4') -> List[np.ndarray]:
    """Dense K_p with K(sigma) = K_0 + sigma K_1 + sigma^2 K_2 for an operator quadratic in sigma."""
    mats = diff_matrices(r, scheme)
    derivs = [np.eye(len(r)), mats[1].toarray(), mats[2].toarray()]
    N = len(r)
    n_out, n_in = len(op.slots_out), len(op.slots_in)

    def assemble(sigma):
        K = np.zeros((n_out * N, n_in * N), dtype=complex)
        for n, samples in enumerate(op.evaluate(r, sigma)):
            for i in range(n_out):
                for j in range(n_in):
                    if np.any(samples[i, j] != 0):
                        K[i * N:(i + 1) * N, j * N:(j + 1) * N] += samples[i, j][:, None] * derivs[n]
        return K

    K0, Kp, Km = assemble(0.0), assemble(1.0), assemble(-1.0)
    return [K0, (Kp - Km) / 2, (Kp + Km) / 2 - K0]


def _robin_rows(K: List[np.ndarray], r: np.ndarray, n_comp: int, D1: np.ndarray, rate: Tuple[float, complex]):
    """Replace the last row of each component block by w' - rate(sigma) w = 0 (rate linear in sigma)."""
    N = len(r)
    a0, a1 = rate
    for c in range(n_comp):
        row = (c + 1) * N - 1
        for p in range(3):
            K[p][row, :] = 0
        block = slice(c * N, (c + 1) * N)
        K[0][row, block] = D1[-1]
        K[0][row, c * N + N - 1] -= a0
        K[1][row, c * N + N - 1] -= a1


def _polynomial_eigenvalues(K: List[np.ndarray]) -> np.ndarray:
    n = K[0].shape[0]
    I = np.eye(n)
    Z = np.zeros((n, n))
    A = np.block([[Z, I], [-K[0], -K[1]]])
    B = np.block([[I, Z], [Z, K[2]]])
    vals = linalg.eig(A, B, right=False)
    return vals[np.isfinite(vals)]


def track_cd_root(v: float, gammas: Sequence[float], mass: float = 1.0, points: int = 240,
                  r_max: float = 20.0, progress_callback: Optional[Callable[[str], None]] = None) -> CDTrack:
    """
    Follow the spherically symmetric constraint-propagation root from sigma = 0 as damping turns on.

    Discretizes the (dt0, dr) system of 2 delta G (delta^* + E) in the ingoing null chart on
    [2m, r_max m] (the horizon row is a transport equation and needs no condition), imposes
    w' + w/r = 0 at r_max, and continues the eigenvalue of the quadratic pencil nearest to the
    previous root. The leading-order prediction is sigma = -2i (v - 1) gamma.

    Raises:
        DomainError: For v < 1 or a nonpositive gamma
        ConvergenceError: When the continued root leaves the neighbourhood of 0
    """
    if v < 1:
        raise DomainError(f"damping velocity must be at least 1, got {v}")
    gammas = np.sort(np.asarray(gammas, dtype=float))
    if np.any(gammas <= 0):
        raise DomainError("gamma values must be positive")
    params = BlackHoleParams(mass)
    r = np.linspace(2 * mass, r_max * mass, points)
    D1 = diff_matrices(r, 'FD4')[1].toarray()
    path_g = [0.0]
    path_s = [0.0 + 0.0j]
    offset = 0.0 + 0.0j
    roots = []
    for k, gamma in enumerate(np.concatenate([[0.0], gammas])):
        op = constraint_prop(params, scalar(0, 1), gamma=float(gamma), v=v, chart='null0')
        K = _pencil(op, r)
        _robin_rows(K, r, 2, D1, (-1.0 / r[-1], 0.0))
        vals = _polynomial_eigenvalues(K)
        if len(path_s) < 2:
            guess = path_s[-1]
        else:
            rate = (path_s[-1] - path_s[-2]) / (path_g[-1] - path_g[-2])
            guess = path_s[-1] + rate * (gamma - path_g[-1])
        root = complex(vals[np.argmin(np.abs(vals - guess))])
        if abs(root) > 0.5:
            raise ConvergenceError(f"constraint-damping root left the search region at gamma={gamma}: {root}")
        if k == 0:
            offset = root
            path_s[0] = root
            logger.debug(f"undamped root {root:.3e} (discretization offset)")
            continue
        path_g.append(gamma)
        path_s.append(root)
        roots.append(root - offset)
        if progress_callback:
            progress_callback(f"📈 gamma={gamma:.2e}: sigma={root:.4e}")
    roots = np.array(roots)
    design = np.vstack([gammas, gammas ** 2]).T.astype(complex)
    coef, *_ = np.linalg.lstsq(design, roots, rcond=None)
    track = CDTrack(v, gammas, roots, complex(coef[0]), -2j * (v - 1))
    logger.info(f"{'✓' if track.all_damped else '✗'} constraint damping v={v}: slope {track.slope:.4f}")
    return track


# ---- coupled system (experimental) ----

def coupled_scan(l: int, sigmas: Sequence[complex], mass: float = 1.0, gamma: float = 0.0, v: float = 2.0,
                 points: int = 120, r_max: float = 40.0) -> List[Tuple[complex, float]]:
    """
    Experimental: smallest relative singular value of the discretized gauge-fixed operator.

    Works on the scalar sector of degree l in the ingoing null chart with the outgoing
    condition w' = (2 i sigma / mu - 1/r) w at r_max. Small values flag candidate modes;
    the master-equation scan remains the stability certificate.
    """
    params = BlackHoleParams(mass)
    r = np.linspace(2 * mass, r_max * mass, points)
    D1 = diff_matrices(r, 'FD4')[1].toarray()
    op = gauge_fixed(params, scalar(l, 2), gamma=gamma, v=v, chart='null0')
    base = _pencil(op, r)
    n_comp = len(op.slots_in)
    mu_end = 1 - 2 * mass / r[-1]
    out = []
    for s in sigmas:
        K = [k.copy() for k in base]
        _robin_rows(K, r, n_comp, D1, (-1.0 / r[-1], 2j / mu_end))
        mat = K[0] + s * K[1] + s ** 2 * K[2]
        sv = linalg.svdvals(mat)
        out.append((complex(s), float(sv[-1] / sv[0])))
    return out
