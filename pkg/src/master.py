"""
Mode-stability reductions on Schwarzschild: gauge invariants, master variables and potentials.

Scalar-type quantities use the splitting
    g_dot = f~ S + 2r f (x)_s S_j + r^2 (H_L S g/ + H_T S_jk)
of a scalar-type mode, with hat operators acting on the (t, r) factor of
mu dt^2 - mu^{-1} dr^2 and time dependence exp(-i sigma t). All closed forms are
sympy expressions in R with the mass symbol M; numerical evaluations take numpy arrays.
"""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from scipy import integrate

from .background import BlackHoleParams, TimeFunctionKind, tortoise
from .errors import DomainError, SectorError
from .harmonics import scalar
from .radial_ops import RadialProfile, sym_grad
from .tools.covariant import M, R, SIGMA, mu_expr
from .tools.finite_diff import diff_matrices

logger = logging.getLogger(__name__)


class MasterKind(Enum):
    SCALAR_L2PLUS = 'ScalarL2plus'
    SCALAR_L1 = 'ScalarL1'
    VECTOR_L2PLUS = 'VectorL2plus'
    VECTOR_L1 = 'VectorL1'
    CUSTOM = 'Custom'


@dataclass(frozen=True)
class MasterProblem:
    """
    A decoupled radial master equation (mu d_r)^2 Phi + (sigma^2 - V_eff) Phi = 0.

    For scalar type V_eff is the potential V; for vector type V_eff = mu V.
    CUSTOM problems carry an effective potential callable of r.
    """

    kind: MasterKind
    l: int
    mass: float = 1.0
    sigma: complex = 0.0
    custom: Optional[Callable] = field(default=None, compare=False)
    label: str = ''

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if self.kind in (MasterKind.SCALAR_L2PLUS, MasterKind.VECTOR_L2PLUS) and self.l < 2:
            raise SectorError(f"{self.kind.value} needs l >= 2, got l={self.l}")
        if self.kind in (MasterKind.SCALAR_L1, MasterKind.VECTOR_L1) and self.l != 1:
            raise SectorError(f"{self.kind.value} needs l = 1, got l={self.l}")
        if self.kind == MasterKind.CUSTOM and self.custom is None:
            raise SectorError("custom master problem needs a potential")

    @classmethod
    def from_parity(cls, parity: str, l: int, mass: float = 1.0, sigma: complex = 0.0) -> 'MasterProblem':
        parity = parity.lower()
        if parity == 'scalar':
            kind = MasterKind.SCALAR_L1 if l == 1 else MasterKind.SCALAR_L2PLUS
        elif parity == 'vector':
            kind = MasterKind.VECTOR_L1 if l == 1 else MasterKind.VECTOR_L2PLUS
        else:
            raise SectorError(f"parity must be 'scalar' or 'vector', got '{parity}'")
        return cls(kind, l, mass, sigma)

    @classmethod
    def free(cls, mass: float = 1.0) -> 'MasterProblem':
        return cls(MasterKind.CUSTOM, 0, mass, custom=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                   label='free')

    @classmethod
    def poschl_teller(cls, mass: float = 1.0, depth: float = 10.0) -> 'MasterProblem':
        """Negative well -depth / cosh^2(r_*): has a bound state on the positive imaginary axis."""
        params = BlackHoleParams(mass)
        return cls(MasterKind.CUSTOM, 0, mass,
                   custom=lambda r: -depth / np.cosh(tortoise(params, r)) ** 2,
                   label=f'poschl-teller-{depth:g}')

    def at(self, sigma: complex) -> 'MasterProblem':
        return MasterProblem(self.kind, self.l, self.mass, sigma, self.custom, self.label)

    @property
    def params(self) -> BlackHoleParams:
        return BlackHoleParams(self.mass)

    @property
    def is_vector(self) -> bool:
        return self.kind in (MasterKind.VECTOR_L2PLUS, MasterKind.VECTOR_L1)

    @property
    def k2(self) -> int:
        lam = self.l * (self.l + 1)
        return lam - 1 if self.is_vector else lam

    @property
    def m(self) -> int:
        return self.k2 - 2

    def x(self, r):
        return 2 * self.mass / np.asarray(r, dtype=float)

    def H(self, r):
        return self.m + 3 * self.x(r)

    def potential(self, r) -> np.ndarray:
        """The potential V as it enters the master equation (before the factor mu for vector type)."""
        r = _check_exterior(r, self.mass)
        if self.kind == MasterKind.SCALAR_L2PLUS:
            return zerilli_potential(self.mass, self.l, r)
        if self.kind == MasterKind.SCALAR_L1:
            return scalar_l1_potential(self.mass, r)
        if self.kind == MasterKind.VECTOR_L2PLUS:
            return vector_potential(self.mass, self.l, r)
        if self.kind == MasterKind.VECTOR_L1:
            return (2 - 6 * self.mass / r) / r ** 2
        return np.asarray(self.custom(r), dtype=float)

    def effective_potential(self, r) -> np.ndarray:
        """V_eff in (mu d_r)^2 Phi + (sigma^2 - V_eff) Phi = 0."""
        v = self.potential(r)
        if self.is_vector:
            return (1 - 2 * self.mass / np.asarray(r, dtype=float)) * v
        return v

    def potential_expr(self):
        """Effective potential as a sympy expression in R (None for custom problems)."""
        if self.kind == MasterKind.CUSTOM:
            return None
        mu = mu_expr(R, M)
        k2 = sp.Integer(self.k2)
        if self.kind == MasterKind.SCALAR_L2PLUS:
            m = k2 - 2
            x = 2 * M / R
            H = m + 3 * x
            v = mu / (R ** 2 * H ** 2) * (9 * x ** 3 + 9 * m * x ** 2 + 3 * m ** 2 * x + m ** 2 * (m + 2))
        elif self.kind == MasterKind.SCALAR_L1:
            v = 2 * M / R ** 3 * mu
        else:
            v = mu * (k2 + 1 - 6 * M / R) / R ** 2
        return v.subs(M, sp.nsimplify(self.mass))

    def describe(self) -> str:
        if self.kind == MasterKind.CUSTOM:
            return self.label or 'custom'
        return f"{'vector' if self.is_vector else 'scalar'}-l{self.l}-m{self.mass:g}"


def _check_exterior(r, mass: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 2 * mass):
        raise DomainError(f"radius must exceed 2m = {2 * mass}, got min {np.min(r)}")
    return r


# ---- potentials ----

def zerilli_potential(mass: float, l: int, r):
    """
    Scalar-type potential V = mu/(r^2 H^2) (9x^3 + 9mx^2 + 3m^2x + m^2(m+2)).

    Raises:
        SectorError: For l < 2
    """
    if l < 2:
        raise SectorError(f"the scalar-type master potential needs l >= 2, got l={l}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 2 * mass):
        raise DomainError(f"radius must be at least 2m = {2 * mass}")
    m = l * (l + 1) - 2
    x = 2 * mass / r
    H = m + 3 * x
    mu = 1 - x
    return mu / (r ** 2 * H ** 2) * (9 * x ** 3 + 9 * m * x ** 2 + 3 * m ** 2 * x + m ** 2 * (m + 2))


def vector_potential(mass: float, l: int, r):
    """Vector-type potential V = r^-2 (k^2 + 1 - 6m/r) with k^2 = l(l+1) - 1."""
    if l < 2:
        raise SectorError(f"the vector-type master potential needs l >= 2, got l={l}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 2 * mass):
        raise DomainError(f"radius must be at least 2m = {2 * mass}")
    k2 = l * (l + 1) - 1
    return (k2 + 1 - 6 * mass / r) / r ** 2


def scalar_l1_potential(mass: float, r):
    """V = 2m r^-3 (1 - 2m/r)."""
    r = np.asarray(r, dtype=float)
    return 2 * mass / r ** 3 * (1 - 2 * mass / r)


def dump_potential(problem: MasterProblem, r: np.ndarray, path: Union[str, Path]) -> Path:
    """Write columns r, r_*, V to CSV with a comment header naming the problem."""
    r = _check_exterior(r, problem.mass)
    rstar = tortoise(problem.params, r)
    v = problem.potential(r)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as fh:
        fh.write(f"# parity={'vector' if problem.is_vector else 'scalar'} l={problem.l} "
                 f"mass={problem.mass:g}\n")
        writer = csv.writer(fh)
        writer.writerow(['r', 'r_star', 'V'])
        for row in zip(r, rstar, v):
            writer.writerow([f"{x:.12e}" for x in row])
    logger.info(f"Wrote {len(r)} potential samples to {path}")
    return path


# ---- hat calculus on closed forms ----

def _mu():
    return mu_expr(R, M)


def hat_d(u, sigma=SIGMA):
    """d^ u = (-i sigma u, u')."""
    return (-sp.I * sigma * u, sp.diff(u, R))


def hat_delta_star(w, sigma=SIGMA):
    """Symmetric gradient of a (t, r) 1-form, components (tt, tr, rr)."""
    mu = _mu()
    wt, wr = w
    dmu = sp.diff(mu, R)
    tt = -sp.I * sigma * wt - mu * dmu / 2 * wr
    tr = mu / 2 * sp.diff(wt / mu, R) - sp.I * sigma * wr / 2
    rr = sp.diff(sp.sqrt(mu) * wr, R) / sp.sqrt(mu)
    return (tt, tr, rr)


def iota_varpi(w):
    """Contraction with the dual of dr."""
    return -_mu() * w[1]


def _simplify(exprs):
    return tuple(sp.simplify(e) for e in exprs)


@dataclass(frozen=True)
class InvariantData:
    """Gauge-invariant combinations of a scalar-type mode."""

    F_tilde: Tuple
    J: object
    X_gauge: Tuple
    sigma: object


def gauge_invariants(f_tilde: Sequence, f: Sequence, H_L, H_T, sigma=SIGMA, k2: int = 6,
                     simplify: bool = True) -> InvariantData:
    """
    F~ = f~ + 2 delta^* X and J = H_L + H_T/2 - r^-1 iota X with X = (r/k)(f + (r/k) d^ H_T).

    Args:
        f_tilde: (tt, tr, rr) closed forms
        f: (t, r) closed forms
        H_L, H_T: closed forms (H_T = 0 for l = 1)
        sigma: Frequency (symbol or number)
        k2: l(l+1) of the scalar harmonic

    Raises:
        SectorError: For k2 < 2 (no scalar-type splitting)
    """
    if k2 < 2:
        raise SectorError(f"scalar-type invariants need l >= 1, got k^2 = {k2}")
    k = sp.sqrt(k2)
    f_tilde = [sp.sympify(e) for e in f_tilde]
    f = [sp.sympify(e) for e in f]
    H_L, H_T = sp.sympify(H_L), sp.sympify(H_T)
    dH = hat_d(H_T, sigma)
    X = tuple(R / k * (f[a] + R / k * dH[a]) for a in range(2))
    ds = hat_delta_star(X, sigma)
    F = tuple(f_tilde[i] + 2 * ds[i] for i in range(3))
    J = H_L + H_T / 2 - iota_varpi(X) / R
    if simplify:
        F, X, J = _simplify(F), _simplify(X), sp.simplify(J)
    return InvariantData(F, J, X, sigma)


def pure_gauge(T: Sequence, L, sigma=SIGMA, k2: int = 6) -> Dict[str, Tuple]:
    """Scalar-type data of delta^* of the gauge 1-form with (t, r) part T and angular part L."""
    k = sp.sqrt(k2)
    T = [sp.sympify(e) for e in T]
    L = sp.sympify(L)
    ds = hat_delta_star(T, sigma)
    dL = hat_d(L / R, sigma)
    return {
        'f_tilde': tuple(2 * d for d in ds),
        'f': tuple(-k / R * T[a] + R * dL[a] for a in range(2)),
        'H_L': -iota_varpi(T) / R + k / (2 * R) * L,
        'H_T': -k / R * L,
    }


def xyz_from_invariants(F_tilde: Sequence, J) -> Tuple:
    """X, Y, Z from F~ + 2 J g^ = (mu X, -mu^-1 Z, -mu^-1 Y)."""
    mu = _mu()
    X = F_tilde[0] / mu + 2 * J
    Z = -mu * F_tilde[1]
    Y = 2 * J - mu * F_tilde[2]
    return X, Y, Z


# ---- first-order system ----

def _geometry(mass: float, r):
    r = np.asarray(r, dtype=float)
    mu = 1 - 2 * mass / r
    dmu = 2 * mass / r ** 2
    return r, mu, dmu


def first_order_system(sigma, mass: float, l: int, r) -> np.ndarray:
    """
    T(r) with (X', Y', (Z/i sigma)')^T = T (X, Y, Z/i sigma)^T.

    Returns:
        Complex array of shape (3, 3, len(r))
    """
    r, mu, dmu = _geometry(mass, r)
    k2 = l * (l + 1)
    s2 = complex(sigma) ** 2
    zero = np.zeros_like(r)
    T = np.array([
        [zero, dmu / mu - 2 / r, k2 / (r ** 2 * mu) - s2 / mu ** 2],
        [dmu / (2 * mu), -dmu / (2 * mu), s2 / mu ** 2 + zero],
        [1 + zero, zero, zero],
    ], dtype=complex)
    return T


def constraint_row(sigma, mass: float, l: int, r) -> np.ndarray:
    """gamma(r) with gamma . (X, Y, Z/i sigma) = 0; shape (3, len(r))."""
    r, mu, dmu = _geometry(mass, r)
    k2 = l * (l + 1)
    s2 = complex(sigma) ** 2
    return np.array([
        -s2 / mu - dmu ** 2 / (4 * mu) - dmu / r,
        -s2 / mu + (k2 - 2) / r ** 2 - dmu ** 2 / (4 * mu) + 2 * dmu / r,
        2 * s2 / (r * mu) - k2 * dmu / (2 * r ** 2 * mu),
    ], dtype=complex)


def zero_frequency_coefficients(mass: float, l: int, r, sigma=0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    C_X, C_Y with Phi = C_X X + C_Y Y, from eliminating Z/i sigma through the constraint.

    C = P / (3 H~), H~ = (k^2 mu' - 4 r sigma^2) H, P_X = (9x - 3(6+m)) x, P_Y = -3(9x + 5m - 6) x + 12m.
    """
    r, mu, dmu = _geometry(mass, r)
    k2 = l * (l + 1)
    m = k2 - 2
    x = 2 * mass / r
    H = m + 3 * x
    Ht = (k2 * dmu - 4 * r * complex(sigma) ** 2) * H
    if np.any(np.abs(Ht) == 0):
        raise DomainError("zero-frequency master form is singular on this grid")
    P_X = (9 * x - 3 * (6 + m)) * x
    P_Y = -3 * (9 * x + 5 * m - 6) * x + 12 * m
    return P_X / (3 * Ht), P_Y / (3 * Ht)


def master_from_xyz(X, Y, Z, sigma, mass: float, l: int, r) -> np.ndarray:
    """
    Phi = (2 Z/(i sigma) - r (X + Y)) / H.

    Raises:
        DomainError: For sigma = 0; use master_from_xy there
    """
    if complex(sigma) == 0:
        raise DomainError("Phi from (X, Y, Z) needs sigma != 0; use master_from_xy at zero frequency")
    r = np.asarray(r, dtype=float)
    m = l * (l + 1) - 2
    H = m + 3 * 2 * mass / r
    return (2 * np.asarray(Z) / (1j * sigma) - r * (np.asarray(X) + np.asarray(Y))) / H


def master_from_xy(X, Y, mass: float, l: int, r, sigma=0.0) -> np.ndarray:
    """Phi = C_X X + C_Y Y (valid for all sigma where H~ does not vanish)."""
    cx, cy = zero_frequency_coefficients(mass, l, r, sigma)
    return cx * np.asarray(X) + cy * np.asarray(Y)


def reconstruct_xyz(phi, dphi, sigma, mass: float, l: int, r) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (X, Y, Z/i sigma) from Phi and Phi'.

    Returns:
        X, Y and the rescaled Z/(i sigma)
    """
    r = np.asarray(r, dtype=float)
    mu = 1 - 2 * mass / r
    m = l * (l + 1) - 2
    x = 2 * mass / r
    H = m + 3 * x
    s2 = complex(sigma) ** 2
    P_X0 = 27 * x ** 3 + 24 * m * x ** 2 + 3 * m * (3 * m + 2) * x + 2 * m ** 2 * (m + 2)
    P_X1 = 9 * x ** 2 + (5 * m - 6) * x - 4 * m
    P_Y0 = 9 * x ** 3 + 6 * m * x ** 2 + 3 * m * (m + 2) * x
    P_Y1 = 3 * x ** 2 - (m + 6) * x
    P_Z = 3 * x ** 2 + 3 * m * x - 2 * m
    phi, dphi = np.asarray(phi), np.asarray(dphi)
    X = (s2 * r / mu - P_X0 / (2 * r * H ** 2)) * phi + P_X1 / (2 * H) * dphi
    Y = (-s2 * r / mu - P_Y0 / (2 * r * H ** 2)) * phi + P_Y1 / (2 * H) * dphi
    Zs = P_Z / (2 * H) * phi - r * mu * dphi
    return X, Y, Zs


def first_order_residual(X, Y, Zs, sigma, mass: float, l: int, r, scheme: str = 'FD4') -> Dict[str, float]:
    """
    Max residuals of the first-order system and of the constraint for sampled (X, Y, Z/i sigma).

    Returns:
        {'system': ..., 'constraint': ...} normalized by max |(X, Y, Z/i sigma)|
    """
    r = np.asarray(r, dtype=float)
    D1 = diff_matrices(r, scheme)[1]
    u = np.array([X, Y, Zs], dtype=complex)
    du = np.array([D1 @ row for row in u])
    T = first_order_system(sigma, mass, l, r)
    rhs = np.einsum('ijk,jk->ik', T, u)
    gamma = constraint_row(sigma, mass, l, r)
    scale = max(float(np.max(np.abs(u))), 1e-300)
    return {
        'system': float(np.max(np.abs(du - rhs)) / scale),
        'constraint': float(np.max(np.abs(np.sum(gamma * u, axis=0))) / scale),
    }


# ---- master equation ----

def master_equation_residual(phi, problem: MasterProblem, r, sigma=None, scheme: str = 'ClosedFormDiff') -> np.ndarray:
    """
    Pointwise residual (mu d_r)^2 Phi + (sigma^2 - V_eff) Phi on r.

    Args:
        phi: Closed form in R (ClosedFormDiff) or samples on r (FD2/FD4)
        problem: Master problem
        r: Radii
        sigma: Frequency (defaults to problem.sigma)
        scheme: 'ClosedFormDiff', 'FD2' or 'FD4'
    """
    r = _check_exterior(r, problem.mass)
    sigma = problem.sigma if sigma is None else sigma
    mu = 1 - 2 * problem.mass / r
    dmu = 2 * problem.mass / r ** 2
    if scheme == 'ClosedFormDiff':
        expr = sp.sympify(phi).subs(M, sp.nsimplify(problem.mass))
        funcs = [sp.lambdify(R, sp.diff(expr, R, n), 'numpy') for n in range(3)]
        vals = [np.broadcast_to(np.asarray(f(r), dtype=complex), r.shape) for f in funcs]
    else:
        mats = diff_matrices(r, scheme)
        u = np.asarray(phi, dtype=complex)
        vals = [u, mats[1] @ u, mats[2] @ u]
    box = mu * (dmu * vals[1] + mu * vals[2])
    return box + (complex(sigma) ** 2 - problem.effective_potential(r)) * vals[0]


def scalar_l1_static_solutions(mass: float, r) -> Dict[str, np.ndarray]:
    """Phi_1 = r and Phi_2 = (r/2m) log(1 - 2m/r) with their r-derivatives."""
    r = _check_exterior(r, mass)
    mu = 1 - 2 * mass / r
    log_mu = np.log(mu)
    return {
        'phi1': r, 'dphi1': np.ones_like(r),
        'phi2': r / (2 * mass) * log_mu, 'dphi2': log_mu / (2 * mass) + 1 / (r * mu),
    }


def scalar_l1_gauge_function(trace_F: np.ndarray, r: np.ndarray, mass: float, sigma=0.0,
                             homogeneous: Optional[Callable] = None) -> np.ndarray:
    """
    L solving box(r^-1 L) = (k / 2r^2) tr^ F~ for scalar l = 1 (k^2 = 2).

    With Psi = L, the equation is (mu d_r)^2 Psi + (sigma^2 - 2m mu/r^3) Psi = (k mu / 2r) tr^ F~,
    solved by variation of parameters with the horizon-regular and decaying solutions.
    For sigma != 0 `homogeneous(sigma, r)` must return (psi_h, dpsi_h, psi_inf, dpsi_inf)
    in r_*-derivatives, e.g. spectral.outgoing_pair.

    Args:
        trace_F: Samples of tr^ F~ on r
        r: Strictly increasing radii covering the support of the source
        mass: Black hole mass
        sigma: Frequency
        homogeneous: Homogeneous solver for sigma != 0
    """
    r = _check_exterior(r, mass)
    k = np.sqrt(2.0)
    # source per unit r_*: S dr_* = S dr / mu
    source_dr = k / (2 * r) * np.asarray(trace_F, dtype=complex)
    if complex(sigma) == 0:
        sol = scalar_l1_static_solutions(mass, r)
        mu = 1 - 2 * mass / r
        psi_h, psi_i = sol['phi1'], sol['phi2']
        wronskian = psi_h * mu * sol['dphi2'] - mu * sol['dphi1'] * psi_i
    else:
        if homogeneous is None:
            raise DomainError("nonzero frequency needs a homogeneous solver")
        psi_h, dpsi_h, psi_i, dpsi_i = homogeneous(sigma, r)
        wronskian = psi_h * dpsi_i - dpsi_h * psi_i
    W = complex(np.mean(wronskian))
    inner = integrate.cumulative_trapezoid(psi_h * source_dr, r, initial=0.0)
    outer_total = integrate.trapezoid(psi_i * source_dr, r)
    outer = outer_total - integrate.cumulative_trapezoid(psi_i * source_dr, r, initial=0.0)
    return (psi_i * inner + psi_h * outer) / W


# ---- vector type ----

def vector_invariant(f: Sequence, H_T, sigma=SIGMA, k2: int = 5) -> Tuple:
    """J = f + (r/k) d^ H_T, invariant under f -> f + r d^(r^-1 L), H_T -> H_T - (k/r) L."""
    k = sp.sqrt(k2)
    dH = hat_d(sp.sympify(H_T), sigma)
    return tuple(sp.simplify(sp.sympify(f[a]) + R / k * dH[a]) for a in range(2))


def vector_l1_charge(f: Sequence, mass: float, r_samples: Sequence[float] = (3.0, 5.0, 10.0, 40.0),
                     sigma=0.0, tolerance: float = 1e-8) -> Dict[str, float]:
    """
    The constant star^ r^4 d^(r^-1 f) of a vector l = 1 solution, sampled at several radii.

    Returns:
        {'charge': mean value, 'spread': max deviation}
    """
    ft, fr = (sp.sympify(c).subs(M, sp.nsimplify(mass)) for c in f)
    expr = R ** 4 * (-sp.I * sigma * fr / R - sp.diff(ft / R, R))
    func = sp.lambdify(R, expr, 'numpy')
    radii = np.asarray(r_samples, dtype=float) * mass
    values = np.array([complex(func(x)) for x in radii])
    charge = complex(np.mean(values))
    spread = float(np.max(np.abs(values - charge)))
    if spread > tolerance * max(1.0, abs(charge)):
        logger.warning(f"vector l=1 charge not constant (spread {spread:.3e}); input is not a solution")
    value = charge.real if abs(charge.imag) < tolerance else charge
    return {'charge': value, 'spread': spread}


# ---- spherically symmetric sector ----

def l0_elimination(mu_dot, X_dot, Z_dot, Y_dot, mass: float,
                   r_samples: Sequence[float] = (2.5, 3.0, 5.0, 10.0, 30.0)) -> Dict:
    """
    Reduce stationary l = 0 data mu_dot dt0^2 - 2 X_dot dt0 dr + Z_dot dr^2 - 2 r^2 Y_dot g/ to g_dot^0(m_dot, 0).

    Adds delta^*(2 omega), omega the flat of Z_1 d_t0 - r Y_dot d_r with Z_1 = (1/2) int_{3m}^r Z_dot,
    which removes the dr^2 and angular parts; the remainder has constant X_dot and
    dt0^2 coefficient -2 m_dot / r.

    Args:
        mu_dot, X_dot, Z_dot, Y_dot: Closed forms in R (may contain M)
        mass: Black hole mass
        r_samples: Radii in units of m at which the reduced data are sampled

    Returns:
        Dict with 'm_dot', 'spread' (non-constancy of -r mu_dot / 2), 'X_dot' samples,
        'gauge' (omega_t, omega_r closed forms) and 'residual' (leftover dr^2 and angular parts)
    """
    mval = sp.nsimplify(mass)
    mu_dot, X_dot, Z_dot, Y_dot = (sp.sympify(e).subs(M, mval) for e in (mu_dot, X_dot, Z_dot, Y_dot))
    rho = sp.Symbol('rho', positive=True)
    Z1 = sp.integrate(Z_dot.subs(R, rho) / 2, (rho, 3 * mval, R))
    mu = mu_expr(R, mval)
    omega = (mu * Z1 + R * Y_dot, -Z1)
    sector = scalar(0, 2)
    op = sym_grad(BlackHoleParams(mass), scalar(0, 1), sigma=0, chart='null0')
    gauge = op.apply_symbolic([2 * omega[0], 2 * omega[1]])
    data = [mu_dot, -X_dot, Z_dot, -2 * R ** 2 * Y_dot]
    reduced = [sp.simplify((data[i] + gauge[i]).subs(M, mval)) for i in range(4)]
    funcs = [sp.lambdify(R, e, 'numpy') for e in reduced]
    radii = np.asarray(r_samples, dtype=float) * mass
    m_dot = np.array([-float(x) * complex(funcs[0](x)).real / 2 for x in radii])
    residual = max(abs(complex(funcs[i](x))) for i in (2, 3) for x in radii)
    result = {
        'm_dot': float(np.mean(m_dot)),
        'spread': float(np.max(np.abs(m_dot - np.mean(m_dot)))),
        'X_dot': [-complex(funcs[1](x)).real for x in radii],
        'gauge': omega,
        'residual': float(residual),
        'profile': RadialProfile.closed(sector, reduced, TimeFunctionKind.NULL0, 'null0'),
    }
    logger.debug(f"l=0 elimination: m_dot={result['m_dot']:.6g}, spread={result['spread']:.2e}")
    return result
