"""Tensor spherical-harmonic sectors: component systems, sphere eigenvalues and grid checks."""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

import numpy as np
import sympy as sp
from scipy.special import lpmv

from .errors import SectorError

logger = logging.getLogger(__name__)


class Parity(Enum):
    SCALAR = 'scalar'
    VECTOR = 'vector'


class SphereOperation(Enum):
    LAPLACIAN = 'Laplacian'
    DIV_OF_SYM_GRAD = 'DivOfSymGrad'
    DIV_OF_TRACE_FREE_HESS = 'DivOfTraceFreeHess'
    SYM_GRAD_SPLIT = 'SymGradSplit'


@dataclass(frozen=True)
class Sector:
    """A harmonic sector: parity type, degree l and tensor rank."""

    parity: Parity
    l: int
    rank: int = 0

    def __post_init__(self):
        if self.l < 0:
            raise SectorError(f"harmonic degree must be nonnegative, got l={self.l}")
        if self.rank not in (0, 1, 2):
            raise SectorError(f"rank must be 0, 1 or 2, got {self.rank}")
        if self.parity == Parity.VECTOR and self.l < 1:
            raise SectorError("vector-type harmonics need l >= 1")
        if self.parity == Parity.VECTOR and self.rank == 0:
            raise SectorError("rank-0 sectors are scalar type")

    @property
    def lam(self) -> int:
        """Eigenvalue l(l+1) of the scalar Laplacian on S^2."""
        return self.l * (self.l + 1)

    @property
    def k2(self) -> int:
        return self.lam if self.parity == Parity.SCALAR else self.lam - 1

    def with_rank(self, rank: int) -> 'Sector':
        return Sector(self.parity, self.l, rank)

    def __str__(self):
        return f"{self.parity.value}-l{self.l}-rank{self.rank}"


def scalar(l: int, rank: int = 0) -> Sector:
    return Sector(Parity.SCALAR, l, rank)


def vector(l: int, rank: int = 1) -> Sector:
    return Sector(Parity.VECTOR, l, rank)


def slots(sector: Sector) -> List[str]:
    """
    Ordered names of the aspherical coefficient slots of a sector.

    Scalar rank 2 uses f~_ab (tt, tr, rr), f_a (t, r), H_L, H_T; vector rank 2 uses f_a, H_T.
    Slots whose angular tensor vanishes identically at low l are omitted.
    """
    l = sector.l
    if sector.rank == 0:
        return ['u']
    if sector.parity == Parity.SCALAR:
        if sector.rank == 1:
            return ['w_t', 'w_r'] if l == 0 else ['w_t', 'w_r', 'w_S']
        names = ['ft_tt', 'ft_tr', 'ft_rr']
        if l >= 1:
            names += ['f_t', 'f_r']
        names.append('H_L')
        if l >= 2:
            names.append('H_T')
        return names
    if sector.rank == 1:
        return ['w_V']
    return ['f_t', 'f_r'] if l == 1 else ['f_t', 'f_r', 'H_T']


def component_count(sector: Sector) -> int:
    return len(slots(sector))


def sphere_eigen(operation: SphereOperation, sector: Sector) -> sp.Rational:
    """
    Exact eigenvalue of a sphere operator on the harmonic of a sector.

    Laplacian acts on functions (rank 0), on d Y or V (rank 1) and on the trace-free
    Hessian or symmetric gradient of V (rank 2). The remaining operations act on rank-1
    harmonics; SymGradSplit returns the pure-trace coefficient of the symmetric gradient.

    Raises:
        SectorError: When the operation does not apply to the sector
    """
    lam = sp.Integer(sector.lam)
    op = SphereOperation(operation)
    if op == SphereOperation.LAPLACIAN:
        if sector.rank == 0:
            return lam
        if sector.rank == 1:
            return lam - 1
        if sector.l < 2:
            raise SectorError(f"no trace-free rank-2 harmonic at l={sector.l}")
        return lam - 4
    if sector.rank != 1:
        raise SectorError(f"{op.value} acts on rank-1 harmonics, got {sector}")
    if op == SphereOperation.DIV_OF_SYM_GRAD:
        if sector.parity == Parity.SCALAR:
            return lam - 1
        return (lam - 2) / 2
    if op == SphereOperation.DIV_OF_TRACE_FREE_HESS:
        return (lam - 2) / 2
    if sector.parity == Parity.SCALAR:
        return -lam / 2
    return sp.Integer(0)


def hodge_eigen(sector: Sector) -> sp.Rational:
    """Eigenvalue of the Hodge Laplacian d delta + delta d on a rank-1 harmonic."""
    if sector.rank != 1:
        raise SectorError(f"Hodge eigenvalue is tabulated for rank 1, got {sector}")
    return sp.Integer(sector.lam)


# Symbolic angular calculus shared with the operator engine

THETA = sp.Symbol('theta', positive=True)
Y0, Y1 = sp.symbols('y0 y1')
# Evaluation latitude: sin = 3/5, cos = 4/5
THETA0 = sp.asin(sp.Rational(3, 5))


def harmonic_function(theta=THETA):
    """Abstract axisymmetric harmonic Y(theta) solving the Legendre equation."""
    return sp.Function('Y')(theta)


@lru_cache(maxsize=None)
def legendre_rules(lam: int, max_order: int = 6) -> Dict:
    """
    Rules expressing d^k Y/dtheta^k (k >= 2) through Y and Y'.

    Uses Y'' = -cot(theta) Y' - lam Y.
    """
    Y = harmonic_function()
    second = -sp.cot(THETA) * Y.diff(THETA) - lam * Y
    rules = {2: second}
    current = second
    for k in range(3, max_order + 1):
        current = sp.expand(current.diff(THETA).subs(Y.diff(THETA, 2), second))
        rules[k] = current
    return rules


def reduce_angular(expr, lam: int):
    """Eliminate Y'' and higher, then evaluate at THETA0 with Y -> y0, Y' -> y1."""
    Y = harmonic_function()
    rules = legendre_rules(lam)
    for k in sorted(rules, reverse=True):
        expr = expr.xreplace({sp.Derivative(Y, (THETA, k)): rules[k]})
    expr = expr.xreplace({sp.Derivative(Y, THETA): Y1}).xreplace({Y: Y0})
    s, c = sp.Rational(3, 5), sp.Rational(4, 5)
    expr = expr.xreplace({sp.cot(THETA): c / s, sp.tan(THETA): s / c, sp.csc(THETA): 1 / s,
                          sp.sec(THETA): 1 / c, sp.sin(THETA): s, sp.cos(THETA): c})
    return expr.subs(THETA, THETA0)


def slot_patterns(sector: Sector):
    """
    Angular 4D pattern of each slot, in coordinates (t, r, theta, phi).

    Returns:
        Dict slot -> sympy expression (rank 0), 4-list (rank 1) or 4x4 Matrix (rank 2)
    """
    Y = harmonic_function()
    dY = Y.diff(THETA)
    s, c = sp.sin(THETA), sp.cos(THETA)
    lam = sector.lam
    vphi = -s * dY
    patterns = {}
    for name in slots(sector):
        if sector.rank == 0:
            patterns[name] = Y
            continue
        if sector.rank == 1:
            vec = [0, 0, 0, 0]
            if name == 'w_t':
                vec[0] = Y
            elif name == 'w_r':
                vec[1] = Y
            elif name == 'w_S':
                vec[2] = dY
            elif name == 'w_V':
                vec[3] = vphi
            patterns[name] = vec
            continue
        mat = sp.zeros(4, 4)
        if sector.parity == Parity.SCALAR:
            if name.startswith('ft_'):
                a, b = ('tr'.index(name[3]), 'tr'.index(name[4]))
                mat[a, b] = mat[b, a] = Y
            elif name in ('f_t', 'f_r'):
                a = 'tr'.index(name[2])
                mat[a, 2] = mat[2, a] = dY
            elif name == 'H_L':
                mat[2, 2] = Y
                mat[3, 3] = s ** 2 * Y
            elif name == 'H_T':
                mat[2, 2] = Y.diff(THETA, 2) + sp.Rational(lam, 2) * Y
                mat[3, 3] = s * c * dY + sp.Rational(lam, 2) * s ** 2 * Y
        else:
            if name in ('f_t', 'f_r'):
                a = 'tr'.index(name[2])
                mat[a, 3] = mat[3, a] = vphi
            elif name == 'H_T':
                entry = (vphi.diff(THETA) - 2 * sp.cot(THETA) * vphi) / 2
                mat[2, 3] = mat[3, 2] = entry
        patterns[name] = mat
    return patterns


def _c0(expr):
    return expr.subs({Y0: 1, Y1: 0}) - expr.subs({Y0: 0, Y1: 0})


def _c1(expr):
    return expr.subs({Y0: 0, Y1: 1}) - expr.subs({Y0: 0, Y1: 0})


def project(sector: Sector, comps) -> List:
    """
    Recover the slot coefficients of a sector field from its reduced 4D components.

    Args:
        sector: Output sector
        comps: Components already passed through reduce_angular (linear in y0, y1)

    Returns:
        List of slot coefficients in slots(sector) order
    """
    s, c = sp.Rational(3, 5), sp.Rational(4, 5)
    cot = c / s
    out = []
    for name in slots(sector):
        if sector.rank == 0:
            out.append(_c0(comps))
            continue
        if sector.rank == 1:
            if name == 'w_t':
                out.append(_c0(comps[0]))
            elif name == 'w_r':
                out.append(_c0(comps[1]))
            elif name == 'w_S':
                out.append(_c1(comps[2]))
            else:
                out.append(_c1(comps[3]) / (-s))
            continue
        if sector.parity == Parity.SCALAR:
            if name.startswith('ft_'):
                a, b = ('tr'.index(name[3]), 'tr'.index(name[4]))
                out.append(_c0(comps[a, b]))
            elif name in ('f_t', 'f_r'):
                out.append(_c1(comps[('tr'.index(name[2])), 2]))
            elif name == 'H_L':
                out.append(_c0(comps[2, 2] + comps[3, 3] / s ** 2) / 2)
            else:
                out.append(_c1(comps[3, 3] / s ** 2 - comps[2, 2]) / (2 * cot))
        else:
            if name in ('f_t', 'f_r'):
                out.append(_c1(comps[('tr'.index(name[2])), 3]) / (-s))
            else:
                out.append(_c1(comps[2, 3]) / c)
    return out


@lru_cache(maxsize=None)
def sphere_averages(sector: Sector) -> Dict[str, sp.Rational]:
    """
    Sphere averages of the explicit low-l representatives (Y = 1, Y = cos theta, V = sin^2 theta dphi).

    Returns:
        'Y2': avg Y^2, 'dY2': avg |dY|^2, 'V2': avg |V|^2 (absent entries are 0)
    """
    if sector.l > 1:
        raise SectorError(f"explicit representatives are fixed for l <= 1, got {sector}")
    th = sp.Symbol('th')

    def avg(f):
        return sp.integrate(f * sp.sin(th), (th, 0, sp.pi)) / 2

    if sector.parity == Parity.SCALAR:
        if sector.l == 0:
            return {'Y2': sp.Integer(1), 'dY2': sp.Integer(0), 'V2': sp.Integer(0)}
        return {'Y2': avg(sp.cos(th) ** 2), 'dY2': avg(sp.sin(th) ** 2), 'V2': sp.Integer(0)}
    return {'Y2': sp.Integer(0), 'dY2': sp.Integer(0), 'V2': avg(sp.sin(th) ** 2)}


# Explicit representatives on grids

def rotation_one_form(axis, theta, phi) -> Tuple[np.ndarray, np.ndarray]:
    """
    Components (V_theta, V_phi) of the l = 1 vector harmonic generated by rotation about axis.

    The z-axis gives sin^2(theta) dphi.
    """
    ax = np.asarray(axis, dtype=float)
    st, ct = np.sin(theta), np.cos(theta)
    sp_, cp = np.sin(phi), np.cos(phi)
    x = np.stack([st * cp, st * sp_, ct * np.ones_like(phi)])
    rot = np.cross(ax, x, axis=0)
    e_theta = np.stack([ct * cp, ct * sp_, -st * np.ones_like(phi)])
    e_phi = np.stack([-st * sp_, st * cp, np.zeros_like(st * cp)])
    return np.sum(rot * e_theta, axis=0), np.sum(rot * e_phi, axis=0)


def sphere_inner_product(axis1, axis2, n: int = 48) -> float:
    """Sphere average of the inverse round metric on two rotation 1-forms."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    theta = np.arccos(nodes)
    phi = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
    T, P = np.meshgrid(theta, phi, indexing='ij')
    a_th, a_ph = rotation_one_form(axis1, T, P)
    b_th, b_ph = rotation_one_form(axis2, T, P)
    integrand = a_th * b_th + a_ph * b_ph / np.sin(T) ** 2
    return float(np.sum(weights[:, None] * integrand) / (2 * len(phi)))


# Finite-difference sphere calculus on callables (theta, phi) -> components

def _christoffel(theta: np.ndarray) -> np.ndarray:
    """Gamma^a_bc of the round metric d theta^2 + sin^2 theta d phi^2."""
    s, c = np.sin(theta), np.cos(theta)
    gam = np.zeros((2, 2, 2) + theta.shape)
    gam[0, 1, 1] = -s * c
    gam[1, 0, 1] = gam[1, 1, 0] = c / s
    return gam


def _nabla(field: Callable, h: float) -> Callable:
    """Covariant derivative by centred half-step differences; the new index comes first."""

    def out(theta, phi):
        centre = field(theta, phi)
        rank = centre.ndim - theta.ndim
        d_theta = (field(theta + h / 2, phi) - field(theta - h / 2, phi)) / h
        d_phi = (field(theta, phi + h / 2) - field(theta, phi - h / 2)) / h
        result = np.stack([d_theta, d_phi])
        gam = _christoffel(theta)
        for idx in itertools.product(range(2), repeat=rank):
            for c in range(2):
                for j in range(rank):
                    for d in range(2):
                        swapped = idx[:j] + (d,) + idx[j + 1:]
                        result[(c,) + idx] -= gam[d, c, idx[j]] * centre[swapped]
        return result

    return out


def _contract(tensor: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Trace over the first two indices with the inverse round metric."""
    return tensor[0, 0] + tensor[1, 1] / np.sin(theta) ** 2


def _div(field: Callable, h: float) -> Callable:
    return lambda theta, phi: -_contract(_nabla(field, h)(theta, phi), theta)


def _rough_laplacian(field: Callable, h: float) -> Callable:
    return lambda theta, phi: -_contract(_nabla(_nabla(field, h), h)(theta, phi), theta)


def _sym_grad(field: Callable, h: float) -> Callable:
    def out(theta, phi):
        t = _nabla(field, h)(theta, phi)
        return (t + np.swapaxes(t, 0, 1)) / 2
    return out


def _round_metric(theta: np.ndarray) -> np.ndarray:
    g = np.zeros((2, 2) + theta.shape)
    g[0, 0] = 1.0
    g[1, 1] = np.sin(theta) ** 2
    return g


def _trace_free(field: Callable) -> Callable:
    def out(theta, phi):
        t = field(theta, phi)
        return t - _round_metric(theta) * _contract(t, theta) / 2
    return out


def _half_trace(field: Callable) -> Callable:
    return lambda theta, phi: _contract(field(theta, phi), theta) / 2


def _harmonic_identities(l: int, m: int, h: float) -> Dict[str, Tuple[Callable, Callable, Callable]]:
    """Identity name -> (lhs, rhs, operand) for the real harmonic P_l^m(cos theta) cos(m phi)."""
    nodes = np.cos(np.linspace(0, np.pi, 257))
    scale = 1.0 / np.max(np.abs(lpmv(m, l, nodes)))

    def Y(theta, phi):
        return scale * lpmv(m, l, np.cos(theta)) * np.cos(m * phi)

    def eigen(op, sector):
        return float(sphere_eigen(op, sector))

    def times(value, field):
        return lambda theta, phi: value * field(theta, phi)

    lap = SphereOperation.LAPLACIAN
    identities = {'laplacian': (_rough_laplacian(Y, h), times(eigen(lap, scalar(l)), Y), Y)}
    if l == 0:
        return identities

    dY = _nabla(Y, h)

    def V(theta, phi):
        # Hodge dual of dY; the axisymmetric case is -sin(theta) Y' dphi
        grad = dY(theta, phi)
        s = np.sin(theta)
        return np.stack([grad[1] / s, -s * grad[0]])

    hess_0 = _trace_free(_sym_grad(dY, h))
    sym_v = _sym_grad(V, h)
    identities.update({
        'laplacian_one_form': (_rough_laplacian(dY, h), times(eigen(lap, scalar(l, 1)), dY), dY),
        'laplacian_vector': (_rough_laplacian(V, h), times(eigen(lap, vector(l)), V), V),
        'div_vector': (_div(V, h), lambda theta, phi: np.zeros_like(theta), V),
        'div_sym_grad_scalar': (_div(_sym_grad(dY, h), h),
                                times(eigen(SphereOperation.DIV_OF_SYM_GRAD, scalar(l, 1)), dY), dY),
        'div_sym_grad_vector': (_div(sym_v, h),
                                times(eigen(SphereOperation.DIV_OF_SYM_GRAD, vector(l)), V), V),
        'div_trace_free_hess': (_div(hess_0, h),
                                times(eigen(SphereOperation.DIV_OF_TRACE_FREE_HESS, scalar(l, 1)), dY), dY),
        'sym_grad_split_scalar': (_half_trace(_sym_grad(dY, h)),
                                  times(eigen(SphereOperation.SYM_GRAD_SPLIT, scalar(l, 1)), Y), Y),
        'sym_grad_split_vector': (_half_trace(sym_v), lambda theta, phi: np.zeros_like(theta), V),
    })
    if l >= 2:
        lam2 = eigen(lap, scalar(l, 2))
        identities['laplacian_trace_free'] = (_rough_laplacian(hess_0, h), times(lam2, hess_0), hess_0)
        identities['laplacian_trace_free_vector'] = (_rough_laplacian(sym_v, h), times(lam2, sym_v), sym_v)
    return identities


def verify_sphere_identities(l: int, n: int = 64) -> Dict[str, float]:
    """
    Check the sphere eigenvalue relations on a latitude-longitude grid.

    Every real harmonic P_l^m(cos theta) cos(m phi), 0 <= m <= l, its gradient dY and
    its Hodge dual V are differentiated with second-order centred differences of step
    pi/n in both angles. Latitudes with sin(theta) < 1/2 are excluded.

    Args:
        l: Degree in {0, 1, 2, 3}
        n: Number of latitude cells (at least 32)

    Returns:
        Dict identity -> max over m and the grid of |lhs - rhs| / max |operand|;
        'grad_constant' is the absolute size of dY at l = 0
    """
    if l not in (0, 1, 2, 3):
        raise SectorError(f"grid representatives exist for l <= 3, got {l}")
    if n < 32:
        raise SectorError(f"grid resolution must be at least 32, got {n}")
    h = np.pi / n
    theta = (np.arange(n) + 0.5) * h
    theta = theta[np.sin(theta) >= 0.5]
    phi = np.arange(2 * n) * h
    T, P = np.meshgrid(theta, phi, indexing='ij')

    residuals: Dict[str, float] = {}
    for m in range(l + 1):
        for name, (lhs, rhs, operand) in _harmonic_identities(l, m, h).items():
            size = float(np.max(np.abs(operand(T, P))))
            value = float(np.max(np.abs(lhs(T, P) - rhs(T, P)))) / size
            residuals[name] = max(residuals.get(name, 0.0), value)
    if l == 0:
        constant = _nabla(lambda t, p: lpmv(0, 0, np.cos(t)) * np.cos(0 * p), h)
        residuals['grad_constant'] = float(np.max(np.abs(constant(T, P))))

    logger.debug(f"sphere identities l={l} n={n}: {residuals}")
    return residuals
