"""
Closed-form zero modes, generalized zero modes and dual states of the Schwarzschild
operators, with residual verification against the assembled radial operators.

All entries live in the ingoing null chart (t_0, r) with the t_0 time function.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from .background import (BlackHoleParams, TimeFunctionKind, box_one_form_numeric, kerr_one_forms,
                         regularized_one_form)
from .errors import DomainError, SectorError
from .harmonics import Sector, scalar, slots, vector
from .radial_ops import (RadialOperator, RadialProfile, apply, box, commutator, constraint_prop,
                         gauge_fixed, grid, lin_ric, sym_grad, trace_reversal)
from .tools.covariant import M, R
from .tools.finite_diff import SCHEME_ORDERS

logger = logging.getLogger(__name__)

CHART = 'null0'
GAUGE = TimeFunctionKind.NULL0


class Growth(Enum):
    STATIONARY = 'Stationary'
    LINEAR_IN_T = 'LinearInT'


@dataclass(frozen=True)
class HorizonDelta:
    """coefficients[slot] * delta^(order)(r - 2m) in the listed slots."""

    order: int
    coefficients: Dict[str, sp.Expr]

    def to_dict(self) -> Dict:
        return {'order': self.order, 'coefficients': {k: str(v) for k, v in self.coefficients.items()}}


@dataclass(frozen=True)
class ModeCatalogEntry:
    """
    A cataloged mode h = t_0 * linear + profile (linear is None for stationary entries).

    Dual entries carry their smooth part r > 2m in `profile` and the horizon-supported
    part in `distributional`; `operator` names the operator whose kernel (or formal
    adjoint kernel) the entry belongs to.
    """

    name: str
    sector: Sector
    growth: Growth
    profile: RadialProfile
    operator: str
    linear: Optional[RadialProfile] = None
    dual: bool = False
    distributional: Optional[HorizonDelta] = None
    decay: Optional[float] = None
    potential: Optional[str] = None
    note: str = ''

    @property
    def rank(self) -> int:
        return self.sector.rank

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'sector': str(self.sector),
            'growth': self.growth.value,
            'operator': self.operator,
            'dual': self.dual,
            'slots': list(self.profile.slots),
            'profile': [str(e) for e in self.profile.closed_form],
            'linear': None if self.linear is None else [str(e) for e in self.linear.closed_form],
            'distributional': None if self.distributional is None else self.distributional.to_dict(),
            'potential': self.potential,
        }


@dataclass(frozen=True)
class KerrEntry:
    """Stationary Kerr 1-form given pointwise in Boyer-Lindquist components."""

    name: str
    form: Callable
    params: BlackHoleParams


# ---- symbolic building blocks ----

def _profile(sector: Sector, exprs: Sequence) -> RadialProfile:
    return RadialProfile.closed(sector, exprs, time_gauge=GAUGE, chart=CHART)


def _symbolic_params() -> BlackHoleParams:
    return BlackHoleParams(1.0)


def _apply(op: RadialOperator, exprs: Sequence) -> List[sp.Expr]:
    return [sp.simplify(e) for e in op.apply_symbolic(exprs, sigma=0)]


def _comm(op: RadialOperator, exprs: Sequence) -> List[sp.Expr]:
    return [sp.simplify(e) for e in commutator(op, 1).apply_symbolic(exprs)]


def boost_potential():
    """G(r) = 2m (2m + (m - r) log(r/m)) of the l = 1 boost correction."""
    return 2 * M * (2 * M + (M - R) * sp.log(R / M))


def one_forms() -> Dict[str, Tuple[Sector, List]]:
    """Closed-form 1-form slot expressions (w_t, w_r[, w_S]) or (w_V,)."""
    mu = 1 - 2 * M / R
    G = boost_potential()
    log_ratio = sp.log(R / (2 * M))
    return {
        'omega_s0': (scalar(0, 1), [1 / R, -1 / R]),
        'dt_flat': (scalar(0, 1), [mu, -1]),
        'omega_s1': (scalar(1, 1), [0, 1, R - M]),
        'omega1_s1': (scalar(1, 1), [R * mu, -R, 0]),
        'omega_v1': (vector(1, 1), [R ** 2]),
        'omega_breve_s0': (scalar(0, 1), [-log_ratio,
                                          R * log_ratio / (R - 2 * M) + (1 + 2 * M / R) / 2]),
        'omega_breve_s1': (scalar(1, 1), [3 * M - R, M + sp.diff(G, R), -R * (R - M) + G]),
    }


def linearized_schwarzschild(mdot, adot) -> Dict[str, List]:
    """
    Slot data of the linearized metric g_dot^0(mdot, adot) in the null chart.

    Returns:
        {'scalar': l = 0 rank-2 slots, 'vector': l = 1 rank-2 slots}
    """
    return {
        'scalar': [-2 * sp.sympify(mdot) / R, 0, 0, 0],
        'vector': [2 * M * sp.sympify(adot) / R, sp.sympify(adot)],
    }


@lru_cache(maxsize=None)
def _rank2_data() -> Dict[str, Tuple[List, Optional[List]]]:
    """Rank-2 closed forms (profile, linear part) computed from the 1-forms."""
    p = _symbolic_params()
    forms = one_forms()
    sg0 = sym_grad(p, scalar(0, 1), chart=CHART)
    sg1 = sym_grad(p, scalar(1, 1), chart=CHART)
    tr1 = trace_reversal(p, scalar(1, 2), chart=CHART)

    h_s0 = _apply(sg0, forms['omega_s0'][1])
    h_s1 = _apply(sg1, forms['omega_s1'][1])
    gdot = linearized_schwarzschild(sp.Rational(-1, 4), 0)['scalar']
    breve_s0 = [a + b + c for a, b, c in zip(gdot, _apply(sg0, forms['omega_breve_s0'][1]),
                                             _comm(sg0, forms['omega_s0'][1]))]
    breve_s1 = [a + b for a, b in zip(_apply(sg1, forms['omega_breve_s1'][1]),
                                      _comm(sg1, forms['omega_s1'][1]))]
    # G delta^* of the smooth tail (0, 1, r - m) of d((r - m) H)
    h_s1_dual = [sp.simplify(e) for e in tr1.apply_symbolic(h_s1, sigma=0)]
    return {
        'h_s0': (h_s0, None),
        'h_s1': (h_s1, None),
        'h_hat_s0': (breve_s0, h_s0),
        'h_hat_s1': (breve_s1, h_s1),
        'h_s1_dual': (h_s1_dual, None),
    }


# ---- the catalog ----

def catalog(params: BlackHoleParams) -> List:
    """
    Zero modes and dual states at params.

    For spin > 0 only the explicit Kerr 1-forms are returned; they are verified pointwise.
    """
    if params.spin != 0:
        return [KerrEntry(name, form, params) for name, form in kerr_one_forms(params).items()]

    forms = one_forms()
    rank2 = _rank2_data()
    s0_2, s1_2, v1_2 = scalar(0, 2), scalar(1, 2), vector(1, 2)
    entries = [
        ModeCatalogEntry('u_s0', scalar(0), Growth.STATIONARY, _profile(scalar(0), [1]), 'box', decay=0),
        ModeCatalogEntry('u_s0_dual', scalar(0), Growth.STATIONARY, _profile(scalar(0), [1]), 'box',
                         dual=True, note='Heaviside H(r - 2m)'),
        ModeCatalogEntry('u_s1', scalar(1), Growth.STATIONARY, _profile(scalar(1), [R - M]), 'box', decay=-1),
        ModeCatalogEntry('u_s1_dual', scalar(1), Growth.STATIONARY, _profile(scalar(1), [R - M]), 'box',
                         dual=True, note='(r - m) H(r - 2m)'),
    ]
    for name in ('omega_s0', 'dt_flat', 'omega_s1', 'omega1_s1', 'omega_v1'):
        sector, exprs = forms[name]
        entries.append(ModeCatalogEntry(name, sector, Growth.STATIONARY, _profile(sector, exprs),
                                        'constraint_prop', decay={'omega_s0': 1}.get(name)))
    entries += [
        ModeCatalogEntry('omega_s0_dual', scalar(0, 1), Growth.STATIONARY, _profile(scalar(0, 1), [0, 0]),
                         'constraint_prop', dual=True, distributional=HorizonDelta(0, {'w_r': sp.Integer(1)})),
        ModeCatalogEntry('omega_s1_dual', scalar(1, 1), Growth.STATIONARY,
                         _profile(scalar(1, 1), [0, 1, R - M]), 'constraint_prop', dual=True,
                         distributional=HorizonDelta(0, {'w_r': M})),
        ModeCatalogEntry('omega_v1_dual', vector(1, 1), Growth.STATIONARY, _profile(vector(1, 1), [R ** 2]),
                         'constraint_prop', dual=True, note='r^2 V H(r - 2m)'),
        ModeCatalogEntry('omega_hat_s1', scalar(1, 1), Growth.LINEAR_IN_T,
                         _profile(scalar(1, 1), forms['omega_breve_s1'][1]), 'box',
                         linear=_profile(scalar(1, 1), forms['omega_s1'][1])),
        ModeCatalogEntry('h_s0', s0_2, Growth.STATIONARY, _profile(s0_2, rank2['h_s0'][0]), 'gauge_fixed',
                         decay=2),
        ModeCatalogEntry('h_s1', s1_2, Growth.STATIONARY, _profile(s1_2, rank2['h_s1'][0]), 'gauge_fixed'),
        # 4m omega_s0 (x)_s V with V = sin^2(theta) dphi
        ModeCatalogEntry('h_v1', v1_2, Growth.STATIONARY, _profile(v1_2, [2 * M / R, -2 * M / R]),
                         'gauge_fixed', decay=2),
        ModeCatalogEntry('h_hat_s0', s0_2, Growth.LINEAR_IN_T, _profile(s0_2, rank2['h_hat_s0'][0]),
                         'gauge_fixed', linear=_profile(s0_2, rank2['h_hat_s0'][1])),
        ModeCatalogEntry('h_hat_s1', s1_2, Growth.LINEAR_IN_T, _profile(s1_2, rank2['h_hat_s1'][0]),
                         'gauge_fixed', linear=_profile(s1_2, rank2['h_hat_s1'][1])),
        ModeCatalogEntry('g_dot_mass', s0_2, Growth.STATIONARY,
                         _profile(s0_2, linearized_schwarzschild(1, 0)['scalar']), 'lin_ric'),
        ModeCatalogEntry('g_dot_spin', v1_2, Growth.STATIONARY,
                         _profile(v1_2, linearized_schwarzschild(0, 1)['vector']), 'lin_ric'),
        ModeCatalogEntry('h_s0_dual', s0_2, Growth.STATIONARY, _profile(s0_2, [0, 0, 0, 0]), 'gauge_fixed',
                         dual=True, potential='omega_s0_dual', note='G delta^* omega_s0_dual',
                         distributional=HorizonDelta(1, {'ft_rr': sp.Integer(1)})),
        ModeCatalogEntry('h_s1_dual', s1_2, Growth.STATIONARY, _profile(s1_2, rank2['h_s1_dual'][0]),
                         'gauge_fixed', dual=True, potential='omega_s1_dual', note='G delta^* omega_s1_dual',
                         distributional=HorizonDelta(1, {'ft_rr': M})),
        # slot coefficient 4m^2/3: pairs with [L, t_0] h_v1 to -2 (vol S^2)^-1 <V, V'>
        ModeCatalogEntry('h_v1_dual', v1_2, Growth.STATIONARY, _profile(v1_2, [0, 0]), 'gauge_fixed',
                         dual=True, distributional=HorizonDelta(0, {'f_r': sp.Rational(4, 3) * M ** 2})),
    ]
    logger.debug(f"Catalog holds {len(entries)} entries")
    return entries


def entry(params: BlackHoleParams, name: str):
    for e in catalog(params):
        if e.name == name:
            return e
    raise SectorError(f"no catalog entry named '{name}'")


# ---- verification ----

def operator_for(kind: str, params: BlackHoleParams, sector: Sector, gamma: float = 0.0,
                 v: float = 2.0, adjoint: bool = False) -> RadialOperator:
    """
    Assemble the named operator on the entry's sector in the null chart (sigma symbolic).

    With adjoint=True the gauge-fixed operator is replaced by its formal adjoint G L G
    (valid at gamma = 0); box and constraint propagation are self-adjoint there.
    """
    if adjoint and kind == 'gauge_fixed':
        if gamma != 0:
            raise DomainError("closed-form adjoint is only available at gamma = 0")
        tr = trace_reversal(params, sector, chart=CHART)
        return tr @ gauge_fixed(params, sector, chart=CHART) @ tr
    if kind == 'box':
        return box(params, sector.rank, sector, chart=CHART)
    if kind == 'constraint_prop':
        return constraint_prop(params, sector, gamma=gamma, v=v, chart=CHART)
    if kind == 'gauge_fixed':
        return gauge_fixed(params, sector, gamma=gamma, v=v, chart=CHART)
    if kind == 'lin_ric':
        return lin_ric(params, sector, chart=CHART)
    raise SectorError(f"unknown operator kind '{kind}'")


def _check_operator(entry_: ModeCatalogEntry, op: RadialOperator):
    if tuple(op.slots_in) != tuple(entry_.profile.slots):
        raise SectorError(f"{op.name} acts on {op.slots_in}, entry {entry_.name} has {entry_.profile.slots}")


def _verify_grid(params: BlackHoleParams, points: int) -> np.ndarray:
    return grid(params, points, r_min=2 * params.mass * (1 + 1e-3), r_max=100 * params.mass)


def _residual(op: RadialOperator, entry_: ModeCatalogEntry, scheme: str, r: np.ndarray) -> Tuple[float, ...]:
    """(stationary residual of the t-coefficient, residual of the t^0 equation), both normalized."""
    comm = commutator(op, 1)
    h0 = entry_.profile
    norm0 = np.max(np.abs(h0.sample(op.params, r)))
    if entry_.linear is None:
        out = apply(op, h0, scheme, 0.0, r).values
        return (float(np.max(np.abs(out)) / norm0) if norm0 else float(np.max(np.abs(out))),)
    h1 = entry_.linear
    norm1 = np.max(np.abs(h1.sample(op.params, r)))
    first = apply(op, h1, scheme, 0.0, r).values
    second = apply(op, h0, scheme, 0.0, r).values + apply(comm, h1, scheme, 0.0, r).values
    scale = max(norm0, norm1)
    return float(np.max(np.abs(first)) / norm1), float(np.max(np.abs(second)) / scale)


def verify_stationary(entry_: ModeCatalogEntry, params: BlackHoleParams, operator: Optional[str] = None,
                      gamma: float = 0.0, v: float = 2.0, scheme: str = 'ClosedFormDiff',
                      points: int = 200) -> Dict:
    """
    Normalized residual max|L(0) h| / max|h| of a stationary entry.

    Finite-difference schemes also report the observed order from two refinements.
    """
    if entry_.growth != Growth.STATIONARY:
        raise SectorError(f"{entry_.name} grows linearly in t; use verify_generalized")
    kind = operator or entry_.operator
    op = operator_for(kind, params, entry_.sector, gamma, v, adjoint=entry_.dual)
    _check_operator(entry_, op)
    r = _verify_grid(params, points)
    residual = _residual(op, entry_, scheme, r)[0]
    order = None
    if scheme in SCHEME_ORDERS:
        finer = [_residual(op, entry_, scheme, _verify_grid(params, points * 2 ** k))[0] for k in (1, 2)]
        if finer[0] > 0 and finer[1] > 0:
            order = float(np.log2(finer[0] / finer[1]))
    mark = '✓' if residual < 1e-8 or scheme != 'ClosedFormDiff' else '✗'
    logger.info(f"{mark} {entry_.name} vs {kind} ({scheme}): residual {residual:.2e}")
    return {'entry': entry_.name, 'operator': kind, 'scheme': scheme, 'gamma': gamma,
            'residual': residual, 'order_estimate': order}


def verify_generalized(entry_: ModeCatalogEntry, params: BlackHoleParams, gamma: float = 0.0,
                       v: float = 2.0, scheme: str = 'ClosedFormDiff', points: int = 200) -> Dict:
    """
    Residuals of L(0) h_1 = 0 and L(0) h_0 = -[L, t_0] h_1 for h = t_0 h_1 + h_0.

    Stationary entries are treated as h_1 = 0.
    """
    op = operator_for(entry_.operator, params, entry_.sector, gamma, v, adjoint=entry_.dual)
    _check_operator(entry_, op)
    r = _verify_grid(params, points)
    res = _residual(op, entry_, scheme, r)
    if len(res) == 1:
        res = (0.0, res[0])
    logger.info(f"{'✓' if max(res) < 1e-6 else '✗'} {entry_.name}: residuals {res[0]:.2e}, {res[1]:.2e}")
    return {'entry': entry_.name, 'operator': entry_.operator, 'scheme': scheme, 'gamma': gamma,
            'residual_linear': res[0], 'residual': res[1], 'order_estimate': None}


def verify_pointwise_kerr(entry_: KerrEntry, points: Sequence[Tuple[float, float]],
                          h: float = 1e-3) -> Dict:
    """
    Residual of the Kerr 1-form wave operator at sample points (r, theta), relative to |omega|.

    Also reports the observed finite-difference order from steps 2e-2 and 1e-2.

    Raises:
        DomainError: For a point inside the horizon or on the axis
    """
    params = entry_.params
    residuals = []
    for r, theta in points:
        if r <= params.horizon_radius:
            raise DomainError(f"point r={r} lies inside the horizon r_b={params.horizon_radius}")
        if np.sin(theta) < 1e-3:
            raise DomainError(f"point theta={theta} is too close to the axis")
        size = max(np.max(np.abs(entry_.form(r, theta))), 1e-300)
        residuals.append(np.max(np.abs(box_one_form_numeric(params, entry_.form, r, theta, h))) / size)
    r0, th0 = points[0]
    coarse = [np.max(np.abs(box_one_form_numeric(params, entry_.form, r0, th0, step))) for step in (2e-2, 1e-2)]
    order = float(np.log2(coarse[0] / coarse[1])) if coarse[1] > 0 else None
    return {'entry': entry_.name, 'operator': 'box_kerr', 'scheme': 'FD4-pointwise',
            'residual': float(max(residuals)), 'order_estimate': order}


def kerr_reduction_residual(params: BlackHoleParams, r_samples: Sequence[float] = (3.0, 5.0, 10.0)) -> float:
    """
    At zero spin, omega0_2 + r_b omega0_1 in the null chart against r^-1 (dt_0 - dr).
    """
    if params.spin != 0:
        raise DomainError("reduction check is defined at zero spin")
    forms = kerr_one_forms(params)
    worst = 0.0
    for r in r_samples:
        r = r * params.mass
        reg = regularized_one_form(params, forms['omega0_s0'](r, np.pi / 3), r)
        worst = max(worst, float(np.max(np.abs(reg[:2] - np.array([1 / r, -1 / r])))) * r)
    return worst


def decay_exponent(entry_: ModeCatalogEntry, params: BlackHoleParams,
                   r_range: Tuple[float, float] = (1e3, 1e4)) -> float:
    """
    Log-slope of the largest frame-normalized component between the two radii.

    Angular slots are scaled by r^-1 per angular index.
    """
    scale = {'w_S': 1, 'w_V': 1, 'f_t': 1, 'f_r': 1, 'H_L': 2, 'H_T': 2}
    r = np.array(r_range) * params.mass
    vals = entry_.profile.sample(params, r)
    weights = np.array([r ** -scale.get(s, 0) for s in entry_.profile.slots])
    size = np.max(np.abs(vals) * weights, axis=0)
    return float(np.log(size[1] / size[0]) / np.log(r[1] / r[0]))
