"""
Radial operator algebra for harmonic sectors of the Schwarzschild exterior.

Every stationary geometric operator is restricted to a sector with the time
dependence exp(-i sigma t) and represented as a matrix ODE operator
sum_n A_n(r; sigma) d^n/dr^n acting on the sector's slot coefficients.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from .background import (BlackHoleParams, Cutoff, TimeFunctionKind, damping_cutoff,
                         time_function_curvature, time_function_slope)
from .errors import DomainError, SectorError
from .harmonics import Parity, Sector, project, reduce_angular, slot_patterns, slots
from .tools.covariant import CHI_C, GAMMA, M, R, SIGMA, VEL, mu_expr, spacetime, zeros
from .tools.finite_diff import diff_matrices, geometric_grid

logger = logging.getLogger(__name__)

SCHEMES = ('FD2', 'FD4', 'ClosedFormDiff')

HAT_SLOTS = {0: ['u'], 1: ['w_t', 'w_r'], 2: ['ft_tt', 'ft_tr', 'ft_rr']}

CHART_GAUGE = {'static': TimeFunctionKind.STATIC, 'null0': TimeFunctionKind.NULL0}

# d(tau - t)/dr and its derivative; the cutoff-based gauges are resolved numerically
_TAU1 = {
    TimeFunctionKind.STATIC: sp.Integer(0),
    TimeFunctionKind.NULL0: 1 / mu_expr(),
    TimeFunctionKind.STAR: sp.Function('tau_star_1')(R),
    TimeFunctionKind.CHI_REGULAR: sp.Function('tau_chi_1')(R),
}
_TAU2 = {
    TimeFunctionKind.STATIC: sp.Integer(0),
    TimeFunctionKind.NULL0: -(2 * M / R ** 2) / mu_expr() ** 2,
    TimeFunctionKind.STAR: sp.Function('tau_star_2')(R),
    TimeFunctionKind.CHI_REGULAR: sp.Function('tau_chi_2')(R),
}


def _namespace(params: BlackHoleParams, cutoff: Optional[Cutoff]) -> Dict[str, Callable]:
    cut = cutoff or damping_cutoff(params)
    return {
        'chi_c': lambda r: cut(r),
        'chi_c1': lambda r: cut(r, 1),
        'chi_c2': lambda r: cut(r, 2),
        'tau_star_1': time_function_slope(TimeFunctionKind.STAR, params),
        'tau_star_2': time_function_curvature(TimeFunctionKind.STAR, params),
        'tau_chi_1': time_function_slope(TimeFunctionKind.CHI_REGULAR, params),
        'tau_chi_2': time_function_curvature(TimeFunctionKind.CHI_REGULAR, params),
    }


_CUTOFF_DERIVS = {1: sp.Function('chi_c1'), 2: sp.Function('chi_c2')}


def numeric_ready(expr):
    """Replace r-derivatives of the damping cutoff by named functions known to the namespace."""
    expr = sp.sympify(expr)
    rule = {}
    for d in expr.atoms(sp.Derivative):
        if d.expr == CHI_C(R):
            order = sum(c for v, c in d.variable_count if v == R)
            rule[d] = _CUTOFF_DERIVS[order](R)
    return expr.xreplace(rule) if rule else expr


def _broadcast(func: Callable, r: np.ndarray, sigma) -> np.ndarray:
    value = np.asarray(func(r, sigma), dtype=complex)
    return np.broadcast_to(value, r.shape).astype(complex)


@dataclass(frozen=True)
class RadialProfile:
    """
    Restriction of a mode to a sector: closed-form slot expressions in r or samples on a grid.

    Closed forms may contain the mass symbol; it is replaced by params.mass when sampled.
    """

    slots: Tuple[str, ...]
    time_gauge: TimeFunctionKind = TimeFunctionKind.STATIC
    chart: str = 'static'
    closed_form: Optional[Tuple] = None
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    sector: Optional[Sector] = None

    def __post_init__(self):
        if self.closed_form is None and self.values is None:
            raise SectorError("profile needs a closed form or sampled values")
        if self.closed_form is not None and len(self.closed_form) != len(self.slots):
            raise SectorError(f"closed form has {len(self.closed_form)} components, "
                              f"expected {len(self.slots)}")
        if self.values is not None:
            if self.grid is None or np.any(np.diff(self.grid) <= 0):
                raise SectorError("sampled profile needs a strictly increasing grid")
            if self.values.shape != (len(self.slots), len(self.grid)):
                raise SectorError(f"sample shape {self.values.shape} does not match slots/grid")

    @classmethod
    def closed(cls, sector: Sector, exprs: Sequence, time_gauge=TimeFunctionKind.STATIC,
               chart: str = 'static') -> 'RadialProfile':
        return cls(tuple(slots(sector)), time_gauge, chart,
                   closed_form=tuple(sp.sympify(e) for e in exprs), sector=sector)

    def sample(self, params: BlackHoleParams, grid: Optional[np.ndarray] = None) -> np.ndarray:
        """Component values on a grid, shape (n_slots, n_grid)."""
        if self.closed_form is None:
            if grid is not None and not np.array_equal(grid, self.grid):
                raise SectorError("sampled profile cannot be resampled on a different grid")
            return self.values
        grid = self.grid if grid is None else grid
        if grid is None:
            raise SectorError("closed-form profile needs a grid to sample on")
        out = np.empty((len(self.slots), len(grid)), dtype=complex)
        for i, expr in enumerate(self.closed_form):
            func = sp.lambdify(R, sp.sympify(expr).subs(M, params.mass), 'numpy')
            out[i] = np.broadcast_to(np.asarray(func(grid), dtype=complex), grid.shape)
        return out

    def derivative(self, n: int) -> 'RadialProfile':
        if self.closed_form is None:
            raise SectorError("symbolic derivative needs a closed-form profile")
        return replace(self, closed_form=tuple(sp.diff(e, R, n) for e in self.closed_form))


@dataclass(frozen=True)
class RadialOperator:
    """
    sum_n A_n(r; sigma) d^n/dr^n between slot systems.

    Coefficients are sympy matrices in r, sigma and the background symbols; `values`
    fixes mass, damping strength and damping velocity.
    """

    name: str
    slots_in: Tuple[str, ...]
    slots_out: Tuple[str, ...]
    coefficients: Tuple[sp.Matrix, ...]
    params: BlackHoleParams
    time_gauge: TimeFunctionKind = TimeFunctionKind.STATIC
    chart: str = 'static'
    sector_in: Optional[Sector] = None
    sector_out: Optional[Sector] = None
    gamma: float = 0.0
    v: float = 2.0
    cutoff: Optional[Cutoff] = field(default=None, compare=False)

    def __post_init__(self):
        for A in self.coefficients:
            if A.shape != (len(self.slots_out), len(self.slots_in)):
                raise SectorError(f"coefficient shape {A.shape} does not match "
                                  f"{len(self.slots_out)}x{len(self.slots_in)}")

    @property
    def order(self) -> int:
        for n in range(len(self.coefficients) - 1, -1, -1):
            if any(sp.simplify(x) != 0 for x in self.coefficients[n]):
                return n
        return 0

    @property
    def values(self) -> Dict:
        return {M: self.params.mass, GAMMA: self.gamma, VEL: self.v}

    def coefficient(self, n: int) -> sp.Matrix:
        if n < len(self.coefficients):
            return self.coefficients[n]
        return sp.zeros(len(self.slots_out), len(self.slots_in))

    def _check_compatible(self, other: 'RadialOperator'):
        if self.time_gauge != other.time_gauge or self.chart != other.chart:
            raise SectorError(f"time gauge/chart mismatch: {self.time_gauge.value}/{self.chart} "
                              f"vs {other.time_gauge.value}/{other.chart}")

    def _combine(self, other: 'RadialOperator', sign: int, name: str) -> 'RadialOperator':
        self._check_compatible(other)
        if self.slots_in != other.slots_in or self.slots_out != other.slots_out:
            raise SectorError(f"cannot add operators on {self.slots_in}->{self.slots_out} "
                              f"and {other.slots_in}->{other.slots_out}")
        size = max(len(self.coefficients), len(other.coefficients))
        coeffs = tuple(self.coefficient(n) + sign * other.coefficient(n) for n in range(size))
        return replace(self, name=name, coefficients=coeffs)

    def __add__(self, other):
        return self._combine(other, 1, f"({self.name} + {other.name})")

    def __sub__(self, other):
        return self._combine(other, -1, f"({self.name} - {other.name})")

    def __mul__(self, scalar):
        return replace(self, name=f"{scalar}*{self.name}",
                       coefficients=tuple(sp.sympify(scalar) * A for A in self.coefficients))

    __rmul__ = __mul__

    def __matmul__(self, other: 'RadialOperator') -> 'RadialOperator':
        """Composition self o other."""
        self._check_compatible(other)
        if self.slots_in != other.slots_out:
            raise SectorError(f"cannot compose: {self.name} expects {self.slots_in}, "
                              f"{other.name} returns {other.slots_out}")
        size = len(self.coefficients) + len(other.coefficients) - 1
        coeffs = [sp.zeros(len(self.slots_out), len(other.slots_in)) for _ in range(size)]
        for n, A in enumerate(self.coefficients):
            for m, B in enumerate(other.coefficients):
                for j in range(n + 1):
                    dB = B.diff(R, n - j) if n - j else B
                    coeffs[j + m] += comb(n, j) * A * dB
        return replace(self, name=f"{self.name}@{other.name}", slots_in=other.slots_in,
                       sector_in=other.sector_in, coefficients=tuple(coeffs))

    def at(self, sigma) -> 'RadialOperator':
        """Fix the spectral parameter."""
        return replace(self, coefficients=tuple(A.subs(SIGMA, sigma) for A in self.coefficients))

    def numeric(self, n: int) -> sp.Matrix:
        return self.coefficient(n).subs(self.values)

    def evaluate(self, r, sigma=0.0) -> List[np.ndarray]:
        """
        Coefficient matrices sampled on r.

        Returns:
            List over n of complex arrays of shape (n_out, n_in, len(r))
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        namespace = _namespace(self.params, self.cutoff)
        out = []
        for n in range(len(self.coefficients)):
            A = self.numeric(n)
            samples = np.empty((A.rows, A.cols, len(r)), dtype=complex)
            for i in range(A.rows):
                for j in range(A.cols):
                    func = sp.lambdify((R, SIGMA), numeric_ready(A[i, j]), modules=[namespace, "numpy"])
                    samples[i, j] = _broadcast(func, r, sigma)
            out.append(samples)
        return out

    def apply_symbolic(self, exprs: Sequence, sigma=None) -> List:
        """Apply to closed-form slot expressions; sigma=None keeps it symbolic."""
        if len(exprs) != len(self.slots_in):
            raise SectorError(f"{self.name} takes {len(self.slots_in)} components, got {len(exprs)}")
        exprs = [sp.sympify(e) for e in exprs]
        out = [sp.Integer(0)] * len(self.slots_out)
        for n, A in enumerate(self.coefficients):
            A = A if sigma is None else A.subs(SIGMA, sigma)
            derivs = [sp.diff(e, R, n) if n else e for e in exprs]
            for i in range(len(self.slots_out)):
                out[i] += sum(A[i, j] * derivs[j] for j in range(len(exprs)) if A[i, j] != 0)
        return out

    def to_dict(self, r_samples: Sequence[float], sigma=0.0) -> Dict:
        """Coefficient samples for debugging output."""
        samples = self.evaluate(np.asarray(r_samples, dtype=float), sigma)
        return {
            'name': self.name,
            'slots_in': list(self.slots_in),
            'slots_out': list(self.slots_out),
            'time_gauge': self.time_gauge.value,
            'sigma': [complex(sigma).real, complex(sigma).imag],
            'r': list(map(float, r_samples)),
            'coefficients': [{'order': n, 're': A.real.tolist(), 'im': A.imag.tolist()}
                             for n, A in enumerate(samples)],
        }


# ---- assembly from the covariant engine ----

def _slot_field(rank: int, dim: int, sector: Optional[Sector], funcs: Sequence):
    field_ = zeros(rank, dim)
    if sector is None:
        if rank == 0:
            field_[()] = funcs[0]
        elif rank == 1:
            field_[0], field_[1] = funcs
        else:
            field_[0, 0], field_[1, 1] = funcs[0], funcs[2]
            field_[0, 1] = field_[1, 0] = funcs[1]
        return field_
    patterns = slot_patterns(sector)
    for name, F in zip(slots(sector), funcs):
        pattern = patterns[name]
        if rank == 0:
            field_[()] += F * pattern
        elif rank == 1:
            for a in range(dim):
                field_[a] += F * pattern[a]
        else:
            for a in range(dim):
                for b in range(dim):
                    field_[a, b] += F * pattern[a, b]
    return field_


def _project_result(result, sector: Optional[Sector]) -> List:
    result = np.asarray(result, dtype=object)
    rank = result.ndim
    if sector is None:
        if rank == 0:
            return [result[()]]
        if rank == 1:
            return [result[0], result[1]]
        return [result[0, 0], result[0, 1], result[1, 1]]
    lam = sector.lam
    if rank == 0:
        comps = reduce_angular(result[()], lam)
    elif rank == 1:
        comps = [reduce_angular(result[a], lam) for a in range(4)]
    else:
        comps = sp.Matrix(4, 4, lambda a, b: reduce_angular(result[a, b], lam))
    return project(sector, comps)


def _extract(exprs: Sequence, funcs: Sequence) -> Tuple[sp.Matrix, ...]:
    """Coefficient matrices of expressions linear in funcs and their r-derivatives."""
    max_order = 0
    for e in exprs:
        for d in sp.sympify(e).atoms(sp.Derivative):
            max_order = max(max_order, sum(c for v, c in d.variable_count if v == R))
    symbols = {}
    rule = {}
    for j, F in enumerate(funcs):
        for n in range(max_order + 1):
            s = sp.Symbol(f'_d{j}_{n}')
            symbols[(j, n)] = s
            rule[F.diff(R, n) if n else F] = s
    coeffs = []
    for n in range(max_order + 1):
        A = sp.zeros(len(exprs), len(funcs))
        for i, e in enumerate(exprs):
            replaced = sp.expand(sp.sympify(e).xreplace(rule))
            for j in range(len(funcs)):
                A[i, j] = sp.cancel(sp.together(replaced.diff(symbols[(j, n)])))
        coeffs.append(A)
    return tuple(coeffs)


_FIELD_OPS = {
    'box': lambda st, f: st.box(f),
    'lin_ric': lambda st, f: st.lin_ric(f),
    'gauge_fixed': lambda st, f: st.gauge_fixed(f, damped=True),
    'constraint_prop': lambda st, f: st.constraint_prop(f, damped=True),
    'div_trace_reversed': lambda st, f: st.div(st.trace_reverse(f)),
    'div': lambda st, f: st.div(f),
    'sym_grad': lambda st, f: st.sym_grad(f),
    'trace_reversal': lambda st, f: st.trace_reverse(f),
    'd': lambda st, f: st.gradient(f[()]),
    'trace': lambda st, f: _scalar_array(st.trace(f)),
}


def _scalar_array(value):
    out = zeros(0)
    out[()] = value
    return out


@lru_cache(maxsize=None)
def _assemble(kind: str, chart: str, dim: int, parity: Optional[Parity], l: int,
              rank_in: int, rank_out: int) -> Tuple[Tuple[str, ...], Tuple[str, ...], Tuple[sp.Matrix, ...]]:
    st = spacetime(chart, dim)
    if parity is None:
        sec_in = sec_out = None
        names_in, names_out = HAT_SLOTS[rank_in], HAT_SLOTS[rank_out]
    else:
        sec_in, sec_out = Sector(parity, l, rank_in), Sector(parity, l, rank_out)
        names_in, names_out = slots(sec_in), slots(sec_out)
    funcs = [sp.Function(f'F{j}')(R) for j in range(len(names_in))]
    logger.debug(f"Assembling {kind} on {parity}/l={l} rank {rank_in}->{rank_out} ({chart}, {dim}D)")
    field_ = _slot_field(rank_in, dim, sec_in, funcs)
    result = _FIELD_OPS[kind](st, field_)
    exprs = _project_result(result, sec_out)
    return tuple(names_in), tuple(names_out), _extract(exprs, funcs)


def _build(kind: str, params: BlackHoleParams, sector: Optional[Sector], rank_in: int, rank_out: int,
           sigma=None, chart: str = 'static', gamma: float = 0.0, v: float = 2.0,
           cutoff: Optional[Cutoff] = None, dim: int = 4) -> RadialOperator:
    params.require_schwarzschild()
    if chart not in CHART_GAUGE:
        raise SectorError(f"unknown chart '{chart}'")
    if gamma < 0:
        raise DomainError(f"damping strength must be nonnegative, got {gamma}")
    parity = sector.parity if sector is not None else None
    l = sector.l if sector is not None else 0
    if sector is not None:
        for rank in (rank_in, rank_out):
            Sector(parity, l, rank)
    names_in, names_out, coeffs = _assemble(kind, chart, dim, parity, l, rank_in, rank_out)
    op = RadialOperator(
        name=kind, slots_in=names_in, slots_out=names_out, coefficients=coeffs, params=params,
        time_gauge=CHART_GAUGE[chart], chart=chart,
        sector_in=sector.with_rank(rank_in) if sector is not None else None,
        sector_out=sector.with_rank(rank_out) if sector is not None else None,
        gamma=gamma, v=v, cutoff=cutoff)
    return op if sigma is None else op.at(sigma)


# ---- public constructors ----

def box(params: BlackHoleParams, rank: int, sector: Sector, sigma=None, chart: str = 'static') -> RadialOperator:
    """Tensor wave operator on functions, 1-forms or symmetric 2-tensors of a sector."""
    return _build('box', params, sector, rank, rank, sigma, chart)


def lin_ric(params: BlackHoleParams, sector: Sector, sigma=None, chart: str = 'static') -> RadialOperator:
    """Linearized Ricci operator on symmetric 2-tensors."""
    return _build('lin_ric', params, sector, 2, 2, sigma, chart)


def gauge_fixed(params: BlackHoleParams, sector: Sector, sigma=None, gamma: float = 0.0, v: float = 2.0,
                chart: str = 'static', cutoff: Optional[Cutoff] = None) -> RadialOperator:
    """Gauge-fixed linearized Einstein operator with constraint damping of strength gamma."""
    return _build('gauge_fixed', params, sector, 2, 2, sigma, chart, gamma, v, cutoff)


def constraint_prop(params: BlackHoleParams, sector: Sector, sigma=None, gamma: float = 0.0, v: float = 2.0,
                    chart: str = 'static', cutoff: Optional[Cutoff] = None) -> RadialOperator:
    """Constraint propagation operator on 1-forms."""
    return _build('constraint_prop', params, sector, 1, 1, sigma, chart, gamma, v, cutoff)


def div_trace_reversed(params: BlackHoleParams, sector: Sector, sigma=None, chart: str = 'static') -> RadialOperator:
    return _build('div_trace_reversed', params, sector, 2, 1, sigma, chart)


def sym_grad(params: BlackHoleParams, sector: Sector, sigma=None, chart: str = 'static') -> RadialOperator:
    return _build('sym_grad', params, sector, 1, 2, sigma, chart)


def divergence(params: BlackHoleParams, sector: Sector, rank: int, sigma=None, chart: str = 'static') -> RadialOperator:
    """delta from rank to rank - 1."""
    if rank not in (1, 2):
        raise SectorError(f"divergence acts on rank 1 or 2, got {rank}")
    return _build('div', params, sector, rank, rank - 1, sigma, chart)


def trace_reversal(params: BlackHoleParams, sector: Sector, chart: str = 'static') -> RadialOperator:
    return _build('trace_reversal', params, sector, 2, 2, None, chart)


def hat_ops(params: BlackHoleParams, sigma=None) -> Dict[str, RadialOperator]:
    """
    Operators on the (t, r) factor with metric mu dt^2 - mu^{-1} dr^2, static chart.

    Keys: box0, box1, box2, d, delta1, delta2, delta_star, trace, iota1, iota2,
    nabla_varpi and star_d (the Hodge star of the exterior derivative of a 1-form).
    varpi = dr.
    """
    params.require_schwarzschild()
    ops = {
        'box0': _build('box', params, None, 0, 0, sigma, dim=2),
        'box1': _build('box', params, None, 1, 1, sigma, dim=2),
        'box2': _build('box', params, None, 2, 2, sigma, dim=2),
        'd': _build('d', params, None, 0, 1, sigma, dim=2),
        'delta1': _build('div', params, None, 1, 0, sigma, dim=2),
        'delta2': _build('div', params, None, 2, 1, sigma, dim=2),
        'delta_star': _build('sym_grad', params, None, 1, 2, sigma, dim=2),
        'trace': _build('trace', params, None, 2, 0, sigma, dim=2),
    }
    mu = mu_expr()
    s = SIGMA if sigma is None else sigma

    def const(name, rows, cols, *coeffs):
        mats = tuple(sp.Matrix(c) for c in coeffs)
        return RadialOperator(name=name, slots_in=tuple(HAT_SLOTS[cols]), slots_out=tuple(HAT_SLOTS[rows]),
                              coefficients=mats, params=params)

    ops['iota1'] = const('iota1', 0, 1, [[0, -mu]])
    ops['iota2'] = const('iota2', 1, 2, [[0, -mu, 0], [0, 0, -mu]])
    # nabla along varpi^# = -mu d_r; Gamma^t_rt = mu'/(2mu), Gamma^r_rr = -mu'/(2mu)
    dmu = sp.diff(mu, R)
    ops['nabla_varpi'] = const('nabla_varpi', 2, 2,
                               [[dmu, 0, 0], [0, 0, 0], [0, 0, -dmu]],
                               [[-mu, 0, 0], [0, -mu, 0], [0, 0, -mu]])
    # star(dt ^ dr) = 1: star d w = d_t w_r - d_r w_t
    ops['star_d'] = const('star_d', 0, 1, [[0, -sp.I * s]], [[-1, 0]])
    return ops


# ---- gauge conjugation, commutators, application ----

def conjugate_time(op: RadialOperator, target: TimeFunctionKind) -> RadialOperator:
    """
    Conjugate by exp(i sigma F) with F = tau_target - tau_current, so d/dr -> d/dr - i sigma F'.

    The component frame of the chart is left unchanged.
    """
    target = TimeFunctionKind(target)
    if target == op.time_gauge:
        return op
    if len(op.coefficients) > 3:
        raise SectorError(f"time conjugation is implemented up to order 2, {op.name} has order "
                          f"{len(op.coefficients) - 1}")
    f1 = _TAU1[target] - _TAU1[op.time_gauge]
    f2 = _TAU2[target] - _TAU2[op.time_gauge]
    A0, A1, A2 = (op.coefficient(n) for n in range(3))
    i = sp.I
    new = (A0 - i * SIGMA * f1 * A1 + (-i * SIGMA * f2 - SIGMA ** 2 * f1 ** 2) * A2,
           A1 - 2 * i * SIGMA * f1 * A2,
           A2)
    return replace(op, name=f"{op.name}[{target.value}]", coefficients=new, time_gauge=target)


def commutator(op: RadialOperator, order: int = 1) -> RadialOperator:
    """
    Stationary commutators with the time function: [L, t]^ = i d_sigma L^(0),
    [[L, t], t]^ = -d_sigma^2 L^(0).
    """
    if order == 1:
        coeffs = tuple((sp.I * A.diff(SIGMA)).subs(SIGMA, 0) for A in op.coefficients)
    elif order == 2:
        coeffs = tuple((-A.diff(SIGMA, 2)).subs(SIGMA, 0) for A in op.coefficients)
    else:
        raise SectorError(f"commutator order must be 1 or 2, got {order}")
    return replace(op, name=f"[{op.name},t]^{order}", coefficients=coeffs)


def grid(params: BlackHoleParams, n: int = 400, r_min: Optional[float] = None,
         r_max: Optional[float] = None) -> np.ndarray:
    """Geometric grid clustered at the horizon, default [2m(1 + 1e-6), 1e4 m]."""
    r_h = params.horizon_radius
    r_min = r_h * (1 + 1e-6) if r_min is None else r_min
    r_max = 1e4 * params.mass if r_max is None else r_max
    return geometric_grid(r_min, r_max, n, r_h)


def apply(op: RadialOperator, profile: RadialProfile, scheme: str = 'ClosedFormDiff',
          sigma=0.0, r: Optional[np.ndarray] = None) -> RadialProfile:
    """
    Apply an operator to a profile, returning samples on the profile grid (or r).

    Raises:
        SectorError: On slot, time gauge or chart mismatch
    """
    if scheme not in SCHEMES:
        raise SectorError(f"unknown scheme '{scheme}', expected one of {SCHEMES}")
    if tuple(profile.slots) != tuple(op.slots_in):
        raise SectorError(f"{op.name} expects slots {op.slots_in}, profile has {profile.slots}")
    if profile.time_gauge != op.time_gauge or profile.chart != op.chart:
        raise SectorError(f"profile gauge {profile.time_gauge.value}/{profile.chart} does not match "
                          f"operator gauge {op.time_gauge.value}/{op.chart}")
    r = profile.grid if r is None else np.asarray(r, dtype=float)
    if r is None:
        raise SectorError("no grid to apply on")

    coeffs = op.evaluate(r, sigma)
    if scheme == 'ClosedFormDiff':
        if profile.closed_form is None:
            raise SectorError("ClosedFormDiff needs a closed-form profile")
        derivs = [profile.derivative(n).sample(op.params, r) if n else profile.sample(op.params, r)
                  for n in range(len(coeffs))]
    else:
        u = profile.sample(op.params, r)
        mats = diff_matrices(r, scheme)
        derivs = [u]
        for n in range(1, len(coeffs)):
            if n == 1:
                derivs.append(np.array([mats[1] @ row for row in u]))
            elif n == 2:
                derivs.append(np.array([mats[2] @ row for row in u]))
            else:
                derivs.append(np.array([mats[1] @ row for row in derivs[n - 1]]))

    out = np.zeros((len(op.slots_out), len(r)), dtype=complex)
    for n, A in enumerate(coeffs):
        out += np.einsum('ijk,jk->ik', A, derivs[n])
    return RadialProfile(tuple(op.slots_out), op.time_gauge, op.chart, grid=r, values=out,
                         sector=op.sector_out)


def normalized_residual(op: RadialOperator, profile: RadialProfile, scheme: str = 'ClosedFormDiff',
                        sigma=0.0, r: Optional[np.ndarray] = None) -> float:
    """max |L u| / max |u| over the grid."""
    result = apply(op, profile, scheme, sigma, r)
    norm = np.max(np.abs(profile.sample(op.params, result.grid)))
    if norm == 0:
        return float(np.max(np.abs(result.values)))
    return float(np.max(np.abs(result.values)) / norm)
