"""Background geometry: Schwarzschild/Kerr metrics, time functions and linearized Kerr metrics."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Tuple, Union

import numpy as np
from scipy import integrate

from .errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlackHoleParams:
    """Mass and specific angular momentum of a subextremal Kerr black hole (G = c = 1)."""

    mass: float = 1.0
    spin: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if self.spin < 0:
            raise DomainError(f"spin must be nonnegative, got {self.spin}")
        if self.spin >= self.mass:
            raise DomainError(f"spin {self.spin} must be below mass {self.mass} (subextremal)")

    @property
    def horizon_radius(self) -> float:
        return self.mass + np.sqrt(self.mass ** 2 - self.spin ** 2)

    def delta(self, r):
        return r ** 2 - 2 * self.mass * r + self.spin ** 2

    def rho2(self, r, theta):
        return r ** 2 + self.spin ** 2 * np.cos(theta) ** 2

    def require_schwarzschild(self):
        if self.spin != 0:
            raise DomainError(f"operation requires spin = 0, got spin = {self.spin}")


class TimeFunctionKind(Enum):
    STATIC = 'Static'
    NULL0 = 'Null0'
    CHI_REGULAR = 'ChiRegular'
    STAR = 'Star'


class Chart(Enum):
    BOYER_LINDQUIST = 'BoyerLindquist'
    REGULARIZED = 'Regularized'


@dataclass
class MetricSample:
    """Metric components and their inverse at one point of a chart."""

    chart: Chart
    point: Tuple[float, float, float, float]
    components: np.ndarray
    inverse: np.ndarray

    def check(self, tol: float = 1e-10) -> float:
        """Return max |g g^{-1} - 1| and raise if the sample is not symmetric."""
        if not np.allclose(self.components, self.components.T, atol=tol):
            raise DomainError("metric sample is not symmetric")
        return float(np.max(np.abs(self.components @ self.inverse - np.eye(4))))


class Cutoff:
    """
    C^2 smootherstep cutoff on [r0, r1].

    A falling cutoff equals 1 for r <= r0 and 0 for r >= r1; a rising one the reverse.
    """

    def __init__(self, r0: float, r1: float, falling: bool = True):
        if not r1 > r0:
            raise DomainError(f"cutoff needs r1 > r0, got [{r0}, {r1}]")
        self.r0 = r0
        self.r1 = r1
        self.falling = falling

    def __call__(self, r, deriv: int = 0):
        r = np.asarray(r, dtype=float)
        width = self.r1 - self.r0
        s = np.clip((r - self.r0) / width, 0.0, 1.0)
        inside = (r > self.r0) & (r < self.r1)
        if deriv == 0:
            value = s ** 3 * (6 * s ** 2 - 15 * s + 10)
        elif deriv == 1:
            value = np.where(inside, 30 * s ** 2 * (s - 1) ** 2 / width, 0.0)
        elif deriv == 2:
            value = np.where(inside, 60 * s * (2 * s ** 2 - 3 * s + 1) / width ** 2, 0.0)
        else:
            raise ValueError(f"cutoff derivative order {deriv} not available")
        if self.falling:
            return (1.0 - value) if deriv == 0 else -value
        return value


def star_cutoff(params: BlackHoleParams) -> Cutoff:
    """chi: 1 near the horizon (r <= 3m), 0 for r >= 4m."""
    return Cutoff(3 * params.mass, 4 * params.mass, falling=True)


def regular_cutoff(params: BlackHoleParams) -> Cutoff:
    """chi_0: 0 for r <= 3m, 1 for r >= 4m."""
    return Cutoff(3 * params.mass, 4 * params.mass, falling=False)


def damping_cutoff(params: BlackHoleParams) -> Cutoff:
    """Constraint-damping cutoff: 1 for r <= 2.5m, 0 for r >= 3m."""
    return Cutoff(2.5 * params.mass, 3 * params.mass, falling=True)


def mu(params: BlackHoleParams, r):
    """
    Schwarzschild factor 1 - 2m/r.

    Args:
        params: Background parameters (spin must be 0)
        r: Radius or array of radii

    Returns:
        1 - 2 m / r
    """
    params.require_schwarzschild()
    r_arr = np.asarray(r)
    if np.any(r_arr <= 0):
        raise DomainError(f"radius must be positive, got {r}")
    return 1.0 - 2.0 * params.mass / r


def tortoise(params: BlackHoleParams, r):
    """Tortoise coordinate r_* = r + 2m log(r - 2m), defined for r > 2m."""
    params.require_schwarzschild()
    r_arr = np.asarray(r)
    if np.any(r_arr <= 2 * params.mass):
        raise DomainError(f"tortoise coordinate needs r > 2m = {2 * params.mass}, got {r}")
    return r + 2.0 * params.mass * np.log(r - 2.0 * params.mass)


def inverse_tortoise(params: BlackHoleParams, rstar):
    """Solve r_*(r) = rstar for r > 2m with Newton iteration."""
    params.require_schwarzschild()
    m = params.mass
    rstar = np.asarray(rstar, dtype=float)
    # r - 2m ~ exp((r_* - 2m)/2m) near the horizon, r ~ r_* far away
    x = np.where(rstar < 4 * m, np.exp(np.minimum(rstar - 2 * m, 50.0) / (2 * m)), rstar)
    x = np.maximum(x, 1e-300)
    for _ in range(100):
        f = x + 2 * m + 2 * m * np.log(x) - rstar
        step = f / (1 + 2 * m / x)
        x_new = np.where(x - step > 0, x - step, x / 10)
        if np.all(np.abs(x_new - x) <= 1e-15 * (1 + np.abs(x))):
            x = x_new
            break
        x = x_new
    return x + 2 * m


def metric_components(params: BlackHoleParams, point, chart: Chart = Chart.BOYER_LINDQUIST,
                      chi: Union[float, Callable, None] = None) -> MetricSample:
    """
    Kerr metric components in Boyer-Lindquist or regularized coordinates.

    The regularized chart uses (t_{b,chi}, r, theta, phi_{b,chi}); chi = 0 gives the
    ingoing chart that is smooth across the horizon.

    Args:
        params: Background parameters
        point: (t, r, theta, phi)
        chart: Chart selector
        chi: Cutoff value or callable chi(r) for the regularized chart (default 0)

    Returns:
        MetricSample with components and inverse
    """
    t, r, theta, phi = point
    if not 0 < theta < np.pi:
        raise DomainError(f"polar chart degenerates on the axis (theta={theta})")
    a = params.spin
    s2 = np.sin(theta) ** 2
    delta = params.delta(r)
    rho2 = params.rho2(r, theta)

    A = np.array([1.0, 0.0, 0.0, -a * s2])
    B = np.array([a, 0.0, 0.0, -(r ** 2 + a ** 2)])
    dr = np.array([0.0, 1.0, 0.0, 0.0])
    dth = np.array([0.0, 0.0, 1.0, 0.0])

    g = delta / rho2 * np.outer(A, A) - rho2 * np.outer(dth, dth) - s2 / rho2 * np.outer(B, B)
    if chart == Chart.BOYER_LINDQUIST:
        if r <= params.horizon_radius:
            raise DomainError(f"Boyer-Lindquist chart needs r > r_b = {params.horizon_radius}, got {r}")
        g = g - rho2 / delta * np.outer(dr, dr)
    elif chart == Chart.REGULARIZED:
        if r <= 0:
            raise DomainError(f"radius must be positive, got {r}")
        c = chi(r) if callable(chi) else (chi or 0.0)
        g = g - (1 - c) * (np.outer(A, dr) + np.outer(dr, A))
        if c != 0:
            g = g - c * (2 - c) * rho2 / delta * np.outer(dr, dr)
    else:
        raise DomainError(f"unknown chart {chart}")

    return MetricSample(chart=chart, point=tuple(point), components=g, inverse=np.linalg.inv(g))


def linearized_kerr(params: BlackHoleParams, mdot: float, adot: float, point) -> np.ndarray:
    """
    Linearized Kerr metric at Schwarzschild in the (t_0, r, theta, phi) frame.

    Args:
        params: Schwarzschild background
        mdot: Mass variation
        adot: Angular momentum variation; the polar axis is taken along it, so only
            its magnitude enters
        point: (t_0, r, theta, phi)

    Returns:
        Symmetric 4x4 array of components
    """
    params.require_schwarzschild()
    _, r, theta, _ = point
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    if not 0 < theta < np.pi:
        raise DomainError(f"polar chart degenerates on the axis (theta={theta})")
    m = params.mass
    s2 = np.sin(theta) ** 2
    spin = abs(adot)
    h = np.zeros((4, 4))
    # d/dm of mu_m dt_0^2
    h[0, 0] = -2.0 * mdot / r
    # (4m/r dt_0 + 2 dr) sin^2 theta dphi as a symmetric product
    h[0, 3] = h[3, 0] = spin * 2.0 * m * s2 / r
    h[1, 3] = h[3, 1] = spin * s2
    return h


def _chi_regular_offset(params: BlackHoleParams, r: float) -> float:
    m = params.mass
    if r >= 4 * m:
        return 0.0
    chi0 = regular_cutoff(params)
    value, _ = integrate.quad(lambda x: (1 - chi0(x)) / (1 - 2 * m / x), r, 4 * m,
                              epsabs=1e-13, epsrel=1e-12, limit=200)
    return -value


def _offset_from_static(kind: TimeFunctionKind, params: BlackHoleParams, r: float) -> float:
    if kind == TimeFunctionKind.STATIC:
        return 0.0
    rstar = float(tortoise(params, r))
    if kind == TimeFunctionKind.NULL0:
        return rstar
    if kind == TimeFunctionKind.STAR:
        chi = float(star_cutoff(params)(r))
        return rstar * (2 * chi - 1)
    if kind == TimeFunctionKind.CHI_REGULAR:
        return _chi_regular_offset(params, r)
    raise DomainError(f"unknown time function {kind}")


def time_function_offset(kind1: TimeFunctionKind, kind2: TimeFunctionKind,
                         params: BlackHoleParams, r: float) -> float:
    """
    Difference tau_1 - tau_2 of two time functions, a function of r only.

    Args:
        kind1: First time function
        kind2: Second time function
        params: Schwarzschild background
        r: Radius (r > 2m)

    Returns:
        tau_1(p) - tau_2(p) at any point p of radius r
    """
    if kind1 == kind2:
        return 0.0
    return _offset_from_static(kind1, params, r) - _offset_from_static(kind2, params, r)


def time_function_slope(kind: TimeFunctionKind, params: BlackHoleParams):
    """
    Return d(tau - t)/dr as a callable of r for the given time function.

    Used by operator conjugation between time gauges.
    """
    m = params.mass

    def static(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def null0(r):
        return 1.0 / (1.0 - 2.0 * m / np.asarray(r, dtype=float))

    def star(r):
        r = np.asarray(r, dtype=float)
        chi = star_cutoff(params)
        return (2 * chi(r) - 1) / (1 - 2 * m / r) + 2 * chi(r, 1) * tortoise(params, r)

    def chi_regular(r):
        r = np.asarray(r, dtype=float)
        return (1 - regular_cutoff(params)(r)) / (1 - 2 * m / r)

    return {
        TimeFunctionKind.STATIC: static,
        TimeFunctionKind.NULL0: null0,
        TimeFunctionKind.STAR: star,
        TimeFunctionKind.CHI_REGULAR: chi_regular,
    }[kind]


def time_function_curvature(kind: TimeFunctionKind, params: BlackHoleParams):
    """Return d^2(tau - t)/dr^2 as a callable of r."""
    m = params.mass

    def dmu(r):
        return 2.0 * m / r ** 2

    def static(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def null0(r):
        r = np.asarray(r, dtype=float)
        return -dmu(r) / (1.0 - 2.0 * m / r) ** 2

    def star(r):
        r = np.asarray(r, dtype=float)
        chi = star_cutoff(params)
        mu_r = 1.0 - 2.0 * m / r
        return (4 * chi(r, 1) / mu_r - (2 * chi(r) - 1) * dmu(r) / mu_r ** 2
                + 2 * chi(r, 2) * tortoise(params, r))

    def chi_regular(r):
        r = np.asarray(r, dtype=float)
        chi0 = regular_cutoff(params)
        mu_r = 1.0 - 2.0 * m / r
        return -chi0(r, 1) / mu_r - (1 - chi0(r)) * dmu(r) / mu_r ** 2

    return {
        TimeFunctionKind.STATIC: static,
        TimeFunctionKind.NULL0: null0,
        TimeFunctionKind.STAR: star,
        TimeFunctionKind.CHI_REGULAR: chi_regular,
    }[kind]


def kerr_one_forms(params: BlackHoleParams):
    """
    Stationary Kerr 1-forms in the kernel of the 1-form wave operator (r > r_b).

    Returns:
        Dict name -> callable (r, theta) -> components in Boyer-Lindquist (t, r, theta, phi)
    """
    a = params.spin

    def omega_1(r, theta):
        return np.array([0.0, 1.0 / params.delta(r), 0.0, 0.0])

    def omega_2(r, theta):
        s2 = np.sin(theta) ** 2
        factor = r / params.rho2(r, theta)
        return np.array([factor, 0.0, 0.0, -a * s2 * factor])

    def omega_s0(r, theta):
        return omega_2(r, theta) + params.horizon_radius * omega_1(r, theta)

    return {'omega0_1': omega_1, 'omega0_2': omega_2, 'omega0_s0': omega_s0}


def regularized_one_form(params: BlackHoleParams, form_bl: np.ndarray, r: float) -> np.ndarray:
    """Transform 1-form components from Boyer-Lindquist to the chi = 0 regularized chart."""
    a = params.spin
    delta = params.delta(r)
    # dt = dt_0 - (r^2 + a^2)/Delta dr, dphi = dphi_0 - a/Delta dr
    out = np.array(form_bl, dtype=complex if np.iscomplexobj(form_bl) else float)
    out[1] = form_bl[1] - (r ** 2 + a ** 2) / delta * form_bl[0] - a / delta * form_bl[3]
    return out


_FD4_FIRST = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def _fd4(func: Callable, x0: float, h: float):
    values = [func(x0 + k * h) for k in (-2, -1, 0, 1, 2)]
    return sum(w * v for w, v in zip(_FD4_FIRST, values)) / h


def christoffel_numeric(params: BlackHoleParams, r: float, theta: float, h: float = 1e-3,
                        chart: Chart = Chart.BOYER_LINDQUIST) -> np.ndarray:
    """
    Christoffel symbols Gamma^a_{bc} from fourth-order differences of the metric in (r, theta).

    Returns:
        Array of shape (4, 4, 4) indexed [a, b, c]
    """
    def g_at(rr, tt):
        return metric_components(params, (0.0, rr, tt, 0.0), chart).components

    sample = metric_components(params, (0.0, r, theta, 0.0), chart)
    dg = np.zeros((4, 4, 4))
    dg[1] = _fd4(lambda x: g_at(x, theta), r, h)
    dg[2] = _fd4(lambda x: g_at(r, x), theta, h)
    # dg[c, a, b] = d_c g_ab
    gamma = 0.5 * (np.einsum('ad,bdc->abc', sample.inverse, dg)
                   + np.einsum('ad,cdb->abc', sample.inverse, dg)
                   - np.einsum('ad,dbc->abc', sample.inverse, dg))
    return gamma


def box_one_form_numeric(params: BlackHoleParams, form: Callable, r: float, theta: float,
                         h: float = 1e-3, chart: Chart = Chart.BOYER_LINDQUIST) -> np.ndarray:
    """
    Apply the 1-form wave operator -g^{cd} nabla_c nabla_d to a stationary axisymmetric 1-form.

    Derivatives in t and phi vanish; r and theta derivatives use fourth-order differences.

    Args:
        params: Background parameters
        form: Callable (r, theta) -> 4 covariant components
        r: Radius outside the horizon
        theta: Polar angle off the axis

    Returns:
        The 4 covariant components of the result
    """
    if r <= params.horizon_radius:
        raise DomainError(f"point r={r} lies inside the horizon r_b={params.horizon_radius}")

    def nabla(rr, tt):
        # T[d, a] = nabla_d omega_a
        gamma = christoffel_numeric(params, rr, tt, h, chart)
        w = np.asarray(form(rr, tt), dtype=float)
        dw = np.zeros((4, 4))
        dw[1] = _fd4(lambda x: np.asarray(form(x, tt), dtype=float), rr, h)
        dw[2] = _fd4(lambda x: np.asarray(form(rr, x), dtype=float), tt, h)
        return dw - np.einsum('eda,e->da', gamma, w)

    T = nabla(r, theta)
    dT = np.zeros((4, 4, 4))
    dT[1] = _fd4(lambda x: nabla(x, theta), r, h)
    dT[2] = _fd4(lambda x: nabla(r, x), theta, h)
    gamma = christoffel_numeric(params, r, theta, h, chart)
    # nabla_c T_{da} = d_c T_da - Gamma^e_cd T_ea - Gamma^e_ca T_de
    second = dT - np.einsum('ecd,ea->cda', gamma, T) - np.einsum('eca,de->cda', gamma, T)
    ginv = metric_components(params, (0.0, r, theta, 0.0), chart).inverse
    return -np.einsum('cd,cda->a', ginv, second)
