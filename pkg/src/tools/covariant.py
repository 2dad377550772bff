"""
Symbolic covariant calculus on the Schwarzschild exterior.

Tensors are numpy object arrays of sympy expressions with all indices down.
Fields are understood to carry a factor exp(-i sigma t); the time derivative
therefore acts as -i sigma plus the explicit t-derivative.
"""

import itertools
import logging
from functools import lru_cache

import numpy as np
import sympy as sp

from ..errors import SectorError
from ..harmonics import THETA

logger = logging.getLogger(__name__)

T, R, PHI = sp.symbols('t r phi', real=True)
M = sp.Symbol('M', positive=True)
SIGMA = sp.Symbol('sigma')
GAMMA = sp.Symbol('gamma', nonnegative=True)
VEL = sp.Symbol('v', positive=True)
CHI_C = sp.Function('chi_c')

CHARTS = ('static', 'null0')


def mu_expr(r=R, m=M):
    return 1 - 2 * m / r


def zeros(rank: int, dim: int = 4) -> np.ndarray:
    out = np.empty((dim,) * rank, dtype=object)
    out.fill(sp.Integer(0))
    return out


def _negated(tensor: np.ndarray) -> np.ndarray:
    # numpy unary minus collapses 0-d object arrays to bare scalars
    out = np.empty_like(tensor)
    out[()] = -tensor
    return out


class Spacetime:
    """
    Schwarzschild metric in the static chart (t, r, theta, phi) or the ingoing
    null chart (t_0, r, theta, phi), optionally restricted to the (t, r) factor.
    """

    def __init__(self, chart: str = 'static', dim: int = 4):
        if chart not in CHARTS:
            raise SectorError(f"unknown chart '{chart}'")
        if dim not in (2, 4):
            raise SectorError(f"dimension must be 2 or 4, got {dim}")
        self.chart = chart
        self.dim = dim
        self.coords = (T, R, THETA, PHI)[:dim]
        mu = mu_expr()
        g = sp.zeros(dim, dim)
        g[0, 0] = mu
        if chart == 'static':
            g[1, 1] = -1 / mu
        else:
            g[0, 1] = g[1, 0] = -1
        if dim == 4:
            g[2, 2] = -R ** 2
            g[3, 3] = -R ** 2 * sp.sin(THETA) ** 2
        self.g = g
        self.ginv = sp.simplify(g.inv())
        self.gamma = self._christoffel()
        self._riemann = None

    def _christoffel(self) -> np.ndarray:
        n = self.dim
        gamma = zeros(3, n)
        for a, b, c in itertools.product(range(n), repeat=3):
            total = 0
            for d in range(n):
                if self.ginv[a, d] == 0:
                    continue
                total += self.ginv[a, d] * (sp.diff(self.g[d, b], self.coords[c])
                                            + sp.diff(self.g[d, c], self.coords[b])
                                            - sp.diff(self.g[b, c], self.coords[d])) / 2
            gamma[a, b, c] = sp.simplify(total)
        return gamma

    def diff(self, expr, c: int):
        if c == 0:
            return -sp.I * SIGMA * expr + sp.diff(expr, T)
        return sp.diff(expr, self.coords[c])

    # ---- first-order calculus ----

    def nabla(self, tensor: np.ndarray) -> np.ndarray:
        """Covariant derivative; the new (derivative) index comes first."""
        n = self.dim
        rank = tensor.ndim
        out = zeros(rank + 1, n)
        for c in range(n):
            for idx in itertools.product(range(n), repeat=rank):
                value = self.diff(tensor[idx], c)
                for j in range(rank):
                    for e in range(n):
                        gam = self.gamma[e, c, idx[j]]
                        if gam == 0:
                            continue
                        swapped = idx[:j] + (e,) + idx[j + 1:]
                        if tensor[swapped] != 0:
                            value -= gam * tensor[swapped]
                out[(c,) + idx] = value
        return out

    def gradient(self, u) -> np.ndarray:
        out = zeros(1, self.dim)
        for c in range(self.dim):
            out[c] = self.diff(u, c)
        return out

    def contract_inverse(self, tensor: np.ndarray, i: int = 0, j: int = 1) -> np.ndarray:
        """g^{ab} T_{..a..b..} over index positions i < j."""
        n = self.dim
        rank = tensor.ndim
        out = zeros(rank - 2, n)
        rest = [k for k in range(rank) if k not in (i, j)]
        for idx in itertools.product(range(n), repeat=rank - 2):
            total = 0
            for a, b in itertools.product(range(n), repeat=2):
                if self.ginv[a, b] == 0:
                    continue
                full = [0] * rank
                full[i], full[j] = a, b
                for pos, k in zip(rest, idx):
                    full[pos] = k
                total += self.ginv[a, b] * tensor[tuple(full)]
            out[idx] = total
        return out

    def box(self, tensor: np.ndarray) -> np.ndarray:
        """Tensor wave operator -g^{cd} nabla_c nabla_d."""
        second = self.nabla(self.nabla(tensor))
        return _negated(self.contract_inverse(second, 0, 1))

    def div(self, tensor: np.ndarray) -> np.ndarray:
        """Divergence (delta h)_{b..} = -nabla^a h_{ab..}."""
        return _negated(self.contract_inverse(self.nabla(tensor), 0, 1))

    def sym_grad(self, w: np.ndarray) -> np.ndarray:
        nab = self.nabla(w)
        out = zeros(2, self.dim)
        for a, b in itertools.product(range(self.dim), repeat=2):
            out[a, b] = (nab[a, b] + nab[b, a]) / 2
        return out

    def trace(self, h: np.ndarray):
        return self.contract_inverse(h, 0, 1)[()]

    def trace_reverse(self, h: np.ndarray) -> np.ndarray:
        tr = self.trace(h)
        out = zeros(2, self.dim)
        for a, b in itertools.product(range(self.dim), repeat=2):
            out[a, b] = h[a, b] - self.g[a, b] * tr / 2
        return out

    def metric_tensor(self) -> np.ndarray:
        out = zeros(2, self.dim)
        for a, b in itertools.product(range(self.dim), repeat=2):
            out[a, b] = self.g[a, b]
        return out

    def inner(self, u: np.ndarray, w: np.ndarray):
        """Fiber inner product induced by g on 1-forms."""
        return sum(self.ginv[a, b] * u[a] * w[b]
                   for a, b in itertools.product(range(self.dim), repeat=2) if self.ginv[a, b] != 0)

    def raise_all(self, h: np.ndarray) -> np.ndarray:
        n = self.dim
        out = zeros(2, n)
        for a, b in itertools.product(range(n), repeat=2):
            out[a, b] = sum(self.ginv[a, c] * self.ginv[b, d] * h[c, d]
                            for c, d in itertools.product(range(n), repeat=2)
                            if self.ginv[a, c] != 0 and self.ginv[b, d] != 0)
        return out

    # ---- curvature ----

    def riemann(self) -> np.ndarray:
        """All-lower Riemann tensor R_{abcd} for R^a_{bcd} = d_c Gamma^a_db - d_d Gamma^a_cb + ..."""
        if self._riemann is not None:
            return self._riemann
        n = self.dim
        up = zeros(4, n)
        for a, b, c, d in itertools.product(range(n), repeat=4):
            value = (sp.diff(self.gamma[a, d, b], self.coords[c])
                     - sp.diff(self.gamma[a, c, b], self.coords[d]))
            for e in range(n):
                value += self.gamma[a, c, e] * self.gamma[e, d, b] - self.gamma[a, d, e] * self.gamma[e, c, b]
            up[a, b, c, d] = sp.simplify(value)
        low = zeros(4, n)
        for a, b, c, d in itertools.product(range(n), repeat=4):
            low[a, b, c, d] = sp.simplify(sum(self.g[a, e] * up[e, b, c, d] for e in range(n)))
        self._riemann = low
        return low

    def curvature_action(self, h: np.ndarray) -> np.ndarray:
        """(Rh)_{ab} = -R_{acbd} h^{cd}."""
        riem = self.riemann()
        hup = self.raise_all(h)
        n = self.dim
        out = zeros(2, n)
        for a, b in itertools.product(range(n), repeat=2):
            out[a, b] = -sum(riem[a, c, b, d] * hup[c, d]
                             for c, d in itertools.product(range(n), repeat=2)
                             if riem[a, c, b, d] != 0 and hup[c, d] != 0)
        return out

    # ---- constraint damping ----

    def damping_form(self) -> np.ndarray:
        """c = chi_c(r) (dt_0 - v dr) in the chart's coordinates."""
        out = zeros(1, self.dim)
        out[0] = CHI_C(R)
        if self.chart == 'static':
            out[1] = CHI_C(R) * (1 / mu_expr() - VEL)
        else:
            out[1] = -VEL * CHI_C(R)
        return out

    def damping(self, w: np.ndarray) -> np.ndarray:
        """E(w)_{ab} = gamma (c_a w_b + c_b w_a - G(c, w) g_ab)."""
        c = self.damping_form()
        pairing = self.inner(c, w)
        out = zeros(2, self.dim)
        for a, b in itertools.product(range(self.dim), repeat=2):
            out[a, b] = GAMMA * (c[a] * w[b] + c[b] * w[a] - pairing * self.g[a, b])
        return out

    # ---- composite geometric operators ----

    def lin_ric(self, h: np.ndarray) -> np.ndarray:
        """Linearized Ricci: 1/2 box h - delta^* delta G h + R h."""
        box = self.box(h)
        gauge = self.sym_grad(self.div(self.trace_reverse(h)))
        curv = self.curvature_action(h)
        return box / 2 - gauge + curv

    def gauge_fixed(self, h: np.ndarray, damped: bool = False) -> np.ndarray:
        """box h + 2 R h (+ 2 E delta G h)."""
        out = self.box(h) + 2 * self.curvature_action(h)
        if damped:
            out = out + 2 * self.damping(self.div(self.trace_reverse(h)))
        return out

    def constraint_prop(self, w: np.ndarray, damped: bool = False) -> np.ndarray:
        """2 delta G (delta^* + E) w."""
        sym = self.sym_grad(w)
        if damped:
            sym = sym + self.damping(w)
        return 2 * self.div(self.trace_reverse(sym))


@lru_cache(maxsize=None)
def spacetime(chart: str = 'static', dim: int = 4) -> Spacetime:
    """Cached background geometry."""
    logger.debug(f"Building {dim}D Schwarzschild geometry in the {chart} chart")
    return Spacetime(chart, dim)
