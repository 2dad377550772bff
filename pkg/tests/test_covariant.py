"""Unit tests for the symbolic covariant engine."""

import itertools

import pytest
import sympy as sp

from src.errors import SectorError
from src.harmonics import THETA
from src.tools.covariant import CHARTS, M, R, SIGMA, Spacetime, mu_expr, spacetime, zeros


def _static(expr):
    return sp.simplify(sp.sympify(expr).subs(SIGMA, 0))


def _scalar(expr):
    u = zeros(0)
    u[()] = expr
    return u


class TestSpacetime:
    """Test chart setup."""

    def test_unknown_chart(self):
        """Test that an unknown chart is rejected."""
        with pytest.raises(SectorError):
            Spacetime('outgoing')

    def test_bad_dimension(self):
        """Test that only dimensions 2 and 4 exist."""
        with pytest.raises(SectorError):
            Spacetime('static', 3)

    @pytest.mark.parametrize('chart', CHARTS)
    def test_null_inverse(self, chart):
        """Test g^{rr} = -mu in both charts and g^{tt} = 0 in the null chart."""
        st = spacetime(chart)
        assert sp.simplify(st.ginv[1, 1] + mu_expr()) == 0
        if chart == 'null0':
            assert st.ginv[0, 0] == 0
            assert sp.simplify(st.ginv[0, 1] + 1) == 0


class TestCalculus:
    """Test covariant identities."""

    @pytest.mark.parametrize('chart', CHARTS)
    def test_metric_compatibility(self, chart):
        """Test nabla g = 0."""
        st = spacetime(chart)
        nab = st.nabla(st.metric_tensor())
        assert all(_static(nab[idx]) == 0 for idx in itertools.product(range(4), repeat=3))

    @pytest.mark.parametrize('chart', CHARTS)
    def test_trace_reversal_of_metric(self, chart):
        """Test tr g = 4 and G g = -g."""
        st = spacetime(chart)
        g = st.metric_tensor()
        assert sp.simplify(st.trace(g)) == 4
        rev = st.trace_reverse(g)
        assert all(sp.simplify(rev[a, b] + g[a, b]) == 0 for a, b in itertools.product(range(4), repeat=2))

    @pytest.mark.parametrize('chart', CHARTS)
    def test_scalar_box(self, chart):
        """Test box r = 2(r - m)/r^2 and box log(mu) = 0 for static functions."""
        st = spacetime(chart)
        assert _static(st.box(_scalar(R))[()] - 2 * (R - M) / R ** 2) == 0
        assert _static(st.box(_scalar(sp.log(mu_expr())))[()]) == 0

    def test_scalar_results_stay_arrays(self):
        """Test that box of a function and div of a 1-form are 0-d tensors."""
        st = spacetime('null0')
        assert st.box(_scalar(R)).shape == ()
        w = zeros(1)
        w[0], w[1] = 1 / R, -1 / R
        assert st.div(w).shape == ()
        assert _static(st.div(w)[()] + st.div(w * -1)[()]) == 0

    @pytest.mark.parametrize('chart', CHARTS)
    def test_killing_fields(self, chart):
        """Test that the flats of d_t and d_phi have vanishing symmetric gradient."""
        st = spacetime(chart)
        for index in (0, 3):
            w = zeros(1)
            for a in range(4):
                w[a] = st.g[a, index]
            sym = st.sym_grad(w)
            assert all(_static(sym[a, b]) == 0 for a, b in itertools.product(range(4), repeat=2))

    def test_time_derivative_symbol(self):
        """Test that d_t acts as -i sigma on mode fields."""
        st = spacetime('static')
        assert sp.simplify(st.diff(R, 0) + sp.I * SIGMA * R) == 0


class TestCurvature:
    """Test curvature of the background."""

    @pytest.mark.slow
    @pytest.mark.parametrize('chart', CHARTS)
    def test_ricci_flat(self, chart):
        """Test that the Ricci contraction of the Riemann tensor vanishes."""
        st = spacetime(chart)
        ricci = st.contract_inverse(st.riemann(), 0, 2)
        assert all(sp.simplify(ricci[a, b]) == 0 for a, b in itertools.product(range(4), repeat=2))

    @pytest.mark.slow
    def test_radial_tidal_component(self):
        """Test |R_{trtr}| = 2m/r^3 in the static chart."""
        riem = spacetime('static').riemann()
        assert sp.simplify(riem[0, 1, 0, 1] ** 2 - 4 * M ** 2 / R ** 6) == 0

    def test_theta_symbol_shared(self):
        """Test that the angular coordinate is the harmonic-calculus symbol."""
        assert spacetime('static').coords[2] is THETA


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
