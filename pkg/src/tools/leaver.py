"""
Continued-fraction quasinormal frequencies of Schwarzschild perturbations.

Independent oracle for the shooting root finder. Works in units 2M = 1 with
time dependence exp(-i omega t); frequencies are converted back to sigma = omega / (2M).
"""

import logging
from typing import Optional

import mpmath as mp

from ..errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 300
DEFAULT_DPS = 30


def _coefficients(n: int, omega, l: int, s: int):
    rho = -1j * omega
    alpha = n ** 2 + (2 * rho + 2) * n + 2 * rho + 1
    beta = -(2 * n ** 2 + (8 * rho + 2) * n + 8 * rho ** 2 + 4 * rho + l * (l + 1) - (s ** 2 - 1))
    gamma = n ** 2 + 4 * rho * n + 4 * rho ** 2 - s ** 2
    return alpha, beta, gamma


def continued_fraction(omega, l: int, s: int = 2, overtone: int = 0, depth: int = DEFAULT_DEPTH):
    """
    Leaver's three-term condition, inverted `overtone` times.

    The tail is evaluated bottom-up from `depth` with a zero remainder.
    """
    omega = mp.mpc(omega)
    tail = mp.mpc(0)
    for n in range(depth, overtone, -1):
        _, beta, gamma = _coefficients(n, omega, l, s)
        a_prev = _coefficients(n - 1, omega, l, s)[0]
        tail = a_prev * gamma / (beta - tail)
    beta_k = _coefficients(overtone, omega, l, s)[1]
    if overtone == 0:
        return beta_k - tail
    # G_k = beta_k - alpha_{k-1} gamma_k / G_{k-1}, G_0 = beta_0
    head = _coefficients(0, omega, l, s)[1]
    for n in range(1, overtone):
        _, beta, gamma = _coefficients(n, omega, l, s)
        head = beta - _coefficients(n - 1, omega, l, s)[0] * gamma / head
    gamma_k = _coefficients(overtone, omega, l, s)[2]
    a_prev = _coefficients(overtone - 1, omega, l, s)[0]
    return beta_k - a_prev * gamma_k / head - tail


def leaver_frequency(l: int, s: int = 2, overtone: int = 0, mass: float = 1.0,
                     guess: Optional[complex] = None, depth: int = DEFAULT_DEPTH,
                     dps: int = DEFAULT_DPS) -> complex:
    """
    Quasinormal frequency sigma (Im sigma < 0) of spin-s perturbations of degree l.

    Args:
        l: Angular degree, l >= max(s, 1)
        s: 2 gravitational (Regge-Wheeler), 1 electromagnetic, 0 scalar
        overtone: Overtone index n
        mass: Black hole mass
        guess: Starting sigma; defaults to the eikonal estimate
        depth: Continued fraction depth
        dps: mpmath working precision

    Returns:
        sigma in units where the mass is `mass`

    Raises:
        DomainError: For an inadmissible (l, s) pair
        ConvergenceError: If the root search fails
    """
    if s not in (0, 1, 2) or l < max(s, 1 if s else 0):
        raise DomainError(f"invalid (l, s) = ({l}, {s})")
    if mass <= 0:
        raise DomainError(f"mass must be positive, got {mass}")
    if guess is None:
        omega0 = 2 * ((l + 0.5) - 1j * (overtone + 0.5)) / 27 ** 0.5
    else:
        omega0 = complex(guess) * 2 * mass

    with mp.workdps(dps):
        try:
            omega = mp.findroot(lambda w: continued_fraction(w, l, s, overtone, depth), mp.mpc(omega0))
        except (ValueError, ZeroDivisionError) as e:
            raise ConvergenceError(f"continued fraction root search failed for l={l}, n={overtone}: {e}")
        residual = abs(continued_fraction(omega, l, s, overtone, depth))
    sigma = complex(omega) / (2 * mass)
    logger.debug(f"Leaver l={l} s={s} n={overtone}: sigma={sigma} (residual {float(residual):.1e})")
    return sigma
