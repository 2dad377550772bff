"""Finite-difference differentiation matrices on nonuniform grids."""

import logging
from typing import Dict

import numpy as np
from scipy import sparse

from ..errors import DomainError

logger = logging.getLogger(__name__)

SCHEME_ORDERS = {'FD2': 2, 'FD4': 4}


def fornberg_weights(x0: float, nodes: np.ndarray, max_deriv: int) -> np.ndarray:
    """
    Fornberg's recursion for finite-difference weights.

    Args:
        x0: Evaluation point
        nodes: Stencil nodes
        max_deriv: Highest derivative order

    Returns:
        Array c[k, j]: weight of nodes[j] in the k-th derivative at x0
    """
    n = len(nodes)
    c = np.zeros((max_deriv + 1, n))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, max_deriv)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def diff_matrices(grid: np.ndarray, scheme: str = 'FD2') -> Dict[int, sparse.csr_matrix]:
    """
    Sparse first- and second-derivative matrices on a strictly increasing grid.

    Interior rows use centered stencils; the stencil is shifted inward at both ends
    so that every row keeps the nominal order.

    Args:
        grid: Strictly increasing nodes
        scheme: 'FD2' or 'FD4'

    Returns:
        {1: D1, 2: D2} in CSR format
    """
    if scheme not in SCHEME_ORDERS:
        raise DomainError(f"unknown finite-difference scheme '{scheme}'")
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    order = SCHEME_ORDERS[scheme]
    width = order + 2
    n = len(grid)
    if n < width:
        raise DomainError(f"{scheme} needs at least {width} grid points, got {n}")

    half = width // 2
    rows, cols, v1, v2 = [], [], [], []
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        idx = np.arange(start, start + width)
        w = fornberg_weights(grid[i], grid[idx], 2)
        rows.extend([i] * width)
        cols.extend(idx)
        v1.extend(w[1])
        v2.extend(w[2])

    shape = (n, n)
    return {
        1: sparse.csr_matrix((v1, (rows, cols)), shape=shape),
        2: sparse.csr_matrix((v2, (rows, cols)), shape=shape),
    }


def geometric_grid(r_min: float, r_max: float, n: int, r_h: float) -> np.ndarray:
    """Grid whose distances to r_h form a geometric progression."""
    if not r_h < r_min < r_max:
        raise DomainError(f"grid needs r_h < r_min < r_max, got {r_h}, {r_min}, {r_max}")
    return r_h + np.geomspace(r_min - r_h, r_max - r_h, n)
