"""Sixth-order finite differences with one-sided closures at the box faces."""
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.linalg import solve

HALF_WIDTH = 3
CLOSURE_POINTS = 8


@lru_cache(maxsize=64)
def fd_weights(offsets: tuple[int, ...], order: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + offsets_j h) ~ h^order f^(order)(x).

    Solves the Taylor moment conditions; exact for polynomials of degree
    below len(offsets).
    """
    n = len(offsets)
    if order >= n:
        raise ValueError(f'need more than {order} points for derivative order {order}')
    powers = np.arange(n)[:, None]
    moments = np.asarray(offsets, dtype=np.float64)[None, :] ** powers
    rhs = np.zeros(n)
    rhs[order] = factorial(order)
    return solve(moments, rhs)


@lru_cache(maxsize=16)
def _closures(n: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    center = fd_weights(tuple(range(-HALF_WIDTH, HALF_WIDTH + 1)), order)
    left = np.stack([fd_weights(tuple(j - i for j in range(CLOSURE_POINTS)), order) for i in range(HALF_WIDTH)])
    right = np.stack([
        fd_weights(tuple(j - i for j in range(n - CLOSURE_POINTS, n)), order)
        for i in range(n - HALF_WIDTH, n)
    ])
    return center, left, right


def derivative_along(values: np.ndarray, axis: int, order: int, h: float) -> np.ndarray:
    """d^order/dx_axis^order of samples along a 0-based array axis (order 1 or 2)."""
    moved = np.moveaxis(values, axis, 0)
    n = moved.shape[0]
    center, left, right = _closures(n, order)
    out = np.empty_like(moved)
    interior = np.zeros_like(moved[HALF_WIDTH:n - HALF_WIDTH])
    for j, w in enumerate(center):
        interior += w * moved[j:n - 2 * HALF_WIDTH + j]
    out[HALF_WIDTH:n - HALF_WIDTH] = interior
    out[:HALF_WIDTH] = np.tensordot(left, moved[:CLOSURE_POINTS], axes=(1, 0))
    out[n - HALF_WIDTH:] = np.tensordot(right, moved[n - CLOSURE_POINTS:], axes=(1, 0))
    return np.moveaxis(out / h**order, 0, axis)


def partial_fd(values: np.ndarray, beta: tuple[int, int, int], h: float) -> np.ndarray:
    """d^beta composed axis by axis from second- and first-order stencils."""
    out = values
    for axis, count in enumerate(beta):
        for _ in range(count // 2):
            out = derivative_along(out, axis, 2, h)
        if count % 2:
            out = derivative_along(out, axis, 1, h)
    return out
