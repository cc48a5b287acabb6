"""Finite-difference stencils used when analytic derivatives are absent.

Pointwise derivatives of providers use 5-point central differences (fourth
order), which keeps nested differentiation (connection matrices, then their
derivatives) well below the residual tolerances.  Grid derivatives use
fourth-order stencils throughout: central in the interior and one-sided
6-point windows at the boundary rows, with dedicated second-derivative
weights so curvature formulas stay accurate up to the grid edge.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

__all__ = [
    "derivative_stack",
    "partial_derivative",
    "grid_derivative",
    "grid_second_derivative",
    "fd_weights",
]


def _shift(p, axis, delta):
    q = np.array(p, dtype=float, copy=True)
    q[..., axis] = q[..., axis] + delta
    return q


def partial_derivative(fn, p, axis: int, h: float):
    """Fourth-order central difference of ``fn`` along one coordinate axis."""
    f_m2 = fn(_shift(p, axis, -2 * h))
    f_m1 = fn(_shift(p, axis, -h))
    f_p1 = fn(_shift(p, axis, h))
    f_p2 = fn(_shift(p, axis, 2 * h))
    return (f_m2 - 8.0 * f_m1 + 8.0 * f_p1 - f_p2) / (12.0 * h)


def derivative_stack(fn, h: float):
    """Wrap ``fn`` into a provider of all coordinate derivatives.

    The result maps points of shape (..., m) to arrays of shape
    (..., m) + out_shape, the new axis (right after the batch axes) being the
    differentiation direction.
    """

    def dfn(p):
        p = np.asarray(p, dtype=float)
        m = p.shape[-1]
        batch_ndim = p.ndim - 1
        parts = [partial_derivative(fn, p, k, h) for k in range(m)]
        return np.stack(parts, axis=batch_ndim)

    return dfn


@lru_cache(maxsize=128)
def fd_weights(offsets: tuple, deriv: int) -> np.ndarray:
    """Weights w with sum w_k f(x + o_k h) ~ h^deriv f^(deriv)(x).

    Solves the Vandermonde moment system; exact on polynomials of degree
    below len(offsets).
    """
    offs = np.asarray(offsets, dtype=float)
    n = len(offs)
    mat = np.vander(offs, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = factorial(deriv)
    return np.linalg.solve(mat, rhs)


def _apply_rows(arr, h, axis, deriv, central_width, edge_width):
    arr = np.asarray(arr, dtype=float)
    moved = np.moveaxis(arr, axis, 0)
    n = moved.shape[0]
    if n <= deriv:
        raise ValueError(f"need more than {deriv} samples along the axis")
    out = np.empty_like(moved)
    if n < central_width:
        # Short axis: one dense stencil per row (order limited by n).
        for i in range(n):
            w = fd_weights(tuple(k - i for k in range(n)), deriv)
            out[i] = sum(wk * moved[k] for k, wk in enumerate(w))
        return np.moveaxis(out / h**deriv, 0, axis)

    ew = min(edge_width, n)
    half = central_width // 2
    central = fd_weights(tuple(range(-half, half + 1)), deriv)
    idx = np.arange(half, n - half)
    out[half: n - half] = sum(w * moved[idx + k]
                              for k, w in zip(range(-half, half + 1), central))
    for i in range(half):
        lo = fd_weights(tuple(o - i for o in range(ew)), deriv)
        out[i] = sum(w * moved[k] for k, w in enumerate(lo))
        hi = fd_weights(tuple(i - o for o in range(ew)), deriv)
        out[n - 1 - i] = sum(w * moved[n - 1 - k] for k, w in enumerate(hi))
    return np.moveaxis(out / h**deriv, 0, axis)


def grid_derivative(arr: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order first derivative of sampled values along ``axis``."""
    return _apply_rows(arr, h, axis, 1, central_width=5, edge_width=7)


def grid_second_derivative(arr: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order second derivative of sampled values along ``axis``."""
    return _apply_rows(arr, h, axis, 2, central_width=5, edge_width=8)
