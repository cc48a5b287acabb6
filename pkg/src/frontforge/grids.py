"""Rectangular parameter domains.

All fields are defined over an axis-aligned box in the (u, v) plane, or in
(u, v, w) space for the three-dimensional pointwise analysis.  Node (i, j)
sits at (u_min + i*hu, v_min + j*hv); arrays indexed over the grid use the
same (i, j) order, so axis 0 is the u direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["DomainGrid"]


@dataclass(frozen=True)
class DomainGrid:
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    nu: int
    nv: int
    w_min: float | None = None
    w_max: float | None = None
    nw: int | None = None

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError("domain bounds must satisfy min < max")
        if self.nu < 2 or self.nv < 2:
            raise ValueError("need at least two nodes per axis")
        has_w = [self.w_min is not None, self.w_max is not None, self.nw is not None]
        if any(has_w) and not all(has_w):
            raise ValueError("w axis needs w_min, w_max and nw together")
        if all(has_w):
            if not self.w_min < self.w_max:
                raise ValueError("domain bounds must satisfy min < max")
            if self.nw < 2:
                raise ValueError("need at least two nodes per axis")

    @property
    def m(self) -> int:
        return 3 if self.nw is not None else 2

    @property
    def hu(self) -> float:
        return (self.u_max - self.u_min) / (self.nu - 1)

    @property
    def hv(self) -> float:
        return (self.v_max - self.v_min) / (self.nv - 1)

    @property
    def hw(self) -> float:
        if self.nw is None:
            raise DomainError("grid has no w axis")
        return (self.w_max - self.w_min) / (self.nw - 1)

    @property
    def spacings(self) -> tuple[float, ...]:
        if self.m == 2:
            return (self.hu, self.hv)
        return (self.hu, self.hv, self.hw)

    @property
    def shape(self) -> tuple[int, ...]:
        if self.m == 2:
            return (self.nu, self.nv)
        return (self.nu, self.nv, self.nw)

    @property
    def lower(self) -> np.ndarray:
        if self.m == 2:
            return np.array([self.u_min, self.v_min])
        return np.array([self.u_min, self.v_min, self.w_min])

    @property
    def upper(self) -> np.ndarray:
        if self.m == 2:
            return np.array([self.u_max, self.v_max])
        return np.array([self.u_max, self.v_max, self.w_max])

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def axis(self, k: int) -> np.ndarray:
        lo, hi = self.lower[k], self.upper[k]
        n = self.shape[k]
        return np.linspace(lo, hi, n)

    def nodes(self) -> np.ndarray:
        """All grid nodes, shape ``self.shape + (m,)``."""
        axes = [self.axis(k) for k in range(self.m)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def node(self, *index: int) -> np.ndarray:
        if len(index) != self.m:
            raise DomainError(f"expected {self.m} indices, got {len(index)}")
        return np.array([self.axis(k)[i] for k, i in enumerate(index)])

    def contains(self, p, tol: float = 0.0) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        lo = self.lower - tol
        hi = self.upper + tol
        return np.all((p >= lo) & (p <= hi), axis=-1)

    def require_inside(self, p, tol: float = 1e-12):
        if not np.all(self.contains(p, tol=tol * max(1.0, self.diameter))):
            raise DomainError("point outside parameter domain")

    def padded(self, pad: int) -> "DomainGrid":
        """Grid extended by ``pad`` rows of the same spacing on every side.

        Shared nodes keep their exact coordinates, so arrays over the padded
        grid slice back with ``[pad:-pad, pad:-pad]``.
        """
        kw = {}
        if self.m == 3:
            kw = dict(w_min=self.w_min - pad * self.hw,
                      w_max=self.w_max + pad * self.hw,
                      nw=self.nw + 2 * pad)
        return DomainGrid(
            self.u_min - pad * self.hu, self.u_max + pad * self.hu,
            self.v_min - pad * self.hv, self.v_max + pad * self.hv,
            self.nu + 2 * pad, self.nv + 2 * pad, **kw,
        )

    def refine(self, factor: int = 2) -> "DomainGrid":
        """Grid with (n-1)*factor + 1 nodes per axis (shares all old nodes)."""
        kw = {}
        if self.m == 3:
            kw = dict(w_min=self.w_min, w_max=self.w_max, nw=(self.nw - 1) * factor + 1)
        return DomainGrid(
            self.u_min, self.u_max, self.v_min, self.v_max,
            (self.nu - 1) * factor + 1, (self.nv - 1) * factor + 1, **kw,
        )
