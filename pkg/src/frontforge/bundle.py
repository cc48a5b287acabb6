"""Discrete front bundles in a fixed orthonormal gauge.

A front bundle over a planar domain is stored as three pointwise providers:

* ``phi(p)``   -> (..., m, m): columns are the images phi_1..phi_m of the
  coordinate fields under the first homomorphism, expressed in a single
  global positively oriented orthonormal fiber frame;
* ``psi(p)``   -> (..., m, m): same layout for the second homomorphism;
* ``omega(p)`` -> (..., m, m, m): ``omega(p)[..., k, :, :]`` is the
  antisymmetric connection matrix of the metric connection evaluated on the
  k-th coordinate field.  Covariant derivatives of fiber components act as
  ``D_k xi = d_k xi + omega_k @ xi``.

Because the gauge is orthonormal, the fiber metric is the dot product and
the co-orientation form is the determinant, so the jacobian of phi is just
``det(phi)``.  Providers are vectorized over leading point axes and must be
immutable after construction.

Optional providers ``dphi``/``dpsi``/``domega`` hold coordinate derivatives
(differentiation axis right after the batch axes).  Fields built from closed
forms carry exact ones; :func:`with_fd_derivatives` fills missing providers
with finite differences.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._stencil import derivative_stack
from .errors import DomainError
from .grids import DomainGrid

__all__ = [
    "FrontBundleField",
    "FundamentalForms",
    "constant_field",
    "eval_phi",
    "eval_psi",
    "eval_omega",
    "fundamental_forms",
    "phi_jacobian",
    "compatibility_residual",
    "front_condition_margin",
    "with_fd_derivatives",
    "default_fd_step",
]


@dataclass(frozen=True)
class FrontBundleField:
    m: int
    domain: DomainGrid
    phi: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray]
    omega: Callable[[np.ndarray], np.ndarray]
    dphi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dpsi: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domega: Optional[Callable[[np.ndarray], np.ndarray]] = None
    provenance: str = "analytic"
    name: str = "field"

    def replace(self, **kw) -> "FrontBundleField":
        return dataclasses.replace(self, **kw)

    @property
    def has_derivatives(self) -> bool:
        return None not in (self.dphi, self.dpsi, self.domega)


def default_fd_step(domain: DomainGrid) -> float:
    """Differencing step for provider derivatives: 1e-4 of the domain diameter."""
    return 1e-4 * domain.diameter


def with_fd_derivatives(field: FrontBundleField, h: float | None = None) -> FrontBundleField:
    """Fill in missing derivative providers by finite differences."""
    if h is None:
        h = default_fd_step(field.domain)
    return field.replace(
        dphi=field.dphi or derivative_stack(field.phi, h),
        dpsi=field.dpsi or derivative_stack(field.psi, h),
        domega=field.domega or derivative_stack(field.omega, h),
    )


def constant_field(phi0, psi0, domain: DomainGrid, name: str = "constant") -> FrontBundleField:
    """Field with constant homomorphisms and vanishing connection."""
    phi0 = np.asarray(phi0, dtype=float)
    psi0 = np.asarray(psi0, dtype=float)
    m = phi0.shape[0]

    def broadcast(mat):
        def fn(p):
            p = np.asarray(p, dtype=float)
            return np.broadcast_to(mat, p.shape[:-1] + mat.shape).copy()
        return fn

    zero_omega = broadcast(np.zeros((m, m, m)))
    zero_d = broadcast(np.zeros((m, m, m)))
    zero_domega = broadcast(np.zeros((m, m, m, m)))
    return FrontBundleField(
        m=m, domain=domain,
        phi=broadcast(phi0), psi=broadcast(psi0), omega=zero_omega,
        dphi=zero_d, dpsi=zero_d, domega=zero_domega,
        name=name,
    )


def eval_phi(field: FrontBundleField, p) -> np.ndarray:
    """Fiber columns of the first homomorphism at ``p`` (checked)."""
    field.domain.require_inside(p)
    return field.phi(np.asarray(p, dtype=float))


def eval_psi(field: FrontBundleField, p) -> np.ndarray:
    field.domain.require_inside(p)
    return field.psi(np.asarray(p, dtype=float))


def eval_omega(field: FrontBundleField, p) -> np.ndarray:
    field.domain.require_inside(p)
    return field.omega(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class FundamentalForms:
    I: np.ndarray
    II: np.ndarray
    III: np.ndarray


def fundamental_forms(field: FrontBundleField, p) -> FundamentalForms:
    """First, second and third fundamental forms at ``p``.

    I_jk = <phi_j, phi_k>, II_jk = -<phi_j, psi_k>, III_jk = <psi_j, psi_k>.
    II comes out symmetric exactly when the compatibility residual vanishes.
    """
    field.domain.require_inside(p)
    phi = field.phi(np.asarray(p, dtype=float))
    psi = field.psi(np.asarray(p, dtype=float))
    tp = np.swapaxes(phi, -1, -2)
    return FundamentalForms(
        I=tp @ phi,
        II=-(tp @ psi),
        III=np.swapaxes(psi, -1, -2) @ psi,
    )


def phi_jacobian(field: FrontBundleField, p) -> np.ndarray:
    """det(phi_1, ..., phi_m); zero exactly on the singular set."""
    return np.linalg.det(field.phi(np.asarray(p, dtype=float)))


def compatibility_residual(field: FrontBundleField, p) -> np.ndarray:
    """max_{j<k} |<phi_j, psi_k> - <phi_k, psi_j>| at ``p``.

    Zero certifies the frontal-bundle symmetry of the pair (phi, psi).
    """
    p = np.asarray(p, dtype=float)
    phi = field.phi(p)
    psi = field.psi(p)
    gram = np.swapaxes(phi, -1, -2) @ psi
    skew = gram - np.swapaxes(gram, -1, -2)
    return np.abs(skew).max(axis=(-1, -2))


def front_condition_margin(field: FrontBundleField, p) -> np.ndarray:
    """Smallest eigenvalue of I + III; positive iff the bundle is a front at ``p``."""
    p = np.asarray(p, dtype=float)
    phi = field.phi(p)
    psi = field.psi(p)
    s = np.swapaxes(phi, -1, -2) @ phi + np.swapaxes(psi, -1, -2) @ psi
    return np.linalg.eigvalsh(s)[..., 0]
