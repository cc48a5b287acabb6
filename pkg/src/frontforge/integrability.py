"""Residuals certifying that a frontal bundle can be realized.

For coordinate fields X = d/du_k, Y = d/du_l (whose bracket vanishes) the
conditions checked here are

* Codazzi, for chi in {phi, psi}:   D_k chi_l - D_l chi_k = 0,
* Gauss at ambient curvature c:
      <R(k,l) e_a, e_b> = c (phi_l^a phi_k^b - phi_l^b phi_k^a)
                            + (psi_l^a psi_k^b - psi_l^b psi_k^a),
  with R(k,l) = d_k Omega_l - d_l Omega_k + [Omega_k, Omega_l],
* and, for m = 2 with scalar connection form omega,
      d omega = c * det(phi) + det(psi),
  which is the same Gauss identity written through the two area forms.

All residuals are max-norms, vectorized over batches of points.  They need
derivative providers; fields without them are wrapped with finite
differences at the default step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import FrontBundleField, with_fd_derivatives
from .errors import DimensionError, RegularityError
from .grids import DomainGrid

__all__ = [
    "codazzi_residual",
    "two_d_integrability_residual",
    "gauss_residual",
    "map_integrability_residual",
    "gauss_curvature_identity_residual",
    "metric_gaussian_curvature",
    "brioschi",
    "ResidualReport",
    "residual_report",
]


def _prepared(field: FrontBundleField) -> FrontBundleField:
    return field if field.has_derivatives else with_fd_derivatives(field)


def codazzi_residual(field: FrontBundleField, p, which: str = "phi") -> np.ndarray:
    """Max-norm of D_k chi_l - D_l chi_k over coordinate pairs k < l."""
    field = _prepared(field)
    p = np.asarray(p, dtype=float)
    if which == "phi":
        chi, dchi = field.phi(p), field.dphi(p)
    elif which == "psi":
        chi, dchi = field.psi(p), field.dpsi(p)
    else:
        raise ValueError("which must be 'phi' or 'psi'")
    om = field.omega(p)
    m = field.m
    worst = 0.0
    out = None
    for k in range(m):
        for l in range(k + 1, m):
            dk_chi_l = dchi[..., k, :, l] + np.einsum("...ij,...j->...i", om[..., k, :, :], chi[..., :, l])
            dl_chi_k = dchi[..., l, :, k] + np.einsum("...ij,...j->...i", om[..., l, :, :], chi[..., :, k])
            r = np.abs(dk_chi_l - dl_chi_k).max(axis=-1)
            out = r if out is None else np.maximum(out, r)
    return out if out is not None else worst


def _curvature_matrices(field: FrontBundleField, p):
    """R(k,l) for all k < l, list of (k, l, matrix)."""
    om = field.omega(p)
    dom = field.domega(p)
    m = field.m
    mats = []
    for k in range(m):
        for l in range(k + 1, m):
            r = (
                dom[..., k, l, :, :] - dom[..., l, k, :, :]
                + om[..., k, :, :] @ om[..., l, :, :]
                - om[..., l, :, :] @ om[..., k, :, :]
            )
            mats.append((k, l, r))
    return mats


def gauss_residual(field: FrontBundleField, c: float, p) -> np.ndarray:
    """Max Gauss-equation defect over all fiber pairs and coordinate pairs."""
    field = _prepared(field)
    p = np.asarray(p, dtype=float)
    phi = field.phi(p)
    psi = field.psi(p)
    out = None
    for k, l, r in _curvature_matrices(field, p):
        # <R(k,l) e_a, e_b> is entry [b, a] of the curvature matrix.
        lhs = np.swapaxes(r, -1, -2)
        rhs = c * (
            phi[..., :, l, None] * phi[..., None, :, k]
            - phi[..., None, :, l] * phi[..., :, k, None]
        ) + (
            psi[..., :, l, None] * psi[..., None, :, k]
            - psi[..., None, :, l] * psi[..., :, k, None]
        )
        res = np.abs(lhs - rhs).max(axis=(-1, -2))
        out = res if out is None else np.maximum(out, res)
    return out


def map_integrability_residual(field: FrontBundleField, c: float, p) -> np.ndarray:
    """Gauss defect for a bare coherent tangent bundle (second homomorphism zero).

    Evaluates R(X, Y) xi = c (<phi(Y), xi> phi(X) - <phi(X), xi> phi(Y))
    directly; coincides with :func:`gauss_residual` once psi is zeroed.
    """
    field = _prepared(field)
    p = np.asarray(p, dtype=float)
    phi = field.phi(p)
    out = None
    for k, l, r in _curvature_matrices(field, p):
        lhs = np.swapaxes(r, -1, -2)
        rhs = c * (
            phi[..., :, l, None] * phi[..., None, :, k]
            - phi[..., None, :, l] * phi[..., :, k, None]
        )
        res = np.abs(lhs - rhs).max(axis=(-1, -2))
        out = res if out is None else np.maximum(out, res)
    return out


def two_d_integrability_residual(field: FrontBundleField, c: float, p) -> np.ndarray:
    """|d omega - c det(phi) - det(psi)| for rank-2 bundles."""
    if field.m != 2:
        raise DimensionError("the scalar identity needs m = 2")
    field = _prepared(field)
    p = np.asarray(p, dtype=float)
    dom = field.domega(p)
    # omega(d/dv) lives at matrix entry [0, 1] of Omega_v.
    domega_uv = dom[..., 0, 1, 0, 1] - dom[..., 1, 0, 0, 1]
    alpha = np.linalg.det(field.phi(p))
    beta = np.linalg.det(field.psi(p))
    return np.abs(domega_uv - c * alpha - beta)


# ---------------------------------------------------------------------------
# Gaussian curvature of the first fundamental form


def brioschi(E, F, G, Eu, Ev, Fu, Fv, Gu, Gv, Evv, Fuv, Guu):
    """Brioschi formula for the Gaussian curvature from metric coefficients."""
    det1 = (
        (-0.5 * Evv + Fuv - 0.5 * Guu) * (E * G - F * F)
        - 0.5 * Eu * ((Fv - 0.5 * Gu) * G - F * 0.5 * Gv)
        + (Fu - 0.5 * Ev) * ((Fv - 0.5 * Gu) * F - E * 0.5 * Gv)
    )
    det2 = -(0.5 * Ev) * (0.5 * Ev * G - F * 0.5 * Gu) + 0.5 * Gu * (0.5 * Ev * F - E * 0.5 * Gu)
    return (det1 - det2) / (E * G - F * F) ** 2


def metric_gaussian_curvature(field: FrontBundleField, p, h: float = 1e-4) -> np.ndarray:
    """Gaussian curvature of ds^2_phi at phi-regular points, by differencing I.

    The step 1e-4 balances the second-difference truncation against roundoff
    for metric coefficients of order one.
    """
    if field.m != 2:
        raise DimensionError("Gaussian curvature needs m = 2")
    p = np.asarray(p, dtype=float)

    def metric(q):
        phi = field.phi(q)
        return np.swapaxes(phi, -1, -2) @ phi

    def d1(fn, q, axis):
        e = np.zeros(2)
        e[axis] = h
        return (fn(q + e) - fn(q - e)) / (2 * h)

    g = metric(p)
    gu = d1(metric, p, 0)
    gv = d1(metric, p, 1)
    guu = (metric(_off(p, 0, h)) - 2 * g + metric(_off(p, 0, -h))) / h**2
    gvv = (metric(_off(p, 1, h)) - 2 * g + metric(_off(p, 1, -h))) / h**2
    guv = (
        metric(_off(_off(p, 0, h), 1, h))
        - metric(_off(_off(p, 0, h), 1, -h))
        - metric(_off(_off(p, 0, -h), 1, h))
        + metric(_off(_off(p, 0, -h), 1, -h))
    ) / (4 * h**2)

    return brioschi(
        g[..., 0, 0], g[..., 0, 1], g[..., 1, 1],
        gu[..., 0, 0], gv[..., 0, 0],
        gu[..., 0, 1], gv[..., 0, 1],
        gu[..., 1, 1], gv[..., 1, 1],
        gvv[..., 0, 0], guv[..., 0, 1], guu[..., 1, 1],
    )


def _off(p, axis, delta):
    q = np.array(p, dtype=float, copy=True)
    q[..., axis] = q[..., axis] + delta
    return q


def gauss_curvature_identity_residual(field: FrontBundleField, p,
                                      tol_reg: float | None = None) -> np.ndarray:
    """|d omega - K_phi * lambda_phi| at a phi-regular point (m = 2).

    K_phi is the Gaussian curvature of the first fundamental form via the
    Brioschi formula; the identity couples the connection to the metric.
    """
    if field.m != 2:
        raise DimensionError("the identity needs m = 2")
    field = _prepared(field)
    p = np.asarray(p, dtype=float)
    lam = np.linalg.det(field.phi(p))
    if tol_reg is None:
        probe = np.abs(np.linalg.det(field.phi(field.domain.nodes())))
        tol_reg = 1e-8 * float(probe.max())
    if np.any(np.abs(lam) <= tol_reg):
        raise RegularityError("point is phi-singular; the curvature of I is undefined there")
    dom = field.domega(p)
    domega_uv = dom[..., 0, 1, 0, 1] - dom[..., 1, 0, 0, 1]
    k_phi = metric_gaussian_curvature(field, p)
    return np.abs(domega_uv - k_phi * lam)


# ---------------------------------------------------------------------------
# Whole-grid certification


@dataclass(frozen=True)
class ResidualReport:
    grid: DomainGrid
    c: float
    codazzi_phi: np.ndarray
    codazzi_psi: np.ndarray
    gauss: np.ndarray
    two_d: np.ndarray | None
    spacing: tuple

    @property
    def max_codazzi_phi(self) -> float:
        return float(self.codazzi_phi.max())

    @property
    def max_codazzi_psi(self) -> float:
        return float(self.codazzi_psi.max())

    @property
    def max_gauss(self) -> float:
        return float(self.gauss.max())

    @property
    def max_two_d(self) -> float:
        return float(self.two_d.max()) if self.two_d is not None else float("nan")

    @property
    def max_overall(self) -> float:
        vals = [self.max_codazzi_phi, self.max_codazzi_psi, self.max_gauss]
        if self.two_d is not None:
            vals.append(self.max_two_d)
        return max(vals)

    def passes(self, tolerance: float) -> bool:
        return self.max_overall < tolerance

    def summary(self) -> dict:
        return {
            "c": self.c,
            "max_codazzi_phi": self.max_codazzi_phi,
            "max_codazzi_psi": self.max_codazzi_psi,
            "max_gauss": self.max_gauss,
            "max_two_d": None if self.two_d is None else self.max_two_d,
            "max_overall": self.max_overall,
        }


def residual_report(field: FrontBundleField, c: float,
                    grid: DomainGrid | None = None) -> ResidualReport:
    """Evaluate every integrability residual on all grid nodes."""
    grid = grid or field.domain
    field = _prepared(field)
    pts = grid.nodes()
    two_d = two_d_integrability_residual(field, c, pts) if field.m == 2 else None
    return ResidualReport(
        grid=grid,
        c=c,
        codazzi_phi=codazzi_residual(field, pts, "phi"),
        codazzi_psi=codazzi_residual(field, pts, "psi"),
        gauss=gauss_residual(field, c, pts),
        two_d=two_d,
        spacing=grid.spacings,
    )
