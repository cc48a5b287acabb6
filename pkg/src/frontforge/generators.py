"""Constant-curvature front-bundle generators.

Both constructions take a scalar angle function theta(u, v) and produce a
front bundle over the domain:

* the Chebyshev-net (asymptotic-line) data

      phi_u = ( cos(theta/2), -sin(theta/2)),  phi_v = (cos(theta/2),  sin(theta/2)),
      psi_u = (-sin(theta/2), -cos(theta/2)),  psi_v = (-sin(theta/2), cos(theta/2)),
      connection 1-form  omega = (theta_u du - theta_v dv) / 2,

  whose fundamental forms are I = du^2 + 2 cos(theta) du dv + dv^2,
  II = 2 sin(theta) du dv, III = du^2 - 2 cos(theta) du dv + dv^2.  The data
  satisfy both Codazzi identities for every theta; they satisfy the Gauss
  equation at ambient curvature c exactly when theta_uv = (1 - c) sin(theta).
  In particular theta_uv = sin(theta) (the classical sine-Gordon equation,
  solved by the 1-soliton below) gives data realizable in Euclidean 3-space
  as a pseudospherical front.

* the curvature-line data

      phi_u = 2 cosh(theta/2) a1, phi_v = 2 sinh(theta/2) a2,
      psi_u = -2 sinh(theta/2) a1, psi_v = -2 cosh(theta/2) a2,
      omega = (theta_v du - theta_u dv) / 2,

  with I = 4 (cosh^2(theta/2) du^2 + sinh^2(theta/2) dv^2) and
  II = 4 cosh(theta/2) sinh(theta/2) (du^2 + dv^2).  These are 0-integrable
  exactly when (theta_uu + theta_vv)/4 = -sinh(theta) (elliptic
  sinh-Gordon), producing fronts of Gaussian curvature +1 in 3-space.

Angle fields come either from exact solutions (closed forms, or a
high-accuracy ODE profile) or from the two PDE solvers in this module.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.integrate
import scipy.sparse
import scipy.sparse.linalg

from .bundle import FrontBundleField
from .errors import NonconvergenceError, PreconditionError
from .grids import DomainGrid

__all__ = [
    "ThetaSource",
    "ThetaField",
    "exact_soliton",
    "soliton_source",
    "soliton_theta_field",
    "sinh_profile_source",
    "additive_source",
    "linear_source",
    "solve_sine_gordon_goursat",
    "solve_sinh_gordon_dirichlet",
    "chebyshev_bundle",
    "curvatureline_bundle",
    "grid_theta_source",
]


class ThetaSource:
    """Scalar field with gradient and hessian, evaluable anywhere.

    ``value`` maps (..., 2) points to scalars, ``grad`` to (..., 2) and
    ``hess`` to (..., 2, 2).  Missing derivative callables fall back to
    central differences of ``value``.
    """

    def __init__(self, value, grad=None, hess=None, h: float = 1e-5, tag: str = "exact"):
        self._value = value
        self._grad = grad
        self._hess = hess
        self._h = h
        self.tag = tag

    def value(self, p):
        p = np.asarray(p, dtype=float)
        return self._value(p)

    def grad(self, p):
        p = np.asarray(p, dtype=float)
        if self._grad is not None:
            return self._grad(p)
        h = self._h
        parts = []
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            parts.append((self._value(p + e) - self._value(p - e)) / (2 * h))
        return np.stack(parts, axis=-1)

    def hess(self, p):
        p = np.asarray(p, dtype=float)
        if self._hess is not None:
            return self._hess(p)
        h = self._h
        rows = []
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            rows.append((self.grad(p + e) - self.grad(p - e)) / (2 * h))
        hess = np.stack(rows, axis=-2)
        return 0.5 * (hess + np.swapaxes(hess, -1, -2))


# ---------------------------------------------------------------------------
# Exact solutions


def exact_soliton(u, v, k: float = 1.0):
    """1-soliton angle 4*arctan(exp(k*(u+v))); solves theta_uv = k^2 sin(theta)."""
    w = k * (np.asarray(u, dtype=float) + np.asarray(v, dtype=float))
    base = 4.0 * np.arctan(np.exp(-np.abs(w)))
    return np.where(w > 0, 2.0 * np.pi - base, base)


def _sech(w):
    return 2.0 * np.exp(-np.abs(w)) / (1.0 + np.exp(-2.0 * np.abs(w)))


def soliton_source(k: float = 1.0) -> ThetaSource:
    """Exact provider for the 1-soliton, with closed-form derivatives."""

    def value(p):
        return exact_soliton(p[..., 0], p[..., 1], k)

    def grad(p):
        w = k * (p[..., 0] + p[..., 1])
        g = 2.0 * k * _sech(w)
        return np.stack([g, g], axis=-1)

    def hess(p):
        w = k * (p[..., 0] + p[..., 1])
        t = np.tanh(w)
        h = -2.0 * k * k * _sech(w) * t
        return np.stack([np.stack([h, h], axis=-1), np.stack([h, h], axis=-1)], axis=-2)

    return ThetaSource(value, grad, hess, tag="exact")


@lru_cache(maxsize=16)
def _sinh_profile(amplitude: float, span: float):
    """Profile theta(u) with theta'' = -4 sinh(theta), theta(0)=amplitude, theta'(0)=0."""

    def rhs(_u, y):
        return [y[1], -4.0 * np.sinh(y[0])]

    right = scipy.integrate.solve_ivp(
        rhs, (0.0, span), [amplitude, 0.0], dense_output=True,
        rtol=1e-13, atol=1e-14, method="DOP853")
    left = scipy.integrate.solve_ivp(
        rhs, (0.0, -span), [amplitude, 0.0], dense_output=True,
        rtol=1e-13, atol=1e-14, method="DOP853")
    return left, right


def sinh_profile_source(amplitude: float = 1.0, span: float = 4.0) -> ThetaSource:
    """v-independent sinh-Gordon solution from a pendulum-type profile.

    theta(u, v) = theta0(u) with theta0'' = -4 sinh(theta0), so the elliptic
    equation (theta_uu + theta_vv)/4 = -sinh(theta) holds exactly.  Second
    derivatives are taken from the equation itself, which keeps the
    curvature-line data integrable to solver precision.
    """
    left, right = _sinh_profile(float(amplitude), float(span))

    def state(u):
        u = np.asarray(u, dtype=float)
        flat = np.ravel(u)
        th = np.empty_like(flat)
        dth = np.empty_like(flat)
        neg = flat < 0
        if np.any(neg):
            vals = left.sol(flat[neg])
            th[neg], dth[neg] = vals[0], vals[1]
        if np.any(~neg):
            vals = right.sol(flat[~neg])
            th[~neg], dth[~neg] = vals[0], vals[1]
        return th.reshape(u.shape), dth.reshape(u.shape)

    def value(p):
        th, _ = state(p[..., 0])
        return th

    def grad(p):
        th, dth = state(p[..., 0])
        return np.stack([dth, np.zeros_like(dth)], axis=-1)

    def hess(p):
        th, _ = state(p[..., 0])
        zero = np.zeros_like(th)
        uu = -4.0 * np.sinh(th)
        return np.stack(
            [np.stack([uu, zero], axis=-1), np.stack([zero, zero], axis=-1)],
            axis=-2,
        )

    return ThetaSource(value, grad, hess, tag="exact")


def additive_source(f0: Callable, g0: Callable, corner: float = 0.0) -> ThetaSource:
    """theta(u, v) = f0(u) + g0(v) - corner (solves theta_uv = 0)."""

    def value(p):
        return np.asarray(f0(p[..., 0]), dtype=float) + np.asarray(g0(p[..., 1]), dtype=float) - corner

    return ThetaSource(value, tag="exact")


def linear_source(slope_u: float, slope_v: float, offset: float = 0.0) -> ThetaSource:
    """theta = slope_u * u + slope_v * v + offset, with exact derivatives."""

    def value(p):
        return slope_u * p[..., 0] + slope_v * p[..., 1] + offset

    def grad(p):
        shape = p.shape[:-1]
        return np.broadcast_to(np.array([slope_u, slope_v]), shape + (2,)).copy()

    def hess(p):
        return np.zeros(p.shape[:-1] + (2, 2))

    return ThetaSource(value, grad, hess, tag="exact")


# ---------------------------------------------------------------------------
# Theta grids and PDE solvers


@dataclass(frozen=True)
class ThetaField:
    grid: DomainGrid
    values: np.ndarray
    source: str
    residual: float
    exact: Optional[ThetaSource] = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["nu", "nv", "u_min", "u_max", "v_min", "v_max", "source", "residual"])
        writer.writerow([
            self.grid.nu, self.grid.nv,
            self.grid.u_min, self.grid.u_max, self.grid.v_min, self.grid.v_max,
            self.source, repr(float(self.residual)),
        ])
        for i in range(self.grid.nu):
            writer.writerow([repr(float(x)) for x in self.values[i]])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "ThetaField":
        rows = list(csv.reader(io.StringIO(text)))
        header = rows[1]
        nu, nv = int(header[0]), int(header[1])
        grid = DomainGrid(float(header[2]), float(header[3]),
                          float(header[4]), float(header[5]), nu, nv)
        values = np.array([[float(x) for x in row] for row in rows[2:2 + nu]])
        return ThetaField(grid, values, header[6], float(header[7]))


def soliton_theta_field(grid: DomainGrid, k: float = 1.0) -> ThetaField:
    src = soliton_source(k)
    values = src.value(grid.nodes())
    return ThetaField(grid, values, "exact", 0.0, exact=src)


def _goursat_residual(values, grid, c):
    """Centered mixed difference vs (c-1) sin(theta) at interior nodes."""
    hu, hv = grid.hu, grid.hv
    mixed = (values[2:, 2:] - values[2:, :-2] - values[:-2, 2:] + values[:-2, :-2]) / (4 * hu * hv)
    target = (c - 1.0) * np.sin(values[1:-1, 1:-1])
    return float(np.abs(mixed - target).max())


def solve_sine_gordon_goursat(c: float, f0: Callable, g0: Callable, grid: DomainGrid) -> ThetaField:
    """Characteristic marching for theta_uv = (c - 1) sin(theta).

    ``f0`` supplies theta on the edge v = v_min, ``g0`` on u = u_min; the two
    must agree at the corner.  Each cell update evaluates the right-hand side
    at the average of the four cell corners and runs two fixed-point sweeps,
    which matches the second-order accuracy of the scheme.
    """
    u = grid.axis(0)
    v = grid.axis(1)
    edge_u = np.asarray(f0(u), dtype=float)
    edge_v = np.asarray(g0(v), dtype=float)
    if abs(edge_u[0] - edge_v[0]) > 1e-12 * max(1.0, np.abs(edge_u).max()):
        raise PreconditionError("Goursat edge data disagree at the corner")

    theta = np.zeros((grid.nu, grid.nv))
    theta[:, 0] = edge_u
    theta[0, :] = edge_v
    coef = grid.hu * grid.hv * (c - 1.0)

    # March along anti-diagonals: all cells on one diagonal are independent.
    for d in range(2, grid.nu + grid.nv - 1):
        i = np.arange(max(1, d - grid.nv + 1), min(grid.nu - 1, d - 1) + 1)
        j = d - i
        if i.size == 0:
            continue
        known = theta[i - 1, j] + theta[i, j - 1] - theta[i - 1, j - 1]
        corner_sum = theta[i - 1, j] + theta[i, j - 1] + theta[i - 1, j - 1]
        guess = known
        for _ in range(2):
            guess = known + coef * np.sin((corner_sum + guess) / 4.0)
        theta[i, j] = guess

    return ThetaField(grid, theta, "goursat", _goursat_residual(theta, grid, c))


def _laplacian_matrix(nu, nv, hu, hv):
    """5-point Laplacian on the interior nodes (Dirichlet data eliminated)."""
    n = (nu - 2) * (nv - 2)
    main = np.full(n, -2.0 / hu**2 - 2.0 / hv**2)
    # Interior layout: row-major over (i, j), j fastest.
    width = nv - 2
    off_v = np.ones(n - 1) / hv**2
    off_v[np.arange(1, n) % width == 0] = 0.0
    lap = scipy.sparse.diags(
        [main, off_v, off_v, np.ones(n - width) / hu**2, np.ones(n - width) / hu**2],
        [0, 1, -1, width, -width],
        format="csc",
    )
    return lap


def solve_sinh_gordon_dirichlet(
    boundary: Callable | float,
    grid: DomainGrid,
    source: np.ndarray | None = None,
    max_iter: int = 50,
    tol: float = 1e-10,
) -> ThetaField:
    """Damped Newton solve of theta_uu + theta_vv + 4 sinh(theta) = S.

    ``boundary`` is a callable of points on the boundary (or a constant).
    ``source`` is an optional grid S for manufactured-solution testing mode;
    the default S = 0 is the sinh-Gordon equation itself.  Newton stops when
    the max-norm of the update drops below ``tol``; each step is halved (at
    most 20 times) until the residual norm decreases.
    """
    nodes = grid.nodes()
    if callable(boundary):
        bvals = np.asarray(boundary(nodes), dtype=float)
    else:
        bvals = np.full(grid.shape, float(boundary))
    theta = bvals.copy()
    theta[1:-1, 1:-1] = 0.0
    if source is None:
        source = np.zeros(grid.shape)

    lap = _laplacian_matrix(grid.nu, grid.nv, grid.hu, grid.hv)
    interior = (slice(1, -1), slice(1, -1))

    def full_residual(th):
        res = np.zeros(grid.shape)
        res[interior] = (
            (th[2:, 1:-1] - 2 * th[1:-1, 1:-1] + th[:-2, 1:-1]) / grid.hu**2
            + (th[1:-1, 2:] - 2 * th[1:-1, 1:-1] + th[1:-1, :-2]) / grid.hv**2
            + 4.0 * np.sinh(th[interior]) - source[interior]
        )
        return res

    res = full_residual(theta)
    for _ in range(max_iter):
        r = res[interior].ravel()
        jac = lap + scipy.sparse.diags(4.0 * np.cosh(theta[interior]).ravel(), format="csc")
        step = scipy.sparse.linalg.spsolve(jac, -r).reshape(grid.nu - 2, grid.nv - 2)

        norm0 = np.abs(r).max()
        alpha = 1.0
        for _ in range(20):
            trial = theta.copy()
            trial[interior] += alpha * step
            trial_res = full_residual(trial)
            if np.abs(trial_res[interior]).max() < norm0:
                break
            alpha *= 0.5
        else:
            raise NonconvergenceError(
                "sinh-Gordon Newton step failed to reduce the residual",
                last=ThetaField(grid, theta, "elliptic", float(norm0)),
            )
        theta = trial
        res = trial_res
        if alpha * np.abs(step).max() < tol:
            return ThetaField(grid, theta, "elliptic", float(np.abs(res[interior]).max()))

    raise NonconvergenceError(
        "sinh-Gordon Newton did not converge",
        last=ThetaField(grid, theta, "elliptic", float(np.abs(res[interior]).max())),
    )


def grid_theta_source(field: ThetaField) -> ThetaSource:
    """Bilinear interpolation of a theta grid, derivatives from node stencils."""
    grid = field.grid
    from ._stencil import grid_derivative

    du = grid_derivative(field.values, grid.hu, 0)
    dv = grid_derivative(field.values, grid.hv, 1)
    duu = grid_derivative(du, grid.hu, 0)
    duv = grid_derivative(du, grid.hv, 1)
    dvv = grid_derivative(dv, grid.hv, 1)

    def interp(values, p):
        x = (p[..., 0] - grid.u_min) / grid.hu
        y = (p[..., 1] - grid.v_min) / grid.hv
        i = np.clip(np.floor(x).astype(int), 0, grid.nu - 2)
        j = np.clip(np.floor(y).astype(int), 0, grid.nv - 2)
        fx = np.clip(x - i, 0.0, 1.0)
        fy = np.clip(y - j, 0.0, 1.0)
        return (
            values[i, j] * (1 - fx) * (1 - fy)
            + values[i + 1, j] * fx * (1 - fy)
            + values[i, j + 1] * (1 - fx) * fy
            + values[i + 1, j + 1] * fx * fy
        )

    def value(p):
        return interp(field.values, p)

    def grad(p):
        return np.stack([interp(du, p), interp(dv, p)], axis=-1)

    def hess(p):
        h11 = interp(duu, p)
        h12 = interp(duv, p)
        h22 = interp(dvv, p)
        return np.stack(
            [np.stack([h11, h12], axis=-1), np.stack([h12, h22], axis=-1)], axis=-2
        )

    return ThetaSource(value, grad, hess, tag="grid")


def _as_source(theta: ThetaField | ThetaSource) -> ThetaSource:
    if isinstance(theta, ThetaSource):
        return theta
    if theta.exact is not None:
        return theta.exact
    return grid_theta_source(theta)


def _theta_domain(theta, fallback=None) -> DomainGrid:
    if isinstance(theta, ThetaField):
        return theta.grid
    if fallback is None:
        raise PreconditionError("a domain grid is required with a bare ThetaSource")
    return fallback


def chebyshev_bundle(theta: ThetaField | ThetaSource, c: float = 0.0,
                     domain: DomainGrid | None = None) -> FrontBundleField:
    """Asymptotic-net front bundle built from an angle field.

    ``c`` is recorded as the intended ambient curvature of the caller's
    realization; the data themselves do not depend on it.  The bundle is
    c-integrable iff theta_uv = (1 - c) sin(theta).
    """
    src = _as_source(theta)
    dom = _theta_domain(theta, domain)

    def phi(p):
        th = 0.5 * src.value(p)
        ct, st = np.cos(th), np.sin(th)
        return np.stack(
            [np.stack([ct, ct], axis=-1), np.stack([-st, st], axis=-1)], axis=-2
        )

    def psi(p):
        th = 0.5 * src.value(p)
        ct, st = np.cos(th), np.sin(th)
        return np.stack(
            [np.stack([-st, -st], axis=-1), np.stack([-ct, ct], axis=-1)], axis=-2
        )

    def omega(p):
        g = src.grad(p)
        wu = 0.5 * g[..., 0]
        wv = -0.5 * g[..., 1]
        return _omega2_stack(wu, wv)

    def dphi(p):
        th = 0.5 * src.value(p)
        g = src.grad(p)
        ct, st = np.cos(th), np.sin(th)
        dmat = 0.5 * np.stack(
            [np.stack([-st, -st], axis=-1), np.stack([-ct, ct], axis=-1)], axis=-2
        )
        return np.stack([g[..., 0, None, None] * dmat, g[..., 1, None, None] * dmat], axis=-3)

    def dpsi(p):
        th = 0.5 * src.value(p)
        g = src.grad(p)
        ct, st = np.cos(th), np.sin(th)
        dmat = 0.5 * np.stack(
            [np.stack([-ct, -ct], axis=-1), np.stack([st, -st], axis=-1)], axis=-2
        )
        return np.stack([g[..., 0, None, None] * dmat, g[..., 1, None, None] * dmat], axis=-3)

    def domega(p):
        hso = src.hess(p)
        out = []
        for k in range(2):
            wu_k = 0.5 * hso[..., k, 0]
            wv_k = -0.5 * hso[..., k, 1]
            out.append(_omega2_stack(wu_k, wv_k))
        return np.stack(out, axis=-4)

    return FrontBundleField(
        m=2, domain=dom, phi=phi, psi=psi, omega=omega,
        dphi=dphi, dpsi=dpsi, domega=domega,
        provenance="analytic" if src.tag == "exact" else "grid-interpolated",
        name=f"chebyshev(c={c})",
    )


def curvatureline_bundle(theta: ThetaField | ThetaSource,
                         domain: DomainGrid | None = None) -> FrontBundleField:
    """Curvature-line front bundle built from an angle field (0-integrable
    iff theta solves the elliptic sinh-Gordon equation)."""
    src = _as_source(theta)
    dom = _theta_domain(theta, domain)

    def phi(p):
        th = 0.5 * src.value(p)
        ch, sh = np.cosh(th), np.sinh(th)
        zero = np.zeros_like(ch)
        return np.stack(
            [np.stack([2 * ch, zero], axis=-1), np.stack([zero, 2 * sh], axis=-1)], axis=-2
        )

    def psi(p):
        th = 0.5 * src.value(p)
        ch, sh = np.cosh(th), np.sinh(th)
        zero = np.zeros_like(ch)
        return np.stack(
            [np.stack([-2 * sh, zero], axis=-1), np.stack([zero, -2 * ch], axis=-1)], axis=-2
        )

    def omega(p):
        g = src.grad(p)
        wu = 0.5 * g[..., 1]
        wv = -0.5 * g[..., 0]
        return _omega2_stack(wu, wv)

    def dphi(p):
        th = 0.5 * src.value(p)
        g = src.grad(p)
        ch, sh = np.cosh(th), np.sinh(th)
        zero = np.zeros_like(ch)
        dmat = np.stack(
            [np.stack([sh, zero], axis=-1), np.stack([zero, ch], axis=-1)], axis=-2
        )
        return np.stack([g[..., 0, None, None] * dmat, g[..., 1, None, None] * dmat], axis=-3)

    def dpsi(p):
        th = 0.5 * src.value(p)
        g = src.grad(p)
        ch, sh = np.cosh(th), np.sinh(th)
        zero = np.zeros_like(ch)
        dmat = np.stack(
            [np.stack([-ch, zero], axis=-1), np.stack([zero, -sh], axis=-1)], axis=-2
        )
        return np.stack([g[..., 0, None, None] * dmat, g[..., 1, None, None] * dmat], axis=-3)

    def domega(p):
        hso = src.hess(p)
        out = []
        for k in range(2):
            wu_k = 0.5 * hso[..., k, 1]
            wv_k = -0.5 * hso[..., k, 0]
            out.append(_omega2_stack(wu_k, wv_k))
        return np.stack(out, axis=-4)

    return FrontBundleField(
        m=2, domain=dom, phi=phi, psi=psi, omega=omega,
        dphi=dphi, dpsi=dpsi, domega=domega,
        provenance="analytic" if src.tag == "exact" else "grid-interpolated",
        name="curvature-line",
    )


def _omega2_stack(wu, wv):
    """Connection matrices for the frame rule D a1 = -omega a2, D a2 = omega a1.

    On fiber components this is D_X xi = d xi + [[0, omega(X)], [-omega(X), 0]] xi.
    """
    wu = np.asarray(wu, dtype=float)
    zero = np.zeros_like(wu)
    mat_u = np.stack([np.stack([zero, wu], axis=-1), np.stack([-wu, zero], axis=-1)], axis=-2)
    mat_v = np.stack([np.stack([zero, wv], axis=-1), np.stack([-wv, zero], axis=-1)], axis=-2)
    return np.stack([mat_u, mat_v], axis=-3)
