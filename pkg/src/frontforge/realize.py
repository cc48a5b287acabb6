"""Realization of front bundles as fronts in the three model spaces.

The adapted frame of a front with unit normal satisfies a linear matrix ODE
``dF = F * Omega_tilde`` whose coefficient matrix is assembled from the
bundle data: the connection block Omega, the translation part
``g = phi(direction)`` and the normal-derivative part ``h = -psi(direction)``.
Depending on the ambient curvature c the frame lives in

* SO(m+1) for c = 0 (positions integrate separately via df = sum g^l e_l;
  internally the pair (F, f) is packed into one affine matrix so a single
  stepper covers all three geometries),
* SO(m+2) for c = 1, with column 0 the position on the unit sphere and the
  last column the normal,
* SO_0(1, m+1) for c = -1, with column 0 on the hyperboloid x.x = -1,
  x_0 > 0 of Lorentz-Minkowski space.

Integration is classical fourth order with a fixed step equal to the grid
spacing and a projection back to the structure group after every step.  The
sweep runs along a base row first and then along every column, so any
path-dependence caused by imperfect data shows up in the per-plaquette
holonomy residuals, which are reported alongside the result.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ._stencil import grid_derivative
from .bundle import FrontBundleField
from .errors import DimensionError, DivergenceError, PreconditionError
from .grids import DomainGrid

__all__ = [
    "AmbientModel",
    "RealizedFront",
    "model_for_curvature",
    "build_omega_tilde",
    "project_structure_group",
    "integrate_frame",
    "holonomy_residual",
    "holonomy_residual_grid",
    "realize_map",
    "swap_roles",
    "perturb_second_homomorphism",
    "rescale_to_unit_curvature",
    "isometry_between",
    "realized_fundamental_forms",
    "gaussian_curvature_grid",
    "geodesic_deviation",
    "sampled_front",
]


@dataclass(frozen=True)
class AmbientModel:
    tag: str
    m: int

    def __post_init__(self):
        if self.tag not in ("euclidean", "sphere", "hyperbolic"):
            raise ValueError(f"unknown model {self.tag!r}")

    @property
    def ambient_dim(self) -> int:
        return self.m + 1 if self.tag == "euclidean" else self.m + 2

    @property
    def frame_dim(self) -> int:
        return self.m + 1 if self.tag == "euclidean" else self.m + 2

    @property
    def metric_signs(self) -> np.ndarray:
        signs = np.ones(self.ambient_dim)
        if self.tag == "hyperbolic":
            signs[0] = -1.0
        return signs

    def inner(self, a, b) -> np.ndarray:
        return np.sum(self.metric_signs * np.asarray(a) * np.asarray(b), axis=-1)

    def group_violation(self, mat) -> np.ndarray:
        """Max-norm distance of F^T J F from J (J = identity or Lorentz form)."""
        j = np.diag(self.metric_signs)
        gram = np.swapaxes(mat, -1, -2) @ (j @ mat)
        return np.abs(gram - j).max(axis=(-1, -2))


def model_for_curvature(c: float, m: int) -> AmbientModel:
    if c == 0:
        return AmbientModel("euclidean", m)
    if c == 1:
        return AmbientModel("sphere", m)
    if c == -1:
        return AmbientModel("hyperbolic", m)
    raise PreconditionError(
        "only c in {0, 1, -1} integrates directly; use rescale_to_unit_curvature first"
    )


def rescale_to_unit_curvature(field: FrontBundleField, c: float):
    """Reduce a general nonzero ambient curvature to a unit representative.

    Scaling the first homomorphism by sqrt(|c|) turns a c-integrable bundle
    into a sign(c)-integrable one; returns (scaled field, sign(c)).
    """
    if c == 0 or abs(c) == 1:
        return field, float(np.sign(c)) if c != 0 else 0.0
    s = float(np.sqrt(abs(c)))
    return (
        field.replace(
            phi=lambda p, _f=field.phi: s * _f(p),
            dphi=None if field.dphi is None else (lambda p, _f=field.dphi: s * _f(p)),
            name=field.name + f"*sqrt({abs(c)})",
        ),
        float(np.sign(c)),
    )


# ---------------------------------------------------------------------------
# Coefficient matrices


def _gh_omega(field: FrontBundleField, pts, dirvec):
    """phi(dir), -psi(dir) and Omega(dir) at a batch of points."""
    d = np.asarray(dirvec, dtype=float)
    g = field.phi(pts) @ d
    h = -(field.psi(pts) @ d)
    omd = np.einsum("...kij,k->...ij", field.omega(pts), d)
    return g, h, omd


def build_omega_tilde(field: FrontBundleField, c: float, p, direction) -> np.ndarray:
    """Frame-ODE coefficient on one tangent direction.

    ``direction`` may be 'u', 'v', an axis index, or a tangent vector.  For
    c = 0 the result is the (m+1) block [[Omega, -h], [h^T, 0]]; for c = 1
    the row/column carrying the position picks up -g^T / g, and for c = -1
    that row flips sign, landing the matrix in the Lorentz algebra.
    """
    model = model_for_curvature(c, field.m)
    if isinstance(direction, str):
        direction = {"u": 0, "v": 1, "w": 2}[direction]
    if np.isscalar(direction):
        d = np.zeros(field.m)
        d[int(direction)] = 1.0
    else:
        d = np.asarray(direction, dtype=float)
    p = np.asarray(p, dtype=float)
    g, h, omd = _gh_omega(field, p, d)
    return _assemble_tilde(g, h, omd, model)


def _assemble_tilde(g, h, omd, model: AmbientModel) -> np.ndarray:
    m = model.m
    batch = omd.shape[:-2]
    if model.tag == "euclidean":
        out = np.zeros(batch + (m + 1, m + 1))
        out[..., :m, :m] = omd
        out[..., :m, m] = -h
        out[..., m, :m] = h
        return out
    out = np.zeros(batch + (m + 2, m + 2))
    sign = -1.0 if model.tag == "sphere" else 1.0
    out[..., 0, 1:m + 1] = sign * g
    out[..., 1:m + 1, 0] = g
    out[..., 1:m + 1, 1:m + 1] = omd
    out[..., 1:m + 1, m + 1] = -h
    out[..., m + 1, 1:m + 1] = h
    return out


def _affine_coefficient(field, model, pts, dirvec):
    """State-ODE coefficient; for the Euclidean model the frame and the
    position are packed into one (m+2) affine matrix."""
    g, h, omd = _gh_omega(field, pts, dirvec)
    tilde = _assemble_tilde(g, h, omd, model)
    if model.tag != "euclidean":
        return tilde
    m = model.m
    batch = tilde.shape[:-2]
    out = np.zeros(batch + (m + 2, m + 2))
    out[..., :m + 1, :m + 1] = tilde
    out[..., :m, m + 1] = g
    return out


# ---------------------------------------------------------------------------
# Structure-group projection


def project_structure_group(matrix, model: AmbientModel) -> np.ndarray:
    """Project a near-group matrix onto the structure group.

    Orthogonal groups use the special orthogonal polar factor; the Lorentz
    group uses Gram-Schmidt with respect to the indefinite form, keeping the
    time orientation of column 0.  Raises once the input drifts further than
    0.5 from the group, which signals a diverged integration.
    """
    matrix = np.asarray(matrix, dtype=float)
    violation = model.group_violation(matrix)
    if np.any(violation >= 0.5):
        raise DivergenceError(
            f"matrix is {float(np.max(violation)):.3g} away from the structure group"
        )
    if model.tag in ("euclidean", "sphere"):
        u, _s, vt = np.linalg.svd(matrix)
        det = np.linalg.det(u @ vt)
        flip = np.ones_like(det)
        flip = np.where(det < 0, -1.0, 1.0)
        u = u.copy()
        u[..., :, -1] *= flip[..., None]
        return u @ vt
    return _lorentz_gram_schmidt(matrix, model)


def _lorentz_gram_schmidt(matrix, model: AmbientModel) -> np.ndarray:
    signs = model.metric_signs
    n = matrix.shape[-1]
    cols = [np.array(matrix[..., i], copy=True) for i in range(n)]

    def form(a, b):
        return np.sum(signs * a * b, axis=-1)

    out = []
    for i, col in enumerate(cols):
        w = col
        for j, prev in enumerate(out):
            eta = signs[j]
            w = w - eta * form(w, prev)[..., None] * prev
        norm = np.sqrt(np.abs(form(w, w)))[..., None]
        w = w / norm
        if i == 0:
            # preserve time orientation of the position column
            w = np.where(w[..., :1] < 0, -w, w)
        out.append(w)
    return np.stack(out, axis=-1)


# ---------------------------------------------------------------------------
# RK4 sweep


def _rk4_segment(states, pts, dirvec, length, afn, model, substeps, project, affine):
    """Advance dM = M A(p(s)) from s=0 to s=length along p0 + s*dirvec."""
    hh = length / substeps
    d = np.asarray(dirvec, dtype=float)
    for s in range(substeps):
        base = pts + (s * hh) * d
        a1 = afn(base, d)
        a2 = afn(base + 0.5 * hh * d, d)
        a4 = afn(base + hh * d, d)
        k1 = states @ a1
        k2 = (states + 0.5 * hh * k1) @ a2
        k3 = (states + 0.5 * hh * k2) @ a2
        k4 = (states + hh * k3) @ a4
        states = states + (hh / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if project:
            if affine:
                nmodel = model.frame_dim
                block = project_structure_group(states[..., :nmodel, :nmodel], model)
                states = states.copy()
                states[..., :nmodel, :nmodel] = block
            else:
                states = project_structure_group(states, model)
    return states


@dataclass(frozen=True)
class RealizedFront:
    grid: DomainGrid
    model: AmbientModel
    positions: np.ndarray
    normals: np.ndarray
    frames: Optional[np.ndarray]
    base_index: tuple[int, int]
    holonomy_residual_max: Optional[float] = None
    holonomy_grid: Optional[np.ndarray] = None
    integrability_warning: bool = False

    @property
    def base_frame(self) -> np.ndarray:
        return self.frames[self.base_index]


def integrate_frame(
    field: FrontBundleField,
    c: float,
    grid: DomainGrid | None = None,
    F0: np.ndarray | None = None,
    base: tuple[int, int] | None = None,
    f0: np.ndarray | None = None,
    substeps: int = 1,
    compute_holonomy: bool = True,
    integrability_threshold: float | None = None,
) -> RealizedFront:
    """Realize the front over the grid by sweeping the frame ODE.

    The base row through ``base`` (default the grid center) is integrated
    first, then all columns advance in lockstep.  ``F0`` is the frame at the
    base node (identity by default; projected with a warning if it is off
    the group).  For c = 0 ``f0`` sets the base position.
    """
    if field.m != 2:
        raise DimensionError("grid realization is implemented for m = 2")
    grid = grid or field.domain
    model = model_for_curvature(c, field.m)
    m = field.m
    n = model.frame_dim
    k = m + 2  # affine state size for c = 0 equals the frame size otherwise

    if base is None:
        base = (grid.nu // 2, grid.nv // 2)
    i0, j0 = base

    if F0 is None:
        F0 = np.eye(n)
    F0 = np.asarray(F0, dtype=float)
    if model.group_violation(F0) > 1e-12:
        warnings.warn("initial frame is off the structure group; projecting")
        F0 = project_structure_group(F0, model)

    warn_flag = False
    if integrability_threshold is not None:
        from .integrability import residual_report

        coarse = DomainGrid(grid.u_min, grid.u_max, grid.v_min, grid.v_max,
                            min(grid.nu, 11), min(grid.nv, 11))
        rep = residual_report(field, c, coarse)
        if rep.max_overall > integrability_threshold:
            warnings.warn(
                f"bundle is not c-integrable at tolerance {integrability_threshold:g} "
                f"(max residual {rep.max_overall:.3g}); integrating anyway"
            )
            warn_flag = True

    affine = model.tag == "euclidean"
    if affine:
        state0 = np.eye(k)
        state0[:n, :n] = F0
        if f0 is not None:
            state0[:n, k - 1] = np.asarray(f0, dtype=float)
    else:
        state0 = F0

    def afn(pts, d):
        return _affine_coefficient(field, model, pts, d)

    states = np.zeros(grid.shape + (k, k))
    states[i0, j0] = state0
    u = grid.axis(0)
    v = grid.axis(1)
    hu, hv = grid.hu, grid.hv
    eu = np.array([1.0, 0.0])
    ev = np.array([0.0, 1.0])

    # Spine along the base row.
    for i in range(i0, grid.nu - 1):
        states[i + 1, j0] = _rk4_segment(
            states[i, j0], np.array([u[i], v[j0]]), eu, hu, afn, model, substeps, True, affine)
    for i in range(i0, 0, -1):
        states[i - 1, j0] = _rk4_segment(
            states[i, j0], np.array([u[i], v[j0]]), -eu, hu, afn, model, substeps, True, affine)

    # Columns, advanced in lockstep.
    for j in range(j0, grid.nv - 1):
        pts = np.stack([u, np.full_like(u, v[j])], axis=-1)
        states[:, j + 1] = _rk4_segment(
            states[:, j], pts, ev, hv, afn, model, substeps, True, affine)
    for j in range(j0, 0, -1):
        pts = np.stack([u, np.full_like(u, v[j])], axis=-1)
        states[:, j - 1] = _rk4_segment(
            states[:, j], pts, -ev, hv, afn, model, substeps, True, affine)

    if affine:
        frames = states[..., :n, :n]
        positions = states[..., :n, k - 1]
        normals = frames[..., :, n - 1]
    else:
        frames = states
        positions = frames[..., :, 0]
        normals = frames[..., :, n - 1]

    hol_max = None
    hol_grid = None
    if compute_holonomy:
        hol_grid = holonomy_residual_grid(field, c, grid, substeps=substeps)
        hol_max = float(hol_grid.max())

    return RealizedFront(
        grid=grid, model=model, positions=positions, normals=normals,
        frames=frames, base_index=(i0, j0),
        holonomy_residual_max=hol_max, holonomy_grid=hol_grid,
        integrability_warning=warn_flag,
    )


def holonomy_residual(field: FrontBundleField, c: float, corners, substeps: int = 1) -> float:
    """Frame defect around one plaquette, integrated from the identity.

    ``corners`` is ((u0, v0), (u1, v1)) with u0 < u1, v0 < v1.
    """
    (u0, v0), (u1, v1) = corners
    grid = DomainGrid(u0, u1, v0, v1, 2, 2)
    return float(holonomy_residual_grid(field, c, grid, substeps=substeps)[0, 0])


def holonomy_residual_grid(field: FrontBundleField, c: float, grid: DomainGrid,
                           substeps: int = 1) -> np.ndarray:
    """Per-plaquette loop residual ||F_loop - Id||_max over the whole grid."""
    model = model_for_curvature(c, field.m)
    n = model.frame_dim
    u = grid.axis(0)
    v = grid.axis(1)
    hu, hv = grid.hu, grid.hv
    uu, vv = np.meshgrid(u[:-1], v[:-1], indexing="ij")
    p00 = np.stack([uu, vv], axis=-1)
    batch = p00.shape[:-1]
    states = np.broadcast_to(np.eye(n), batch + (n, n)).copy()

    def afn(pts, d):
        g, h, omd = _gh_omega(field, pts, d)
        return _assemble_tilde(g, h, omd, model)

    eu = np.array([1.0, 0.0])
    ev = np.array([0.0, 1.0])
    states = _rk4_segment(states, p00, eu, hu, afn, model, substeps, False, False)
    states = _rk4_segment(states, p00 + np.array([hu, 0.0]), ev, hv, afn, model, substeps, False, False)
    states = _rk4_segment(states, p00 + np.array([hu, hv]), -eu, hu, afn, model, substeps, False, False)
    states = _rk4_segment(states, p00 + np.array([0.0, hv]), -ev, hv, afn, model, substeps, False, False)
    return np.abs(states - np.eye(n)).max(axis=(-1, -2))


# ---------------------------------------------------------------------------
# Derived maps and helpers


def swap_roles(field: FrontBundleField) -> FrontBundleField:
    """Exchange the first and second homomorphisms (connection unchanged)."""
    return field.replace(
        phi=field.psi, psi=field.phi, dphi=field.dpsi, dpsi=field.dphi,
        name=field.name + "/swapped",
    )


def perturb_second_homomorphism(field: FrontBundleField, eps: float) -> FrontBundleField:
    """psi -> psi + eps * phi.  Keeps the compatibility symmetry and the
    singular set, but shifts II by -eps * I, so the extrinsic curvature
    blows up like 1/distance at the singular set once eps != 0."""
    psi_old, phi_old = field.psi, field.phi
    dpsi_old, dphi_old = field.dpsi, field.dphi

    def psi(p):
        return psi_old(p) + eps * phi_old(p)

    dpsi = None
    if dpsi_old is not None and dphi_old is not None:
        def dpsi(p):
            return dpsi_old(p) + eps * dphi_old(p)

    return field.replace(psi=psi, dpsi=dpsi, name=field.name + f"+{eps}*phi")


def realize_map(field: FrontBundleField, c: float, grid: DomainGrid | None = None,
                F0: np.ndarray | None = None, substeps: int = 1,
                psi_tol: float = 1e-12) -> RealizedFront:
    """Realize a coherent tangent bundle (psi identically zero) as a map.

    The realization of the padded bundle lands in a totally geodesic
    hypersurface; check that with :func:`geodesic_deviation`.
    """
    grid = grid or field.domain
    probe = np.abs(field.psi(grid.nodes())).max()
    if probe > psi_tol:
        raise PreconditionError(
            f"realize_map needs a vanishing second homomorphism (max |psi| = {probe:.3g})"
        )
    return integrate_frame(field, c, grid, F0=F0, substeps=substeps)


def geodesic_deviation(front: RealizedFront) -> float:
    """How far the image wanders from the totally geodesic hypersurface
    through the base point orthogonal to the base normal."""
    nu_base = front.normals[front.base_index]
    pos = front.positions
    if front.model.tag == "euclidean":
        rel = pos - pos[front.base_index]
        return float(np.abs(front.model.inner(rel, nu_base)).max())
    return float(np.abs(front.model.inner(pos, nu_base)).max())


def sampled_front(positions, normals, grid: DomainGrid, model: AmbientModel,
                  frames=None, base_index=None) -> RealizedFront:
    """Wrap externally computed position/normal grids as a RealizedFront."""
    if base_index is None:
        base_index = (grid.nu // 2, grid.nv // 2)
    return RealizedFront(
        grid=grid, model=model, positions=np.asarray(positions, dtype=float),
        normals=np.asarray(normals, dtype=float), frames=frames,
        base_index=tuple(base_index),
    )


# ---------------------------------------------------------------------------
# Isometry fitting


_SO_EPS = 1e-10


def _so_basis(n):
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n))
            b[i, j] = 1.0
            b[j, i] = -1.0
            basis.append(b)
    return basis


def _lorentz_basis(n):
    basis = []
    for i in range(1, n):
        b = np.zeros((n, n))
        b[0, i] = 1.0
        b[i, 0] = 1.0
        basis.append(b)
    for i in range(1, n):
        for j in range(i + 1, n):
            b = np.zeros((n, n))
            b[i, j] = 1.0
            b[j, i] = -1.0
            basis.append(b)
    return basis


def isometry_between(r1: RealizedFront, r2: RealizedFront):
    """Least-squares ambient isometry carrying the first cloud to the second.

    Returns (A, t, residual) with t = 0 for the curved models.  The
    Euclidean and spherical cases use the closed-form orthogonal fit; the
    Lorentz case refines a frame-seeded guess by Gauss-Newton on the group.
    """
    if r1.model != r2.model:
        raise PreconditionError("fronts live in different ambient models")
    if r1.grid.shape != r2.grid.shape:
        raise PreconditionError("fronts must share the grid")
    model = r1.model
    n = model.ambient_dim
    x = r1.positions.reshape(-1, n)
    y = r2.positions.reshape(-1, n)

    if model.tag == "euclidean":
        cx = x.mean(axis=0)
        cy = y.mean(axis=0)
        h = (x - cx).T @ (y - cy)
        if np.linalg.matrix_rank(h, tol=_SO_EPS * max(1.0, np.abs(h).max())) < n - 1:
            warnings.warn("degenerate point cloud: isometry fit is ambiguous")
        a = _special_orthogonal_fit(h)
        t = cy - a @ cx
    elif model.tag == "sphere":
        h = x.T @ y
        a = _special_orthogonal_fit(h)
        t = np.zeros(n)
    else:
        a = _lorentz_fit(x, y, r1, r2)
        t = np.zeros(n)

    residual = float(np.abs(x @ a.T + t - y).max())
    return a, t, residual


def _special_orthogonal_fit(h):
    """argmax of tr(A h) over special orthogonal A (h = sum x y^T)."""
    u, _s, vt = np.linalg.svd(h)
    v = vt.T
    scale = np.ones(h.shape[0])
    scale[-1] = np.sign(np.linalg.det(v @ u.T))
    return (v * scale) @ u.T


def _lorentz_fit(x, y, r1, r2, iters: int = 8):
    n = x.shape[1]
    j = np.diag(r1.model.metric_signs)
    if r1.frames is not None and r2.frames is not None:
        f1 = r1.frames[r1.base_index]
        f2 = r2.frames[r2.base_index]
        a = f2 @ (j @ f1.T @ j)
    else:
        a = np.eye(n)
    basis = _lorentz_basis(n)
    from scipy.linalg import expm

    for _ in range(iters):
        res = (x @ a.T - y).ravel()
        cols = [(x @ (b @ a).T).ravel() for b in basis]
        jac = np.stack(cols, axis=1)
        delta, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        if not np.all(np.isfinite(delta)):
            break
        step = sum(d * b for d, b in zip(delta, basis))
        a = expm(step) @ a
        if np.abs(delta).max() < 1e-14:
            break
    return a


# ---------------------------------------------------------------------------
# Forms of the realized surface


def realized_fundamental_forms(front: RealizedFront) -> dict:
    """I, II, III of the realized surface by grid differencing.

    Fourth-order stencils keep the truncation comfortably below the
    verification tolerances on 201x201 grids.
    """
    grid = front.grid
    hu, hv = grid.hu, grid.hv
    inner = front.model.inner
    fu = grid_derivative(front.positions, hu, 0)
    fv = grid_derivative(front.positions, hv, 1)
    nu_u = grid_derivative(front.normals, hu, 0)
    nu_v = grid_derivative(front.normals, hv, 1)

    def form(a_u, a_v, b_u, b_v, sign=1.0):
        mat = np.empty(grid.shape + (2, 2))
        mat[..., 0, 0] = sign * inner(a_u, b_u)
        mat[..., 0, 1] = sign * inner(a_u, b_v)
        mat[..., 1, 0] = sign * inner(a_v, b_u)
        mat[..., 1, 1] = sign * inner(a_v, b_v)
        return 0.5 * (mat + np.swapaxes(mat, -1, -2))

    return {
        "I": form(fu, fv, fu, fv),
        "II": form(fu, fv, nu_u, nu_v, sign=-1.0),
        "III": form(nu_u, nu_v, nu_u, nu_v),
    }


def realized_gaussian_curvature(field: FrontBundleField, c: float,
                                grid: DomainGrid | None = None,
                                pad: int = 6, substeps: int = 1) -> np.ndarray:
    """Intrinsic Gaussian curvature of the realized front at the grid nodes.

    Realizes on a grid padded by ``pad`` rows so that every requested node
    sees only interior (central) stencils in the two differentiation stages;
    truncation steps at stencil switchovers would otherwise leak through the
    Brioschi second derivatives near the boundary.  Needs providers that are
    evaluable slightly outside the nominal domain, which holds for every
    closed-form field.
    """
    grid = grid or field.domain
    work = grid.padded(pad) if pad > 0 else grid
    front = integrate_frame(field, c, work, substeps=substeps, compute_holonomy=False)
    forms = realized_fundamental_forms(front)
    k = gaussian_curvature_grid(forms["I"], work.hu, work.hv)
    if pad > 0:
        k = k[pad:-pad, pad:-pad]
    return k


def gaussian_curvature_grid(first_form: np.ndarray, hu: float, hv: float) -> np.ndarray:
    """Brioschi curvature of a sampled metric (array (..., 2, 2) over the grid)."""
    from ._stencil import grid_second_derivative
    from .integrability import brioschi

    E = first_form[..., 0, 0]
    F = first_form[..., 0, 1]
    G = first_form[..., 1, 1]
    Eu = grid_derivative(E, hu, 0)
    Ev = grid_derivative(E, hv, 1)
    Fu = grid_derivative(F, hu, 0)
    Fv = grid_derivative(F, hv, 1)
    Gu = grid_derivative(G, hu, 0)
    Gv = grid_derivative(G, hv, 1)
    Evv = grid_second_derivative(E, hv, 1)
    Fuv = grid_derivative(Fu, hv, 1)
    Guu = grid_second_derivative(G, hu, 0)
    return brioschi(E, F, G, Eu, Ev, Fu, Fv, Gu, Gv, Evv, Fuv, Guu)
