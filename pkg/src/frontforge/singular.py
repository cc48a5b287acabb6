"""Singular set extraction, classification and curvature analysis.

The singular set of a front bundle is the zero level set of the jacobian
``lambda = det(phi)``.  At a nondegenerate zero the kernel of phi is one
dimensional; its generator eta is the null direction, and the point is an
A2 point (a cuspidal edge for surface fronts, a fold for equidimensional
maps) exactly when ``d lambda (eta) != 0``.

Along a sheet of A2 points the conormal n, the unit fiber vector completing
phi of a tangent frame to a positively oriented fiber frame, is
differentiated along the singular submanifold, and

    S(X) = -sign(d lambda(eta)) * phi^{-1}(D_X n)

defines the singular shape operator; eta is oriented so that the tangent
frame followed by eta is positively oriented in the domain.  Its
eigenvalues are the singular principal curvatures.  For m = 2 the same
number is computed independently from the extracted polyline by the curve
formula, giving a dual-route consistency check.

The extrinsic curvature of a tangent plane is the ratio of the second and
first fundamental-form determinants of that plane; near an A2 point its
transversal limit, the boundedness of the quotient and the signs of the
singular principal curvatures are tied together, which
:func:`curvature_sign_report` verifies numerically on sampled data.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ._stencil import fd_weights
from .bundle import FrontBundleField
from .errors import (ClassificationError, ConsistencyError, DegeneratePlaneError,
                     DimensionError, RankError, RegularityError)
from .grids import DomainGrid

__all__ = [
    "SingularPointRecord",
    "SingularCurve",
    "SingularSheet",
    "extract_singular_set",
    "classify_singular_point",
    "conormal",
    "singular_shape_operator",
    "singular_principal_curvatures",
    "singular_curvature_2d",
    "extrinsic_curvature",
    "AdaptedChart",
    "adapted_coordinates",
    "limit_extrinsic_curvature_at_a2",
    "curvature_sign_report",
    "analyze_singular_set",
]

DEGENERATE = "degenerate"
NON_A2 = "nondegenerate_non_a2"
A2 = "a2"


@dataclass
class SingularPointRecord:
    location: np.ndarray
    lam: float
    dlambda: np.ndarray
    classification: str
    eta: Optional[np.ndarray] = None
    lambda_prime: Optional[float] = None
    conormal: Optional[np.ndarray] = None
    kappas: Optional[np.ndarray] = None
    kappa_directions: Optional[np.ndarray] = None
    phi_eta_residual: Optional[float] = None
    symmetry_residual: Optional[float] = None
    growth_exponent: Optional[float] = None


@dataclass(frozen=True)
class SingularCurve:
    points: np.ndarray  # (N, 2), ordered along the curve
    closed: bool = False


@dataclass(frozen=True)
class SingularSheet:
    vertices: np.ndarray  # (N, 3)
    faces: np.ndarray     # (F, 3) vertex indices


# ---------------------------------------------------------------------------
# Jacobian helpers


def _lambda(field: FrontBundleField, pts):
    return np.linalg.det(field.phi(np.asarray(pts, dtype=float)))


def _dlambda(field: FrontBundleField, pts, h: float):
    pts = np.asarray(pts, dtype=float)
    m = pts.shape[-1]
    parts = []
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        parts.append(
            (_lambda(field, pts - 2 * e) - 8 * _lambda(field, pts - e)
             + 8 * _lambda(field, pts + e) - _lambda(field, pts + 2 * e)) / (12 * h)
        )
    return np.stack(parts, axis=-1)


def _fd_h(field: FrontBundleField) -> float:
    return 1e-4 * field.domain.diameter


@lru_cache(maxsize=64)
def _lambda_scale(field: FrontBundleField) -> float:
    return max(float(np.abs(_lambda(field, field.domain.nodes())).max()), 1e-300)


def _newton_project(field: FrontBundleField, pts, tol_rel: float = 1e-12,
                    max_iter: int = 6, scale: float | None = None):
    """Pull points onto the zero set of lambda along its gradient."""
    pts = np.array(pts, dtype=float, copy=True)
    h = _fd_h(field)
    if scale is None:
        scale = _lambda_scale(field)
    for _ in range(max_iter):
        lam = _lambda(field, pts)
        if np.all(np.abs(lam) < tol_rel * scale):
            break
        grad = _dlambda(field, pts, h)
        denom = np.sum(grad * grad, axis=-1)
        denom = np.where(denom == 0, 1.0, denom)
        pts = pts - (lam / denom)[..., None] * grad
    return pts


# ---------------------------------------------------------------------------
# Extraction


def extract_singular_set(field: FrontBundleField, grid: DomainGrid | None = None,
                         refine_tol: float = 1e-12):
    """Zero set of the jacobian: polylines (m = 2) or a triangle sheet (m = 3).

    Nodes are located by linear interpolation along grid edges and polished
    by Newton steps along the jacobian gradient until |lambda| drops below
    ``refine_tol`` times the grid maximum of |lambda|.
    """
    grid = grid or field.domain
    if field.m == 2:
        return _extract_curves(field, grid, refine_tol)
    if field.m == 3:
        return _extract_sheet(field, grid, refine_tol)
    raise DimensionError("extraction supports m = 2 and m = 3")


def _extract_curves(field, grid, refine_tol):
    lam = _lambda(field, grid.nodes())
    u = grid.axis(0)
    v = grid.axis(1)
    segments = []

    def edge_point(kind, i, j):
        if kind == "u":
            a, b = lam[i, j], lam[i + 1, j]
            t = a / (a - b)
            return ("u", i, j), np.array([u[i] + t * grid.hu, v[j]])
        a, b = lam[i, j], lam[i, j + 1]
        t = a / (a - b)
        return ("v", i, j), np.array([u[i], v[j] + t * grid.hv])

    for i in range(grid.nu - 1):
        for j in range(grid.nv - 1):
            corners = [lam[i, j], lam[i + 1, j], lam[i + 1, j + 1], lam[i, j + 1]]
            if all(c == 0 for c in corners):
                continue  # degenerate cell: the zero set is two dimensional here
            signs = [c > 0 for c in corners]
            if all(signs) or not any(signs):
                continue
            crossings = []
            if signs[0] != signs[1]:
                crossings.append(edge_point("u", i, j))
            if signs[1] != signs[2]:
                crossings.append(edge_point("v", i + 1, j))
            if signs[3] != signs[2]:
                crossings.append(edge_point("u", i, j + 1))
            if signs[0] != signs[3]:
                crossings.append(edge_point("v", i, j))
            if len(crossings) == 2:
                segments.append((crossings[0], crossings[1]))
            elif len(crossings) == 4:
                # Saddle cell: split by the sign of the center value.
                center = 0.25 * sum(corners)
                a, b, c, d = crossings
                if (center > 0) == signs[0]:
                    segments.append((a, d))
                    segments.append((b, c))
                else:
                    segments.append((a, b))
                    segments.append((c, d))

    # Chain segments into polylines through shared edge crossings.
    adjacency = {}
    coords = {}
    for (ka, pa), (kb, pb) in segments:
        coords[ka] = pa
        coords[kb] = pb
        adjacency.setdefault(ka, []).append(kb)
        adjacency.setdefault(kb, []).append(ka)

    unvisited = set(adjacency)
    curves = []
    while unvisited:
        start = next((k for k in unvisited if len(adjacency[k]) == 1), None)
        closed = start is None
        if closed:
            start = next(iter(unvisited))
        chain = [start]
        unvisited.discard(start)
        while True:
            nxt = [k for k in adjacency[chain[-1]] if k in unvisited]
            if not nxt:
                break
            chain.append(nxt[0])
            unvisited.discard(nxt[0])
        pts = np.array([coords[k] for k in chain])
        if len(pts) >= 2:
            pts = _newton_project(field, pts, tol_rel=refine_tol)
            pts = _dedup_polyline(pts, 1e-3 * min(grid.hu, grid.hv))
        if len(pts) >= 2:
            curves.append(SingularCurve(points=pts, closed=closed))
    curves.sort(key=lambda c: -len(c.points))
    return curves


def _dedup_polyline(pts, tol):
    """Collapse consecutive nodes that coincide after refinement (the level
    set passing exactly through a grid corner yields one crossing per
    adjacent edge)."""
    keep = [0]
    for k in range(1, len(pts)):
        if np.linalg.norm(pts[k] - pts[keep[-1]]) > tol:
            keep.append(k)
    return pts[keep]


def _extract_sheet(field, grid, refine_tol):
    from skimage import measure

    lam = _lambda(field, grid.nodes())
    spacing = grid.spacings
    verts, faces, _normals, _values = measure.marching_cubes(lam, level=0.0, spacing=spacing)
    verts = verts + grid.lower
    verts = _newton_project(field, verts, tol_rel=refine_tol)
    return SingularSheet(vertices=verts, faces=faces)


# ---------------------------------------------------------------------------
# Pointwise classification


def _kernel_direction(phi_mat):
    """Unit kernel vector of a corank-one matrix (smallest singular direction)."""
    _u, s, vt = np.linalg.svd(phi_mat)
    return vt[..., -1, :], s


def classify_singular_point(field: FrontBundleField, p,
                            tangent_hint=None,
                            dlambda_scale: float = 1.0,
                            tol_nd: float = 1e-6,
                            tol_a2: float = 1e-6) -> SingularPointRecord:
    """Classify one singular point: degenerate, non-A2, or A2.

    ``dlambda_scale`` should be the typical |d lambda| along the singular
    set (the batch pipelines pass it); degenerate means |d lambda| below
    ``tol_nd`` times that scale, and A2 requires |d lambda(eta)| above
    ``tol_a2`` times it.  ``tangent_hint`` orients eta so that (tangent
    frame, eta) is positively oriented.
    """
    p = np.asarray(p, dtype=float)
    m = field.m
    h = _fd_h(field)
    lam = float(_lambda(field, p))
    dlam = _dlambda(field, p, h)

    if np.linalg.norm(dlam) < tol_nd * dlambda_scale:
        return SingularPointRecord(p, lam, dlam, DEGENERATE)

    phi_mat = field.phi(p)
    eta, svals = _kernel_direction(phi_mat)
    if m >= 2 and svals[-2] < 1e-8 * max(svals[0], 1e-300):
        raise RankError("corank exceeds one; the A2 framework does not apply")

    frame = _tangent_frame(field, p, dlam, tangent_hint)
    eta = _orient_eta(frame, eta)
    lam_prime = float(dlam @ eta)
    cls = A2 if abs(lam_prime) > tol_a2 * dlambda_scale else NON_A2
    phi_eta = float(np.linalg.norm(phi_mat @ eta))
    return SingularPointRecord(
        p, lam, dlam, cls, eta=eta, lambda_prime=lam_prime,
        phi_eta_residual=phi_eta,
    )


def _tangent_frame(field, p, dlam, hint=None):
    """ds^2_phi-orthonormal basis of the singular-set tangent space at p.

    ``hint`` vectors (if any) are used first, then the default complement of
    the jacobian gradient completes the frame to m - 1 vectors.
    """
    m = field.m
    grad = dlam / np.linalg.norm(dlam)
    candidates = []
    if hint is not None:
        candidates.extend(np.atleast_2d(np.asarray(hint, dtype=float)))
    candidates.extend(np.eye(m)[k] for k in np.argsort(np.abs(grad))[:-1][::-1])
    vecs = []
    phi_mat = field.phi(p)
    scale = np.linalg.norm(phi_mat)
    for w in candidates:
        if len(vecs) == m - 1:
            break
        w = w - (w @ grad) * grad
        for prev in vecs:
            w = w - _dsphi(phi_mat, w, prev) * prev
        norm = np.sqrt(max(_dsphi(phi_mat, w, w), 0.0))
        if norm < 1e-9 * scale:
            continue
        vecs.append(w / norm)
    if len(vecs) < m - 1:
        raise RankError("singular-metric Gram-Schmidt collapsed")
    return np.array(vecs)


def _dsphi(phi_mat, x, y):
    return float((phi_mat @ x) @ (phi_mat @ y))


def _orient_eta(frame, eta):
    mat = np.column_stack([*frame, eta])
    if np.linalg.det(mat) < 0:
        return -eta
    return eta


def conormal(field: FrontBundleField, p, tangent_basis) -> np.ndarray:
    """Unit fiber vector completing phi of the tangent frame positively.

    For m = 2 this is the quarter turn of the normalized phi-image; for
    m = 3 the cross product of the two normalized images.
    """
    p = np.asarray(p, dtype=float)
    phi_mat = field.phi(p)
    cols = []
    for w in np.atleast_2d(np.asarray(tangent_basis, dtype=float)):
        img = phi_mat @ w
        for prev in cols:
            img = img - (img @ prev) * prev
        norm = np.linalg.norm(img)
        if norm < 1e-12:
            raise RankError("phi degenerates on the singular-set tangent space")
        cols.append(img / norm)
    if field.m == 2:
        x, y = cols[0]
        return np.array([-y, x])
    if field.m == 3:
        return np.cross(cols[0], cols[1])
    raise DimensionError("conormal supports m = 2 and m = 3")


# ---------------------------------------------------------------------------
# Shape operator along the singular set


def _conormal_field(field, p, frame):
    """Conormal near p as a function of points on the singular set.

    The tangent frame is transported from p (projected onto the local
    kernel of d lambda, then re-orthonormalized in ds^2_phi) so the
    conormal never flips sign across the stencil.
    """
    h = _fd_h(field)

    def at(q):
        dlam = _dlambda(field, q, h)
        grad = dlam / np.linalg.norm(dlam)
        vecs = []
        phi_mat = field.phi(q)
        for w in frame:
            w = w - (w @ grad) * grad
            for prev in vecs:
                w = w - _dsphi(phi_mat, w, prev) * prev
            w = w / np.sqrt(_dsphi(phi_mat, w, w))
            vecs.append(w)
        return conormal(field, q, np.array(vecs))

    return at


def _omega_action(field, p, direction, vec):
    om = field.omega(np.asarray(p, dtype=float))
    mat = np.einsum("kij,k->ij", om, np.asarray(direction, dtype=float))
    return mat @ vec


def singular_shape_operator(field: FrontBundleField, p,
                            record: SingularPointRecord | None = None,
                            step: float | None = None,
                            consistency_tol: float = 1e-6):
    """Singular shape operator at an A2 point, in a ds^2_phi-orthonormal
    tangent frame of the singular set.

    Returns (matrix, frame, conormal).  The derivative of the conormal
    along the singular set is taken by five-point differences of the
    transported conormal field, pulled back through phi by least squares on
    the phi-image of the tangent space; the component along the conormal
    must stay below ``consistency_tol`` or the data are inconsistent.
    """
    p = np.asarray(p, dtype=float)
    if record is None:
        record = classify_singular_point(field, p)
    if record.classification != A2:
        raise ClassificationError(f"singular shape operator needs an A2 point, got {record.classification}")
    m = field.m
    if step is None:
        step = 2e-3 * field.domain.diameter
    h = _fd_h(field)
    dlam = record.dlambda
    frame = _tangent_frame(field, p, dlam, None)
    eta = _orient_eta(frame, record.eta)
    sign = float(np.sign(dlam @ eta))
    n_at = _conormal_field(field, p, frame)
    n0 = n_at(p)
    phi_mat = field.phi(p)
    phi_frame = np.stack([phi_mat @ w for w in frame], axis=0)

    offsets = (-2, -1, 1, 2)
    weights = fd_weights((-2, -1, 0, 1, 2), 1)
    smat = np.zeros((m - 1, m - 1))
    worst_normal = 0.0
    for b, x_dir in enumerate(frame):
        samples = []
        for o in offsets:
            q = _newton_project(field, p + (o * step) * x_dir, scale=None)
            samples.append(n_at(q))
        dn = (
            weights[0] * samples[0] + weights[1] * samples[1]
            + weights[3] * samples[2] + weights[4] * samples[3]
        ) / step
        dn = dn + _omega_action(field, p, x_dir, n0)
        coeffs = phi_frame @ dn
        normal_part = abs(float(n0 @ dn))
        worst_normal = max(worst_normal, normal_part / max(1.0, np.linalg.norm(dn)))
        smat[:, b] = -sign * coeffs
    if worst_normal > consistency_tol:
        raise ConsistencyError(
            f"conormal derivative leaves the phi-image (residual {worst_normal:.3g})"
        )
    return smat, frame, n0


def singular_principal_curvatures(field: FrontBundleField, p,
                                  record: SingularPointRecord | None = None,
                                  step: float | None = None):
    """Eigenvalues (ascending) and directions of the singular shape operator.

    The frame is ds^2_phi-orthonormal, so symmetrizing the matrix is
    legitimate; the symmetry defect is returned for verification.
    """
    smat, frame, n0 = singular_shape_operator(field, p, record=record, step=step)
    sym_residual = float(np.abs(smat - smat.T).max())
    sym = 0.5 * (smat + smat.T)
    vals, vecs = np.linalg.eigh(sym)
    order = np.argsort(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    directions = np.stack([frame.T @ vecs[:, i] for i in range(len(vals))], axis=0)
    # Deterministic direction signs: first nonzero component positive.
    for i, d in enumerate(directions):
        nz = np.flatnonzero(np.abs(d) > 1e-12)
        if nz.size and d[nz[0]] < 0:
            directions[i] = -d
    return vals, directions, sym_residual


def singular_curvature_2d(field: FrontBundleField, curve: SingularCurve, index: int,
                          records: list | None = None) -> float:
    """Singular curvature from the extracted curve parametrization (m = 2).

    Independent route from the shape operator: differentiates the conormal
    in the curve parameter and normalizes by |phi(gamma')|^2, with eta
    oriented so that (gamma', eta) is positively oriented.
    """
    if field.m != 2:
        raise DimensionError("the curve formula is two dimensional")
    pts = curve.points
    n_nodes = len(pts)
    if not 0 <= index < n_nodes:
        raise IndexError("node index out of range")

    def window(i):
        lo = max(0, i - 2)
        hi = min(n_nodes, i + 3)
        return np.arange(lo, hi)

    idx = window(index)
    local = pts[idx]
    # Curve parameter: cumulative chord length, centered at the node.
    seg = np.linalg.norm(np.diff(local, axis=0), axis=1)
    t = np.concatenate([[0.0], np.cumsum(seg)])
    t = t - t[idx.tolist().index(index)]

    pos = idx.tolist().index(index)
    gamma_dot = _nonuniform_d1(local, t, pos)

    phi_mat = field.phi(pts[index])
    phig = phi_mat @ gamma_dot
    speed2 = float(phig @ phig)
    if speed2 < 1e-20:
        raise ClassificationError("curve tangent is a null direction; not an A2 node")

    # Conormal along the curve with the positive-frame rule at each node.
    def n_of(i):
        img = field.phi(pts[i]) @ _nonuniform_d1(pts[window(i)], _chord(pts[window(i)], i - window(i)[0]), i - window(i)[0])
        img = img / np.linalg.norm(img)
        return np.array([-img[1], img[0]])

    nvals = np.stack([n_of(i) for i in idx], axis=0)
    dn_dt = _nonuniform_d1(nvals, t, pos)
    dn = dn_dt + _omega_action(field, pts[index], gamma_dot, nvals[pos])

    eta, _ = _kernel_direction(phi_mat)
    if np.linalg.det(np.column_stack([gamma_dot, eta])) < 0:
        eta = -eta
    h = _fd_h(field)
    sign = float(np.sign(_dlambda(field, pts[index], h) @ eta))
    return -sign * float(dn @ phig) / speed2


def _chord(pts, pos):
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    t = np.concatenate([[0.0], np.cumsum(seg)])
    return t - t[pos]


def _nonuniform_d1(values, t, pos):
    """First derivative at t[pos] from scattered samples (Vandermonde weights)."""
    offsets = tuple(t - t[pos])
    w = fd_weights(offsets, 1)
    return np.tensordot(w, values, axes=(0, 0))


# ---------------------------------------------------------------------------
# Extrinsic curvature


def extrinsic_curvature(field: FrontBundleField, p, X, Y,
                        tol_reg: float = 1e-12) -> float:
    """Ratio of the second to first fundamental-form determinants of the
    plane spanned by X and Y at a phi-regular point."""
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    phi_mat = field.phi(p)
    psi_mat = field.psi(p)
    lam = float(np.linalg.det(phi_mat))
    if abs(lam) <= tol_reg:
        raise RegularityError("extrinsic curvature is undefined on the singular set")

    def form2(mat_a, mat_b, a, b, sign=1.0):
        return sign * float((mat_a @ a) @ (mat_b @ b))

    ixx = form2(phi_mat, phi_mat, X, X)
    iyy = form2(phi_mat, phi_mat, Y, Y)
    ixy = form2(phi_mat, phi_mat, X, Y)
    den = ixx * iyy - ixy**2
    if den <= 1e-18 * max(1.0, ixx * iyy):
        raise DegeneratePlaneError("X and Y do not span a plane")
    iixx = -form2(phi_mat, psi_mat, X, X)
    iiyy = -form2(phi_mat, psi_mat, Y, Y)
    iixy = -0.5 * (form2(phi_mat, psi_mat, X, Y) + form2(phi_mat, psi_mat, Y, X))
    return (iixx * iiyy - iixy**2) / den


# ---------------------------------------------------------------------------
# Adapted coordinates and the transversal limit


@dataclass
class AdaptedChart:
    """Local chart at an A2 point with the singular set flattened.

    Coordinates (t_1, .., t_{m-1}, s): the t's move along the singular set
    (via Newton projection), s moves along the transported null direction,
    and the quadratic shift t_j -> t_j - s^2 a_j makes the covariant
    s-derivative of phi(d/ds) orthogonal to the tangent phi-images at the
    base point."""

    field: FrontBundleField
    p: np.ndarray
    tangent_frame: np.ndarray  # (m-1, m), chart directions along the set
    eta_hat: np.ndarray
    shifts: np.ndarray         # the a_j
    property4_residual: float

    def sigma(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        q = self.p + np.tensordot(t, self.tangent_frame, axes=(0, 0))
        return _newton_project(self.field, q)

    def eta_at(self, q):
        eta, _ = _kernel_direction(self.field.phi(np.asarray(q, dtype=float)))
        if eta @ self.eta_hat < 0:
            eta = -eta
        return eta

    def point(self, t, s, shifted: bool = True):
        t = np.atleast_1d(np.asarray(t, dtype=float)).copy()
        if shifted:
            t = t - s**2 * self.shifts
        base = self.sigma(t)
        return base + s * self.eta_at(base)

    def coordinate_frame(self, t, s, shifted: bool = True, dt: float | None = None):
        """Columns phi(d/du_j) of the chart coordinate fields at (t, s)."""
        m = self.field.m
        if dt is None:
            dt = 1e-4 * self.field.domain.diameter
        t = np.atleast_1d(np.asarray(t, dtype=float))

        def chart(tv, sv):
            return self.point(tv, sv, shifted=shifted)

        cols = []
        for j in range(m - 1):
            e = np.zeros(m - 1)
            e[j] = dt
            cols.append((chart(t + e, s) - chart(t - e, s)) / (2 * dt))
        cols.append((chart(t, s + dt) - chart(t, s - dt)) / (2 * dt))
        return np.stack(cols, axis=-1)  # (m, m): domain vectors of the chart fields

    def phi_cols(self, t, s, shifted: bool = True):
        q = self.point(t, s, shifted=shifted)
        jac = self.coordinate_frame(t, s, shifted=shifted)
        return self.field.phi(q) @ jac, q

    def psi_cols(self, t, s, shifted: bool = True):
        q = self.point(t, s, shifted=shifted)
        jac = self.coordinate_frame(t, s, shifted=shifted)
        return self.field.psi(q) @ jac, q


def adapted_coordinates(field: FrontBundleField, p, X=None,
                        record: SingularPointRecord | None = None,
                        ds: float | None = None) -> AdaptedChart:
    """Chart of an A2 point: singular set at s = 0, null direction along s,
    and the quadratic shift solving 2 sum_j a_j h_jk = <D_s phi_s, phi_k>.

    The Gram matrix h of the tangent frame is nonsingular at an A2 point;
    a singular system signals bad input.
    """
    p = np.asarray(p, dtype=float)
    if record is None:
        record = classify_singular_point(field, p)
    if record.classification != A2:
        raise ClassificationError("adapted coordinates need an A2 point")
    m = field.m
    frame = _tangent_frame(field, p, record.dlambda, X)
    eta = _orient_eta(frame, record.eta)
    if ds is None:
        ds = 1e-3 * field.domain.diameter

    chart = AdaptedChart(field, p, frame, eta, np.zeros(m - 1), 0.0)

    # Covariant s-derivative of phi(d/ds) at p, in the unshifted chart.
    def phi_s(s):
        cols, _q = chart.phi_cols(np.zeros(m - 1), s, shifted=False)
        return cols[:, m - 1]

    d_phi_s = (phi_s(ds) - phi_s(-ds)) / (2 * ds) + _omega_action(field, p, eta, phi_s(0.0))

    phi_mat = field.phi(p)
    tangent_imgs = np.stack([phi_mat @ w for w in frame], axis=0)
    gram = tangent_imgs @ tangent_imgs.T
    rhs = tangent_imgs @ d_phi_s
    try:
        shifts = np.linalg.solve(2.0 * gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise RankError("tangent Gram matrix is singular; contradicts the A2 hypothesis") from exc
    chart.shifts = shifts

    # Verify the defining property in the shifted chart.
    def phi_s_shifted(s):
        cols, _q = chart.phi_cols(np.zeros(m - 1), s, shifted=True)
        return cols[:, m - 1]

    d_shift = (phi_s_shifted(ds) - phi_s_shifted(-ds)) / (2 * ds) + _omega_action(field, p, eta, phi_s_shifted(0.0))
    chart.property4_residual = float(np.abs(tangent_imgs @ d_shift).max())
    return chart


def limit_extrinsic_curvature_at_a2(field: FrontBundleField, p, X=None,
                                    chart: AdaptedChart | None = None,
                                    ds: float | None = None) -> float:
    """Transversal limit of the extrinsic curvature at an A2 point.

    Evaluated in adapted coordinates as

        (d_s<phi_1, psi_1> d_s<phi_s, psi_s> - (d_s<phi_s, psi_1>)^2)
            / |phi_1 wedge D_s phi_s|^2

    with s-derivatives by central differences transverse to the singular
    set.
    """
    if chart is None:
        chart = adapted_coordinates(field, p, X)
    m = chart.field.m
    if ds is None:
        ds = 1e-3 * field.domain.diameter
    t0 = np.zeros(m - 1)

    def products(s):
        pc, q = chart.phi_cols(t0, s)
        sc, _ = chart.psi_cols(t0, s)
        return (
            float(pc[:, 0] @ sc[:, 0]),
            float(pc[:, m - 1] @ sc[:, m - 1]),
            float(pc[:, m - 1] @ sc[:, 0]),
        )

    plus = products(ds)
    minus = products(-ds)
    d11 = (plus[0] - minus[0]) / (2 * ds)
    dmm = (plus[1] - minus[1]) / (2 * ds)
    dm1 = (plus[2] - minus[2]) / (2 * ds)

    def phi_s(s):
        cols, _ = chart.phi_cols(t0, s)
        return cols[:, m - 1]

    d_phi_s = (phi_s(ds) - phi_s(-ds)) / (2 * ds) + _omega_action(field, chart.p, chart.eta_hat, phi_s(0.0))
    phi1 = chart.phi_cols(t0, 0.0)[0][:, 0]
    wedge = float((phi1 @ phi1) * (d_phi_s @ d_phi_s) - (phi1 @ d_phi_s) ** 2)
    return (d11 * dmm - dm1**2) / wedge


# ---------------------------------------------------------------------------
# Sign/boundedness verification harness


def curvature_sign_report(field: FrontBundleField, records,
                          offsets=(0.05, 0.025, 0.0125),
                          delta_tol: float = 1e-8,
                          ii_tol: float = 1e-8,
                          kappa_tol: float = 1e-8,
                          bounded_exponent: float = -0.5) -> dict:
    """Numerical verdict on the curvature-sign implications at A2 points.

    For each A2 record the extrinsic curvature of the planes (tangent
    direction, extended null direction) is sampled at shrinking transversal
    offsets; the log-log growth exponent separates bounded quotients
    (exponent near 0) from the 1/distance blow-up (exponent near -1).  The
    report then checks, on this data, three implications: bounded
    curvature forces the second fundamental form to vanish on the singular
    set; an unbounded quotient changes sign across it; and nonnegative
    (resp. uniformly positive) curvature forces nonpositive (resp.
    negative) singular principal curvatures.
    """
    offsets = np.asarray(sorted(offsets, reverse=True), dtype=float)
    a2_records = [r for r in records if r.classification == A2]
    excluded = [r for r in records if r.classification != A2]

    samples = []
    ii_on_sigma = []
    exponents = []
    sign_changes = []
    for rec in a2_records:
        p = rec.location
        frame = _tangent_frame(field, p, rec.dlambda, None)
        eta = _orient_eta(frame, rec.eta)
        phi_mat = field.phi(p)
        psi_mat = field.psi(p)
        ii_mat = -(phi_mat.T @ psi_mat)
        ii_on_sigma.append(np.abs(0.5 * (ii_mat + ii_mat.T)).max())

        per_plane = []
        for x_dir in frame:
            vals_pos = np.array([
                extrinsic_curvature(field, p + s * eta, x_dir, eta) for s in offsets
            ])
            vals_neg = np.array([
                extrinsic_curvature(field, p - s * eta, x_dir, eta) for s in offsets
            ])
            per_plane.append((vals_pos, vals_neg))
            mags = np.maximum(np.abs(vals_pos), np.abs(vals_neg))
            if np.all(mags > 0):
                slope = np.polyfit(np.log(offsets), np.log(mags), 1)[0]
                exponents.append(slope)
            sign_changes.append(bool(np.sign(vals_pos[-1]) * np.sign(vals_neg[-1]) < 0))
        samples.append(per_plane)
        rec.growth_exponent = exponents[-1] if exponents else None

    all_vals = np.array([
        v for plane_list in samples for (vp, vn) in plane_list for v in (*vp, *vn)
    ]) if samples else np.array([])
    kappas = np.array([
        k for r in a2_records if r.kappas is not None for k in np.atleast_1d(r.kappas)
    ])

    exponents = np.asarray(exponents)
    bounded = bool(exponents.size and np.all(exponents > bounded_exponent))
    unbounded = bool(exponents.size and np.any(exponents <= bounded_exponent))
    max_ii = float(np.max(ii_on_sigma)) if ii_on_sigma else 0.0
    min_kext = float(all_vals.min()) if all_vals.size else float("nan")
    delta = min_kext if all_vals.size else float("nan")

    report = {
        "nodes": len(a2_records),
        "excluded": [
            {"location": r.location.tolist(), "classification": r.classification}
            for r in excluded
        ],
        "offsets": offsets.tolist(),
        "max_abs_kext": float(np.abs(all_vals).max()) if all_vals.size else float("nan"),
        "min_kext": min_kext,
        "max_ii_on_singular_set": max_ii,
        "growth_exponent_median": float(np.median(exponents)) if exponents.size else None,
        "kappa_census": {
            "negative": int(np.sum(kappas < -kappa_tol)),
            "zero": int(np.sum(np.abs(kappas) <= kappa_tol)),
            "positive": int(np.sum(kappas > kappa_tol)),
        },
        "items": {},
    }

    report["items"]["bounded_kext_implies_ii_vanishes"] = {
        "applicable": bounded,
        "passed": (not bounded) or max_ii < ii_tol,
        "max_ii": max_ii,
    }
    report["items"]["unbounded_kext_changes_sign"] = {
        "applicable": unbounded,
        "passed": (not unbounded) or (any(sign_changes) if sign_changes else False),
        "exponent_median": report["growth_exponent_median"],
    }
    nonneg = bool(all_vals.size and min_kext >= -delta_tol)
    strict = bool(all_vals.size and min_kext > delta_tol)
    item3 = {
        "applicable": nonneg,
        "passed": (not nonneg) or bool(kappas.size and np.all(kappas <= kappa_tol)),
        "strict_applicable": strict,
        "strict_passed": (not strict) or bool(kappas.size and np.all(kappas < -kappa_tol)),
        "delta_detected": delta if strict else None,
    }
    report["items"]["nonneg_kext_implies_nonpos_kappas"] = item3
    return report


# ---------------------------------------------------------------------------
# Batch pipeline


def analyze_singular_set(field: FrontBundleField, grid: DomainGrid | None = None,
                         with_curvature: bool = True, threads: int = 0):
    """Extract, classify, and (at A2 points) compute singular curvatures.

    Returns (extracted, records): for m = 2 ``extracted`` is a list of
    curves and ``records`` a matching list of record lists; for m = 3 a
    sheet and one record list over its vertices.  Per-node work is pure, so
    ``threads`` > 1 distributes it without changing the results.
    """
    grid = grid or field.domain
    extracted = extract_singular_set(field, grid)

    def scale_of(points):
        d = np.linalg.norm(_dlambda(field, points, _fd_h(field)), axis=-1)
        return float(d.max()) if len(d) else 1.0

    def node_record(args):
        p, tangent, scale = args
        rec = classify_singular_point(field, p, tangent_hint=tangent,
                                      dlambda_scale=scale)
        if with_curvature and rec.classification == A2:
            _attach_curvature(field, rec)
        return rec

    def run(jobs):
        if threads and threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(node_record, jobs))
        return [node_record(j) for j in jobs]

    if field.m == 2:
        all_records = []
        for curve in extracted:
            pts = curve.points
            scale = scale_of(pts)
            jobs = [(p, _polyline_tangent(pts, i), scale) for i, p in enumerate(pts)]
            all_records.append(run(jobs))
        return extracted, all_records

    sheet = extracted
    scale = scale_of(sheet.vertices)
    jobs = [(p, None, scale) for p in sheet.vertices]
    return sheet, run(jobs)


def _attach_curvature(field, rec):
    try:
        vals, dirs, sym = singular_principal_curvatures(field, rec.location, record=rec)
    except (ConsistencyError, RankError, ClassificationError):
        return
    rec.kappas = vals
    rec.kappa_directions = dirs
    rec.symmetry_residual = sym
    frame = _tangent_frame(field, rec.location, rec.dlambda, None)
    rec.conormal = conormal(field, rec.location, frame)


def _polyline_tangent(pts, i):
    if len(pts) == 1:
        return None
    if i == 0:
        d = pts[1] - pts[0]
    elif i == len(pts) - 1:
        d = pts[-1] - pts[-2]
    else:
        d = pts[i + 1] - pts[i - 1]
    norm = np.linalg.norm(d)
    return d / norm if norm > 0 else None
