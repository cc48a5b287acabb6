"""Front bundles induced by explicitly parametrized frontals.

Given a map f into a space form together with a unit normal field nu, the
orthogonal complement of nu (and of f itself in the curved models) carries
the tangential connection, and

    phi = df,   psi = (ambient derivative of nu, tangential part)

expressed in an orthonormal gauge of that complement give the induced
bundle.  The gauge must stay smooth across the singular set of f, where
Gram-Schmidt on df breaks down, so fixtures ship closed-form gauges; for
generic input a frame of fixed reference vectors projected into the
complement is used, with the reference set chosen once per domain by a
deterministic probe.

The module also ships the closed-form fixtures used throughout the test
suite: the tractroid (pseudosphere) with its cuspidal-edge circle, a
cuspidal-edge hypersurface over S^2 x R in 4-space with an adjustable
parameter, the unit sphere and the flat plane, and two equidimensional map
bundles (polar coordinates and a cubic fold) with vanishing second
homomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from ._stencil import derivative_stack
from .bundle import FrontBundleField, constant_field, default_fd_step
from .errors import RankError
from .grids import DomainGrid
from .realize import AmbientModel, RealizedFront, sampled_front

__all__ = [
    "ParametrizedFrontal",
    "induce_bundle",
    "normal_residuals",
    "sample_parametrization",
    "fixture_pseudosphere",
    "fixture_s2xr",
    "fixture_unit_sphere",
    "fixture_plane",
    "polar_map_bundle",
    "cubic_fold_bundle",
    "fixture_by_name",
]


@dataclass(frozen=True)
class ParametrizedFrontal:
    m: int
    model: AmbientModel
    domain: DomainGrid
    f: Callable
    nu: Callable
    df: Optional[Callable] = None
    dnu: Optional[Callable] = None
    gauge: Optional[Callable] = None
    dgauge: Optional[Callable] = None
    name: str = "frontal"
    params: dict = dc_field(default_factory=dict)


def normal_residuals(frontal: ParametrizedFrontal, pts) -> dict:
    """Unit-normal and tangency defects at sample points."""
    pts = np.asarray(pts, dtype=float)
    inner = frontal.model.inner
    nu = frontal.nu(pts)
    df = _df_provider(frontal)(pts)
    tang = np.abs(np.einsum("...n,...nj->...j", frontal.model.metric_signs * nu, df)).max()
    unit = np.abs(inner(nu, nu) - 1.0).max()
    out = {"tangency": float(tang), "unit": float(unit)}
    if frontal.model.tag != "euclidean":
        f = frontal.f(pts)
        target = 1.0 if frontal.model.tag == "sphere" else -1.0
        out["position"] = float(np.abs(inner(f, f) - target).max())
    return out


def _df_provider(frontal: ParametrizedFrontal):
    if frontal.df is not None:
        return frontal.df
    h = default_fd_step(frontal.domain)
    stack = derivative_stack(frontal.f, h)

    def df(p):
        return np.moveaxis(stack(p), -2, -1)  # (..., m, n) -> (..., n, m)

    return df


def _dnu_provider(frontal: ParametrizedFrontal):
    if frontal.dnu is not None:
        return frontal.dnu
    h = default_fd_step(frontal.domain)
    stack = derivative_stack(frontal.nu, h)

    def dnu(p):
        return np.moveaxis(stack(p), -2, -1)

    return dnu


def _reference_gauge(frontal: ParametrizedFrontal):
    """Fixed reference vectors projected into the normal complement.

    The reference set is picked by probing the domain: among ordered tuples
    of standard basis vectors, take the one whose projections stay the most
    uniformly independent.  Smooth wherever the chosen set never degenerates,
    in particular across the singular set of f.
    """
    model = frontal.model
    n = model.ambient_dim
    m = frontal.m
    signs = model.metric_signs

    probe_axes = [np.linspace(frontal.domain.lower[k], frontal.domain.upper[k], 5)
                  for k in range(frontal.domain.m)]
    probe = np.stack(np.meshgrid(*probe_axes, indexing="ij"), axis=-1).reshape(-1, frontal.domain.m)

    def complement_basis(p):
        vecs = [frontal.nu(p)]
        if model.tag != "euclidean":
            vecs.append(frontal.f(p))
        return vecs

    def project(w, p):
        out = np.broadcast_to(np.asarray(w, dtype=float), p.shape[:-1] + (n,)).copy()
        for b in complement_basis(p):
            coeff = model.inner(out, b) / model.inner(b, b)
            out = out - coeff[..., None] * b
        return out

    best = None
    for combo in itertools.permutations(range(n), m):
        cols = np.stack([project(np.eye(n)[i], probe) for i in combo], axis=-1)
        sv = np.linalg.svd(cols, compute_uv=False)
        margin = float(sv[..., -1].min())
        if best is None or margin > best[0] + 1e-12:
            best = (margin, combo)
    margin, combo = best
    if margin < 1e-6:
        raise RankError("no reference frame stays independent over the domain")

    def gauge(p):
        p = np.asarray(p, dtype=float)
        cols = []
        for i in combo:
            w = project(np.eye(n)[i], p)
            for prev in cols:
                w = w - model.inner(w, prev)[..., None] * prev
            w = w / np.sqrt(np.abs(model.inner(w, w)))[..., None]
            cols.append(w)
        return np.stack(cols, axis=-1)

    return gauge


def induce_bundle(frontal: ParametrizedFrontal, h: float | None = None) -> FrontBundleField:
    """Bundle data (phi, psi, connection) of a parametrized frontal.

    Components are taken in the frontal's gauge (or the reference gauge);
    the connection matrices are Gram matrices of the gauge derivatives,
    antisymmetrized to kill differencing noise.  Derivative providers for
    the residual checks are finite differences of the closed-form
    components.
    """
    model = frontal.model
    signs = model.metric_signs
    df = _df_provider(frontal)
    dnu = _dnu_provider(frontal)
    gauge = frontal.gauge or _reference_gauge(frontal)
    if h is None:
        h = default_fd_step(frontal.domain)
    dgauge = frontal.dgauge or derivative_stack(gauge, h)

    def weighted_t(g):
        return np.swapaxes(g * signs[..., :, None], -1, -2)

    def phi(p):
        return weighted_t(gauge(p)) @ df(p)

    def psi(p):
        return weighted_t(gauge(p)) @ dnu(p)

    def omega(p):
        g = gauge(p)
        dg = dgauge(p)  # (..., m_base, n, m)
        gt = weighted_t(g)
        mats = np.einsum("...ln,...knm->...klm", gt, dg)
        # Index [l, i] must be <d_k e_i, e_l>; einsum gives [k, l, i] already.
        return 0.5 * (mats - np.swapaxes(mats, -1, -2))

    field = FrontBundleField(
        m=frontal.m, domain=frontal.domain,
        phi=phi, psi=psi, omega=omega,
        name=f"induced({frontal.name})",
    )
    return field.replace(
        dphi=derivative_stack(phi, h),
        dpsi=derivative_stack(psi, h),
        domega=derivative_stack(omega, h),
    )


def sample_parametrization(frontal: ParametrizedFrontal, grid: DomainGrid | None = None) -> RealizedFront:
    """Positions and normals of the frontal on grid nodes, as a RealizedFront."""
    grid = grid or frontal.domain
    pts = grid.nodes()
    return sampled_front(frontal.f(pts), frontal.nu(pts), grid, frontal.model)


# ---------------------------------------------------------------------------
# Fixtures


def fixture_pseudosphere(domain: DomainGrid | None = None) -> ParametrizedFrontal:
    """Tractroid with its unit normal; the profile cusp sweeps out a
    cuspidal-edge circle at u = 0 and the extrinsic curvature is -1."""
    domain = domain or DomainGrid(-2.0, 2.0, 0.0, 2.0 * np.pi, 201, 201)

    def f(p):
        u, v = p[..., 0], p[..., 1]
        se = 1.0 / np.cosh(u)
        return np.stack([se * np.cos(v), se * np.sin(v), u - np.tanh(u)], axis=-1)

    def nu(p):
        u, v = p[..., 0], p[..., 1]
        t = np.tanh(u)
        se = 1.0 / np.cosh(u)
        return np.stack([t * np.cos(v), t * np.sin(v), se], axis=-1)

    def df(p):
        u, v = p[..., 0], p[..., 1]
        se, t = 1.0 / np.cosh(u), np.tanh(u)
        fu = np.stack([-se * t * np.cos(v), -se * t * np.sin(v), t * t], axis=-1)
        fv = np.stack([-se * np.sin(v), se * np.cos(v), np.zeros_like(u)], axis=-1)
        return np.stack([fu, fv], axis=-1)

    def dnu(p):
        u, v = p[..., 0], p[..., 1]
        se, t = 1.0 / np.cosh(u), np.tanh(u)
        nu_u = np.stack([se**2 * np.cos(v), se**2 * np.sin(v), -se * t], axis=-1)
        nu_v = np.stack([-t * np.sin(v), t * np.cos(v), np.zeros_like(u)], axis=-1)
        return np.stack([nu_u, nu_v], axis=-1)

    def gauge(p):
        u, v = p[..., 0], p[..., 1]
        se, t = 1.0 / np.cosh(u), np.tanh(u)
        zero = np.zeros_like(u)
        e1 = np.stack([-np.sin(v), np.cos(v), zero], axis=-1)
        e2 = np.stack([-se * np.cos(v), -se * np.sin(v), t], axis=-1)
        return np.stack([e1, e2], axis=-1)

    def dgauge(p):
        u, v = p[..., 0], p[..., 1]
        se, t = 1.0 / np.cosh(u), np.tanh(u)
        zero = np.zeros_like(u)
        e1_u = np.stack([zero, zero, zero], axis=-1)
        e1_v = np.stack([-np.cos(v), -np.sin(v), zero], axis=-1)
        e2_u = np.stack([se * t * np.cos(v), se * t * np.sin(v), se**2], axis=-1)
        e2_v = np.stack([se * np.sin(v), -se * np.cos(v), zero], axis=-1)
        du = np.stack([e1_u, e2_u], axis=-1)
        dv = np.stack([e1_v, e2_v], axis=-1)
        return np.stack([du, dv], axis=-3)

    return ParametrizedFrontal(
        m=2, model=AmbientModel("euclidean", 2), domain=domain,
        f=f, nu=nu, df=df, dnu=dnu, gauge=gauge, dgauge=dgauge,
        name="pseudosphere",
    )


def fixture_s2xr(a: float = 1.0, domain: DomainGrid | None = None) -> ParametrizedFrontal:
    """Front over S^2 x R in 4-space: (p, t) -> ((a + t^2) p, t^3).

    The chart is latitude x, azimuth y (poles excluded), and t.  The
    singular sheet is {t = 0} with null direction along t; every singular
    principal curvature there equals -1/a.  The normal is derived from the
    tangency conditions: nu = (3 t p, -2) / sqrt(9 t^2 + 4).
    """
    if a <= 0:
        raise ValueError("the parameter a must be positive")
    domain = domain or DomainGrid(-0.6, 0.6, 0.0, 1.2, 17, 17,
                                  w_min=-0.5, w_max=0.5, nw=17)

    def sphere(p):
        x, y = p[..., 0], p[..., 1]
        return (
            np.stack([np.cos(x) * np.cos(y), np.cos(x) * np.sin(y), np.sin(x)], axis=-1),
            np.stack([-np.sin(x) * np.cos(y), -np.sin(x) * np.sin(y), np.cos(x)], axis=-1),
            np.stack([-np.cos(x) * np.sin(y), np.cos(x) * np.cos(y), np.zeros_like(x)], axis=-1),
        )

    def up(vec3, last):
        return np.concatenate([vec3, last[..., None]], axis=-1)

    def f(p):
        pt, _, _ = sphere(p)
        t = p[..., 2]
        return up((a + t[..., None] ** 2) * pt, t**3)

    def nu(p):
        pt, _, _ = sphere(p)
        t = p[..., 2]
        s = np.sqrt(9.0 * t**2 + 4.0)
        return up(3.0 * t[..., None] * pt / s[..., None], -2.0 / s)

    def df(p):
        pt, px, py = sphere(p)
        t = p[..., 2]
        zero = np.zeros_like(t)
        fx = up((a + t[..., None] ** 2) * px, zero)
        fy = up((a + t[..., None] ** 2) * py, zero)
        ft = up(2.0 * t[..., None] * pt, 3.0 * t**2)
        return np.stack([fx, fy, ft], axis=-1)

    def dnu(p):
        pt, px, py = sphere(p)
        t = p[..., 2]
        s = np.sqrt(9.0 * t**2 + 4.0)
        zero = np.zeros_like(t)
        nx = up(3.0 * t[..., None] * px / s[..., None], zero)
        ny = up(3.0 * t[..., None] * py / s[..., None], zero)
        nt = up(12.0 * pt / s[..., None] ** 3, 18.0 * t / s**3)
        return np.stack([nx, ny, nt], axis=-1)

    def gauge(p):
        pt, px, py = sphere(p)
        x = p[..., 0]
        t = p[..., 2]
        s = np.sqrt(9.0 * t**2 + 4.0)
        zero = np.zeros_like(t)
        e1 = up(px, zero)
        e2 = up(py / np.cos(x)[..., None], zero)
        e3 = up(2.0 * pt / s[..., None], 3.0 * t / s)
        return np.stack([e1, e2, e3], axis=-1)

    def dgauge(p):
        pt, px, py = sphere(p)
        x, y, t = p[..., 0], p[..., 1], p[..., 2]
        s = np.sqrt(9.0 * t**2 + 4.0)
        zero = np.zeros_like(t)
        zero4 = up(np.zeros_like(pt), zero)
        phat = py / np.cos(x)[..., None]  # (-sin y, cos y, 0)
        pxy = np.stack([np.sin(x) * np.sin(y), -np.sin(x) * np.cos(y), np.zeros_like(x)], axis=-1)
        e1_x = up(-pt, zero)
        e1_y = up(pxy, zero)
        e2_y = up(np.stack([-np.cos(y), -np.sin(y), np.zeros_like(y)], axis=-1), zero)
        e3_x = up(2.0 * px / s[..., None], zero)
        e3_y = up(2.0 * py / s[..., None], zero)
        e3_t = up(-18.0 * t[..., None] * pt / s[..., None] ** 3, 12.0 / s**3)
        dx = np.stack([e1_x, zero4, e3_x], axis=-1)
        dy = np.stack([e1_y, e2_y, e3_y], axis=-1)
        dt = np.stack([zero4, zero4, e3_t], axis=-1)
        return np.stack([dx, dy, dt], axis=-3)

    return ParametrizedFrontal(
        m=3, model=AmbientModel("euclidean", 3), domain=domain,
        f=f, nu=nu, df=df, dnu=dnu, gauge=gauge, dgauge=dgauge,
        name="s2xr", params={"a": float(a)},
    )


def fixture_unit_sphere(inward_normal: bool = True,
                        domain: DomainGrid | None = None) -> ParametrizedFrontal:
    """Unit sphere chart; with the inward normal the second fundamental form
    equals the first, and the extrinsic curvature is +1 either way."""
    domain = domain or DomainGrid(-0.6, 0.6, 0.0, 1.2, 33, 33)
    sign = -1.0 if inward_normal else 1.0

    def f(p):
        x, y = p[..., 0], p[..., 1]
        return np.stack([np.cos(x) * np.cos(y), np.cos(x) * np.sin(y), np.sin(x)], axis=-1)

    def nu(p):
        return sign * f(p)

    return ParametrizedFrontal(
        m=2, model=AmbientModel("euclidean", 2), domain=domain,
        f=f, nu=nu, name="unit-sphere", params={"inward": inward_normal},
    )


def fixture_plane(domain: DomainGrid | None = None) -> ParametrizedFrontal:
    domain = domain or DomainGrid(-1.0, 1.0, -1.0, 1.0, 21, 21)

    def f(p):
        return np.stack([p[..., 0], p[..., 1], np.zeros_like(p[..., 0])], axis=-1)

    def nu(p):
        zero = np.zeros_like(p[..., 0])
        return np.stack([zero, zero, np.ones_like(zero)], axis=-1)

    return ParametrizedFrontal(
        m=2, model=AmbientModel("euclidean", 2), domain=domain,
        f=f, nu=nu, name="plane",
    )


# ---------------------------------------------------------------------------
# Equidimensional map bundles (second homomorphism zero)


def _zero_matrix_provider(m):
    def zero(p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (m, m))
    return zero


def polar_map_bundle(domain: DomainGrid | None = None) -> FrontBundleField:
    """Coherent bundle of the polar-coordinate map (u, v) -> (u cos v, u sin v),
    in the constant gauge of the plane (flat connection)."""
    domain = domain or DomainGrid(0.5, 1.5, 0.0, np.pi, 101, 101)

    def phi(p):
        u, v = p[..., 0], p[..., 1]
        cu = np.stack([np.cos(v), np.sin(v)], axis=-1)
        cv = np.stack([-u * np.sin(v), u * np.cos(v)], axis=-1)
        return np.stack([cu, cv], axis=-1)

    def dphi(p):
        u, v = p[..., 0], p[..., 1]
        zero = np.zeros_like(u)
        du = np.stack([
            np.stack([zero, -np.sin(v)], axis=-1),
            np.stack([zero, np.cos(v)], axis=-1),
        ], axis=-2)
        dv = np.stack([
            np.stack([-np.sin(v), -u * np.cos(v)], axis=-1),
            np.stack([np.cos(v), -u * np.sin(v)], axis=-1),
        ], axis=-2)
        return np.stack([du, dv], axis=-3)

    zero2 = _zero_matrix_provider(2)

    def zero_omega(p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (2, 2, 2))

    def zero_domega(p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (2, 2, 2, 2))

    def zero_dpsi(p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (2, 2, 2))

    return FrontBundleField(
        m=2, domain=domain, phi=phi, psi=zero2, omega=zero_omega,
        dphi=dphi, dpsi=zero_dpsi, domega=zero_domega,
        name="polar-map",
    )


def cubic_fold_bundle(domain: DomainGrid | None = None) -> FrontBundleField:
    """Coherent bundle of (u, v) -> (u, v^3): jacobian 3 v^2 vanishes to
    second order on {v = 0}, a degenerate singular line."""
    domain = domain or DomainGrid(-1.0, 1.0, -1.0, 1.0, 101, 101)

    def phi(p):
        v = p[..., 1]
        one = np.ones_like(v)
        zero = np.zeros_like(v)
        return np.stack([
            np.stack([one, zero], axis=-1),
            np.stack([zero, 3.0 * v**2], axis=-1),
        ], axis=-2)

    def dphi(p):
        v = p[..., 1]
        zero = np.zeros_like(v)
        du = np.zeros(p.shape[:-1] + (2, 2))
        dv = np.stack([
            np.stack([zero, zero], axis=-1),
            np.stack([zero, 6.0 * v], axis=-1),
        ], axis=-2)
        return np.stack([du, dv], axis=-3)

    zero2 = _zero_matrix_provider(2)

    def zero_omega(p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (2, 2, 2))

    def zero_domega(p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (2, 2, 2, 2))

    def zero_dpsi(p):
        p = np.asarray(p, dtype=float)
        return np.zeros(p.shape[:-1] + (2, 2, 2))

    return FrontBundleField(
        m=2, domain=domain, phi=phi, psi=zero2, omega=zero_omega,
        dphi=dphi, dpsi=zero_dpsi, domega=zero_domega,
        name="cubic-fold-map",
    )


def fixture_by_name(spec: str):
    """CLI fixture lookup: 'name' or 'name:key=value,...'."""
    name, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            params[key.strip()] = float(value)
    name = name.strip().lower()
    if name == "pseudosphere":
        return fixture_pseudosphere()
    if name == "s2xr":
        return fixture_s2xr(a=params.get("a", 1.0))
    if name == "sphere":
        return fixture_unit_sphere()
    if name == "plane":
        return fixture_plane()
    raise KeyError(f"unknown fixture {name!r}")
