"""Command-line driver.

Subcommands map onto the library stages: ``check`` certifies integrability
residuals, ``realize`` integrates the frame ODE and exports meshes,
``generate`` runs the two PDE solvers, ``analyze`` extracts and classifies
the singular set and runs the curvature-sign harness, and ``verify`` runs
the acceptance suite.

Scenes are JSON documents (schema below, unknown keys rejected); every
subcommand also accepts the common settings as flags, which override the
file.  Exit codes: 0 pass, 1 check failure, 2 config error,
3 computational error, 4 solver nonconvergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .errors import ConfigError, DivergenceError, NonconvergenceError
from .generators import (ThetaField, chebyshev_bundle, curvatureline_bundle,
                         exact_soliton, linear_source, sinh_profile_source,
                         solve_sine_gordon_goursat, solve_sinh_gordon_dirichlet,
                         soliton_source)
from .grids import DomainGrid
from .induce import (cubic_fold_bundle, fixture_by_name, induce_bundle,
                     polar_map_bundle)
from .integrability import residual_report
from .realize import integrate_frame
from .singular import analyze_singular_set, curvature_sign_report

SCENE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "field": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "generator": {"enum": ["chebyshev", "curvature-line"]},
                "theta": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "source": {"enum": ["soliton", "sinh-profile", "linear", "csv"]},
                        "k": {"type": "number"},
                        "amplitude": {"type": "number"},
                        "slope_u": {"type": "number"},
                        "slope_v": {"type": "number"},
                        "offset": {"type": "number"},
                        "path": {"type": "string"},
                    },
                },
                "fixture": {"type": "string"},
                "map": {"enum": ["polar", "cubic-fold"]},
                "perturb_psi": {"type": "number"},
            },
        },
        "c": {"type": "number"},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "u": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "v": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "w": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "nu": {"type": "integer", "minimum": 2},
                "nv": {"type": "integer", "minimum": 2},
                "nw": {"type": "integer", "minimum": 2},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "mesh": {"type": "string"},
                "summary": {"type": "string"},
                "residuals": {"type": "string"},
                "records": {"type": "string"},
                "theta": {"type": "string"},
                "singular_curves": {"type": "string"},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "check": {"type": "number"},
                "acceptance": {"type": "number"},
            },
        },
        "pde": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["sine-gordon", "sinh-gordon"]},
                "c": {"type": "number"},
                "edges": {"enum": ["soliton", "linear", "zero"]},
                "slope_u": {"type": "number"},
                "slope_v": {"type": "number"},
                "boundary": {"type": "number"},
            },
        },
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 1},
        "substeps": {"type": "integer", "minimum": 1},
    },
}

DEFAULT_GRID = {"u": [-2.0, 2.0], "v": [-2.0, 2.0], "nu": 201, "nv": 201}


def load_config(path: str | None, overrides: dict) -> dict:
    config = {}
    if path:
        try:
            config = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    for key, value in overrides.items():
        if value is not None:
            config[key] = value
    try:
        import jsonschema

        jsonschema.validate(config, SCENE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    return config


def grid_from_config(config: dict, default: dict | None = None) -> DomainGrid:
    spec = {**(default or DEFAULT_GRID), **config.get("grid", {})}
    kw = {}
    if "w" in spec or "nw" in spec:
        w = spec.get("w", [-0.5, 0.5])
        kw = dict(w_min=w[0], w_max=w[1], nw=spec.get("nw", 17))
    return DomainGrid(spec["u"][0], spec["u"][1], spec["v"][0], spec["v"][1],
                      spec["nu"], spec["nv"], **kw)


def theta_source_from_config(spec: dict):
    source = spec.get("source", "soliton")
    if source == "soliton":
        return soliton_source(spec.get("k", 1.0))
    if source == "sinh-profile":
        return sinh_profile_source(spec.get("amplitude", 1.0))
    if source == "linear":
        return linear_source(spec.get("slope_u", 1.0), spec.get("slope_v", 1.0),
                             spec.get("offset", 0.0))
    if source == "csv":
        from .generators import grid_theta_source

        return grid_theta_source(ThetaField.from_csv(Path(spec["path"]).read_text()))
    raise ConfigError(f"unknown theta source {source!r}")


def field_from_config(config: dict, grid: DomainGrid):
    spec = config.get("field", {"generator": "chebyshev", "theta": {"source": "soliton"}})
    if "fixture" in spec:
        frontal = fixture_by_name(spec["fixture"])
        field = induce_bundle(frontal)
    elif "map" in spec:
        field = polar_map_bundle() if spec["map"] == "polar" else cubic_fold_bundle()
    else:
        theta = theta_source_from_config(spec.get("theta", {}))
        if spec.get("generator", "chebyshev") == "chebyshev":
            field = chebyshev_bundle(theta, config.get("c", 0.0), domain=grid)
        else:
            field = curvatureline_bundle(theta, domain=grid)
    eps = spec.get("perturb_psi")
    if eps:
        from .realize import perturb_second_homomorphism

        field = perturb_second_homomorphism(field, eps)
    return field


# ---------------------------------------------------------------------------
# Writers


def _outdir(config: dict) -> Path:
    out = Path(config.get("outputs", {}).get("dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: Path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON friendly: {type(obj)}")


def write_obj(path: Path, positions, normals=None, flip_axis: int | None = None):
    """Grid mesh export: vertices, optional vertex normals, quads split
    into triangles."""
    nu, nv = positions.shape[:2]
    lines = []
    for i in range(nu):
        for j in range(nv):
            x = positions[i, j]
            lines.append("v " + " ".join(f"{t:.17g}" for t in x))
    if normals is not None:
        for i in range(nu):
            for j in range(nv):
                x = normals[i, j]
                lines.append("vn " + " ".join(f"{t:.17g}" for t in x))

    def vid(i, j):
        return i * nv + j + 1

    spec = "{0}//{0} {1}//{1} {2}//{2}" if normals is not None else "{0} {1} {2}"
    for i in range(nu - 1):
        for j in range(nv - 1):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            lines.append("f " + spec.format(a, b, c))
            lines.append("f " + spec.format(a, c, d))
    path.write_text("\n".join(lines) + "\n")


def write_polyline_obj(path: Path, curves):
    lines = []
    offset = 1
    chunks = []
    for curve in curves:
        pts = curve.points
        for p in pts:
            coords = list(p) + [0.0] * (3 - len(p))
            lines.append("v " + " ".join(f"{t:.17g}" for t in coords))
        ids = list(range(offset, offset + len(pts)))
        if curve.closed:
            ids.append(offset)
        chunks.append("l " + " ".join(str(i) for i in ids))
        offset += len(pts)
    path.write_text("\n".join(lines + chunks) + "\n")


def _stereographic(positions, model_tag):
    """Viewable 3-coordinate projection for the curved models."""
    if model_tag == "sphere":
        # Project from (-1, 0, 0, 0).
        w = positions[..., 0]
        return positions[..., 1:] / (1.0 + w)[..., None]
    # Hyperboloid -> Poincare ball.
    return positions[..., 1:] / (1.0 + positions[..., 0])[..., None]


# ---------------------------------------------------------------------------
# Commands


def cmd_check(config: dict) -> int:
    grid = grid_from_config(config)
    field = field_from_config(config, grid)
    c = config.get("c", 0.0)
    report = residual_report(field, c, grid if field.m == 2 else None)
    out = _outdir(config)
    tol = config.get("tolerances", {}).get("check", 1e-8)

    name = config.get("outputs", {}).get("residuals", "residuals.csv")
    nodes = report.grid.nodes().reshape(-1, report.grid.m)
    cols = [report.codazzi_phi, report.codazzi_psi, report.gauss]
    header = ["u", "v"] + (["w"] if report.grid.m == 3 else []) + [
        "codazzi_phi", "codazzi_psi", "gauss"]
    if report.two_d is not None:
        cols.append(report.two_d)
        header.append("two_d")
    rows = np.column_stack([nodes] + [c.reshape(-1) for c in cols])
    write_csv(out / name, header, [[repr(float(x)) for x in row] for row in rows])

    summary = report.summary()
    summary["tolerance"] = tol
    summary["passed"] = report.passes(tol)
    write_json(out / config.get("outputs", {}).get("summary", "check.json"), summary)
    print(f"max residual {report.max_overall:.3e} (tolerance {tol:g}): "
          + ("PASS" if summary["passed"] else "FAIL"))
    return 0 if summary["passed"] else 1


def cmd_realize(config: dict) -> int:
    grid = grid_from_config(config)
    field = field_from_config(config, grid)
    c = config.get("c", 0.0)
    front = integrate_frame(field, c, grid, substeps=config.get("substeps", 1))
    out = _outdir(config)
    mesh = config.get("outputs", {}).get("mesh", "front.obj")

    sidecar = {
        "model": front.model.tag,
        "c": c,
        "holonomy_residual_max": front.holonomy_residual_max,
        "base_index": list(front.base_index),
        "normalization": "frame = identity at the base node (grid center)",
        "grid": {"nu": grid.nu, "nv": grid.nv,
                 "u": [grid.u_min, grid.u_max], "v": [grid.v_min, grid.v_max]},
    }
    if front.model.tag == "euclidean":
        write_obj(out / mesh, front.positions, front.normals)
    else:
        constraint = np.abs(front.model.inner(front.positions, front.positions)
                            - (1.0 if front.model.tag == "sphere" else -1.0)).max()
        sidecar["model_constraint_max"] = float(constraint)
        proj = _stereographic(front.positions, front.model.tag)
        stem = Path(mesh).stem
        write_obj(out / f"{stem}_stereo.obj", proj)
        sidecar["projection"] = "stereographic" if front.model.tag == "sphere" else "poincare"
    write_json(out / config.get("outputs", {}).get("summary", "realize.json"), sidecar)
    print(f"holonomy residual {front.holonomy_residual_max:.3e}; wrote {mesh}")
    return 0


def cmd_generate(config: dict) -> int:
    grid = grid_from_config(config)
    pde = config.get("pde", {"kind": "sine-gordon", "c": 2.0, "edges": "soliton"})
    kind = pde.get("kind", "sine-gordon")
    out = _outdir(config)
    try:
        if kind == "sine-gordon":
            c = pde.get("c", 2.0)
            edges = pde.get("edges", "soliton")
            if edges == "soliton":
                f0 = lambda u: exact_soliton(u, grid.v_min)
                g0 = lambda v: exact_soliton(grid.u_min, v)
            elif edges == "linear":
                su, sv = pde.get("slope_u", 1.0), pde.get("slope_v", 1.0)
                f0 = lambda u: su * u + sv * grid.v_min
                g0 = lambda v: su * grid.u_min + sv * v
            else:
                f0 = lambda u: np.zeros_like(np.asarray(u, dtype=float))
                g0 = lambda v: np.zeros_like(np.asarray(v, dtype=float))
            theta = solve_sine_gordon_goursat(c, f0, g0, grid)
        else:
            theta = solve_sinh_gordon_dirichlet(pde.get("boundary", 0.0), grid)
    except NonconvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 4

    name = config.get("outputs", {}).get("theta", "theta.csv")
    (out / name).write_text(theta.to_csv())
    print(f"{kind} solved: residual {theta.residual:.3e}; wrote {name}")
    return 0


def cmd_analyze(config: dict) -> int:
    grid = grid_from_config(config)
    field = field_from_config(config, grid)
    out = _outdir(config)
    threads = config.get("threads") or int(os.environ.get("FRONTFORGE_THREADS", "0") or 0)

    extracted, records = analyze_singular_set(
        field, grid if field.m == grid.m else None, threads=threads)
    if field.m == 2:
        flat_records = [r for recs in records for r in recs]
        write_polyline_obj(
            out / config.get("outputs", {}).get("singular_curves", "singular_curves.obj"),
            extracted)
    else:
        flat_records = records

    rows = []
    m = field.m
    for rec in flat_records:
        row = [repr(float(x)) for x in rec.location]
        row += [repr(float(rec.lam)),
                repr(float(rec.lambda_prime)) if rec.lambda_prime is not None else "",
                rec.classification]
        row += [repr(float(x)) for x in (rec.eta if rec.eta is not None else [float("nan")] * m)]
        kappas = rec.kappas if rec.kappas is not None else [float("nan")] * (m - 1)
        row += [repr(float(k)) for k in np.atleast_1d(kappas)]
        row.append(repr(float(rec.growth_exponent)) if rec.growth_exponent is not None else "")
        rows.append(row)
    header = (["u", "v"] + (["w"] if m == 3 else [])
              + ["lambda", "lambda_prime", "class"]
              + [f"eta_{k}" for k in "uvw"[:m]]
              + [f"kappa_{k + 1}" for k in range(m - 1)]
              + ["growth_exponent"])
    write_csv(out / config.get("outputs", {}).get("records", "singular_points.csv"),
              header, rows)

    scale = 0.02 * field.domain.diameter
    report = curvature_sign_report(field, flat_records,
                                   offsets=(scale, scale / 2, scale / 4))
    write_json(out / config.get("outputs", {}).get("summary", "analyze.json"), report)
    n_a2 = sum(1 for r in flat_records if r.classification == "a2")
    print(f"{len(flat_records)} singular nodes ({n_a2} A2); "
          f"report items: " + ", ".join(
              f"{k}={'pass' if v.get('passed') else ('n/a' if not v.get('applicable') else 'FAIL')}"
              for k, v in report["items"].items()))
    return 0


def cmd_verify(config: dict, only: str | None = None) -> int:
    results = acceptance.run_all(only=only, seed=config.get("seed", 42),
                                 tolerance_scale=config.get("tolerances", {}).get("acceptance", 1.0))
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name:<{width}}  measured={r.measured:.3e}  "
              f"tolerance={r.tolerance:.1e}  ({r.seconds:.1f}s)")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 0 if not failed else 1


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="frontforge",
        description="Realization and singular-curvature analysis of wave fronts in space forms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scene JSON file")
        p.add_argument("--fixture", help="fixture name, e.g. s2xr:a=1 or pseudosphere")
        p.add_argument("--c", type=float, dest="c", help="ambient curvature")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads (or FRONTFORGE_THREADS)")
        p.add_argument("--substeps", type=int, help="integrator substeps per grid cell")

    for name in ("check", "realize", "generate", "analyze"):
        common(sub.add_parser(name))
    gen = sub.choices["generate"]
    gen.add_argument("--pde", choices=["sine-gordon", "sinh-gordon"])
    gen.add_argument("--pde-c", type=float, help="coefficient c in theta_uv = (c-1) sin theta")
    gen.add_argument("--edges", choices=["soliton", "linear", "zero"])
    gen.add_argument("--boundary", type=float, help="constant Dirichlet boundary value")
    ver = sub.add_parser("verify")
    ver.add_argument("--config")
    ver.add_argument("--only", help="substring filter on criterion names")
    ver.add_argument("--tolerance-scale", type=float, default=None)

    args = parser.parse_args(argv)

    overrides = {}
    if getattr(args, "c", None) is not None:
        overrides["c"] = args.c
    if getattr(args, "fixture", None):
        overrides["field"] = {"fixture": args.fixture}
    if getattr(args, "out", None):
        overrides["outputs"] = {"dir": args.out}
    if getattr(args, "threads", None):
        overrides["threads"] = args.threads
    if getattr(args, "substeps", None):
        overrides["substeps"] = args.substeps
    if args.command == "generate":
        pde = {}
        if args.pde:
            pde["kind"] = args.pde
        if args.pde_c is not None:
            pde["c"] = args.pde_c
        if args.edges:
            pde["edges"] = args.edges
        if args.boundary is not None:
            pde["boundary"] = args.boundary
        if pde:
            overrides["pde"] = pde
    if args.command == "verify" and args.tolerance_scale is not None:
        overrides["tolerances"] = {"acceptance": args.tolerance_scale}

    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "check":
            return cmd_check(config)
        if args.command == "realize":
            return cmd_realize(config)
        if args.command == "generate":
            return cmd_generate(config)
        if args.command == "analyze":
            return cmd_analyze(config)
        if args.command == "verify":
            return cmd_verify(config, only=args.only)
    except NonconvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 4
    except (DivergenceError, ValueError, RuntimeError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 3
    return 2


if __name__ == "__main__":
    sys.exit(main())
