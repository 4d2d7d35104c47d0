"""Command-line interface.

One executable, subcommand style; the manifest path is always the first
positional argument.  CSV is the canonical output (17 significant digits);
the streamplot SVG is a convenience rendering with no numeric authority.
Exit codes: 0 success, 2 usage/parse/domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import calculus, expr as ex, flow, helmholtz, stokes
from .errors import ManifestError, SolverError, VortError
from .manifest import load_manifest


def f17(v) -> str:
    return f"{float(v):.17g}"


def _point(manifest, text):
    parts = [p for p in text.split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise VortError(f"point {text!r} is not a comma-separated list of reals") from None
    return manifest.chart.point(values)


def cmd_christoffel(args) -> int:
    manifest = load_manifest(args.manifest)
    point = _point(manifest, args.at)
    gamma = calculus.christoffel(manifest.metric, point).gamma
    n = manifest.chart.dim
    for k in range(n):
        for i in range(n):
            for j in range(n):
                print(f"{k + 1} {i + 1} {j + 1} {f17(gamma[k, i, j])}")
    return 0


def cmd_grad(args) -> int:
    manifest = load_manifest(args.manifest)
    point = _point(manifest, args.at)
    g = calculus.grad(manifest.metric, manifest.scalar_named(args.field))
    for i, comp in enumerate(g.components):
        print(f"{i + 1} {f17(ex.evaluate(comp, point))}")
    return 0


def cmd_div(args) -> int:
    manifest = load_manifest(args.manifest)
    point = _point(manifest, args.at)
    X = manifest.field_named(args.field)
    if X.variance != calculus.CONTRAVARIANT:
        X = calculus.sharp(manifest.metric, X)
    print(f17(ex.evaluate(calculus.div(manifest.metric, X), point)))
    return 0


def cmd_curl(args) -> int:
    manifest = load_manifest(args.manifest)
    point = _point(manifest, args.at)
    A = calculus.curl(manifest.metric, manifest.field_named(args.field))
    n = manifest.chart.dim
    for i in range(n):
        for j in range(n):
            print(f"{i + 1} {j + 1} {f17(ex.evaluate(A.entries[i][j], point))}")
    return 0


def cmd_killing(args) -> int:
    manifest = load_manifest(args.manifest)
    X = manifest.field_named(args.field)
    if X.variance != calculus.CONTRAVARIANT:
        X = calculus.sharp(manifest.metric, X)
    report = calculus.is_killing(manifest.metric, X, tol=args.tol)
    print(f"killing={'true' if report.killing else 'false'} "
          f"max_lie_residual={f17(report.max_lie_residual)} "
          f"divergence_free={'true' if report.divergence_free else 'false'} "
          f"max_divergence={f17(report.max_divergence)}")
    return 0


def cmd_flow(args) -> int:
    manifest = load_manifest(args.manifest)
    X = manifest.field_named(args.field)
    start = _point(manifest, getattr(args, "from"))
    path = flow.integrate_flow(X, start, args.t, args.steps, name=args.field)
    print("t," + ",".join(manifest.chart.coords))
    for t, row in zip(path.ts, path.points):
        print(",".join([f17(t)] + [f17(v) for v in row]))
    return 0


def _write_field_csv(path, lattice, header_values, arrays):
    grids = lattice.grids()
    coords = lattice.chart.coords
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(list(coords) + header_values) + "\n")
        for idx in np.ndindex(lattice.shape):
            row = [f17(grids[c][idx]) for c in coords]
            row += [f17(a[idx]) for a in arrays]
            fh.write(",".join(row) + "\n")


def cmd_decompose(args) -> int:
    manifest = load_manifest(args.manifest)
    if args.res < 8:
        raise VortError("decompose needs a resolution of at least 8")
    X = manifest.field_named(args.field)
    lattice = helmholtz.Lattice(manifest.chart, (args.res,) * manifest.chart.dim)
    result = helmholtz.helmholtz_decompose(manifest.metric, X, lattice)
    op = helmholtz.assemble_laplace_beltrami(manifest.metric, lattice)
    max_div_y = float(np.max(np.abs(op.div(result.Y.components))))
    max_curl_z = float(np.max(np.abs(op.curl(result.Z.components))))
    os.makedirs(args.out, exist_ok=True)
    n = manifest.chart.dim
    _write_field_csv(os.path.join(args.out, "Y.csv"), lattice,
                     [f"v{i + 1}" for i in range(n)], list(result.Y.components))
    _write_field_csv(os.path.join(args.out, "Z.csv"), lattice,
                     [f"v{i + 1}" for i in range(n)], list(result.Z.components))
    _write_field_csv(os.path.join(args.out, "phi.csv"), lattice,
                     ["phi"], [result.phi.values])
    print(f"max_divY={f17(max_div_y)} max_curlZ={f17(max_curl_z)} "
          f"residual={f17(result.info.relative_residual)}")
    return 0


def _seed_points(chart, count):
    per_axis = int(np.ceil(count ** (1.0 / chart.dim)))
    axes = []
    for lo, hi in chart.domain:
        step = (hi - lo) / per_axis
        axes.append(lo + step * (np.arange(per_axis) + 0.5))
    grids = np.meshgrid(*axes, indexing="ij")
    stacked = np.stack([g.ravel() for g in grids], axis=-1)
    return stacked[:count]


def cmd_streamplot(args) -> int:
    manifest = load_manifest(args.manifest)
    if args.seeds < 1:
        raise VortError("streamplot needs at least one seed")
    X = manifest.field_named(args.field)
    paths = []
    notes = []
    for line_id, seed in enumerate(_seed_points(manifest.chart, args.seeds)):
        try:
            path = flow.integrate_flow(X, seed, args.t, args.steps, name=args.field)
        except VortError:
            paths.append(None)
            notes.append(line_id)
            continue
        paths.append(path)
        if path.exited:
            notes.append(line_id)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("line_id,t," + ",".join(manifest.chart.coords) + "\n")
        for line_id, path in enumerate(paths):
            if path is None:
                continue
            for t, row in zip(path.ts, path.points):
                fh.write(",".join([str(line_id), f17(t)] + [f17(v) for v in row]) + "\n")
            if line_id in notes:
                fh.write(f"# line {line_id} exited domain\n")
    if args.svg:
        _write_svg(args.svg, manifest.chart, paths)
    print(f"wrote {sum(p is not None for p in paths)} lines to {args.out}")
    return 0


def _write_svg(path, chart, paths):
    if chart.dim != 2:
        raise VortError("SVG rendering is only available for 2-dimensional charts")
    (xlo, xhi), (ylo, yhi) = chart.domain
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'viewBox="{xlo} {ylo} {xhi - xlo} {yhi - ylo}">']
    for p in paths:
        if p is None or len(p.points) == 0:
            continue
        pts = " ".join(f"{x:.6g},{y:.6g}" for x, y in p.points)
        lines.append(f'<polyline fill="none" stroke="black" stroke-width="1" '
                     f'vector-effect="non-scaling-stroke" points="{pts}"/>')
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_stokes_check(args) -> int:
    manifest = load_manifest(args.manifest)
    X = manifest.field_named(args.field)
    surface = manifest.surface_named(args.surface)
    report = stokes.verify_curl_stokes(X, surface, args.nodes)
    print(f"lhs={f17(report.lhs)} rhs={f17(report.rhs)} "
          f"abs_err={f17(report.abs_err)} nodes={report.nodes}")
    return 0


def cmd_gradline_check(args) -> int:
    manifest = load_manifest(args.manifest)
    f = manifest.scalar_named(args.scalar)
    curve = manifest.curve_named(args.curve)
    report = stokes.verify_grad_line(f, curve, args.nodes, chart=manifest.chart)
    print(f"lhs={f17(report.lhs)} rhs={f17(report.rhs)} "
          f"abs_err={f17(report.abs_err)} nodes={report.nodes}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vort",
        description="Riemannian vector calculus on a chart: operators, flows, "
                    "Helmholtz decomposition and integral-identity checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, handler):
        p.add_argument("manifest", help="manifest file path")
        p.set_defaults(handler=handler)

    p = sub.add_parser("christoffel", help="connection coefficients at a point")
    common(p, cmd_christoffel)
    p.add_argument("--at", required=True, help="comma-separated point")

    for name, handler, what in (("grad", cmd_grad, "scalar"),
                                ("div", cmd_div, "vector field"),
                                ("curl", cmd_curl, "vector field")):
        p = sub.add_parser(name, help=f"{name} of a named {what} at a point")
        common(p, handler)
        p.add_argument("--field", required=True)
        p.add_argument("--at", required=True)

    p = sub.add_parser("killing", help="test whether a field is Killing")
    common(p, cmd_killing)
    p.add_argument("--field", required=True)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("flow", help="integrate the flow of a field (CSV to stdout)")
    common(p, cmd_flow)
    p.add_argument("--field", required=True)
    p.add_argument("--from", required=True, help="comma-separated start point")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)

    p = sub.add_parser("decompose", help="Helmholtz decomposition to CSV files")
    common(p, cmd_decompose)
    p.add_argument("--field", required=True)
    p.add_argument("--res", type=int, required=True, help="lattice points per axis")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("streamplot", help="flow lines from a uniform seed grid")
    common(p, cmd_streamplot)
    p.add_argument("--field", required=True)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--svg", default=None, help="optional SVG output path")

    p = sub.add_parser("stokes-check", help="curl flux against boundary circulation")
    common(p, cmd_stokes_check)
    p.add_argument("--field", required=True)
    p.add_argument("--surface", required=True)
    p.add_argument("--nodes", type=int, default=64)

    p = sub.add_parser("gradline-check", help="gradient line integral against endpoint values")
    common(p, cmd_gradline_check)
    p.add_argument("--scalar", required=True)
    p.add_argument("--curve", required=True)
    p.add_argument("--nodes", type=int, default=64)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SolverError as err:
        print(f"vort: {err}", file=sys.stderr)
        return 3
    except (ManifestError, VortError) as err:
        print(f"vort: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"vort: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
