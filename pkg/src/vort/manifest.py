"""Manifest files: one chart, one metric, named fields/scalars/forms and
named surfaces/curves in INI-style section/key-value text.

    [chart]
    dim = 2
    coords = theta, phi
    domain = -1.2,1.2 ; 0,6.283185307179586
    boundary = fixed, periodic

    [metric]
    g_1_1 = 1
    g_2_2 = cos(theta)^2

    [field spin]
    variance = contra
    v_1 = 1
    v_2 = cos(theta)^2

Metric keys are g_<i>_<j> (1-based); unspecified diagonals default to 1,
off-diagonals to 0, and a one-sided off-diagonal entry is mirrored.  Form
components are keyed w_<i>_<j>... on increasing 1-based index tuples (plain
`w` for a 0-form).  Surfaces and curves carry their own parameter names and
embed into the x,y,z of a 3-dimensional chart.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from . import expr as ex
from .calculus import VectorField, CONTRAVARIANT, COVARIANT
from .errors import ExprSyntaxError, ManifestError, VortError
from .forms import KForm
from .manifold import Chart, MetricField
from .stokes import ParamCurve, ParamSurface


@dataclass
class Manifest:
    chart: Chart
    metric: MetricField
    fields: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    forms: dict = field(default_factory=dict)
    surfaces: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)

    def field_named(self, name) -> VectorField:
        if name not in self.fields:
            raise ManifestError(f"no field named {name!r} in the manifest")
        return self.fields[name]

    def scalar_named(self, name) -> ex.Expr:
        if name not in self.scalars:
            raise ManifestError(f"no scalar named {name!r} in the manifest")
        return self.scalars[name]

    def surface_named(self, name) -> ParamSurface:
        if name not in self.surfaces:
            raise ManifestError(f"no surface named {name!r} in the manifest")
        return self.surfaces[name]

    def curve_named(self, name) -> ParamCurve:
        if name not in self.curves:
            raise ManifestError(f"no curve named {name!r} in the manifest")
        return self.curves[name]


def load_manifest(path) -> Manifest:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_manifest(fh.read(), source=str(path))


def parse_manifest(text, source="<manifest>") -> Manifest:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as err:
        raise ManifestError(f"malformed manifest: {err}") from err

    if "chart" not in parser:
        raise ManifestError("manifest has no [chart] section")
    chart = _parse_chart(parser["chart"])
    metric = _parse_metric(parser["metric"] if "metric" in parser else {}, chart)
    try:
        metric.validate()
    except VortError as err:
        raise ManifestError(f"metric rejected: {err}") from err

    manifest = Manifest(chart=chart, metric=metric)
    for section in parser.sections():
        if section in ("chart", "metric"):
            continue
        kind, _, name = section.partition(" ")
        name = name.strip()
        if not name:
            raise ManifestError(f"section [{section}] needs a name, e.g. [{kind} mine]")
        body = parser[section]
        if kind == "field":
            manifest.fields[name] = _parse_field(body, chart, section)
        elif kind == "scalar":
            manifest.scalars[name] = _parse_scalar(body, chart, section)
        elif kind == "form":
            manifest.forms[name] = _parse_form(body, chart, section)
        elif kind == "surface":
            manifest.surfaces[name] = _parse_surface(body, section)
        elif kind == "curve":
            manifest.curves[name] = _parse_curve(body, section)
        else:
            raise ManifestError(f"unknown section kind [{section}]")
    return manifest


def _get(body, key, section):
    if key not in body:
        raise ManifestError(f"section [{section}] is missing key {key!r}")
    return body[key]


def _parse_expr(text, allowed, context):
    try:
        e = ex.parse(text)
    except ExprSyntaxError as err:
        raise ManifestError(f"{context}: {err}") from err
    stray = ex.variables(e) - set(allowed)
    if stray:
        raise ManifestError(
            f"{context}: unknown variable(s) {sorted(stray)}; allowed: {list(allowed)}")
    return e


def _parse_chart(body) -> Chart:
    coords = tuple(c.strip() for c in _get(body, "coords", "chart").split(",") if c.strip())
    dim = int(_get(body, "dim", "chart"))
    if dim != len(coords):
        raise ManifestError(f"chart dim={dim} but {len(coords)} coordinates listed")
    pieces = [p.strip() for p in _get(body, "domain", "chart").split(";")]
    if len(pieces) != dim:
        raise ManifestError(f"chart domain needs {dim} 'lo,hi' entries separated by ';'")
    domain = []
    for piece in pieces:
        lo, _, hi = piece.partition(",")
        try:
            domain.append((float(lo), float(hi)))
        except ValueError:
            raise ManifestError(f"bad domain interval {piece!r}") from None
    boundary = tuple(b.strip() for b in _get(body, "boundary", "chart").split(","))
    if len(boundary) != dim:
        raise ManifestError(f"chart boundary needs {dim} entries")
    try:
        return Chart(body.get("name", "chart"), coords, tuple(domain), boundary)
    except VortError as err:
        raise ManifestError(str(err)) from err


def _parse_metric(body, chart) -> MetricField:
    n = chart.dim
    entries = [[None] * n for _ in range(n)]
    for key, value in body.items():
        parts = key.split("_")
        if len(parts) != 3 or parts[0] != "g":
            raise ManifestError(f"metric key {key!r} is not of the form g_<i>_<j>")
        try:
            i, j = int(parts[1]) - 1, int(parts[2]) - 1
        except ValueError:
            raise ManifestError(f"metric key {key!r} has non-integer indices") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ManifestError(f"metric key {key!r} outside dimension {n}")
        entries[i][j] = _parse_expr(value, chart.coords, f"metric entry {key}")
    for i in range(n):
        for j in range(n):
            if entries[i][j] is None and entries[j][i] is not None:
                entries[i][j] = entries[j][i]
    for i in range(n):
        for j in range(n):
            if entries[i][j] is None:
                entries[i][j] = ex.ONE if i == j else ex.ZERO
    return MetricField(chart, entries)


def _parse_field(body, chart, section) -> VectorField:
    variance = body.get("variance", "contra").strip()
    if variance not in (CONTRAVARIANT, COVARIANT):
        raise ManifestError(f"[{section}] variance must be contra|co, got {variance!r}")
    comps = []
    for i in range(1, chart.dim + 1):
        comps.append(_parse_expr(_get(body, f"v_{i}", section), chart.coords,
                                 f"[{section}] v_{i}"))
    return VectorField(chart, tuple(comps), variance)


def _parse_scalar(body, chart, section) -> ex.Expr:
    return _parse_expr(_get(body, "f", section), chart.coords, f"[{section}] f")


def _parse_form(body, chart, section) -> KForm:
    degree = int(_get(body, "degree", section))
    comps = {}
    for key, value in body.items():
        if key == "degree":
            continue
        if key == "w" and degree == 0:
            comps[()] = _parse_expr(value, chart.coords, f"[{section}] w")
            continue
        parts = key.split("_")
        if parts[0] != "w" or len(parts) != degree + 1:
            raise ManifestError(
                f"[{section}] key {key!r} does not match a degree-{degree} component")
        try:
            idx = tuple(int(p) - 1 for p in parts[1:])
        except ValueError:
            raise ManifestError(f"[{section}] key {key!r} has non-integer indices") from None
        if any(not 0 <= k < chart.dim for k in idx):
            raise ManifestError(f"[{section}] key {key!r} outside dimension {chart.dim}")
        comps[idx] = _parse_expr(value, chart.coords, f"[{section}] {key}")
    try:
        return KForm(chart, degree, comps)
    except VortError as err:
        raise ManifestError(f"[{section}]: {err}") from err


def _parse_surface(body, section) -> ParamSurface:
    params = tuple(p.strip() for p in _get(body, "params", section).split(","))
    if len(params) != 2:
        raise ManifestError(f"[{section}] params must list two parameter names")
    pieces = [p.strip() for p in _get(body, "domain", section).split(";")]
    if len(pieces) != 2:
        raise ManifestError(f"[{section}] domain needs two 'lo,hi' entries separated by ';'")
    domain = []
    for piece in pieces:
        lo, _, hi = piece.partition(",")
        try:
            domain.append((float(lo), float(hi)))
        except ValueError:
            raise ManifestError(f"[{section}] bad domain interval {piece!r}") from None
    embedding = tuple(_parse_expr(_get(body, axis, section), params, f"[{section}] {axis}")
                      for axis in ("x", "y", "z"))
    orientation = int(body.get("orientation", "1"))
    try:
        return ParamSurface(params, tuple(domain), embedding, orientation)
    except VortError as err:
        raise ManifestError(f"[{section}]: {err}") from err


def _parse_curve(body, section) -> ParamCurve:
    param = _get(body, "param", section).strip()
    lo, _, hi = _get(body, "domain", section).partition(",")
    try:
        domain = (float(lo), float(hi))
    except ValueError:
        raise ManifestError(f"[{section}] bad domain {body['domain']!r}") from None
    embedding = tuple(_parse_expr(_get(body, axis, section), (param,), f"[{section}] {axis}")
                      for axis in ("x", "y", "z"))
    try:
        return ParamCurve(param, domain, embedding)
    except VortError as err:
        raise ManifestError(f"[{section}]: {err}") from err
