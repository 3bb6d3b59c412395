"""Key-value spec files describing a log-concave function, body or experiment.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines
are ignored.  Repeated keys (``piece``, ``vertex``) accumulate.  Every
error names the file, the line number and the offending key.

Function kinds and their keys
-----------------------------
``kind = gaussian``
    ``dim``, ``center`` (n floats, default 0), ``offset`` (c, default 0),
    ``precision`` (1 float or n floats for a diagonal, default 1).
``kind = indicator_ball``
    ``dim``, ``radius``, ``center`` (default 0), ``offset`` (default 0).
``kind = indicator_box``
    ``lower`` and ``upper`` (n floats each), ``offset`` (default 0).
``kind = norm_cone``
    ``dim``, ``alpha`` (default 1), ``offset`` (default 0).
``kind = radial_piecewise``
    ``dim``, then either ``preset = counterexample`` or ``knots`` (m + 1
    floats, last may be ``inf``) with m lines ``piece = a b c`` giving
    ``a r^2/2 + b r + c`` on each interval.
``kind = grid_file``
    ``path`` to an ``lcgrid v1`` file (relative to the spec file).

Body specs use ``body = ball|box|polytope|segment`` with ``radius``,
``center`` and ``dim`` (ball), ``lower`` and ``upper`` (box), repeated
``vertex`` lines (polytope) or ``start`` and ``end`` (segment).

Experiment specs carry ``eps``, ``M``, ``lambda``, ``n``, ``trials``,
``samples``, ``seed``, ``c_probe``, ``mode`` (``finite_volume_ratio`` or
``low_mstar``) and ``function``, a path to a function spec.

Optional for any kind: ``grid_lower``, ``grid_upper``, ``grid_points``
(per-axis sampling box used when a grid is required, e.g. by the
``legendre`` command).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..bodies import Ball, Box, Polytope, Segment
from .analytic import IndicatorBody, Quadratic
from .grid import GridSpec, read_grid
from .radial import (
    PiecewiseQuadraticProfile,
    RadialPotential,
    counterexample_profile,
    norm_cone_profile,
)

__all__ = [
    "SpecError",
    "KeyValueSpec",
    "parse_keyvalue",
    "read_keyvalue",
    "build_potential",
    "build_body",
    "resolve_path",
    "sampling_grid",
    "KINDS",
    "BODY_KEYS",
    "EXPERIMENT_KEYS",
]

KINDS = ("gaussian", "indicator_ball", "indicator_box", "norm_cone", "radial_piecewise", "grid_file")
_REPEATABLE = {"piece", "vertex"}


class SpecError(ValueError):
    """A malformed spec file.  ``key`` and ``line`` locate the problem."""

    def __init__(self, message, source="<spec>", line=None, key=None):
        loc = source if line is None else f"{source}:{line}"
        named = key and f"'{key}'" in message
        super().__init__(f"{loc}: {message}" + (f" (key '{key}')" if key and not named else ""))
        self.source = source
        self.line = line
        self.key = key


@dataclass
class KeyValueSpec:
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    source: str = "<spec>"

    def has(self, key):
        return key in self.values

    def raw(self, key, default=None):
        return self.values.get(key, default)

    def error(self, key, message):
        return SpecError(message, self.source, self.lines.get(key), key)

    def require(self, key):
        if key not in self.values:
            raise SpecError(f"missing required key '{key}'", self.source, key=key)
        return self.values[key]

    def floats(self, key, default=None, count=None):
        if key not in self.values:
            if default is None:
                raise SpecError(f"missing required key '{key}'", self.source, key=key)
            return np.atleast_1d(np.asarray(default, dtype=float))
        try:
            out = np.array([float(t) for t in self.values[key].split()])
        except ValueError:
            raise self.error(key, f"expected numbers, got '{self.values[key]}'") from None
        if out.size == 0:
            raise self.error(key, "empty value")
        if count is not None and out.size not in (1, count):
            raise self.error(key, f"expected 1 or {count} numbers, got {out.size}")
        if np.isnan(out).any():
            raise self.error(key, "nan is not allowed")
        return out

    def number(self, key, default=None):
        out = self.floats(key, default)
        if out.size != 1:
            raise self.error(key, "expected a single number")
        return float(out[0])

    def integer(self, key, default=None):
        if key not in self.values:
            if default is None:
                raise SpecError(f"missing required key '{key}'", self.source, key=key)
            return int(default)
        try:
            return int(self.values[key])
        except ValueError:
            raise self.error(key, f"expected an integer, got '{self.values[key]}'") from None


def parse_keyvalue(text: str, source: str = "<spec>", allowed=None) -> KeyValueSpec:
    spec = KeyValueSpec(source=source)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key or not key.replace("_", "").isalnum():
            raise SpecError(f"expected 'key = value', got '{raw.strip()}'", source, lineno, key or None)
        if allowed is not None and key not in allowed:
            raise SpecError(f"unknown key '{key}'", source, lineno, key)
        value = value.strip()
        if key in _REPEATABLE:
            spec.values.setdefault(key, []).append(value)
            spec.lines.setdefault(key, lineno)
            continue
        if key in spec.values:
            raise SpecError(f"duplicate key '{key}'", source, lineno, key)
        spec.values[key] = value
        spec.lines[key] = lineno
    return spec


def read_keyvalue(path, allowed=None) -> KeyValueSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_keyvalue(fh.read(), str(path), allowed)


_COMMON = {"kind", "name", "grid_lower", "grid_upper", "grid_points"}
_KEYS = {
    "gaussian": {"dim", "center", "offset", "precision"},
    "indicator_ball": {"dim", "radius", "center", "offset"},
    "indicator_box": {"lower", "upper", "offset"},
    "norm_cone": {"dim", "alpha", "offset"},
    "radial_piecewise": {"dim", "preset", "knots", "piece"},
    "grid_file": {"path"},
}


def _dim(spec):
    n = spec.integer("dim")
    if n < 1:
        raise spec.error("dim", "dim must be a positive integer")
    return n


def build_potential(spec: KeyValueSpec):
    """Construct the potential described by a function spec."""
    kind = spec.require("kind")
    if kind not in KINDS:
        raise spec.error("kind", f"unknown kind '{kind}', expected one of {', '.join(KINDS)}")
    allowed = _COMMON | _KEYS[kind]
    for key in spec.values:
        if key not in allowed:
            raise spec.error(key, f"key '{key}' is not valid for kind '{kind}'")
    name = spec.raw("name", kind)
    if kind == "gaussian":
        n = _dim(spec)
        center = spec.floats("center", 0.0, count=n)
        prec = spec.floats("precision", 1.0, count=n)
        if np.any(prec <= 0):
            raise spec.error("precision", "precision must be positive")
        return Quadratic(n, np.broadcast_to(center, (n,)), spec.number("offset", 0.0),
                         np.diag(np.broadcast_to(prec, (n,))), provenance=name)
    if kind == "indicator_ball":
        n = _dim(spec)
        r = spec.number("radius")
        if r <= 0:
            raise spec.error("radius", "radius must be positive")
        center = np.broadcast_to(spec.floats("center", 0.0, count=n), (n,))
        return IndicatorBody(Ball(r, center), spec.number("offset", 0.0), provenance=name)
    if kind == "indicator_box":
        lo = spec.floats("lower")
        hi = spec.floats("upper")
        if lo.shape != hi.shape:
            raise spec.error("upper", "lower and upper must have the same length")
        if np.any(hi <= lo):
            raise spec.error("upper", "upper must exceed lower on every axis")
        return IndicatorBody(Box(lo, hi), spec.number("offset", 0.0), provenance=name)
    if kind == "norm_cone":
        n = _dim(spec)
        alpha = spec.number("alpha", 1.0)
        if alpha < 0:
            raise spec.error("alpha", "alpha must be nonnegative")
        return RadialPotential(norm_cone_profile(alpha, spec.number("offset", 0.0)), n, provenance=name)
    if kind == "radial_piecewise":
        n = _dim(spec)
        if spec.has("preset"):
            if spec.raw("preset") != "counterexample":
                raise spec.error("preset", f"unknown preset '{spec.raw('preset')}'")
            return RadialPotential(counterexample_profile(n), n, provenance=name)
        knots = spec.floats("knots")
        pieces = spec.raw("piece") or []
        if len(pieces) != len(knots) - 1:
            raise spec.error("piece", f"need {len(knots) - 1} 'piece' lines for {len(knots)} knots")
        coef = []
        for p in pieces:
            try:
                vals = [float(t) for t in p.split()]
            except ValueError:
                raise spec.error("piece", f"bad piece '{p}'") from None
            if len(vals) != 3:
                raise spec.error("piece", f"piece needs 'a b c', got '{p}'")
            coef.append(vals)
        coef = np.array(coef)
        try:
            prof = PiecewiseQuadraticProfile(tuple(knots), tuple(coef[:, 0]), tuple(coef[:, 1]), tuple(coef[:, 2]))
            return RadialPotential(prof, n, provenance=name)
        except ValueError as exc:
            raise spec.error("piece", str(exc)) from None
    path = resolve_path(spec, spec.require("path"))
    try:
        phi = read_grid(path)
    except OSError as exc:
        raise spec.error("path", f"cannot read grid file: {exc}") from None
    phi.provenance = name
    return phi


def sampling_grid(spec: KeyValueSpec, dim: int, default_half_width=4.0, default_points=65) -> GridSpec:
    """The sampling box requested by ``grid_lower``/``grid_upper``/``grid_points``."""
    lo = np.broadcast_to(spec.floats("grid_lower", -default_half_width, count=dim), (dim,))
    hi = np.broadcast_to(spec.floats("grid_upper", default_half_width, count=dim), (dim,))
    pts = spec.integer("grid_points", default_points)
    if pts < 2:
        raise spec.error("grid_points", "need at least 2 points per axis")
    if np.any(hi <= lo):
        raise spec.error("grid_upper", "grid_upper must exceed grid_lower")
    return GridSpec.from_bounds(lo, hi, pts)


def resolve_path(spec: KeyValueSpec, path: str) -> str:
    """``path`` relative to the directory of the spec file."""
    if not os.path.isabs(path) and spec.source not in ("<spec>", "<string>"):
        path = os.path.join(os.path.dirname(os.path.abspath(spec.source)), path)
    return path


BODY_KEYS = {"body", "name", "radius", "center", "dim", "lower", "upper", "vertex", "start", "end"}
EXPERIMENT_KEYS = {"eps", "M", "lambda", "n", "trials", "samples", "seed", "c_probe", "mode", "function", "name"}


def build_body(spec: KeyValueSpec):
    """Construct the convex body described by a body spec."""
    kind = spec.require("body")
    allowed = {
        "ball": {"radius", "center", "dim"},
        "box": {"lower", "upper"},
        "polytope": {"vertex"},
        "segment": {"start", "end"},
    }
    if kind not in allowed:
        raise spec.error("body", f"unknown body '{kind}', expected one of {', '.join(allowed)}")
    for key in spec.values:
        if key not in allowed[kind] | {"body", "name"}:
            raise spec.error(key, f"key '{key}' is not valid for body '{kind}'")
    if kind == "ball":
        r = spec.number("radius")
        if r <= 0:
            raise spec.error("radius", "radius must be positive")
        if spec.has("center"):
            return Ball(r, spec.floats("center"))
        return Ball(r, dim=_dim(spec))
    if kind == "box":
        lo, hi = spec.floats("lower"), spec.floats("upper")
        if lo.shape != hi.shape or np.any(hi < lo):
            raise spec.error("upper", "upper must have the length of lower and dominate it")
        return Box(lo, hi)
    if kind == "segment":
        a, b = spec.floats("start"), spec.floats("end")
        if a.shape != b.shape:
            raise spec.error("end", "start and end must have the same length")
        return Segment(a, b)
    rows = spec.raw("vertex") or []
    try:
        verts = np.array([[float(t) for t in r.split()] for r in rows])
        return Polytope(verts)
    except ValueError as exc:
        raise spec.error("vertex", f"bad vertex list: {exc}") from None
