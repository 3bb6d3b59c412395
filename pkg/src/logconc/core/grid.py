"""Potentials sampled on a regular grid (dimension 1 to 3).

Outside the grid box the potential is ``+inf``, so every grid function is
compactly supported.  Between nodes the potential is the multilinear
interpolant of its finite neighbours; any infinite neighbour carrying
positive weight makes the value infinite.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .base import INF, Potential

__all__ = [
    "GridSpec",
    "GridPotential",
    "ScreenResult",
    "grid_convexity_screen",
    "sample_on_grid",
    "read_grid",
    "write_grid",
    "format_grid",
    "parse_grid",
]

_SNAP = 1e-9
MAX_GRID_DIM = 3


@dataclass(frozen=True)
class GridSpec:
    """A regular grid: ``origin + spacing * index`` for index < shape."""

    origin: tuple
    spacing: tuple
    shape: tuple

    def __post_init__(self):
        origin = tuple(float(v) for v in np.atleast_1d(self.origin))
        spacing = tuple(float(v) for v in np.atleast_1d(self.spacing))
        shape = tuple(int(v) for v in np.atleast_1d(self.shape))
        if not (len(origin) == len(spacing) == len(shape)):
            raise ValueError("origin, spacing and shape must have the same length")
        if any(not np.isfinite(h) or h <= 0 for h in spacing):
            raise ValueError(f"grid spacing must be positive and finite, got {spacing}")
        if any(m < 1 for m in shape):
            raise ValueError(f"grid shape entries must be >= 1, got {shape}")
        if any(not np.isfinite(o) for o in origin):
            raise ValueError("grid origin must be finite")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def from_bounds(cls, lower, upper, shape):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        shape = np.broadcast_to(np.atleast_1d(shape), lower.shape).astype(int)
        if np.any(upper <= lower) or np.any(shape < 2):
            raise ValueError("from_bounds needs upper > lower and at least 2 points per axis")
        spacing = (upper - lower) / (shape - 1)
        return cls(tuple(lower), tuple(spacing), tuple(shape))

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self):
        return [o + h * np.arange(m) for o, h, m in zip(self.origin, self.spacing, self.shape)]

    @property
    def upper(self):
        return tuple(o + h * (m - 1) for o, h, m in zip(self.origin, self.spacing, self.shape))

    def nodes(self):
        """All nodes as an ``(size, dim)`` array in row-major order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


class GridPotential(Potential):
    """A potential given by its values on the nodes of a :class:`GridSpec`."""

    def __init__(self, spec: GridSpec, values, provenance: str = "grid"):
        values = np.array(values, dtype=float)
        if values.shape != spec.shape:
            values = values.reshape(spec.shape)
        if spec.dim > MAX_GRID_DIM:
            raise ValueError(f"grid potentials are limited to dim <= {MAX_GRID_DIM}")
        if np.isnan(values).any() or np.isneginf(values).any():
            raise ValueError("grid values must lie in (-inf, +inf]")
        if not np.isfinite(values).any():
            raise ValueError("empty effective domain: potential is identically +inf")
        values.setflags(write=False)
        self.spec = spec
        self.values = values
        self.provenance = provenance

    @property
    def dim(self) -> int:
        return self.spec.dim

    def finite_mask(self):
        return np.isfinite(self.values)

    def finite_nodes(self):
        """Finite nodes and their values, as ``(points, values)``."""
        mask = self.finite_mask().ravel()
        return self.spec.nodes()[mask], self.values.ravel()[mask]

    def _eval(self, x):
        spec = self.spec
        origin = np.asarray(spec.origin)
        spacing = np.asarray(spec.spacing)
        shape = np.asarray(spec.shape)
        t = (x - origin) / spacing
        near = np.rint(t)
        t = np.where(np.abs(t - near) < _SNAP, near, t)
        outside = np.any((t < 0) | (t > shape - 1), axis=1)
        t = np.clip(t, 0, shape - 1)
        i0 = np.minimum(np.floor(t).astype(int), np.maximum(shape - 2, 0))
        frac = t - i0
        out = np.zeros(len(x))
        hit_inf = np.zeros(len(x), dtype=bool)
        for corner in itertools.product((0, 1), repeat=spec.dim):
            corner = np.asarray(corner)
            idx = np.minimum(i0 + corner, shape - 1)
            w = np.prod(np.where(corner == 1, frac, 1.0 - frac), axis=1)
            v = self.values[tuple(idx.T)]
            active = w > 0
            hit_inf |= active & np.isinf(v)
            out += np.where(active & np.isfinite(v), w * np.where(np.isfinite(v), v, 0.0), 0.0)
        out[hit_inf | outside] = INF
        return out

    def with_values(self, values, provenance=None) -> "GridPotential":
        return GridPotential(self.spec, values, provenance or self.provenance)

    def add_constant(self, c: float) -> "GridPotential":
        return self.with_values(self.values + c, f"{self.provenance} + {c:g}")

    def scaled(self, lam: float) -> "GridPotential":
        lam = float(lam)
        if lam <= 0:
            raise ValueError("homothety factor must be positive")
        spec = GridSpec(
            tuple(lam * o for o in self.spec.origin),
            tuple(lam * h for h in self.spec.spacing),
            self.spec.shape,
        )
        return GridPotential(spec, lam * self.values, f"{lam:g}*({self.provenance})")

    def translated(self, a) -> "GridPotential":
        a = np.broadcast_to(np.asarray(a, dtype=float), (self.dim,))
        spec = GridSpec(tuple(np.asarray(self.spec.origin) + a), self.spec.spacing, self.spec.shape)
        return GridPotential(spec, self.values, f"({self.provenance}) shifted")

    def log_integral(self, order: int = 6) -> float:
        """log of the integral of ``exp(-phi)`` for the interpolated potential.

        In 1-D each cell is integrated exactly (exponential of a linear
        function); in higher dimension each fully finite cell uses a
        tensor Gauss-Legendre rule of the given order.
        """
        if self.dim == 1:
            return _log_integral_1d(self.values, self.spec.spacing[0])
        return _log_integral_nd(self.values, self.spec.spacing, order)


def _log_expm1_ratio(d):
    """log((1 - exp(-d)) / d), stable for any real d (0 -> 0)."""
    d = np.asarray(d, dtype=float)
    out = np.zeros_like(d)
    pos = d > 1e-12
    neg = d < -1e-12
    out[pos] = np.log(-np.expm1(-d[pos])) - np.log(d[pos])
    out[neg] = -d[neg] + np.log(-np.expm1(d[neg])) - np.log(-d[neg])
    small = ~(pos | neg)
    out[small] = -d[small] / 2
    return out


def _log_integral_1d(values, h):
    v0, v1 = values[:-1], values[1:]
    ok = np.isfinite(v0) & np.isfinite(v1)
    if not ok.any():
        return -INF
    terms = np.log(h) - v0[ok] + _log_expm1_ratio(v1[ok] - v0[ok])
    return float(logsumexp(terms))


def _log_integral_nd(values, spacing, order):
    dim = values.ndim
    x, w = np.polynomial.legendre.leggauss(order)
    x = (x + 1) / 2
    w = w / 2
    corners = list(itertools.product((0, 1), repeat=dim))
    cell_shape = tuple(m - 1 for m in values.shape)
    if min(cell_shape) < 1:
        return -INF
    corner_vals = np.stack(
        [values[tuple(slice(c, c + m) for c, m in zip(corner, cell_shape))].ravel() for corner in corners],
        axis=1,
    )
    ok = np.all(np.isfinite(corner_vals), axis=1)
    if not ok.any():
        return -INF
    corner_vals = corner_vals[ok]
    shift = corner_vals.min()
    pts = np.stack(np.meshgrid(*([x] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    wts = np.prod(np.stack(np.meshgrid(*([w] * dim), indexing="ij"), axis=-1).reshape(-1, dim), axis=1)
    basis = np.stack(
        [np.prod(np.where(np.asarray(c) == 1, pts, 1 - pts), axis=1) for c in corners], axis=1
    )
    interp = (corner_vals - shift) @ basis.T
    cell_integrals = np.exp(-interp) @ wts
    log_cell = np.log(np.prod(spacing))
    return float(np.log(cell_integrals.sum()) + log_cell - shift)


@dataclass
class ScreenResult:
    """Outcome of a discrete convexity screen."""

    passed: bool
    witness: tuple | None = None
    worst: float = 0.0
    detail: str = ""

    def __bool__(self):
        return self.passed


def _directions(dim):
    dirs = [tuple(int(i == k) for i in range(dim)) for k in range(dim)]
    for i, j in itertools.combinations(range(dim), 2):
        for sign in (1, -1):
            d = [0] * dim
            d[i], d[j] = 1, sign
            dirs.append(tuple(d))
    return dirs


def grid_convexity_screen(phi: GridPotential, tol: float | None = None) -> ScreenResult:
    """Second-difference screen along axes and face diagonals.

    A triple of nodes with finite ends and an infinite middle fails too
    (the effective domain would not be convex).  The tolerance defaults to
    ``1e-9 * max(1, max |finite value|)``.
    """
    v = phi.values
    finite = np.isfinite(v)
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.abs(v[finite]).max()))
    worst = 0.0
    for d in _directions(phi.dim):
        d = np.asarray(d)
        lo = [slice(max(0, -2 * k), m - max(0, 2 * k)) for k, m in zip(d, v.shape)]
        if any(s.stop - s.start <= 0 for s in lo):
            continue
        starts = np.array([s.start for s in lo])
        stops = np.array([s.stop for s in lo])
        a = v[tuple(slice(s, e) for s, e in zip(starts, stops))]
        b = v[tuple(slice(s + k, e + k) for s, e, k in zip(starts, stops, d))]
        c = v[tuple(slice(s + 2 * k, e + 2 * k) for s, e, k in zip(starts, stops, d))]
        ends = np.isfinite(a) & np.isfinite(c)
        hole = ends & ~np.isfinite(b)
        if hole.any():
            i = np.argwhere(hole)[0] + starts
            trip = tuple(tuple(int(t) for t in i + s * d) for s in range(3))
            return ScreenResult(False, trip, INF, "infinite node between finite nodes")
        both = ends & np.isfinite(b)
        if not both.any():
            continue
        second = np.where(both, a - 2 * np.where(np.isfinite(b), b, 0) + c, 0.0)
        k = np.unravel_index(np.argmin(second), second.shape)
        if second[k] < worst:
            worst = float(second[k])
        if second[k] < -tol:
            i = np.asarray(k) + starts
            trip = tuple(tuple(int(t) for t in i + s * d) for s in range(3))
            return ScreenResult(False, trip, float(second[k]), f"negative second difference along {tuple(int(k) for k in d)}")
    return ScreenResult(True, None, worst)


def sample_on_grid(phi: Potential, spec: GridSpec, provenance: str | None = None) -> GridPotential:
    """Evaluate ``phi`` at every node of ``spec``."""
    vals = np.asarray(phi(spec.nodes()), dtype=float).reshape(spec.shape)
    return GridPotential(spec, vals, provenance or f"sampled({getattr(phi, 'provenance', '') or type(phi).__name__})")


def _fmt(v):
    return "inf" if np.isinf(v) else repr(float(v))


def format_grid(phi: GridPotential, comment: str = "") -> str:
    s = phi.spec
    lines = [f"lcgrid v1 dim={s.dim}"]
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append("origin=" + " ".join(repr(float(o)) for o in s.origin))
    lines.append("spacing=" + " ".join(repr(float(h)) for h in s.spacing))
    lines.append("shape=" + " ".join(str(m) for m in s.shape))
    flat = phi.values.ravel()
    row = s.shape[-1]
    for i in range(0, len(flat), row):
        lines.append(" ".join(_fmt(v) for v in flat[i:i + row]))
    return "\n".join(lines) + "\n"


def parse_grid(text: str, source: str = "<grid>") -> GridPotential:
    """Parse the ``lcgrid v1`` text format.  Errors name the line number."""
    lines = text.splitlines()
    body = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(lines)]
    body = [(i, ln) for i, ln in body if ln]
    if not body:
        raise ValueError(f"{source}: empty grid file")
    lineno, header = body[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "lcgrid" or parts[1] != "v1" or not parts[2].startswith("dim="):
        raise ValueError(f"{source}:{lineno}: expected header 'lcgrid v1 dim=<n>'")
    try:
        dim = int(parts[2][4:])
    except ValueError:
        raise ValueError(f"{source}:{lineno}: bad dim in header") from None
    fields = {}
    k = 1
    for key in ("origin", "spacing", "shape"):
        if k >= len(body):
            raise ValueError(f"{source}: missing '{key}=' line")
        lineno, ln = body[k]
        name, sep, val = ln.partition("=")
        if not sep or name.strip() != key:
            raise ValueError(f"{source}:{lineno}: expected '{key}=' line")
        try:
            conv = int if key == "shape" else float
            fields[key] = [conv(t) for t in val.split()]
        except ValueError:
            raise ValueError(f"{source}:{lineno}: bad value for key '{key}'") from None
        if len(fields[key]) != dim:
            raise ValueError(f"{source}:{lineno}: key '{key}' needs {dim} entries")
        k += 1
    values = []
    for lineno, ln in body[k:]:
        for tok in ln.split():
            try:
                v = float(tok)
            except ValueError:
                raise ValueError(f"{source}:{lineno}: bad value token '{tok}'") from None
            if np.isnan(v) or v == -INF:
                raise ValueError(f"{source}:{lineno}: value '{tok}' outside (-inf, inf]")
            values.append(v)
    spec = GridSpec(fields["origin"], fields["spacing"], fields["shape"])
    if len(values) != spec.size:
        raise ValueError(f"{source}: expected {spec.size} values, found {len(values)}")
    return GridPotential(spec, np.array(values).reshape(spec.shape), provenance=f"file:{source}")


def read_grid(path) -> GridPotential:
    with open(path, encoding="utf-8") as fh:
        return parse_grid(fh.read(), str(path))


def write_grid(phi: GridPotential, path, comment: str = ""):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_grid(phi, comment))
