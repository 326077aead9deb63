"""Regular grids, sampled nonnegative functions, convex domains and the
Gauss kernel.

A :class:`SampledFunction` is implicitly zero outside its grid.  Nothing in
this package interpolates: every concavity check works with grid-aligned
points only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Grid",
    "SampledFunction",
    "Box",
    "Ball",
    "HalfSpace",
    "ConvexDomain",
    "NegativeValueError",
    "NonAlignedQueryError",
    "sample",
    "gauss_kernel",
    "indicator",
    "eval_zero_extended",
    "scale_domain",
    "to_csv",
    "read_csv",
]

_ALIGN_TOL = 1e-9


class NegativeValueError(ValueError):
    """A sampled function took a negative value."""


class NonAlignedQueryError(ValueError):
    """Point query strictly between grid points."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_j = origin + j * h`` in one or two dimensions."""

    origin: tuple[float, ...]
    h: float
    extents: tuple[int, ...]

    def __post_init__(self):
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        extents = tuple(int(n) for n in np.atleast_1d(self.extents))
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "h", float(self.h))
        if len(origin) not in (1, 2) or len(extents) != len(origin):
            raise ValueError("grid dimension must be 1 or 2 with matching origin/extents")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        if min(extents) < 3:
            raise ValueError("need at least 3 points per axis")

    @classmethod
    def centered(cls, half_width: float, h: float, dim: int = 1,
                 cell_centered: bool = False) -> "Grid":
        """Grid on ``[-half_width, half_width]^dim``.

        The half width is snapped to a multiple of ``h / 2``.
        Vertex-centred grids contain the endpoints (and 0 when
        ``2 * half_width / h`` is even); cell-centred grids hold the
        midpoints of the ``2 * half_width / h`` cells.
        """
        cells = int(round(2 * half_width / h))
        half = cells * h / 2  # snapped so the grid is symmetric about 0
        if cell_centered:
            return cls((-half + h / 2,) * dim, h, (cells,) * dim)
        return cls((-half,) * dim, h, (cells + 1,) * dim)

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float], h: float) -> "Grid":
        """Vertex-centred grid covering the box ``[lo, hi]`` with spacing ``h``.

        The upper bound is hit exactly only when ``(hi - lo) / h`` is an integer.
        """
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        n = np.floor((hi - lo) / h + 1e-9).astype(int) + 1
        return cls(tuple(lo), h, tuple(n))

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.extents

    @property
    def size(self) -> int:
        return int(np.prod(self.extents))

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axes(self) -> list[np.ndarray]:
        return [o + self.h * np.arange(n) for o, n in zip(self.origin, self.extents)]

    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``self.shape`` (``ij`` indexing)."""
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def points(self) -> np.ndarray:
        """All grid points as an ``(size, dim)`` array in lexicographic order."""
        return np.stack([c.ravel() for c in self.coords()], axis=-1)

    def point(self, index) -> tuple[float, ...]:
        index = np.atleast_1d(index)
        return tuple(float(o + self.h * i) for o, i in zip(self.origin, index))

    def fractional_index(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape[-1] != self.dim:
            raise ValueError(f"point {x} does not have dimension {self.dim}")
        return (x - np.asarray(self.origin)) / self.h

    def nearest_index(self, x) -> tuple[int, ...]:
        """Index of the grid point nearest to ``x``, clipped to the grid."""
        f = np.rint(self.fractional_index(x)).astype(int)
        f = np.clip(f, 0, np.asarray(self.extents) - 1)
        return tuple(int(i) for i in f)

    def scaled(self, factor: float) -> "Grid":
        """The image grid under ``x -> factor * x``."""
        return Grid(tuple(factor * o for o in self.origin), factor * self.h, self.extents)

    def translated(self, shift) -> "Grid":
        shift = np.atleast_1d(np.asarray(shift, dtype=float))
        return Grid(tuple(np.asarray(self.origin) + shift), self.h, self.extents)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Nonnegative values on a :class:`Grid`, zero outside it.

    The value array is copied and made read-only; ``sup_bound`` is the
    cached maximum.
    """

    grid: Grid
    values: np.ndarray
    sup_bound: float = field(init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.size != self.grid.size:
            raise ValueError(f"got {vals.size} values for a grid of {self.grid.size} points")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("sampled values must be finite")
        if np.any(vals < 0):
            idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
            raise NegativeValueError(
                f"negative value {vals[idx]!r} at grid point {self.grid.point(idx)}"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "sup_bound", float(vals.max()))

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def support_mask(self) -> np.ndarray:
        return self.values > 0

    def mass(self) -> float:
        """Riemann sum ``h^N * sum(values)``."""
        return float(self.values.sum() * self.grid.cell_volume)

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def support_radius(self, center=None) -> float:
        """Largest distance from ``center`` (default origin) to a support point."""
        pts = self.grid.points()[self.values.ravel() > 0]
        if pts.size == 0:
            return 0.0
        c = np.zeros(self.dim) if center is None else np.atleast_1d(center)
        return float(np.sqrt(((pts - c) ** 2).sum(axis=1)).max())


# --- convex domains -------------------------------------------------------

def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise ValueError(f"points must have trailing dimension {dim}")
    return x


@dataclass(frozen=True)
class Box:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def slack(self, x: np.ndarray) -> np.ndarray:
        """Signed distance-like margin; >= 0 inside the closed box."""
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.minimum(x - lo, hi - x).min(axis=-1)

    def scaled(self, n: float) -> "Box":
        return Box(tuple(n * v for v in self.lo), tuple(n * v for v in self.hi))

    def bounds(self):
        return np.asarray(self.lo), np.asarray(self.hi)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    def slack(self, x: np.ndarray) -> np.ndarray:
        d = np.sqrt(((x - np.asarray(self.center)) ** 2).sum(axis=-1))
        return self.radius - d

    def scaled(self, n: float) -> "Ball":
        return Ball(tuple(n * v for v in self.center), n * self.radius)

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class HalfSpace:
    """The closed half-space ``normal . x <= offset``."""

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.normal, dtype=float))
        norm = float(np.linalg.norm(a))
        if norm == 0:
            raise ValueError("half-space normal must be nonzero")
        object.__setattr__(self, "normal", tuple(float(v) for v in a))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return len(self.normal)

    def slack(self, x: np.ndarray) -> np.ndarray:
        a = np.asarray(self.normal)
        return (self.offset - x @ a) / np.linalg.norm(a)

    def scaled(self, n: float) -> "HalfSpace":
        return HalfSpace(self.normal, n * self.offset)

    def bounds(self):
        return None


@dataclass(frozen=True)
class ConvexDomain:
    """Intersection of boxes, balls and half-spaces.

    ``contains`` uses the closed set by default: a point on the boundary
    counts as inside.  ``strict=True`` gives the open interior.
    """

    primitives: tuple

    def __post_init__(self):
        prims = tuple(self.primitives)
        if not prims:
            raise ValueError("a domain needs at least one primitive")
        dims = {p.dim for p in prims}
        if len(dims) != 1 or dims.pop() not in (1, 2):
            raise ValueError("primitives must share dimension 1 or 2")
        object.__setattr__(self, "primitives", prims)

    @classmethod
    def interval(cls, a: float, b: float) -> "ConvexDomain":
        return cls((Box((a,), (b,)),))

    @classmethod
    def box(cls, lo, hi) -> "ConvexDomain":
        return cls((Box(lo, hi),))

    @classmethod
    def ball(cls, center, radius: float) -> "ConvexDomain":
        return cls((Ball(center, radius),))

    @classmethod
    def polytope(cls, normals, offsets) -> "ConvexDomain":
        return cls(tuple(HalfSpace(a, b) for a, b in zip(normals, offsets)))

    @property
    def dim(self) -> int:
        return self.primitives[0].dim

    def _scale(self) -> float:
        lo, hi = self.bounding_box()
        return float(max(1.0, np.abs(lo).max(), np.abs(hi).max()))

    def slack(self, x) -> np.ndarray:
        x = _as_points(x, self.dim)
        return np.min([p.slack(x) for p in self.primitives], axis=0)

    def contains(self, x, strict: bool = False) -> np.ndarray:
        tol = 1e-12 * self._scale()
        s = self.slack(x)
        return s > tol if strict else s >= -tol

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        halfspaces = []
        for p in self.primitives:
            b = p.bounds()
            if b is None:
                halfspaces.append(p)
            else:
                lo = np.maximum(lo, b[0])
                hi = np.minimum(hi, b[1])
        if halfspaces:
            from scipy.optimize import linprog

            A = np.array([hs.normal for hs in halfspaces])
            ub = np.array([hs.offset for hs in halfspaces])
            box = [(None if not np.isfinite(l) else l, None if not np.isfinite(u) else u)
                   for l, u in zip(lo, hi)]
            for k in range(self.dim):
                c = np.zeros(self.dim)
                for sign in (1.0, -1.0):
                    c[k] = sign
                    res = linprog(c, A_ub=A, b_ub=ub, bounds=box, method="highs")
                    if res.status == 3:
                        continue
                    if not res.success:
                        raise ValueError("domain is empty")
                    if sign > 0:
                        lo[k] = max(lo[k], res.x[k])
                    else:
                        hi[k] = min(hi[k], res.x[k])
        return lo, hi

    @property
    def bounded(self) -> bool:
        lo, hi = self.bounding_box()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))


def scale_domain(domain: ConvexDomain, n: float) -> ConvexDomain:
    """The dilate ``n * domain``; requires ``0`` in the domain."""
    if not n > 0:
        raise ValueError(f"scale factor must be positive, got {n}")
    if not bool(domain.contains(np.zeros(domain.dim))):
        raise ValueError("scale_domain expects 0 in the domain")
    return ConvexDomain(tuple(p.scaled(n) for p in domain.primitives))


# --- sampling ---------------------------------------------------------------

def sample(f: Callable | float, grid: Grid, domain: ConvexDomain | None = None) -> SampledFunction:
    """Sample ``f`` on ``grid``; values outside ``domain`` are set to zero.

    ``f`` is called with the coordinate arrays, ``f(x)`` in 1-d and
    ``f(x, y)`` in 2-d, or may be a constant.
    """
    coords = grid.coords()
    vals = np.broadcast_to(f(*coords) if callable(f) else np.asarray(f, dtype=float),
                           grid.shape).astype(float)
    if domain is not None:
        if domain.dim != grid.dim:
            raise ValueError("domain and grid dimensions differ")
        inside = domain.contains(np.stack(coords, axis=-1))
        vals = np.where(inside, vals, 0.0)
    if np.any(vals < 0):
        idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
        raise NegativeValueError(f"f({grid.point(idx)}) = {vals[idx]!r} < 0")
    return SampledFunction(grid, vals)


def gauss_kernel(x, t: float, N: int = 1):
    """``(4 pi t)^(-N/2) exp(-|x|^2 / 4t)``.

    For ``N == 1`` every entry of ``x`` is a point; otherwise ``x`` has
    trailing dimension ``N``.
    """
    if not t > 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    x = np.asarray(x, dtype=float)
    if N == 1:
        r2 = x**2
    else:
        if x.shape[-1] != N:
            raise ValueError(f"points must have trailing dimension {N}")
        r2 = (x**2).sum(axis=-1)
    out = (4 * math.pi * t) ** (-N / 2) * np.exp(-r2 / (4 * t))
    return out[()] if np.ndim(out) == 0 else out


def indicator(K: ConvexDomain, grid: Grid) -> SampledFunction:
    """``chi_K`` on ``grid`` with boundary points counted as inside."""
    u = sample(1.0, grid, K)
    if not np.any(u.values > 0):
        raise ValueError("indicator support is empty on this grid; |K| > 0 is required")
    return u


def eval_zero_extended(u: SampledFunction, x) -> float:
    """Value of the zero extension of ``u`` at a grid-aligned point."""
    f = u.grid.fractional_index(x)
    n = np.asarray(u.grid.extents)
    if np.any(f < -_ALIGN_TOL) or np.any(f > n - 1 + _ALIGN_TOL):
        return 0.0
    idx = np.rint(f)
    if np.any(np.abs(f - idx) > _ALIGN_TOL):
        raise NonAlignedQueryError(f"point {tuple(np.atleast_1d(x))} is not a grid point")
    return float(u.values[tuple(idx.astype(int))])


# --- serialization ----------------------------------------------------------

def to_csv(u: SampledFunction, path) -> None:
    """Write ``u`` as ``# dim,h,origin,extents`` header plus ``x[,y],value`` rows."""
    g = u.grid
    lines = [
        "# dim,h,origin,extents",
        "# {},{},{},{}".format(
            g.dim, repr(g.h), ";".join(repr(o) for o in g.origin),
            ";".join(str(n) for n in g.extents)),
    ]
    pts = g.points()
    for p, v in zip(pts, u.values.ravel()):
        lines.append(",".join(repr(float(c)) for c in p) + "," + repr(float(v)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> SampledFunction:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("# dim,h,origin,extents"):
        raise ValueError(f"{path} is not a sampled-function CSV")
    dim, h, origin, extents = text[1].lstrip("# ").split(",")
    grid = Grid(tuple(float(o) for o in origin.split(";")), float(h),
                tuple(int(n) for n in extents.split(";")))
    if grid.dim != int(dim):
        raise ValueError("header dimension mismatch")
    rows = [line.split(",") for line in text[2:] if line.strip()]
    vals = np.array([float(r[-1]) for r in rows])
    return SampledFunction(grid, vals)
