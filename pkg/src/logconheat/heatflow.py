"""Heat flow solvers and the elliptic/diagnostic helpers built on them.

Free space: direct quadrature of the convolution with the Gauss kernel.
Bounded convex domains: Crank-Nicolson on the masked 3-point (1-d) or
5-point (2-d) Laplacian with zero Dirichlet data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import ConvexDomain, Grid, NegativeValueError, SampledFunction, indicator, scale_domain

__all__ = [
    "HeatFlowConfig",
    "EigenPair",
    "MomentDiagnostics",
    "ConvergenceError",
    "truncation_radius",
    "free_evolve",
    "dirichlet_evolve",
    "recentre",
    "rescaled_profile",
    "scaling_identity_residual",
    "torsion_solve",
    "eigen_solve",
    "moment_diagnostic",
    "masked_laplacian",
]


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class HeatFlowConfig:
    """Solver settings.

    ``dt=None`` means ``dt = h``.  ``startup_steps`` Crank-Nicolson steps
    at the start are each replaced by two backward-Euler half steps, which
    damps the stiff modes excited by discontinuous data.
    """

    scheme: str = "free"
    dt: float | None = None
    eps_trunc: float = 1e-12
    theta: float = 0.5
    startup_steps: int = 4
    chunk: int = 4096

    def __post_init__(self):
        if self.scheme not in ("free", "dirichlet"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.eps_trunc < 1:
            raise ValueError("eps_trunc must lie in (0, 1)")
        if not 0.5 <= self.theta <= 1:
            raise ValueError("theta must lie in [1/2, 1]")


def truncation_radius(t: float, support_radius: float = 0.0, eps_trunc: float = 1e-12) -> float:
    """``support_radius + sqrt(4 t log(1/eps))``: beyond it the solution is below eps."""
    return support_radius + math.sqrt(4 * t * math.log(1 / eps_trunc))


# --- free space ---------------------------------------------------------------

def _kernel_matrix(x_out: np.ndarray, y_src: np.ndarray, t: float, radius: float) -> np.ndarray:
    d = x_out[:, None] - y_src[None, :]
    K = (4 * math.pi * t) ** -0.5 * np.exp(-(d * d) / (4 * t))
    K[np.abs(d) > radius] = 0.0
    return K


def _convolve(u0: SampledFunction, t: float, cfg: HeatFlowConfig, grid: Grid,
              weights: np.ndarray | None = None) -> np.ndarray:
    """Quadrature of ``int G(x - y, t) w(y) dy`` at the points of ``grid``.

    ``w`` defaults to ``u0.values``.  The 2-d kernel factorises, so the 2-d
    sum is two 1-d kernel products; each kernel factor is truncated at
    ``sqrt(4 t log(1/eps))``.
    """
    if grid.dim != u0.dim:
        raise ValueError("output grid dimension differs from the data")
    w = u0.values if weights is None else weights
    radius = truncation_radius(t, 0.0, cfg.eps_trunc)
    h = u0.grid.h
    src_axes = u0.grid.axes()
    out_axes = grid.axes()
    # restrict the source to the bounding box of the support
    nz = np.nonzero(u0.values > 0)
    sl = tuple(slice(int(ix.min()), int(ix.max()) + 1) for ix in nz)
    w = w[sl]
    src_axes = [a[s] for a, s in zip(src_axes, sl)]
    if u0.dim == 1:
        out = np.empty(grid.extents[0])
        for start in range(0, out.size, cfg.chunk):
            stop = min(start + cfg.chunk, out.size)
            K = _kernel_matrix(out_axes[0][start:stop], src_axes[0], t, radius)
            out[start:stop] = K @ w * h
        return out
    Kx = _kernel_matrix(out_axes[0], src_axes[0], t, radius)
    Ky = _kernel_matrix(out_axes[1], src_axes[1], t, radius)
    return (Kx @ w @ Ky.T) * h * h


def free_evolve(u0: SampledFunction, t: float, cfg: HeatFlowConfig | None = None,
                grid: Grid | None = None) -> SampledFunction:
    """``e^{t Delta} u0`` in free space, evaluated on ``grid`` (default ``u0.grid``).

    The data are treated as zero outside their grid; the convolution is a
    Riemann sum over the source grid (the trapezoid rule for data that
    vanish at the grid edge).
    """
    cfg = cfg or HeatFlowConfig()
    if not t > 0:
        raise ValueError(f"evolution time must be positive, got {t}")
    if not np.any(u0.values > 0):
        raise ValueError("initial data have empty support")
    grid = grid or u0.grid
    return SampledFunction(grid, _convolve(u0, t, cfg, grid))


def recentre(u0: SampledFunction) -> SampledFunction:
    """Translate the grid so that the first moments of ``u0`` vanish."""
    pts = u0.grid.points()
    w = u0.values.ravel()
    centroid = (pts * w[:, None]).sum(axis=0) / w.sum()
    return SampledFunction(u0.grid.translated(-centroid), u0.values)


# --- Dirichlet problems -----------------------------------------------------

def masked_laplacian(grid: Grid, interior: np.ndarray) -> sp.csr_matrix:
    """Standard Laplacian on the ``interior`` nodes, zero values elsewhere."""
    interior = np.asarray(interior, dtype=bool).reshape(grid.shape)
    idx = -np.ones(grid.shape, dtype=np.int64)
    m = int(interior.sum())
    idx[interior] = np.arange(m)
    h2 = grid.h**2
    rows = [np.arange(m)]
    cols = [np.arange(m)]
    vals = [np.full(m, -2.0 * grid.dim / h2)]
    for axis in range(grid.dim):
        for step in (-1, 1):
            nb = np.roll(idx, -step, axis=axis)
            edge = [slice(None)] * grid.dim
            edge[axis] = slice(-1, None) if step == 1 else slice(0, 1)
            nb[tuple(edge)] = -1
            ok = interior & (nb >= 0)
            rows.append(idx[ok])
            cols.append(nb[ok])
            vals.append(np.full(int(ok.sum()), 1.0 / h2))
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(m, m))
    return A.tocsr()


class _ShiftedSolver:
    """Factorisation of ``I - c A`` (``c > 0``) or ``-A`` (``c is None``)."""

    def __init__(self, A: sp.csr_matrix, c: float | None, banded: bool):
        m = A.shape[0]
        M = -A if c is None else sp.identity(m, format="csr") - c * A
        self.banded = banded
        if banded:
            M = M.tocsr()
            ab = np.zeros((2, m))
            ab[1] = M.diagonal()
            ab[0, 1:] = M.diagonal(1)
            self.factor = sla.cholesky_banded(ab)
        else:
            self.factor = spla.splu(M.tocsc())

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.banded:
            return sla.cho_solve_banded((self.factor, False), b)
        return self.factor.solve(b)


def _interior(domain: ConvexDomain, grid: Grid) -> np.ndarray:
    if domain.dim != grid.dim:
        raise ValueError("domain and grid dimensions differ")
    pts = np.stack(grid.coords(), axis=-1)
    inside = domain.contains(pts, strict=True)
    if not np.any(inside):
        raise ValueError("no grid point lies inside the domain")
    return inside


def dirichlet_evolve(u0: SampledFunction, domain: ConvexDomain, t: float,
                     cfg: HeatFlowConfig | None = None) -> SampledFunction:
    """``e^{t Delta_Omega} u0`` with zero Dirichlet data, on ``u0.grid``.

    Unknowns are the grid points strictly inside ``domain``; everything else
    is held at zero.  Requires ``dt <= h``.
    """
    cfg = cfg or HeatFlowConfig(scheme="dirichlet")
    if not t > 0:
        raise ValueError(f"evolution time must be positive, got {t}")
    if not domain.bounded:
        raise ValueError("dirichlet_evolve needs a bounded domain")
    grid = u0.grid
    closed = domain.contains(np.stack(grid.coords(), axis=-1))
    if np.any((u0.values > 0) & ~closed):
        raise ValueError("initial data are not supported in the domain")
    h = grid.h
    dt = h if cfg.dt is None else cfg.dt
    if dt > h * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds h={h}")
    interior = _interior(domain, grid)
    A = masked_laplacian(grid, interior)
    steps = max(1, math.ceil(t / dt - 1e-9))
    dt = t / steps
    startup = min(cfg.startup_steps, steps)
    u = u0.values[interior].astype(float)
    banded = grid.dim == 1
    if cfg.theta == 0.5:
        # CN with step dt and backward Euler with step dt/2 share I - dt/2 A
        solver = _ShiftedSolver(A, 0.5 * dt, banded)
        for _ in range(2 * startup):
            u = solver.solve(u)
        for _ in range(steps - startup):
            u = solver.solve(u + 0.5 * dt * (A @ u))
    else:
        th = cfg.theta
        solver = _ShiftedSolver(A, th * dt, banded)
        for _ in range(steps):
            u = solver.solve(u + (1 - th) * dt * (A @ u))
    out = np.zeros(grid.shape)
    out[interior] = u
    if np.any(out < 0):
        # Crank-Nicolson is not positivity preserving; say how to fix it
        raise NegativeValueError(
            f"Crank-Nicolson produced u = {out.min():.3e} < 0; reduce dt or use theta=1")
    return SampledFunction(grid, out)


def rescaled_profile(u: SampledFunction, t: float, K_measure: float, xi) -> tuple[float, tuple]:
    """``(4 pi t)^(N/2) |K|^-1 u(2 sqrt(t) xi, t)`` at the grid point nearest ``2 sqrt(t) xi``.

    Returns the value and the snapped grid point.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    target = 2 * math.sqrt(t) * xi
    idx = u.grid.nearest_index(target)
    snapped = u.grid.point(idx)
    val = (4 * math.pi * t) ** (u.dim / 2) / K_measure * float(u.values[idx])
    return val, snapped


def scaling_identity_residual(K: ConvexDomain, domain: ConvexDomain, n: int, t: float,
                              h: float = 1 / 256, cfg: HeatFlowConfig | None = None) -> float:
    """Sup mismatch of ``[e^{n^2 t Delta_{n Omega}} chi_K](n x)`` and
    ``[e^{t Delta_Omega} chi_{K/n}](x)`` over matched grid points.

    Both sides are solved by :func:`dirichlet_evolve` on their own grid with
    spacing ``h``; the left grid is the image of the right one under
    ``x -> n x`` refined by the factor ``n``.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    lo, hi = domain.bounding_box()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("domain must be bounded")
    Klo, Khi = K.bounding_box()
    probe = Grid.from_bounds(Klo, Khi, min(h, float(np.min(Khi - Klo)) / 8))
    if not np.all(domain.contains(np.stack(probe.coords(), axis=-1)[K.contains(
            np.stack(probe.coords(), axis=-1))])):
        raise ValueError("K is not contained in the domain")
    right_grid = Grid.from_bounds(lo, hi, h)
    left_grid = Grid.from_bounds(n * lo, n * hi, h)
    K_small = scale_domain(K, 1.0 / n) if bool(K.contains(np.zeros(K.dim))) else \
        ConvexDomain(tuple(p.scaled(1.0 / n) for p in K.primitives))
    right = dirichlet_evolve(indicator(K_small, right_grid), domain, t, cfg)
    left = dirichlet_evolve(indicator(K, left_grid), scale_domain(domain, n), n * n * t, cfg)
    sel = tuple(slice(None, None, n) for _ in range(domain.dim))
    lv = left.values[sel]
    rv = right.values
    common = tuple(slice(0, min(a, b)) for a, b in zip(lv.shape, rv.shape))
    return float(np.abs(lv[common] - rv[common]).max())


# --- elliptic problems --------------------------------------------------------

def torsion_solve(domain: ConvexDomain, grid: Grid) -> SampledFunction:
    """Discrete torsion function: ``-Delta_h eta = 1`` inside, ``eta = 0`` outside."""
    if not domain.bounded:
        raise ValueError("torsion_solve needs a bounded domain")
    interior = _interior(domain, grid)
    A = masked_laplacian(grid, interior)
    try:
        solver = _ShiftedSolver(A, None, grid.dim == 1)
        eta = solver.solve(np.ones(A.shape[0]))
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise np.linalg.LinAlgError(f"singular torsion system: {exc}") from exc
    out = np.zeros(grid.shape)
    out[interior] = eta
    return SampledFunction(grid, np.maximum(out, 0.0))


@dataclass(frozen=True, eq=False)
class EigenPair:
    lambda1: float
    phi: SampledFunction
    residual: float
    iterations: int


def eigen_solve(domain: ConvexDomain, grid: Grid, tol: float = 1e-12,
                max_iter: int = 500) -> EigenPair:
    """Principal Dirichlet eigenpair by inverse power iteration.

    ``phi`` is positive inside and normalised to ``h^N sum(phi^2) = 1``.
    Iteration stops once the Rayleigh quotient changes by at most
    ``tol`` relative (the residual itself stalls at roundoff ~ eps ||L||).
    """
    if not domain.bounded:
        raise ValueError("eigen_solve needs a bounded domain")
    interior = _interior(domain, grid)
    A = masked_laplacian(grid, interior)
    L = -A
    solver = _ShiftedSolver(A, None, grid.dim == 1)
    v = np.ones(A.shape[0])
    v /= np.linalg.norm(v)
    lam = float(v @ (L @ v))
    res = math.inf
    for it in range(1, max_iter + 1):
        w = solver.solve(v)
        v = w / np.linalg.norm(w)
        Lv = L @ v
        lam_prev, lam = lam, float(v @ Lv)
        res = float(np.linalg.norm(Lv - lam * v))
        if abs(lam - lam_prev) <= tol * lam or res <= tol * lam:
            break
    else:
        raise ConvergenceError(f"inverse iteration did not converge, residual {res:.3e}")
    if v.sum() < 0:
        v = -v
    v /= math.sqrt(grid.cell_volume)
    out = np.zeros(grid.shape)
    out[interior] = np.maximum(v, 0.0)
    return EigenPair(lam, SampledFunction(grid, out), res, it)


# --- large-time diagnostics ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class MomentDiagnostics:
    """Per-point moments and the rescaled second derivative along one axis.

    ``Q`` comes from second differences of ``v = (-log u)^gamma``;
    ``Q_identity`` from the moment identity, as an independent check.
    """

    x: np.ndarray
    t: float
    alpha: float
    axis: int
    X: np.ndarray
    Y: np.ndarray
    Q: np.ndarray
    Q_identity: np.ndarray
    inner: np.ndarray
    R: float
    eps: float
    delta: float
    points: np.ndarray = field(repr=False)

    @property
    def min_inner(self) -> float:
        return float(self.Q[self.inner].min()) if np.any(self.inner) else math.inf

    @property
    def min_outer(self) -> float:
        return float(self.Q[~self.inner].min()) if np.any(~self.inner) else math.inf

    @property
    def moment_bounds_hold(self) -> bool:
        tol = 1e-9 * max(1.0, self.R**2)
        return bool(np.all(np.abs(self.X) <= self.R + tol)
                    and np.all(self.Y >= -tol) and np.all(self.Y <= self.R**2 + tol))

    def to_csv(self) -> str:
        lines = ["x,t,alpha,X_i,Y_i,Q_i,region"]
        for p, X, Y, Q, inn in zip(self.points, self.X, self.Y, self.Q, self.inner):
            xs = ";".join(repr(float(c)) for c in np.atleast_1d(p))
            lines.append(f"{xs},{self.t!r},{self.alpha!r},{float(X)!r},{float(Y)!r},"
                         f"{float(Q)!r},{'inner' if inn else 'outer'}")
        return "\n".join(lines) + "\n"


def moment_diagnostic(u0: SampledFunction, t: float, alpha: float, axis: int = 0,
                     eps: float = 0.1, delta: float | None = None,
                     cfg: HeatFlowConfig | None = None, grid: Grid | None = None,
                     u_floor: float = 1e-250) -> MomentDiagnostics:
    """Moments ``X_i, Y_i`` and ``Q_i = (2t/gamma)(-log u)^(1-gamma) v_{x_i x_i}``.

    ``u0`` must have vanishing first moments (see :func:`recentre`).  Points
    where ``u`` drops below ``u_floor`` are discarded.  ``delta`` defaults to
    ``(2 gamma - 1) / 3``.
    """
    cfg = cfg or HeatFlowConfig(eps_trunc=1e-300)
    if not 1 <= alpha < 2:
        raise ValueError("alpha must lie in [1, 2)")
    gamma = 1.0 / alpha
    delta = (2 * gamma - 1) / 3 if delta is None else delta
    grid = grid or u0.grid
    pts0 = u0.grid.points()
    w = u0.values.ravel()
    first = (pts0 * w[:, None]).sum(axis=0) * u0.grid.cell_volume
    mass = u0.mass()
    if np.any(np.abs(first) > 1e-9 * mass * max(1.0, u0.support_radius())):
        raise ValueError("u0 must have vanishing first moments; call recentre() first")
    R = u0.support_radius()
    u = _convolve(u0, t, cfg, grid)
    if np.any(u >= 1):
        raise ValueError(f"u >= 1 somewhere at t={t}; increase t or rescale u0")
    coord = u0.grid.coords()[axis]
    X = _convolve(u0, t, cfg, grid, u0.values * coord)
    Y = _convolve(u0, t, cfg, grid, u0.values * coord**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        X = X / u
        Y = Y / u
    neglog = -np.log(np.where(u > 0, u, 1.0))
    v = neglog**gamma
    h = grid.h
    inner_sl = [slice(None)] * grid.dim
    inner_sl[axis] = slice(1, -1)
    lo_sl = list(inner_sl)
    lo_sl[axis] = slice(0, -2)
    hi_sl = list(inner_sl)
    hi_sl[axis] = slice(2, None)
    inner_sl, lo_sl, hi_sl = tuple(inner_sl), tuple(lo_sl), tuple(hi_sl)
    vxx = (v[lo_sl] - 2 * v[inner_sl] + v[hi_sl]) / h**2
    ok = (u[lo_sl] > u_floor) & (u[inner_sl] > u_floor) & (u[hi_sl] > u_floor)
    L = neglog[inner_sl]
    Q = (2 * t / gamma) * L ** (1 - gamma) * vxx
    xs = grid.coords()[axis][inner_sl]
    Xi, Yi = X[inner_sl], Y[inner_sl]
    Q_id = (1 + Xi**2 / (2 * t) - Yi / (2 * t)
            - (1 - gamma) / L * (xs**2 / (2 * t) - xs * Xi / t + Xi**2 / (2 * t)))
    pts = np.stack([c[inner_sl] for c in grid.coords()], axis=-1)
    r2 = (pts**2).sum(axis=-1)
    inner = r2 <= eps * t * math.log(t)
    return MomentDiagnostics(
        x=xs[ok], t=float(t), alpha=float(alpha), axis=axis, X=Xi[ok], Y=Yi[ok], Q=Q[ok],
        Q_identity=Q_id[ok], inner=inner[ok], R=R, eps=eps, delta=delta,
        points=pts[ok])
