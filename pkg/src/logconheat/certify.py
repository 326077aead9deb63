"""Grid certification and falsification of F-concavity.

A function ``u`` sampled on a grid is tested through grid-aligned triples
``(x, z, y)`` with ``z = (1 - mu) x + mu y``.  The inequality

    F(kappa U(z)) >= (1 - mu) F(kappa U(x)) + mu F(kappa U(y))

is evaluated with extended-real semantics on the zero extension ``U``.  The
grid is padded with one exterior layer of zeros.  A ``CertifiedOnGrid``
verdict only says that no tested triple violates the inequality beyond the
tolerance; it is not a statement about the continuum function.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

import numpy as np

from .grid import Grid, SampledFunction, eval_zero_extended
from .transforms import ConcavityTransform, ExtReal, LogPower, Power

__all__ = [
    "CERTIFIED",
    "VIOLATED",
    "KappaInfeasibleError",
    "TripleSet",
    "Witness",
    "ConcavityReport",
    "KappaSweep",
    "QuasiconcavityResult",
    "InclusionReport",
    "exhaustive_triples",
    "dyadic_triples",
    "random_triples",
    "hull_triples",
    "default_triples",
    "default_kappa_schedule",
    "check_F_concave",
    "kappa_threshold",
    "find_violation",
    "alpha_logconcave",
    "p_concave",
    "quasiconcave",
    "inclusion_suite",
    "reverify",
    "LADDER",
]

CERTIFIED = "CertifiedOnGrid"
VIOLATED = "Violated"

DIRECTIONS_2D = ((1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (2, -1), (1, -2))
_EXHAUSTIVE_LIMIT = 64


class KappaInfeasibleError(ValueError):
    """``kappa * sup u`` exceeds 1, so ``F(kappa u)`` is undefined."""


# --- triple sets ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TripleSet:
    """Grid-aligned triples as flat indices into the zero-padded grid.

    ``shape`` is the padded shape (one extra layer on each side).  Padded
    index ``i`` corresponds to grid index ``i - 1``.
    """

    shape: tuple[int, ...]
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    policy: str
    seed: int | None = None

    def __len__(self):
        return int(self.x.size)

    def union(self, other: "TripleSet") -> "TripleSet":
        if other.shape != self.shape:
            raise ValueError("triple sets live on different grids")
        seed = self.seed if self.seed is not None else other.seed
        return TripleSet(self.shape, np.concatenate([self.x, other.x]),
                         np.concatenate([self.z, other.z]), np.concatenate([self.y, other.y]),
                         np.concatenate([self.mu, other.mu]),
                         f"{self.policy}+{other.policy}", seed)

    __or__ = union


def _padded_shape(grid: Grid) -> tuple[int, ...]:
    return tuple(n + 2 for n in grid.extents)


def _flat(shape, idx: np.ndarray) -> np.ndarray:
    return np.ravel_multi_index(tuple(idx.T), shape).astype(np.int64)


def _empty(shape, policy, seed=None) -> TripleSet:
    e = np.zeros(0, dtype=np.int64)
    return TripleSet(shape, e, e, e, np.zeros(0), policy, seed)


def _from_steps(shape, p: np.ndarray, d: np.ndarray, m: np.ndarray, s: np.ndarray,
                policy: str, seed=None) -> TripleSet:
    """Triples ``x = p``, ``y = p + m d``, ``z = p + s d``."""
    x = p
    y = p + m[:, None] * d
    z = p + s[:, None] * d
    return TripleSet(shape, _flat(shape, x), _flat(shape, z), _flat(shape, y),
                     s.astype(float) / m.astype(float), policy, seed)


def exhaustive_triples(grid: Grid, limit: int = 5_000_000) -> TripleSet:
    """Every aligned triple with ``0 < mu < 1`` on the padded grid."""
    shape = _padded_shape(grid)
    if grid.dim == 1:
        n = shape[0]
        i, k = np.triu_indices(n, 2)
        gaps = k - i
        total = int((gaps - 1).sum())
        if total > limit:
            raise ValueError(f"{total} triples exceed the exhaustive limit")
        rep = gaps - 1
        x = np.repeat(i, rep)
        y = np.repeat(k, rep)
        offs = np.arange(total) - np.repeat(np.cumsum(rep) - rep, rep) + 1
        z = x + offs
        return TripleSet(shape, x.astype(np.int64), z.astype(np.int64), y.astype(np.int64),
                         offs / (y - x), "exhaustive")
    pts = np.stack(np.meshgrid(*[np.arange(n) for n in shape], indexing="ij"), -1).reshape(-1, 2)
    a, b = np.triu_indices(len(pts), 1)
    diff = pts[b] - pts[a]
    g = np.gcd(np.abs(diff[:, 0]), np.abs(diff[:, 1]))
    keep = g >= 2
    a, b, diff, g = a[keep], b[keep], diff[keep], g[keep]
    rep = g - 1
    total = int(rep.sum())
    if total > limit:
        raise ValueError(f"{total} triples exceed the exhaustive limit")
    p = np.repeat(pts[a], rep, axis=0)
    d = np.repeat(diff // g[:, None], rep, axis=0)
    m = np.repeat(g, rep)
    s = np.arange(total) - np.repeat(np.cumsum(rep) - rep, rep) + 1
    return _from_steps(shape, p, d, m, s, "exhaustive")


def _directions(dim: int) -> list[tuple[int, ...]]:
    return [(1,)] if dim == 1 else list(DIRECTIONS_2D)


def _start_range(n: int, span: int) -> tuple[int, int]:
    """Admissible start indices ``[lo, hi)`` for a step ``span`` along an axis."""
    return (0, n - span) if span >= 0 else (-span, n)


def dyadic_triples(grid: Grid, directions: Sequence[tuple[int, ...]] | None = None) -> TripleSet:
    """Midpoint triples ``(z - 2^k d, z, z + 2^k d)`` at every admissible centre."""
    shape = _padded_shape(grid)
    dirs = list(directions) if directions is not None else _directions(grid.dim)
    parts = []
    for d in dirs:
        d = np.asarray(d, dtype=np.int64)
        k = 0
        while True:
            step = 2**k
            span = 2 * step * d
            ranges = [_start_range(n, int(sp)) for n, sp in zip(shape, span)]
            if any(hi <= lo for lo, hi in ranges):
                break
            starts = np.stack(np.meshgrid(*[np.arange(lo, hi) for lo, hi in ranges],
                                          indexing="ij"), -1).reshape(-1, grid.dim)
            cnt = len(starts)
            parts.append(_from_steps(shape, starts, np.broadcast_to(d, starts.shape),
                                     np.full(cnt, 2 * step), np.full(cnt, step), "dyadic"))
            k += 1
    if not parts:
        return _empty(shape, "dyadic")
    return TripleSet(shape, *(np.concatenate([getattr(p, a) for p in parts])
                              for a in ("x", "z", "y", "mu")), "dyadic")


def _random_steps(shape, n: int, rng: np.random.Generator, directions):
    dim = len(shape)
    per_dir = max(1, n // len(directions))
    P, D, M, S = [], [], [], []
    for d in directions:
        d = np.asarray(d, dtype=np.int64)
        reach = min((n_ - 1) // abs(int(c)) for n_, c in zip(shape, d) if c != 0)
        if reach < 2:
            continue
        # stratify the scale over log-spaced bins
        edges = np.unique(np.geomspace(2, reach + 1, 9).astype(np.int64))
        bins = list(zip(edges[:-1], np.maximum(edges[1:], edges[:-1] + 1)))
        per_bin = max(1, per_dir // len(bins))
        for lo_m, hi_m in bins:
            m = rng.integers(lo_m, min(hi_m, reach + 1), size=per_bin) if hi_m > lo_m \
                else np.full(per_bin, lo_m)
            m = np.clip(m, 2, reach)
            p = np.empty((per_bin, dim), dtype=np.int64)
            for ax in range(dim):
                span = m * d[ax]
                lo = np.where(span >= 0, 0, -span)
                hi = np.where(span >= 0, shape[ax] - span, shape[ax])
                p[:, ax] = lo + (rng.random(per_bin) * (hi - lo)).astype(np.int64)
            s = 1 + (rng.random(per_bin) * (m - 1)).astype(np.int64)
            P.append(p)
            D.append(np.broadcast_to(d, p.shape))
            M.append(m)
            S.append(s)
    if not P:
        return None
    return (np.concatenate(P), np.concatenate(D), np.concatenate(M), np.concatenate(S))


def _random_directions(dim: int) -> list[tuple[int, ...]]:
    if dim == 1:
        return [(1,)]
    dirs = []
    for a in range(0, 4):
        for b in range(-3, 4):
            if (a, b) != (0, 0) and gcd(a, abs(b)) == 1 and (a > 0 or b > 0):
                dirs.append((a, b))
    return dirs


def random_triples(grid: Grid, n: int, seed: int = 0) -> TripleSet:
    """Stratified random aligned triples (directions x log-scale bins)."""
    shape = _padded_shape(grid)
    rng = np.random.default_rng(seed)
    steps = _random_steps(shape, n, rng, _random_directions(grid.dim))
    if steps is None:
        return _empty(shape, "random", seed)
    return _from_steps(shape, *steps, "random", seed)


def hull_triples(u: SampledFunction) -> TripleSet:
    """1-d: one triple per zero inside the support hull, spanning the hull."""
    shape = _padded_shape(u.grid)
    if u.dim != 1:
        return _empty(shape, "hull")
    pos = np.nonzero(u.values > 0)[0]
    if pos.size == 0:
        return _empty(shape, "hull")
    first, last = int(pos[0]), int(pos[-1])
    holes = np.nonzero(u.values[first:last + 1] == 0)[0] + first
    if holes.size == 0:
        return _empty(shape, "hull")
    x = np.full(holes.size, first + 1, dtype=np.int64)
    y = np.full(holes.size, last + 1, dtype=np.int64)
    z = (holes + 1).astype(np.int64)
    return TripleSet(shape, x, z, y, (z - x) / (y - x), "hull")


def default_triples(u: SampledFunction, seed: int = 0, budget: int = 20_000) -> TripleSet:
    """Exhaustive on 1-d grids of at most 64 points, otherwise dyadic + hull + random."""
    if u.dim == 1 and u.grid.extents[0] <= _EXHAUSTIVE_LIMIT:
        return exhaustive_triples(u.grid)
    return dyadic_triples(u.grid) | hull_triples(u) | random_triples(u.grid, budget, seed)


# --- reports ------------------------------------------------------------------

def _fmt_gap(g: float):
    return "-inf" if g == -math.inf else g


@dataclass(frozen=True)
class Witness:
    """A violating triple; ``kind`` is ``"concavity"`` or ``"support"``.

    Support witnesses have ``U(z) = 0`` between two positive values, so the
    gap is ``-inf``.
    """

    x: tuple[float, ...]
    y: tuple[float, ...]
    mu: float
    gap: float
    kind: str = "concavity"

    @property
    def z(self) -> tuple[float, ...]:
        return tuple((1 - self.mu) * a + self.mu * b for a, b in zip(self.x, self.y))

    def to_dict(self) -> dict:
        return {"x": list(self.x), "y": list(self.y), "mu": self.mu,
                "gap": _fmt_gap(self.gap), "kind": self.kind}


@dataclass(frozen=True)
class ConcavityReport:
    verdict: str
    transform: ConcavityTransform | None
    kappa: float
    tol: float
    witness: Witness | None
    triples_checked: int
    seed: int | None = None
    policy: str = ""
    worst_gap: float = math.inf  # most negative tested gap (+inf: nothing finite tested)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        t = self.transform
        return {
            "verdict": self.verdict,
            "transform": t.name if t is not None else "quasiconcave",
            "alpha_or_p": t.parameter if t is not None else None,
            "kappa": self.kappa,
            "tol": self.tol,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "triples_checked": self.triples_checked,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# --- gap evaluation -------------------------------------------------------------

def _padded(u: SampledFunction) -> np.ndarray:
    return np.pad(u.values, 1)


def _transform_values(u: SampledFunction, F: ConcavityTransform, kappa: float):
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if kappa * u.sup_bound > 1 + 1e-12:
        raise KappaInfeasibleError(
            f"kappa * sup u = {kappa * u.sup_bound!r} > 1; use kappa <= {1 / u.sup_bound!r}")
    s = np.minimum(kappa * _padded(u), 1.0).ravel()
    vals, bottom = F.eval_array(s)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError(f"{F.name}(kappa u) overflows on this grid; narrow the window")
    return vals, bottom


def _gaps(vals, bottom, x, z, y, mu):
    """Gap per triple: +inf when the right side is -inf, -inf for support breaks."""
    bx, bz, by = bottom[x], bottom[z], bottom[y]
    fx, fz, fy = vals[x], vals[z], vals[y]
    rhs = (1 - mu) * fx + mu * fy
    gap = fz - rhs
    scale = np.maximum(1.0, np.maximum(np.abs(fz), (1 - mu) * np.abs(fx) + mu * np.abs(fy)))
    rhs_bottom = bx | by
    gap = np.where(rhs_bottom, np.inf, np.where(bz, -np.inf, gap))
    return gap, scale


def _chunk_best(vals, bottom, ts: TripleSet, lo: int, hi: int, tol: float):
    if hi <= lo:
        return None
    x, z, y, mu = ts.x[lo:hi], ts.z[lo:hi], ts.y[lo:hi], ts.mu[lo:hi]
    gap, scale = _gaps(vals, bottom, x, z, y, mu)
    # lexicographic minimum of (gap, x, y, mu): sort only the tied minima
    gmin = gap.min()
    ties = np.flatnonzero(gap == gmin) if gmin == gmin else np.arange(gap.size)
    j = int(ties[np.lexsort((mu[ties], y[ties], x[ties]))[0]])
    return (float(gap[j]), int(x[j]), int(y[j]), float(mu[j]), bool(gap[j] < -tol * scale[j]))


def _best(vals, bottom, ts: TripleSet, tol: float, n_jobs: int = 1, chunk: int = 1 << 20):
    bounds = [(lo, min(lo + chunk, len(ts))) for lo in range(0, max(len(ts), 1), chunk)]
    if n_jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            results = list(ex.map(lambda b: _chunk_best(vals, bottom, ts, b[0], b[1], tol),
                                  bounds))
    else:
        results = [_chunk_best(vals, bottom, ts, lo, hi, tol) for lo, hi in bounds]
    cands = [r for r in results if r is not None]
    if not cands:
        return None
    return min(cands, key=lambda c: (c[0], c[1], c[2], c[3]))


def _coords(grid: Grid, shape, flat: int) -> tuple[float, ...]:
    idx = np.unravel_index(flat, shape)
    return tuple(float(o + (i - 1) * grid.h) for o, i in zip(grid.origin, idx))


def _witness(grid: Grid, shape, best) -> Witness:
    gap, x, y, mu, _ = best
    kind = "support" if gap == -math.inf else "concavity"
    return Witness(_coords(grid, shape, x), _coords(grid, shape, y), mu, gap, kind)


def check_F_concave(u: SampledFunction, F: ConcavityTransform, kappa: float,
                    triples: TripleSet | None = None, tol: float = 1e-9, seed: int = 0,
                    n_jobs: int = 1) -> ConcavityReport:
    """Test the F-concavity inequality of ``kappa u`` on ``triples``.

    A triple counts as satisfied when ``gap >= -tol * max(1, |F terms|)``,
    so ``tol`` is absolute for values of order one and relative beyond.
    """
    ts = triples if triples is not None else default_triples(u, seed)
    if ts.shape != _padded_shape(u.grid):
        raise ValueError("triple set was built for a different grid")
    vals, bottom = _transform_values(u, F, kappa)
    best = _best(vals, bottom, ts, tol, n_jobs)
    worst = math.inf if best is None else best[0]
    if best is not None and best[4]:
        return ConcavityReport(VIOLATED, F, float(kappa), tol, _witness(u.grid, ts.shape, best),
                               len(ts), ts.seed, ts.policy, worst)
    return ConcavityReport(CERTIFIED, F, float(kappa), tol, None, len(ts), ts.seed, ts.policy,
                           worst)


def reverify(u: SampledFunction, F: ConcavityTransform, kappa: float, w: Witness) -> ExtReal | float:
    """Recompute a witness gap through scalar extended-real arithmetic.

    Returns ``-inf`` (as a float) for support violations, ``+inf`` if the
    right-hand side is ``-inf``, else the finite gap.
    """
    fx = F.eval(min(1.0, kappa * eval_zero_extended(u, w.x)))
    fy = F.eval(min(1.0, kappa * eval_zero_extended(u, w.y)))
    fz = F.eval(min(1.0, kappa * eval_zero_extended(u, w.z)))
    rhs = (1 - w.mu) * fx + w.mu * fy
    if rhs.bottom:
        return math.inf
    if fz.bottom:
        return -math.inf
    return (fz - rhs).value


# --- sweeps and searches ------------------------------------------------------

def default_kappa_schedule(u: SampledFunction, steps: int = 21) -> list[float]:
    """``min(1, 1/sup u) * 2^-k`` for ``k = 0 .. steps-1``."""
    if u.sup_bound <= 0:
        raise ValueError("u is identically zero")
    k0 = min(1.0, 1.0 / u.sup_bound)
    return [k0 * 2.0**-k for k in range(steps)]


@dataclass(frozen=True)
class KappaSweep:
    transform: ConcavityTransform
    reports: tuple[ConcavityReport, ...]

    @property
    def kappas(self) -> list[float]:
        return [r.kappa for r in self.reports]

    @property
    def all_certified(self) -> bool:
        return all(r.certified for r in self.reports)

    @property
    def all_violated(self) -> bool:
        return all(not r.certified for r in self.reports)

    @property
    def tail_start(self) -> int | None:
        """Index of the first report of the certified tail (``None`` if the smallest kappa fails)."""
        i = len(self.reports)
        while i > 0 and self.reports[i - 1].certified:
            i -= 1
        return None if i == len(self.reports) else i

    @property
    def kappa_threshold(self) -> float | None:
        """Largest scheduled kappa below which every scheduled kappa is certified."""
        i = self.tail_start
        return None if i is None else self.reports[i].kappa

    @property
    def kappa_monotone(self) -> bool:
        """Certified at some kappa implies certified at every smaller scheduled kappa."""
        seen = False
        for r in self.reports:
            if r.certified:
                seen = True
            elif seen:
                return False
        return True

    def summary(self) -> dict:
        return {"transform": self.transform.name, "kappas": self.kappas,
                "verdicts": [r.verdict for r in self.reports],
                "kappa_threshold": self.kappa_threshold,
                "all_certified": self.all_certified, "kappa_monotone": self.kappa_monotone}


def kappa_threshold(u: SampledFunction, F: ConcavityTransform,
                    schedule: Sequence[float] | None = None, triples: TripleSet | None = None,
                    tol: float = 1e-9, seed: int = 0, n_jobs: int = 1) -> KappaSweep:
    """Per-kappa verdicts over a strictly decreasing schedule."""
    schedule = list(schedule) if schedule is not None else default_kappa_schedule(u)
    if not schedule:
        raise ValueError("empty kappa schedule")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("kappa schedule must be strictly decreasing")
    ts = triples if triples is not None else default_triples(u, seed)
    reports = tuple(check_F_concave(u, F, k, ts, tol, seed, n_jobs) for k in schedule)
    return KappaSweep(F, reports)


def _eval_steps(vals, bottom, shape, p, d, m, s):
    ts = _from_steps(shape, p, d, m, s, "search")
    return _gaps(vals, bottom, ts.x, ts.z, ts.y, ts.mu)


def _valid(shape, p, d, m, s):
    y = p + m[:, None] * d
    ok = (m >= 2) & (s >= 1) & (s < m)
    for ax, n in enumerate(shape):
        ok &= (p[:, ax] >= 0) & (p[:, ax] < n) & (y[:, ax] >= 0) & (y[:, ax] < n)
    return ok


def find_violation(u: SampledFunction, F: ConcavityTransform, kappa: float,
                   budget: int = 100_000, seed: int = 0, tol: float = 1e-12,
                   refine_iters: int = 200) -> Witness | None:
    """Stratified random search for the most negative gap, then hill-climbing.

    Returns ``None`` when no gap below ``-tol * scale`` is found, which is
    not a certificate.
    """
    vals, bottom = _transform_values(u, F, kappa)
    shape = _padded_shape(u.grid)
    rng = np.random.default_rng(seed)
    steps = _random_steps(shape, budget, rng, _random_directions(u.dim))
    if steps is None:
        return None
    p, d, m, s = steps
    gap, scale = _eval_steps(vals, bottom, shape, p, d, m, s)
    ts = _from_steps(shape, p, d, m, s, "search")
    order = np.lexsort((ts.mu, ts.y, ts.x, gap))
    j = int(order[0])
    cur = (p[j].copy(), d[j].copy(), int(m[j]), int(s[j]))
    cur_gap, cur_scale = float(gap[j]), float(scale[j])
    if cur_gap == -math.inf:
        best = (cur_gap, int(ts.x[j]), int(ts.y[j]), float(ts.mu[j]), True)
        return _witness(u.grid, shape, best)
    dim = u.dim
    for _ in range(refine_iters):
        cp, cd, cm, cs = cur
        cand = []
        for ax in range(dim):
            for delta in (-1, 1):
                q = cp.copy()
                q[ax] += delta
                cand.append((q, cm, cs))
        for dm, ds in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (2, 1), (-2, -1)):
            cand.append((cp.copy(), cm + dm, cs + ds))
        cand.append((cp.copy(), 2 * cm, 2 * cs))
        if cm >= 4:
            cand.append((cp.copy(), cm // 2, max(1, cs // 2)))
        P = np.array([c[0] for c in cand], dtype=np.int64)
        M = np.array([c[1] for c in cand], dtype=np.int64)
        S = np.array([c[2] for c in cand], dtype=np.int64)
        D = np.broadcast_to(cd, P.shape)
        ok = _valid(shape, P, D, M, S)
        if not np.any(ok):
            break
        P, M, S, D = P[ok], M[ok], S[ok], D[ok]
        g, sc = _eval_steps(vals, bottom, shape, P, D, M, S)
        k = int(np.argmin(g))
        if not g[k] < cur_gap:
            break
        cur = (P[k].copy(), cd, int(M[k]), int(S[k]))
        cur_gap, cur_scale = float(g[k]), float(sc[k])
    if not cur_gap < -tol * cur_scale:
        return None
    cp, cd, cm, cs = cur
    fin = _from_steps(shape, cp[None, :], cd[None, :], np.array([cm]), np.array([cs]), "search")
    best = (cur_gap, int(fin.x[0]), int(fin.y[0]), float(fin.mu[0]), True)
    return _witness(u.grid, shape, best)


def alpha_logconcave(u: SampledFunction, alpha: float, tol: float = 1e-9,
                     schedule: Sequence[float] | None = None, triples: TripleSet | None = None,
                     seed: int = 0) -> ConcavityReport:
    """alpha-logconcavity: ``L_alpha(kappa u)`` concave for all small scheduled kappa.

    Returns the report at the largest kappa of the certified tail of the
    sweep, or the violated report at the smallest scheduled kappa.
    """
    sweep = kappa_threshold(u, LogPower(alpha), schedule, triples, tol, seed)
    i = sweep.tail_start
    return sweep.reports[-1] if i is None else sweep.reports[i]


def p_concave(u: SampledFunction, p: float, tol: float = 1e-9,
              triples: TripleSet | None = None, seed: int = 0) -> ConcavityReport:
    """p-concavity; the family is scale invariant, so one kappa suffices."""
    return check_F_concave(u, Power(p), min(1.0, 1.0 / u.sup_bound), triples, tol, seed)


@dataclass(frozen=True)
class QuasiconcavityResult:
    quasiconcave: bool
    level: float | None = None
    witness: tuple | None = None

    def __bool__(self):
        return self.quasiconcave


def quasiconcave(u: SampledFunction, triples: TripleSet | None = None, tol: float = 0.0,
                 seed: int = 0) -> QuasiconcavityResult:
    """Convexity of every superlevel set.

    1-d is exact: each superlevel set must be an index interval.  2-d checks
    ``U(z) >= min(U(x), U(y))`` on the triple set.  The witness level is the
    superlevel that fails to be convex.
    """
    if u.dim == 1 and triples is None:
        v = _padded(u)
        left = np.maximum.accumulate(v)
        right = np.maximum.accumulate(v[::-1])[::-1]
        lv = np.concatenate([[-np.inf], left[:-1]])
        rv = np.concatenate([right[1:], [-np.inf]])
        level = np.minimum(lv, rv)
        bad = v < level - tol
        if not np.any(bad):
            return QuasiconcavityResult(True)
        z = int(np.argmax(bad))
        xi = int(np.argmax(v[:z]))
        yi = z + 1 + int(np.argmax(v[z + 1:]))
        g = u.grid
        coord = lambda i: g.origin[0] + (i - 1) * g.h  # noqa: E731
        return QuasiconcavityResult(False, float(level[z]), (coord(xi), coord(z), coord(yi)))
    ts = triples if triples is not None else default_triples(u, seed)
    v = _padded(u).ravel()
    lvl = np.minimum(v[ts.x], v[ts.y])
    bad = v[ts.z] < lvl - tol
    if not np.any(bad):
        return QuasiconcavityResult(True)
    deficit = np.where(bad, lvl - v[ts.z], -np.inf)
    j = int(np.argmax(deficit))
    shape = ts.shape
    return QuasiconcavityResult(False, float(lvl[j]),
                                tuple(_coords(u.grid, shape, int(i)) for i in
                                      (ts.x[j], ts.z[j], ts.y[j])))


LADDER = (Power(1), LogPower(2), LogPower(1.5), LogPower(1), Power(-1), "quasiconcave")


@dataclass(frozen=True)
class InclusionReport:
    """Verdicts down the ladder from strongest to weakest notion.

    An incident is a certified stronger notion above a violated weaker one
    on the same triples, which can only come from tolerance effects.
    """

    names: tuple[str, ...]
    certified: tuple[bool, ...]
    reports: tuple = field(repr=False)
    incidents: tuple = ()

    @property
    def monotone(self) -> bool:
        return not self.incidents

    def to_dict(self) -> dict:
        return {"ladder": list(self.names), "certified": list(self.certified),
                "incidents": [list(i) for i in self.incidents]}


def inclusion_suite(u: SampledFunction, tol: float = 1e-9, triples: TripleSet | None = None,
                    seed: int = 0, ladder=LADDER) -> InclusionReport:
    ts = triples if triples is not None else default_triples(u, seed)
    names, verdicts, reports = [], [], []
    for F in ladder:
        if F == "quasiconcave":
            q = quasiconcave(u, ts if u.dim == 2 else None, 0.0, seed)
            names.append("quasiconcave")
            verdicts.append(q.quasiconcave)
            reports.append(q)
        elif F.family == "logpower":
            rep = alpha_logconcave(u, F.parameter, tol, triples=ts, seed=seed)
            names.append(F.name)
            verdicts.append(rep.certified)
            reports.append(rep)
        else:
            rep = p_concave(u, F.parameter, tol, ts, seed)
            names.append(F.name)
            verdicts.append(rep.certified)
            reports.append(rep)
    incidents = []
    for i in range(len(verdicts)):
        for j in range(i + 1, len(verdicts)):
            if verdicts[i] and not verdicts[j]:
                incidents.append((names[i], names[j], _incident_witness(reports[j])))
    return InclusionReport(tuple(names), tuple(verdicts), tuple(reports), tuple(incidents))


def _incident_witness(rep):
    if isinstance(rep, ConcavityReport):
        return None if rep.witness is None else rep.witness.to_dict()
    return {"level": rep.level, "points": rep.witness}
