"""Scalar concavity transforms, power means and the auxiliary functions used
to reason about logarithmic power concavity.

Two families of admissible transforms are supported:

* ``LogPower(alpha)``: ``L_alpha(s) = -(-log s) ** (1 / alpha)``
* ``Power(p)``: ``s ** p / p`` (``log s`` when ``p == 0``)

Both map ``[0, 1]`` to the extended reals with ``F(0) = -inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "DomainError",
    "ExtReal",
    "NEG_INF",
    "ConcavityTransform",
    "LogPower",
    "Power",
    "evaluate",
    "evaluate_inverse",
    "power_mean",
    "psi",
    "psi_prime",
    "weak_counterexample_curvature",
    "logpower_bridge_convexity",
    "ins_scalar_convexity",
    "BridgeVerdict",
    "InsVerdict",
]


class DomainError(ValueError):
    """Argument outside the domain of a transform or scalar function."""


@dataclass(frozen=True)
class ExtReal:
    """A real number or the bottom element ``-inf``.

    Arithmetic follows the usual convention for concave functions:
    ``-inf + a = -inf``, ``c * -inf = -inf`` for ``c > 0`` and
    ``0 * -inf = 0``.  ``-inf >= -inf`` holds.
    """

    value: float = 0.0
    bottom: bool = False

    def __post_init__(self):
        if self.bottom:
            object.__setattr__(self, "value", 0.0)
        elif not math.isfinite(self.value):
            raise DomainError(f"ExtReal value must be finite, got {self.value!r}")

    @classmethod
    def of(cls, x) -> "ExtReal":
        if isinstance(x, ExtReal):
            return x
        x = float(x)
        if x == -math.inf:
            return NEG_INF
        return cls(x)

    @property
    def is_finite(self) -> bool:
        return not self.bottom

    def __float__(self) -> float:
        return -math.inf if self.bottom else self.value

    def __add__(self, other) -> "ExtReal":
        other = ExtReal.of(other)
        if self.bottom or other.bottom:
            return NEG_INF
        return ExtReal(self.value + other.value)

    __radd__ = __add__

    def __mul__(self, c) -> "ExtReal":
        c = float(c)
        if c < 0 or not math.isfinite(c):
            raise DomainError("ExtReal may only be scaled by a finite nonnegative number")
        if self.bottom:
            return ExtReal(0.0) if c == 0 else NEG_INF
        return ExtReal(self.value * c)

    __rmul__ = __mul__

    def __sub__(self, other) -> "ExtReal":
        other = ExtReal.of(other)
        if other.bottom:
            raise DomainError("subtracting -inf is undefined")
        if self.bottom:
            return NEG_INF
        return ExtReal(self.value - other.value)

    def _cmp_key(self, other):
        other = ExtReal.of(other)
        return float(self), float(other)

    def __ge__(self, other):
        a, b = self._cmp_key(other)
        return a >= b

    def __gt__(self, other):
        a, b = self._cmp_key(other)
        return a > b

    def __le__(self, other):
        a, b = self._cmp_key(other)
        return a <= b

    def __lt__(self, other):
        a, b = self._cmp_key(other)
        return a < b

    def __repr__(self):
        return "ExtReal(-inf)" if self.bottom else f"ExtReal({self.value!r})"


NEG_INF = ExtReal(bottom=True)


@dataclass(frozen=True)
class ConcavityTransform:
    """An admissible transform ``F: [0, 1] -> R u {-inf}``.

    Use the :func:`LogPower` and :func:`Power` constructors rather than
    building instances directly.
    """

    family: str
    parameter: float

    def __post_init__(self):
        if self.family not in ("logpower", "power"):
            raise ValueError(f"unknown transform family {self.family!r}")
        p = float(self.parameter)
        if not math.isfinite(p):
            raise ValueError("transform parameter must be finite")
        if self.family == "logpower" and p <= 0:
            raise ValueError(f"LogPower needs alpha > 0, got {p}")
        object.__setattr__(self, "parameter", p)

    @property
    def name(self) -> str:
        label = "LogPower" if self.family == "logpower" else "Power"
        return f"{label}({self.parameter:g})"

    def __str__(self):
        return self.name

    @property
    def top(self) -> float:
        """F(1), the largest attainable value."""
        if self.family == "logpower":
            return 0.0
        p = self.parameter
        return 0.0 if p == 0 else 1.0 / p

    def eval(self, s: float) -> ExtReal:
        vals, bottom = self.eval_array(np.asarray([s], dtype=float))
        return NEG_INF if bottom[0] else ExtReal(float(vals[0]))

    __call__ = eval

    def eval_array(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised evaluation.

        Returns ``(values, bottom)`` where ``bottom`` marks entries equal to
        ``-inf``; ``values`` holds 0.0 there.
        """
        s = np.asarray(s, dtype=float)
        if np.any(np.isnan(s)) or np.any(s < 0) or np.any(s > 1):
            bad = s[np.isnan(s) | (s < 0) | (s > 1)].ravel()[0]
            raise DomainError(
                f"{self.name} evaluated at s={bad!r} outside [0, 1]; rescale by kappa first"
            )
        bottom = s == 0
        safe = np.where(bottom, 1.0, s)
        if self.family == "logpower":
            # -log s via log1p near 1 keeps full relative accuracy there
            flat = np.atleast_1d(safe)
            near = flat >= 0.5
            neglog = -np.log(flat)
            neglog[near] = -np.log1p(flat[near] - 1.0)
            vals = -np.power(np.maximum(neglog, 0.0), 1.0 / self.parameter).reshape(s.shape)
        else:
            p = self.parameter
            if p == 0:
                vals = np.log(safe)
            else:
                with np.errstate(over="ignore"):
                    vals = np.power(safe, p) / p
        vals = np.where(bottom, 0.0, vals)
        return vals, bottom

    def inverse(self, y) -> float:
        """Generalised inverse ``sup{s in [0, 1] : F(s) <= y}``."""
        y = ExtReal.of(y)
        if y.bottom:
            return 0.0
        v = y.value
        if v > self.top:
            raise DomainError(f"{self.name}^-1 undefined for y={v!r} > F(1)={self.top!r}")
        if self.family == "logpower":
            return math.exp(-((-v) ** self.parameter))
        p = self.parameter
        if p == 0:
            return math.exp(v)
        if p > 0 and v <= 0:
            return 0.0
        return (p * v) ** (1.0 / p)


def LogPower(alpha: float) -> ConcavityTransform:
    """The logarithmic power transform ``L_alpha``."""
    return ConcavityTransform("logpower", alpha)


def Power(p: float) -> ConcavityTransform:
    """The power transform ``F_p``."""
    return ConcavityTransform("power", p)


def evaluate(F: ConcavityTransform, s: float) -> ExtReal:
    return F.eval(s)


def evaluate_inverse(F: ConcavityTransform, y) -> float:
    return F.inverse(y)


def power_mean(a, b, mu, gamma):
    """Weighted power mean ``[(1-mu) a^g + mu b^g]^(1/g)``.

    ``gamma == 0`` is the geometric mean, the continuous extension; values
    of ``|gamma| < 1e-12`` are evaluated as that limit.
    Broadcasts over array arguments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("power_mean needs positive arguments")
    if np.any(mu < 0) or np.any(mu > 1):
        raise DomainError("power_mean weight must lie in [0, 1]")
    la, lb = np.log(a), np.log(b)
    if abs(gamma) < 1e-12:
        # the relative error of the geometric limit is O(|gamma| (log a - log b)^2)
        out = np.exp((1 - mu) * la + mu * lb)
    else:
        # log M = log((1-mu) a^g + mu b^g) / g, written to stay accurate for small g
        with np.errstate(over="ignore"):
            out = np.exp(np.log1p((1 - mu) * np.expm1(gamma * la) + mu * np.expm1(gamma * lb))
                         / gamma)
    return out[()] if out.ndim == 0 else out


def _psi_args(kappa, a, b, mu, alpha):
    kappa, a, b, mu = (np.asarray(v, dtype=float) for v in (kappa, a, b, mu))
    for name, v in (("kappa", kappa), ("a", a), ("b", b)):
        if np.any(v <= 0) or np.any(v > 1):
            raise DomainError(f"{name} must lie in (0, 1]")
    if np.any(mu < 0) or np.any(mu > 1):
        raise DomainError("mu must lie in [0, 1]")
    if np.any(kappa * a > 1) or np.any(kappa * b > 1):
        raise DomainError("kappa * a and kappa * b must not exceed 1")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return kappa, a, b, mu


def psi(kappa, a, b, mu, alpha):
    """``kappa^-1 L_alpha^-1[(1-mu) L_alpha(kappa a) + mu L_alpha(kappa b)]``."""
    kappa, a, b, mu = _psi_args(kappa, a, b, mu, alpha)
    A = -np.log(kappa * a)
    B = -np.log(kappa * b)
    S = (1 - mu) * A ** (1 / alpha) + mu * B ** (1 / alpha)
    out = np.exp(-(S**alpha)) / kappa
    return out[()] if out.ndim == 0 else out


def psi_prime(kappa, a, b, mu, alpha):
    """Closed-form derivative of :func:`psi` in ``kappa``.

    ``kappa^-2 exp(-M) [-1 + M^((alpha-1)/alpha) T]`` with ``M`` the
    ``1/alpha`` power mean of ``-log(kappa a), -log(kappa b)`` and ``T`` the
    weighted sum of their ``(1-alpha)/alpha`` powers.  Requires
    ``kappa a < 1`` and ``kappa b < 1`` when ``alpha > 1``.
    """
    kappa, a, b, mu = _psi_args(kappa, a, b, mu, alpha)
    A = -np.log(kappa * a)
    B = -np.log(kappa * b)
    if alpha > 1 and (np.any(A <= 0) or np.any(B <= 0)):
        raise DomainError("psi_prime needs kappa * a < 1 and kappa * b < 1 for alpha > 1")
    S = (1 - mu) * A ** (1 / alpha) + mu * B ** (1 / alpha)
    M = S**alpha
    q = (1 - alpha) / alpha
    T = (1 - mu) * A**q + mu * B**q
    # the bracket is tiny when a ~ b; expm1 keeps it accurate
    with np.errstate(divide="ignore"):
        bracket = np.expm1((alpha - 1) / alpha * np.log(M) + np.log(T))
    out = np.exp(-M) / kappa**2 * bracket
    return out[()] if out.ndim == 0 else out


def weak_counterexample_curvature(alpha, kappa, r):
    """Radial second derivative of ``L_alpha(kappa exp(-r^alpha))``.

    Equals ``(1-alpha)(-log kappa + r^alpha)^(-2+1/alpha) r^(-2+alpha) (-log kappa)``
    and is positive for ``0 < alpha < 1``, ``0 < kappa < 1``, ``r > 0``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0) or np.any(alpha >= 1):
        raise DomainError("alpha must lie in (0, 1)")
    kappa = np.asarray(kappa, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(kappa <= 0) or np.any(kappa >= 1):
        raise DomainError("kappa must lie in (0, 1)")
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    c = -np.log(kappa)
    out = (1 - alpha) * (c + r**alpha) ** (-2 + 1 / alpha) * r ** (-2 + alpha) * c
    return out[()] if out.ndim == 0 else out


class BridgeVerdict(NamedTuple):
    convex: bool
    s_pass: float
    witness: float | None
    min_scaled_second_difference: float


def logpower_bridge_convexity(p: float, alpha: float, s_max: float, n: int = 400,
                              s_min: float = 1e-12, rtol: float = 1e-9) -> BridgeVerdict:
    """Sampled convexity check of ``s -> (-(1/p) log s)^(1/alpha)`` on ``(0, s_max]``.

    Samples are geometric in ``s``.  Divided second differences are scanned
    from small to large ``s``; ``s_pass`` is the largest sample such that no
    violation occurs at or below it, ``witness`` the first violating sample.
    """
    if p <= 0 or alpha <= 0:
        raise DomainError("p and alpha must be positive")
    if not 0 < s_max < 1:
        raise DomainError("s_max must lie in (0, 1)")
    s_min = min(s_min, s_max * 1e-3)
    s = np.geomspace(s_min, s_max, n)
    f = (-np.log(s) / p) ** (1 / alpha)
    h1 = s[1:-1] - s[:-2]
    h2 = s[2:] - s[1:-1]
    d1 = (f[1:-1] - f[:-2]) / h1
    d2 = (f[2:] - f[1:-1]) / h2
    dd = 2 * (d2 - d1) / (h1 + h2)
    scale = (np.abs(f[:-2]) + 2 * np.abs(f[1:-1]) + np.abs(f[2:])) / (h1 * h2)
    ok = dd >= -rtol * scale
    scaled = dd / np.maximum(scale, np.finfo(float).tiny)
    if np.all(ok):
        return BridgeVerdict(True, float(s[-1]), None, float(scaled.min()))
    first = int(np.argmin(ok))
    s_pass = float(s[first]) if first > 0 else float(s[0])
    return BridgeVerdict(False, s_pass, float(s[first + 1]), float(scaled.min()))


class InsVerdict(NamedTuple):
    convex: bool
    witness: float | None
    min_second_difference: float


def _ins_phi(gamma: float, s: np.ndarray) -> np.ndarray:
    q = (gamma - 1) / gamma
    return -(1 / gamma) * (-s) ** (-q) + q / s + 1


def ins_scalar_convexity(gamma: float, s=None, atol: float = 1e-10,
                         rtol: float = 1e-12) -> InsVerdict:
    """Convexity on ``s < 0`` of the scalar part of the structure condition.

    ``phi(s) = -(1/g)(-s)^(-(g-1)/g) + ((g-1)/g) s^-1 + 1``.  The remaining
    dependence on the matrix argument is affine, so joint convexity reduces
    to convexity of ``phi``.  ``s`` must be an increasing uniform sample of
    negative reals; the default is 2001 points on ``[-10, -0.01]``.
    """
    if not 0 < gamma <= 1:
        raise DomainError("gamma must lie in (0, 1]")
    if s is None:
        s = np.linspace(-10.0, -0.01, 2001)
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or s.size < 3 or np.any(s >= 0):
        raise DomainError("s must be a 1-d sample of at least 3 negative reals")
    phi = _ins_phi(gamma, s)
    d2 = phi[:-2] - 2 * phi[1:-1] + phi[2:]
    bound = atol + rtol * (np.abs(phi[:-2]) + 2 * np.abs(phi[1:-1]) + np.abs(phi[2:]))
    ok = d2 >= -bound
    worst = int(np.argmin(d2))
    if np.all(ok):
        return InsVerdict(True, None, float(d2[worst]))
    return InsVerdict(False, float(s[1:-1][worst]), float(d2[worst]))
