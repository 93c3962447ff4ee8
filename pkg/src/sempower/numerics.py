"""Shared numerical kernels.

Gaussian tail function and its inverse, bracketed bisection, a
derivative-free simplex minimiser, central finite differences, and a
small counter-based random generator used for every stochastic draw in
the package. All routines are deterministic, double precision, and free
of global state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as _optimize
from scipy import special as _special

from .errors import BracketError, ConvergenceError, DomainError

__all__ = [
    "ToleranceConfig",
    "Rng",
    "derive_seed",
    "q_function",
    "q_inverse",
    "normal_pdf",
    "bisect_root",
    "bisect_root_many",
    "NelderMeadResult",
    "nelder_mead_minimize",
    "finite_difference",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ToleranceConfig:
    """Iteration-control knobs shared by the iterative routines.

    Parameters
    ----------
    abs_tol : float
        Absolute interval (or simplex) tolerance.
    rel_tol : float
        Relative tolerance, scaled by the magnitude of the result.
    max_iter : int
        Hard iteration cap.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self) -> None:
        if not (math.isfinite(self.abs_tol) and self.abs_tol > 0.0):
            raise DomainError(f"abs_tol must be finite and > 0, got {self.abs_tol}")
        if not (math.isfinite(self.rel_tol) and self.rel_tol > 0.0):
            raise DomainError(f"rel_tol must be finite and > 0, got {self.rel_tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")


# ---------------------------------------------------------------------------
# Counter-based random generator
# ---------------------------------------------------------------------------

_GOLDEN = 0x9E3779B97F4A7C15  # 2**64 / golden ratio, odd
_SPAWN_ODD = 0xD1B54A32D192ED03


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on uint64 arrays (Steele, Lea & Flood)."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, index: int) -> int:
    """Derive the sub-stream seed ``index`` from a master seed.

    Distinct indices map to distinct sub-seeds (the mixing function is a
    bijection on 64-bit words), so parallel consumers can draw from
    statistically disjoint streams.
    """
    z = np.asarray(
        [((int(seed) ^ _GOLDEN) + (2 * int(index) + 1) * _SPAWN_ODD) % 2**64],
        dtype=np.uint64,
    )
    return int(_mix64(z)[0])


class Rng:
    """Reproducible counter-based pseudo-random generator.

    The raw 64-bit word at absolute position ``k`` of the stream with key
    ``K`` is ``mix64(K + (k + 1) * GOLDEN)`` where ``mix64`` is the
    SplitMix64 finaliser and ``GOLDEN = 0x9E3779B97F4A7C15``; the key is
    ``mix64(seed)``. All integer arithmetic is modulo 2**64, so the word
    stream is bit-identical on every platform. Floating point outputs are
    deterministic for a given platform; across platforms they can differ
    by libm rounding (one ulp in ``log``/``cos``/``sin``).

    Instances are single-owner and advance an internal position; use
    :func:`derive_seed` (or :meth:`spawn`) to hand independent streams to
    parallel consumers.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) % 2**64
        self._key = int(_mix64(np.asarray([self.seed], dtype=np.uint64))[0])
        self._pos = 0

    def _words(self, n: int) -> np.ndarray:
        idx = np.arange(self._pos + 1, self._pos + n + 1, dtype=np.uint64)
        self._pos += n
        return _mix64(np.uint64(self._key) + idx * np.uint64(_GOLDEN))

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles uniform on [0, 1), from the top 53 bits per word."""
        return (self._words(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def _uniform_open(self, n: int) -> np.ndarray:
        # (0, 1]: safe under log()
        w = (self._words(n) >> np.uint64(11)) + np.uint64(1)
        return w.astype(np.float64) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normal deviates via Box-Muller pairs."""
        m = (n + 1) // 2
        u1 = self._uniform_open(m)
        u2 = self.uniform(m)
        r = np.sqrt(-2.0 * np.log(u1))
        ang = (2.0 * math.pi) * u2
        return np.concatenate([r * np.cos(ang), r * np.sin(ang)])[:n]

    def exponential(self, n: int) -> np.ndarray:
        """``n`` unit-mean exponential deviates."""
        return -np.log(self._uniform_open(n))

    def bits(self, n: int) -> np.ndarray:
        """``n`` random bits as a uint8 array of 0/1 values."""
        nwords = (n + 63) // 64
        # big-endian view fixes the byte order across platforms
        raw = self._words(nwords).astype(">u8").view(np.uint8)
        return np.unpackbits(raw)[:n]

    def spawn(self, index: int) -> "Rng":
        """A fresh generator on the sub-stream ``index`` of this seed."""
        return Rng(derive_seed(self.seed, index))


# ---------------------------------------------------------------------------
# Gaussian tail function and inverse
# ---------------------------------------------------------------------------


def q_function(x):
    """Upper-tail probability of the standard normal distribution.

    ``Q(x) = P(Z > x) = erfc(x / sqrt(2)) / 2``. Strictly decreasing, with
    range (0, 1); underflows smoothly to 0 for ``x`` beyond about 38.
    Accepts scalars or arrays.
    """
    return 0.5 * _special.erfc(np.asarray(x, dtype=float) / _SQRT2)


def normal_pdf(x):
    """Standard normal density ``exp(-x^2 / 2) / sqrt(2 pi)``."""
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


# Abramowitz & Stegun 26.2.23 rational approximation, |error| < 4.5e-4.
_AS_C = (2.515517, 0.802853, 0.010328)
_AS_D = (1.432788, 0.189269, 0.001308)


def _q_inverse_seed(p: np.ndarray) -> np.ndarray:
    # valid for p in (0, 0.5]
    t = np.sqrt(-2.0 * np.log(p))
    num = (_AS_C[2] * t + _AS_C[1]) * t + _AS_C[0]
    den = ((_AS_D[2] * t + _AS_D[1]) * t + _AS_D[0]) * t + 1.0
    return t - num / den


def q_inverse(p):
    """Inverse of :func:`q_function` on the open interval (0, 1).

    A rational seed (Abramowitz & Stegun 26.2.23) is polished by Newton
    iterations on ``Q(x) - p``; elements that fail to converge fall back
    to bisection. The residual ``Q(result) - p`` is at rounding level
    for ``p`` down to about 1e-290; beyond that the density underflows
    and the seed accuracy (about 4.5e-4 absolute) is returned. For
    ``p > 0.5`` the complement ``1 - p`` caps the reachable absolute
    accuracy at ``ulp(1) / (2 pdf(x))``, the binary64 representation
    limit of the upper branch. Accepts scalars or arrays; negative
    results for ``p > 0.5``, exactly zero at ``p = 0.5``.
    """
    arr = np.asarray(p, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0)):
        raise DomainError("q_inverse requires 0 < p < 1")
    tail = np.minimum(arr, 1.0 - arr)
    # p > 1 - 1e-16 rounds 1-p to 0; keep log() finite
    tail = np.maximum(tail, 5e-324)
    x = _q_inverse_seed(np.atleast_1d(tail))
    t = np.atleast_1d(tail)
    for _ in range(8):
        step = (q_function(x) - t) / np.maximum(normal_pdf(x), 5e-324)
        x = x + step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(x))):
            break
    # Newton is reliable here; bisection mops up any stragglers.
    bad = ~(np.abs(q_function(x) - t) <= 1e-9 * t + 1e-300)
    if np.any(bad):
        for i in np.nonzero(bad)[0]:
            ti = float(t[i])
            x[i] = bisect_root(
                lambda v: float(q_function(v)) - ti,
                0.0,
                40.0,
                ToleranceConfig(abs_tol=1e-15, rel_tol=1e-15, max_iter=120),
            )
    x = np.where(np.atleast_1d(arr) > 0.5, -x, x)
    x = np.where(np.atleast_1d(arr) == 0.5, 0.0, x)
    if np.ndim(p) == 0:
        return float(x[0])
    return x


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: ToleranceConfig | None = None,
) -> float:
    """Root of a sign-changing function by plain bisection.

    ``f(lo)`` and ``f(hi)`` must have opposite signs (or one may be zero).
    Returns the bracket midpoint once the width drops below
    ``max(abs_tol, rel_tol * |mid|)``.

    Raises
    ------
    BracketError
        If the endpoint values share a sign.
    ConvergenceError
        If ``max_iter`` bisections do not shrink the bracket enough.
    """
    tol = tol or ToleranceConfig()
    lo = float(lo)
    hi = float(hi)
    if lo > hi:
        lo, hi = hi, lo
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(
            f"no sign change on [{lo:g}, {hi:g}]: f(lo)={flo:g}, f(hi)={fhi:g}"
        )
    for _ in range(tol.max_iter):
        mid = 0.5 * (lo + hi)
        if (hi - lo) < max(tol.abs_tol, tol.rel_tol * abs(mid)):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    raise ConvergenceError(
        f"bisection did not reach tolerance within {tol.max_iter} iterations"
    )


def bisect_root_many(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    tol: ToleranceConfig | None = None,
) -> np.ndarray:
    """Vectorised bisection: one independent bracket per array element.

    Same contract as :func:`bisect_root`, applied elementwise to a
    function that maps an array of abscissae to an array of values.
    """
    tol = tol or ToleranceConfig()
    lo, hi = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float))
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    swap = lo > hi
    if np.any(swap):
        lo[swap], hi[swap] = hi[swap].copy(), lo[swap].copy()
    flo = np.asarray(f(lo), dtype=float)
    fhi = np.asarray(f(hi), dtype=float)
    bad = ((flo > 0.0) == (fhi > 0.0)) & (flo != 0.0) & (fhi != 0.0)
    if np.any(bad):
        raise BracketError(f"{int(bad.sum())} of {bad.size} brackets have no sign change")
    for _ in range(tol.max_iter):
        mid = 0.5 * (lo + hi)
        if np.all((hi - lo) < np.maximum(tol.abs_tol, tol.rel_tol * np.abs(mid))):
            return mid
        fm = np.asarray(f(mid), dtype=float)
        towards_lo = (fm > 0.0) == (flo > 0.0)
        lo = np.where(towards_lo, mid, lo)
        flo = np.where(towards_lo, fm, flo)
        hi = np.where(towards_lo, hi, mid)
    raise ConvergenceError(
        f"vector bisection did not reach tolerance within {tol.max_iter} iterations"
    )


# ---------------------------------------------------------------------------
# Derivative-free minimisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NelderMeadResult:
    """Outcome of :func:`nelder_mead_minimize`.

    ``converged`` is False when the iteration budget ran out; the best
    point found so far is still returned.
    """

    x: np.ndarray
    fun: float
    iterations: int
    converged: bool


def nelder_mead_minimize(
    objective: Callable[[np.ndarray], float],
    init: Sequence[float] | np.ndarray,
    tol: ToleranceConfig | None = None,
) -> NelderMeadResult:
    """Minimise a low-dimensional objective with the Nelder-Mead simplex.

    Backed by :func:`scipy.optimize.minimize`; the simplex diameter and
    function spread both shrink below ``tol.abs_tol`` at convergence, and
    the returned value never exceeds ``objective(init)``.
    """
    tol = tol or ToleranceConfig()
    x0 = np.asarray(init, dtype=float)
    f0 = float(objective(x0))
    if not math.isfinite(f0):
        raise DomainError("objective is not finite at the initial point")
    res = _optimize.minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "xatol": tol.abs_tol,
            "fatol": tol.abs_tol,
            "maxiter": tol.max_iter,
            "maxfev": 4 * tol.max_iter,
        },
    )
    x = np.asarray(res.x, dtype=float)
    fun = float(res.fun)
    if fun > f0:  # scipy already returns the best vertex; keep the contract airtight
        x, fun = x0, f0
    return NelderMeadResult(x=x, fun=fun, iterations=int(res.nit), converged=bool(res.success))


def finite_difference(f, x, step: float):
    """Central-difference derivative estimate.

    For scalar ``x`` returns the scalar derivative ``(f(x+h) - f(x-h)) / 2h``;
    for a vector returns the gradient estimated one coordinate at a time.
    """
    h = float(step)
    if np.ndim(x) == 0:
        x0 = float(x)
        return (f(x0 + h) - f(x0 - h)) / (2.0 * h)
    x0 = np.asarray(x, dtype=float)
    grad = np.empty_like(x0)
    for k in range(x0.size):
        hi = x0.copy()
        lo = x0.copy()
        hi[k] += h
        lo[k] -= h
        grad[k] = (f(hi) - f(lo)) / (2.0 * h)
    return grad
