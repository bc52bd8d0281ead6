"""Special functions and quadrature used by the analytic modules."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special


class NonConvergence(RuntimeError):
    """A numerical scheme failed to reach its tolerance."""


def regularized_gamma_ccdf(n: int, x: float) -> float:
    """Tail of a chi-square with 2n degrees of freedom: e^{-x} sum_{k<n} x^k/k!."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if x < 0:
        raise ValueError("x must be nonnegative")
    return float(special.gammaincc(n, x))


def _hyp2f1_series(a: float, b: float, c: float, x: float, tol: float = 1e-16) -> float:
    term, total = 1.0, 1.0
    for k in range(2000):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        if abs(term) <= tol * abs(total):
            return total
    raise NonConvergence(f"2F1 series did not converge at x={x}")


def gauss_2f1_neg(a: float, b: float, c: float, x: float, tol: float = 1e-12) -> float:
    """Gauss hypergeometric 2F1(a, b; c; x) for real x <= 0.

    Power series for |x| < 0.5. Otherwise the Euler integral
    Gamma(c)/(Gamma(b)Gamma(c-b)) int_0^1 t^{b-1}(1-t)^{c-b-1}(1-xt)^{-a} dt,
    split at t ~ 1/|x| where the integrand changes scale; needs c > b > 0.
    """
    if x > 0:
        raise ValueError("gauss_2f1_neg only handles x <= 0")
    if x == 0:
        return 1.0
    if abs(x) < 0.5:
        return _hyp2f1_series(a, b, c, x)
    if not c > b > 0:
        raise ValueError("Euler integral needs c > b > 0")

    t0 = min(0.5, 4.0 / abs(x))
    kernel = lambda t: (1.0 - x * t) ** (-a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        left = integrate.quad(lambda t: kernel(t) * (1.0 - t) ** (c - b - 1.0), 0.0, t0,
                              weight="alg", wvar=(b - 1.0, 0.0),
                              epsabs=0.0, epsrel=tol, limit=200, full_output=1)
        right = integrate.quad(lambda t: kernel(t) * t ** (b - 1.0), t0, 1.0,
                               weight="alg", wvar=(0.0, c - b - 1.0),
                               epsabs=0.0, epsrel=tol, limit=200, full_output=1)
    value = left[0] + right[0]
    err = left[1] + right[1]
    if len(left) > 3 or len(right) > 3 or err > 1e3 * tol * abs(value):
        raise NonConvergence(
            f"2F1({a}, {b}; {c}; {x}) Euler integral reached only {err:.2e} absolute error")
    log_norm = special.gammaln(c) - special.gammaln(b) - special.gammaln(c - b)
    return float(math.exp(log_norm) * value)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool

    def __iter__(self):
        return iter((self.value, self.error))


def adaptive_quad(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-9,
    *,
    tail: Callable[[float], float] | None = None,
    points: tuple[float, ...] | None = None,
    limit: int = 400,
) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of f over [lo, hi] with a relative tolerance.

    For hi = inf with ``tail`` given, ``tail(R)`` must estimate the integral
    over [R, inf). The range is truncated at the first R (doubling) where the
    tail is below tol times the finite part, and the tail is added back.
    Without ``tail`` the semi-infinite range goes to QUADPACK's 1/t mapping.
    ``points`` lists interior breakpoints (finite ranges only).
    """
    if hi < lo:
        raise ValueError("hi must not be below lo")
    if hi == lo:
        return QuadResult(0.0, 0.0, True)

    def run(a, b, pts=None):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            out = integrate.quad(f, a, b, epsabs=0.0, epsrel=tol, limit=limit,
                                 points=pts, full_output=1)
        # QUADPACK appends a message to the tuple only when ier != 0
        return out[0], out[1], len(out) == 3

    if math.isinf(hi) and tail is not None:
        cut = max(2.0 * abs(lo), 1.0) if lo >= 0 else 1.0
        total, err, ok = run(lo, cut)
        while abs(tail(cut)) > tol * abs(total) and cut < 1e300:
            nxt = 2.0 * cut
            seg, seg_err, seg_ok = run(cut, nxt)
            total, err, ok = total + seg, err + seg_err, ok and seg_ok
            cut = nxt
        rest = tail(cut)
        return QuadResult(total + rest, err + abs(rest), ok and err <= max(tol * abs(total), 1e-300) * 10)

    pts = None
    if points and not math.isinf(hi):
        pts = [p for p in points if lo < p < hi] or None
    value, err, ok = run(lo, hi, pts)
    ok = ok and err <= 10 * tol * abs(value) + 1e-300
    return QuadResult(value, err, ok)
