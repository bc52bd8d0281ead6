"""Higher-order derivatives of structured Laplace-transform expressions.

Every provider returns *scaled* derivatives D_k = s^k f^(k)(s), i.e. the
derivatives of u -> f(s u) at u = 1. They stay O(1) where raw derivatives
would span dozens of decades, and Leibniz / Faa di Bruno apply to them
unchanged. Providers must also be callable, ideally on complex s, so the
difference oracle can check them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

import numpy as np
from scipy.special import comb, factorial


class MissingDerivativeProvider(TypeError):
    """A factor in a derivative expression has no closed-form derivatives."""


@runtime_checkable
class DerivativeProvider(Protocol):
    def __call__(self, s): ...

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray: ...


def _require(obj, role: str) -> None:
    if not (callable(obj) and callable(getattr(obj, "scaled_derivatives", None))):
        raise MissingDerivativeProvider(
            f"{role} {obj!r} does not expose scaled_derivatives(s, n)")


def falling(x: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= x - j
    return out


@dataclass(frozen=True)
class DerivativeSeries:
    """Derivatives f^(0)(s)..f^(N-1)(s) of a function at one point."""

    scaled: np.ndarray
    point: float

    def __post_init__(self):
        if len(self.scaled) < 1:
            raise ValueError("a derivative series needs at least the function value")

    @property
    def values(self) -> np.ndarray:
        k = np.arange(len(self.scaled))
        return self.scaled / float(self.point) ** k

    def __len__(self) -> int:
        return len(self.scaled)

    def taylor_terms(self, count: int | None = None) -> np.ndarray:
        """(-s)^n/n! f^(n)(s) for n < count."""
        count = len(self) if count is None else count
        n = np.arange(count)
        return (-1.0) ** n * self.scaled[:count] / factorial(n)


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, s):
        return self.value + 0.0 * s

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        out = np.zeros(n + 1)
        out[0] = self.value
        return out


@dataclass(frozen=True)
class RationalPower:
    """(1 + c s)^(-a)."""

    c: float
    a: float

    def __call__(self, s):
        return (1.0 + self.c * s) ** (-self.a)

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        q = self.c * s
        x = q / (1.0 + q)
        base = (1.0 + q) ** (-self.a)
        return np.array([falling(-self.a, k) * x ** k * base for k in range(n + 1)])


@dataclass(frozen=True)
class PowerLaw:
    """coef * s^power."""

    coef: float
    power: float

    def __call__(self, s):
        return self.coef * s ** self.power

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        base = self.coef * s ** self.power
        return np.array([falling(self.power, k) * base for k in range(n + 1)])


class Sum:
    def __init__(self, *terms):
        for t in terms:
            _require(t, "summand")
        self.terms = terms

    def __call__(self, s):
        return sum(t(s) for t in self.terms)

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        return np.sum([t.scaled_derivatives(s, n) for t in self.terms], axis=0)


def leibniz(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Scaled derivatives of a product from those of its two factors."""
    n = len(a) - 1
    out = np.empty(n + 1)
    for m in range(n + 1):
        k = np.arange(m + 1)
        out[m] = np.sum(comb(m, k) * a[k] * b[m - k])
    return out


def complete_bell(x: np.ndarray) -> np.ndarray:
    """Y_0..Y_n of the complete Bell polynomial at (x_1..x_n); x[0] is ignored."""
    n = len(x) - 1
    y = np.zeros(n + 1)
    y[0] = 1.0
    for m in range(n):
        k = np.arange(m + 1)
        y[m + 1] = np.sum(comb(m, k) * y[m - k] * x[k + 1])
    return y


class Product:
    def __init__(self, *factors):
        if not factors:
            raise ValueError("empty product")
        for fac in factors:
            _require(fac, "factor")
        self.factors = factors

    def __call__(self, s):
        out = 1.0
        for fac in self.factors:
            out = out * fac(s)
        return out

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        out = self.factors[0].scaled_derivatives(s, n)
        for fac in self.factors[1:]:
            out = leibniz(out, fac.scaled_derivatives(s, n))
        return out


class Exp:
    """exp(coef * g(s)), differentiated by Faa di Bruno."""

    def __init__(self, exponent, coef: float = 1.0):
        _require(exponent, "exponent")
        self.exponent = exponent
        self.coef = coef

    def __call__(self, s):
        return np.exp(self.coef * self.exponent(s))

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        g = self.coef * np.asarray(self.exponent.scaled_derivatives(s, n), dtype=float)
        return math.exp(g[0]) * complete_bell(g)


def derivative_stack(f, s: float, n_max: int) -> DerivativeSeries:
    """f^(0)(s)..f^(n_max)(s) of a structured provider expression."""
    _require(f, "function")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if not s > 0:
        raise ValueError("derivatives are evaluated at s > 0")
    return DerivativeSeries(np.asarray(f.scaled_derivatives(s, n_max), dtype=float), float(s))


def _ridders(g: Callable[[float], float], n: int, h0: float, levels: int = 10,
             shrink: float = 1.4) -> tuple[float, float]:
    k = np.arange(n + 1)
    weights = (-1.0) ** k * comb(n, k)

    def central(h):
        return float(np.dot(weights, [g(1.0 + (n / 2.0 - j) * h) for j in k])) / h ** n

    tab = np.zeros((levels, levels))
    best, err = math.nan, math.inf
    h = h0
    for i in range(levels):
        tab[i, 0] = central(h)
        fac = shrink ** 2
        for j in range(1, i + 1):
            tab[i, j] = (tab[i, j - 1] * fac - tab[i - 1, j - 1]) / (fac - 1.0)
            fac *= shrink ** 2
            e = max(abs(tab[i, j] - tab[i, j - 1]), abs(tab[i, j] - tab[i - 1, j - 1]))
            if e <= err:
                err, best = e, tab[i, j]
        if i and abs(tab[i, i] - tab[i - 1, i - 1]) >= 2.0 * err:
            break
        h /= shrink
    if math.isnan(best):
        best, err = tab[0, 0], math.inf
    return best, err


@dataclass(frozen=True)
class OracleResult:
    value: float
    error: float
    method: str


def _contour_samples(f: Callable, s: float, points: int):
    base = abs(s) if s != 0 else 1.0
    f0 = complex(f(complex(s)))
    eps = 1e-20
    # complex-step slope gives the log-derivative scale of f at s
    steep = abs(complex(f(complex(s, eps * base))).imag / eps / f0.real) if f0.real else 0.0
    if not math.isfinite(steep):
        raise ValueError("non-finite slope")
    radius = base * min(0.5, 1.0 / (1.0 + steep))
    roots = np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.array([complex(f(complex(s + radius * z))) for z in roots])
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite value on the contour")
    return radius, roots, vals


def difference_series(f: Callable, s: float, n_max: int, *, points: int = 64) -> list[OracleResult]:
    """Oracle estimates of f^(0..n_max)(s) sharing one set of function values.

    If f accepts complex arguments, uses the difference stencil on a circle
    around s (Lyness-Moler), whose error decays geometrically in the point
    count. The radius is |s|/2, shrunk for steep f so that |f| stays
    comparable to f(s) on the circle. Otherwise falls back to real central
    differences of u -> f(s u) with Ridders-Richardson step extrapolation.
    """
    if n_max < 0:
        raise ValueError("n must be nonnegative")
    try:
        radius, roots, vals = _contour_samples(f, s, points)
    except (TypeError, ValueError, ZeroDivisionError):
        return [OracleResult(float(np.real(f(s))), 0.0, "value")] + [
            _real_estimate(f, s, n) for n in range(1, n_max + 1)]
    out = [OracleResult(float(np.real(f(s))), 0.0, "value")]
    floor = 4.0 * np.finfo(float).eps * np.max(np.abs(vals))
    for n in range(1, n_max + 1):
        coef = vals * roots ** (-n)
        full = np.mean(coef).real
        half = np.mean(coef[::2]).real
        scale = math.factorial(n) / radius ** n
        # the half-resolution rule aliases much earlier, so this bounds the error
        out.append(OracleResult(float(scale * full), float(scale * (abs(full - half) + floor)), "contour"))
    return out


def _real_estimate(f: Callable, s: float, n: int) -> OracleResult:
    if s == 0:
        g = lambda u: float(f(u - 1.0))
        value, err = _ridders(g, n, 1.6 / (n + 1))
        return OracleResult(value, err, "real-richardson")
    g = lambda u: float(f(s * u))
    value, err = _ridders(g, n, 1.0 / (n + 1))
    return OracleResult(value / s ** n, err / abs(s) ** n, "real-richardson")


def difference_estimate(f: Callable, s: float, n: int, *, points: int = 64) -> OracleResult:
    """n-th derivative of f at s from function values only, with an error estimate."""
    return difference_series(f, s, n, points=points)[n]


def finite_difference_oracle(f: Callable, s: float, n: int) -> float:
    """Independent n-th derivative estimate of f at s, for cross-checking providers."""
    return difference_estimate(f, s, n).value
