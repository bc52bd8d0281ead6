"""Interference kernels Psi and Upsilon of the marked PPP.

With K^ = s p_dl and K~ = s p_ul, an FD BS at distance r contributes
f^(r) = K^/(r^a + K^) and its UL mark contributes f~(d) = K~/(d^a + K~).
Both integrate over the plane to C K^delta with C = 2 pi^2/(a sin(2 pi/a)),
so the PPP exponent splits exactly into

    Upsilon(s) = C (p_dl^delta + p_ul^delta) s^delta - J(s),
    J(s) = 2 pi int (1 - A(r)) (1 - Psi(s, r)) r dr,

where only the overlap J needs quadrature. J decays like r^{1-2 alpha}, so its
tail is negligible beyond a few hundred widths and is added back analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import comb, gammaln

from .derivatives import DerivativeSeries, falling
from .network import InvalidParameter, NetworkParams
from .special import NonConvergence, adaptive_quad

ORDER = 12


@dataclass(frozen=True)
class KernelContext:
    params: NetworkParams
    quad_tol: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.quad_tol <= 1e-3:
            raise InvalidParameter("quad_tol must lie in (0, 1e-3]")

    @property
    def plane_constant(self) -> float:
        a = self.params.alpha
        return 2.0 * math.pi ** 2 / (a * math.sin(2.0 * math.pi / a))


def _distance_pow(s_r, r, phi, r_ul, alpha):
    d2 = r * r + r_ul * r_ul + 2.0 * r * r_ul * np.cos(phi)
    return np.maximum(d2, 0.0) ** (alpha / 2.0)


def psi(s: float, r: float, ctx: KernelContext) -> float:
    """Mark-averaged UL-node transmissibility Psi(s, r), by adaptive quadrature."""
    p = ctx.params
    if s == 0 or p.p_ul == 0:
        return 1.0
    k = s * p.p_ul
    if r == 0:
        return 1.0 / (1.0 + k * p.r_ul ** (-p.alpha))

    def integrand(phi):
        da = _distance_pow(None, r, phi, p.r_ul, p.alpha)
        return da / (da + k)

    width = k ** (1.0 / p.alpha) / max(r, p.r_ul)
    pts = tuple(math.pi - width * 2.0 ** -j for j in range(0, 30) if width * 2.0 ** -j < math.pi)
    res = adaptive_quad(integrand, 0.0, math.pi, ctx.quad_tol * 1e-2, points=pts[:40], limit=1000)
    if not res.converged:
        raise NonConvergence(f"Psi(s={s}, r={r}) quadrature reached only {res.error:.2e}")
    return res.value / math.pi


def psi_bounds(s: float, r: float, ctx: KernelContext) -> tuple[float, float]:
    p = ctx.params
    gap = abs(r - p.r_ul)
    lower = 0.0 if gap == 0 else 1.0 / (1.0 + s * p.p_ul * gap ** (-p.alpha))
    upper = 1.0 / (1.0 + s * p.p_ul * (r + p.r_ul) ** (-p.alpha))
    return lower, upper


def upsilon_closed_bounds(s: float, ctx: KernelContext) -> tuple[float, float]:
    p = ctx.params
    d = p.delta
    core = (p.p_ul ** d + p.p_dl ** d) * math.pi ** 2 * s ** d / (p.alpha * math.sin(2.0 * math.pi / p.alpha))
    return (1.0 + d) * core, 2.0 * core


def mean_mth_distance(lam: float, m: int) -> float:
    """Mean distance to the m-th nearest point of a PPP of density lam."""
    if lam <= 0 or m < 1:
        raise InvalidParameter("need lambda > 0 and m >= 1")
    return math.exp(gammaln(m + 0.5) - gammaln(m)) / math.sqrt(lam * math.pi)


def _geometric(lo: float, hi: float, ratio: float) -> list[float]:
    out, x = [], lo
    while x < hi:
        out.append(x)
        x *= ratio
    out.append(hi)
    return out


def _panels(breaks, order=ORDER):
    t, w = leggauss(order)
    b = np.unique(np.asarray(breaks, dtype=float))
    a, c = b[:-1], b[1:]
    half = 0.5 * (c - a)
    nodes = (0.5 * (a + c))[:, None] + half[:, None] * t[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def _angle_breaks(rel_width: float) -> list[float]:
    """Panels on [0, pi] graded toward pi, where the UL mark comes closest."""
    offsets = _geometric(min(0.25 * rel_width, 0.5), math.pi, 1.8)
    return sorted({0.0, math.pi, *(math.pi - o for o in offsets if o < math.pi)})


def _rational_scaled(q: np.ndarray, n: int) -> np.ndarray:
    """Scaled derivatives of x = q/(1+q) under q -> q u: shape (n+1, *q.shape)."""
    x = q / (1.0 + q)
    out = np.empty((n + 1,) + np.shape(q), dtype=np.result_type(q, float))
    out[0] = x
    tail = 1.0 - x
    xk = np.ones_like(x)
    for k in range(1, n + 1):
        xk = xk * x
        out[k] = (-1.0) ** (k + 1) * math.factorial(k) * xk * tail
    return out


class UpsilonKernel:
    """Upsilon on a quadrature grid frozen at a reference point s_ref.

    Freezing the nodes makes the discretised Upsilon an explicit smooth
    function of s, so its closed-form derivatives and its values (also at
    complex s near s_ref) describe one and the same function. ``cutoff``
    switches to the nearest-BS-cancelled exponent, where FD BSs inside the
    disc of that radius contribute only through their UL marks.
    """

    def __init__(self, ctx: KernelContext, s_ref: float, cutoff: float = 0.0):
        if not s_ref > 0:
            raise ValueError("s_ref must be positive")
        p = ctx.params
        self.ctx, self.s_ref, self.cutoff = ctx, float(s_ref), float(cutoff)
        self.active = p.p_ul > 0 and p.p_dl > 0
        w_dl = (s_ref * p.p_dl) ** (1.0 / p.alpha) if p.p_dl > 0 else p.r_ul
        w_ul = (s_ref * p.p_ul) ** (1.0 / p.alpha) if p.p_ul > 0 else p.r_ul
        big = max(w_dl, w_ul, p.r_ul, cutoff)
        small = min(w_dl, w_ul, p.r_ul)
        self.r_max = 400.0 * big
        breaks = [0.0, *_geometric(0.125 * small, self.r_max, 1.5)]
        if w_ul < p.r_ul:
            for o in _geometric(0.125 * w_ul, p.r_ul, 1.6):
                breaks += [p.r_ul - o, p.r_ul + o]
        if cutoff > 0:
            breaks.append(cutoff)
        breaks = [b for b in breaks if 0.0 <= b <= self.r_max]
        r, wr = _panels(breaks)
        phi, wphi = _panels(_angle_breaks(w_ul / p.r_ul))
        self.r = r
        self.wr = 2.0 * math.pi * r * wr
        self.wphi = wphi / math.pi
        self.outer = r > cutoff
        self.inner = ~self.outer
        self._dl_gain = p.p_dl * r ** (-p.alpha)
        d2 = r[:, None] ** 2 + p.r_ul ** 2 + 2.0 * r[:, None] * p.r_ul * np.cos(phi)[None, :]
        self._ul_gain = p.p_ul * np.maximum(d2, 1e-300) ** (-p.alpha / 2.0)

    def _overlap(self, s, n: int):
        """Scaled derivatives of J restricted to r > cutoff, plus of the inner F^ disc."""
        fdl = _rational_scaled(s * self._dl_gain, n)
        ful = _rational_scaled(s * self._ul_gain, n)
        mean_ul = ful @ self.wphi
        j = np.zeros(n + 1, dtype=fdl.dtype)
        disc = np.zeros(n + 1, dtype=fdl.dtype)
        w_out = self.wr * self.outer
        for m in range(n + 1):
            k = np.arange(m + 1)
            j[m] = np.sum(comb(m, k)[:, None] * fdl[k] * mean_ul[m - k], axis=0) @ w_out
        if self.cutoff > 0:
            disc = fdl @ (self.wr * self.inner)
        p = self.ctx.params
        # overlap beyond r_max ~ K^ K~ r^{2-2a}/(2a-2), proportional to s^2
        tail = 2.0 * math.pi * s * s * p.p_dl * p.p_ul * self.r_max ** (2.0 - 2.0 * p.alpha) / (2.0 * p.alpha - 2.0)
        j[0] += tail
        if n >= 1:
            j[1] += 2.0 * tail
        if n >= 2:
            j[2] += 2.0 * tail
        return j, disc

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        p = self.ctx.params
        c = self.ctx.plane_constant
        d = p.delta
        full = c * (p.p_dl ** d + p.p_ul ** d) * s ** d
        out = np.array([falling(d, k) * full for k in range(n + 1)])
        if self.active:
            j, disc = self._overlap(s, n)
            out = out - j.real - disc.real
        elif self.cutoff > 0 and p.p_dl > 0:
            out = out - self._overlap(s, n)[1].real
        return out

    def __call__(self, s):
        p = self.ctx.params
        c = self.ctx.plane_constant
        d = p.delta
        value = c * (p.p_dl ** d + p.p_ul ** d) * s ** d
        if self.active or (self.cutoff > 0 and p.p_dl > 0):
            j, disc = self._overlap(s, 0)
            value = value - disc[0] - (j[0] if self.active else 0.0)
        return value if isinstance(s, complex) or np.iscomplexobj(value) else float(value)


class PsiFactor:
    """Psi(s, r) at a fixed r, on a frozen angular grid, as a derivative provider."""

    def __init__(self, ctx: KernelContext, r: float, s_ref: float):
        p = ctx.params
        w_ul = (s_ref * p.p_ul) ** (1.0 / p.alpha) if p.p_ul > 0 else p.r_ul
        rel = w_ul / max(r, p.r_ul) if abs(r - p.r_ul) < w_ul else 1.0
        # at r close to R~ the mark can come within w_ul of the receiver
        rel = min(rel, max(abs(r - p.r_ul), w_ul) / max(r, p.r_ul))
        phi, wphi = _panels(_angle_breaks(rel), order=2 * ORDER)
        self.wphi = wphi / math.pi
        d2 = r * r + p.r_ul ** 2 + 2.0 * r * p.r_ul * np.cos(phi)
        self._gain = p.p_ul * np.maximum(d2, 1e-300) ** (-p.alpha / 2.0)

    def __call__(self, s):
        value = np.sum(self.wphi / (1.0 + s * self._gain))
        return complex(value) if np.iscomplexobj(value) else float(value)

    def scaled_derivatives(self, s: float, n: int) -> np.ndarray:
        # 1/(1+q) = 1 - q/(1+q)
        out = -_rational_scaled(s * self._gain, n) @ self.wphi
        out[0] += 1.0
        return out


def _overlap_adaptive(s: float, ctx: KernelContext, lo: float = 0.0) -> float:
    """J(s) over r > lo by nested adaptive quadrature (reference path)."""
    p = ctx.params
    k_dl, k_ul = s * p.p_dl, s * p.p_ul
    tol = ctx.quad_tol
    w_ul = k_ul ** (1.0 / p.alpha)

    def inner(r):
        def f(phi):
            da = _distance_pow(None, r, phi, p.r_ul, p.alpha)
            return k_ul / (da + k_ul)
        width = w_ul / max(r, p.r_ul)
        pts = tuple(math.pi - width * 2.0 ** -j for j in range(0, 25) if width * 2.0 ** -j < math.pi)
        res = adaptive_quad(f, 0.0, math.pi, tol * 1e-2, points=pts, limit=1000)
        return res.value / math.pi

    def outer(r):
        return 2.0 * math.pi * r * k_dl / (r ** p.alpha + k_dl) * inner(r)

    def tail(r_cut):
        return 2.0 * math.pi * k_dl * k_ul * r_cut ** (2.0 - 2.0 * p.alpha) / (2.0 * p.alpha - 2.0)

    marks = sorted({p.r_ul, k_dl ** (1.0 / p.alpha), w_ul, *(p.r_ul + o for o in (-w_ul, w_ul, -0.1 * w_ul, 0.1 * w_ul))})
    top = 50.0 * max(marks + [lo])
    pts = tuple(x for x in marks if lo < x < top)
    head = adaptive_quad(outer, lo, top, tol * 1e-2, points=pts, limit=1000)
    rest = adaptive_quad(outer, top, math.inf, tol * 1e-2, tail=tail)
    if not (head.converged and rest.converged):
        raise NonConvergence(f"Upsilon({s}) quadrature reached only {head.error + rest.error:.2e}")
    return head.value + rest.value


def upsilon(s: float, ctx: KernelContext, method: str = "grid") -> float:
    """PPP interference exponent Upsilon(s) [m^2].

    ``method="adaptive"`` evaluates the overlap by nested adaptive quadrature
    and serves as the reference for the default frozen-grid evaluation.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return 0.0
    p = ctx.params
    if method == "grid":
        return float(UpsilonKernel(ctx, s)(s))
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")
    _, top = upsilon_closed_bounds(s, ctx)
    if p.p_ul == 0 or p.p_dl == 0:
        return top
    return top - _overlap_adaptive(s, ctx)


def upsilon_pzf(s: float, m_cancel: int, ctx: KernelContext, method: str = "grid",
                cutoff: float | None = None) -> float:
    """Exponent with the m nearest FD BSs cancelled, approximated by a d_M hole.

    Inside the disc of radius d_M only the UL marks interfere. ``cutoff``
    overrides d_M directly.
    """
    if m_cancel < 1 and cutoff is None:
        raise InvalidParameter("m_cancel must be at least 1")
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return 0.0
    p = ctx.params
    radius = mean_mth_distance(p.lam, m_cancel) if cutoff is None else cutoff
    if method == "grid":
        return float(UpsilonKernel(ctx, s, cutoff=radius)(s))
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")
    c = ctx.plane_constant
    d = p.delta
    value = c * (p.p_ul ** d + p.p_dl ** d) * s ** d
    k_dl = s * p.p_dl
    if radius > 0 and k_dl > 0:
        disc = adaptive_quad(lambda r: 2.0 * math.pi * r * k_dl / (r ** p.alpha + k_dl), 0.0, radius,
                             ctx.quad_tol * 1e-2, points=(k_dl ** (1.0 / p.alpha),))
        value -= disc.value
    if p.p_ul > 0 and p.p_dl > 0:
        value -= _overlap_adaptive(s, ctx, lo=radius)
    return value


def upsilon_derivatives(s: float, n_max: int, ctx: KernelContext, cutoff: float = 0.0) -> DerivativeSeries:
    """Upsilon^(k)(s) for k <= n_max, differentiated under the integral sign."""
    if not s > 0:
        raise ValueError("s must be positive")
    kernel = UpsilonKernel(ctx, s, cutoff=cutoff)
    return DerivativeSeries(kernel.scaled_derivatives(s, n_max), float(s))
