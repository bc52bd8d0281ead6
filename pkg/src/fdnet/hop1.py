"""UL hop (HD UL node -> typical FD BS) success probabilities and decision rules.

With MRC the desired power is chi-square with 2 N_R degrees of freedom, so

    P = sum_{n < N_R} (-s)^n / n! L^(n)(s),   s = theta R~^alpha / p_ul,

where L is the Laplace transform of the SI plus PPP interference. Each term is
nonnegative because L is completely monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .derivatives import Exp, PowerLaw, Product, RationalPower, derivative_stack, difference_series
from .kernels import KernelContext, UpsilonKernel, mean_mth_distance
from .network import AntennaConfig, Combiner, InvalidParameter, ReceiverStrategy
from .si import GammaSiFit
from .special import gauss_2f1_neg

# allowed gap between the derivative engine and the difference oracle, in probability
ORACLE_TOL = 1e-6
# numerical slack on the nonnegativity of individual summands
TERM_SLACK = 1e-12
BRACKET_SLACK = 1e-9


@dataclass(frozen=True)
class HopReport:
    p_success: float
    p_lower: float
    p_upper: float
    method: str
    s_point: float
    terms: tuple[float, ...] = ()
    flags: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.flags


@dataclass(frozen=True)
class Decision:
    prefer: bool
    margin: float
    lhs: float
    rhs: float


def s_point_hop1(theta: float, ctx: KernelContext) -> float:
    p = ctx.params
    if theta <= 0:
        raise InvalidParameter("theta must be positive")
    return theta * p.r_ul ** p.alpha / p.p_ul


def si_factor(s_fit: GammaSiFit | None, ctx: KernelContext):
    if s_fit is None:
        return None
    return RationalPower(s_fit.scale_b * ctx.params.p_dl, s_fit.shape_a)


def ppp_factor(ctx: KernelContext, s_ref: float, bound: str | None = None, cutoff: float = 0.0):
    """exp(-lambda Upsilon) with the exact kernel or one of its closed-form bounds."""
    p = ctx.params
    if bound is None:
        exponent = UpsilonKernel(ctx, s_ref, cutoff=cutoff)
    else:
        lo, hi = kernels.upsilon_closed_bounds(1.0, ctx)
        coef = {"min": lo, "max": hi}[bound]
        exponent = PowerLaw(coef, p.delta)
    return Exp(exponent, -p.lam)


def transform(*factors):
    factors = [f for f in factors if f is not None]
    return factors[0] if len(factors) == 1 else Product(*factors)


def success_sum(f, s: float, count: int, verify: bool = False) -> tuple[float, np.ndarray, list[str]]:
    """Truncated derivative sum of a transform plus any consistency flags."""
    flags = []
    if count < 1:
        return 0.0, np.zeros(0), ["no degrees of freedom left for the desired signal"]
    series = derivative_stack(f, s, count - 1)
    terms = series.taylor_terms()
    if np.any(terms < -TERM_SLACK):
        flags.append("negative summand in the derivative sum")
    p = float(np.sum(terms))
    if verify:
        oracle = difference_series(f, s, count - 1)
        ref = sum((-1.0) ** n * o.value * s ** n / math.factorial(n) for n, o in enumerate(oracle))
        if abs(ref - p) > ORACLE_TOL:
            flags.append(f"derivative oracle disagrees by {abs(ref - p):.2e}")
    return min(max(p, 0.0), 1.0), terms, flags


def bracket_flags(p: float, lower: float, upper: float) -> list[str]:
    """Flag an exact value that escapes its closed-form bounds.

    The bounds compare the transforms pointwise, which does not order their
    derivative sums when more than one term is summed, so this can happen
    for multi-antenna receivers.
    """
    if p < lower - BRACKET_SLACK:
        return [f"exact value below closed-form lower bound by {lower - p:.2e}"]
    if p > upper + BRACKET_SLACK:
        return [f"exact value above closed-form upper bound by {p - upper:.2e}"]
    return []


def laplace_i0(s: float, ctx: KernelContext, si_fit: GammaSiFit | None) -> float:
    """Laplace transform of SI plus PPP interference at the typical FD BS."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return 1.0
    si = 1.0 if si_fit is None else (1.0 + s * si_fit.scale_b * ctx.params.p_dl) ** (-si_fit.shape_a)
    return si * math.exp(-ctx.params.lam * kernels.upsilon(s, ctx))


def _bounded(count: int, theta: float, ctx: KernelContext, si_fit: GammaSiFit | None,
             cutoff_si: bool = False) -> tuple[float, float]:
    s = s_point_hop1(theta, ctx)
    si = None if cutoff_si else si_factor(si_fit, ctx)
    lower = success_sum(transform(si, ppp_factor(ctx, s, "max")), s, count)[0]
    upper = success_sum(transform(si, ppp_factor(ctx, s, "min")), s, count)[0]
    return lower, upper


def p_suc_hop1_bounds(theta: float, ctx: KernelContext, ant: AntennaConfig,
                      si_fit: GammaSiFit) -> tuple[float, float]:
    """Closed-form lower/upper success bounds from the Upsilon power-law bounds."""
    return _bounded(ant.n_rx, theta, ctx, si_fit)


def p_suc_hop1(theta: float, ctx: KernelContext, ant: AntennaConfig, si_fit: GammaSiFit,
               verify: bool = True) -> HopReport:
    """UL success probability with MRC at the FD BS."""
    s = s_point_hop1(theta, ctx)
    f = transform(si_factor(si_fit, ctx), ppp_factor(ctx, s))
    p, terms, flags = success_sum(f, s, ant.n_rx, verify)
    lo, hi = p_suc_hop1_bounds(theta, ctx, ant, si_fit)
    flags += bracket_flags(p, lo, hi)
    return HopReport(p, lo, hi, "exact-integral", s, tuple(terms), tuple(flags))


def alzer_upper(laplace, n: int, s_prime: float) -> float:
    """Upper bound on the n-term derivative sum from Alzer's incomplete-gamma inequality."""
    if n < 2:
        raise InvalidParameter("the Alzer bound needs n > 1")
    beta = math.exp(-math.lgamma(n + 1) / n)
    return float(sum((-1) ** (k - 1) * math.comb(n, k) * laplace(k * beta * s_prime)
                     for k in range(1, n + 1)))


def _hd_success(theta: float, ctx: KernelContext, n_rx: int) -> float:
    # HD baseline: UL nodes of power p_ul only, no SI and no FD BS interference
    p = ctx.params
    s = s_point_hop1(theta, ctx)
    coef = ctx.plane_constant * p.p_ul ** p.delta
    return success_sum(Exp(PowerLaw(coef, p.delta), -p.lam), s, n_rx)[0]


def throughput_gain_min(theta: float, ctx: KernelContext, si_fit: GammaSiFit,
                        ant: AntennaConfig | None = None) -> tuple[float, float, float]:
    """(SE_FD_min, SE_HD, TG_min) of FD against the HD baseline.

    FD uses both halves of the resources, so its rate carries a factor 2. For
    N_R = 1 this is the closed form; larger N_R sums the same number of
    derivative terms on both sides.
    """
    ant = ant or AntennaConfig()
    rate = math.log2(1.0 + theta)
    s = s_point_hop1(theta, ctx)
    p_fd = success_sum(transform(si_factor(si_fit, ctx), ppp_factor(ctx, s, "max")), s, ant.n_rx)[0]
    p_hd = _hd_success(theta, ctx, ant.n_rx)
    se_fd, se_hd = 2.0 * p_fd * rate, p_hd * rate
    return se_fd, se_hd, se_fd / se_hd


@dataclass(frozen=True)
class DensityThreshold:
    lam_max: float
    feasible: bool


def fd_density_threshold(theta: float, ctx: KernelContext, si_fit: GammaSiFit) -> DensityThreshold:
    """Largest density at which single-antenna FD still beats HD in the minimum-gain sense."""
    p = ctx.params
    x = theta * p.p_dl * p.r_ul ** p.alpha / p.p_ul
    log_arg = 2.0 / (1.0 + si_fit.scale_b * x) ** si_fit.shape_a
    if not log_arg > 1.0:
        return DensityThreshold(0.0, False)
    lam = p.alpha * math.sin(2.0 * math.pi / p.alpha) / (2.0 * math.pi ** 2 * x ** p.delta) * math.log(log_arg)
    return DensityThreshold(lam, True)


def p_suc_hop1_pzf_m(theta: float, ctx: KernelContext, ant: AntennaConfig, si_fit: GammaSiFit,
                     m_cancel: int, verify: bool = True) -> HopReport:
    """PZF cancelling the m nearest FD BSs, with the nearest-BS hole at mean distance d_M."""
    if not 0 <= m_cancel <= ant.n_rx - 1:
        raise InvalidParameter("m_cancel must lie in [0, n_rx - 1]")
    if m_cancel == 0:
        return p_suc_hop1(theta, ctx, ant, si_fit, verify)
    s = s_point_hop1(theta, ctx)
    cutoff = mean_mth_distance(ctx.params.lam, m_cancel)
    f = transform(si_factor(si_fit, ctx), ppp_factor(ctx, s, cutoff=cutoff))
    p, terms, flags = success_sum(f, s, ant.n_rx - m_cancel, verify)
    return HopReport(p, math.nan, math.nan, "exact-integral", s, tuple(terms), tuple(flags))


def p_suc_hop1_pzf_si(theta: float, ctx: KernelContext, ant: AntennaConfig, m_cancel: int = 0,
                      verify: bool = True) -> HopReport:
    """PZF nulling the SI channel (and optionally the m nearest FD BSs as well)."""
    if ant.n_rx < 2:
        raise InvalidParameter("PZF_SI needs n_rx >= 2")
    if not 0 <= m_cancel <= ant.n_rx - 2:
        raise InvalidParameter("SI plus m_cancel nearest must leave one degree of freedom")
    s = s_point_hop1(theta, ctx)
    cutoff = mean_mth_distance(ctx.params.lam, m_cancel) if m_cancel else 0.0
    p, terms, flags = success_sum(ppp_factor(ctx, s, cutoff=cutoff), s, ant.n_rx - 1 - m_cancel, verify)
    lo, hi = (math.nan, math.nan) if m_cancel else _bounded(ant.n_rx - 1, theta, ctx, None, True)
    if not m_cancel:
        flags += bracket_flags(p, lo, hi)
    return HopReport(p, lo, hi, "exact-integral", s, tuple(terms), tuple(flags))


def p_suc_hop1_strategy(theta: float, ctx: KernelContext, ant: AntennaConfig, si_fit: GammaSiFit,
                        strategy: ReceiverStrategy, verify: bool = False) -> HopReport:
    kind = strategy.kind
    if kind is Combiner.MRC:
        return p_suc_hop1(theta, ctx, ant, si_fit, verify)
    if kind is Combiner.PZF_NEAREST:
        return p_suc_hop1_pzf_m(theta, ctx, ant, si_fit, strategy.m, verify)
    if kind is Combiner.PZF_SI:
        return p_suc_hop1_pzf_si(theta, ctx, ant, 0, verify)
    if kind is Combiner.PZF_SI_PLUS_NEAREST:
        return p_suc_hop1_pzf_si(theta, ctx, ant, strategy.m, verify)
    raise InvalidParameter(f"{strategy} is not a hop-1 receiver")


def prefer_si_cancellation(theta: float, ctx: KernelContext, ant: AntennaConfig,
                           si_fit: GammaSiFit) -> Decision:
    """Whether nulling the SI beats nulling the nearest FD BS (margin = lhs - rhs)."""
    p = ctx.params
    if theta <= 0:
        raise InvalidParameter("theta must be positive")
    lhs = 4.0 * si_fit.shape_a / math.pi * math.log1p(
        si_fit.scale_b * theta * p.p_dl / p.p_ul * p.r_ul ** p.alpha)
    x = p.p_ul / (theta * p.p_dl * (2.0 * p.r_ul * math.sqrt(p.lam)) ** p.alpha)
    rhs = gauss_2f1_neg(1.0, p.delta, 1.0 + p.delta, -x)
    return Decision(lhs >= rhs, lhs - rhs, lhs, rhs)
