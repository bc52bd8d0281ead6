"""DL hop (FD BS -> HD DL node) success, the joint two-hop bound and DL-side rules."""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels
from .derivatives import Constant, RationalPower
from .hop1 import Decision, HopReport, bracket_flags, p_suc_hop1, ppp_factor, success_sum, transform
from .kernels import KernelContext, PsiFactor
from .network import AntennaConfig, Combiner, InvalidParameter, ReceiverStrategy
from .si import GammaSiFit
from .special import gauss_2f1_neg


def s_point_hop2(theta: float, ctx: KernelContext) -> float:
    p = ctx.params
    if theta <= 0:
        raise InvalidParameter("theta must be positive")
    return theta * p.r_dl ** p.alpha / p.p_dl


def internode_factor(ctx: KernelContext, s_ref: float, geometry: str = "random"):
    """Transmissibility of the own-cell UL node seen from the DL node.

    ``random``: independent uniform mark angles (Psi at r = R^). ``opposite``:
    UL and DL nodes on opposite cell edges, inter-node distance R~ + R^.
    """
    p = ctx.params
    if p.p_ul == 0:
        return None
    if geometry == "random":
        return PsiFactor(ctx, p.r_dl, s_ref)
    if geometry == "opposite":
        return RationalPower(p.p_ul * (p.r_ul + p.r_dl) ** (-p.alpha), 1.0)
    raise InvalidParameter(f"unknown inter-node geometry {geometry!r}")


def laplace_im0(s: float, ctx: KernelContext) -> float:
    """Laplace transform of inter-node plus PPP interference at the typical DL node."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s == 0:
        return 1.0
    return kernels.psi(s, ctx.params.r_dl, ctx) * math.exp(-ctx.params.lam * kernels.upsilon(s, ctx))


def _bound_factor(ctx: KernelContext, kind: str):
    p = ctx.params
    if kind == "min":
        gap = abs(p.r_ul - p.r_dl)
        return Constant(0.0) if gap == 0 else RationalPower(p.p_ul * gap ** (-p.alpha), 1.0)
    return RationalPower(p.p_ul * (p.r_ul + p.r_dl) ** (-p.alpha), 1.0)


def p_suc_hop2_bounds(theta: float, ctx: KernelContext, ant: AntennaConfig) -> tuple[float, float]:
    """Closed-form bounds; the lower one is 0 when R~ = R^."""
    s = s_point_hop2(theta, ctx)
    lower = success_sum(transform(_bound_factor(ctx, "min"), ppp_factor(ctx, s, "max")), s, ant.n_tx)[0]
    upper = success_sum(transform(_bound_factor(ctx, "max"), ppp_factor(ctx, s, "min")), s, ant.n_tx)[0]
    return lower, upper


def p_suc_hop2(theta: float, ctx: KernelContext, ant: AntennaConfig, verify: bool = True) -> HopReport:
    """DL success probability with MRT at the FD BS and a single-antenna DL node."""
    s = s_point_hop2(theta, ctx)
    f = transform(internode_factor(ctx, s), ppp_factor(ctx, s))
    p, terms, flags = success_sum(f, s, ant.n_tx, verify)
    lo, hi = p_suc_hop2_bounds(theta, ctx, ant)
    flags += bracket_flags(p, lo, hi)
    return HopReport(p, lo, hi, "exact-integral", s, tuple(terms), tuple(flags))


def p_suc_hop2_dl_node(theta: float, ctx: KernelContext, strategy: ReceiverStrategy,
                       n_dl: int = 2, geometry: str = "opposite", verify: bool = True) -> HopReport:
    """Single-antenna FD BS serving a multi-antenna DL node.

    MRC keeps n_dl degrees of freedom against all interference; DL_PZF_INTERNODE
    spends one to null the own-cell UL node.
    """
    s = s_point_hop2(theta, ctx)
    if strategy.kind is Combiner.MRC:
        f, count = transform(internode_factor(ctx, s, geometry), ppp_factor(ctx, s)), n_dl
    elif strategy.kind is Combiner.DL_PZF_INTERNODE:
        if n_dl < 2:
            raise InvalidParameter("DL_PZF_INTERNODE needs a 2-antenna DL node")
        f, count = ppp_factor(ctx, s), n_dl - 1
    else:
        raise InvalidParameter(f"{strategy} is not a DL-node receiver")
    p, terms, flags = success_sum(f, s, count, verify)
    return HopReport(p, math.nan, math.nan, "exact-integral", s, tuple(terms), tuple(flags))


@dataclass(frozen=True)
class JointReport:
    p_hop1: float
    p_hop2: float
    p_joint_lower: float
    mc_joint: float | None = None
    mc_ci: float | None = None


def p_suc_joint_lower(theta: float, ctx: KernelContext, ant: AntennaConfig, si_fit: GammaSiFit,
                      verify: bool = False) -> JointReport:
    """Product of the hop probabilities, a lower bound on joint success by positive association."""
    p1 = p_suc_hop1(theta, ctx, ant, si_fit, verify).p_success
    p2 = p_suc_hop2(theta, ctx, ant, verify).p_success
    return JointReport(p1, p2, p1 * p2)


def prefer_internode_cancellation(theta: float, ctx: KernelContext) -> Decision:
    """Whether a DL node should null the own-cell UL node rather than the nearest FD BS."""
    p = ctx.params
    if theta <= 0:
        raise InvalidParameter("theta must be positive")
    lhs = 4.0 / math.pi * math.log1p(p.p_ul / p.p_dl * (p.r_ul / p.r_dl + 1.0) ** (-p.alpha))
    x = p.p_dl / (theta * p.p_ul * (2.0 * p.r_dl * math.sqrt(p.lam)) ** p.alpha)
    rhs = gauss_2f1_neg(1.0, p.delta, 1.0 + p.delta, -x)
    return Decision(lhs >= rhs, lhs - rhs, lhs, rhs)


def max_cell_radius(theta: float, ctx: KernelContext) -> tuple[float, float]:
    """(Delta(theta), Delta/sqrt(lambda)): largest edge-to-edge cell radius where nulling
    the own-cell UL node at a 2-antenna DL node beats MRC."""
    p = ctx.params
    a = p.alpha
    ups_min_1 = kernels.upsilon_closed_bounds(1.0, ctx)[0]
    ratio = p.p_ul / p.p_dl
    delta = (theta ** (1.0 - 1.0 / a) * p.p_ul * p.p_dl ** (1.0 / a - 1.0)
             * math.sqrt(2.0 ** (-(2.0 * a + 1.0)) * a / (ups_min_1 * (2.0 ** (-a) * theta * ratio + 1.0))))
    return delta, delta / math.sqrt(p.lam)
