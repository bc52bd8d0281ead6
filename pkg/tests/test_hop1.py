import math

import numpy as np
import pytest

from fdnet import hop1
from fdnet.hop1 import (alzer_upper, fd_density_threshold, laplace_i0, p_suc_hop1, p_suc_hop1_bounds,
                        p_suc_hop1_pzf_m, p_suc_hop1_pzf_si, prefer_si_cancellation, s_point_hop1,
                        throughput_gain_min)
from fdnet.kernels import KernelContext, upsilon, upsilon_closed_bounds
from fdnet.network import AntennaConfig, InvalidParameter, db_to_linear, default_params
from fdnet.si import SiChannel, gamma_fit

ONE = AntennaConfig(1, 1)
TWO = AntennaConfig(2, 2)


def exponent_of(ctx, s, which):
    lo, hi = upsilon_closed_bounds(1.0, ctx)
    return ctx.params.lam * {"min": lo, "max": hi}[which] * s ** ctx.params.delta


@pytest.mark.trivial
def test_laplace_limits(ctx, fit22):
    assert laplace_i0(0.0, ctx, fit22) == 1.0
    empty = KernelContext(ctx.params.replace(lam=0.0)) if ctx.params.lam else ctx
    s = 3.0
    b, a = fit22.scale_b, fit22.shape_a
    assert laplace_i0(s, empty, fit22) == pytest.approx((1 + s * b * ctx.params.p_dl) ** -a, rel=1e-15)


def test_laplace_inside_closed_bounds(ctx, fit22):
    s = s_point_hop1(1.0, ctx)
    si = (1 + s * fit22.scale_b * ctx.params.p_dl) ** -fit22.shape_a
    value = laplace_i0(s, ctx, fit22)
    assert si * math.exp(-exponent_of(ctx, s, "max")) <= value <= si * math.exp(-exponent_of(ctx, s, "min"))


@pytest.mark.trivial
def test_vanishing_threshold(ctx, fit22):
    assert p_suc_hop1(1e-14, ctx, TWO, fit22).p_success == pytest.approx(1.0, abs=1e-6)
    lo, hi = p_suc_hop1_bounds(1e-14, ctx, TWO, fit22)
    assert lo == pytest.approx(1.0, abs=1e-6) and hi == pytest.approx(1.0, abs=1e-6)


@pytest.mark.trivial
def test_single_antenna_is_laplace(ctx, si):
    fit = gamma_fit(si, ONE)
    r = p_suc_hop1(1.0, ctx, ONE, fit)
    assert r.p_success == pytest.approx(laplace_i0(r.s_point, ctx, fit), rel=1e-12)
    assert r.ok


def test_default_report(ctx, fit22):
    r = p_suc_hop1(1.0, ctx, TWO, fit22)
    assert r.ok
    assert r.p_lower <= r.p_success <= r.p_upper
    assert all(t >= 0 for t in r.terms)
    assert r.s_point == pytest.approx(ctx.params.r_ul ** 4 / ctx.params.p_ul)


def test_bounds_vanish_at_high_density(si):
    fit = gamma_fit(si, TWO)
    pairs = [p_suc_hop1_bounds(1.0, KernelContext(default_params(lam)), TWO, fit) for lam in (1e-4, 1e-3, 1e-2)]
    lows, highs = zip(*pairs)
    assert list(lows) == sorted(lows, reverse=True) and list(highs) == sorted(highs, reverse=True)
    assert highs[-1] < 1e-3


@pytest.mark.monotone
@pytest.mark.parametrize("n", [1, 2, 4])
def test_bracket_and_monotone_grid(si, n):
    ant = AntennaConfig(n, n)
    fit = gamma_fit(si, ant)
    previous = 1.0
    for lam in (1e-5, 1e-4, 1e-3):
        ctx = KernelContext(default_params(lam))
        by_theta = []
        for t_db in (-10, 0, 10, 20):
            r = p_suc_hop1(db_to_linear(t_db), ctx, ant, fit, verify=False)
            assert 0.0 <= r.p_lower <= r.p_upper <= 1.0
            # the closed-form bracket is exact for one antenna; otherwise any escape is flagged
            if n == 1:
                assert r.p_lower - 1e-12 <= r.p_success <= r.p_upper + 1e-12
            else:
                inside = r.p_lower - 1e-9 <= r.p_success <= r.p_upper + 1e-9
                assert inside == (not any("closed-form" in f for f in r.flags))
            by_theta.append(r.p_success)
        assert all(b <= a + 1e-12 for a, b in zip(by_theta, by_theta[1:]))
        assert by_theta[1] <= previous + 1e-12
        previous = by_theta[1]


def test_bracket_escape_is_flagged(si):
    # eight receive antennas: the exact sum sits slightly below the closed-form lower bound
    ant = AntennaConfig(8, 8)
    r = p_suc_hop1(1.0, KernelContext(default_params()), ant, gamma_fit(si, ant), verify=False)
    assert r.p_success < r.p_lower
    assert any("lower bound" in f for f in r.flags)


@pytest.mark.trivial
def test_bracket_flags():
    assert hop1.bracket_flags(0.5, 0.4, 0.6) == []
    assert "below" in hop1.bracket_flags(0.3, 0.4, 0.6)[0]
    assert "above" in hop1.bracket_flags(0.7, 0.4, 0.6)[0]


@pytest.mark.monotone
def test_nondecreasing_in_receive_antennas(ctx, fit22):
    values = [p_suc_hop1(1.0, ctx, AntennaConfig(n, 2), fit22, verify=False).p_success for n in (1, 2, 3, 4, 8)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_alzer_exponential_interference():
    laplace = lambda s: 1.0 / (1.0 + s)
    c = 1.0 / math.sqrt(2.0)
    assert alzer_upper(laplace, 2, 1.0) == pytest.approx(2 / (1 + c) - 1 / (1 + 2 * c), rel=1e-14)
    assert alzer_upper(laplace, 2, 1.0) == pytest.approx(0.7574, abs=1e-4)
    exact = laplace(1.0) + 1.0 * (1.0 / 2.0 ** 2)
    assert exact == 0.75 and alzer_upper(laplace, 2, 1.0) > exact


@pytest.mark.trivial
def test_alzer_limits():
    assert alzer_upper(lambda s: 1.0 / (1.0 + s), 2, 1e-15) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidParameter):
        alzer_upper(lambda s: 1.0, 1, 1.0)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_alzer_above_exact(ctx, si, n):
    ant = AntennaConfig(n, n)
    fit = gamma_fit(si, ant)
    r = p_suc_hop1(1.0, ctx, ant, fit, verify=False)
    assert alzer_upper(lambda s: laplace_i0(s, ctx, fit), n, r.s_point) > r.p_success


def test_hd_baseline_matches_closed_form(ctx):
    p = ctx.params
    theta = 2.0
    rate = math.log2(1 + theta)
    expected = math.exp(-p.lam * 2 * math.pi ** 2 * (theta * p.r_ul ** p.alpha) ** p.delta
                        / (p.alpha * math.sin(2 * math.pi / p.alpha))) * rate
    _, se_hd, _ = throughput_gain_min(theta, ctx, gamma_fit(SiChannel(1.0, 1e-6), ONE))
    assert se_hd == pytest.approx(expected, rel=1e-12)


def test_single_antenna_gain_uses_lower_transform(ctx, si):
    fit = gamma_fit(si, ONE)
    theta = 1.0
    se_fd, se_hd, tg = throughput_gain_min(theta, ctx, fit)
    s = s_point_hop1(theta, ctx)
    l_min = (1 + s * fit.scale_b * ctx.params.p_dl) ** -fit.shape_a * math.exp(-exponent_of(ctx, s, "max"))
    assert se_fd / (2 * math.log2(1 + theta)) == pytest.approx(l_min, rel=1e-12)
    assert tg == pytest.approx(se_fd / se_hd)


@pytest.mark.parametrize("omega_db,wins", [(-60, True), (-40, False)])
def test_gain_regimes(ctx, omega_db, wins):
    fit = gamma_fit(SiChannel(1.0, db_to_linear(omega_db)), ONE)
    assert (throughput_gain_min(1.0, ctx, fit)[2] > 1.0) is wins


def test_density_threshold(ctx, si):
    fit = gamma_fit(si, ONE)
    thr = fd_density_threshold(1.0, ctx, fit)
    assert thr.feasible
    assert thr.lam_max == pytest.approx(7.5e-4, rel=0.02)
    at_max = KernelContext(ctx.params.replace(lam=thr.lam_max))
    assert throughput_gain_min(1.0, at_max, fit)[2] == pytest.approx(1.0, rel=1e-9)


@pytest.mark.trivial
def test_density_threshold_limits(ctx):
    p = ctx.params
    huge = fd_density_threshold(1.0, ctx, gamma_fit(SiChannel(1.0, 1e3), ONE))
    assert huge.lam_max == 0.0 and not huge.feasible
    x = p.p_dl * p.r_ul ** p.alpha / p.p_ul
    limit = p.alpha * math.sin(2 * math.pi / p.alpha) * math.log(2) / (2 * math.pi ** 2 * x ** p.delta)
    tiny = fd_density_threshold(1.0, ctx, gamma_fit(SiChannel(1.0, 1e-30), ONE))
    assert tiny.lam_max == pytest.approx(limit, rel=1e-12)


@pytest.mark.trivial
def test_pzf_nearest_reduces_to_mrc(ctx, fit22):
    assert p_suc_hop1_pzf_m(1.0, ctx, TWO, fit22, 0) == p_suc_hop1(1.0, ctx, TWO, fit22)
    assert p_suc_hop1_pzf_m(1e-14, ctx, TWO, fit22, 1).p_success == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InvalidParameter):
        p_suc_hop1_pzf_m(1.0, ctx, TWO, fit22, 2)


def test_pzf_si_term_count(ctx):
    # nulling the SI leaves N_R - 1 degrees of freedom: one term at N_R = 2, two at N_R = 3
    s = s_point_hop1(1.0, ctx)
    lam = ctx.params.lam
    h = 1e-4 * s
    derivative = (upsilon(s + h, ctx) - upsilon(s - h, ctx)) / (2 * h)
    base = math.exp(-lam * upsilon(s, ctx))
    assert p_suc_hop1_pzf_si(1.0, ctx, TWO).p_success == pytest.approx(base, rel=1e-12)
    r = p_suc_hop1_pzf_si(1.0, ctx, AntennaConfig(3, 2))
    assert r.p_success == pytest.approx(base * (1 + s * lam * derivative), rel=1e-6)
    assert r.ok and len(r.terms) == 2 and all(t >= 0 for t in r.terms)


@pytest.mark.trivial
def test_pzf_si_limits(ctx):
    assert p_suc_hop1_pzf_si(1e-14, ctx, TWO).p_success == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(InvalidParameter):
        p_suc_hop1_pzf_si(1.0, ctx, ONE)


def test_pzf_si_wastes_antenna_without_si(ctx):
    # with negligible SI, MRC on the same array beats spending a degree of freedom on the SI
    for n in (2, 3, 4):
        ant = AntennaConfig(n, 2)
        fit = gamma_fit(SiChannel(1.0, 1e-30), ant)
        assert p_suc_hop1_pzf_si(1.0, ctx, ant).p_success <= p_suc_hop1(1.0, ctx, ant, fit).p_success


@pytest.mark.parametrize("omega_db,lhs,prefer", [(-50, 0.358, True), (-60, 0.040, False)])
def test_si_vs_nearest_rule(ctx, omega_db, lhs, prefer):
    fit = gamma_fit(SiChannel(1.0, db_to_linear(omega_db)), TWO)
    d = prefer_si_cancellation(1.0, ctx, TWO, fit)
    assert d.lhs == pytest.approx(lhs, abs=2e-3)
    assert d.rhs == pytest.approx(0.1077, abs=1e-3)
    assert d.prefer is prefer and d.margin == pytest.approx(d.lhs - d.rhs)


@pytest.mark.trivial
def test_si_rule_at_huge_density(si):
    fit = gamma_fit(si, TWO)
    d = prefer_si_cancellation(1.0, KernelContext(default_params(1e3)), TWO, fit)
    assert d.rhs == pytest.approx(1.0, abs=1e-6) and not d.prefer


@pytest.mark.monotone
def test_si_rule_rhs_increasing(fit22):
    rhs = [prefer_si_cancellation(1.0, KernelContext(default_params(lam)), TWO, fit22).rhs
           for lam in np.logspace(-6, -1, 11)]
    assert all(b > a for a, b in zip(rhs, rhs[1:]))


@pytest.mark.trivial
def test_threshold_must_be_positive(ctx, fit22):
    for bad in (0.0, -1.0):
        with pytest.raises(InvalidParameter):
            p_suc_hop1(bad, ctx, TWO, fit22)
        with pytest.raises(InvalidParameter):
            prefer_si_cancellation(bad, ctx, TWO, fit22)
