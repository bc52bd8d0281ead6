import math

import numpy as np
import pytest
from scipy import stats

from fdnet.hop1 import p_suc_hop1, p_suc_hop1_pzf_si
from fdnet.hop2 import p_suc_hop2, p_suc_hop2_dl_node
from fdnet.kernels import KernelContext, mean_mth_distance
from fdnet.montecarlo import (MarkedPpp, McEstimate, Scenario, block_rng, cn, combiner, draw_channels, estimate,
                              estimate_dl_node_averaged, sample_ppp, si_power_samples, sir_hop1, sir_hop2)
from fdnet.network import AntennaConfig, Combiner, InvalidParameter, ReceiverStrategy, default_params
from fdnet.si import SiChannel, gamma_fit

MRC = ReceiverStrategy(Combiner.MRC)
PZF_SI = ReceiverStrategy(Combiner.PZF_SI)
NULL = ReceiverStrategy(Combiner.DL_PZF_INTERNODE)
TWO = AntennaConfig(2, 2)


def empty_ppp(trials, rng, r_ul=40.0, r_dl=5.0):
    phi = 2 * math.pi * rng.random((2, trials))
    unit = lambda a: np.stack([np.cos(a), np.sin(a)], axis=-1)
    none = np.zeros((0, 2))
    return MarkedPpp(none, none, none, np.zeros(0, dtype=np.int64), np.zeros(trials, dtype=np.int64),
                     r_ul * unit(phi[0]), r_dl * unit(phi[1]), 1000.0)


@pytest.mark.trivial
def test_ci_half_width():
    e = McEstimate.from_hits(250, 1000, 7)
    assert e.mean == 0.25 and e.ci_half_width == 1.96 * math.sqrt(0.25 * 0.75 / 1000)


@pytest.mark.trivial
def test_poisson_count():
    lam, radius = 1e-4, 5000.0
    counts = np.concatenate([sample_ppp(lam, radius, block_rng(11, b), trials=500).counts for b in range(20)])
    assert len(counts) == 10_000
    assert counts.mean() == pytest.approx(lam * math.pi * radius ** 2, rel=0.01)


def test_nearest_distance_mean():
    ppp = sample_ppp(1e-4, 600.0, block_rng(12, 0), trials=40_000)
    r = np.hypot(*ppp.bs_points.T)
    nearest = np.full(ppp.trials, np.inf)
    np.minimum.at(nearest, ppp.trial, r)
    assert nearest.mean() == pytest.approx(mean_mth_distance(1e-4, 1), rel=0.01)


@pytest.mark.trivial
@pytest.mark.parametrize("geometry", ["random", "opposite"])
def test_mark_distances(geometry):
    ppp = sample_ppp(1e-3, 300.0, block_rng(13, 0), 40.0, 5.0, trials=50, geometry=geometry)
    assert np.allclose(np.hypot(*(ppp.ul_marks - ppp.bs_points).T), 40.0, rtol=1e-12)
    assert np.allclose(np.hypot(*(ppp.dl_marks - ppp.bs_points).T), 5.0, rtol=1e-12)
    assert np.allclose(np.hypot(*ppp.ul0.T), 40.0) and np.allclose(np.hypot(*ppp.dl0.T), 5.0)
    assert np.all(np.hypot(*ppp.bs_points.T) <= 300.0)
    if geometry == "opposite":
        assert np.allclose(np.hypot(*(ppp.ul0 - ppp.dl0).T), 45.0)


@pytest.mark.trivial
def test_sampler_rejects_bad_input():
    rng = block_rng(0, 0)
    with pytest.raises(InvalidParameter):
        sample_ppp(0.0, 100.0, rng)
    with pytest.raises(InvalidParameter):
        sample_ppp(1e-4, 100.0, rng, geometry="sideways")


def test_internode_distance_law():
    r_ul, r_dl = 40.0, 5.0
    ppp = sample_ppp(1e-6, 100.0, block_rng(14, 0), r_ul, r_dl, trials=20_000)
    r = np.hypot(*(ppp.ul0 - ppp.dl0).T)
    cdf = lambda x: np.arccos(np.clip((r_ul ** 2 + r_dl ** 2 - x ** 2) / (2 * r_ul * r_dl), -1, 1)) / math.pi
    assert stats.kstest(r, cdf).pvalue > 0.05


@pytest.mark.trivial
def test_combiner_mrc():
    h = cn(np.random.default_rng(1), (5, 3))
    v, degenerate = combiner(h)
    assert np.allclose(v, h / np.linalg.norm(h, axis=-1, keepdims=True))
    assert not degenerate.any()


def test_combiner_orthogonality_and_array_gain():
    rng = np.random.default_rng(2)
    gains = []
    for _ in range(5):
        h, q = cn(rng, (200_000, 4)), cn(rng, (200_000, 4, 2))
        v, degenerate = combiner(h, q)
        assert np.max(np.abs(np.einsum("bi,bim->bm", v.conj(), q))) < 1e-12
        assert np.allclose(np.linalg.norm(v, axis=-1), 1.0)
        assert not degenerate.any()
        gains.append(np.abs(np.einsum("bi,bi->b", v.conj(), h)) ** 2)
    assert np.mean(gains) == pytest.approx(4 - 2, rel=0.01)


@pytest.mark.trivial
def test_combiner_degenerate_and_overfull():
    rng = np.random.default_rng(3)
    h, c = cn(rng, (4, 3)), cn(rng, (4, 3, 1))
    v, degenerate = combiner(h, np.concatenate([c, 2 * c], axis=-1))
    assert degenerate.all()
    assert np.max(np.abs(np.einsum("bi,bi->b", v.conj(), c[..., 0]))) < 1e-12
    with pytest.raises(InvalidParameter):
        combiner(h, cn(rng, (4, 3, 3)))


def test_si_sample_mean():
    si = SiChannel(1.0, 1e-6)
    x = si_power_samples(si, AntennaConfig(4, 4), 200_000, 5)
    assert x.mean() == pytest.approx(si.mu ** 2 + si.nu ** 2, rel=0.01)
    with pytest.raises(InvalidParameter):
        si_power_samples(si, TWO, 999, 5)


def scenario(lam=1e-4, ant=TWO, si=SiChannel(1.0, 1e-6), **kw):
    return Scenario(default_params(lam), ant, si, **kw)


def test_empty_network_hop1():
    rng = np.random.default_rng(4)
    sc = scenario(exterior=False, hop1=(MRC, PZF_SI))
    ppp = empty_ppp(20_000, rng)
    d = draw_channels(ppp, sc, rng)
    p = sc.params
    sir = sir_hop1(ppp, d, MRC, sc)
    w0 = d.h_dl / np.linalg.norm(d.h_dl, axis=-1, keepdims=True)
    v = d.h_ul / np.linalg.norm(d.h_ul, axis=-1, keepdims=True)
    si = np.abs(np.einsum("bi,bij,bj->b", v.conj(), d.h_si, w0)) ** 2
    norm2 = np.sum(np.abs(d.h_ul) ** 2, axis=-1)
    assert np.allclose(sir, p.p_ul * p.r_ul ** -4 * norm2 / (p.p_dl * si), rtol=1e-12)
    # desired power is chi-square with 2 N_R degrees of freedom (in units of its mean)
    assert stats.kstest(norm2, stats.gamma(2).cdf).pvalue > 0.01
    assert np.all(np.isinf(sir_hop1(ppp, d, PZF_SI, sc)))


@pytest.mark.trivial
def test_empty_network_without_si_always_succeeds():
    rng = np.random.default_rng(5)
    sc = scenario(ant=AntennaConfig(1, 1), si=SiChannel(1.0, 1e-300), exterior=False)
    ppp = empty_ppp(1000, rng)
    assert np.all(sir_hop1(ppp, draw_channels(ppp, sc, rng), MRC, sc) > 1e200)


def test_empty_network_hop2():
    rng = np.random.default_rng(6)
    sc = scenario(ant=AntennaConfig(1, 1), exterior=False)
    ppp = empty_ppp(1000, rng)
    d = draw_channels(ppp, sc, rng)
    p = sc.params
    r2 = np.sum((ppp.ul0 - ppp.dl0) ** 2, axis=-1)
    expected = (p.p_dl * p.r_dl ** -4 * np.abs(d.h_dl[:, 0]) ** 2
                / (p.p_ul * r2 ** -2 * np.abs(d.h_internode[:, 0]) ** 2))
    assert np.allclose(sir_hop2(ppp, d, MRC, sc), expected, rtol=1e-12)


@pytest.mark.trivial
def test_internode_nulling_removes_term():
    rng = np.random.default_rng(7)
    sc = scenario(ant=AntennaConfig(1, 1, 0, 2), exterior=False, hop1=(), hop2=(MRC, NULL))
    ppp = empty_ppp(1000, rng)
    d = draw_channels(ppp, sc, rng)
    v, _ = combiner(d.h_dl[:, :2], d.h_internode[:, :, None])
    assert np.max(np.abs(np.einsum("bi,bi->b", v.conj(), d.h_internode))) < 1e-12
    assert np.all(np.isinf(sir_hop2(ppp, d, NULL, sc)))
    assert np.all(np.isfinite(sir_hop2(ppp, d, MRC, sc)))


@pytest.mark.trivial
def test_determinism_and_vanishing_threshold():
    sc = scenario(hop1=(MRC, PZF_SI))
    a = estimate(sc, [1e-12, 1.0], 500, 42)
    b = estimate(sc, [1e-12, 1.0], 500, 42)
    assert np.array_equal(a.thetas, b.thetas)
    assert (a.hop1, a.hop2, a.joint) == (b.hop1, b.hop2, b.joint)
    assert a.first("hop1", str(MRC), 0).mean == 1.0 and a.first("hop2").mean == 1.0
    with pytest.raises(InvalidParameter):
        estimate(sc, 1.0, 99, 0)
    with pytest.raises(InvalidParameter):
        estimate(sc, 0.0, 100, 0)


def test_hop_estimates_match_analytic(ctx, fit22):
    res = estimate(scenario(hop1=(MRC, PZF_SI)), 1.0, 20_000, 1)
    r1 = p_suc_hop1(1.0, ctx, TWO, fit22)
    r2 = p_suc_hop2(1.0, ctx, TWO)
    e1, e2 = res.hop1[str(MRC)][0], res.hop2[str(MRC)][0]
    assert r1.p_lower - e1.ci_half_width <= e1.mean <= r1.p_upper + e1.ci_half_width
    assert abs(e1.mean - r1.p_success) <= 2 * e1.ci_half_width
    assert abs(e2.mean - r2.p_success) <= 2 * e2.ci_half_width
    e_si = res.hop1[str(PZF_SI)][0]
    assert abs(e_si.mean - p_suc_hop1_pzf_si(1.0, ctx, TWO).p_success) <= 2 * e_si.ci_half_width


def test_window_sufficiency():
    small = estimate(scenario(), 1.0, 20_000, 21).first()
    large = estimate(scenario(window_radius=2 * scenario().window()), 1.0, 20_000, 21).first()
    assert abs(small.mean - large.mean) < small.ci_half_width


def test_fading_averaged_dl_node_matches_analytic():
    params = default_params(3e-4).replace(r_ul=20.0, r_dl=20.0)
    sc = Scenario(params, AntennaConfig(1, 1, 0, 2), SiChannel(1.0, 1e-6), hop1=(), hop2=(MRC, NULL),
                  geometry="opposite")
    est, diff = estimate_dl_node_averaged(sc, 1.0, 20_000, 3)
    ctx = KernelContext(params)
    for s in (MRC, NULL):
        exact = p_suc_hop2_dl_node(1.0, ctx, s).p_success
        assert abs(est[str(s)].mean - exact) <= 2 * est[str(s)].ci_half_width
    assert diff.mean == pytest.approx(est[str(MRC)].mean - est[str(NULL)].mean, abs=1e-12)
    plain = estimate(sc, 1.0, 20_000, 3)
    for s in (MRC, NULL):
        e = plain.hop2[str(s)][0]
        assert abs(e.mean - est[str(s)].mean) <= 2 * e.ci_half_width
