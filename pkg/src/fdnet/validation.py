"""Self-checks of the analytics against the simulator, oracles and stated targets.

``run("quick")`` uses roughly 10^4 Monte Carlo trials per point and takes a few
minutes; ``run("full")`` evaluates every acceptance criterion at its stated
sample size and tolerance. Each check reports measured vs expected values.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, stats

from . import hop1, hop2, kernels
from .derivatives import derivative_stack, difference_series
from .hop1 import ppp_factor, s_point_hop1, si_factor, transform
from .hop2 import internode_factor, s_point_hop2
from .kernels import KernelContext
from .montecarlo import Scenario, estimate, estimate_dl_node_averaged, si_power_samples
from .network import AntennaConfig, Combiner, ReceiverStrategy, db_to_linear, default_params
from .si import SiChannel, gamma_fit, si_power_moments
from .special import gauss_2f1_neg, regularized_gamma_ccdf

CONFIG_DIR = Path(__file__).parent / "configs"

MRC = ReceiverStrategy(Combiner.MRC)
PZF_SI = ReceiverStrategy(Combiner.PZF_SI)
PZF_NEAR = ReceiverStrategy(Combiner.PZF_NEAREST, 1)
DL_NULL = ReceiverStrategy(Combiner.DL_PZF_INTERNODE)

LEVELS = {
    "quick": dict(si_samples=20_000, moment_samples=100_000, sandwich_trials=10_000, gap_trials=10_000,
                  pzf_trials=4_000, dl_trials=20_000),
    "full": dict(si_samples=100_000, moment_samples=1_000_000, sandwich_trials=10_000, gap_trials=100_000,
                 pzf_trials=20_000, dl_trials=100_000),
}


@dataclass(frozen=True)
class CheckResult:
    criterion: int | None
    name: str
    passed: bool
    measured: str
    expected: str
    tolerance: str
    seconds: float
    detail: str = ""

    def line(self) -> str:
        tag = f"C{self.criterion}" if self.criterion else "--"
        status = "PASS" if self.passed else "FAIL"
        text = (f"{status} {tag} {self.name}: measured {self.measured}; expected {self.expected}; "
                f"tolerance {self.tolerance} ({self.seconds:.1f} s)")
        return text + (f" [{self.detail}]" if self.detail else "")


def _scaled(n: int, level: str, full_n: int, tol: float) -> float:
    # quick runs use fewer samples; widen a sampling tolerance by the lost precision
    return tol * math.sqrt(full_n / n) if level == "quick" else tol


def check_si_fit(level: str = "full") -> CheckResult:
    """SI power samples against the moment-matched gamma law (KS distance and mean)."""
    t0 = time.perf_counter()
    n = LEVELS[level]["si_samples"]
    si, ant = SiChannel(1.0, 1e-6), AntennaConfig(4, 4)
    fit = gamma_fit(si, ant)
    x = si_power_samples(si, ant, n, master_seed=2024)
    ks = stats.kstest(x, stats.gamma(fit.shape_a, scale=fit.scale_b).cdf).statistic
    mean_err = abs(x.mean() / 1e-6 - 1.0)
    mean_tol = _scaled(n, level, 100_000, 0.01)
    dt = time.perf_counter() - t0
    ok = ks <= 0.02 and mean_err <= mean_tol and (level == "quick" or dt < 30.0)
    return CheckResult(1, "SI gamma fit", ok, f"KS {ks:.4f}, mean rel err {mean_err:.4f}",
                       "KS 0, mean 1e-06", f"KS <= 0.02, mean <= {mean_tol:.3g}, < 30 s", dt)


def check_si_variance(level: str = "quick") -> CheckResult:
    """Sample variance of SI power against the gamma fit's a*b^2."""
    t0 = time.perf_counter()
    n = LEVELS[level]["moment_samples"]
    si, ant = SiChannel(1.0, 1e-6), AntennaConfig(4, 4)
    fit = gamma_fit(si, ant)
    x = si_power_samples(si, ant, n, master_seed=7)
    rel = abs(x.var() / fit.variance - 1.0)
    tol = _scaled(n, level, 1_000_000, 0.02)
    return CheckResult(None, "gamma-fit variance", rel <= tol, f"{x.var():.4g}", f"{fit.variance:.4g}",
                       f"rel {tol:.3g}", time.perf_counter() - t0)


def check_moments(level: str = "full") -> CheckResult:
    """Fourth moment of |v^H H w| by simulation against the closed form."""
    t0 = time.perf_counter()
    n = LEVELS[level]["moment_samples"]
    tol = _scaled(n, level, 1_000_000, 0.02)
    worst, where = 0.0, ""
    for seed, (nr, k) in enumerate([(nr, k) for nr in (1, 2, 4, 8) for k in (0.0, 1.0, 10.0)]):
        si, ant = SiChannel(k, 1.0), AntennaConfig(nr, nr)
        x = si_power_samples(si, ant, n, master_seed=100 + seed)
        rel = abs(np.mean(x ** 2) / si_power_moments(si, ant)[1] - 1.0)
        if rel > worst:
            worst, where = rel, f"{nr}x{nr}, K={k:g}"
    return CheckResult(2, "SI fourth moment", worst <= tol, f"worst rel err {worst:.4f} at {where}", "0",
                       f"{tol:.3g}", time.perf_counter() - t0)


def derivative_transforms(theta: float, params=None):
    """Every Laplace transform the success sums differentiate, with its evaluation point."""
    params = params or default_params()
    ctx = KernelContext(params)
    fit = gamma_fit(SiChannel(1.0, 1e-6), AntennaConfig(4, 4))
    s1 = s_point_hop1(theta, ctx)
    s2 = s_point_hop2(theta, ctx)
    d1 = kernels.mean_mth_distance(params.lam, 1)
    far = KernelContext(params.replace(r_ul=20.0, r_dl=20.0))
    s3 = s_point_hop2(theta, far)
    return [
        ("hop1 SI and PPP", transform(si_factor(fit, ctx), ppp_factor(ctx, s1)), s1),
        ("hop1 lower bound", transform(si_factor(fit, ctx), ppp_factor(ctx, s1, "max")), s1),
        ("hop1 upper bound", transform(si_factor(fit, ctx), ppp_factor(ctx, s1, "min")), s1),
        ("PZF-SI", ppp_factor(ctx, s1), s1),
        ("PZF-nearest(1)", transform(si_factor(fit, ctx), ppp_factor(ctx, s1, cutoff=d1)), s1),
        ("hop2 inter-node and PPP", transform(internode_factor(ctx, s2), ppp_factor(ctx, s2)), s2),
        ("DL node inter-node and PPP", transform(internode_factor(far, s3, "opposite"), ppp_factor(far, s3)), s3),
    ]


def derivative_disagreement(f, s: float, n_max: int = 8) -> float:
    """Worst relative gap between derivative_stack and the contour oracle.

    Terms below 1e-12 of f(s) are compared against that floor, since they
    cannot change any success probability.
    """
    d = derivative_stack(f, s, n_max).scaled
    oracle = difference_series(f, s, n_max)
    floor = 1e-12 * abs(d[0])
    worst = 0.0
    for n, o in enumerate(oracle):
        ref = o.value * s ** n
        worst = max(worst, abs(d[n] - ref) / max(abs(ref), floor))
    return worst


def check_derivatives(level: str = "full") -> CheckResult:
    t0 = time.perf_counter()
    worst, where = 0.0, ""
    for theta_db in np.linspace(-10.0, 20.0, 7):
        for name, f, s in derivative_transforms(db_to_linear(theta_db)):
            err = derivative_disagreement(f, s)
            if err > worst:
                worst, where = err, f"{name}, theta {theta_db:g} dB"
    dt = time.perf_counter() - t0
    ok = worst <= 1e-5 and dt < 10.0
    return CheckResult(3, "derivative engine vs oracle", ok, f"{worst:.2e} at {where}", "0", "1e-5, < 10 s", dt)


SANDWICH_LAMBDAS = (1e-5, 3e-5, 1e-4, 3e-4, 1e-3)
SANDWICH_ANTENNAS = ((1, 1), (2, 2), (4, 4))


def check_sandwich_and_association(level: str = "full") -> list[CheckResult]:
    """Joint two-hop success by simulation against the product bounds and the exact product."""
    t0 = time.perf_counter()
    trials = LEVELS[level]["sandwich_trials"]
    si = SiChannel(1.0, 1e-6)
    misses, fkg_misses = [], []
    worst_lo = worst_hi = worst_fkg = -math.inf
    for lam in SANDWICH_LAMBDAS:
        params = default_params(lam)
        ctx = KernelContext(params)
        for seed, (nr, nt) in enumerate(SANDWICH_ANTENNAS):
            ant = AntennaConfig(nr, nt)
            fit = gamma_fit(si, ant)
            lo1, hi1 = hop1.p_suc_hop1_bounds(1.0, ctx, ant, fit)
            lo2, hi2 = hop2.p_suc_hop2_bounds(1.0, ctx, ant)
            product = hop2.p_suc_joint_lower(1.0, ctx, ant, fit).p_joint_lower
            mc = estimate(Scenario(params, ant, si), 1.0, trials, 11 + seed).first("joint")
            lo_gap = lo1 * lo2 - (mc.mean + 2 * mc.ci_half_width)
            hi_gap = mc.mean - (hi1 * hi2 + 2 * mc.ci_half_width)
            fkg_gap = product - 2 * mc.ci_half_width - mc.mean
            worst_lo, worst_hi, worst_fkg = max(worst_lo, lo_gap), max(worst_hi, hi_gap), max(worst_fkg, fkg_gap)
            if lo_gap > 0 or hi_gap > 0:
                misses.append(f"{nr}x{nt} lambda {lam:g}: {lo1 * lo2:.4f} <= {mc.mean:.4f} <= {hi1 * hi2:.4f}")
            if fkg_gap > 0:
                fkg_misses.append(f"{nr}x{nt} lambda {lam:g}: mc {mc.mean:.4f} < product {product:.4f}")
    dt = time.perf_counter() - t0
    sandwich = CheckResult(4, "bound sandwich", not misses and (level == "quick" or dt < 300.0),
                           f"max excess below {worst_lo:.4f}, above {worst_hi:.4f}", "<= 0",
                           "2 CI, < 300 s", dt, "; ".join(misses))

    t1 = time.perf_counter()
    n = LEVELS[level]["gap_trials"]
    params = default_params(1e-4)
    ctx = KernelContext(params)
    gaps = []
    for seed, (nr, nt) in enumerate(SANDWICH_ANTENNAS):
        ant = AntennaConfig(nr, nt)
        product = hop2.p_suc_joint_lower(1.0, ctx, ant, gamma_fit(si, ant)).p_joint_lower
        mc = estimate(Scenario(params, ant, si), 1.0, n, 31 + seed).first("joint")
        gaps.append((abs(mc.mean - product), f"{nr}x{nt}"))
    gap, where = max(gaps)
    ok = not fkg_misses and gap <= 0.03
    detail = "; ".join(fkg_misses + [f"gap {g:.4f} ({w})" for g, w in gaps])
    assoc = CheckResult(5, "positive association", ok,
                        f"max (product - 2CI - mc) {worst_fkg:.4f}; max |mc - product| {gap:.4f} at {where}",
                        "mc >= product - 2CI; gap 0", "0.03 absolute", dt + time.perf_counter() - t1, detail)
    return [sandwich, assoc]


TG_TARGETS = ((1, -47.0), (2, -43.0), (8, -35.0), (32, -29.0))


def tg_crossing(n: int, lam: float = 1e-4) -> float:
    """Omega [dB] at which the minimum throughput gain of an n x n FD BS equals 1."""
    ctx = KernelContext(default_params(lam))
    ant = AntennaConfig(n, n)

    def g(omega_db):
        fit = gamma_fit(SiChannel(1.0, db_to_linear(omega_db)), ant)
        return hop1.throughput_gain_min(1.0, ctx, fit, ant)[2] - 1.0

    return optimize.brentq(g, -90.0, -10.0, xtol=1e-4)


def check_tg_crossings(level: str = "full") -> CheckResult:
    t0 = time.perf_counter()
    got = [(n, tg_crossing(n), target) for n, target in TG_TARGETS]
    dt = time.perf_counter() - t0
    ok = all(abs(c - t) <= 2.0 for _, c, t in got) and dt < 60.0
    return CheckResult(6, "throughput-gain crossings", ok,
                       ", ".join(f"{n}x{n}: {c:.2f}" for n, c, _ in got),
                       ", ".join(f"{t:g}" for _, _, t in got), "2 dB, < 60 s", dt)


def check_density_threshold(level: str = "full") -> CheckResult:
    t0 = time.perf_counter()
    params = default_params()
    fit = gamma_fit(SiChannel(1.0, 1e-6), AntennaConfig())
    thr = hop1.fd_density_threshold(1.0, KernelContext(params), fit)
    tg = hop1.throughput_gain_min(1.0, KernelContext(params.replace(lam=thr.lam_max)), fit)[2]
    ok = thr.feasible and abs(tg - 1.0) <= 0.01
    return CheckResult(7, "FD density threshold", ok, f"lambda_max {thr.lam_max:.4e}, TG {tg:.6f}", "TG 1",
                       "1% relative", time.perf_counter() - t0)


def crossings(x, d) -> list[tuple[float, int]]:
    """Sign changes of d over x, interpolated in log x: (location, +1 rising / -1 falling)."""
    out = []
    lx = np.log(np.asarray(x, dtype=float))
    for i in range(len(d) - 1):
        if d[i] == 0:
            out.append((float(x[i]), 0))
        elif d[i] * d[i + 1] < 0:
            frac = d[i] / (d[i] - d[i + 1])
            out.append((float(np.exp(lx[i] + frac * (lx[i + 1] - lx[i]))), 1 if d[i + 1] > d[i] else -1))
    return out


PZF_LAMBDAS = tuple(np.logspace(-5, -2, 8).tolist())


def _strategy_sweep(omega_db: float, trials: int, seed: int):
    si, ant = SiChannel(1.0, db_to_linear(omega_db)), AntennaConfig(2, 2)
    rows = []
    for i, lam in enumerate(PZF_LAMBDAS):
        params = default_params(lam)
        res = estimate(Scenario(params, ant, si, hop1=(MRC, PZF_SI, PZF_NEAR), hop2=()), 1.0, trials, seed + i)
        margin = hop1.prefer_si_cancellation(1.0, KernelContext(params), ant, gamma_fit(si, ant)).margin
        rows.append((lam, {k: v[0] for k, v in res.hop1.items()}, margin))
    return rows


def check_strategy_ordering(level: str = "full") -> list[CheckResult]:
    """MRC versus SI nulling versus nearest-BS nulling over density, by simulation."""
    t0 = time.perf_counter()
    trials = LEVELS[level]["pzf_trials"]
    high = _strategy_sweep(-50.0, trials, 500)
    diff = [r[str(PZF_SI)].mean - r[str(MRC)].mean for _, r, _ in high]
    falling = [c for c, sign in crossings(PZF_LAMBDAS, diff) if sign < 0]
    cross = falling[0] if falling else math.nan
    low = _strategy_sweep(-80.0, trials, 600)
    beaten = []
    for lam, r, _ in low:
        a, b = r[str(MRC)], r[str(PZF_SI)]
        if a.mean < b.mean - math.hypot(a.ci_half_width, b.ci_half_width):
            beaten.append(f"lambda {lam:.2g}: mrc {a.mean:.4f} < pzf-si {b.mean:.4f}")
    ok8 = 1e-3 <= cross <= 4e-3 and not beaten
    detail = "mc pzf-si - mrc at -50 dB: " + ", ".join(f"{lam:.2g}:{d:+.4f}" for lam, d in zip(PZF_LAMBDAS, diff))
    c8 = CheckResult(8, "PZF-SI/MRC crossover", ok8,
                     f"crossover {cross:.3g}; -80 dB MRC beaten at {len(beaten)} points",
                     "crossover in [1e-3, 4e-3]; MRC never beaten at -80 dB", "factor 2 band, CI",
                     time.perf_counter() - t0, "; ".join(beaten + [detail]))

    disagree, exempt = [], 0
    for lam, r, margin in high:
        a, b = r[str(PZF_SI)], r[str(PZF_NEAR)]
        d = a.mean - b.mean
        if abs(d) <= math.hypot(a.ci_half_width, b.ci_half_width):
            exempt += 1
        elif (d > 0) != (margin >= 0):
            disagree.append(f"lambda {lam:.2g}: margin {margin:+.3f}, mc diff {d:+.4f}")
    c9 = CheckResult(9, "SI-vs-nearest rule consistency", not disagree,
                     f"{len(disagree)} disagreements, {exempt} unresolved points", "0 disagreements",
                     "exempt within CI", time.perf_counter() - t0, "; ".join(disagree))
    return [c8, c9]


def internode_crossover(radius: float, trials: int, seed: int = 900) -> tuple[float, float, list]:
    """(simulated crossover density, predicted (Delta/R)^2, per-point paired differences)."""
    base = default_params().replace(r_ul=radius, r_dl=radius)
    delta, _ = hop2.max_cell_radius(1.0, KernelContext(base))
    pred = (delta / radius) ** 2
    grid = pred * np.logspace(-0.5, 0.5, 9)
    ant = AntennaConfig(1, 1, 0, 2)
    diffs = []
    for i, lam in enumerate(grid):
        sc = Scenario(base.replace(lam=float(lam)), ant, SiChannel(1.0, 1e-6), hop1=(), hop2=(MRC, DL_NULL),
                      geometry="opposite")
        _, d = estimate_dl_node_averaged(sc, 1.0, trials, seed + i)
        diffs.append(d)
    rising = [c for c, sign in crossings(grid, [d.mean for d in diffs]) if sign > 0]
    return (rising[0] if rising else math.nan), pred, list(zip(grid.tolist(), diffs))


def check_internode_crossover(level: str = "full") -> CheckResult:
    t0 = time.perf_counter()
    trials = LEVELS[level]["dl_trials"]
    parts, ok = [], True
    for radius in (20.0, 40.0):
        cross, pred, _ = internode_crossover(radius, trials)
        rel = abs(cross / pred - 1.0)
        ok = ok and rel <= 0.2
        parts.append(f"R {radius:g}: {cross:.4g} vs {pred:.4g} ({rel:.1%})")
    return CheckResult(10, "inter-node nulling crossover", ok, "; ".join(parts), "(Delta/R)^2", "20%",
                       time.perf_counter() - t0)


def _nonincreasing(values, slack: float = 1e-12) -> bool:
    return all(b <= a + slack for a, b in zip(values, values[1:]))


def invariant_failures() -> list[str]:
    """Monotonicity grids in theta, lambda, N_R and N_T plus closed-form limits."""
    bad = []
    si = SiChannel(1.0, 1e-6)
    thetas = [db_to_linear(t) for t in (-10, -5, 0, 5, 10, 20)]
    lams = [1e-5, 1e-4, 1e-3, 1e-2]
    for nr, nt in ((1, 1), (2, 2), (4, 2)):
        ant = AntennaConfig(nr, nt)
        fit = gamma_fit(si, ant)
        ctx = KernelContext(default_params())
        if not _nonincreasing([hop1.p_suc_hop1(t, ctx, ant, fit, False).p_success for t in thetas]):
            bad.append(f"hop1 not nonincreasing in theta ({nr}x{nt})")
        if not _nonincreasing([hop2.p_suc_hop2(t, ctx, ant, False).p_success for t in thetas]):
            bad.append(f"hop2 not nonincreasing in theta ({nr}x{nt})")
        by_lam = [KernelContext(default_params(lam)) for lam in lams]
        if not _nonincreasing([hop1.p_suc_hop1(1.0, c, ant, fit, False).p_success for c in by_lam]):
            bad.append(f"hop1 not nonincreasing in lambda ({nr}x{nt})")
        if not _nonincreasing([hop2.p_suc_hop2(1.0, c, ant, False).p_success for c in by_lam]):
            bad.append(f"hop2 not nonincreasing in lambda ({nr}x{nt})")
        for c in by_lam:
            lo, hi = hop1.p_suc_hop1_bounds(1.0, c, ant, fit)
            if not 0.0 <= lo <= hi <= 1.0:
                bad.append(f"hop1 bounds out of order at lambda {c.params.lam:g}")
    ctx = KernelContext(default_params())
    fit = gamma_fit(si, AntennaConfig(2, 2))
    by_nr = [hop1.p_suc_hop1(1.0, ctx, AntennaConfig(nr, 2), fit, False).p_success for nr in (1, 2, 3, 4, 6, 8)]
    if not _nonincreasing(by_nr[::-1]):
        bad.append("hop1 not nondecreasing in N_R")
    by_nt = [hop2.p_suc_hop2(1.0, ctx, AntennaConfig(2, nt), False).p_success for nt in (1, 2, 3, 4, 6, 8)]
    if not _nonincreasing(by_nt[::-1]):
        bad.append("hop2 not nondecreasing in N_T")
    shapes = [gamma_fit(si, AntennaConfig(n, n)).shape_a for n in (1, 2, 4, 8, 16, 32)]
    if not _nonincreasing(shapes):
        bad.append("gamma shape not nonincreasing along N_R = N_T")
    ups = [kernels.upsilon(s, ctx) for s in (0.0, 1e-3, 1e-1, 1.0, 1e2, 1e4)]
    if not _nonincreasing(ups[::-1]):
        bad.append("Upsilon not nondecreasing in s")
    if not _nonincreasing([regularized_gamma_ccdf(3, x) for x in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)]):
        bad.append("gamma CCDF not nonincreasing")
    if not _nonincreasing([gauss_2f1_neg(1.0, 0.5, 1.5, -x) for x in (0.0, 0.1, 1.0, 10.0, 1e3)]):
        bad.append("2F1 not decreasing")
    rhs = [hop1.prefer_si_cancellation(1.0, KernelContext(default_params(lam)), AntennaConfig(2, 2), fit).rhs
           for lam in lams]
    if not _nonincreasing(rhs[::-1]):
        bad.append("SI-vs-nearest right-hand side not increasing in lambda")
    # closed-form limits
    if abs(regularized_gamma_ccdf(1, math.log(2.0)) - 0.5) > 1e-15:
        bad.append("exponential median")
    if gauss_2f1_neg(1.0, 0.5, 1.5, 0.0) != 1.0:
        bad.append("2F1 at zero")
    if kernels.upsilon(0.0, ctx) != 0.0 or kernels.psi(0.0, 10.0, ctx) != 1.0:
        bad.append("kernels at s = 0")
    lo, hi = kernels.upsilon_closed_bounds(1.0, ctx)
    if abs(hi / lo - 4.0 / 3.0) > 1e-12:
        bad.append("Upsilon bound ratio at alpha 4")
    one = AntennaConfig(1, 1)
    fit1 = gamma_fit(si, one)
    s = s_point_hop1(1.0, ctx)
    if abs(hop1.p_suc_hop1(1.0, ctx, one, fit1, False).p_success - hop1.laplace_i0(s, ctx, fit1)) > 1e-12:
        bad.append("single-antenna hop1 equals its Laplace transform")
    r = hop2.max_cell_radius(1.0, KernelContext(default_params(4e-4)))[1]
    if abs(r / hop2.max_cell_radius(1.0, ctx)[1] - 0.5) > 1e-12:
        bad.append("r_max scaling with lambda")
    return bad


def check_invariants(level: str = "full") -> CheckResult:
    t0 = time.perf_counter()
    bad = invariant_failures()
    dt = time.perf_counter() - t0
    return CheckResult(11, "invariant grids", not bad and dt < 120.0, f"{len(bad)} failures", "0", "< 120 s",
                       dt, "; ".join(bad))


def check_configs(level: str = "quick") -> CheckResult:
    """Every shipped figure config parses and runs on a reduced grid."""
    from . import config, sweep

    t0 = time.perf_counter()
    problems = []
    paths = sorted(CONFIG_DIR.glob("*.ini"))
    for path in paths:
        try:
            sc = config.load(path)
            sweep.si_histogram(sc, samples=2000)
            trials = max(100, min(sc.sweep.mc_trials, 300))
            small = sc.with_sweep(grid=sc.sweep.grid[:2], mc_trials=trials)
            _, rows = sweep.run_sweep(small)
            problems += [f"{path.name} row {i}: {rows[i]['status']}" for i in sweep.failed(rows)]
        except Exception as exc:  # noqa: BLE001 - report any failure per file
            problems.append(f"{path.name}: {exc}")
    return CheckResult(None, "shipped configs", bool(paths) and not problems, f"{len(paths)} configs",
                       "all run", "no failed rows", time.perf_counter() - t0, "; ".join(problems))


def run(level: str = "quick", progress=None) -> list[CheckResult]:
    if level not in LEVELS:
        raise ValueError("level must be quick or full")
    steps = [check_si_fit, check_si_variance, check_moments, check_derivatives, check_sandwich_and_association,
             check_tg_crossings, check_density_threshold, check_strategy_ordering, check_internode_crossover,
             check_invariants]
    if level == "quick":
        steps.append(check_configs)
    results = []
    for step in steps:
        out = step(level)
        for r in out if isinstance(out, list) else [out]:
            results.append(r)
            if progress:
                progress(r)
    return results
