"""Parameter sweeps: one CSV row per grid point, analytic and Monte Carlo columns.

Column names carry the antenna set as a suffix, e.g. ``hop1_mrc_2x2`` or
``mc_hop1_pzf-si_2x2_ci``. A grid point whose evaluation fails keeps its row,
with ``nan`` values and the reason in the ``status`` column.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import hop1, hop2
from .config import Scenario
from .kernels import KernelContext
from .montecarlo import Scenario as McScenario, estimate
from .network import AntennaConfig, Combiner, InvalidParameter, ReceiverStrategy, db_to_linear, validate
from .si import SiChannel, gamma_fit
from .special import NonConvergence

NUMERIC_FAILURES = (NonConvergence, ArithmeticError, ValueError, np.linalg.LinAlgError)


def tag(ant: AntennaConfig) -> str:
    return f"{ant.n_rx}x{ant.n_tx}"


def _label(sc: Scenario, strategy: ReceiverStrategy) -> str:
    # under an m_cancel sweep the strategy's m is the grid value, not part of the name
    return strategy.kind.value if sc.sweep.variable == "m_cancel" else str(strategy)


def columns(sc: Scenario) -> list[str]:
    """Header of the sweep CSV, fixed before any evaluation."""
    out = sc.sweep.outputs
    var = sc.sweep.variable
    cols = [var]
    if var == "theta_db":
        cols.append("theta")
    elif var == "omega_db":
        cols.append("omega")
    two_hop = "hop2" in out or "joint" in out
    for ant in sc.antenna_sets:
        t = tag(ant)
        if "hop1" in out:
            cols += [f"hop1_{_label(sc, s)}_{t}" for s in sc.strategies]
        if "hop2" in out:
            cols += [f"hop2_{_label(sc, s)}_{t}" for s in sc.dl_strategies]
        if "joint" in out:
            cols.append(f"joint_{t}")
        if "bounds" in out:
            cols += [f"hop1_lower_{t}", f"hop1_upper_{t}"]
            if two_hop:
                cols += [f"hop2_lower_{t}", f"hop2_upper_{t}"]
            if "joint" in out:
                cols += [f"joint_lower_{t}", f"joint_upper_{t}"]
        if "mc" in out:
            names = [f"mc_hop1_{_label(sc, s)}_{t}" for s in sc.strategies]
            if two_hop:
                names += [f"mc_hop2_{_label(sc, s)}_{t}" for s in sc.dl_strategies]
            if "joint" in out:
                names.append(f"mc_joint_{t}")
            for n in names:
                cols += [n, n + "_ci"]
        if "tg" in out:
            cols += [f"se_fd_min_{t}", f"se_hd_{t}", f"tg_min_{t}"]
            if ant.n_rx == 1:
                cols.append(f"lambda_max_{t}")
        if "decision-margins" in out:
            cols.append(f"margin_si_{t}")
    if "decision-margins" in out:
        cols += ["margin_internode", "delta_theta", "r_max"]
    return cols + ["status", "flags"]


def point_setup(sc: Scenario, value: float):
    """Network parameters, SI channel, antenna sets and strategies at one grid value."""
    var = sc.sweep.variable
    params, si = sc.params, sc.si
    ants, strategies = sc.antenna_sets, sc.strategies
    if var == "lambda":
        params = params.replace(lam=value)
    elif var == "theta_db":
        params = params.replace(theta=db_to_linear(value))
    elif var == "omega_db":
        si = SiChannel(si.k_factor, db_to_linear(value))
    elif var == "radius":
        params = params.replace(r_ul=value, r_dl=value)
    elif var == "m_cancel":
        m = int(round(value))
        ants = tuple(replace(a, m_cancel=m) for a in ants)
        strategies = tuple(_with_m(s, m) for s in strategies)
    return params, si, ants, strategies


def _with_m(s: ReceiverStrategy, m: int) -> ReceiverStrategy:
    # cancelling zero nearest BSs is plain MRC (or plain SI nulling)
    if s.kind is Combiner.PZF_NEAREST:
        return replace(s, m=m) if m else ReceiverStrategy(Combiner.MRC)
    if s.kind is Combiner.PZF_SI_PLUS_NEAREST:
        return replace(s, m=m) if m else ReceiverStrategy(Combiner.PZF_SI)
    return s


def _hop2_reports(sc: Scenario, theta, ctx, ant):
    if ant.n_dl == 1:
        return [hop2.p_suc_hop2(theta, ctx, ant, verify=False) for _ in sc.dl_strategies]
    return [hop2.p_suc_hop2_dl_node(theta, ctx, s, ant.n_dl, sc.geometry, verify=False)
            for s in sc.dl_strategies]


def point_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def evaluate_point(sc: Scenario, index: int) -> dict[str, object]:
    """All requested quantities at grid point ``index``; raises on numeric failure."""
    value = sc.sweep.grid[index]
    out = sc.sweep.outputs
    params, si, ants, strategies = point_setup(sc, value)
    row: dict[str, object] = {sc.sweep.variable: value}
    if sc.sweep.variable == "theta_db":
        row["theta"] = params.theta
    elif sc.sweep.variable == "omega_db":
        row["omega"] = si.omega
    ctx = KernelContext(params)
    theta = params.theta
    flags: list[str] = []
    two_hop = "hop2" in out or "joint" in out
    for ant in ants:
        validate(params, ant)
        for s in strategies + sc.dl_strategies:
            validate(params, ant, s)
        t = tag(ant)
        fit = gamma_fit(si, ant)
        r1 = [hop1.p_suc_hop1_strategy(theta, ctx, ant, fit, s) for s in strategies]
        for s, r in zip(sc.strategies, r1):
            row[f"hop1_{_label(sc, s)}_{t}"] = r.p_success
            flags += [f"{t} {_label(sc, s)}: {f}" for f in r.flags]
        r2 = _hop2_reports(sc, theta, ctx, ant) if two_hop else []
        for s, r in zip(sc.dl_strategies, r2):
            row[f"hop2_{_label(sc, s)}_{t}"] = r.p_success
            flags += [f"{t} {_label(sc, s)} (DL): {f}" for f in r.flags]
        if "joint" in out:
            row[f"joint_{t}"] = r1[0].p_success * r2[0].p_success
        if "bounds" in out:
            lo1, hi1 = hop1.p_suc_hop1_bounds(theta, ctx, ant, fit)
            row[f"hop1_lower_{t}"], row[f"hop1_upper_{t}"] = lo1, hi1
            if two_hop:
                lo2, hi2 = hop2.p_suc_hop2_bounds(theta, ctx, ant)
                row[f"hop2_lower_{t}"], row[f"hop2_upper_{t}"] = lo2, hi2
                if "joint" in out:
                    row[f"joint_lower_{t}"], row[f"joint_upper_{t}"] = lo1 * lo2, hi1 * hi2
        if "mc" in out:
            mc = McScenario(params, ant, si, hop1=strategies, hop2=sc.dl_strategies if two_hop else (),
                            geometry=sc.geometry, window_radius=sc.window_radius)
            res = estimate(mc, theta, sc.sweep.mc_trials, point_seed(sc.sweep.master_seed, index))
            pairs = [(f"mc_hop1_{_label(sc, s)}_{t}", res.hop1[str(run)][0])
                     for s, run in zip(sc.strategies, strategies)]
            if two_hop:
                pairs += [(f"mc_hop2_{_label(sc, s)}_{t}", res.hop2[str(s)][0]) for s in sc.dl_strategies]
            if "joint" in out:
                pairs.append((f"mc_joint_{t}", res.joint[str(strategies[0])][0]))
            for name, est in pairs:
                row[name], row[name + "_ci"] = est.mean, est.ci_half_width
        if "tg" in out:
            se_fd, se_hd, tg = hop1.throughput_gain_min(theta, ctx, fit, ant)
            row[f"se_fd_min_{t}"], row[f"se_hd_{t}"], row[f"tg_min_{t}"] = se_fd, se_hd, tg
            if ant.n_rx == 1:
                thr = hop1.fd_density_threshold(theta, ctx, fit)
                row[f"lambda_max_{t}"] = thr.lam_max if thr.feasible else math.nan
        if "decision-margins" in out:
            row[f"margin_si_{t}"] = (hop1.prefer_si_cancellation(theta, ctx, ant, fit).margin
                                     if ant.n_rx >= 2 else math.nan)
    if "decision-margins" in out:
        row["margin_internode"] = hop2.prefer_internode_cancellation(theta, ctx).margin
        row["delta_theta"], row["r_max"] = hop2.max_cell_radius(theta, ctx)
    row["status"] = "ok"
    row["flags"] = "; ".join(dict.fromkeys(flags))
    return row


def safe_point(sc: Scenario, index: int) -> dict[str, object]:
    try:
        return evaluate_point(sc, index)
    except (InvalidParameter, *NUMERIC_FAILURES) as exc:
        return {sc.sweep.variable: sc.sweep.grid[index], "status": f"failed: {exc}", "flags": ""}


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        return "nan"
    x = float(value)
    if math.isnan(x):
        return "nan"
    return f"{x:.10g}"


def run_sweep(sc: Scenario) -> tuple[list[str], list[dict[str, object]]]:
    """Evaluate every grid point; rows come back in grid order."""
    indices = range(len(sc.sweep.grid))
    if sc.workers > 1 and len(sc.sweep.grid) > 1:
        with ProcessPoolExecutor(max_workers=sc.workers) as pool:
            rows = list(pool.map(safe_point, [sc] * len(indices), indices))
    else:
        rows = [safe_point(sc, i) for i in indices]
    return columns(sc), rows


def to_csv(header: list[str], rows: list[dict[str, object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(c, math.nan)) for c in header])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[dict[str, str]]]:
    reader = csv.DictReader(io.StringIO(text))
    return list(reader.fieldnames or []), list(reader)


def failed(rows: list[dict[str, object]]) -> list[int]:
    return [i for i, r in enumerate(rows) if str(r.get("status", "ok")) != "ok"]


def si_histogram(sc: Scenario, samples: int | None = None, master_seed: int | None = None):
    """Empirical SI power density against the gamma fit, per antenna set.

    Returns (header, rows); bins span the pooled 0.1%..99.9% sample range.
    """
    from scipy import stats

    from .montecarlo import si_power_samples

    n = samples or sc.si_samples
    seed = sc.sweep.master_seed if master_seed is None else master_seed
    header = ["power"]
    data = []
    for ant in sc.antenna_sets:
        fit = gamma_fit(sc.si, ant)
        x = si_power_samples(sc.si, ant, n, seed)
        data.append((tag(ant), x, stats.gamma(fit.shape_a, scale=fit.scale_b)))
        header += [f"empirical_{tag(ant)}", f"gamma_{tag(ant)}"]
    pooled = np.concatenate([x for _, x, _ in data])
    edges = np.linspace(0.0, np.quantile(pooled, 0.999), sc.si_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    rows = [{"power": c} for c in centers]
    for t, x, law in data:
        density, _ = np.histogram(x, bins=edges)
        density = density / (len(x) * np.diff(edges))
        for row, d, c in zip(rows, density, centers):
            row[f"empirical_{t}"], row[f"gamma_{t}"] = d, law.pdf(c)
    return header, rows
