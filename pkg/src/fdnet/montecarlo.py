"""Monte Carlo simulator of the marked-PPP FD network.

Trials run in blocks. Each block draws a Poisson number of FD BSs per trial in
a disc around the typical FD BS, keeps every trial's points in one flat array
with a trial index, and reduces per-trial interference with ``np.bincount``.

Only channels that a combiner depends on (desired, SI, inter-node, cancelled
interferers) are drawn as vectors. Every other interferer reaches the receiver
through a unit vector independent of its CN(0, I) channel, so its faded power
is drawn directly as Exp(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import AntennaConfig, Combiner, InvalidParameter, NetworkParams, ReceiverStrategy, validate
from .si import SiChannel

DEFAULT_BLOCK = 2000


@dataclass(frozen=True)
class McEstimate:
    mean: float
    ci_half_width: float
    trials: int
    master_seed: int

    @classmethod
    def from_hits(cls, hits: int, trials: int, master_seed: int) -> "McEstimate":
        p = hits / trials
        return cls(p, 1.96 * math.sqrt(p * (1.0 - p) / trials), trials, master_seed)


@dataclass
class MarkedPpp:
    """Marked PPP realisations for a batch of trials (one trial is a batch of one).

    Point i belongs to trial ``trial[i]``. ``ul0`` / ``dl0`` hold the typical
    FD BS's own UL and DL node, which sits at the origin.
    """

    bs_points: np.ndarray
    ul_marks: np.ndarray
    dl_marks: np.ndarray
    trial: np.ndarray
    counts: np.ndarray
    ul0: np.ndarray
    dl0: np.ndarray
    window_radius: float

    @property
    def trials(self) -> int:
        return len(self.counts)


def _unit(angle: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(angle), np.sin(angle)], axis=-1)


def sample_ppp(lam: float, window_radius: float, rng: np.random.Generator, r_ul: float = 1.0,
               r_dl: float = 1.0, trials: int = 1, geometry: str = "random") -> MarkedPpp:
    """FD BSs uniform in a disc with UL/DL marks at fixed distances.

    ``geometry="opposite"`` puts each cell's DL node diametrically opposite
    its UL node instead of at an independent angle.
    """
    if lam <= 0 or window_radius <= 0:
        raise InvalidParameter("lambda and window_radius must be positive")
    if geometry not in ("random", "opposite"):
        raise InvalidParameter(f"unknown geometry {geometry!r}")
    counts = rng.poisson(lam * math.pi * window_radius ** 2, size=trials)
    n = int(counts.sum())
    trial = np.repeat(np.arange(trials), counts)
    radius = window_radius * np.sqrt(rng.random(n))
    pts = radius[:, None] * _unit(2.0 * math.pi * rng.random(n))
    phi_ul = 2.0 * math.pi * rng.random(n + trials)
    if geometry == "opposite":
        phi_dl = phi_ul + math.pi
    else:
        phi_dl = 2.0 * math.pi * rng.random(n + trials)
    ul = pts + r_ul * _unit(phi_ul[:n])
    dl = pts + r_dl * _unit(phi_dl[:n])
    return MarkedPpp(pts, ul, dl, trial, counts, r_ul * _unit(phi_ul[n:]), r_dl * _unit(phi_dl[n:]),
                     window_radius)


def cn(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian entries with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def isotropic_unit(rng: np.random.Generator, shape) -> np.ndarray:
    z = cn(rng, shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def rician_si(si: SiChannel, n_rx: int, n_tx: int, rng: np.random.Generator, batch: int) -> np.ndarray:
    """SI matrices with per-element |mean| = mu and scatter variance nu^2.

    The line-of-sight phases are alpha_i + beta_j (uniform per realisation),
    i.e. a rank-one mean as produced by a far-field array response.
    """
    a = 2.0 * math.pi * rng.random((batch, n_rx, 1))
    b = 2.0 * math.pi * rng.random((batch, 1, n_tx))
    return si.mu * np.exp(1j * (a + b)) + si.nu * cn(rng, (batch, n_rx, n_tx))


def si_power_samples(si: SiChannel, ant: AntennaConfig, n_samples: int, master_seed: int) -> np.ndarray:
    """Samples of |v^H H w|^2 with v, w isotropic unit vectors independent of H."""
    if n_samples < 1000:
        raise InvalidParameter("n_samples must be at least 1000")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed)))
    out = np.empty(n_samples)
    step = 100_000
    for start in range(0, n_samples, step):
        m = min(step, n_samples - start)
        h = rician_si(si, ant.n_rx, ant.n_tx, rng, m)
        v = isotropic_unit(rng, (m, ant.n_rx))
        w = isotropic_unit(rng, (m, ant.n_tx))
        out[start:start + m] = np.abs(np.einsum("bi,bij,bj->b", v.conj(), h, w)) ** 2
    return out


def combiner(desired: np.ndarray, cancel: np.ndarray | None = None, rcond: float = 1e-10):
    """Unit-norm PZF combiner(s) (I - Q Q^+) h / ||...||; MRC when nothing is cancelled.

    ``desired`` has shape (..., N) and ``cancel`` (..., N, M); zero columns in
    ``cancel`` are ignored. Returns (v, degenerate) where ``degenerate`` marks
    cancel sets that were rank deficient.
    """
    h = np.asarray(desired)
    if cancel is None or cancel.shape[-1] == 0:
        return h / np.linalg.norm(h, axis=-1, keepdims=True), np.zeros(h.shape[:-1], dtype=bool)
    q = np.asarray(cancel)
    if q.shape[-1] > h.shape[-1] - 1:
        raise InvalidParameter("cancel set must leave at least one degree of freedom")
    qp = np.linalg.pinv(q, rcond=rcond)
    proj = h - np.einsum("...ij,...j->...i", q, np.einsum("...ij,...j->...i", qp, h))
    nonzero = np.any(np.abs(q) > 0, axis=-2).sum(axis=-1)
    sv = np.linalg.svd(q, compute_uv=False)
    rank = np.sum(sv > rcond * np.max(sv, axis=-1, keepdims=True), axis=-1)
    return proj / np.linalg.norm(proj, axis=-1, keepdims=True), rank < nonzero


@dataclass(frozen=True)
class Scenario:
    """Everything the simulator needs apart from theta, trials and seed."""

    params: NetworkParams
    ant: AntennaConfig
    si: SiChannel
    hop1: tuple[ReceiverStrategy, ...] = (ReceiverStrategy(),)
    hop2: tuple[ReceiverStrategy, ...] = (ReceiverStrategy(),)
    geometry: str = "random"
    window_radius: float | None = None
    exterior: bool = True
    block_size: int = DEFAULT_BLOCK

    def window(self) -> float:
        if self.window_radius is not None:
            return self.window_radius
        p = self.params
        return max(10.0 / math.sqrt(p.lam), 3.0 * (p.r_ul + p.r_dl))

    def exterior_mean(self) -> float:
        """Mean interference from FD BSs and UL marks beyond the window."""
        if not self.exterior:
            return 0.0
        p = self.params
        w = self.window()
        return p.lam * 2.0 * math.pi * (p.p_dl + p.p_ul) * w ** (2.0 - p.alpha) / (p.alpha - 2.0)


@dataclass
class ChannelDraw:
    """Small-scale fading for one block; per-point powers are Exp(1)."""

    fade_bs1: np.ndarray
    fade_ul1: np.ndarray
    fade_bs2: np.ndarray
    fade_ul2: np.ndarray
    h_ul: np.ndarray
    h_dl: np.ndarray
    h_si: np.ndarray
    g_near: np.ndarray
    h_internode: np.ndarray
    noise: float = 0.0


def draw_channels(ppp: MarkedPpp, sc: Scenario, rng: np.random.Generator) -> ChannelDraw:
    n, b = len(ppp.trial), ppp.trials
    ant = sc.ant
    m_max = max([s.m for s in sc.hop1 if s.kind in (Combiner.PZF_NEAREST, Combiner.PZF_SI_PLUS_NEAREST)],
                default=0)
    n_dl_rx = ant.n_dl
    return ChannelDraw(
        fade_bs1=rng.standard_exponential(n),
        fade_ul1=rng.standard_exponential(n),
        fade_bs2=rng.standard_exponential(n),
        fade_ul2=rng.standard_exponential(n),
        h_ul=cn(rng, (b, ant.n_rx)),
        # MRT channel of the own DL node: N_T transmit antennas (or n_dl receive ones)
        h_dl=cn(rng, (b, max(ant.n_tx, n_dl_rx))),
        h_si=rician_si(sc.si, ant.n_rx, ant.n_tx, rng, b),
        g_near=cn(rng, (b, ant.n_rx, m_max)),
        h_internode=cn(rng, (b, n_dl_rx)),
        noise=sc.params.noise,
    )


def _nearest(ppp: MarkedPpp, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the m nearest FD BSs of each trial (-1 where missing)."""
    r2 = np.einsum("ij,ij->i", ppp.bs_points, ppp.bs_points)
    order = np.lexsort((r2, ppp.trial))
    start = np.concatenate([[0], np.cumsum(ppp.counts)[:-1]])
    idx = np.full((ppp.trials, m), -1, dtype=np.int64)
    for k in range(m):
        ok = ppp.counts > k
        idx[ok, k] = order[start[ok] + k]
    return idx, idx >= 0


def sir_hop1(ppp: MarkedPpp, draws: ChannelDraw, strategy: ReceiverStrategy, sc: Scenario) -> np.ndarray:
    """Realised UL SIR at the typical FD BS for every trial of the batch."""
    p, ant = sc.params, sc.ant
    a = p.alpha
    r2_bs = np.einsum("ij,ij->i", ppp.bs_points, ppp.bs_points)
    r2_ul = np.einsum("ij,ij->i", ppp.ul_marks, ppp.ul_marks)
    pow_bs = p.p_dl * r2_bs ** (-a / 2.0) * draws.fade_bs1
    pow_ul = p.p_ul * r2_ul ** (-a / 2.0) * draws.fade_ul1
    interference = (np.bincount(ppp.trial, pow_bs, ppp.trials)
                    + np.bincount(ppp.trial, pow_ul, ppp.trials) + sc.exterior_mean())

    w0 = draws.h_dl[:, :ant.n_tx] / np.linalg.norm(draws.h_dl[:, :ant.n_tx], axis=-1, keepdims=True)
    si_vec = np.einsum("bij,bj->bi", draws.h_si, w0)
    kind, m = strategy.kind, strategy.m
    cancel_si = kind in (Combiner.PZF_SI, Combiner.PZF_SI_PLUS_NEAREST)
    n_near = m if kind in (Combiner.PZF_NEAREST, Combiner.PZF_SI_PLUS_NEAREST) else 0
    if kind is Combiner.DL_PZF_INTERNODE:
        raise InvalidParameter("DL_PZF_INTERNODE is a DL-node receiver")
    if n_near + cancel_si > ant.n_rx - 1:
        raise InvalidParameter("cancelled interferers must not exceed n_rx - 1")

    cols = []
    if n_near:
        idx, present = _nearest(ppp, n_near)
        g = draws.g_near[:, :, :n_near] * present[:, None, :]
        cols.append(g)
        # nearest FD BSs are nulled; their Exp(1) powers leave the sum
        removed = np.where(present, p.p_dl * r2_bs[np.maximum(idx, 0)] ** (-a / 2.0)
                           * draws.fade_bs1[np.maximum(idx, 0)], 0.0).sum(axis=1)
        interference = interference - removed
    if cancel_si:
        cols.append(si_vec[:, :, None])
    q = np.concatenate(cols, axis=-1) if cols else None
    v, _ = combiner(draws.h_ul, q)
    desired = np.abs(np.einsum("bi,bi->b", v.conj(), draws.h_ul)) ** 2
    if not cancel_si:
        interference = interference + p.p_dl * np.abs(np.einsum("bi,bi->b", v.conj(), si_vec)) ** 2
    signal = p.p_ul * p.r_ul ** (-a) * desired
    return _ratio(signal, interference + draws.noise)


def sir_hop2(ppp: MarkedPpp, draws: ChannelDraw, strategy: ReceiverStrategy, sc: Scenario) -> np.ndarray:
    """Realised DL SIR at the typical DL node for every trial of the batch."""
    p, ant = sc.params, sc.ant
    a = p.alpha
    rx = ppp.dl0[ppp.trial]
    d2_bs = np.einsum("ij,ij->i", ppp.bs_points - rx, ppp.bs_points - rx)
    d2_ul = np.einsum("ij,ij->i", ppp.ul_marks - rx, ppp.ul_marks - rx)
    interference = (np.bincount(ppp.trial, p.p_dl * d2_bs ** (-a / 2.0) * draws.fade_bs2, ppp.trials)
                    + np.bincount(ppp.trial, p.p_ul * d2_ul ** (-a / 2.0) * draws.fade_ul2, ppp.trials)
                    + sc.exterior_mean())
    gap = ppp.ul0 - ppp.dl0
    internode_gain = p.p_ul * np.einsum("ij,ij->i", gap, gap) ** (-a / 2.0)
    if ant.n_dl == 1:
        if strategy.kind is not Combiner.MRC:
            raise InvalidParameter("a single-antenna DL node has no receive combining")
        # MRT from N_T antennas: desired power ||h||^2, inter-node channel scalar
        desired = np.sum(np.abs(draws.h_dl[:, :ant.n_tx]) ** 2, axis=-1)
        internode = internode_gain * np.abs(draws.h_internode[:, 0]) ** 2
    else:
        h = draws.h_dl[:, :ant.n_dl]
        c = draws.h_internode
        if strategy.kind is Combiner.DL_PZF_INTERNODE:
            v, _ = combiner(h, c[:, :, None])
        elif strategy.kind is Combiner.MRC:
            v, _ = combiner(h)
        else:
            raise InvalidParameter(f"{strategy} is not a DL-node receiver")
        desired = np.abs(np.einsum("bi,bi->b", v.conj(), h)) ** 2
        if strategy.kind is Combiner.DL_PZF_INTERNODE:
            # nulled exactly; the projection residual is rounding noise
            internode = np.zeros(len(desired))
        else:
            internode = internode_gain * np.abs(np.einsum("bi,bi->b", v.conj(), c)) ** 2
    signal = p.p_dl * p.r_dl ** (-a) * desired
    return _ratio(signal, interference + internode + draws.noise)


def _ratio(signal: np.ndarray, interference: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(interference > 0, signal / np.where(interference > 0, interference, 1.0), np.inf)


def block_rng(master_seed: int, block: int) -> np.random.Generator:
    """Counter-based generator of one block; independent of execution order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=(block,))))


@dataclass
class McResult:
    """Success estimates per strategy and threshold, all from the same draws."""

    thetas: np.ndarray
    hop1: dict[str, list[McEstimate]] = field(default_factory=dict)
    hop2: dict[str, list[McEstimate]] = field(default_factory=dict)
    joint: dict[str, list[McEstimate]] = field(default_factory=dict)

    def first(self, hop: str = "hop1", key: str | None = None, index: int = 0) -> McEstimate:
        table = getattr(self, hop)
        key = next(iter(table)) if key is None else key
        return table[key][index]


def estimate(sc: Scenario, theta, trials: int, master_seed: int) -> McResult:
    """Success probabilities of every configured strategy, per hop and joint.

    ``theta`` may be a scalar or a sequence; all thresholds share the draws.
    Joint success pairs each hop-1 strategy with the first hop-2 strategy on
    the same PPP realisation.
    """
    if trials < 100:
        raise InvalidParameter("trials must be at least 100")
    validate(sc.params, sc.ant, allow_noise=True)
    for s in sc.hop1 + sc.hop2:
        validate(sc.params, sc.ant, s, allow_noise=True)
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(thetas <= 0):
        raise InvalidParameter("theta must be positive")
    keys1 = [str(s) for s in sc.hop1]
    keys2 = [str(s) for s in sc.hop2]
    hits1 = {k: np.zeros(len(thetas), dtype=np.int64) for k in keys1}
    hits2 = {k: np.zeros(len(thetas), dtype=np.int64) for k in keys2}
    hitsj = {k: np.zeros(len(thetas), dtype=np.int64) for k in keys1}
    w = sc.window()
    p = sc.params
    done, block = 0, 0
    while done < trials:
        b = min(sc.block_size, trials - done)
        rng = block_rng(master_seed, block)
        ppp = sample_ppp(p.lam, w, rng, p.r_ul, p.r_dl, b, sc.geometry)
        draws = draw_channels(ppp, sc, rng)
        sir2 = {k: sir_hop2(ppp, draws, s, sc) for k, s in zip(keys2, sc.hop2)}
        ok2 = sir2[keys2[0]][:, None] > thetas[None, :] if keys2 else None
        for k in keys2:
            hits2[k] += np.sum(sir2[k][:, None] > thetas[None, :], axis=0)
        for k, s in zip(keys1, sc.hop1):
            ok1 = sir_hop1(ppp, draws, s, sc)[:, None] > thetas[None, :]
            hits1[k] += ok1.sum(axis=0)
            if ok2 is not None:
                hitsj[k] += (ok1 & ok2).sum(axis=0)
        done += b
        block += 1
    wrap = lambda table: {k: [McEstimate.from_hits(int(h), trials, master_seed) for h in v]
                          for k, v in table.items()}
    return McResult(thetas, wrap(hits1), wrap(hits2), wrap(hitsj) if keys2 else {})


@dataclass(frozen=True)
class AveragedEstimate:
    """Mean of per-trial conditional probabilities; CI from their sample spread."""

    mean: float
    ci_half_width: float
    trials: int
    master_seed: int

    @classmethod
    def from_values(cls, values: np.ndarray, master_seed: int) -> "AveragedEstimate":
        n = len(values)
        return cls(float(values.mean()), 1.96 * float(values.std(ddof=1)) / math.sqrt(n), n, master_seed)


def dl_node_success_given_geometry(ppp: MarkedPpp, sc: Scenario, theta: float) -> dict[str, np.ndarray]:
    """Success probability of a 2-antenna DL node per trial, averaged over Rayleigh fading.

    All interferers reach the combiner through a unit vector independent of
    their channels, so their powers are Exp(1). MRC collects Gamma(2, 1)
    desired power against every interferer; the inter-node nulling combiner
    keeps Exp(1) desired power and removes the own-cell UL node.
    """
    p = sc.params
    a = p.alpha
    t = theta * p.r_dl ** a / p.p_dl
    rx = ppp.dl0[ppp.trial]
    d2_bs = np.einsum("ij,ij->i", ppp.bs_points - rx, ppp.bs_points - rx)
    d2_ul = np.einsum("ij,ij->i", ppp.ul_marks - rx, ppp.ul_marks - rx)
    x = np.concatenate([t * p.p_dl * d2_bs ** (-a / 2.0), t * p.p_ul * d2_ul ** (-a / 2.0)])
    owner = np.concatenate([ppp.trial, ppp.trial])
    log_l = -np.bincount(owner, np.log1p(x), ppp.trials) - t * sc.exterior_mean()
    ratio = np.bincount(owner, x / (1.0 + x), ppp.trials) + t * sc.exterior_mean()
    gap = ppp.ul0 - ppp.dl0
    x0 = t * p.p_ul * np.einsum("ij,ij->i", gap, gap) ** (-a / 2.0)
    pzf = np.exp(log_l)
    mrc = pzf / (1.0 + x0) * (1.0 + ratio + x0 / (1.0 + x0))
    return {str(ReceiverStrategy(Combiner.MRC)): mrc, str(ReceiverStrategy(Combiner.DL_PZF_INTERNODE)): pzf}


def estimate_dl_node_averaged(sc: Scenario, theta: float, trials: int, master_seed: int):
    """Fading-averaged DL-node estimates of MRC and inter-node nulling on common geometry.

    Returns ({strategy: AveragedEstimate}, paired MRC minus nulling difference).
    """
    if trials < 100:
        raise InvalidParameter("trials must be at least 100")
    if theta <= 0:
        raise InvalidParameter("theta must be positive")
    p = sc.params
    w = sc.window()
    chunks: dict[str, list[np.ndarray]] = {}
    done, block = 0, 0
    while done < trials:
        b = min(sc.block_size, trials - done)
        ppp = sample_ppp(p.lam, w, block_rng(master_seed, block), p.r_ul, p.r_dl, b, sc.geometry)
        for k, v in dl_node_success_given_geometry(ppp, sc, theta).items():
            chunks.setdefault(k, []).append(v)
        done += b
        block += 1
    values = {k: np.concatenate(v) for k, v in chunks.items()}
    mrc, pzf = values.values()
    return ({k: AveragedEstimate.from_values(v, master_seed) for k, v in values.items()},
            AveragedEstimate.from_values(mrc - pzf, master_seed))
