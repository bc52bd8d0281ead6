"""Shared parameter types for the FD small-cell network model.

Everything here is in linear units (W, linear ratios, metres). Decibel
quantities only enter through :func:`from_decibels` and the config parser.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class InvalidParameter(ValueError):
    """Raised when a parameter bundle violates one of its invariants."""


def dbm_to_watts(power_dbm: float) -> float:
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def from_decibels(power_dbm: float, attenuation_db: float) -> tuple[float, float]:
    """Convert a (dBm power, dB ratio) pair to (watts, linear ratio)."""
    return dbm_to_watts(power_dbm), db_to_linear(attenuation_db)


@dataclass(frozen=True)
class NetworkParams:
    """Densities, powers, pathloss and link geometry of the marked PPP.

    Attributes
    ----------
    lam : float
        FD BS density [BS/m^2].
    alpha : float
        Pathloss exponent, must exceed 2.
    p_ul : float
        Transmit power of the HD UL nodes [W].
    p_dl : float
        Transmit power of the FD BSs [W].
    r_ul, r_dl : float
        Fixed UL and DL link distances [m].
    theta : float
        SIR threshold (linear).
    noise : float
        Noise power [W]. The analytic modules only accept 0.
    """

    lam: float
    alpha: float
    p_ul: float
    p_dl: float
    r_ul: float
    r_dl: float
    theta: float = 1.0
    noise: float = 0.0

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    def replace(self, **changes) -> "NetworkParams":
        fields = {**self.__dict__, **changes}
        return NetworkParams(**fields)


@dataclass(frozen=True)
class AntennaConfig:
    n_rx: int = 1
    n_tx: int = 1
    m_cancel: int = 0
    # receive antennas at the HD DL node (2 for the UE-to-UE scenario)
    n_dl: int = 1


class Combiner(enum.Enum):
    MRC = "mrc"
    PZF_NEAREST = "pzf-nearest"
    PZF_SI = "pzf-si"
    PZF_SI_PLUS_NEAREST = "pzf-si-nearest"
    DL_PZF_INTERNODE = "dl-pzf-internode"


@dataclass(frozen=True)
class ReceiverStrategy:
    """Receive combiner applied at the FD BS (or at the DL node).

    ``m`` counts cancelled nearest FD BSs; for ``PZF_SI_PLUS_NEAREST`` the SI
    takes one additional degree of freedom on top of those ``m``.
    """

    kind: Combiner = Combiner.MRC
    m: int = 0

    @classmethod
    def parse(cls, text: str, m: int = 0) -> "ReceiverStrategy":
        try:
            kind = Combiner(text.strip().lower())
        except ValueError:
            options = ", ".join(c.value for c in Combiner)
            raise InvalidParameter(f"unknown strategy {text!r}; choose one of {options}") from None
        return cls(kind, m)

    @property
    def cancelled(self) -> int:
        """Degrees of freedom spent on cancellation."""
        if self.kind is Combiner.PZF_NEAREST:
            return self.m
        if self.kind is Combiner.PZF_SI:
            return 1
        if self.kind is Combiner.PZF_SI_PLUS_NEAREST:
            return self.m + 1
        if self.kind is Combiner.DL_PZF_INTERNODE:
            return 1
        return 0

    @property
    def at_dl_node(self) -> bool:
        return self.kind is Combiner.DL_PZF_INTERNODE

    def __str__(self) -> str:
        return f"{self.kind.value}({self.m})" if self.m else self.kind.value


@dataclass(frozen=True)
class CheckedParams:
    params: NetworkParams
    ant: AntennaConfig


def _check(ok: bool, message: str) -> None:
    if not ok:
        raise InvalidParameter(message)


def validate(
    params: NetworkParams,
    ant: AntennaConfig,
    strategy: ReceiverStrategy | None = None,
    allow_noise: bool = False,
) -> CheckedParams:
    """Check every invariant and return the bundle, or raise on the first violation.

    ``allow_noise`` is for Monte Carlo runs only; the analytics are SIR-based.
    """
    values = (params.lam, params.alpha, params.p_ul, params.p_dl,
              params.r_ul, params.r_dl, params.theta, params.noise)
    _check(all(math.isfinite(v) for v in values), "all network parameters must be finite")
    _check(params.lam > 0, "lambda must be positive")
    _check(params.alpha > 2, "alpha must exceed 2")
    _check(params.p_ul >= 0, "p_ul must be nonnegative")
    _check(params.p_dl >= 0, "p_dl must be nonnegative")
    _check(params.r_ul > 0, "r_ul must be positive")
    _check(params.r_dl > 0, "r_dl must be positive")
    _check(params.theta > 0, "theta must be positive")
    if allow_noise:
        _check(params.noise >= 0, "noise must be nonnegative")
    else:
        _check(params.noise == 0, "noise must be 0 (analysis is interference-limited)")

    for name in ("n_rx", "n_tx", "m_cancel", "n_dl"):
        _check(isinstance(getattr(ant, name), int), f"{name} must be an integer")
    _check(ant.n_rx >= 1, "n_rx must be at least 1")
    _check(ant.n_tx >= 1, "n_tx must be at least 1")
    _check(ant.n_dl >= 1, "n_dl must be at least 1")
    _check(0 <= ant.m_cancel <= ant.n_rx - 1, "m_cancel must lie in [0, n_rx - 1]")

    if strategy is not None:
        _check(strategy.m >= 0, "strategy m must be nonnegative")
        if strategy.kind is Combiner.PZF_NEAREST:
            _check(strategy.m >= 1, "PZF_NEAREST needs m >= 1")
        if strategy.kind in (Combiner.PZF_SI, Combiner.PZF_SI_PLUS_NEAREST):
            _check(ant.n_rx >= 2, "PZF_SI needs n_rx >= 2")
        if strategy.kind is Combiner.DL_PZF_INTERNODE:
            _check(ant.n_dl == 2, "DL_PZF_INTERNODE needs a 2-antenna DL node")
            _check(ant.n_tx == 1, "DL_PZF_INTERNODE assumes a single-antenna FD BS")
        elif strategy.kind is not Combiner.MRC:
            _check(strategy.cancelled <= ant.n_rx - 1,
                   "cancelled interferers must not exceed n_rx - 1")
    if ant.n_dl > 1:
        _check(ant.n_tx == 1, "multi-antenna DL nodes require n_tx = 1")
    return CheckedParams(params, ant)


def default_params(lam: float = 1e-4) -> NetworkParams:
    """Macro backhaul (43 dBm, 40 m) to small cell (24 dBm) to UE (5 m), alpha 4, 0 dB."""
    return NetworkParams(
        lam=lam,
        alpha=4.0,
        p_ul=dbm_to_watts(43.0),
        p_dl=dbm_to_watts(24.0),
        r_ul=40.0,
        r_dl=5.0,
        theta=1.0,
    )
