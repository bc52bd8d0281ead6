"""Self-interference channel: Rician moments and the gamma fit of the SI power.

S = |v^H H w|^2 with unit-norm v, w independent of the N_R x N_T Rician
matrix H. S is approximated by Gamma(a, b) matched on its first two moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .network import AntennaConfig, InvalidParameter


def rician_moments(k_factor: float, omega: float) -> tuple[float, float]:
    """Absolute mean mu and std nu of a Rician element with K-factor and power omega."""
    if k_factor < 0:
        raise InvalidParameter("k_factor must be nonnegative")
    if omega <= 0:
        raise InvalidParameter("omega must be positive")
    mu = math.sqrt(k_factor * omega / (k_factor + 1.0))
    nu = math.sqrt(omega / (k_factor + 1.0))
    return mu, nu


@dataclass(frozen=True)
class SiChannel:
    k_factor: float
    omega: float

    def __post_init__(self):
        rician_moments(self.k_factor, self.omega)

    @property
    def mu(self) -> float:
        return rician_moments(self.k_factor, self.omega)[0]

    @property
    def nu(self) -> float:
        return rician_moments(self.k_factor, self.omega)[1]


@dataclass(frozen=True)
class GammaSiFit:
    shape_a: float
    scale_b: float
    eta: float

    @property
    def mean(self) -> float:
        return self.shape_a * self.scale_b

    @property
    def variance(self) -> float:
        return self.shape_a * self.scale_b ** 2


def antenna_factor(n_rx: int, n_tx: int) -> float:
    """eta: weight of the mean-squared term in E[S^2], in [0, 3)."""
    p = (n_rx + 1) * (n_tx + 1)
    return (4.0 * n_rx * n_tx - p) / p


def _mu_nu(si: SiChannel) -> tuple[float, float]:
    # squared values taken directly from (K, Omega) keep mu^2 + nu^2 = Omega exact
    mu2 = si.k_factor * si.omega / (si.k_factor + 1.0)
    nu2 = si.omega / (si.k_factor + 1.0)
    return mu2, nu2


def gamma_fit(si: SiChannel, ant: AntennaConfig) -> GammaSiFit:
    eta = antenna_factor(ant.n_rx, ant.n_tx)
    mu2, nu2 = _mu_nu(si)
    mean = mu2 + nu2
    if mu2 == 0.0:
        # Rayleigh SI: the power is exactly exponential
        return GammaSiFit(shape_a=1.0, scale_b=nu2, eta=eta)
    spread = eta * mu2 ** 2 + 2.0 * mu2 * nu2 + nu2 ** 2
    return GammaSiFit(shape_a=mean ** 2 / spread, scale_b=spread / mean, eta=eta)


def si_power_moments(si: SiChannel, ant: AntennaConfig) -> tuple[float, float]:
    """E[S] and E[S^2] of the SI power after unit-norm combining and precoding."""
    mu2, nu2 = _mu_nu(si)
    n_r, n_t = ant.n_rx, ant.n_tx
    second = 4.0 * n_r * n_t * mu2 ** 2 / ((n_r + 1) * (n_t + 1)) + 4.0 * mu2 * nu2 + 2.0 * nu2 ** 2
    return mu2 + nu2, second


def imperfect_pzf_bound(epsilon: float) -> float:
    """Upper bound eps^2 on the mean residual SI power when PZF nulls an estimate H + E."""
    if epsilon < 0:
        raise InvalidParameter("epsilon must be nonnegative")
    return epsilon ** 2
