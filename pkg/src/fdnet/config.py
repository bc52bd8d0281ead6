"""INI scenario files: [network], [antennas], [si] and [sweep] sections.

Powers are given in dBm, SI attenuation and thresholds in dB; everything is
converted to linear units on load. Example::

    [network]
    lambda = 1e-4
    alpha = 4
    p_ul_dbm = 43
    p_dl_dbm = 24
    r_ul = 40
    r_dl = 5
    theta_db = 0

    [antennas]
    sets = 1x1, 2x2

    [si]
    k_factor = 1
    omega_db = -60

    [sweep]
    variable = lambda
    grid = logspace(-5, -3, 5)
    outputs = hop1, bounds, mc
    mc_trials = 10000
    master_seed = 1
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .network import (AntennaConfig, InvalidParameter, NetworkParams, ReceiverStrategy,
                      db_to_linear, dbm_to_watts, validate)
from .si import SiChannel


class ConfigError(ValueError):
    """A scenario file is malformed or violates a parameter invariant."""


VARIABLES = ("lambda", "theta_db", "omega_db", "radius", "m_cancel")
OUTPUTS = ("hop1", "hop2", "joint", "bounds", "mc", "tg", "decision-margins")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    grid: tuple[float, ...]
    outputs: tuple[str, ...]
    mc_trials: int = 0
    master_seed: int = 1

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ConfigError(f"sweep variable must be one of {', '.join(VARIABLES)}")
        if not self.grid:
            raise ConfigError("sweep grid must be nonempty")
        diffs = np.diff(self.grid)
        if len(self.grid) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep grid must be strictly monotone")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}; choose from {', '.join(OUTPUTS)}")
        if "mc" in self.outputs and self.mc_trials < 100:
            raise ConfigError("mc_trials must be at least 100 when mc output is requested")


@dataclass(frozen=True)
class Scenario:
    """A parsed scenario file."""

    params: NetworkParams
    antenna_sets: tuple[AntennaConfig, ...]
    si: SiChannel
    sweep: SweepSpec
    strategies: tuple[ReceiverStrategy, ...] = (ReceiverStrategy(),)
    dl_strategies: tuple[ReceiverStrategy, ...] = (ReceiverStrategy(),)
    geometry: str = "random"
    window_radius: float | None = None
    workers: int = 1
    si_samples: int = 100_000
    si_bins: int = 60
    name: str = ""

    def with_sweep(self, **changes) -> "Scenario":
        return replace(self, sweep=replace(self.sweep, **changes))


_FUNC = re.compile(r"^(linspace|logspace|range)\((.*)\)$")


def parse_grid(text: str) -> tuple[float, ...]:
    """Comma list, or linspace(a, b, n) / logspace(a, b, n) / range(a, b, step)."""
    text = text.strip()
    m = _FUNC.match(text)
    try:
        if m:
            args = [float(x) for x in m.group(2).split(",")]
            if m.group(1) == "linspace":
                return tuple(np.linspace(args[0], args[1], int(args[2])).tolist())
            if m.group(1) == "logspace":
                return tuple(np.logspace(args[0], args[1], int(args[2])).tolist())
            start, stop, step = args
            if step == 0 or (stop - start) * step < 0:
                raise ValueError("range step must move from start towards stop")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return tuple((start + step * np.arange(count)).tolist())
        values = tuple(float(x) for x in text.split(",") if x.strip())
        if not values:
            raise ValueError("no values")
        return values
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"cannot parse grid {text!r}: {exc}") from None


def parse_antennas(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for item in text.split(","):
        m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", item)
        if not m:
            raise ConfigError(f"antenna set {item.strip()!r} must look like NRxNT")
        out.append((int(m.group(1)), int(m.group(2))))
    return tuple(out)


def parse_strategies(text: str) -> tuple[ReceiverStrategy, ...]:
    out = []
    for item in text.split(","):
        name, _, m = item.strip().partition(":")
        try:
            out.append(ReceiverStrategy.parse(name, int(m) if m else 0))
        except (InvalidParameter, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    return tuple(out)


def _get(section, key, cast, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"[{section.name}] is missing required key {key!r}")
        return default
    try:
        return cast(section[key])
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {section[key]!r} is not a valid {cast.__name__}") from None


def load(path: str | Path, overrides: dict[str, str] | None = None) -> Scenario:
    """Parse and validate a scenario file; ``overrides`` maps 'section.key' to text."""
    cp = configparser.ConfigParser()
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return from_parser(cp, overrides, name=path.stem)


def loads(text: str, overrides: dict[str, str] | None = None, name: str = "") -> Scenario:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return from_parser(cp, overrides, name)


def from_parser(cp: configparser.ConfigParser, overrides: dict[str, str] | None = None,
                name: str = "") -> Scenario:
    for key, value in (overrides or {}).items():
        section, _, option = key.partition(".")
        if not option:
            raise ConfigError(f"override {key!r} must look like section.key")
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][option] = value
    for section in ("network", "sweep"):
        if not cp.has_section(section):
            raise ConfigError(f"missing [{section}] section")
    for section in ("antennas", "si"):
        if not cp.has_section(section):
            cp.add_section(section)
    net, ants, si_sec, sw = cp["network"], cp["antennas"], cp["si"], cp["sweep"]

    params = NetworkParams(
        lam=_get(net, "lambda", float, required=True),
        alpha=_get(net, "alpha", float, 4.0),
        p_ul=dbm_to_watts(_get(net, "p_ul_dbm", float, 43.0)),
        p_dl=dbm_to_watts(_get(net, "p_dl_dbm", float, 24.0)),
        r_ul=_get(net, "r_ul", float, 40.0),
        r_dl=_get(net, "r_dl", float, 5.0),
        theta=db_to_linear(_get(net, "theta_db", float, 0.0)),
        noise=_get(net, "noise_w", float, 0.0),
    )
    if "sets" in ants:
        pairs = parse_antennas(ants["sets"])
    else:
        pairs = ((_get(ants, "n_rx", int, 1), _get(ants, "n_tx", int, 1)),)
    m_cancel = _get(ants, "m_cancel", int, 0)
    n_dl = _get(ants, "n_dl", int, 1)
    antenna_sets = tuple(AntennaConfig(nr, nt, min(m_cancel, nr - 1) if "sets" in ants else m_cancel, n_dl)
                         for nr, nt in pairs)
    try:
        si = SiChannel(_get(si_sec, "k_factor", float, 1.0), db_to_linear(_get(si_sec, "omega_db", float, -60.0)))
    except InvalidParameter as exc:
        raise ConfigError(str(exc)) from None

    outputs = tuple(o.strip() for o in sw.get("outputs", "hop1").split(",") if o.strip())
    sweep = SweepSpec(
        variable=sw.get("variable", "lambda").strip(),
        grid=parse_grid(sw.get("grid", str(params.lam))),
        outputs=outputs,
        mc_trials=_get(sw, "mc_trials", int, 0),
        master_seed=_get(sw, "master_seed", int, 1),
    )
    strategies = parse_strategies(sw.get("strategies", "mrc"))
    dl_strategies = parse_strategies(sw.get("dl_strategies", "mrc"))
    geometry = sw.get("geometry", "random").strip()
    if geometry not in ("random", "opposite"):
        raise ConfigError("geometry must be random or opposite")

    try:
        for ant in antenna_sets:
            validate(params, ant, allow_noise="mc" in outputs and set(outputs) <= {"mc"})
            for s in strategies:
                validate(params, ant, s, allow_noise=True)
            for s in dl_strategies:
                validate(params, ant, s, allow_noise=True)
    except InvalidParameter as exc:
        raise ConfigError(str(exc)) from None

    window = _get(sw, "window_radius", float, None)
    return Scenario(
        params=params, antenna_sets=antenna_sets, si=si, sweep=sweep,
        strategies=strategies, dl_strategies=dl_strategies, geometry=geometry,
        window_radius=window, workers=max(1, _get(sw, "workers", int, 1)),
        si_samples=_get(si_sec, "samples", int, 100_000), si_bins=_get(si_sec, "bins", int, 60),
        name=name,
    )
