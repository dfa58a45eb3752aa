"""Scenario description, unit conversion and validation.

Config documents carry dB, dBm and per-km^2 units. ``NetworkParams`` holds
linear SI values; ``validate`` checks every invariant and returns an immutable
``ValidatedParams`` carrying the derived geometry and per-tier constants.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np


class ConfigError(ValueError):
    """A scenario violates one of the model invariants."""


class SpectrumPolicy(str, enum.Enum):
    OSS = "OSS"
    NOSS = "NOSS"

    @classmethod
    def parse(cls, value) -> "SpectrumPolicy":
        if isinstance(value, cls):
            return value
        key = str(value).upper().replace("-", "").replace("_", "")
        if key == "OSS":
            return cls.OSS
        if key == "NOSS":
            return cls.NOSS
        raise ConfigError(f"unknown spectrum policy {value!r}; expected OSS or NOSS")


class Tier(str, enum.Enum):
    L = "L"
    N = "N"
    A = "A"


TERRESTRIAL_TIERS = (Tier.L, Tier.N)
TIERS = (Tier.L, Tier.N, Tier.A)


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0) if np.ndim(x_db) else 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watts(x_dbm):
    return db_to_linear(x_dbm) / 1000.0 if np.ndim(x_dbm) else 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(w):
    return 10.0 * np.log10(w) + 30.0


@dataclass(frozen=True)
class Environment:
    """Fitted LoS model ``c - a*exp(-b*theta)`` (theta in degrees) and BS height."""

    name: str
    a: float
    b: float
    c: float
    h_T: float

    def __post_init__(self):
        if not self.b > 0:
            raise ConfigError(f"environment {self.name}: b must be > 0")


@dataclass(frozen=True)
class ItuEnvironment:
    """ITU-R P.1410 built-up area statistics.

    alpha: ratio of built-up to total land area; beta: buildings per km^2;
    delta: Rayleigh scale of building heights in metres.
    """

    name: str
    alpha: float
    beta: float
    delta: float

    def __post_init__(self):
        for key in ("alpha", "beta", "delta"):
            if not getattr(self, key) > 0:
                raise ConfigError(f"ITU environment {self.name}: {key} must be > 0")


# Fitted triples and terrestrial heights from the published fit table.
ENVIRONMENTS: dict[str, Environment] = {
    "suburban": Environment("suburban", 1.0, 6.581, 1.0, 30.0),
    "urban": Environment("urban", 1.0, 0.151, 1.0, 19.0),
    "dense_urban": Environment("dense_urban", 1.0, 0.106, 1.0, 25.0),
    "highrise_urban": Environment("highrise_urban", 1.124, 0.049, 1.024, 62.0),
}

# ITU-R P.1410 (alpha, beta, delta); the same values appear in Holis & Pechac (2008), Table I.
ITU_ENVIRONMENTS: dict[str, ItuEnvironment] = {
    "suburban": ItuEnvironment("suburban", 0.1, 750.0, 8.0),
    "urban": ItuEnvironment("urban", 0.3, 500.0, 15.0),
    "dense_urban": ItuEnvironment("dense_urban", 0.5, 300.0, 20.0),
    "highrise_urban": ItuEnvironment("highrise_urban", 0.5, 300.0, 50.0),
}


def environment(name_or_env) -> Environment:
    if isinstance(name_or_env, Environment):
        return name_or_env
    if isinstance(name_or_env, Mapping):
        return Environment(**name_or_env)
    key = str(name_or_env).lower().replace(" ", "_").replace("-", "_")
    aliases = {"dense": "dense_urban", "highrise": "highrise_urban"}
    key = aliases.get(key, key)
    try:
        return ENVIRONMENTS[key]
    except KeyError:
        raise ConfigError(f"unknown environment {name_or_env!r}") from None


@dataclass(frozen=True)
class NetworkParams:
    """Full scenario in linear SI units.

    Powers in watts, lambda_T in BS per m^2, distances in metres, gains and
    excess losses as linear ratios, theta_B_A in degrees.
    """

    P_T: float
    P_A: float
    lambda_T: float
    N: int
    r_D: float
    h_A: float
    h_U: float
    h_T: float
    alpha_L: float
    alpha_N: float
    alpha_A: float
    m_L: int
    m_N: int
    m_A: int
    eta_L: float
    eta_N: float
    eta_A: float
    G_m_A: float
    g_s_A: float
    G_m_T: float
    g_s_T: float
    theta_B_A: float
    sigma2: float
    policy: SpectrumPolicy = SpectrumPolicy.NOSS
    environment: Environment = field(default_factory=lambda: ENVIRONMENTS["urban"])
    los_only: bool = False

    def replace(self, **changes) -> "NetworkParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ValidatedParams:
    """Validated, immutable scenario with derived quantities.

    ``mu`` maps each tier to its average received-power constant:
    P_T*eta*g_s_T for the terrestrial tiers, P_A*G_m_A*eta_A for the aerial tier.
    """

    raw: NetworkParams
    h_UT: float
    h_UA: float
    d: float
    q_A: float
    mu_L: float
    mu_N: float
    mu_A: float

    def __getattr__(self, name):
        # forward raw scenario fields (P_T, alpha_L, ...) for terse formulas
        if name.startswith("__"):
            raise AttributeError(name)
        return getattr(object.__getattribute__(self, "raw"), name)

    def mu(self, tier: Tier) -> float:
        return {Tier.L: self.mu_L, Tier.N: self.mu_N, Tier.A: self.mu_A}[Tier(tier)]

    def alpha(self, tier: Tier) -> float:
        return {Tier.L: self.raw.alpha_L, Tier.N: self.raw.alpha_N, Tier.A: self.raw.alpha_A}[Tier(tier)]

    def m(self, tier: Tier) -> int:
        return {Tier.L: self.raw.m_L, Tier.N: self.raw.m_N, Tier.A: self.raw.m_A}[Tier(tier)]

    def eta(self, tier: Tier) -> float:
        return {Tier.L: self.raw.eta_L, Tier.N: self.raw.eta_N, Tier.A: self.raw.eta_A}[Tier(tier)]

    def min_distance(self, tier: Tier) -> float:
        return self.h_UA if Tier(tier) is Tier.A else self.h_UT

    def replace(self, **changes) -> "ValidatedParams":
        return validate(self.raw.replace(**changes))


def _as_int(value, name: str) -> int:
    if isinstance(value, (bool, np.bool_)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)) and float(value).is_integer():
        return int(value)
    raise ConfigError(f"{name} must be an integer (integer Nakagami/count required), got {value!r}")


def validate(raw: NetworkParams) -> ValidatedParams:
    """Check every scenario invariant and derive h_UT, h_UA, d, q_A and mu_*."""
    if isinstance(raw, ValidatedParams):
        return raw
    for name in ("P_T", "P_A", "r_D", "sigma2"):
        value = getattr(raw, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"{name} must be finite and > 0, got {value!r}")
    if not (math.isfinite(raw.lambda_T) and raw.lambda_T >= 0):
        raise ConfigError(f"density lambda_T must be >= 0, got {raw.lambda_T!r}")
    for name in ("eta_L", "eta_N", "eta_A", "G_m_A", "g_s_A", "G_m_T", "g_s_T"):
        value = getattr(raw, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"{name} must be a positive linear ratio, got {value!r}")
    for name in ("alpha_L", "alpha_N", "alpha_A"):
        value = getattr(raw, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"path-loss exponent {name} must be > 0, got {value!r}")
    m_vals = {}
    for name in ("m_L", "m_N", "m_A"):
        m_vals[name] = _as_int(getattr(raw, name), name)
        if m_vals[name] < 1:
            raise ConfigError(f"Nakagami parameter {name} must be >= 1, got {m_vals[name]}")
    n_aerial = _as_int(raw.N, "N")
    if n_aerial < 1:
        raise ConfigError(f"number of aerial BSs N must be >= 1, got {n_aerial}")
    if not raw.h_T < raw.h_U:
        raise ConfigError(f"height ordering violated: need h_T < h_U (h_T={raw.h_T}, h_U={raw.h_U})")
    if not raw.h_U < raw.h_A:
        raise ConfigError(f"height ordering violated: need h_U < h_A (h_U={raw.h_U}, h_A={raw.h_A})")
    if raw.h_T < 0:
        raise ConfigError(f"h_T must be >= 0, got {raw.h_T}")
    if not (0 < raw.theta_B_A <= 180):
        raise ConfigError(f"aerial beamwidth theta_B_A must lie in (0, 180], got {raw.theta_B_A}")
    policy = SpectrumPolicy.parse(raw.policy)
    env = environment(raw.environment)
    raw = dataclasses.replace(raw, policy=policy, environment=env, N=n_aerial, los_only=bool(raw.los_only), **m_vals)

    h_UT = raw.h_U - raw.h_T
    h_UA = raw.h_A - raw.h_U
    return ValidatedParams(
        raw=raw,
        h_UT=h_UT,
        h_UA=h_UA,
        d=math.sqrt(raw.r_D**2 + h_UA**2),
        q_A=raw.theta_B_A / 180.0,
        mu_L=raw.P_T * raw.eta_L * raw.g_s_T,
        mu_N=raw.P_T * raw.eta_N * raw.g_s_T,
        mu_A=raw.P_A * raw.G_m_A * raw.eta_A,
    )


# Scenario keys in config units -> (NetworkParams field, converter)
_CONFIG_KEYS: dict[str, tuple[str, Any]] = {
    "P_T_dBm": ("P_T", dbm_to_watts),
    "P_A_dBm": ("P_A", dbm_to_watts),
    "lambda_T_per_km2": ("lambda_T", lambda x: float(x) * 1e-6),
    "N": ("N", lambda x: x),
    "r_D": ("r_D", float),
    "h_A": ("h_A", float),
    "h_U": ("h_U", float),
    "h_T": ("h_T", float),
    "alpha_L": ("alpha_L", float),
    "alpha_N": ("alpha_N", float),
    "alpha_A": ("alpha_A", float),
    "m_L": ("m_L", lambda x: x),
    "m_N": ("m_N", lambda x: x),
    "m_A": ("m_A", lambda x: x),
    "eta_L_dB": ("eta_L", db_to_linear),
    "eta_N_dB": ("eta_N", db_to_linear),
    "eta_A_dB": ("eta_A", db_to_linear),
    "G_m_A_dB": ("G_m_A", db_to_linear),
    "g_s_A_dB": ("g_s_A", db_to_linear),
    "G_m_T_dB": ("G_m_T", db_to_linear),
    "g_s_T_dB": ("g_s_T", db_to_linear),
    "theta_B_A": ("theta_B_A", float),
    "sigma2_dBm": ("sigma2", dbm_to_watts),
    "policy": ("policy", SpectrumPolicy.parse),
    "environment": ("environment", environment),
    "los_only": ("los_only", bool),
}

# Default parameter table of the evaluation (config units).
DEFAULT_CONFIG: dict[str, Any] = {
    "P_T_dBm": 43.0,
    "P_A_dBm": 30.0,
    "lambda_T_per_km2": 5.0,
    "N": 10,
    "r_D": 2000.0,
    "h_A": 300.0,
    "h_U": 50.0,
    "h_T": 20.0,
    "alpha_L": 2.5,
    "alpha_N": 3.5,
    "alpha_A": 2.0,
    "m_L": 2,
    "m_N": 1,
    "m_A": 2,
    "eta_L_dB": -3.0,
    "eta_N_dB": -20.0,
    "eta_A_dB": -1.0,
    "G_m_A_dB": 0.0,
    "g_s_A_dB": -20.0,
    "G_m_T_dB": 0.0,
    "g_s_T_dB": -15.0,
    "theta_B_A": 18.0,
    "sigma2_dBm": -113.0,
    "policy": "NOSS",
    "environment": "urban",
    "los_only": False,
}

CONFIG_KEYS = tuple(_CONFIG_KEYS)


def params_from_config(config: Mapping[str, Any], base: Mapping[str, Any] | None = None) -> ValidatedParams:
    """Build validated parameters from a config-unit mapping layered over ``base``.

    ``h_T`` defaults to the environment's terrestrial height when absent from
    both mappings.
    """
    merged = dict(DEFAULT_CONFIG if base is None else base)
    if "environment" in config and "h_T" not in config and base is None:
        merged.pop("h_T", None)
    merged.update(config)
    unknown = set(merged) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in merged.items():
        name, conv = _CONFIG_KEYS[key]
        try:
            kwargs[name] = conv(value)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    if "h_T" not in kwargs:
        kwargs["h_T"] = kwargs["environment"].h_T
    return validate(NetworkParams(**kwargs))


def default_params(**overrides) -> ValidatedParams:
    """Table of default evaluation parameters with config-unit overrides."""
    return params_from_config(overrides)
