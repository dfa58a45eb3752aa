"""Link-state models, antenna gains, fading and received power."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import Environment, ItuEnvironment, Tier, ValidatedParams
from .numerics import ConvergenceError, fit_simplex


class LinkState(enum.Enum):
    LOS = "LoS"
    NLOS = "NLoS"


@dataclass(frozen=True)
class AntennaPattern:
    mainlobe_gain: float
    sidelobe_gain: float
    beamwidth: float
    tilt: float | None = None

    def __post_init__(self):
        if not self.sidelobe_gain < self.mainlobe_gain:
            raise ValueError("sidelobe gain must be below the mainlobe gain")
        if not 0 < self.beamwidth <= 180:
            raise ValueError("beamwidth must lie in (0, 180] degrees")


def itu_los_probability(z, h_tx: float, h_rx: float, env: ItuEnvironment):
    """ITU-R P.1410 probability of an unobstructed ray over horizontal distance ``z``.

    Product over ``n = 0..m`` of ``1 - exp(-h_n^2 / (2 delta^2))`` where
    ``h_n`` is the ray height above the n-th building crossing and
    ``m = floor(z sqrt(alpha beta) / 1000 - 1)``; an empty product is 1.
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z_arr < 0):
        raise ValueError("horizontal distance must be non-negative")
    m = np.floor(z_arr * math.sqrt(env.alpha * env.beta) / 1000.0 - 1.0).astype(np.int64)
    out = np.ones_like(z_arr)
    two_delta_sq = 2.0 * env.delta**2
    for idx in np.flatnonzero(m >= 0):
        n = np.arange(m[idx] + 1, dtype=float)
        h = h_tx - (n + 0.5) * (h_tx - h_rx) / (m[idx] + 1)
        # log-sum keeps long products (m ~ 1e4) accurate
        out[idx] = math.exp(np.sum(np.log1p(-np.exp(-h * h / two_delta_sq))))
    return out if np.ndim(z) else float(out[0])


def fitted_los_probability(theta, env: Environment, per_radian: bool = False):
    """Exponential LoS fit ``clamp(c - a exp(-b theta), 0, 1)``; theta in degrees.

    With ``per_radian`` the fitted ``b`` is read as per-radian instead (for
    sensitivity checks of the angle-unit reading).
    """
    theta = np.asarray(theta, dtype=float)
    t = np.radians(theta) if per_radian else theta
    p = np.clip(env.c - env.a * np.exp(-env.b * t), 0.0, 1.0)
    return p if p.ndim else float(p)


def elevation_angle_deg(z, h_ut: float):
    return np.degrees(np.arctan2(h_ut, np.asarray(z, dtype=float)))


def los_probability_of_distance(z, params: ValidatedParams):
    """LoS probability of a terrestrial BS at horizontal distance ``z`` from the user."""
    z = np.asarray(z, dtype=float)
    if params.los_only:
        p = np.ones_like(z)
    else:
        p = fitted_los_probability(elevation_angle_deg(z, params.h_UT), params.environment)
    return p if np.ndim(p) else float(p)


def nlos_probability_of_distance(z, params: ValidatedParams):
    p = 1.0 - np.asarray(los_probability_of_distance(z, params))
    return p if np.ndim(p) else float(p)


def tier_probability(tier: Tier, z, params: ValidatedParams):
    if Tier(tier) is Tier.L:
        return los_probability_of_distance(z, params)
    if Tier(tier) is Tier.N:
        return nlos_probability_of_distance(z, params)
    raise ValueError("link-state probability is only defined for terrestrial tiers")


def los_clamp_distances(params: ValidatedParams) -> list[float]:
    """Horizontal distances where the clamped LoS fit has a kink (may be empty)."""
    if params.los_only:
        return []
    env = params.environment
    out = []
    for level in (0.0, 1.0):
        # c - a exp(-b theta) = level
        if env.a <= 0:
            continue
        arg = (env.c - level) / env.a
        if arg <= 0:
            continue
        theta = -math.log(arg) / env.b
        if 0 < theta < 90:
            out.append(params.h_UT / math.tan(math.radians(theta)))
    return sorted(out)


@dataclass(frozen=True)
class LosFit:
    a: float
    b: float
    c: float
    residual_rms: float
    converged: bool

    def as_environment(self, name: str, h_T: float) -> Environment:
        return Environment(name, self.a, self.b, self.c, h_T)


DEFAULT_FIT_GRID = np.arange(0.5, 90.0 + 1e-9, 0.5)


def fit_los_parameters(
    env: ItuEnvironment,
    h_T: float,
    h_rx: float = 10_000.0,
    theta_grid=DEFAULT_FIT_GRID,
    per_radian: bool = False,
    max_rms: float = 0.05,
    target=None,
) -> LosFit:
    """Least-squares fit of ``c - a exp(-b theta)`` to the ITU model on a theta grid.

    The ITU curve is sampled with transmitter height ``h_T`` and receiver height
    ``h_rx`` at horizontal distances ``(h_rx - h_T) / tan(theta)``. ``target``
    replaces the ITU samples (used for self-consistency checks).
    """
    theta = np.asarray(theta_grid, dtype=float)
    if target is None:
        z = (h_rx - h_T) / np.tan(np.radians(theta))
        target = itu_los_probability(z, h_T, h_rx, env)
    target = np.asarray(target, dtype=float)
    t = np.radians(theta) if per_radian else theta

    def sse(x):
        a, b, c = x
        return float(np.sum((c - a * np.exp(-b * t) - target) ** 2))

    starts = [(1.0, 1.0, 1.0), (1.0, 0.1, 1.0)]
    res = fit_simplex(sse, starts, n_points=len(theta), tol=1e-10)
    if not res.converged or res.residual_rms > max_rms:
        raise ConvergenceError(
            f"LoS fit for {env.name} did not converge (residual RMS {res.residual_rms:.3e})"
        )
    a, b, c = (float(v) for v in res.x)
    return LosFit(a, b, c, res.residual_rms, res.converged)


def terrestrial_gain(r_horizontal, params: ValidatedParams, tilt=None, beamwidth_T=None):
    """Terrestrial BS antenna gain toward the user.

    Without ``tilt`` every BS is seen through its sidelobe (``g_s_T``). With a
    down-tilt and vertical beamwidth (degrees) the mainlobe gain applies where
    ``r tan(tilt + bw/2) < h_U < h_T - r tan(tilt - bw/2)``.
    """
    r = np.asarray(r_horizontal, dtype=float)
    if tilt is None:
        g = np.full_like(r, params.g_s_T)
    else:
        if beamwidth_T is None:
            raise ValueError("beamwidth_T is required with a tilt angle")
        lower = r * math.tan(math.radians(tilt + beamwidth_T / 2))
        upper = params.h_T - r * math.tan(math.radians(tilt - beamwidth_T / 2))
        main = (lower < params.h_U) & (params.h_U < upper)
        g = np.where(main, params.G_m_T, params.g_s_T)
    return g if g.ndim else float(g)


def sample_aerial_interferer_gain(params: ValidatedParams, rng: np.random.Generator, size=None):
    """Gain of interfering aerial BSs: mainlobe with probability q_A, else sidelobe."""
    main = rng.random(size) < params.q_A
    return np.where(main, params.G_m_A, params.g_s_A)


def sample_nakagami_power(m: int, rng: np.random.Generator, size=None):
    """Unit-mean Gamma(m, 1/m) power gain of a Nakagami-m channel."""
    if m < 1:
        raise ValueError("Nakagami parameter must be >= 1")
    return rng.gamma(m, 1.0 / m, size)


def received_power(tier: Tier, distance, gain, fading, params: ValidatedParams):
    """Received power ``P eta gain fading distance^-alpha`` for the tier's constants."""
    tier = Tier(tier)
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise ValueError("distance must be positive")
    tx = params.P_A if tier is Tier.A else params.P_T
    out = tx * params.eta(tier) * np.asarray(gain) * np.asarray(fading) * distance ** (-params.alpha(tier))
    return out if np.ndim(out) else float(out)
