"""Distance laws: nearest-BS distances, exclusion radii and serving distances.

Terrestrial nearest-distance laws rest on the cumulative void intensity
``Lambda_nu(r) = 2 pi lambda_T int_0^z u P_nu(u) du`` with ``z`` the horizontal
distance of 3-D distance ``r``. It is tabulated once per parameter set on a
geometric grid of exact Gauss-Legendre panel integrals; queries add a partial
panel integral, so the table carries no interpolation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import los_clamp_distances, tier_probability
from .config import TERRESTRIAL_TIERS, TIERS, Tier, ValidatedParams
from .numerics import _gauss_legendre, gauss_legendre_panels, panel_edges

_Z_MAX = 1e9
_GL_ORDER = 16


class SupportError(ValueError):
    """A serving distance lies outside the serving tier's support."""


def _as_out(x, like):
    return x if np.ndim(like) else float(np.asarray(x).reshape(-1)[0])


class _IntensityTable:
    def __init__(self, params: ValidatedParams, tier: Tier):
        self.params = params
        self.tier = Tier(tier)
        h = params.h_UT
        kinks = [z for z in los_clamp_distances(params) if z < _Z_MAX]
        self.edges = np.unique(
            np.concatenate(([0.0], np.geomspace(1e-3 * h, _Z_MAX, 700), kinks))
        )
        nodes, weights = gauss_legendre_panels(self.edges, _GL_ORDER)
        vals = (nodes * self._prob(nodes) * weights).reshape(-1, _GL_ORDER).sum(axis=1)
        self.cum = np.concatenate(([0.0], np.cumsum(vals)))
        self.scale = 2.0 * math.pi * params.lambda_T

    def _prob(self, z):
        return np.atleast_1d(tier_probability(self.tier, z, self.params))

    def __call__(self, z) -> np.ndarray:
        """Cumulative intensity up to horizontal distance ``z``."""
        z = np.clip(np.atleast_1d(np.asarray(z, dtype=float)), 0.0, _Z_MAX)
        idx = np.clip(np.searchsorted(self.edges, z, side="right") - 1, 0, len(self.edges) - 2)
        lo = self.edges[idx]
        x, w = _gauss_legendre(_GL_ORDER)
        half = 0.5 * (z - lo)
        u = lo[:, None] + half[:, None] * (x[None, :] + 1.0)
        partial = (u * self._prob(u.ravel()).reshape(u.shape) * w[None, :]).sum(axis=1) * half
        return self.scale * (self.cum[idx] + partial)


@lru_cache(maxsize=64)
def intensity_table(params: ValidatedParams, tier: Tier) -> _IntensityTable:
    return _IntensityTable(params, Tier(tier))


def _horizontal(r, h):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return np.sqrt(np.maximum(r * r - h * h, 0.0)), r


def cumulative_intensity(r, tier: Tier, params: ValidatedParams):
    """Expected number of tier-``tier`` terrestrial BSs within 3-D distance ``r``."""
    z, r_arr = _horizontal(r, params.h_UT)
    if params.lambda_T == 0:
        return _as_out(np.zeros_like(r_arr), r)
    return _as_out(intensity_table(params, Tier(tier))(z), r)


def nearest_terrestrial_cdf(r, tier: Tier, params: ValidatedParams):
    """CDF of the distance to the nearest LoS (``L``) or NLoS (``N``) terrestrial BS."""
    lam = np.atleast_1d(cumulative_intensity(r, tier, params))
    return _as_out(-np.expm1(-lam), r)


def nearest_terrestrial_ccdf(r, tier: Tier, params: ValidatedParams):
    lam = np.atleast_1d(cumulative_intensity(r, tier, params))
    return _as_out(np.exp(-lam), r)


def nearest_terrestrial_pdf(r, tier: Tier, params: ValidatedParams):
    z, r_arr = _horizontal(r, params.h_UT)
    if params.lambda_T == 0:
        return _as_out(np.zeros_like(r_arr), r)
    lam = intensity_table(params, Tier(tier))(z)
    p = np.atleast_1d(tier_probability(tier, z, params))
    out = 2.0 * math.pi * params.lambda_T * r_arr * p * np.exp(-lam)
    return _as_out(np.where(r_arr >= params.h_UT, out, 0.0), r)


def nearest_aerial_cdf(r, params: ValidatedParams):
    """CDF of the distance to the nearest of the N aerial BSs (2-D disc deployment)."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    base = np.clip((params.d**2 - r_arr**2) / params.r_D**2, 0.0, 1.0)
    out = 1.0 - base**params.N
    out = np.where(r_arr <= params.h_UA, 0.0, np.where(r_arr >= params.d, 1.0, out))
    return _as_out(out, r)


def nearest_aerial_ccdf(r, params: ValidatedParams):
    return _as_out(1.0 - np.atleast_1d(nearest_aerial_cdf(r, params)), r)


def nearest_aerial_pdf(r, params: ValidatedParams):
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    base = np.clip((params.d**2 - r_arr**2) / params.r_D**2, 0.0, 1.0)
    out = params.N * (2.0 * r_arr / params.r_D**2) * base ** (params.N - 1)
    inside = (r_arr >= params.h_UA) & (r_arr <= params.d)
    return _as_out(np.where(inside, out, 0.0), r)


def nearest_ccdf(tier: Tier, r, params: ValidatedParams):
    """Probability that no BS of ``tier`` lies closer than ``r``."""
    if Tier(tier) is Tier.A:
        return nearest_aerial_ccdf(r, params)
    return nearest_terrestrial_ccdf(r, tier, params)


def nearest_pdf(tier: Tier, r, params: ValidatedParams):
    if Tier(tier) is Tier.A:
        return nearest_aerial_pdf(r, params)
    return nearest_terrestrial_pdf(r, tier, params)


@dataclass(frozen=True)
class ExclusionRadii:
    tau_L: float | np.ndarray
    tau_N: float | np.ndarray
    tau_A: float | np.ndarray
    n_prime: int

    def tau(self, tier: Tier):
        return {Tier.L: self.tau_L, Tier.N: self.tau_N, Tier.A: self.tau_A}[Tier(tier)]


def equal_power_distance(serving: Tier, other: Tier, r, params: ValidatedParams):
    """Distance at which a tier-``other`` BS matches the average power of a tier-``serving`` BS at ``r``."""
    serving, other = Tier(serving), Tier(other)
    r = np.asarray(r, dtype=float)
    ratio = params.mu(other) / params.mu(serving)
    return (ratio * r ** params.alpha(serving)) ** (1.0 / params.alpha(other))


def threshold_distance(serving: Tier, other: Tier, params: ValidatedParams) -> float:
    """Serving distance above which the exclusion radius of ``other`` exceeds its minimum distance."""
    serving, other = Tier(serving), Tier(other)
    return (params.mu(serving) * params.min_distance(other) ** params.alpha(other) / params.mu(other)) ** (
        1.0 / params.alpha(serving)
    )


def exclusion_radii(serving_tier: Tier, r, params: ValidatedParams, check: bool = True) -> ExclusionRadii:
    """Nearest possible interferer distance of every tier given the serving tier and distance.

    A BS of tier ``w`` interferes only beyond the distance where its average
    power falls below the serving BS's, never closer than its minimum
    distance (``h_UT`` or ``h_UA``). ``n_prime`` counts the interfering aerial BSs.
    """
    nu = Tier(serving_tier)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    lo = params.min_distance(nu)
    if check and (np.any(r_arr < lo * (1 - 1e-12)) or (nu is Tier.A and np.any(r_arr > params.d * (1 + 1e-12)))):
        raise SupportError(f"serving distance outside the support of tier {nu.value}")
    taus = {}
    for w in TIERS:
        if w is nu:
            taus[w] = r_arr
        else:
            taus[w] = np.maximum(params.min_distance(w), equal_power_distance(nu, w, r_arr, params))
    n_prime = params.N - 1 if nu is Tier.A else params.N
    return ExclusionRadii(
        tau_L=_as_out(taus[Tier.L], r),
        tau_N=_as_out(taus[Tier.N], r),
        tau_A=_as_out(taus[Tier.A], r),
        n_prime=n_prime,
    )


def serving_support(tier: Tier, params: ValidatedParams) -> tuple[float, float]:
    """Interval of 3-D serving distances with positive density (empty when lo == hi)."""
    nu = Tier(tier)
    if nu is Tier.A:
        return params.h_UA, params.d
    lo = params.h_UT
    if params.lambda_T == 0:
        return lo, lo
    # beyond this the aerial exclusion radius reaches d and no aerial BS may exist
    hi = (params.mu(nu) * params.d ** params.alpha_A / params.mu_A) ** (1.0 / params.alpha(nu))
    if nu is Tier.N and not params.los_only:
        return lo, max(lo, hi)
    if nu is Tier.N:
        return lo, lo
    return lo, max(lo, hi)


def serving_breakpoints(tier: Tier, params: ValidatedParams) -> list[float]:
    """Serving distances where the joint serving density has a kink."""
    nu = Tier(tier)
    pts = []
    for w in TIERS:
        if w is not nu:
            pts.append(threshold_distance(nu, w, params))
    kinks = los_clamp_distances(params)
    if nu is not Tier.A:
        pts += [math.hypot(z, params.h_UT) for z in kinks]
    for w in TERRESTRIAL_TIERS:
        if w is nu:
            continue
        for z in kinks:
            tau = math.hypot(z, params.h_UT)
            # serving distance whose exclusion radius for w hits the clamp kink
            pts.append((params.mu(nu) * tau ** params.alpha(w) / params.mu(w)) ** (1.0 / params.alpha(nu)))
    lo, hi = serving_support(nu, params)
    return sorted(p for p in pts if lo < p < hi)


def serving_joint_density(tier: Tier, r, params: ValidatedParams):
    """Density of {serving tier is ``tier`` and serving distance is ``r``}; integrates to A_tier."""
    nu = Tier(tier)
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    lo, hi = serving_support(nu, params)
    inside = (r_arr >= lo) & (r_arr <= hi) & (hi > lo)
    rr = np.where(inside, r_arr, max(lo, 1e-300))
    radii = exclusion_radii(nu, rr, params, check=False)
    out = np.atleast_1d(nearest_pdf(nu, rr, params))
    for w in TIERS:
        if w is not nu:
            out = out * np.atleast_1d(nearest_ccdf(w, radii.tau(w), params))
    return _as_out(np.where(inside, out, 0.0), r)


def serving_distance_pdf(tier: Tier, r, params: ValidatedParams, assoc) -> np.ndarray | float:
    """Density of the serving distance conditioned on association with ``tier``.

    ``assoc`` is an ``AssociationProbs`` (or any mapping tier -> probability).
    """
    nu = Tier(tier)
    a_nu = assoc[nu]
    joint = np.atleast_1d(serving_joint_density(nu, r, params))
    if a_nu <= 0:
        if np.any(joint > 0):
            raise ValueError(f"association probability of tier {nu.value} is 0 but its density is not")
        return _as_out(joint, r)
    return _as_out(joint / a_nu, r)


def interferer_aerial_distance_pdf(d_j, r, params: ValidatedParams):
    """Density of one interfering aerial BS's distance given all lie beyond ``r``."""
    if not r < params.d:
        raise ValueError(f"exclusion radius r={r} must be below d={params.d}")
    d_j = np.asarray(d_j, dtype=float)
    out = np.where((d_j >= r) & (d_j <= params.d), 2.0 * d_j / (params.d**2 - r**2), 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ServingRule:
    """Quadrature over the serving distance of one tier.

    ``sum(weights * g(r))`` approximates ``int g(r) joint(r) dr``, so
    ``weights.sum()`` is the tier's association probability.
    """

    tier: Tier
    r: np.ndarray
    weights: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.weights.sum())


@lru_cache(maxsize=256)
def serving_rule(tier: Tier, params: ValidatedParams, order: int = 16, n_sub: int = 8) -> ServingRule:
    """Composite Gauss-Legendre rule in the horizontal serving distance.

    Integrating over the horizontal distance removes the square-root
    behaviour of the terrestrial densities at ``r = h_UT``.
    """
    nu = Tier(tier)
    lo, hi = serving_support(nu, params)
    if not hi > lo:
        return ServingRule(nu, np.empty(0), np.empty(0))
    h = params.h_UA if nu is Tier.A else params.h_UT

    def to_z(r):
        return math.sqrt(max(r * r - h * h, 0.0))

    breaks = [to_z(p) for p in serving_breakpoints(nu, params)]
    edges = panel_edges(to_z(lo), to_z(hi), breaks, n_min=n_sub)
    z, w = gauss_legendre_panels(edges, order)
    r = np.sqrt(z * z + h * h)
    weights = w * np.atleast_1d(serving_joint_density(nu, r, params)) * z / r
    return ServingRule(nu, r, weights)
