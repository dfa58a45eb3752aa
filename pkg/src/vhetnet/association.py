"""Tier-association probabilities.

A tier wins association when its nearest BS delivers the strongest average
power. The reference value of ``A_nu`` integrates the joint density of
{serving tier nu at distance r}: the nearest-BS density of tier nu times the
void probabilities of the other tiers inside their exclusion radii. The
``*_factorized`` variants multiply the two pairwise comparison
probabilities separately instead, which treats the two comparisons as
independent events.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .config import TIERS, Tier, ValidatedParams
from .distributions import (
    cumulative_intensity,
    exclusion_radii,
    nearest_ccdf,
    nearest_pdf,
    serving_breakpoints,
    serving_joint_density,
    serving_support,
    threshold_distance,
)
from .numerics import integrate_adaptive, upper_incomplete_gamma

DRIFT_TOL = 1e-6


class AssociationError(RuntimeError):
    """Association probabilities are inconsistent beyond quadrature noise."""


@dataclass(frozen=True)
class AssociationProbs:
    A_L: float
    A_N: float
    A_A: float

    def __getitem__(self, tier) -> float:
        return {Tier.L: self.A_L, Tier.N: self.A_N, Tier.A: self.A_A}[Tier(tier)]

    def as_dict(self) -> dict[Tier, float]:
        return {t: self[t] for t in TIERS}

    @property
    def total(self) -> float:
        return self.A_L + self.A_N + self.A_A


def _horizontal_integral(g, tier: Tier, lo: float, hi: float, params: ValidatedParams, breaks=()) -> float:
    """Integrate ``g(r)`` over 3-D distance ``[lo, hi]`` in the horizontal variable."""
    if not hi > lo:
        return 0.0
    h = params.min_distance(tier)

    def to_z(r):
        return math.sqrt(max(r * r - h * h, 0.0))

    def integrand(z):
        r = math.hypot(z, h)
        return float(g(r)) * z / r

    z_lo, z_hi = to_z(lo), to_z(hi)
    points = [to_z(b) for b in breaks]
    # geometric breaks keep the adaptive rule from stepping over mass near z_lo
    # when the support is many orders of magnitude wider than the bulk
    start = max(z_lo, 1.0)
    if z_hi > 100.0 * start:
        points += list(np.geomspace(start, z_hi, 2 + int(math.log10(z_hi / start) * 4))[1:-1])
    res = integrate_adaptive(integrand, z_lo, z_hi, abs_tol=1e-13, rel_tol=1e-10, points=points)
    return res.value


def assoc_prob_tier(tier: Tier, params: ValidatedParams) -> float:
    """Association probability of one tier by adaptive quadrature of the joint serving density."""
    tier = Tier(tier)
    lo, hi = serving_support(tier, params)
    return _horizontal_integral(
        lambda r: serving_joint_density(tier, r, params), tier, lo, hi, params, serving_breakpoints(tier, params)
    )


def assoc_prob_los(params: ValidatedParams) -> float:
    """Probability that the aerial user is served by a LoS terrestrial BS (0 when h_UT >= zeta_A^L(d))."""
    return assoc_prob_tier(Tier.L, params)


def assoc_prob_nlos(params: ValidatedParams) -> float:
    return assoc_prob_tier(Tier.N, params)


def assoc_prob_aerial(params: ValidatedParams) -> float:
    """Probability that the aerial user is served by an aerial BS."""
    return assoc_prob_tier(Tier.A, params)


def comparison_probability(serving: Tier, other: Tier, params: ValidatedParams) -> float:
    """P(nearest ``serving`` BS beats the nearest ``other`` BS), ignoring the third tier."""
    serving, other = Tier(serving), Tier(other)
    lo = params.min_distance(serving)
    if serving is Tier.A:
        hi = params.d
    else:
        # outside this range the aerial void probability vanishes only when other is A
        hi = serving_support(serving, params)[1] if other is Tier.A else math.inf
        if params.lambda_T == 0:
            return 0.0

    def g(r):
        tau = exclusion_radii(serving, r, params, check=False).tau(other)
        return float(np.atleast_1d(nearest_ccdf(other, tau, params))[0] * np.atleast_1d(nearest_pdf(serving, r, params))[0])

    if math.isinf(hi):
        # the terrestrial density decays like exp(-Lambda(r)); stop where it is negligible
        hi = _terrestrial_tail(serving, params)
    breaks = [threshold_distance(serving, other, params)] + serving_breakpoints(serving, params)
    return _horizontal_integral(g, serving, lo, hi, params, breaks)


def _terrestrial_tail(tier: Tier, params: ValidatedParams) -> float:
    r = 2.0 * params.h_UT + 1.0
    while cumulative_intensity(r, tier, params) < 40.0 and r < 1e9:
        r *= 2.0
    return r


def assoc_prob_los_factorized(params: ValidatedParams) -> float:
    """Product of the LoS-vs-NLoS and LoS-vs-aerial comparison probabilities."""
    if serving_support(Tier.L, params)[1] <= params.h_UT:
        return 0.0
    xi_n = 1.0 if params.los_only else comparison_probability(Tier.L, Tier.N, params)
    return xi_n * comparison_probability(Tier.L, Tier.A, params)


def assoc_prob_aerial_factorized(params: ValidatedParams) -> float:
    """Product of the aerial-vs-NLoS and aerial-vs-LoS comparison probabilities."""
    xi_n = 1.0 if params.los_only or params.lambda_T == 0 else comparison_probability(Tier.A, Tier.N, params)
    xi_l = 1.0 if params.lambda_T == 0 else comparison_probability(Tier.A, Tier.L, params)
    return xi_n * xi_l


def assoc_probs_factorized(params: ValidatedParams) -> AssociationProbs:
    a_l = assoc_prob_los_factorized(params)
    a_a = assoc_prob_aerial_factorized(params)
    return AssociationProbs(a_l, 1.0 - a_l - a_a, a_a)


def assoc_probs(params: ValidatedParams) -> AssociationProbs:
    """All three association probabilities.

    ``A_N`` is the complement of ``A_L + A_A``; it is also integrated directly
    and the two must agree within ``DRIFT_TOL``. A tier whose serving support
    is empty gets exactly 0; negative quadrature noise is clamped to 0 and the
    triple renormalised.
    """
    a_l = assoc_prob_los(params)
    a_a = assoc_prob_aerial(params)
    a_n_direct = assoc_prob_nlos(params)
    drift = a_l + a_a + a_n_direct - 1.0
    if abs(drift) > DRIFT_TOL:
        raise AssociationError(f"association probabilities drift from 1 by {drift:.3e}")
    lo, hi = serving_support(Tier.N, params)
    a_n = 1.0 - a_l - a_a if hi > lo else 0.0
    vals = np.clip([a_l, a_n, a_a], 0.0, 1.0)
    vals = vals / vals.sum()
    return AssociationProbs(float(vals[0]), float(vals[1]), float(vals[2]))


def assoc_prob_los_simplified(params: ValidatedParams, return_error: bool = False):
    """Closed-form LoS association probability when every terrestrial link is LoS.

    With ``zeta_1 = max(h_UT, zeta_A^L(h_UA))`` and ``zeta_2 = zeta_A^L(d)``::

        A_L = F_L(zeta_1) + exp(pi lam h_UT^2) r_D^(-2N)
              * sum_i C(N,i) (-1)^i d^(2(N-i)) (mu_A/mu_L)^(2i/alpha_A) (pi lam)^(-beta_i)
              * [Gamma(beta_i + 1, pi lam zeta_1^2) - Gamma(beta_i + 1, pi lam zeta_2^2)]

    where ``beta_i = alpha_L i / alpha_A``.

    The binomial sum alternates and expands ``(d^2 - rho^2)^N``; when the
    result is small against its terms, round-off grows with the ratio.
    ``return_error`` also returns a round-off bound (machine epsilon times
    the sum of absolute terms).
    """
    if not params.los_only:
        raise ValueError("the closed form requires the LoS-only regime (los_only=True)")
    lam = params.lambda_T
    if lam == 0 or params.h_UT >= serving_support(Tier.L, params)[1]:
        return (0.0, 0.0) if return_error else 0.0
    h = params.h_UT
    zeta_2 = (params.mu_L * params.d ** params.alpha_A / params.mu_A) ** (1.0 / params.alpha_L)
    zeta_1 = min(max(h, threshold_distance(Tier.L, Tier.A, params)), zeta_2)
    pl = math.pi * lam
    head = -math.expm1(-pl * (zeta_1**2 - h**2))
    total = 0.0
    magnitude = 0.0
    for i in range(params.N + 1):
        beta = params.alpha_L * i / params.alpha_A
        # exp(pl h^2) Gamma(beta+1, pl x^2) is evaluated as a ratio to avoid overflow
        ups = _scaled_gamma_difference(beta + 1.0, pl * zeta_1**2, pl * zeta_2**2, pl * h**2)
        coef = math.comb(params.N, i) * (-1) ** i * params.d ** (2 * (params.N - i))
        coef *= (params.mu_A / params.mu_L) ** (2 * i / params.alpha_A) * pl ** (-beta)
        total += coef * ups
        magnitude += abs(coef * ups)
    value = head + total / params.r_D ** (2 * params.N)
    if return_error:
        scale = params.r_D ** (2 * params.N)
        return value, 4 * (params.N + 1) * np.finfo(float).eps * (magnitude / scale + abs(head))
    return value


def _scaled_gamma_difference(a: float, x1: float, x2: float, shift: float) -> float:
    """``exp(shift) * (Gamma(a, x1) - Gamma(a, x2))`` for ``x1 <= x2``.

    Below the mode ``a`` both upper values sit near ``Gamma(a)``; the lower
    regularised function keeps the difference free of cancellation there.
    """
    if x2 <= a and x2 < 700:
        return math.exp(shift + special.gammaln(a)) * (special.gammainc(a, x2) - special.gammainc(a, x1))
    return _scaled_upper_gamma(a, x1, shift) - _scaled_upper_gamma(a, x2, shift)


def _scaled_upper_gamma(a: float, x: float, shift: float) -> float:
    """``exp(shift) * Gamma(a, x)``, computed without overflow for large arguments."""
    if x < 700:
        return math.exp(shift) * upper_incomplete_gamma(a, x)
    # Gamma(a, x) = gammaincc * Gamma(a); use logs to combine factors
    q = special.gammaincc(a, x)
    if q == 0:
        log_g = (a - 1) * math.log(x) - x  # leading asymptotic term
        return math.exp(shift + log_g)
    return math.exp(shift + math.log(q) + special.gammaln(a))
