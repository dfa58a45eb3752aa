"""Coverage probability and average achievable rate.

Conditioned on the serving tier nu and distance r, coverage is
P(H > T r^alpha (I + sigma2) / mu) with H ~ Gamma(m, 1/m). The exact route
expands the Gamma CCDF into derivatives of the Laplace transform of I + sigma2;
the approximate route replaces the Gamma CDF with the Alzer form
(1 - exp(-rho x))^m, rho = m (m!)^(-1/m), which needs no derivatives and is
exact for m = 1. Totals combine tiers by the law of total probability.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .association import assoc_probs
from .config import TIERS, SpectrumPolicy, Tier, ValidatedParams
from .distributions import serving_rule
from .interference import ConditionalLaplace, LaplaceEvalRequest
from .numerics import ConvergenceError, gauss_legendre_panels, richardson_derivative

MAX_EXACT_M = 4
DERIVATIVE_REL = 1e-6
T_MAX_LEVEL = 1e-10


class Method(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; expected 'exact' or 'approx'") from None


@dataclass(frozen=True)
class CoverageResult:
    total: float
    per_tier: dict = field(repr=False)  # Tier -> (A_nu, C_nu)
    T: float
    method: Method


@dataclass(frozen=True)
class RateResult:
    total: float
    per_tier: dict = field(repr=False)  # Tier -> (A_nu, R_nu)
    method: Method


def alzer_rho(m: int) -> float:
    return m * math.factorial(m) ** (-1.0 / m)


def laplace_kth_derivative(s: float, k: int, req: LaplaceEvalRequest, params: ValidatedParams,
                           target_rel: float = DERIVATIVE_REL, return_error: bool = False):
    """k-th derivative in ``s`` of the interference-plus-noise Laplace transform.

    Central differences with Richardson extrapolation on the vectorised
    engine; ``req.s`` is ignored in favour of ``s``.
    """
    if k < 0 or k > MAX_EXACT_M - 1:
        raise ValueError(f"derivative order must lie in [0, {MAX_EXACT_M - 1}]")
    cl = ConditionalLaplace(params, req.serving_tier, np.array([req.r]), req.policy)
    return richardson_derivative(lambda x: cl(np.asarray(x).reshape(1)), s, k,
                                 target_rel=target_rel, return_error=return_error)


def _check_threshold(T) -> np.ndarray:
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if np.any(~(T > 0)) or np.any(~np.isfinite(T)):
        raise ValueError("SINR threshold must be finite and > 0")
    return T


def _joint_coverage(tier: Tier, T, params: ValidatedParams, method: Method, policy=None) -> np.ndarray:
    """``A_nu * C_nu(T)`` for an array of thresholds."""
    tier, method = Tier(tier), Method.parse(method)
    T = _check_threshold(T)
    rule = serving_rule(tier, params)
    if rule.r.size == 0:
        return np.zeros_like(T)
    m, alpha, mu = params.m(tier), params.alpha(tier), params.mu(tier)
    cl = ConditionalLaplace(params, tier, rule.r, policy)
    s0 = T[:, None] * rule.r[None, :] ** alpha / mu
    if method is Method.APPROX:
        rho = alzer_rho(m)
        acc = np.zeros_like(s0)
        for k in range(1, m + 1):
            acc += (-1) ** (k + 1) * math.comb(m, k) * cl(k * rho * s0)
    else:
        if m > MAX_EXACT_M:
            raise ValueError(f"exact coverage supports m <= {MAX_EXACT_M}; got m_{tier.value} = {m}")
        base = m * s0
        acc = cl(base)
        for k in range(1, m):
            # derivative of x -> L(base * x) at x = 1 equals base^k L^(k)(base)
            try:
                dk = richardson_derivative(lambda x: cl(base * x), np.ones_like(base), k,
                                           target_rel=DERIVATIVE_REL, abs_floor=1e-6)
            except ConvergenceError as exc:
                raise ConvergenceError(f"tier {tier.value}, k={k}: {exc}") from exc
            acc = acc + (-1) ** k / math.factorial(k) * dk
    return acc @ rule.weights


def conditional_coverage(tier: Tier, T, params: ValidatedParams, method="approx", policy=None):
    """Coverage conditioned on association with ``tier``; 0 when the tier never serves."""
    T_arr = _check_threshold(T)
    rule = serving_rule(Tier(tier), params)
    if rule.mass <= 0:
        out = np.zeros_like(T_arr)
    else:
        out = np.clip(_joint_coverage(tier, T_arr, params, method, policy) / rule.mass, 0.0, 1.0)
    return out if np.ndim(T) else float(out[0])


def conditional_coverage_exact(tier: Tier, T, params: ValidatedParams, policy=None):
    return conditional_coverage(tier, T, params, Method.EXACT, policy)


def conditional_coverage_approx(tier: Tier, T, params: ValidatedParams, policy=None):
    return conditional_coverage(tier, T, params, Method.APPROX, policy)


def coverage(T: float, params: ValidatedParams, method="approx", policy=None) -> CoverageResult:
    """Total coverage ``sum_nu A_nu C_nu`` at threshold ``T`` (linear)."""
    method = Method.parse(method)
    assoc = assoc_probs(params)
    per_tier = {}
    total = 0.0
    for tier in TIERS:
        c = conditional_coverage(tier, T, params, method, policy) if assoc[tier] > 0 else 0.0
        per_tier[tier] = (assoc[tier], float(c))
        total += assoc[tier] * float(c)
    return CoverageResult(float(min(max(total, 0.0), 1.0)), per_tier, float(T), method)


def coverage_curve(T, params: ValidatedParams, method="approx", policy=None) -> np.ndarray:
    """Total coverage for an array of thresholds (one vectorised pass per tier)."""
    T = _check_threshold(T)
    assoc = assoc_probs(params)
    total = np.zeros_like(T)
    for tier in TIERS:
        if assoc[tier] > 0:
            total += assoc[tier] * conditional_coverage(tier, T, params, method, policy)
    return np.clip(total, 0.0, 1.0)


def _t_max(tier: Tier, params: ValidatedParams, method: Method, policy) -> float:
    """Smallest t (to 0.05) with conditional coverage at e^t - 1 below ``T_MAX_LEVEL``."""

    def cov(t):
        return float(conditional_coverage(tier, math.expm1(t), params, method, policy))

    lo, hi = 0.0, 8.0
    while cov(hi) >= T_MAX_LEVEL:
        lo, hi = hi, 2.0 * hi
        if hi > 400:
            raise ConvergenceError("rate integrand does not decay; is sigma2 > 0?")
    while hi - lo > 0.05:
        mid = 0.5 * (lo + hi)
        if cov(mid) >= T_MAX_LEVEL:
            lo = mid
        else:
            hi = mid
    return hi


def conditional_rate(tier: Tier, params: ValidatedParams, method="approx", policy=None,
                     panel_width: float = 1.0, order: int = 8) -> float:
    """Average rate (bits/s/Hz) conditioned on association with ``tier``.

    ``(1/ln 2) int_0^t_max C_nu(e^t - 1) dt`` with a composite Gauss-Legendre
    rule in ``t``; ``t_max`` is where the conditional coverage drops below 1e-10.
    """
    method = Method.parse(method)
    if not params.sigma2 > 0:
        raise ValueError("rate requires sigma2 > 0")
    tier = Tier(tier)
    if serving_rule(tier, params).mass <= 0:
        return 0.0
    t_max = _t_max(tier, params, method, policy)
    n_panels = max(1, int(math.ceil(t_max / panel_width)))
    t, w = gauss_legendre_panels(np.linspace(0.0, t_max, n_panels + 1), order)
    cov = conditional_coverage(tier, np.expm1(t), params, method, policy)
    return float(np.dot(w, cov) / math.log(2.0))


def conditional_rate_exact(tier: Tier, params: ValidatedParams, policy=None) -> float:
    return conditional_rate(tier, params, Method.EXACT, policy)


def conditional_rate_approx(tier: Tier, params: ValidatedParams, policy=None) -> float:
    return conditional_rate(tier, params, Method.APPROX, policy)


def rate(params: ValidatedParams, method="approx", policy=None) -> RateResult:
    """Average achievable rate ``sum_nu A_nu R_nu``."""
    method = Method.parse(method)
    assoc = assoc_probs(params)
    per_tier = {}
    total = 0.0
    for tier in TIERS:
        r_nu = conditional_rate(tier, params, method, policy) if assoc[tier] > 0 else 0.0
        per_tier[tier] = (assoc[tier], r_nu)
        total += assoc[tier] * r_nu
    return RateResult(total, per_tier, method)


def effective_policy(params: ValidatedParams, policy=None) -> SpectrumPolicy:
    return SpectrumPolicy.parse(policy) if policy is not None else params.policy
