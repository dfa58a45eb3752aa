"""Laplace transforms of the interference at the aerial user.

Reference implementations integrate the defining expressions adaptively. The
closed forms (hypergeometric reductions of the Meijer-G instances) and the
vectorised fixed-node engine used by the coverage and rate integrals are
validated against them.

Terrestrial interference from tier w beyond exclusion radius tau::

    L = exp(-2 pi lam int_{z(tau)}^inf (1 - (1 + s mu_w t^-alpha / m_w)^-m_w) z P_w(z) dz),
    t = sqrt(z^2 + h_UT^2)

Aerial interference from N' BSs uniform on the annulus beyond tau::

    L = sum_i C(N', i) q^(N'-i) (1-q)^i J(G_m)^(N'-i) J(g_s)^i
    J(g) = 2 / (d^2 - tau^2) int_tau^d (1 + s P_A g eta_A t^-alpha_A / m_A)^-m_A t dt
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import los_clamp_distances, tier_probability
from .config import TERRESTRIAL_TIERS, SpectrumPolicy, Tier, ValidatedParams
from .distributions import SupportError, exclusion_radii
from .numerics import (
    _gauss_legendre,
    gauss_legendre_panels,
    integrate_adaptive,
    meijerg_1222,
    meijerg_2122,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LaplaceEvalRequest:
    """Transform variable ``s`` (1/W) conditioned on serving tier and distance."""

    s: float
    serving_tier: Tier
    r: float
    policy: SpectrumPolicy | None = None

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"transform variable s must be > 0, got {self.s}")
        object.__setattr__(self, "serving_tier", Tier(self.serving_tier))
        if self.policy is not None:
            object.__setattr__(self, "policy", SpectrumPolicy.parse(self.policy))

    def policy_for(self, params: ValidatedParams) -> SpectrumPolicy:
        return self.policy if self.policy is not None else params.policy


def _check_terrestrial_exponent(params: ValidatedParams, tier: Tier) -> None:
    if params.alpha(tier) <= 2:
        raise ValueError(f"terrestrial interference diverges for alpha_{tier.value} <= 2")


def _nakagami_term(x, m: int):
    # 1 - (1 + x/m)^-m without cancellation at small x
    return -np.expm1(-m * np.log1p(np.asarray(x) / m))


# ---------------------------------------------------------------------------
# terrestrial


def _terrestrial_radial_integral(kernel, z0: float, tier: Tier, params: ValidatedParams, scale: float) -> float:
    """``int_{z0}^inf kernel(t) z P_w(z) dz`` with ``t = sqrt(z^2 + h_UT^2)``.

    Adaptive up to a split point, then mapped to ``u = (Z/z)^(alpha - 2)`` on
    (0, 1] so the algebraic tail becomes a bounded integrand. ``scale`` is a
    distance where the kernel changes character.
    """
    h, alpha = params.h_UT, params.alpha(tier)
    kinks = los_clamp_distances(params)
    split = 4.0 * max([z0, h, scale] + kinks)

    def body(z):
        return float(kernel(math.sqrt(z * z + h * h))) * z * float(tier_probability(tier, z, params))

    head = integrate_adaptive(body, z0, split, abs_tol=1e-14, rel_tol=1e-11, points=kinks).value
    k = alpha - 2.0

    def tail(u):
        if u == 0.0:
            return 0.0
        z = split * u ** (-1.0 / k)
        return body(z) * split / k * u ** (-1.0 / k - 1.0)

    return head + integrate_adaptive(tail, 0.0, 1.0, abs_tol=1e-14 * max(1.0, abs(head)), rel_tol=1e-11).value


def terrestrial_mean_interference(z0: float, tier: Tier, params: ValidatedParams, gain: float | None = None) -> float:
    """Mean interference from tier-``tier`` terrestrial BSs beyond horizontal distance ``z0``."""
    tier = Tier(tier)
    if params.lambda_T == 0:
        return 0.0
    _check_terrestrial_exponent(params, tier)
    g = params.g_s_T if gain is None else gain
    amp = params.P_T * params.eta(tier) * g
    alpha = params.alpha(tier)
    val = _terrestrial_radial_integral(lambda t: amp * t ** (-alpha), z0, tier, params, z0)
    return 2.0 * math.pi * params.lambda_T * val


def terrestrial_exponent_reference(s: float, tau: float, tier: Tier, params: ValidatedParams) -> float:
    """``2 pi lam int`` of the tier-``tier`` terrestrial PGFL integrand beyond 3-D distance ``tau``."""
    tier = Tier(tier)
    if params.lambda_T == 0:
        return 0.0
    _check_terrestrial_exponent(params, tier)
    h, alpha, mu, m = params.h_UT, params.alpha(tier), params.mu(tier), params.m(tier)
    z0 = math.sqrt(max(tau * tau - h * h, 0.0))
    val = _terrestrial_radial_integral(
        lambda t: _nakagami_term(s * mu * t ** (-alpha), m), z0, tier, params, (s * mu) ** (1.0 / alpha)
    )
    return 2.0 * math.pi * params.lambda_T * val


def laplace_terrestrial(req: LaplaceEvalRequest, params: ValidatedParams) -> float:
    """Laplace transform of the total terrestrial interference (LoS and NLoS tiers)."""
    if params.lambda_T == 0:
        return 1.0
    radii = exclusion_radii(req.serving_tier, req.r, params)
    total = 0.0
    for w in TERRESTRIAL_TIERS:
        if w is Tier.N and params.los_only:
            continue
        total += terrestrial_exponent_reference(req.s, float(radii.tau(w)), w, params)
    return math.exp(-total)


def theta_function(i: int, s: float, tau: float, params: ValidatedParams) -> float:
    """``G^{2,1}_{2,2}`` kernel of the LoS-only terrestrial closed form (term ``i``)."""
    m, alpha = params.m_L, params.alpha_L
    z = m * tau**alpha / (s * params.mu_L)
    return meijerg_2122(1 + i - m, 2 + i - m - 2 / alpha, 1 + i - m - 2 / alpha, 0.0, z)


def los_only_exponent(s: float, tau: float, params: ValidatedParams) -> float:
    """Closed-form LoS terrestrial exponent when every terrestrial link is LoS.

    ``2 pi lam tau^2 sum_i (s mu_L / m_L)^(1+i-m_L) tau^(alpha_L (m_L-i-1)) Theta_i / (alpha_L Gamma(m_L-i))``
    """
    _check_terrestrial_exponent(params, Tier.L)
    m, alpha = params.m_L, params.alpha_L
    k = s * params.mu_L / m
    acc = 0.0
    for i in range(m):
        acc += k ** (1 + i - m) * tau ** (alpha * (m - i - 1)) * theta_function(i, s, tau, params) / (
            alpha * math.gamma(m - i)
        )
    return 2.0 * math.pi * params.lambda_T * tau**2 * acc


def laplace_terrestrial_los_only(req: LaplaceEvalRequest, params: ValidatedParams) -> float:
    """Terrestrial Laplace transform in the LoS-only regime, via the Meijer-G closed form."""
    if not params.los_only:
        raise ValueError("the closed form requires the LoS-only regime (los_only=True)")
    if params.lambda_T == 0:
        return 1.0
    tau = float(exclusion_radii(req.serving_tier, req.r, params).tau_L)
    return math.exp(-los_only_exponent(req.s, tau, params))


# ---------------------------------------------------------------------------
# aerial


def aerial_gain_integral_reference(s: float, tau: float, g: float, params: ValidatedParams) -> float:
    """``J(g)``: mean of ``(1 + s P_A g eta_A t^-alpha_A / m_A)^-m_A`` over one interferer uniform beyond ``tau``."""
    d = params.d
    if tau >= d:
        return 1.0
    m, alpha = params.m_A, params.alpha_A
    k = s * params.P_A * g * params.eta_A / m

    def f(t):
        return (1.0 + k * t ** (-alpha)) ** (-m) * 2.0 * t / (d * d - tau * tau)

    return integrate_adaptive(f, tau, d, abs_tol=1e-15, rel_tol=1e-12).value


def _binomial_mixture(j_main: float, j_side: float, q: float, n_prime: int) -> float:
    total = 0.0
    for i in range(n_prime + 1):
        total += math.comb(n_prime, i) * (q * j_main) ** (n_prime - i) * ((1.0 - q) * j_side) ** i
    return total


def _aerial_tau(req: LaplaceEvalRequest, params: ValidatedParams):
    radii = exclusion_radii(req.serving_tier, req.r, params)
    return float(radii.tau_A), radii.n_prime


def laplace_aerial_integral(req: LaplaceEvalRequest, params: ValidatedParams) -> float:
    """Aerial Laplace transform from direct quadrature of the per-gain integrals."""
    tau, n_prime = _aerial_tau(req, params)
    if n_prime == 0 or tau >= params.d:
        return 1.0
    j_main = aerial_gain_integral_reference(req.s, tau, params.G_m_A, params)
    j_side = aerial_gain_integral_reference(req.s, tau, params.g_s_A, params)
    return _binomial_mixture(j_main, j_side, params.q_A, n_prime)


def omega_function(x, g: float, s, params: ValidatedParams):
    """Scaled Meijer-G kernel ``(m z)^m x^2 G^{1,2}_{2,2}(z)`` with ``z = m x^alpha / (s P_A g eta_A)``.

    Equals ``C * x^(alpha m + 2) g^-m G(z)`` up to the constant absorbed into
    the ``2 / (alpha Gamma(m))`` prefactor of the per-gain integral.
    """
    m, alpha = params.m_A, params.alpha_A
    x = np.asarray(x, dtype=float)
    z = m * x**alpha / (np.asarray(s, dtype=float) * params.P_A * g * params.eta_A)
    gval = meijerg_1222(1 - m - 2 / alpha, 1 - m, 0.0, -m - 2 / alpha, z)
    return z**m * x**2 * gval


def aerial_gain_integral_closed(s, tau, g: float, params: ValidatedParams):
    """Vectorised ``J(g)`` from the Meijer-G closed form; 1 where ``tau >= d``."""
    d = params.d
    m, alpha = params.m_A, params.alpha_A
    s, tau = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(tau, dtype=float))
    inside = tau < d
    tau_c = np.where(inside, tau, 0.5 * d)
    with np.errstate(invalid="ignore", over="ignore"):
        diff = omega_function(d, g, s, params) - omega_function(tau_c, g, s, params)
        j = 2.0 / (alpha * math.gamma(m)) * diff / (d * d - tau_c * tau_c)
    return np.where(inside, j, 1.0)


def laplace_aerial_meijerg(req: LaplaceEvalRequest, params: ValidatedParams) -> float:
    """Aerial Laplace transform from the Meijer-G closed form.

    Falls back to the quadrature route when the hypergeometric evaluation is
    not finite.
    """
    tau, n_prime = _aerial_tau(req, params)
    if n_prime == 0 or tau >= params.d:
        return 1.0
    j_main = float(aerial_gain_integral_closed(req.s, tau, params.G_m_A, params))
    j_side = float(aerial_gain_integral_closed(req.s, tau, params.g_s_A, params))
    if not (math.isfinite(j_main) and math.isfinite(j_side)):
        log.info("Meijer-G evaluation not finite at s=%g tau=%g; using quadrature", req.s, tau)
        return laplace_aerial_integral(req, params)
    return _binomial_mixture(j_main, j_side, params.q_A, n_prime)


# ---------------------------------------------------------------------------
# combination


def interference_tiers(serving: Tier, policy: SpectrumPolicy) -> tuple[bool, bool]:
    """(terrestrial interferes, aerial interferes) for a serving tier under a policy."""
    serving = Tier(serving)
    if SpectrumPolicy.parse(policy) is SpectrumPolicy.NOSS:
        return True, True
    return serving is not Tier.A, serving is Tier.A


def laplace_total(req: LaplaceEvalRequest, params: ValidatedParams) -> float:
    """Laplace transform of interference plus noise, ``exp(-sigma2 s) L_I(s)``, reference route."""
    terr, aer = interference_tiers(req.serving_tier, req.policy_for(params))
    value = math.exp(-params.sigma2 * req.s)
    if terr:
        value *= laplace_terrestrial(req, params)
    if aer:
        value *= laplace_aerial_integral(req, params)
    return value


# ---------------------------------------------------------------------------
# vectorised engine


_Z_BIG = 1e7
_PANELS = 140
_CHUNK = 256


class TerrestrialKernel:
    """Fixed-node rule for the terrestrial exponent as a smooth function of ``s``.

    Geometric panels in the horizontal distance (with the LoS-clamp kinks as
    edges) up to ``Z``, plus a mapped tail on ``u = (Z/z)^(alpha-2)``. A lower
    limit inside a panel is handled by a partial-panel rule.
    """

    def __init__(self, params: ValidatedParams, tier: Tier, order: int = 16, tail_order: int = 24):
        tier = Tier(tier)
        _check_terrestrial_exponent(params, tier)
        self.params, self.tier, self.order = params, tier, order
        self.h, self.alpha, self.mu, self.m = params.h_UT, params.alpha(tier), params.mu(tier), params.m(tier)
        kinks = los_clamp_distances(params)
        z_big = max([_Z_BIG] + [10.0 * k for k in kinks])
        self.edges = np.unique(
            np.concatenate(([0.0], np.geomspace(1e-2 * self.h, z_big, _PANELS), [k for k in kinks if k < z_big]))
        )
        z, w = gauss_legendre_panels(self.edges, order)
        self.t_pow = (z * z + self.h**2) ** (-self.alpha / 2)
        self.base = z * np.atleast_1d(tier_probability(tier, z, params)) * w
        k = self.alpha - 2.0
        u, wu = gauss_legendre_panels([0.0, 0.1, 0.4, 1.0], tail_order)
        zt = z_big * u ** (-1.0 / k)
        jac = z_big / k * u ** (-1.0 / k - 1.0)
        self.tail_pow = (zt * zt + self.h**2) ** (-self.alpha / 2)
        self.tail_base = zt * np.atleast_1d(tier_probability(tier, zt, params)) * jac * wu
        self.scale = 2.0 * math.pi * params.lambda_T
        self.n_panels = len(self.edges) - 1

    def _prob(self, z):
        return np.atleast_1d(tier_probability(self.tier, z, self.params))

    def exponent(self, s, tau) -> np.ndarray:
        """Exponent for paired arrays of ``s`` and 3-D exclusion radius ``tau``."""
        s, tau = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(tau, dtype=float))
        shape = s.shape
        s, tau = s.ravel(), tau.ravel()
        z0 = np.sqrt(np.maximum(tau * tau - self.h**2, 0.0))
        out = np.empty_like(s)
        x_gl, w_gl = _gauss_legendre(self.order)
        for lo in range(0, len(s), _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            sc, zc = s[sl], z0[sl]
            k0 = np.clip(np.searchsorted(self.edges, zc, side="right") - 1, 0, self.n_panels - 1)
            smu = (sc * self.mu)[:, None]
            vals = _nakagami_term(smu * self.t_pow[None, :], self.m) * self.base[None, :]
            panel = vals.reshape(len(sc), self.n_panels, self.order).sum(axis=2)
            suffix = np.concatenate((np.cumsum(panel[:, ::-1], axis=1)[:, ::-1], np.zeros((len(sc), 1))), axis=1)
            full = suffix[np.arange(len(sc)), k0 + 1]
            hi = self.edges[k0 + 1]
            half = 0.5 * (hi - zc)
            zp = zc[:, None] + half[:, None] * (x_gl[None, :] + 1.0)
            tp = (zp * zp + self.h**2) ** (-self.alpha / 2)
            part = (_nakagami_term(smu * tp, self.m) * zp * self._prob(zp.ravel()).reshape(zp.shape) * w_gl).sum(
                axis=1
            ) * half
            tail = (_nakagami_term(smu * self.tail_pow[None, :], self.m) * self.tail_base[None, :]).sum(axis=1)
            out[sl] = self.scale * (full + part + tail)
        return out.reshape(shape)


@lru_cache(maxsize=64)
def terrestrial_kernel(params: ValidatedParams, tier: Tier) -> TerrestrialKernel:
    return TerrestrialKernel(params, Tier(tier))


class ConditionalLaplace:
    """Vectorised ``L_V(s)`` for a fixed serving tier at an array of serving distances.

    Calling with an array ``s`` of the same shape as ``r`` evaluates the
    transform of interference plus noise elementwise.
    """

    def __init__(self, params: ValidatedParams, tier: Tier, r, policy: SpectrumPolicy | None = None):
        self.params = params
        self.tier = Tier(tier)
        self.r = np.asarray(r, dtype=float)
        self.policy = SpectrumPolicy.parse(policy) if policy is not None else params.policy
        self.terr, self.aer = interference_tiers(self.tier, self.policy)
        radii = exclusion_radii(self.tier, self.r, params, check=False)
        self.radii = radii
        self.tau = {w: np.asarray(radii.tau(w), dtype=float) for w in (Tier.L, Tier.N, Tier.A)}
        self.n_prime = radii.n_prime
        self.terr_tiers = [] if params.lambda_T == 0 else [
            w for w in TERRESTRIAL_TIERS if not (w is Tier.N and params.los_only)
        ]

    def log_value(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = -self.params.sigma2 * s
        if self.terr:
            for w in self.terr_tiers:
                out = out - terrestrial_kernel(self.params, w).exponent(s, np.broadcast_to(self.tau[w], s.shape))
        if self.aer and self.n_prime > 0:
            tau_a = np.broadcast_to(self.tau[Tier.A], s.shape)
            j_main = aerial_gain_integral_closed(s, tau_a, self.params.G_m_A, self.params)
            j_side = aerial_gain_integral_closed(s, tau_a, self.params.g_s_A, self.params)
            mix = self.params.q_A * j_main + (1.0 - self.params.q_A) * j_side
            out = out + self.n_prime * np.log(mix)
        return out

    def __call__(self, s) -> np.ndarray:
        return np.exp(self.log_value(s))


def laplace_total_fast(req: LaplaceEvalRequest, params: ValidatedParams) -> float:
    """``laplace_total`` through the vectorised engine (closed-form aerial, fixed-node terrestrial)."""
    lo = params.min_distance(req.serving_tier)
    if req.r < lo * (1 - 1e-12):
        raise SupportError("serving distance below the tier minimum")
    cl = ConditionalLaplace(params, req.serving_tier, np.array([req.r]), req.policy)
    return float(cl(np.array([req.s]))[0])
