"""Monte Carlo simulation of the network seen by the typical aerial user.

Every trial draws its own generator from ``(seed, trial index)``, so results
do not depend on how trials are split across workers. A trial samples the
terrestrial PPP on a disc of radius ``R_sim`` plus the aerial BPP, associates
by the largest average received power and records the serving power and the
two interference components separately, so either spectrum policy can be
evaluated from the same trials. Terrestrial interference beyond ``R_sim`` is
added as its (deterministic) mean.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .channel import (
    los_probability_of_distance,
    sample_aerial_interferer_gain,
    sample_nakagami_power,
    terrestrial_gain,
)
from .config import TERRESTRIAL_TIERS, TIERS, SpectrumPolicy, Tier, ValidatedParams
from .distributions import exclusion_radii, serving_support
from .geometry import (
    classify_los,
    horizontal_distance,
    sample_bpp_disc,
    sample_ppp_disc,
    sample_ppp_radii,
)
from .interference import interference_tiers, terrestrial_mean_interference

DEFAULT_R_SIM = 10_000.0
Z_99 = 2.5758293035489004
WORKERS_ENV = "VHETNET_WORKERS"
_TIER_CODE = {Tier.L: 0, Tier.N: 1, Tier.A: 2}
_CHUNK = 2000


@dataclass(frozen=True)
class Mode:
    """Simulation mode: ``standard`` (2-D aerial disc), ``bpp3d`` (aerial cylinder of height ``H_C``)
    or ``tilt`` (full terrestrial antenna pattern with down-tilt and vertical beamwidth, degrees)."""

    kind: str = "standard"
    H_C: float = 0.0
    tilt: float | None = None
    beamwidth_T: float | None = None

    def __post_init__(self):
        if self.kind not in ("standard", "bpp3d", "tilt"):
            raise ValueError(f"unknown simulation mode {self.kind!r}")
        if self.kind == "tilt" and (self.tilt is None or self.beamwidth_T is None):
            raise ValueError("tilt mode needs tilt and beamwidth_T")

    @classmethod
    def standard(cls) -> "Mode":
        return cls()

    @classmethod
    def bpp3d(cls, H_C: float) -> "Mode":
        return cls("bpp3d", H_C=float(H_C))

    @classmethod
    def tilted(cls, tilt: float, beamwidth_T: float) -> "Mode":
        return cls("tilt", tilt=float(tilt), beamwidth_T=float(beamwidth_T))


STANDARD = Mode()


@dataclass(frozen=True)
class TrialOutcome:
    tier: Tier
    sinr: float
    rate: float
    serving_distance: float


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    ci_low: float
    ci_high: float
    n_trials: int
    seed: int


@dataclass(frozen=True)
class TrialBatch:
    """Per-trial components: tier code (0=L, 1=N, 2=A), serving distance, serving power, interference."""

    tier: np.ndarray
    r: np.ndarray
    signal: np.ndarray
    i_T: np.ndarray
    i_A: np.ndarray
    sigma2: float
    seed: int
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.tier)

    def interference(self, policy: SpectrumPolicy) -> np.ndarray:
        policy = SpectrumPolicy.parse(policy)
        if policy is SpectrumPolicy.NOSS:
            return self.i_T + self.i_A
        return np.where(self.tier == _TIER_CODE[Tier.A], self.i_A, self.i_T)

    def sinr(self, policy: SpectrumPolicy) -> np.ndarray:
        return self.signal / (self.sigma2 + self.interference(policy))


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one trial, keyed by (seed, trial index)."""
    return np.random.default_rng([int(seed), int(index)])


def wilson_interval(successes: int, n: int, z: float = Z_99) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def proportion_estimate(successes: int, n: int, seed: int) -> EstimateWithCI:
    lo, hi = wilson_interval(successes, n)
    p = successes / n
    return EstimateWithCI(p, min(lo, p), max(hi, p), n, seed)


def mean_estimate(values: np.ndarray, seed: int, z: float = Z_99) -> EstimateWithCI:
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateWithCI(mean, mean - z * se, mean + z * se, n, seed)


@lru_cache(maxsize=32)
def _tail_interference(params: ValidatedParams, R_sim: float) -> float:
    if params.lambda_T == 0:
        return 0.0
    tiers = [Tier.L] if params.los_only else list(TERRESTRIAL_TIERS)
    return sum(terrestrial_mean_interference(R_sim, w, params) for w in tiers)


def _trial(params: ValidatedParams, mode: Mode, R_sim: float, rng: np.random.Generator, tail: float):
    """One realisation: (tier, serving distance, signal, I_T, I_A)."""
    z_t = sample_ppp_radii(params.lambda_T, R_sim, rng)
    los = rng.random(len(z_t)) < np.atleast_1d(los_probability_of_distance(z_t, params))
    d_t = np.sqrt(z_t * z_t + params.h_UT**2)
    alpha_t = np.where(los, params.alpha_L, params.alpha_N)
    eta_t = np.where(los, params.eta_L, params.eta_N)
    if mode.kind == "tilt":
        gain_t = np.asarray(terrestrial_gain(z_t, params, mode.tilt, mode.beamwidth_T), dtype=float)
        gain_t = np.broadcast_to(gain_t, z_t.shape)
    else:
        gain_t = np.full(z_t.shape, params.g_s_T)
    avg_t = params.P_T * eta_t * gain_t * d_t ** (-alpha_t)

    rho_a = params.r_D * np.sqrt(rng.random(params.N))
    if mode.kind == "bpp3d" and mode.H_C > 0:
        if params.h_A - mode.H_C / 2 <= params.h_U:
            raise ValueError("cylinder bottom must lie above the aerial user")
        dz = rng.uniform(params.h_A - mode.H_C / 2, params.h_A + mode.H_C / 2, params.N) - params.h_U
    else:
        dz = params.h_UA
    d_a = np.sqrt(rho_a * rho_a + dz * dz)
    avg_a = params.mu_A * d_a ** (-params.alpha_A)

    # strongest average power per tier; ties resolved L > N > A
    best = np.full(3, -np.inf)
    best_idx = [-1, -1, -1]
    for code, mask in ((0, los), (1, ~los)):
        if mask.any():
            idx = np.flatnonzero(mask)
            j = idx[np.argmax(avg_t[idx])]
            best[code], best_idx[code] = avg_t[j], j
    j = int(np.argmax(avg_a))
    best[2], best_idx[2] = avg_a[j], j
    code = int(np.argmax(best))

    h_t = np.empty(len(z_t))
    if los.any():
        h_t[los] = sample_nakagami_power(params.m_L, rng, int(los.sum()))
    if (~los).any():
        h_t[~los] = sample_nakagami_power(params.m_N, rng, int((~los).sum()))
    h_a = sample_nakagami_power(params.m_A, rng, params.N)
    g_a = sample_aerial_interferer_gain(params, rng, params.N)
    p_t = avg_t * h_t
    p_a = params.P_A * params.eta_A * g_a * h_a * d_a ** (-params.alpha_A)

    if code == 2:
        k = best_idx[2]
        signal, r = float(avg_a[k] * h_a[k]), float(d_a[k])
        p_a[k] = 0.0  # serving link carries G_m_A and is not interference
    else:
        k = best_idx[code]
        signal, r = float(p_t[k]), float(d_t[k])
        p_t[k] = 0.0
    i_t = float(p_t.sum()) + tail
    i_a = float(p_a.sum())
    return code, r, signal, i_t, i_a


def run_trial(params: ValidatedParams, mode: Mode = STANDARD, rng: np.random.Generator | None = None,
              R_sim: float = DEFAULT_R_SIM, policy: SpectrumPolicy | None = None) -> TrialOutcome:
    """Simulate one deployment and return the serving tier, SINR and rate."""
    if rng is None:
        rng = np.random.default_rng()
    code, r, signal, i_t, i_a = _trial(params, mode, R_sim, rng, _tail_interference(params, R_sim))
    tier = TIERS[code]
    terr, aer = interference_tiers(tier, policy if policy is not None else params.policy)
    sinr = signal / (params.sigma2 + (i_t if terr else 0.0) + (i_a if aer else 0.0))
    return TrialOutcome(tier, sinr, math.log2(1.0 + sinr), r)


def _simulate_chunk(args) -> np.ndarray:
    params, mode, R_sim, seed, start, stop = args
    tail = _tail_interference(params, R_sim)
    out = np.empty((stop - start, 5))
    for row, idx in enumerate(range(start, stop)):
        out[row] = _trial(params, mode, R_sim, trial_rng(seed, idx), tail)
    return out


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_chunks(fn, params, mode, R_sim, seed, n_trials, workers):
    tasks = [(params, mode, R_sim, seed, lo, min(lo + _CHUNK, n_trials)) for lo in range(0, n_trials, _CHUNK)]
    if workers <= 1 or len(tasks) == 1:
        parts = [fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, tasks))  # map preserves task order
    return np.concatenate(parts) if parts else np.empty((0, 5))


@lru_cache(maxsize=16)
def simulate(params: ValidatedParams, n_trials: int, seed: int, mode: Mode = STANDARD,
             R_sim: float = DEFAULT_R_SIM, workers: int | None = None) -> TrialBatch:
    """Run ``n_trials`` trials (cached by arguments)."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    w = worker_count() if workers is None else workers
    data = _run_chunks(_simulate_chunk, params, mode, R_sim, seed, n_trials, w)
    return TrialBatch(data[:, 0].astype(np.int8), data[:, 1], data[:, 2], data[:, 3], data[:, 4],
                      params.sigma2, seed)


def estimate_coverage(params: ValidatedParams, T, n_trials: int, seed: int, mode: Mode = STANDARD,
                      policy: SpectrumPolicy | None = None, R_sim: float = DEFAULT_R_SIM):
    """Fraction of trials with SINR >= T (Wilson 99% interval); a list for array ``T``."""
    batch = simulate(params, n_trials, seed, mode, R_sim)
    sinr = batch.sinr(policy if policy is not None else params.policy)
    ts = np.atleast_1d(np.asarray(T, dtype=float))
    out = [proportion_estimate(int(np.count_nonzero(sinr >= t)), batch.n, seed) for t in ts]
    return out if np.ndim(T) else out[0]


def estimate_rate(params: ValidatedParams, n_trials: int, seed: int, mode: Mode = STANDARD,
                  policy: SpectrumPolicy | None = None, R_sim: float = DEFAULT_R_SIM) -> EstimateWithCI:
    """Mean of log2(1 + SINR) with a normal 99% interval."""
    batch = simulate(params, n_trials, seed, mode, R_sim)
    return mean_estimate(np.log2(1.0 + batch.sinr(policy if policy is not None else params.policy)), seed)


# ---------------------------------------------------------------------------
# association only


def association_window(params: ValidatedParams) -> float:
    """Horizontal radius beyond which no terrestrial BS can win association."""
    his = [serving_support(t, params)[1] for t in TERRESTRIAL_TIERS]
    hi = max(his)
    return math.sqrt(max(hi * hi - params.h_UT**2, 0.0)) * (1 + 1e-9) + 1.0


def _assoc_chunk(args) -> np.ndarray:
    params, _mode, R_win, seed, start, stop = args
    out = np.empty((stop - start, 5))
    for row, idx in enumerate(range(start, stop)):
        rng = trial_rng(seed, idx)
        pts = sample_ppp_disc(params.lambda_T, R_win, params.h_T, rng)
        los = classify_los(pts, params, rng)
        aer = sample_bpp_disc(params.N, params.r_D, params.h_A, rng)
        d_t = np.sqrt(horizontal_distance(pts) ** 2 + params.h_UT**2)
        d_a = np.sqrt(horizontal_distance(aer) ** 2 + params.h_UA**2)
        best = np.full(3, -np.inf)
        dist = np.full(3, np.nan)
        for code, tier, mask in ((0, Tier.L, los), (1, Tier.N, ~los)):
            if mask.any():
                dmin = d_t[mask].min()
                best[code], dist[code] = params.mu(tier) * dmin ** (-params.alpha(tier)), dmin
        dmin = d_a.min()
        best[2], dist[2] = params.mu_A * dmin ** (-params.alpha_A), dmin
        code = int(np.argmax(best))
        out[row] = (code, dist[code], dist[0], dist[1], dist[2])
    return out


@lru_cache(maxsize=16)
def simulate_association(params: ValidatedParams, n_trials: int, seed: int) -> np.ndarray:
    """Rows of (tier code, serving distance, nearest L, nearest N, nearest A) per trial.

    Terrestrial BSs are sampled only within the window where they can still
    win association, so tier frequencies are exact; nearest terrestrial
    distances are NaN when no BS of that tier falls inside the window.
    """
    return _run_chunks(_assoc_chunk, params, None, association_window(params), seed, n_trials, worker_count())


def estimate_association(params: ValidatedParams, n_trials: int, seed: int) -> dict:
    """Per-tier association frequencies with Wilson 99% intervals."""
    codes = simulate_association(params, n_trials, seed)[:, 0].astype(int)
    return {t: proportion_estimate(int(np.count_nonzero(codes == _TIER_CODE[t])), n_trials, seed) for t in TIERS}


def sample_nearest_distances(params: ValidatedParams, tier: Tier, n: int, seed: int,
                             R_sim: float = DEFAULT_R_SIM) -> np.ndarray:
    """Distances to the nearest BS of ``tier`` over ``n`` independent deployments (NaN if none)."""
    tier = Tier(tier)
    out = np.empty(n)
    for i in range(n):
        rng = trial_rng(seed, i)
        if tier is Tier.A:
            aer = sample_bpp_disc(params.N, params.r_D, params.h_A, rng)
            out[i] = np.sqrt(horizontal_distance(aer).min() ** 2 + params.h_UA**2)
            continue
        pts = sample_ppp_disc(params.lambda_T, R_sim, params.h_T, rng)
        los = classify_los(pts, params, rng)
        mask = los if tier is Tier.L else ~los
        z = horizontal_distance(pts)[mask]
        out[i] = np.sqrt(z.min() ** 2 + params.h_UT**2) if z.size else np.nan
    return out


# ---------------------------------------------------------------------------
# conditional interference (Laplace transform checks)


def sample_conditional_interference(params: ValidatedParams, tier: Tier, r: float, n: int, seed: int,
                                    R_sim: float = DEFAULT_R_SIM) -> tuple[np.ndarray, np.ndarray]:
    """Terrestrial and aerial interference given the serving tier and distance.

    Terrestrial BSs of tier w are kept only beyond the exclusion radius
    tau_w; the N' other aerial BSs are uniform on the part of the disc
    beyond tau_A. The mean terrestrial interference beyond ``R_sim`` is added.
    """
    tier = Tier(tier)
    radii = exclusion_radii(tier, r, params)
    tail = _tail_interference(params, R_sim)
    rho_min2 = max(float(radii.tau_A) ** 2 - params.h_UA**2, 0.0)
    tau_l, tau_n, h_ut2 = float(radii.tau_L), float(radii.tau_N), params.h_UT**2
    m_l, m_n, mu_l, mu_n = params.m_L, params.m_N, params.mu_L, params.mu_N
    a_l, a_n = params.alpha_L, params.alpha_N
    n_prime = radii.n_prime
    aerial = bool(n_prime) and rho_min2 < params.r_D**2
    i_t = np.empty(n)
    i_a = np.zeros(n)
    for k in range(n):
        rng = trial_rng(seed, k)
        z = sample_ppp_radii(params.lambda_T, R_sim, rng)
        los = rng.random(len(z)) < np.atleast_1d(los_probability_of_distance(z, params))
        d = np.sqrt(z * z + h_ut2)
        keep = d > np.where(los, tau_l, tau_n)
        if params.los_only:
            keep &= los
        d, los = d[keep], los[keep]
        n_los = int(los.sum())
        p_l = mu_l * sample_nakagami_power(m_l, rng, n_los) * d[los] ** (-a_l)
        p_n = mu_n * sample_nakagami_power(m_n, rng, len(d) - n_los) * d[~los] ** (-a_n)
        i_t[k] = float(p_l.sum() + p_n.sum()) + tail
        if aerial:
            rho2 = rng.uniform(rho_min2, params.r_D**2, n_prime)
            d_a = np.sqrt(rho2 + params.h_UA**2)
            g = sample_aerial_interferer_gain(params, rng, n_prime)
            h_a = sample_nakagami_power(params.m_A, rng, n_prime)
            i_a[k] = float(np.sum(params.P_A * params.eta_A * g * h_a * d_a ** (-params.alpha_A)))
    return i_t, i_a


# ---------------------------------------------------------------------------
# validation reports


def validate_2d_vs_3d(params: ValidatedParams, H_C: float, T_values, n_trials: int, seed: int,
                      policy: SpectrumPolicy | None = None) -> dict:
    """Coverage under the cylinder (3-D) and disc (2-D) aerial deployments."""
    flat = estimate_coverage(params, np.asarray(T_values, dtype=float), n_trials, seed, STANDARD, policy)
    cyl = estimate_coverage(params, np.asarray(T_values, dtype=float), n_trials, seed, Mode.bpp3d(H_C), policy)
    c2 = np.array([e.mean for e in flat])
    c3 = np.array([e.mean for e in cyl])
    return {
        "T": np.asarray(T_values, dtype=float),
        "coverage_2d": c2,
        "coverage_3d": c3,
        "max_abs_diff": float(np.max(np.abs(c2 - c3))) if len(c2) else 0.0,
        "thin_cylinder": bool(H_C == 0 or params.r_D / H_C >= 10),
        "n_trials": n_trials,
        "seed": seed,
    }


def validate_sidelobe_assumption(params: ValidatedParams, tilts, beamwidth_T: float, h_U_values, T: float,
                                 n_trials: int, seed: int, policy: SpectrumPolicy | None = None) -> dict:
    """Coverage with the full terrestrial antenna pattern against the sidelobe-only model."""
    rows = []
    for h_u in h_U_values:
        p = params.replace(h_U=float(h_u))
        base = estimate_coverage(p, T, n_trials, seed, STANDARD, policy).mean
        for tilt in tilts:
            val = estimate_coverage(p, T, n_trials, seed, Mode.tilted(tilt, beamwidth_T), policy).mean
            rows.append({"h_U": float(h_u), "tilt": float(tilt), "sidelobe_only": base, "tilted": val,
                         "delta": val - base})
    return {
        "rows": rows,
        "max_abs_delta": max((abs(r["delta"]) for r in rows), default=0.0),
        "beamwidth_T": beamwidth_T,
        "T": T,
        "n_trials": n_trials,
        "seed": seed,
    }
