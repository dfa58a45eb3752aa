"""Point-process samplers and distances.

Points are ``(n, 3)`` float arrays of ``(x, y, z)`` in metres; the typical
aerial user sits on the z axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import los_probability_of_distance
from .config import ValidatedParams


@dataclass(frozen=True)
class Deployment:
    terrestrial: np.ndarray
    aerial: np.ndarray
    link_los: np.ndarray  # bool per terrestrial point


def _uniform_disc(n: int, radius: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    rho = radius * np.sqrt(rng.random(n))
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    return rho * np.cos(phi), rho * np.sin(phi)


def sample_ppp_disc(lam: float, R_sim: float, h: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP of intensity ``lam`` (per m^2) on a disc of radius ``R_sim`` at height ``h``."""
    if lam < 0 or R_sim <= 0:
        raise ValueError("need lam >= 0 and R_sim > 0")
    n = rng.poisson(lam * np.pi * R_sim**2) if lam > 0 else 0
    x, y = _uniform_disc(n, R_sim, rng)
    return np.column_stack((x, y, np.full(n, float(h))))


def sample_ppp_radii(lam: float, R_sim: float, rng: np.random.Generator) -> np.ndarray:
    """Horizontal radii of a PPP on a disc (the angles never matter for an on-axis user)."""
    if lam < 0 or R_sim <= 0:
        raise ValueError("need lam >= 0 and R_sim > 0")
    n = rng.poisson(lam * np.pi * R_sim**2) if lam > 0 else 0
    return R_sim * np.sqrt(rng.random(n))


def sample_bpp_disc(N: int, r_D: float, h_A: float, rng: np.random.Generator) -> np.ndarray:
    """Exactly ``N`` points uniform on the disc of radius ``r_D`` at height ``h_A``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    x, y = _uniform_disc(N, r_D, rng)
    return np.column_stack((x, y, np.full(N, float(h_A))))


def sample_bpp_cylinder(
    N: int, r_D: float, h_A: float, H_C: float, rng: np.random.Generator, h_U: float | None = None
) -> np.ndarray:
    """Exactly ``N`` points uniform in a cylinder of radius ``r_D`` and height ``H_C`` centred at ``h_A``.

    ``H_C = 0`` draws the same law (and the same random stream) as ``sample_bpp_disc``.
    """
    if H_C < 0:
        raise ValueError("cylinder height must be >= 0")
    if h_U is not None and h_A - H_C / 2 <= h_U:
        raise ValueError(
            f"cylinder bottom {h_A - H_C / 2} must lie above the aerial user height {h_U}"
        )
    pts = sample_bpp_disc(N, r_D, h_A, rng)
    if H_C > 0:
        pts[:, 2] = rng.uniform(h_A - H_C / 2, h_A + H_C / 2, N)
    return pts


def horizontal_distance(points: np.ndarray) -> np.ndarray:
    return np.hypot(points[:, 0], points[:, 1])


def classify_los(points: np.ndarray, params: ValidatedParams, rng: np.random.Generator) -> np.ndarray:
    """Independent LoS marks with probability P_L(horizontal distance)."""
    p = np.atleast_1d(los_probability_of_distance(horizontal_distance(points), params))
    return rng.random(len(points)) < p


def distance_3d(p, q):
    """Euclidean distance; broadcasts over leading dimensions."""
    diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    out = np.sqrt(np.sum(diff * diff, axis=-1))
    return out if np.ndim(out) else float(out)


def user_position(params: ValidatedParams) -> np.ndarray:
    return np.array([0.0, 0.0, params.h_U])


def sample_deployment(
    params: ValidatedParams, R_sim: float, rng: np.random.Generator, H_C: float = 0.0
) -> Deployment:
    terrestrial = sample_ppp_disc(params.lambda_T, R_sim, params.h_T, rng)
    los = classify_los(terrestrial, params, rng)
    aerial = sample_bpp_cylinder(params.N, params.r_D, params.h_A, H_C, rng, h_U=params.h_U)
    return Deployment(terrestrial, aerial, los)
