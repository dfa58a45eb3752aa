"""Shared generators for the test suite."""
import numpy as np

from vhetnet.config import ENVIRONMENTS, default_params


def random_params(rng: np.random.Generator, **fixed):
    """A random valid scenario spanning all environments and tier constants."""
    env = str(rng.choice(sorted(ENVIRONMENTS)))
    h_T = ENVIRONMENTS[env].h_T
    h_A = rng.uniform(150, 600)
    h_U = rng.uniform(h_T + 5, h_A - 5)
    cfg = dict(
        environment=env, h_T=h_T, h_U=h_U, h_A=h_A,
        lambda_T_per_km2=rng.uniform(0.5, 50), N=int(rng.integers(1, 40)), r_D=rng.uniform(300, 5000),
        alpha_L=rng.uniform(2.1, 3), alpha_N=rng.uniform(3, 4.5), alpha_A=rng.uniform(2, 3),
        P_T_dBm=rng.uniform(30, 46), P_A_dBm=rng.uniform(20, 40),
        m_L=int(rng.integers(1, 5)), m_N=int(rng.integers(1, 5)), m_A=int(rng.integers(1, 5)),
    )
    cfg.update(fixed)
    return default_params(**cfg)


# criterion number -> list of (label, passed, detail, seconds); filled by test_acceptance
ACCEPTANCE: dict[int, list] = {}
ACCEPTANCE_BUDGET_S: dict[int, float] = {}
