"""Coverage and rate analysis of aerial users in vertical heterogeneous networks.

Analytical (stochastic-geometry) and Monte Carlo evaluation of an aerial user
served by a Poisson field of terrestrial BSs and a finite set of aerial BSs.
"""
from .config import (
    Environment,
    ItuEnvironment,
    NetworkParams,
    SpectrumPolicy,
    Tier,
    ValidatedParams,
    default_params,
    params_from_config,
    validate,
)

__all__ = [
    "Environment",
    "ItuEnvironment",
    "NetworkParams",
    "SpectrumPolicy",
    "Tier",
    "ValidatedParams",
    "default_params",
    "params_from_config",
    "validate",
]

__version__ = "0.1.0"
