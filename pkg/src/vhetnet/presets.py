"""Built-in scenarios. Each preset is a commented scenario document.

Preset ids are a stable contract; descriptions name the figure each one
reproduces as a data table.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Preset:
    name: str
    figure: str
    text: str


_PRESETS = [
    Preset(
        "fig-los-fit",
        "LoS probability versus elevation angle: ITU model against the fitted exponential",
        """\
# LoS probability against elevation angle for the four environment classes.
# analytical_exact is the ITU-R P.1410 model (receiver at 10 km),
# analytical_approx the exponential fit c - a exp(-b theta). The user height
# only needs to clear the tallest terrestrial BS.
params: {h_U: 100}
sweep: {variable: theta_deg, values: {start: 0.5, stop: 90, step: 0.5}}
outputs: [los_prob]
paths: [analytical_exact, analytical_approx]
series:
  - {name: suburban, params: {environment: suburban}}
  - {name: urban, params: {environment: urban}}
  - {name: dense_urban, params: {environment: dense_urban}}
  - {name: highrise_urban, params: {environment: highrise_urban}}
""",
    ),
    Preset(
        "fig-assoc-height",
        "Association probability versus aerial user height (h_A = 500 m), urban and suburban",
        """\
# Association probabilities of the three tiers as the aerial user climbs.
params: {h_A: 500}
sweep: {variable: h_U, values: {start: 50, stop: 290, step: 40}}
outputs: [association]
paths: [analytical_exact, montecarlo]
n_trials: 10000
seed: 1
series:
  - {name: urban, params: {environment: urban}}
  - {name: suburban, params: {environment: suburban}}
""",
    ),
    Preset(
        "fig-cov-threshold",
        "Coverage versus SINR threshold (h_U = 70 m, h_A = 200 m), 2-D disc and 3-D cylinder (175..225 m)",
        """\
# Coverage against the SINR threshold. The 3-D series draws aerial BS heights
# uniformly in [175, 225] m (simulation only).
params: {h_U: 70, h_A: 200}
sweep: {variable: T_dB, values: {start: -10, stop: 20, step: 2}}
outputs: [coverage]
n_trials: 10000
seed: 1
series:
  - {name: disc, paths: [analytical_exact, analytical_approx, montecarlo]}
  - {name: cylinder, paths: [montecarlo], mode: {kind: bpp3d, H_C: 50}}
""",
    ),
    Preset(
        "fig-cov-cylinder",
        "Coverage of a 3-D cylinder deployment whose height is comparable to its radius",
        """\
# Simulated coverage as the aerial cylinder grows relative to a small disc
# radius; H_C = 0 is the 2-D disc.
params: {h_U: 70, h_A: 300, r_D: 500}
sweep: {variable: H_C, values: [0, 100, 200, 300, 400]}
outputs: [coverage]
paths: [montecarlo]
T_dB: 5
n_trials: 10000
seed: 1
series:
  - {name: cylinder}
""",
    ),
    Preset(
        "fig-cov-tilt",
        "Coverage versus aerial user height for terrestrial down-tilt angles (vertical beamwidth 30 deg)",
        """\
# Full terrestrial antenna pattern (simulation only) against the
# sidelobe-only model used by the analysis.
sweep: {variable: h_U, values: {start: 30, stop: 290, step: 40}}
outputs: [coverage]
T_dB: 5
n_trials: 10000
seed: 1
series:
  - {name: sidelobe_only, paths: [analytical_exact, montecarlo]}
  - {name: tilt_4, paths: [montecarlo], mode: {kind: tilt, tilt: 4, beamwidth_T: 30}}
  - {name: tilt_8, paths: [montecarlo], mode: {kind: tilt, tilt: 8, beamwidth_T: 30}}
  - {name: tilt_12, paths: [montecarlo], mode: {kind: tilt, tilt: 12, beamwidth_T: 30}}
""",
    ),
    Preset(
        "fig-cov-height",
        "Coverage versus aerial user height under orthogonal and shared spectrum",
        """\
sweep: {variable: h_U, values: {start: 30, stop: 290, step: 20}}
outputs: [coverage]
paths: [analytical_exact, analytical_approx, montecarlo]
T_dB: 5
n_trials: 10000
seed: 1
series:
  - {name: OSS, params: {policy: OSS}}
  - {name: NOSS, params: {policy: NOSS}}
""",
    ),
    Preset(
        "fig-cov-density",
        "Coverage versus terrestrial BS density",
        """\
sweep: {variable: lambda_T_per_km2, values: [1, 2, 5, 10, 20, 50]}
outputs: [coverage]
paths: [analytical_exact, analytical_approx, montecarlo]
T_dB: 5
n_trials: 10000
seed: 1
series:
  - {name: NOSS_h50, params: {policy: NOSS, h_U: 50}}
  - {name: OSS_h50, params: {policy: OSS, h_U: 50}}
  - {name: OSS_h250, params: {policy: OSS, h_U: 250}}
""",
    ),
    Preset(
        "fig-cov-num-aerial",
        "Coverage versus number of aerial BSs, exact against approximate",
        """\
sweep: {variable: N, values: [2, 5, 10, 15, 20, 30]}
outputs: [coverage]
paths: [analytical_exact, analytical_approx, montecarlo]
T_dB: 5
n_trials: 10000
seed: 1
series:
  - {name: default}
""",
    ),
    Preset(
        "fig-los-only",
        "Validity of the LoS-only terrestrial simplification at low and high aerial users",
        """\
# Full LoS/NLoS model against the LoS-only simplification.
sweep: {variable: T_dB, values: {start: -10, stop: 20, step: 2}}
outputs: [coverage]
paths: [analytical_exact]
series:
  - {name: full_h30, params: {h_U: 30}}
  - {name: los_only_h30, params: {h_U: 30, los_only: true}}
  - {name: full_h270, params: {h_U: 270}}
  - {name: los_only_h270, params: {h_U: 270, los_only: true}}
""",
    ),
    Preset(
        "fig-rate-fading",
        "Average achievable rate versus aerial fading parameter for several aerial BS heights",
        """\
sweep: {variable: m_A, values: [1, 2, 3, 4]}
outputs: [rate]
paths: [analytical_exact, analytical_approx, montecarlo]
n_trials: 10000
seed: 1
series:
  - {name: h_A_200, params: {h_A: 200}}
  - {name: h_A_300, params: {h_A: 300}}
  - {name: h_A_500, params: {h_A: 500}}
""",
    ),
    Preset(
        "table-defaults",
        "All metrics at the default parameter table",
        """\
sweep: {variable: T_dB, values: [5]}
outputs: [association, coverage, rate]
paths: [analytical_exact, analytical_approx, montecarlo]
n_trials: 10000
seed: 1
series:
  - {name: default}
""",
    ),
]

PRESETS: dict[str, Preset] = {p.name: p for p in _PRESETS}


def list_presets() -> list[tuple[str, str]]:
    """(preset id, reproduced figure) pairs in registry order."""
    return [(p.name, p.figure) for p in _PRESETS]
