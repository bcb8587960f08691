"""Outer-loop adaptive gain control.

Regulates the thrust-divergence covariance to a small positive setpoint
by scaling the inner-loop gain: the loop is pushed to the edge of
self-induced oscillation, where the gain itself encodes the distance to
the surface.  Both outer-loop corrections are relative to the running
gain K'_z, so the update has pure scale structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class AdaptiveConfig:
    cov_setpoint: float = 0.05  # cov*
    outer_p: float = 0.15  # P
    outer_i: float = 0.005  # I
    k_init: float = 50.0
    k_floor: float = 0.1
    convergence_band: float = 0.005  # |e_cov| threshold

    def __post_init__(self) -> None:
        if not (0.0 <= self.outer_p <= 1.0):
            raise ValueError("outer_p must be in [0, 1]")
        if not (0.0 <= self.outer_i <= 1.0):
            raise ValueError("outer_i must be in [0, 1]")
        if not self.k_init > self.k_floor >= 0.0:
            raise ValueError("need k_init > k_floor >= 0")


@dataclass(frozen=True)
class AdaptiveState:
    k_prime: float  # K'_z, the integrated gain
    k_effective: float  # K_z actually applied this step
    last_e_cov: Optional[float] = None

    @classmethod
    def initial(cls, cfg: AdaptiveConfig) -> "AdaptiveState":
        return cls(k_prime=cfg.k_init, k_effective=cfg.k_init)


def update_gain(cfg: AdaptiveConfig, state: AdaptiveState, cov_now: Optional[float]) -> AdaptiveState:
    """One outer-loop update from the current covariance reading.

    e_cov = cov* - cov;  K_z = K'*(1 + P*e_cov)  applied immediately;
    K' <- K'*(1 + I*e_cov)  carried to the next step, floored at k_floor.
    While the covariance is undefined (window refilling) the state passes
    through unchanged with K_z = K'.
    """
    if cov_now is None:
        return replace(state, k_effective=state.k_prime, last_e_cov=None)
    e_cov = cfg.cov_setpoint - cov_now
    k_eff = max(state.k_prime * (1.0 + cfg.outer_p * e_cov), 0.0)
    k_prime = max(state.k_prime * (1.0 + cfg.outer_i * e_cov), cfg.k_floor)
    return AdaptiveState(k_prime=k_prime, k_effective=k_eff, last_e_cov=e_cov)


def converged(cfg: AdaptiveConfig, state: AdaptiveState) -> bool:
    """True when the last covariance error sits inside the convergence band."""
    if state.last_e_cov is None:
        return False
    if math.isinf(cfg.convergence_band):
        return True
    return abs(state.last_e_cov) < cfg.convergence_band


def run_hover_ranging(scenario) -> Optional[tuple]:
    """Hover at theta* = 0 until the covariance error first enters the
    convergence band; returns the (K_z, z) pair at that step, or None if
    t_max passes without convergence.

    ``scenario`` is a harness ScenarioConfig with this module's config
    attached (imported lazily: the harness composes this module).
    """
    from .harness import hover_convergence, run_scenario

    if scenario.adaptive is None or scenario.two_phase is not None:
        raise ValueError("hover ranging needs a single-phase adaptive scenario")
    hit = hover_convergence(scenario, run_scenario(scenario))
    return None if hit is None else (hit[0], hit[1])


def run_edge_landing(scenario) -> list:
    """Run a two-phase edge-of-oscillation landing and return every
    landing-phase (K_z, z) sample whose covariance error is in-band."""
    from .harness import landing_inband_samples, run_scenario

    if scenario.adaptive is None or scenario.two_phase is None:
        raise ValueError("edge landing needs a two-phase adaptive scenario")
    return landing_inband_samples(scenario, run_scenario(scenario))
