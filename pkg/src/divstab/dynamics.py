"""Nonlinear vertical point-mass dynamics.

Gravity, quadratic drag against the relative airflow, mean wind with
sinusoidal gusts, and an airflow-dependent actuator-effectiveness loss.
The world advances one control period at a time with the thrust command
held constant over the period (zero-order hold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class VehicleParams:
    """Physical constants of the vehicle.

    drag_coeff_half is the aggregate 0.5*rho*C_D*A in kg/m, so that
    |f_D| = drag_coeff_half * v_air**2.  actuator_b (1/(m/s)) and
    actuator_c (N/(m/s)) parameterize thrust-effectiveness loss in axial
    inflow; both zero disables the effect.
    """

    mass: float = 1.0
    gravity: float = 9.81
    drag_coeff_half: float = 0.5
    actuator_b: float = 0.0
    actuator_c: float = 0.0

    def __post_init__(self) -> None:
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.gravity < 0:
            raise ValueError(f"gravity must be non-negative, got {self.gravity}")
        if self.drag_coeff_half < 0:
            raise ValueError("drag_coeff_half must be non-negative")
        if self.actuator_b < 0 or self.actuator_c < 0:
            raise ValueError("actuator constants must be non-negative")

    @property
    def hover_thrust(self) -> float:
        return self.mass * self.gravity


@dataclass(frozen=True)
class EnvParams:
    """Vertical wind field: mean plus sinusoidal gust, signed along z (up positive)."""

    wind_mean: float = 0.0
    gust_amplitude: float = 0.0
    gust_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.gust_amplitude < 0:
            raise ValueError("gust_amplitude must be non-negative")
        if self.gust_rate < 0:
            raise ValueError("gust_rate must be non-negative")


@dataclass(frozen=True)
class VehicleState:
    """True world state: height above the surface, vertical velocity, time."""

    z: float
    v_z: float
    t: float = 0.0


@dataclass(frozen=True)
class ThrustCommand:
    """A thrust command before and after the actuator-effectiveness loss."""

    commanded_thrust: float
    effective_thrust: float


def wind_at(env: EnvParams, t: float) -> float:
    """Wind velocity at time t: mean + gust amplitude * sin(rate * t)."""
    if env.gust_amplitude == 0.0:
        return env.wind_mean
    return env.wind_mean + env.gust_amplitude * math.sin(env.gust_rate * t)


def drag_force(v_wind: float, v_z: float, drag_coeff_half: float) -> float:
    """Quadratic drag along z, signed with the relative airflow v_air = v_wind - v_z."""
    v_air = v_wind - v_z
    if v_air == 0.0:
        return 0.0
    return math.copysign(drag_coeff_half * v_air * v_air, v_air)


def apply_actuator_effectiveness(u_commanded: float, v_air: float, b: float, c: float) -> float:
    """Thrust-effectiveness loss in axial inflow: max{u - b*v_air*u - c*v_air, 0}."""
    if not math.isfinite(u_commanded):
        raise ValueError(f"commanded thrust must be finite, got {u_commanded}")
    return max(u_commanded - b * v_air * u_commanded - c * v_air, 0.0)


def accel(state: VehicleState, effective_thrust: float, env: EnvParams, vehicle: VehicleParams) -> float:
    """Vertical acceleration -g + (u' + f_D)/m at the current state and wind."""
    f_d = drag_force(wind_at(env, state.t), state.v_z, vehicle.drag_coeff_half)
    return -vehicle.gravity + (effective_thrust + f_d) / vehicle.mass


def step(
    state: VehicleState,
    commanded_thrust: float,
    env: EnvParams,
    vehicle: VehicleParams,
    T: float,
    integrator: str = "rk4",
) -> VehicleState:
    """Advance one control period with the thrust command held constant.

    The effectiveness loss is applied once per period using the ambient
    airflow at the period start (the command signal is degraded before it
    reaches the vehicle, and the degradation is held over the period like
    the command itself).  Inside the period the nonlinear ODE is
    integrated with classical fixed-step RK4 by default; integrator
    "euler" takes a single explicit-Euler step for strict hold-everything
    replication.
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if not math.isfinite(commanded_thrust):
        raise ValueError(f"commanded thrust must be finite, got {commanded_thrust}")

    # effectiveness sees the ambient airflow, not the vehicle-relative one:
    # the loss lives in the propeller inflow driven by the wind field
    u_eff = apply_actuator_effectiveness(
        commanded_thrust, wind_at(env, state.t), vehicle.actuator_b, vehicle.actuator_c
    )

    g = vehicle.gravity
    m = vehicle.mass
    k = vehicle.drag_coeff_half

    def deriv(t: float, v: float) -> float:
        f_d = drag_force(wind_at(env, t), v, k)
        return -g + (u_eff + f_d) / m

    t0, z0, v0 = state.t, state.z, state.v_z
    if integrator == "euler":
        a0 = deriv(t0, v0)
        z1 = z0 + T * v0
        v1 = v0 + T * a0
    elif integrator == "rk4":
        k1v = deriv(t0, v0)
        k1z = v0
        k2v = deriv(t0 + T / 2, v0 + T / 2 * k1v)
        k2z = v0 + T / 2 * k1v
        k3v = deriv(t0 + T / 2, v0 + T / 2 * k2v)
        k3z = v0 + T / 2 * k2v
        k4v = deriv(t0 + T, v0 + T * k3v)
        k4z = v0 + T * k3v
        z1 = z0 + T / 6 * (k1z + 2 * k2z + 2 * k3z + k4z)
        v1 = v0 + T / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    else:
        raise ValueError(f"unknown integrator {integrator!r}")

    return replace(state, z=z1, v_z=v1, t=t0 + T)
