"""Inner-loop constant-divergence control.

P and PI laws mapping divergence error to a control acceleration u_z,
and the conversion to a thrust command in Newtons.  The setpoint is
theta* = -c**2 <= 0; holding it yields the exponential descent
z(t) = z0*exp(-c**2 t).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .dynamics import VehicleParams


@dataclass(frozen=True)
class ControllerConfig:
    gain_p: float  # K_z
    gain_i: float = 0.0  # I_z; 0 disables the integrator
    setpoint: float = 0.0  # theta* = -c**2
    integrator_limit: float = 2.0 * 9.81  # anti-windup clamp on |I_z * integral|, N

    def __post_init__(self) -> None:
        if self.gain_p < 0:
            raise ValueError("gain_p must be non-negative")
        if self.gain_i < 0:
            raise ValueError("gain_i must be non-negative")
        if self.integrator_limit <= 0:
            raise ValueError("integrator_limit must be positive")


@dataclass(frozen=True)
class ControllerState:
    integral_error: float = 0.0
    last_command_u_z: float = 0.0
    last_thrust: float = 0.0


def p_control(cfg: ControllerConfig, theta: float) -> float:
    """u_z = K_z * (theta* - theta)."""
    return cfg.gain_p * (cfg.setpoint - theta)


def pi_control(
    cfg: ControllerConfig,
    state: ControllerState,
    theta: float,
    T: float,
    gain_p_override: float | None = None,
) -> tuple[float, ControllerState]:
    """u_z = K_z*e + I_z*int(e dt), rectangular sums, anti-windup clamp.

    gain_p_override substitutes the effective K_z for this step (the
    adaptive outer loop modulates K_z without touching the config).
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    k_p = cfg.gain_p if gain_p_override is None else gain_p_override
    e = cfg.setpoint - theta
    integral = state.integral_error
    if cfg.gain_i > 0:
        integral = integral + e * T
        limit = cfg.integrator_limit / cfg.gain_i
        integral = max(-limit, min(limit, integral))
    u_z = k_p * e + cfg.gain_i * integral
    return u_z, replace(state, integral_error=integral, last_command_u_z=u_z)


def to_thrust(u_z: float, vehicle: VehicleParams) -> float:
    """u'_z = m*(u_z + g); gravity is folded into the command. No clamping here."""
    return vehicle.mass * (u_z + vehicle.gravity)
