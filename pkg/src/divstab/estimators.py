"""Distance estimators built on flow and thrust observables.

Instantaneous height estimates from acceleration or thrust during a
constant-divergence descent (vertical and lateral variants), the exact
thrust profile of a perfect constant-divergence landing under steady
wind, and the calibration line that turns converged feedback gains into
height estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .dynamics import EnvParams, VehicleParams, drag_force

__all__ = [
    "SingularEstimateError",
    "CalibrationLine",
    "PerfectLandingCurve",
    "z_from_accel",
    "z_from_thrust",
    "z_from_thrust_horizontal",
    "z_from_accel_horizontal",
    "perfect_landing_thrust",
    "fit_calibration",
    "estimate_z_from_gain",
]

_EPS = 1e-9  # denominators within this of zero are treated as singular


class SingularEstimateError(ValueError):
    """The observables carry no distance information at this instant."""


@dataclass(frozen=True)
class CalibrationLine:
    """Least-squares line z = slope * K + intercept with its fit quality."""

    slope: float
    intercept: float
    r_squared: float

    def __post_init__(self) -> None:
        if not -1e-12 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError("r_squared must lie in [0, 1]")


@dataclass(frozen=True)
class PerfectLandingCurve:
    """Required thrust u' versus height along an exact v_z = -c^2 z descent."""

    z: np.ndarray
    u_prime: np.ndarray
    c2: float

    def __post_init__(self) -> None:
        if self.z.shape != self.u_prime.shape or self.z.ndim != 1:
            raise ValueError("z and u_prime must be matching 1-D arrays")
        if np.any(np.diff(self.z) <= 0.0):
            raise ValueError("z samples must be strictly increasing")
        if np.any(self.u_prime < 0.0):
            raise ValueError("thrust samples must be >= 0")

    def height_at_thrust(self, u: float) -> float:
        """Invert the curve by interpolation (needs monotone thrust)."""
        if np.any(np.diff(self.u_prime) <= 0.0):
            raise ValueError("curve is not monotone in thrust; cannot invert")
        return float(np.interp(u, self.u_prime, self.z))


def z_from_accel(theta: float, theta_dot: float, a_z: float) -> float:
    """Height from vertical acceleration: z = a_z / (theta^2 + theta_dot).

    Exact on any trajectory; singular whenever the flow carries no range
    information (hover being the canonical case).
    """
    den = theta * theta + theta_dot
    if abs(den) < _EPS:
        raise SingularEstimateError(
            "theta^2 + theta_dot ~ 0: acceleration carries no height information"
        )
    return a_z / den


def z_from_thrust(u_z: float, c2: float) -> float:
    """Height from thrust on a tracked constant-divergence descent: u_z / c^4."""
    if c2 <= 0.0:
        raise ValueError("c2 must be positive")
    return u_z / (c2 * c2)


def z_from_thrust_horizontal(a_x: float, theta_x: float, theta_z: float) -> float:
    """Height from lateral acceleration at constant lateral flow.

    z = a_x / (theta_x * theta_z); level flight (theta_z = 0) makes the
    product singular — constant lateral flow then needs no acceleration.
    """
    den = theta_x * theta_z
    if abs(den) < _EPS:
        raise SingularEstimateError(
            "theta_x * theta_z ~ 0: lateral acceleration carries no height information"
        )
    return a_x / den


def z_from_accel_horizontal(
    a_x: float, theta_x: float, theta_z: float, theta_x_dot: float
) -> float:
    """Full lateral form z = a_x / (theta_x_dot + theta_x * theta_z)."""
    den = theta_x_dot + theta_x * theta_z
    if abs(den) < _EPS:
        raise SingularEstimateError(
            "theta_x_dot + theta_x * theta_z ~ 0: no height information"
        )
    return a_x / den


def perfect_landing_thrust(
    z_grid: Sequence[float],
    c2: float,
    env: EnvParams,
    vehicle: VehicleParams,
) -> PerfectLandingCurve:
    """Thrust required to hold v_z = -c^2 z exactly, under steady wind.

    Along the exact trajectory the commanded acceleration is a_z = c^4 z,
    so u' = m (a_z + g) - f_D with the drag force evaluated at
    v_air = v_wind + c^2 z (during descent the airflow pushes up and
    assists lift).  Negative requirements clamp to zero: thrust only
    pushes up.
    """
    if c2 <= 0.0:
        raise ValueError("c2 must be positive")
    z = np.asarray(z_grid, dtype=float)
    if z.ndim != 1 or np.any(z < 0.0):
        raise ValueError("z_grid must be a 1-D array of non-negative heights")
    u = np.empty_like(z)
    for i, zi in enumerate(z):
        v_z = -c2 * zi
        a_z = c2 * c2 * zi
        f_d = drag_force(env.wind_mean, v_z, vehicle.drag_coeff_half)
        u[i] = max(vehicle.mass * (a_z + vehicle.gravity) - f_d, 0.0)
    return PerfectLandingCurve(z=z, u_prime=u, c2=c2)


def fit_calibration(samples: Iterable[Tuple[float, float]]) -> CalibrationLine:
    """Ordinary least squares of height on gain over (K, z) samples."""
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (K, z) samples")
    k, z = pts[:, 0], pts[:, 1]
    if np.ptp(k) == 0.0:
        raise ValueError("all K values identical; calibration line is degenerate")
    design = np.column_stack([k, np.ones_like(k)])
    (slope, intercept), *_ = np.linalg.lstsq(design, z, rcond=None)
    residuals = z - (slope * k + intercept)
    ss_res = float(np.dot(residuals, residuals))
    ss_tot = float(np.dot(z - z.mean(), z - z.mean()))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return CalibrationLine(
        slope=float(slope), intercept=float(intercept), r_squared=min(max(r2, 0.0), 1.0)
    )


def estimate_z_from_gain(line: CalibrationLine, K: float) -> float:
    """Apply a calibration line to a converged gain."""
    return line.slope * K + line.intercept
