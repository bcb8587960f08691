"""Analytic stability tools for divergence-feedback height control.

Linearized state-space models of a vehicle that regulates optical-flow
divergence, their zero-order-hold discretizations (drag-free and
linear-drag variants, plus a four-state lateral-flow case), closed-loop
characteristic polynomials, and the gain levels at which the closed loop
starts to oscillate or becomes unstable.

All models are per unit mass; gains carry units of N*s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "LinearModel",
    "CriticalGains",
    "drag_rate",
    "zoh_vacuum_model",
    "zoh_drag_model",
    "zoh_horizontal_model",
    "continuous_drag_model",
    "closed_loop_char_poly",
    "open_loop_zero",
    "unstable_gain_vacuum",
    "instability_height",
    "unstable_gain_drag",
    "unstable_gain_horizontal",
    "default_gain_grid",
    "continuous_critical_gains",
]

_IMAG_TOL = 1e-9  # |Im| above this counts as an oscillatory pole
_REAL_TOL = 1e-9  # Re above this counts as unstable (continuous time)


@dataclass(frozen=True)
class LinearModel:
    """State-space model linearized at one flight condition.

    ``T == 0`` marks a continuous-time model; ``T > 0`` a zero-order-hold
    discretization, in which case ``A`` holds the transition matrix and
    ``B`` the discretized input column.  ``C`` maps the state to the flow
    observation (vertical divergence, or lateral flow for the four-state
    model), ``D`` is the feedthrough term.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    T: float
    z: float
    v_z: float
    v_wind: float = 0.0
    p: float = 0.0  # linear drag rate at the operating point, 1/s
    v_x: Optional[float] = None  # lateral models only
    kind: str = "vacuum"

    def __post_init__(self) -> None:
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape != (n,) or self.C.shape != (n,):
            raise ValueError("model matrices have inconsistent dimensions")
        if self.z <= 0.0:
            raise ValueError("linearization height must be positive")
        if self.T < 0.0:
            raise ValueError("T must be >= 0")

    @property
    def is_discrete(self) -> bool:
        return self.T > 0.0


@dataclass(frozen=True)
class CriticalGains:
    """Gain thresholds found along a gain sweep of the closed loop.

    ``k_oscillation``: smallest gain at which the dominant pole pair turns
    complex.  ``k_unstable``: smallest gain at which a pole crosses the
    stability boundary.  Either is ``None`` when no crossing occurs within
    the swept range.
    """

    k_oscillation: Optional[float]
    k_unstable: Optional[float]

    def __post_init__(self) -> None:
        if self.k_oscillation is not None and self.k_unstable is not None:
            if self.k_oscillation > self.k_unstable * (1.0 + 1e-12):
                raise ValueError("k_oscillation must not exceed k_unstable")


def drag_rate(v_z: float, v_wind: float, beta: float) -> float:
    """Linear drag rate p = sign(v_wind - v_z) * beta * (v_wind - v_z).

    Rewrites the quadratic drag force at an operating point as p times the
    relative airflow, so the velocity dynamics become dv/dt = -p v + ...;
    beta is the lumped quadratic-drag coefficient (per unit mass).
    Always >= 0; zero only when the vehicle moves with the air.
    """
    if beta < 0.0:
        raise ValueError("drag coefficient must be >= 0")
    return beta * abs(v_wind - v_z)


def zoh_vacuum_model(z: float, v_z: float, T: float) -> LinearModel:
    """Drag-free double-integrator plant under a zero-order hold.

    State (height, vertical speed); output is the divergence v_z / z
    linearized at (z, v_z).
    """
    _require_point(z, T)
    phi = np.array([[1.0, T], [0.0, 1.0]])
    gamma = np.array([T * T / 2.0, T])
    c = np.array([-v_z / (z * z), 1.0 / z])
    return LinearModel(A=phi, B=gamma, C=c, D=0.0, T=T, z=z, v_z=v_z, kind="vacuum")


def zoh_drag_model(
    z: float, v_z: float, v_wind: float, beta: float, T: float
) -> LinearModel:
    """Plant with linearized quadratic drag under a zero-order hold.

    Requires a strictly positive drag rate at the operating point; with
    p = 0 the discretization below degenerates (use the vacuum model).
    """
    _require_point(z, T)
    p = drag_rate(v_z, v_wind, beta)
    if p <= 0.0:
        raise ValueError(
            "drag discretization needs p > 0 at the operating point "
            "(vehicle moving relative to the air)"
        )
    em1 = -math.expm1(-p * T)  # 1 - e^{-pT}, exact for small pT
    x = p * T
    if x >= 1e-3:
        gamma1 = T / p - em1 / (p * p)
    else:
        # series of (pT - 1 + e^{-pT}) / p^2; the direct form cancels
        gamma1 = T * T / 2.0 * (1.0 - x / 3.0 + x * x / 12.0 - x * x * x / 60.0)
    phi = np.array([[1.0, em1 / p], [0.0, math.exp(-p * T)]])
    gamma = np.array([gamma1, em1 / p])
    c = np.array([-v_z / (z * z), 1.0 / z])
    return LinearModel(
        A=phi, B=gamma, C=c, D=0.0, T=T, z=z, v_z=v_z, v_wind=v_wind, p=p, kind="drag"
    )


def zoh_horizontal_model(z: float, v_z: float, v_x: float, T: float) -> LinearModel:
    """Four-state drag-free model for lateral-flow feedback under a ZOH.

    State (height, vertical speed, lateral position, lateral speed);
    input is lateral thrust; output is the lateral flow v_x / z
    linearized at (z, v_x).  Vertical motion is uncontrolled here.
    """
    _require_point(z, T)
    phi = np.array(
        [
            [1.0, T, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, T],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    gamma = np.array([0.0, 0.0, T * T / 2.0, T])
    c = np.array([-v_x / (z * z), 0.0, 0.0, 1.0 / z])
    return LinearModel(
        A=phi, B=gamma, C=c, D=0.0, T=T, z=z, v_z=v_z, v_x=v_x, kind="horizontal"
    )


def continuous_drag_model(
    z: float, v_z: float, v_wind: float, beta: float
) -> LinearModel:
    """Continuous-time plant with linearized drag (p = 0 allowed)."""
    if z <= 0.0:
        raise ValueError("height must be positive")
    p = drag_rate(v_z, v_wind, beta)
    a = np.array([[0.0, 1.0], [0.0, -p]])
    b = np.array([0.0, 1.0])
    c = np.array([-v_z / (z * z), 1.0 / z])
    return LinearModel(
        A=a, B=b, C=c, D=0.0, T=0.0, z=z, v_z=v_z, v_wind=v_wind, p=p, kind="continuous"
    )


def closed_loop_char_poly(model: LinearModel, K: float) -> np.ndarray:
    """Characteristic polynomial of the loop closed with u = K (set - obs).

    Returns coefficients in w, highest power first, scaled by z**2 so the
    two-state drag-free case reads

        z^2 (w - 1)^2 + K ((zT - v_z T^2/2) w - zT - v_z T^2/2).

    Roots are the closed-loop poles.
    """
    if not model.is_discrete:
        raise ValueError("closed_loop_char_poly expects a discrete model")
    z, v_z, T = model.z, model.v_z, model.T
    if model.kind == "vacuum":
        half = 0.5 * v_z * T * T
        return np.array(
            [z * z, -2.0 * z * z + K * (z * T - half), z * z - K * (z * T + half)]
        )
    closed = model.A - K * np.outer(model.B, model.C)
    return z * z * np.poly(closed)


def open_loop_zero(z: float, v_z: float, T: float) -> float:
    """Zero of the discretized drag-free loop transfer function.

    w0 = (zT + v_z T^2/2) / (zT - v_z T^2/2); equals 1 at v_z = 0 and
    sits just inside it during descent.
    """
    _require_point(z, T)
    den = z * T - 0.5 * v_z * T * T
    if den == 0.0:
        raise ValueError("zero location undefined at this operating point")
    return (z * T + 0.5 * v_z * T * T) / den


def unstable_gain_vacuum(z: float, T: float) -> float:
    """Gain at which the drag-free discretized loop goes unstable: 2z/T."""
    _require_point(z, T)
    return 2.0 * z / T


def instability_height(K: float, T: float) -> float:
    """Height at which a fixed gain K destabilizes the drag-free loop: KT/2."""
    if K <= 0.0 or T <= 0.0:
        raise ValueError("gain and time step must be positive")
    return 0.5 * K * T


def unstable_gain_drag(
    z: float, v_z: float, p: float, T: float, simplified: bool = False
) -> float:
    """Destabilizing gain for the drag plant, from the w = -1 condition.

    The full expression keeps the v_z dependence; the simplified one drops
    the (numerically tiny) v_z term:

        K = p (1 + e^{pT}) z / (e^{pT} - 1).
    """
    if z <= 0.0 or p <= 0.0 or T <= 0.0:
        raise ValueError("needs z > 0, p > 0, T > 0")
    e = math.exp(p * T)
    if simplified:
        return p * (1.0 + e) * z / (e - 1.0)
    num = (2.0 * p * p + 2.0 * p * p * e) * z * z
    den = (2.0 * e - 2.0 - T * p - T * p * e) * v_z + (2.0 * p * e - 2.0 * p) * z
    if den <= 0.0:
        raise ValueError("operating point outside the formula's regime (den <= 0)")
    return num / den


def unstable_gain_horizontal(z: float, T: float) -> float:
    """Destabilizing lateral-flow gain; identical to the vertical 2z/T.

    The four-state loop (see ``zoh_horizontal_model``) closes only through
    the lateral pair, with transfer K T / (z (w - 1)), so the w = -1
    condition again gives K = 2z/T.
    """
    _require_point(z, T)
    return 2.0 * z / T


def default_gain_grid(z: float, T: float = 0.03, n: int = 1000) -> np.ndarray:
    """Logarithmic gain grid reaching well past the drag-free threshold."""
    return np.geomspace(0.1, 10.0 * unstable_gain_vacuum(z, T), n)


def continuous_critical_gains(
    z: float,
    v_z: float,
    v_wind: float,
    beta: float,
    delay: float,
    K_grid: Optional[Sequence[float]] = None,
) -> CriticalGains:
    """Critical gains of the continuous loop with a Pade-approximated delay.

    Closes the continuous drag plant through a gain K and a second-order
    Pade approximation of a pure delay, then sweeps K over ``K_grid``
    (default: ``default_gain_grid(z)``).  Returns the smallest K at which
    the dominant poles turn complex and the smallest K at which the loop
    goes unstable, each sharpened by bisection; ``None`` where the sweep
    shows no crossing.
    """
    if delay <= 0.0:
        raise ValueError("delay must be positive")
    if z <= 0.0:
        raise ValueError("height must be positive")
    grid = np.asarray(default_gain_grid(z) if K_grid is None else K_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("K_grid must be a strictly increasing 1-D sequence")

    p = drag_rate(v_z, v_wind, beta)
    tau = delay
    num_delay = np.array([tau * tau, -6.0 * tau, 12.0])
    den_delay = np.array([tau * tau, 6.0 * tau, 12.0])
    # loop char poly: s (s + p) z^2 D(s) + K (s z - v_z) N(s)
    base = z * z * np.polymul(np.array([1.0, p, 0.0]), den_delay)
    gain_part = np.polymul(np.array([z, -v_z]), num_delay)

    def poles(K: float) -> np.ndarray:
        coeffs = np.polyadd(base, K * gain_part)
        coeffs = np.trim_zeros(coeffs, "f")
        # deflate exact roots at the origin (v_z = 0 zeroes the constant
        # term; np.roots would otherwise report a spurious dominant 0)
        while coeffs.size > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        return np.roots(coeffs)

    def dominant_is_complex(K: float) -> bool:
        r = poles(K)
        return bool(abs(r[np.argmax(r.real)].imag) > _IMAG_TOL)

    def is_unstable(K: float) -> bool:
        return bool(np.max(poles(K).real) > _REAL_TOL)

    k_osc = grid[0] if dominant_is_complex(grid[0]) else None
    k_unst = grid[0] if is_unstable(grid[0]) else None
    for lo, hi in zip(grid[:-1], grid[1:]):
        if k_osc is None and dominant_is_complex(hi):
            k_osc = _bisect(dominant_is_complex, lo, hi)
        if k_unst is None and is_unstable(hi):
            k_unst = _bisect(is_unstable, lo, hi)
        if k_osc is not None and k_unst is not None:
            break
    return CriticalGains(
        k_oscillation=None if k_osc is None else float(k_osc),
        k_unstable=None if k_unst is None else float(k_unst),
    )


def _bisect(pred: Callable[[float], bool], lo: float, hi: float, iters: int = 60) -> float:
    # pred is False at lo, True at hi; returns the switch point
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _require_point(z: float, T: float) -> None:
    if z <= 0.0:
        raise ValueError("height must be positive")
    if T <= 0.0:
        raise ValueError("time step must be positive")
