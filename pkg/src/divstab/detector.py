"""Self-induced oscillation detection.

A sliding-window covariance between the thrust the vehicle was applying
and the divergence it subsequently observed.  During a smooth descent
the two anti-correlate (thrust responds against the error); once the
loop oscillates at its delay-set frequency, the applied thrust and the
motion it produced move together and the covariance turns positive.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np


@dataclass(frozen=True)
class DetectorThresholds:
    theta_thr: float = 0.01
    cov_thr: float = 0.01

    def __post_init__(self) -> None:
        if not (np.isfinite(self.theta_thr) and np.isfinite(self.cov_thr)):
            raise ValueError("thresholds must be finite")


class CovWindow:
    """Paired ring buffer of (u'_z, theta_z) samples, default capacity 20.

    Covariance is defined only once the buffer is full; population (1/N)
    normalization, since the detection thresholds were tuned at fixed N.
    """

    def __init__(self, capacity: int = 20):
        if capacity < 2:
            raise ValueError(f"capacity must be >= 2, got {capacity}")
        self.capacity = capacity
        self._u: deque[float] = deque(maxlen=capacity)
        self._theta: deque[float] = deque(maxlen=capacity)

    def push(self, u_prime: float, theta: float) -> None:
        self._u.append(u_prime)
        self._theta.append(theta)

    def clear(self) -> None:
        self._u.clear()
        self._theta.clear()

    @property
    def full(self) -> bool:
        return len(self._u) == self.capacity

    def cov(self) -> Optional[float]:
        """Population covariance over the window, or None until full."""
        if not self.full:
            return None
        u = np.asarray(self._u)
        th = np.asarray(self._theta)
        return float(np.mean((u - u.mean()) * (th - th.mean())))


def window_cov(window: CovWindow) -> float:
    c = window.cov()
    if c is None:
        raise ValueError("covariance undefined: window not full")
    return c


def detect_onset(
    trace: Iterable,
    thr: DetectorThresholds,
) -> Optional[tuple[float, float]]:
    """First record where theta_z > theta_thr AND cov > cov_thr, as (t, z).

    Records must expose .theta, .cov (None while undefined), .t, .z.
    Returns None when the thresholds are never jointly crossed — absence
    is a valid outcome (smooth descent all the way down).
    """
    for rec in trace:
        if rec.cov is None:
            continue
        if rec.theta > thr.theta_thr and rec.cov > thr.cov_thr:
            return rec.t, rec.z
    return None
