"""Visual observable and actuation delay.

The controlled observable is the relative velocity theta_z = v_z/z (the
negative of the optical-flow divergence seen by a downward camera).  The
sensing-to-actuation latency is modeled as a FIFO delay line on the
thrust command.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .dynamics import VehicleState


@dataclass(frozen=True)
class Observation:
    theta_z: float
    t: float


def observe_theta(state: VehicleState) -> Observation:
    """theta_z = v_z / z.  Undefined at or below the surface."""
    if state.z <= 0:
        raise ValueError(f"observation undefined at z={state.z}")
    return Observation(theta_z=state.v_z / state.z, t=state.t)


def theta_dot(prev: Observation, curr: Observation) -> float:
    """Backward-difference time derivative of theta_z."""
    dt = curr.t - prev.t
    if dt <= 0:
        raise ValueError(f"non-increasing observation times: {prev.t} -> {curr.t}")
    return (curr.theta_z - prev.theta_z) / dt


class DelayLine:
    """FIFO of thrust commands; output at step k is the input from step k-depth.

    Pre-filled with a trim value (hover thrust) so a run starts from
    equilibrium rather than from an empty pipe.
    """

    def __init__(self, depth: int, prefill: float):
        if depth < 0:
            raise ValueError(f"depth must be non-negative, got {depth}")
        self.depth = depth
        self._fifo = deque([prefill] * depth)

    @classmethod
    def from_delay(cls, delay: float, T: float, prefill: float) -> "DelayLine":
        # canonical ratios (0.15/0.03) are integral; anything else rounds
        return cls(depth=int(round(delay / T)), prefill=prefill)

    def push_pop(self, value: float) -> float:
        if self.depth == 0:
            return value
        out = self._fifo.popleft()
        self._fifo.append(value)
        return out


def delay_push_pop(line: DelayLine, value: float) -> float:
    return line.push_pop(value)
