"""Scenario runner and experiment batteries.

Wires the dynamics, observer, controller, detector, and adaptive modules
into a per-period control loop, runs the standard experiment batteries
(onset detection across gains and winds, gusty conditions, hover
ranging, edge-of-oscillation landing), fits the resulting gain-height
calibration lines, and serializes traces and sweep tables to CSV.

Loop order within one control period: observe the divergence (plus
sensor noise), update the covariance window, run the outer adaptive
update, run the inner controller, convert to a thrust command, advance
the delay line, degrade through the actuator-effectiveness map, then
integrate the vehicle over the period.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, IO, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .adaptive import AdaptiveConfig, AdaptiveState, converged, update_gain
from .controller import ControllerConfig, ControllerState, pi_control, to_thrust
from .detector import CovWindow, DetectorThresholds, detect_onset
from .dynamics import (
    EnvParams,
    VehicleParams,
    VehicleState,
    apply_actuator_effectiveness,
    drag_force,
    step,
    wind_at,
)
from .estimators import CalibrationLine, fit_calibration
from .observer import DelayLine

__all__ = [
    "TwoPhaseConfig",
    "ScenarioConfig",
    "TraceRecord",
    "SweepRow",
    "FitResult",
    "SweepResult",
    "TRACE_FIELDS",
    "DEFAULT_GAINS",
    "DEFAULT_WINDS",
    "DEFAULT_HEIGHTS",
    "onset_landing_scenario",
    "detection_base",
    "gusty_base",
    "hover_base",
    "edge_base",
    "run_scenario",
    "detection_sweep",
    "gusty_sweep",
    "hover_sweep",
    "edge_landing_battery",
    "hover_convergence",
    "landing_inband_samples",
    "write_trace_csv",
    "write_sweep_csv",
    "write_samples_csv",
    "worker_count",
]

DEFAULT_GAINS: Tuple[float, ...] = (10.0, 30.0, 50.0)
DEFAULT_WINDS: Tuple[float, ...] = (-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0,
                                    0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
DEFAULT_HOVER_WINDS: Tuple[float, ...] = (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0)
DEFAULT_HEIGHTS: Tuple[float, ...] = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0,
                                      35.0, 40.0, 45.0, 50.0)


@dataclass(frozen=True)
class TwoPhaseConfig:
    """Hover-then-land protocol for edge-of-oscillation landings.

    During the hover phase the outer loop regulates the covariance toward
    ``trigger_cov``; the first window reading at or above it commences the
    landing (setpoint drops to -landing_c2, the outer setpoint moves to
    ``landing_cov_setpoint``, and the covariance window is flushed so the
    two phases' statistics never mix).
    """

    trigger_cov: float = 0.2
    landing_c2: float = 0.05
    landing_cov_setpoint: float = 0.05

    def __post_init__(self) -> None:
        if self.trigger_cov <= 0.0 or self.landing_cov_setpoint <= 0.0:
            raise ValueError("covariance levels must be positive")
        if self.landing_c2 <= 0.0:
            raise ValueError("landing_c2 must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one closed-loop run needs; immutable and seedable."""

    vehicle: VehicleParams = field(default_factory=VehicleParams)
    env: EnvParams = field(default_factory=EnvParams)
    controller: ControllerConfig = field(
        default_factory=lambda: ControllerConfig(gain_p=20.0, setpoint=-0.2)
    )
    adaptive: Optional[AdaptiveConfig] = None
    detector: DetectorThresholds = field(default_factory=DetectorThresholds)
    two_phase: Optional[TwoPhaseConfig] = None
    T: float = 0.03
    delay: float = 0.15
    z0: float = 10.0
    v_z0: float = -2.0
    t_max: float = 120.0
    z_floor: float = 0.05
    noise_sigma: float = 0.0
    seed: int = 0
    cov_window: int = 20
    integrator: str = "rk4"
    integral_preload: str = "zero"  # "trim" preloads the hover-balancing integral

    def __post_init__(self) -> None:
        if self.T <= 0.0:
            raise ValueError("T must be positive")
        if self.z0 <= self.z_floor:
            raise ValueError("z0 must exceed z_floor")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")
        if self.delay < 0.0:
            raise ValueError("delay must be non-negative")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")
        if self.cov_window < 2:
            raise ValueError("cov_window must be >= 2")
        if self.integral_preload not in ("zero", "trim"):
            raise ValueError("integral_preload must be 'zero' or 'trim'")
        if self.two_phase is not None and self.adaptive is None:
            raise ValueError("two-phase scenarios need an adaptive config")


@dataclass(frozen=True)
class TraceRecord:
    """One control period of observables, commands, and loop state."""

    t: float
    z: float
    v_z: float
    theta: float
    theta_setpoint: float
    u_z: float
    u_prime_commanded: float
    u_prime_effective: float
    cov: Optional[float]
    K_z: float
    K_prime: float
    wind: float
    phase: str  # hover | landing | done


TRACE_FIELDS: Tuple[str, ...] = (
    "t", "z", "v_z", "theta", "theta_setpoint", "u_z",
    "u_prime_commanded", "u_prime_effective", "cov", "K_z", "K_prime",
    "wind", "phase",
)


@dataclass(frozen=True)
class SweepRow:
    """One battery cell: its setting and what the run produced."""

    gain: float  # configured inner gain, or initial adaptive gain
    wind: float
    height: float  # initial height of the cell
    z: Optional[float]  # detection / convergence / phase-switch height
    t: Optional[float]
    k_converged: Optional[float]  # adaptive cells: gain at the recorded event
    outcome: str  # detected | none | timeout | touchdown-first


@dataclass(frozen=True)
class FitResult:
    """Calibration fit over a battery's realized samples."""

    line: Optional[CalibrationLine]  # None when the samples are degenerate
    n_used: int = 0
    n_excluded: int = 0

    @property
    def degenerate(self) -> bool:
        return self.line is None

    def summary(self) -> str:
        if self.line is None:
            return (f"fit: degenerate ({self.n_used} samples, "
                    f"{self.n_excluded} cells excluded)")
        return (f"fit: z = {self.line.slope:.4f} K {self.line.intercept:+.4f}"
                f"  R^2 = {self.line.r_squared:.4f}"
                f"  (n = {self.n_used}, excluded = {self.n_excluded})")


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[SweepRow, ...]
    samples: Tuple[Tuple[float, float], ...]  # (K, z) pairs the fit uses
    fit: FitResult


def onset_landing_scenario() -> ScenarioConfig:
    """Fixed-gain landing that runs into self-induced oscillation.

    K = 20 on a c^2 = 0.2 descent from 10 m with drag and delay; the
    detector fires near the height where 20 = 2z/T would predict.
    """
    return ScenarioConfig(
        controller=ControllerConfig(gain_p=20.0, setpoint=-0.2),
        z0=10.0,
        v_z0=-2.0,
    )


def detection_base() -> ScenarioConfig:
    """Base cell for the detection sweep: slow descent from 20 m."""
    return ScenarioConfig(
        controller=ControllerConfig(gain_p=10.0, setpoint=-0.05),
        z0=20.0,
        v_z0=-1.0,
    )


def gusty_base() -> ScenarioConfig:
    """Detection-sweep base under sinusoidal gusts and inflow-degraded thrust."""
    cfg = detection_base()
    return replace(
        cfg,
        env=replace(cfg.env, gust_amplitude=4.0, gust_rate=1.0),
        vehicle=replace(cfg.vehicle, actuator_b=0.5, actuator_c=0.5),
        detector=DetectorThresholds(theta_thr=0.01, cov_thr=0.1),
    )


def hover_base() -> ScenarioConfig:
    """Base cell for hover ranging: adaptive gain at theta* = 0."""
    return ScenarioConfig(
        controller=ControllerConfig(gain_p=50.0, gain_i=1.0, setpoint=0.0),
        adaptive=AdaptiveConfig(),
        z0=10.0,
        v_z0=0.0,
        t_max=300.0,
        noise_sigma=0.005,
        seed=1000,
        integral_preload="trim",
    )


def edge_base() -> ScenarioConfig:
    """Base cell for edge-of-oscillation landings (two-phase protocol).

    The battery triggers the landing right at the covariance level it
    then regulates (0.05): the hover phase parks the loop exactly on the
    oscillation edge, so the landing starts from a calibrated gain.
    """
    return ScenarioConfig(
        controller=ControllerConfig(gain_p=50.0, gain_i=1.0, setpoint=0.0),
        adaptive=AdaptiveConfig(),
        two_phase=TwoPhaseConfig(
            trigger_cov=0.05, landing_c2=0.05, landing_cov_setpoint=0.05
        ),
        z0=10.0,
        v_z0=0.0,
        t_max=300.0,
        noise_sigma=0.02,
        seed=1,
        integral_preload="trim",
    )


def run_scenario(cfg: ScenarioConfig) -> List[TraceRecord]:
    """Simulate one closed-loop run; one record per control period.

    Terminates on touchdown (z <= z_floor, marked by a final record with
    phase "done" and undefined covariance), on t_max, or — for
    single-phase adaptive runs — at the first step whose covariance error
    sits inside the convergence band.
    """
    vehicle, env = cfg.vehicle, cfg.env
    m, g = vehicle.mass, vehicle.gravity
    rng = np.random.default_rng(cfg.seed)
    state = VehicleState(z=cfg.z0, v_z=cfg.v_z0, t=0.0)

    two_phase = cfg.two_phase
    theta_set = 0.0 if two_phase is not None else cfg.controller.setpoint
    phase = "hover" if theta_set == 0.0 else "landing"
    ctl_cfg = replace(cfg.controller, setpoint=theta_set)

    integral0 = 0.0
    if cfg.integral_preload == "trim" and cfg.controller.gain_i > 0.0:
        # hover balance: u' = mg - f_D, i.e. u_z = -f_D/m from the integrator
        integral0 = -drag_force(env.wind_mean, 0.0, vehicle.drag_coeff_half) / (
            m * cfg.controller.gain_i
        )
    ctl_state = ControllerState(integral_error=integral0)

    ad_state: Optional[AdaptiveState] = None
    ad_cfg: Optional[AdaptiveConfig] = None
    if cfg.adaptive is not None:
        ad_state = AdaptiveState.initial(cfg.adaptive)
        ad_cfg = cfg.adaptive
        if two_phase is not None:
            ad_cfg = replace(cfg.adaptive, cov_setpoint=two_phase.trigger_cov)
    single_adaptive = cfg.adaptive is not None and two_phase is None

    fifo = DelayLine.from_delay(cfg.delay, cfg.T, prefill=m * g)
    win = CovWindow(capacity=cfg.cov_window)
    prev_udel = m * g

    records: List[TraceRecord] = []
    n_steps = int(round(cfg.t_max / cfg.T))
    for _ in range(n_steps):
        th = state.v_z / state.z
        if cfg.noise_sigma > 0.0:
            th = th + cfg.noise_sigma * rng.standard_normal()
        win.push(prev_udel, th)
        cov_now = win.cov()

        if (
            two_phase is not None
            and phase == "hover"
            and cov_now is not None
            and cov_now >= two_phase.trigger_cov
        ):
            phase = "landing"
            theta_set = -two_phase.landing_c2
            ctl_cfg = replace(ctl_cfg, setpoint=theta_set)
            ad_cfg = replace(cfg.adaptive, cov_setpoint=two_phase.landing_cov_setpoint)
            win.clear()
            cov_now = None  # updates pause while the window refills

        if ad_state is not None:
            ad_state = update_gain(ad_cfg, ad_state, cov_now)
            k_z = ad_state.k_effective
            k_prime = ad_state.k_prime
        else:
            k_z = ctl_cfg.gain_p
            k_prime = k_z

        u_z, ctl_state = pi_control(ctl_cfg, ctl_state, th, cfg.T, gain_p_override=k_z)
        u_cmd = to_thrust(u_z, vehicle)
        u_del = fifo.push_pop(u_cmd)
        w_now = wind_at(env, state.t)
        u_eff = apply_actuator_effectiveness(
            u_del, w_now, vehicle.actuator_b, vehicle.actuator_c
        )

        records.append(
            TraceRecord(
                t=state.t,
                z=state.z,
                v_z=state.v_z,
                theta=th,
                theta_setpoint=theta_set,
                u_z=u_z,
                u_prime_commanded=u_cmd,
                u_prime_effective=u_eff,
                cov=cov_now,
                K_z=k_z,
                K_prime=k_prime,
                wind=w_now,
                phase=phase,
            )
        )

        if single_adaptive and ad_state is not None and converged(cfg.adaptive, ad_state):
            break

        prev_udel = u_del
        state = step(state, u_del, env, vehicle, cfg.T, integrator=cfg.integrator)
        if state.z <= cfg.z_floor:
            last = records[-1]
            theta_td = state.v_z / state.z if state.z > 0.0 else last.theta
            records.append(
                replace(
                    last,
                    t=state.t,
                    z=state.z,
                    v_z=state.v_z,
                    theta=theta_td,
                    cov=None,
                    wind=wind_at(env, state.t),
                    phase="done",
                )
            )
            break
    return records


def hover_convergence(
    cfg: ScenarioConfig, trace: Sequence[TraceRecord]
) -> Optional[Tuple[float, float, float]]:
    """First in-band step of a single-phase adaptive run: (K_z, z, t)."""
    if cfg.adaptive is None:
        raise ValueError("hover convergence needs an adaptive config")
    band = cfg.adaptive.convergence_band
    target = cfg.adaptive.cov_setpoint
    for rec in trace:
        if rec.cov is None:
            continue
        if abs(target - rec.cov) < band:
            return rec.K_z, rec.z, rec.t
    return None


def landing_inband_samples(
    cfg: ScenarioConfig, trace: Sequence[TraceRecord]
) -> List[Tuple[float, float]]:
    """All landing-phase (K_z, z) samples whose cov error is in-band."""
    if cfg.adaptive is None or cfg.two_phase is None:
        raise ValueError("in-band sampling needs a two-phase adaptive config")
    band = cfg.adaptive.convergence_band
    target = cfg.two_phase.landing_cov_setpoint
    out: List[Tuple[float, float]] = []
    for rec in trace:
        if rec.phase != "landing" or rec.cov is None:
            continue
        if abs(target - rec.cov) < band:
            out.append((rec.K_z, rec.z))
    return out


def worker_count() -> int:
    """Sweep parallelism, from the DIVSTAB_WORKERS env var (default 1)."""
    raw = os.environ.get("DIVSTAB_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"DIVSTAB_WORKERS must be an integer, got {raw!r}") from exc
    return max(n, 1)


def _map_cells(fn: Callable, cells: Sequence) -> List:
    # deterministic: results stay in cell order regardless of scheduling
    n = worker_count()
    if n == 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, cells))


def _finish(rows: List[SweepRow], samples: List[Tuple[float, float]]) -> SweepResult:
    n_excluded = sum(1 for r in rows if r.outcome != "detected")
    try:
        line: Optional[CalibrationLine] = fit_calibration(samples)
    except ValueError:
        line = None
    fit = FitResult(line=line, n_used=len(samples), n_excluded=n_excluded)
    return SweepResult(rows=tuple(rows), samples=tuple(samples), fit=fit)


def detection_sweep(
    base: Optional[ScenarioConfig] = None,
    gains: Sequence[float] = DEFAULT_GAINS,
    winds: Sequence[float] = DEFAULT_WINDS,
    pi_mode: bool = False,
) -> SweepResult:
    """Oscillation-onset heights across a grid of gains and steady winds.

    Each cell descends until the detector fires; detected (K, z) pairs
    feed the calibration fit.  ``pi_mode`` adds an I_z = 1 integrator to
    the inner loop, which removes the wind-dependent steady-state offset
    and tightens the detection heights.
    """
    if base is None:
        base = detection_base()
    gains = sorted(gains)
    winds = sorted(winds)

    def one(cell: Tuple[int, int]) -> SweepRow:
        ig, iw = cell
        K, w = gains[ig], winds[iw]
        cfg = replace(
            base,
            controller=replace(
                base.controller, gain_p=K, gain_i=(1.0 if pi_mode else 0.0)
            ),
            env=replace(base.env, wind_mean=w),
            seed=base.seed + ig * len(winds) + iw,
        )
        trace = run_scenario(cfg)
        det = detect_onset(trace, cfg.detector)
        if det is not None:
            t_det, z_det = det
            return SweepRow(K, w, cfg.z0, z_det, t_det, None, "detected")
        outcome = "touchdown-first" if (trace and trace[-1].phase == "done") else "timeout"
        return SweepRow(K, w, cfg.z0, None, None, None, outcome)

    cells = [(ig, iw) for ig in range(len(gains)) for iw in range(len(winds))]
    rows = _map_cells(one, cells)
    samples = [(r.gain, r.z) for r in rows if r.outcome == "detected"]
    return _finish(rows, samples)


def gusty_sweep(
    base: Optional[ScenarioConfig] = None,
    gains: Sequence[float] = DEFAULT_GAINS,
    winds: Sequence[float] = DEFAULT_WINDS,
    pi_mode: bool = False,
) -> SweepResult:
    """Detection sweep under gusts and degraded thrust (same cell logic).

    Only the base differs from ``detection_sweep``: sinusoidal gusts,
    inflow-dependent actuator effectiveness, and a raised covariance
    threshold that keeps gust-driven covariance excursions from
    triggering the detector.
    """
    if base is None:
        base = gusty_base()
    return detection_sweep(base=base, gains=gains, winds=winds, pi_mode=pi_mode)


def hover_sweep(
    base: Optional[ScenarioConfig] = None,
    heights: Sequence[float] = DEFAULT_HEIGHTS,
    winds: Sequence[float] = DEFAULT_HOVER_WINDS,
) -> SweepResult:
    """Adaptive hover ranging on a (height, wind) grid.

    Each cell hovers until the covariance error first enters the
    convergence band; the gain at that step against the height at that
    step forms the calibration sample.
    """
    if base is None:
        base = hover_base()
    heights = sorted(heights)
    winds = sorted(winds)

    def one(cell: Tuple[int, int]) -> SweepRow:
        iw, ih = cell
        w, h = winds[iw], heights[ih]
        cfg = replace(
            base,
            z0=h,
            env=replace(base.env, wind_mean=w),
            seed=base.seed + len(winds) * ih + iw,
        )
        trace = run_scenario(cfg)
        hit = hover_convergence(cfg, trace)
        if hit is not None:
            k_conv, z_conv, t_conv = hit
            return SweepRow(cfg.adaptive.k_init, w, h, z_conv, t_conv, k_conv, "detected")
        outcome = "touchdown-first" if (trace and trace[-1].phase == "done") else "timeout"
        return SweepRow(cfg.adaptive.k_init, w, h, None, None, None, outcome)

    cells = [(iw, ih) for iw in range(len(winds)) for ih in range(len(heights))]
    rows = _map_cells(one, cells)
    samples = [(r.k_converged, r.z) for r in rows if r.outcome == "detected"]
    return _finish(rows, samples)


def edge_landing_battery(
    base: Optional[ScenarioConfig] = None,
    heights: Sequence[float] = DEFAULT_HEIGHTS,
) -> SweepResult:
    """Two-phase edge-of-oscillation landings across initial heights.

    Every landing-phase step whose covariance error is in-band
    contributes an (K_z, z) sample, so one run yields a whole track of
    gain-height pairs down to touchdown.  Cells that touch down while
    still in the hover phase are flagged and excluded.
    """
    if base is None:
        base = edge_base()
    heights = sorted(heights)

    def one(ih: int) -> Tuple[SweepRow, List[Tuple[float, float]]]:
        h = heights[ih]
        cfg = replace(base, z0=h, seed=base.seed + ih)
        trace = run_scenario(cfg)
        samples = landing_inband_samples(cfg, trace)
        switch = next((r for r in trace if r.phase == "landing"), None)
        touched = bool(trace) and trace[-1].phase == "done"
        landed = switch is not None
        if touched and landed:
            outcome = "detected"
        elif touched:
            outcome = "touchdown-first"  # fell through the floor while hovering
        else:
            outcome = "timeout"
        k_med = float(np.median([k for k, _ in samples])) if samples else None
        return (
            SweepRow(
                cfg.adaptive.k_init,
                cfg.env.wind_mean,
                h,
                switch.z if switch is not None else None,
                switch.t if switch is not None else None,
                k_med,
                outcome,
            ),
            samples,
        )

    results = _map_cells(one, list(range(len(heights))))
    rows = [r for r, _ in results]
    samples: List[Tuple[float, float]] = []
    for _, s in results:
        samples.extend(s)
    return _finish(rows, samples)


def _fmt(value: Union[float, str, None]) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{value:.17g}"


def write_trace_csv(out: Union[str, IO[str]], records: Iterable[TraceRecord]) -> None:
    """Trace table: one row per record, fixed field order, 17-digit floats.

    Undefined covariance serializes as an empty field; output is
    byte-stable for a given (config, seed) pair.
    """
    lines = [",".join(TRACE_FIELDS)]
    for rec in records:
        lines.append(",".join(_fmt(getattr(rec, name)) for name in TRACE_FIELDS))
    _write_lines(out, lines)


SWEEP_FIELDS: Tuple[str, ...] = (
    "gain", "wind", "height", "z", "t", "k_converged", "outcome",
)


def write_sweep_csv(out: Union[str, IO[str]], result: SweepResult) -> None:
    """Sweep table: one row per battery cell."""
    lines = [",".join(SWEEP_FIELDS)]
    for row in result.rows:
        lines.append(",".join(_fmt(getattr(row, name)) for name in SWEEP_FIELDS))
    _write_lines(out, lines)


def write_samples_csv(out: Union[str, IO[str]], result: SweepResult) -> None:
    """Fit-input table: the (K, z) pairs behind the calibration line."""
    lines = ["K,z"]
    for k, z in result.samples:
        lines.append(f"{_fmt(k)},{_fmt(z)}")
    _write_lines(out, lines)


def _write_lines(out: Union[str, IO[str]], lines: List[str]) -> None:
    text = "\n".join(lines) + "\n"
    if isinstance(out, str):
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
