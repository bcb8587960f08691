"""Stability-based distance estimation with divergence feedback control.

A simulation and analysis toolkit for a vertical point-mass vehicle that
regulates optical-flow divergence: constant-divergence landings and
hovers under wind and gusts, detection of self-induced oscillations via
the thrust-divergence covariance, adaptive gain control that rides the
edge of oscillation (hover ranging and edge-of-oscillation landing), and
the analytic machinery predicting the destabilizing gain as a function
of height.
"""

from .adaptive import (
    AdaptiveConfig,
    AdaptiveState,
    converged,
    run_edge_landing,
    run_hover_ranging,
    update_gain,
)
from .analysis import (
    CriticalGains,
    LinearModel,
    closed_loop_char_poly,
    continuous_critical_gains,
    continuous_drag_model,
    default_gain_grid,
    drag_rate,
    instability_height,
    open_loop_zero,
    unstable_gain_drag,
    unstable_gain_horizontal,
    unstable_gain_vacuum,
    zoh_drag_model,
    zoh_horizontal_model,
    zoh_vacuum_model,
)
from .controller import ControllerConfig, ControllerState, p_control, pi_control, to_thrust
from .detector import CovWindow, DetectorThresholds, detect_onset, window_cov
from .dynamics import (
    EnvParams,
    ThrustCommand,
    VehicleParams,
    VehicleState,
    accel,
    apply_actuator_effectiveness,
    drag_force,
    step,
    wind_at,
)
from .estimators import (
    CalibrationLine,
    PerfectLandingCurve,
    SingularEstimateError,
    estimate_z_from_gain,
    fit_calibration,
    perfect_landing_thrust,
    z_from_accel,
    z_from_accel_horizontal,
    z_from_thrust,
    z_from_thrust_horizontal,
)
from .harness import (
    FitResult,
    ScenarioConfig,
    SweepResult,
    SweepRow,
    TraceRecord,
    TwoPhaseConfig,
    detection_base,
    detection_sweep,
    edge_base,
    edge_landing_battery,
    gusty_base,
    gusty_sweep,
    hover_base,
    hover_sweep,
    onset_landing_scenario,
    run_scenario,
    write_samples_csv,
    write_sweep_csv,
    write_trace_csv,
)
from .observer import DelayLine, Observation, delay_push_pop, observe_theta, theta_dot

__version__ = "0.1.0"
