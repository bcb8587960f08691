"""Height estimators, the exact landing-thrust curve, calibration fits."""

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from divstab.dynamics import EnvParams, VehicleParams
from divstab.estimators import (
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

finite = dict(allow_nan=False, allow_infinity=False, allow_subnormal=False)


# --------------------------------------------------------- point estimators


def test_accel_estimator_value():
    assert z_from_accel(-0.2, 0.0, 0.4) == pytest.approx(10.0, rel=1e-12)


def test_accel_estimator_singular_at_hover():
    with pytest.raises(SingularEstimateError):
        z_from_accel(0.0, 0.0, 0.0)


def test_thrust_estimator_value():
    assert z_from_thrust(0.4, 0.2) == pytest.approx(10.0, rel=1e-12)
    with pytest.raises(ValueError):
        z_from_thrust(0.4, 0.0)


def test_lateral_thrust_estimator_value():
    assert z_from_thrust_horizontal(0.02, -0.1, -0.2) == pytest.approx(1.0, rel=1e-12)


def test_lateral_estimator_singular_in_level_flight():
    # constant lateral flow over flat ground needs no acceleration at all
    with pytest.raises(SingularEstimateError):
        z_from_thrust_horizontal(0.0, -0.1, 0.0)


@given(z=st.floats(0.1, 100, **finite), theta_x=st.floats(-2, 2, **finite),
       theta_z=st.floats(-2, -0.01, **finite), theta_x_dot=st.floats(-1, 1, **finite))
def test_lateral_and_vertical_estimators_agree_on_consistent_motion(
    z, theta_x, theta_z, theta_x_dot
):
    # synthesize accelerations from one true height; all routes recover it
    a_x = z * (theta_x_dot + theta_x * theta_z)
    a_z = z * (0.0 + theta_z * theta_z)  # theta_z held constant
    assume(abs(theta_x_dot + theta_x * theta_z) > 1e-6)
    assert z_from_accel_horizontal(a_x, theta_x, theta_z, theta_x_dot) == pytest.approx(
        z, rel=1e-9
    )
    assert z_from_accel(theta_z, 0.0, a_z) == pytest.approx(z, rel=1e-9)
    if abs(theta_x * theta_z) > 1e-6:
        a_x_const = z * theta_x * theta_z
        assert z_from_thrust_horizontal(a_x_const, theta_x, theta_z) == pytest.approx(
            z, rel=1e-9
        )


def test_thrust_estimator_exact_on_ideal_descent():
    # u_z = c^4 z along v_z = -c^2 z; the estimate inverts it exactly
    z0, c2, T = 10.0, 0.1, 0.03
    for k in range(0, 2000, 50):
        z = z0 * math.exp(-c2 * k * T)
        u_z = c2 * c2 * z
        assert abs(z_from_thrust(u_z, c2) - z) <= 1e-9 * z


# ------------------------------------------------------ perfect thrust curve


def test_zero_drag_curve_is_affine_in_height():
    veh = VehicleParams(drag_coeff_half=0.0)
    z = np.linspace(0.0, 10.0, 11)
    curve = perfect_landing_thrust(z, 0.1, EnvParams(), veh)
    want = veh.mass * (0.1**2 * z + veh.gravity)
    assert np.allclose(curve.u_prime, want, rtol=1e-15)


def test_still_air_drag_lowers_required_thrust():
    # during descent the airflow pushes up, assisting the rotor
    veh = VehicleParams(drag_coeff_half=0.5)
    z = np.linspace(0.0, 10.0, 11)
    lift = perfect_landing_thrust(z, 0.1, EnvParams(), veh).u_prime
    vac = perfect_landing_thrust(z, 0.1, EnvParams(), VehicleParams(drag_coeff_half=0.0)).u_prime
    assert np.all(lift[1:] < vac[1:])
    assert lift[0] == vac[0]  # at the surface the descent rate is zero


def test_strong_tailwind_clamps_thrust_at_zero():
    veh = VehicleParams(drag_coeff_half=0.5)
    curve = perfect_landing_thrust([0.0, 5.0, 10.0], 0.1, EnvParams(wind_mean=8.0), veh)
    assert curve.u_prime[0] == 0.0
    assert np.all(curve.u_prime >= 0.0)


def test_headwind_touchdown_thrust_maps_to_midrange_still_air_height():
    beta = 0.5 * 1.204 * 0.25 * 0.25
    veh = VehicleParams(mass=1.0, gravity=9.81, drag_coeff_half=beta)
    z = np.linspace(0.0, 12.0, 1201)
    still = perfect_landing_thrust(z, 0.1, EnvParams(wind_mean=0.0), veh)
    head = perfect_landing_thrust(z, 0.1, EnvParams(wind_mean=-1.0), veh)
    z_eq = still.height_at_thrust(head.u_prime[0])
    assert 4.0 <= z_eq <= 5.0  # thrust-based ranging confuses wind for height


def test_curve_inversion_round_trip():
    veh = VehicleParams(drag_coeff_half=0.0)
    z = np.linspace(0.0, 10.0, 101)
    curve = perfect_landing_thrust(z, 0.3, EnvParams(), veh)
    for z_star in (0.5, 3.3, 9.9):
        u = veh.mass * (0.3**2 * z_star + veh.gravity)
        assert curve.height_at_thrust(u) == pytest.approx(z_star, abs=1e-6)


def test_non_monotone_curve_refuses_inversion():
    veh = VehicleParams(drag_coeff_half=0.5)  # drag bends the curve over
    z = np.linspace(0.0, 12.0, 121)
    curve = perfect_landing_thrust(z, 0.1, EnvParams(), veh)
    with pytest.raises(ValueError):
        curve.height_at_thrust(9.5)


def test_curve_validation():
    with pytest.raises(ValueError):
        PerfectLandingCurve(z=np.array([0.0, 1.0]), u_prime=np.array([1.0]), c2=0.1)
    with pytest.raises(ValueError):
        PerfectLandingCurve(z=np.array([1.0, 0.5]), u_prime=np.array([1.0, 1.0]), c2=0.1)
    with pytest.raises(ValueError):
        PerfectLandingCurve(z=np.array([0.0, 1.0]), u_prime=np.array([1.0, -1.0]), c2=0.1)
    with pytest.raises(ValueError):
        perfect_landing_thrust([0.0, 1.0], 0.0, EnvParams(), VehicleParams())


# --------------------------------------------------------- calibration fits


def test_fit_recovers_exact_line():
    line = fit_calibration([(k, 0.04 * k - 0.1) for k in np.linspace(10, 400, 100)])
    assert line.slope == pytest.approx(0.04, rel=1e-9)
    assert line.intercept == pytest.approx(-0.1, rel=1e-6)
    assert line.r_squared == pytest.approx(1.0, abs=1e-12)


@given(st.lists(st.tuples(st.floats(0.1, 500, **finite), st.floats(-5, 50, **finite)),
                min_size=3, max_size=40))
def test_fit_is_permutation_invariant(samples):
    ks = [k for k, _ in samples]
    assume(max(ks) - min(ks) > 1e-3)
    a = fit_calibration(samples)
    b = fit_calibration(list(reversed(samples)))
    assert a.slope == pytest.approx(b.slope, rel=1e-6, abs=1e-9)
    assert a.intercept == pytest.approx(b.intercept, rel=1e-6, abs=1e-9)


@given(samples=st.lists(st.tuples(st.floats(0.1, 500, **finite),
                                  st.floats(-5, 50, **finite)),
                        min_size=3, max_size=40),
       a=st.floats(0.1, 10, **finite), b=st.floats(-10, 10, **finite))
def test_fit_is_affine_equivariant_in_height(samples, a, b):
    ks = [k for k, _ in samples]
    zs = [z for _, z in samples]
    assume(max(ks) - min(ks) > 1e-3)
    assume(max(zs) - min(zs) > 1e-6)  # keep R^2 well-defined on both sides
    base = fit_calibration(samples)
    mapped = fit_calibration([(k, a * z + b) for k, z in samples])
    assert mapped.slope == pytest.approx(a * base.slope, rel=1e-6, abs=1e-9)
    assert mapped.intercept == pytest.approx(a * base.intercept + b, rel=1e-6, abs=1e-8)
    assert mapped.r_squared == pytest.approx(base.r_squared, abs=1e-9)


def test_fit_rejects_degenerate_input():
    with pytest.raises(ValueError):
        fit_calibration([(1.0, 2.0)])
    with pytest.raises(ValueError):
        fit_calibration([(3.0, 1.0), (3.0, 2.0), (3.0, 5.0)])


def test_line_quality_bounds_enforced():
    with pytest.raises(ValueError):
        CalibrationLine(slope=1.0, intercept=0.0, r_squared=1.5)


def test_estimate_from_gain_applies_the_line():
    line = CalibrationLine(slope=0.06, intercept=-0.2, r_squared=1.0)
    assert estimate_z_from_gain(line, 50.0) == pytest.approx(2.8, rel=1e-12)
