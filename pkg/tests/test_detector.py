"""Sliding thrust-divergence covariance and the oscillation-onset rule."""

from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divstab.detector import CovWindow, DetectorThresholds, detect_onset, window_cov

sample_lists = st.lists(st.floats(-100, 100, allow_nan=False, allow_infinity=False),
                        min_size=20, max_size=20)


def _filled(u, th, capacity=20):
    win = CovWindow(capacity=capacity)
    for a, b in zip(u, th):
        win.push(a, b)
    return win


def test_cov_undefined_until_full():
    win = CovWindow(capacity=5)
    for k in range(4):
        win.push(float(k), float(k))
        assert win.cov() is None
        assert not win.full
    win.push(4.0, 4.0)
    assert win.full
    assert win.cov() is not None


def test_window_cov_raises_while_undefined():
    with pytest.raises(ValueError):
        window_cov(CovWindow(capacity=3))


def test_capacity_validation():
    with pytest.raises(ValueError):
        CovWindow(capacity=1)


@given(u=sample_lists, th=sample_lists)
def test_cov_matches_reference_estimator(u, th):
    # population normalization, cross term of the 2x2 covariance matrix
    win = _filled(u, th)
    want = float(np.cov(np.asarray(u), np.asarray(th), bias=True)[0, 1])
    assert win.cov() == pytest.approx(want, rel=1e-9, abs=1e-12)


@given(u=sample_lists, th=sample_lists)
def test_cov_symmetry(u, th):
    assert _filled(u, th).cov() == pytest.approx(_filled(th, u).cov(), rel=1e-9, abs=1e-12)


@given(u=sample_lists, th=sample_lists,
       a=st.floats(-50, 50, allow_nan=False, allow_infinity=False),
       b=st.floats(-50, 50, allow_nan=False, allow_infinity=False))
def test_cov_shift_invariance(u, th, a, b):
    base = _filled(u, th).cov()
    shifted = _filled([x + a for x in u], [y + b for y in th]).cov()
    assert shifted == pytest.approx(base, rel=1e-6, abs=1e-8)


@given(u=sample_lists, th=sample_lists,
       s=st.floats(-5, 5, allow_nan=False, allow_infinity=False))
def test_cov_scales_linearly(u, th, s):
    base = _filled(u, th).cov()
    scaled = _filled([s * x for x in u], th).cov()
    assert scaled == pytest.approx(s * base, rel=1e-9, abs=1e-9)


def test_cov_slides_over_oldest_samples():
    rng = np.random.default_rng(7)
    u, th = rng.normal(size=30), rng.normal(size=30)
    win = CovWindow(capacity=20)
    for a, b in zip(u, th):
        win.push(a, b)
    want = float(np.cov(u[-20:], th[-20:], bias=True)[0, 1])
    assert win.cov() == pytest.approx(want, rel=1e-12)


def test_clear_empties_the_window():
    win = _filled(range(20), range(20))
    assert win.full
    win.clear()
    assert not win.full
    assert win.cov() is None


# ------------------------------------------------------------------- onset


def _rec(t, theta, cov, z=1.0):
    return SimpleNamespace(t=t, z=z, theta=theta, cov=cov)


def test_onset_returns_first_joint_crossing():
    trace = [
        _rec(0.0, 0.05, None),          # undefined cov is skipped
        _rec(1.0, 0.05, 0.005),         # cov below threshold
        _rec(2.0, 0.005, 0.5),          # theta below threshold
        _rec(3.0, 0.02, 0.02, z=0.8),   # first joint crossing
        _rec(4.0, 0.5, 0.5),
    ]
    assert detect_onset(trace, DetectorThresholds()) == (3.0, 0.8)


def test_onset_none_when_never_crossed():
    trace = [_rec(t, -0.05, -0.01) for t in range(30)]
    assert detect_onset(trace, DetectorThresholds()) is None


def test_onset_ignores_correlation_without_positive_theta():
    # strong covariance alone must not trigger: descending trace keeps theta < 0
    trace = [_rec(t, -0.05 + 0.001 * (t % 3), 0.4) for t in range(30)]
    assert detect_onset(trace, DetectorThresholds()) is None


def test_onset_thresholds_are_strict():
    trace = [_rec(0.0, 0.01, 0.01)]
    assert detect_onset(trace, DetectorThresholds()) is None
    trace = [_rec(0.0, 0.0100001, 0.0100001)]
    assert detect_onset(trace, DetectorThresholds()) is not None


@given(st.lists(st.tuples(st.floats(-0.2, 0.2, allow_nan=False),
                          st.floats(-0.5, 0.5, allow_nan=False)),
                min_size=1, max_size=60),
       st.floats(0.0, 0.1, allow_nan=False),
       st.floats(0.0, 0.1, allow_nan=False))
def test_raising_thresholds_never_detects_earlier(pairs, d_theta, d_cov):
    trace = [_rec(float(k), theta, cov) for k, (theta, cov) in enumerate(pairs)]
    low = DetectorThresholds()
    high = DetectorThresholds(theta_thr=low.theta_thr + d_theta,
                              cov_thr=low.cov_thr + d_cov)
    hit_low = detect_onset(trace, low)
    hit_high = detect_onset(trace, high)
    if hit_high is not None:
        assert hit_low is not None
        assert hit_low[0] <= hit_high[0]
