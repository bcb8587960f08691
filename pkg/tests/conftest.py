"""Shared fixtures: each heavy battery runs once per session, timed."""

from __future__ import annotations

import time

import pytest

from divstab import (
    detection_sweep,
    edge_landing_battery,
    gusty_sweep,
    hover_sweep,
    onset_landing_scenario,
    run_scenario,
)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def onset_run():
    """(config, trace, seconds) of the fixed-gain oscillating landing."""
    cfg = onset_landing_scenario()
    trace, secs = _timed(lambda: run_scenario(cfg))
    return cfg, trace, secs


@pytest.fixture(scope="session")
def detect_pi_result():
    """(SweepResult, seconds) of the PI-mode detection sweep."""
    return _timed(lambda: detection_sweep(pi_mode=True))


@pytest.fixture(scope="session")
def gusty_pi_result():
    """(SweepResult, seconds) of the PI-mode gusty detection sweep."""
    return _timed(lambda: gusty_sweep(pi_mode=True))


@pytest.fixture(scope="session")
def hover_result():
    """(SweepResult, seconds) of the adaptive hover-ranging grid."""
    return _timed(hover_sweep)


@pytest.fixture(scope="session")
def edge_result():
    """(SweepResult, seconds) of the two-phase edge-landing battery."""
    return _timed(edge_landing_battery)
