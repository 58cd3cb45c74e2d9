import json

import numpy as np
import pytest

from stdadi.verify import (
    check_invariance_analytic,
    check_invariance_spline,
    negative_control,
    relative_errors,
)


def test_analytic_small_run_passes():
    report = check_invariance_analytic(trials=100, seed=1)
    assert report.passed
    assert report.overall_max < 1e-6
    assert report.excluded_points < 0.2 * report.total_points


def test_zero_tolerance_fails():
    assert not check_invariance_analytic(trials=20, tol=0.0).passed


def test_identity_is_exact():
    report = check_invariance_analytic(trials=50, identity=True)
    assert report.max_error == (0.0,) * 8


def test_threads_reproduce_serial():
    a = check_invariance_analytic(trials=40, seed=7)
    b = check_invariance_analytic(trials=40, seed=7, threads=4)
    assert a.to_json() == b.to_json()
    s1 = check_invariance_spline(trials=6, seed=2, samples=64)
    s2 = check_invariance_spline(trials=6, seed=2, samples=64, threads=3)
    assert s1.to_json() == s2.to_json()


def test_report_serialization():
    report = check_invariance_analytic(trials=5)
    data = json.loads(report.to_json())
    assert data["mode"] == "analytic"
    assert len(data["max_error"]) == 8
    text = report.to_text()
    assert "PASS" in text and "I8" in text


def test_relative_errors_mask_degenerate():
    err = relative_errors(np.array([1.0, 1.0]), np.array([2.0, 1e-7]), np.array([1.0, 1.0]), np.array([2.0, 1.0]))
    assert err[0] == 0.0 and np.isnan(err[1])


def test_spline_run_passes():
    report = check_invariance_spline(trials=24, samples=256)
    assert report.passed, report.to_text()


def test_spline_constant_trajectories():
    report = check_invariance_spline(trials=6, samples=64, constant=True)
    assert report.total_points == report.excluded_points
    assert report.max_error == (0.0,) * 8


def test_spline_discrepancy_median_shrinks():
    medians = [
        max(check_invariance_spline(trials=12, seed=3, samples=n).discrepancy_median) for n in (64, 128, 256)
    ]
    assert medians[0] >= medians[1] >= medians[2], medians


def test_spline_needs_samples():
    with pytest.raises(ValueError):
        check_invariance_spline(trials=1, samples=32)


def test_negative_control_time_scale():
    report = negative_control(trials=30, time_scale=2.0, spatial=False)
    assert report.passed
    for order, value in enumerate(report.mean_error):
        assert value == pytest.approx(2**order - 1, rel=1e-9)
    assert report.max_error[4] == pytest.approx(15.0, rel=1e-9)


def test_negative_control_identity():
    report = negative_control(trials=10, identity=True)
    assert report.max_error == (0.0,) * 5
    assert not report.passed


def test_negative_control_random():
    assert negative_control(trials=30).overall_max > 0.1


def test_trials_validated():
    for fn in (check_invariance_analytic, check_invariance_spline, negative_control):
        with pytest.raises(ValueError):
            fn(trials=0)
