from __future__ import annotations

import numpy as np
import pytest

from khfield.propagate import (
    FieldSeries,
    StreamingAccumulator,
    SurfaceSnapshot,
    error_metric,
    run,
    step,
)


def _snapshots(record):
    sigma, sigma_n = record
    return [
        SurfaceSnapshot(step=i, sigma=sigma[:, i], sigma_n=sigma_n[:, i])
        for i in range(sigma.shape[1])
    ]


def test_snapshot_shape_validation():
    with pytest.raises(ValueError, match="1-d and equally sized"):
        SurfaceSnapshot(step=0, sigma=np.zeros(3), sigma_n=np.zeros(4))
    with pytest.raises(ValueError, match="1-d and equally sized"):
        SurfaceSnapshot(step=0, sigma=np.zeros((2, 2)), sigma_n=np.zeros((2, 2)))


def test_series_times_and_default_valid():
    s = FieldSeries(dt=0.5, start=-3, p=np.zeros(4))
    np.testing.assert_allclose(s.times(), [-1.5, -1.0, -0.5, 0.0])
    assert s.valid == slice(0, 4)
    assert s.pn is None


def test_run_shapes_and_valid_window(small_setup):
    op = small_setup.op
    series = run(op, small_setup.record, want_normal=True)
    assert series.start == op.base_delay
    assert series.p.size == small_setup.steps + op.window
    assert series.valid == slice(op.window - 1, small_setup.steps)
    assert series.pn.shape == series.p.shape


def test_run_equals_repeated_steps(small_setup):
    op = small_setup.op
    batched = run(op, small_setup.record, want_normal=True)
    manual = FieldSeries(
        dt=op.dt,
        start=op.base_delay,
        p=np.zeros(small_setup.steps + op.window),
        pn=np.zeros(small_setup.steps + op.window),
    )
    for snap in _snapshots(small_setup.record):
        step(op, snap, manual)
    # summation order differs between the two paths, so allow a few ulp
    # relative to the series peak
    scale = np.abs(batched.p).max()
    np.testing.assert_allclose(manual.p, batched.p, rtol=1e-12, atol=1e-13 * scale)
    np.testing.assert_allclose(manual.pn, batched.pn, rtol=1e-12, atol=1e-13 * scale)


def test_run_accepts_snapshot_list(small_setup):
    op = small_setup.op
    from_arrays = run(op, small_setup.record, want_normal=True)
    from_snaps = run(op, _snapshots(small_setup.record), want_normal=True)
    np.testing.assert_array_equal(from_snaps.p, from_arrays.p)
    np.testing.assert_array_equal(from_snaps.pn, from_arrays.pn)


def test_run_rejects_gapped_stream(small_setup):
    snaps = _snapshots(small_setup.record)
    del snaps[5]
    with pytest.raises(ValueError, match="gap: expected step 5, got 6"):
        run(small_setup.op, snaps)


def test_run_rejects_node_mismatch(small_setup):
    sigma, sigma_n = small_setup.record
    with pytest.raises(ValueError, match="carry 37 nodes"):
        run(small_setup.op, (sigma[:-1], sigma_n[:-1]))


def test_run_on_empty_stream_returns_empty_valid_range(small_setup):
    series = run(
        small_setup.op,
        (np.zeros((38, 0)), np.zeros((38, 0))),
        want_normal=True,
    )
    assert series.valid == slice(0, 0)
    assert np.all(series.p == 0.0)


def test_step_rejects_window_outside_series(small_setup):
    op = small_setup.op
    snap = _snapshots(small_setup.record)[0]
    short = FieldSeries(dt=op.dt, start=op.base_delay, p=np.zeros(op.window - 1))
    with pytest.raises(ValueError, match="outside series"):
        step(op, snap, short)


def test_streaming_matches_batched_run(small_setup):
    op = small_setup.op
    batched = run(op, small_setup.record, want_normal=True)
    acc = StreamingAccumulator(op, want_normal=True)
    emitted = []
    for snap in _snapshots(small_setup.record):
        out = acc.push(snap)
        if out is not None:
            emitted.append(out)
    # streaming emits exactly the physically complete samples
    assert len(emitted) == small_setup.steps - (op.window - 1)
    scale = np.abs(batched.p).max()
    for k, (abs_step, p, pn) in enumerate(emitted):
        local = op.window - 1 + k
        assert abs_step == op.base_delay + local
        np.testing.assert_allclose(p, batched.p[local], atol=1e-13 * scale)
        np.testing.assert_allclose(pn, batched.pn[local], atol=1e-13 * scale)


def test_streaming_rejects_gaps(small_setup):
    acc = StreamingAccumulator(small_setup.op)
    snaps = _snapshots(small_setup.record)
    acc.push(snaps[0])
    with pytest.raises(ValueError, match="expected step 1, got 2"):
        acc.push(snaps[2])


def test_streaming_requires_normal_kernels(small_setup):
    from khfield.geometry import FieldPoint
    from khfield.operator import assemble

    s = small_setup
    fp = FieldPoint(rho=2.0, theta=0.4, phi=0.3)
    op = assemble(fp, s.frame, s.elev, s.grid, s.A, s.dt, s.c, K=4)
    with pytest.raises(ValueError, match="without a field-point normal"):
        StreamingAccumulator(op, want_normal=True)


def test_error_metric_peak_relative_difference():
    ref = FieldSeries(dt=0.1, start=0, p=np.array([0.0, 2.0, 4.0, 1.0]))
    cand = FieldSeries(dt=0.1, start=0, p=np.array([0.0, 2.0, 5.0, 1.0]))
    np.testing.assert_allclose(error_metric(ref, cand), 0.25)


def test_error_metric_uses_common_absolute_range():
    # reference starts two absolute steps later; only steps 2 and 3 align
    ref = FieldSeries(dt=0.1, start=2, p=np.array([4.0, 1.0]))
    cand = FieldSeries(dt=0.1, start=0, p=np.array([9.0, 9.0, 5.0, 1.0]))
    np.testing.assert_allclose(error_metric(ref, cand), 0.25)


def test_error_metric_respects_valid_slices():
    ref = FieldSeries(dt=0.1, start=0, p=np.array([7.0, 2.0, 4.0, 1.0]))
    cand = FieldSeries(
        dt=0.1,
        start=0,
        p=np.array([0.0, 2.0, 4.0, 2.0]),
        valid=slice(1, 3),  # masks both mismatched endpoints
    )
    np.testing.assert_allclose(error_metric(ref, cand), 0.0)


def test_error_metric_validation():
    a = FieldSeries(dt=0.1, start=0, p=np.ones(4))
    b = FieldSeries(dt=0.2, start=0, p=np.ones(4))
    with pytest.raises(ValueError, match="time steps differ"):
        error_metric(a, b)
    c = FieldSeries(dt=0.1, start=10, p=np.ones(4))
    with pytest.raises(ValueError, match="do not overlap"):
        error_metric(a, c)
    with pytest.raises(ValueError, match="missing from a series"):
        error_metric(a, FieldSeries(dt=0.1, start=0, p=np.ones(4)), component="pn")
    zero = FieldSeries(dt=0.1, start=0, p=np.zeros(4))
    with pytest.raises(ValueError, match="identically zero"):
        error_metric(zero, a)
