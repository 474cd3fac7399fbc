from __future__ import annotations

import numpy as np
import pytest

from khfield.bench import BenchReport
from khfield.fileio import (
    format_number,
    read_ensemble,
    read_header,
    read_series,
    read_snapshots,
    write_bench_reports,
    write_ensemble,
    write_rows,
    write_rule,
    write_series,
    write_snapshots,
)
from khfield.oracle import random_ensemble
from khfield.propagate import FieldSeries
from khfield.quadrature import lebedev_rule


def test_format_number_round_trips_doubles():
    for x in (0.1, -1.0 / 3.0, 1e-300, 6.35e-14, np.pi, 2.0**52 + 1):
        assert float(format_number(x)) == x


def _series(with_pn: bool) -> FieldSeries:
    rng = np.random.default_rng(3)
    return FieldSeries(
        dt=0.02,
        start=47,
        p=rng.standard_normal(20),
        pn=rng.standard_normal(20) if with_pn else None,
        valid=slice(4, 18),
    )


@pytest.mark.parametrize("with_pn", [True, False])
def test_series_round_trip(tmp_path, with_pn):
    path = tmp_path / "series.csv"
    original = _series(with_pn)
    write_series(path, original, header={"note": "case"})
    back = read_series(path)
    assert back.dt == original.dt
    assert back.start == original.start
    assert back.valid == original.valid
    np.testing.assert_array_equal(back.p, original.p)
    if with_pn:
        np.testing.assert_array_equal(back.pn, original.pn)
    else:
        assert back.pn is None
    assert read_header(path)["note"] == "case"


def test_series_rejects_partial_derivative_column(tmp_path):
    path = tmp_path / "series.csv"
    write_series(path, _series(True))
    lines = path.read_text().splitlines()
    first_data = next(i for i, l in enumerate(lines) if not l.startswith("#")) + 1
    cells = lines[first_data].split(",")
    cells[2] = ""
    lines[first_data] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="fully present or fully blank"):
        read_series(path)


def test_series_reports_bad_cell_with_location(tmp_path):
    path = tmp_path / "series.csv"
    write_series(path, _series(False))
    text = path.read_text().replace(format_number(_series(False).p[3]), "oops", 1)
    path.write_text(text)
    with pytest.raises(ValueError, match=r"series\.csv:\d+: column 2: 'oops' is not a number"):
        read_series(path)


def test_series_requires_header_metadata(tmp_path):
    path = tmp_path / "series.csv"
    write_series(path, _series(False))
    lines = [l for l in path.read_text().splitlines() if not l.startswith("# dt")]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="missing 'dt'"):
        read_series(path)


def test_series_rejects_wrong_column_count(tmp_path):
    path = tmp_path / "series.csv"
    write_series(path, _series(False))
    with open(path, "a") as f:
        f.write("1.0,2.0,3.0,4.0\n")
    with pytest.raises(ValueError, match="expected 3 columns"):
        read_series(path)


def test_snapshot_round_trip_in_any_row_order(tmp_path):
    path = tmp_path / "snaps.csv"
    rng = np.random.default_rng(5)
    sigma = rng.standard_normal((6, 9))
    sigma_n = rng.standard_normal((6, 9))
    write_snapshots(path, sigma, sigma_n, header={"dt": "0.1"})
    s, sn = read_snapshots(path)
    np.testing.assert_array_equal(s, sigma)
    np.testing.assert_array_equal(sn, sigma_n)
    # shuffle the data rows; indices carry the layout
    lines = path.read_text().splitlines()
    head = [l for l in lines if l.startswith("#")]
    cols = lines[len(head)]
    data = lines[len(head) + 1 :]
    rng.shuffle(data)
    path.write_text("\n".join(head + [cols] + data) + "\n")
    s, sn = read_snapshots(path)
    np.testing.assert_array_equal(s, sigma)
    np.testing.assert_array_equal(sn, sigma_n)


def _snapshot_lines(tmp_path, drop=None, dupe=None):
    path = tmp_path / "snaps.csv"
    sigma = np.arange(12.0).reshape(3, 4)
    write_snapshots(path, (sigma, -sigma))
    lines = path.read_text().splitlines()
    head_len = sum(1 for l in lines if l.startswith("#")) + 1
    data = lines[head_len:]
    if drop is not None:
        del data[drop]
    if dupe is not None:
        data.append(data[dupe])
    path.write_text("\n".join(lines[:head_len] + data) + "\n")
    return path


def test_snapshots_reject_holes(tmp_path):
    path = _snapshot_lines(tmp_path, drop=5)
    with pytest.raises(ValueError, match="do not fill 4 steps x 3 nodes"):
        read_snapshots(path)


def test_snapshots_reject_duplicates(tmp_path):
    path = _snapshot_lines(tmp_path, dupe=2)
    with pytest.raises(ValueError, match="duplicate row"):
        read_snapshots(path)


def test_snapshots_reject_empty(tmp_path):
    path = tmp_path / "snaps.csv"
    path.write_text("step,node,p,dpdn\n")
    with pytest.raises(ValueError, match="no snapshot rows"):
        read_snapshots(path)


def test_rule_export(tmp_path):
    path = tmp_path / "rule.csv"
    rule = lebedev_rule(26)
    write_rule(path, rule)
    meta = read_header(path)
    assert meta["nodes"] == "26"
    assert meta["order"] == str(rule.order)
    rows = [
        l for l in path.read_text().splitlines() if l and not l.startswith("#")
    ]
    assert rows[0] == "theta,phi,weight"
    assert len(rows) - 1 == 26
    got_w = np.array([float(r.split(",")[2]) for r in rows[1:]])
    np.testing.assert_array_equal(got_w, rule.weights)


def test_ensemble_round_trip(tmp_path):
    path = tmp_path / "sources.csv"
    ens = random_ensemble(10, seed=77, ramp=0.0)
    write_ensemble(path, ens)
    back = read_ensemble(path, ramp=0.25)
    assert back.seed == 77
    np.testing.assert_array_equal(back.positions(), ens.positions())
    for a, b in zip(back.sources, ens.sources):
        assert a.signal.omega == b.signal.omega
        assert a.signal.ramp == 0.25


def test_ensemble_rejects_empty(tmp_path):
    path = tmp_path / "sources.csv"
    path.write_text("x,y,z,omega\n")
    with pytest.raises(ValueError, match="no source rows"):
        read_ensemble(path)


def _report(n_f):
    return BenchReport(
        n_s=10,
        node_count=26,
        band=2,
        order=4,
        steps=64,
        dt=1e-3,
        c=340.0,
        rho=2.0,
        theta=0.4,
        phi=0.3,
        seed=1,
        repeats=1,
        t_p=0.5,
        t_s=0.001,
        t_d=0.002,
        n_f=n_f,
        eps=1e-6,
        storage_per_step=6.0,
        storage_per_step_tensor=13.5,
        cost_per_step=18.0,
        cost_per_step_tensor=60.75,
        rng="numpy-PCG64",
        single_thread=True,
        machine="test",
    )


def test_bench_report_rows(tmp_path):
    path = tmp_path / "bench.csv"
    write_bench_reports(path, [_report(500.0), _report(None)])
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    cols = lines[0].split(",")
    assert cols[0] == "n_s" and "n_f" in cols and "machine" in cols
    rows = [l.split(",") for l in lines[1:]]
    assert rows[0][cols.index("n_f")] == "500"
    assert rows[1][cols.index("n_f")] == "no-break-even"
    assert rows[0][cols.index("rng")] == "numpy-PCG64"


def test_bench_report_rejects_empty(tmp_path):
    with pytest.raises(ValueError, match="no reports"):
        write_bench_reports(tmp_path / "bench.csv", [])


def test_write_rows_generic(tmp_path):
    path = tmp_path / "table.csv"
    write_rows(
        path,
        ("steps", "eps"),
        [(128, 1e-5), (256, 3.4e-7)],
        header={"order": "4"},
    )
    lines = path.read_text().splitlines()
    assert "# order = 4" in lines
    assert "steps,eps" in lines
    assert lines[-1].startswith("256,")
