"""CSV formats for series, snapshots, rules, ensembles and reports.

Every writer starts the file with `# key = value` comment lines echoing
the configuration that produced it, follows with one plain CSV row of
column names, then the data.  Floats are written with 17 significant
digits so values round-trip exactly.  Readers skip comment lines,
tolerate the column-name row, and report malformed content with file,
line and column.
"""

import csv
from dataclasses import fields as dataclass_fields

import numpy as np

from .oracle import PointSource, RampedCosine, SourceEnsemble
from .propagate import FieldSeries
from .quadrature import LebedevRule

__all__ = [
    "format_number",
    "read_header",
    "write_series",
    "read_series",
    "write_snapshots",
    "read_snapshots",
    "write_rule",
    "write_ensemble",
    "read_ensemble",
    "write_rows",
    "write_bench_reports",
]


def format_number(value) -> str:
    return "{:.17g}".format(float(value))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    return str(value)


def _write(path, columns, rows, header):
    with open(path, "w", newline="") as fh:
        if header:
            for key, val in header.items():
                fh.write(f"# {key} = {_cell(val)}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _iter_csv(path, columns):
    """Yield (lineno, row) of data lines, skipping comments and the name row."""
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if [c.strip().lower() for c in row] == [c.lower() for c in columns]:
                continue
            yield lineno, [c.strip() for c in row]


def read_header(path) -> dict[str, str]:
    """The `# key = value` comment block at the top of a file."""
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                out[key.strip()] = val.strip()
    return out


def _parse_float(path, lineno, col, text):
    try:
        return float(text)
    except ValueError:
        raise ValueError(
            f"{path}:{lineno}: column {col}: {text!r} is not a number"
        ) from None


def _parse_int(path, lineno, col, text):
    try:
        return int(text)
    except ValueError:
        raise ValueError(
            f"{path}:{lineno}: column {col}: {text!r} is not an integer"
        ) from None


def _check_width(path, lineno, row, columns):
    if len(row) != len(columns):
        raise ValueError(
            f"{path}:{lineno}: expected {len(columns)} columns "
            f"({', '.join(columns)}), got {len(row)}"
        )


_SERIES_COLUMNS = ("t", "p", "dpdn")


def write_series(path, series: FieldSeries, header: dict | None = None) -> None:
    """Output series as CSV rows (t, p, dpdn); dpdn blank when absent.

    The alignment metadata (dt, start step, valid sample range) rides in
    the comment header so the series can be reconstructed exactly.
    """
    meta = dict(header or {})
    meta["dt"] = series.dt
    meta["start"] = series.start
    meta["valid"] = f"{series.valid.start}:{series.valid.stop}"
    times = series.times()
    pn = series.pn if series.pn is not None else [None] * series.p.size
    rows = zip(times, series.p, pn)
    _write(path, _SERIES_COLUMNS, rows, meta)


def read_series(path) -> FieldSeries:
    """Rebuild a series written by :func:`write_series`."""
    meta = read_header(path)
    for key in ("dt", "start", "valid"):
        if key not in meta:
            raise ValueError(f"{path}: missing '{key}' in the header comments")
    p, pn = [], []
    for lineno, row in _iter_csv(path, _SERIES_COLUMNS):
        _check_width(path, lineno, row, _SERIES_COLUMNS)
        p.append(_parse_float(path, lineno, 2, row[1]))
        pn.append(_parse_float(path, lineno, 3, row[2]) if row[2] else None)
    has_pn = [v is not None for v in pn]
    if any(has_pn) and not all(has_pn):
        raise ValueError(f"{path}: dpdn column must be fully present or fully blank")
    lo, _, hi = meta["valid"].partition(":")
    return FieldSeries(
        dt=float(meta["dt"]),
        start=int(meta["start"]),
        p=np.array(p),
        pn=np.array(pn, dtype=float) if all(has_pn) and pn else None,
        valid=slice(int(lo), int(hi)),
    )


_SNAPSHOT_COLUMNS = ("step", "node", "p", "dpdn")


def write_snapshots(
    path, sigma: np.ndarray, sigma_n: np.ndarray, header: dict | None = None
) -> None:
    """Surface record as CSV rows (step, node index, p, dpdn)."""
    sigma = np.asarray(sigma, dtype=float)
    sigma_n = np.asarray(sigma_n, dtype=float)
    if sigma.shape != sigma_n.shape or sigma.ndim != 2:
        raise ValueError("snapshot arrays must both be (node_count, n_steps)")
    rows = (
        (i, j, sigma[j, i], sigma_n[j, i])
        for i in range(sigma.shape[1])
        for j in range(sigma.shape[0])
    )
    _write(path, _SNAPSHOT_COLUMNS, rows, header)


def read_snapshots(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a surface record; returns (sigma, sigma_n), nodes by steps.

    The rows may arrive in any order but must cover every (step, node)
    pair exactly once; holes and duplicates are reported with indices.
    """
    steps, nodes, p, pn = [], [], [], []
    for lineno, row in _iter_csv(path, _SNAPSHOT_COLUMNS):
        _check_width(path, lineno, row, _SNAPSHOT_COLUMNS)
        steps.append(_parse_int(path, lineno, 1, row[0]))
        nodes.append(_parse_int(path, lineno, 2, row[1]))
        p.append(_parse_float(path, lineno, 3, row[2]))
        pn.append(_parse_float(path, lineno, 4, row[3]))
    if not steps:
        raise ValueError(f"{path}: no snapshot rows found")
    steps = np.array(steps)
    nodes = np.array(nodes)
    n_steps, n_nodes = steps.max() + 1, nodes.max() + 1
    if steps.min() < 0 or nodes.min() < 0:
        raise ValueError(f"{path}: negative step or node index")
    if steps.size != n_steps * n_nodes:
        raise ValueError(
            f"{path}: {steps.size} rows do not fill {n_steps} steps x "
            f"{n_nodes} nodes"
        )
    counts = np.zeros((n_nodes, n_steps), dtype=int)
    np.add.at(counts, (nodes, steps), 1)
    if (counts > 1).any():
        j, i = np.argwhere(counts > 1)[0]
        raise ValueError(f"{path}: duplicate row for step {i}, node {j}")
    sigma = np.empty((n_nodes, n_steps))
    sigma_n = np.empty((n_nodes, n_steps))
    sigma[nodes, steps] = p
    sigma_n[nodes, steps] = pn
    return sigma, sigma_n


_RULE_COLUMNS = ("theta", "phi", "weight")


def write_rule(path, rule: LebedevRule, header: dict | None = None) -> None:
    """Quadrature rule as CSV rows (theta, phi, weight)."""
    meta = dict(header or {})
    meta.setdefault("nodes", rule.node_count)
    meta.setdefault("order", rule.order)
    rows = zip(rule.theta, rule.phi, rule.weights)
    _write(path, _RULE_COLUMNS, rows, meta)


_ENSEMBLE_COLUMNS = ("x", "y", "z", "omega")


def write_ensemble(path, ensemble: SourceEnsemble, header: dict | None = None) -> None:
    """Source positions and frequencies as CSV rows (x, y, z, omega)."""
    meta = dict(header or {})
    if ensemble.seed is not None:
        meta.setdefault("seed", ensemble.seed)
    rows = (
        (s.position[0], s.position[1], s.position[2], s.signal.omega)
        for s in ensemble.sources
    )
    _write(path, _ENSEMBLE_COLUMNS, rows, meta)


def read_ensemble(path, ramp: float = 0.0) -> SourceEnsemble:
    """Rebuild a cosine-source ensemble written by :func:`write_ensemble`."""
    sources = []
    for lineno, row in _iter_csv(path, _ENSEMBLE_COLUMNS):
        _check_width(path, lineno, row, _ENSEMBLE_COLUMNS)
        vals = [_parse_float(path, lineno, k + 1, row[k]) for k in range(4)]
        sources.append(
            PointSource(
                position=np.array(vals[:3]),
                signal=RampedCosine(omega=vals[3], ramp=ramp),
            )
        )
    if not sources:
        raise ValueError(f"{path}: no source rows found")
    return SourceEnsemble(sources=tuple(sources))


def write_rows(path, columns, rows, header: dict | None = None) -> None:
    """Generic table writer used by the sweep commands."""
    _write(path, tuple(columns), rows, header)


def write_bench_reports(path, reports, header: dict | None = None) -> None:
    """Benchmark reports, one CSV row per source count.

    A missing break-even (direct path no slower per point) is written
    as the literal cell `no-break-even`.
    """
    if not reports:
        raise ValueError("no benchmark reports to write")
    names = [f.name for f in dataclass_fields(reports[0])]
    rows = []
    for rep in reports:
        row = []
        for name in names:
            val = getattr(rep, name)
            if name == "n_f" and val is None:
                val = "no-break-even"
            row.append(val)
        rows.append(row)
    _write(path, names, rows, header)
