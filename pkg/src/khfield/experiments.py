"""Accuracy studies: temporal convergence, band-limit and radius sweeps.

All studies share one setup: a gaussian-modulated cosine point source
inside the unit sphere radiating through the surface operators to an
exterior field point, with the closed-form field as reference.  Sweep
drivers reuse every piece that a sweep axis does not touch (surface
records across stencil orders, ring vectors across radii), so full
sweeps stay fast enough for routine runs.
"""

from dataclasses import dataclass, replace

import numpy as np

from .geometry import FieldPoint, SurfaceFrame, rotated_frame
from .harmonics import BandLimit, build_analysis_matrix
from .operator import _azimuthal_batch, assemble
from .oracle import (
    GaussianCosine,
    PointSource,
    SourceEnsemble,
    direct_field,
    surface_data,
)
from .propagate import FieldSeries, error_metric, run
from .quadrature import azimuth_grid, gauss_legendre_elevation, lebedev_rule, rule_for_band
from .reference import reference_field

__all__ = [
    "StudyConfig",
    "ConvergenceRow",
    "BandRow",
    "RadiusRow",
    "single_source",
    "evaluate_case",
    "convergence_sweep",
    "band_sweep",
    "radius_sweep",
    "reference_comparison",
    "monopole_comparison",
    "fit_slope",
]


@dataclass(frozen=True)
class StudyConfig:
    """Geometry, discretization and sweep defaults for the studies."""

    a: float = 1.0
    rho: float = 2.0
    theta: float = 0.4
    phi: float = 0.3
    normal: tuple[float, float, float] | None = (0.36, -0.48, 0.8)
    band: int = 32
    node_count: int | None = None  # default smallest rule of order >= 2 band
    psi_count: int | None = None  # default 2 band + 2
    gamma_count: int | None = None  # default 2 band + 2
    order: int = 8
    steps: int = 2048
    duration: float = 4.0  # record length; dt = duration / steps
    c: float = 1.0

    @property
    def dt(self) -> float:
        return self.duration / self.steps

    def field_point(self) -> FieldPoint:
        n = None if self.normal is None else np.asarray(self.normal, dtype=float)
        return FieldPoint(rho=self.rho, theta=self.theta, phi=self.phi, normal=n)


@dataclass(frozen=True)
class ConvergenceRow:
    steps: int
    order: int
    eps_p: float
    eps_pn: float | None


@dataclass(frozen=True)
class BandRow:
    band: int
    node_count: int
    eps_p: float
    eps_pn: float | None


@dataclass(frozen=True)
class RadiusRow:
    band: int
    node_count: int
    rho: float
    eps_p: float


def single_source(
    alpha: float = 0.5, t0: float = 2.0, omega: float = 10.0
) -> SourceEnsemble:
    """The off-center gaussian-cosine source used throughout the studies."""
    pos = 0.7 * np.array([1.0, -1.0, 1.0]) / np.sqrt(3.0)
    return SourceEnsemble(
        sources=(PointSource(position=pos, signal=GaussianCosine(alpha, t0, omega)),)
    )


def _pieces(cfg: StudyConfig):
    """Field-point-direction pieces shared across dt, K and radius sweeps."""
    if cfg.node_count is None:
        rule = rule_for_band(cfg.band)
    else:
        rule = lebedev_rule(cfg.node_count)
    band = BandLimit(cfg.band)
    frame = SurfaceFrame(radius=cfg.a, rule=rule, band=band)
    A = build_analysis_matrix(rule, band, strict=False)
    elev = gauss_legendre_elevation(
        cfg.psi_count if cfg.psi_count is not None else 2 * cfg.band + 2
    )
    grid = azimuth_grid(
        cfg.gamma_count if cfg.gamma_count is not None else 2 * cfg.band + 2
    )
    rings = _azimuthal_batch(rotated_frame(cfg.field_point()), elev.nodes, grid, A)
    return frame, A, elev, grid, rings


def _reference_series(
    ensemble: SourceEnsemble, cfg: StudyConfig, series: FieldSeries
) -> FieldSeries:
    fp = cfg.field_point()
    x = fp.cartesian()
    if fp.normal is None:
        p = direct_field(ensemble, x, series.times(), cfg.c)
        pn = None
    else:
        p, pn = direct_field(ensemble, x, series.times(), cfg.c, fp.normal)
    return FieldSeries(dt=series.dt, start=series.start, p=p, pn=pn)


def evaluate_case(
    cfg: StudyConfig,
    ensemble: SourceEnsemble | None = None,
    pieces=None,
    record=None,
):
    """Run one configuration; return (eps_p, eps_pn).

    pieces and record allow sweep drivers to reuse the direction setup
    and the surface data when the sweep axis leaves them unchanged.
    """
    if ensemble is None:
        ensemble = single_source()
    if pieces is None:
        pieces = _pieces(cfg)
    frame, A, elev, grid, rings = pieces
    if record is None:
        record = surface_data(ensemble, frame, cfg.steps, cfg.dt, cfg.c)
    op = assemble(
        cfg.field_point(), frame, elev, grid, A, cfg.dt, cfg.c, cfg.order,
        ring_vectors=rings,
    )
    series = run(op, record, want_normal=cfg.normal is not None)
    ref = _reference_series(ensemble, cfg, series)
    eps_p = error_metric(ref, series)
    eps_pn = (
        error_metric(ref, series, component="pn") if cfg.normal is not None else None
    )
    return eps_p, eps_pn


def convergence_sweep(
    cfg: StudyConfig = StudyConfig(),
    steps_list: tuple[int, ...] = (128, 256, 512, 1024, 2048),
    orders: tuple[int, ...] = (4, 6, 8),
    ensemble: SourceEnsemble | None = None,
) -> list[ConvergenceRow]:
    """Error against record resolution for several stencil orders."""
    if ensemble is None:
        ensemble = single_source()
    pieces = _pieces(cfg)
    frame = pieces[0]
    rows = []
    for n in steps_list:
        case = replace(cfg, steps=int(n))
        record = surface_data(ensemble, frame, case.steps, case.dt, case.c)
        for K in orders:
            eps_p, eps_pn = evaluate_case(
                replace(case, order=int(K)), ensemble, pieces, record
            )
            rows.append(ConvergenceRow(int(n), int(K), eps_p, eps_pn))
    return rows


def band_sweep(
    cfg: StudyConfig = StudyConfig(),
    bands: tuple[int, ...] = (8, 12, 16, 20, 24, 28, 32),
    ensemble: SourceEnsemble | None = None,
) -> list[BandRow]:
    """Error against interpolation band limit at fixed resolution.

    Each band gets the smallest surface rule whose order covers twice
    the band, so the quadrature never limits what the band can resolve.
    """
    if ensemble is None:
        ensemble = single_source()
    rows = []
    for ns in bands:
        node_count = rule_for_band(int(ns)).node_count
        case = replace(
            cfg, band=int(ns), node_count=node_count,
            psi_count=None, gamma_count=None,
        )
        pieces = _pieces(case)
        record = surface_data(ensemble, pieces[0], case.steps, case.dt, case.c)
        eps_p, eps_pn = evaluate_case(case, ensemble, pieces, record)
        rows.append(BandRow(int(ns), node_count, eps_p, eps_pn))
    return rows


def radius_sweep(
    cfg: StudyConfig = StudyConfig(),
    radii: tuple[float, ...] = (1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.0),
    bands: tuple[int, ...] = (8, 16, 32),
    steps: int = 512,
    ensemble: SourceEnsemble | None = None,
) -> list[RadiusRow]:
    """Error against field-point radius for several band limits.

    The ring vectors depend on the field-point direction but not its
    radius, so each band builds them once for the whole radius range.
    """
    if ensemble is None:
        ensemble = single_source()
    base = replace(cfg, steps=steps, normal=None)
    rows = []
    for ns in bands:
        case_band = replace(
            base, band=int(ns), node_count=rule_for_band(int(ns)).node_count,
            psi_count=None, gamma_count=None,
        )
        pieces = _pieces(case_band)
        record = surface_data(
            ensemble, pieces[0], case_band.steps, case_band.dt, case_band.c
        )
        for rho in radii:
            case = replace(case_band, rho=float(rho))
            eps_p, _ = evaluate_case(case, ensemble, pieces, record)
            rows.append(RadiusRow(int(ns), case_band.node_count, float(rho), eps_p))
    return rows


def reference_comparison(
    cfg: StudyConfig = StudyConfig(),
    sample_count: int = 33,
    ensemble: SourceEnsemble | None = None,
):
    """Operator path against the dense retarded-time reference.

    Returns (eps_p, eps_pn): peak differences over output samples spread
    across the valid window, relative to the reference peak.
    """
    if ensemble is None:
        ensemble = single_source()
    pieces = _pieces(cfg)
    frame, A, elev, grid, rings = pieces
    record = surface_data(ensemble, frame, cfg.steps, cfg.dt, cfg.c)
    op = assemble(
        cfg.field_point(), frame, elev, grid, A, cfg.dt, cfg.c, cfg.order,
        ring_vectors=rings,
    )
    series = run(op, record, want_normal=cfg.normal is not None)
    stencil = 10
    lo = op.base_delay + op.window + stencil
    hi = op.base_delay + cfg.steps - stencil
    steps_abs = np.unique(np.linspace(lo, hi, sample_count).astype(int))
    # same quadrature sizes as the operator so only the scatter/kernel
    # algebra differs between the two paths
    p_ref, pn_ref = reference_field(
        cfg.field_point(), frame, record[0], record[1], cfg.dt, cfg.c,
        steps_abs, psi_count=elev.length, gamma_count=grid.count,
        stencil=stencil,
    )
    sel = steps_abs - series.start
    eps_p = float(np.max(np.abs(series.p[sel] - p_ref)) / np.max(np.abs(p_ref)))
    eps_pn = None
    if cfg.normal is not None:
        eps_pn = float(
            np.max(np.abs(series.pn[sel] - pn_ref)) / np.max(np.abs(pn_ref))
        )
    return eps_p, eps_pn


def monopole_comparison(cfg: StudyConfig = StudyConfig()) -> float:
    """Operator path against the closed form for a centered source."""
    ensemble = SourceEnsemble(
        sources=(
            PointSource(position=np.zeros(3), signal=GaussianCosine(0.5, 2.0, 10.0)),
        )
    )
    case = replace(cfg, normal=None)
    eps_p, _ = evaluate_case(case, ensemble)
    return eps_p


def fit_slope(x, y, floor: float | None = None) -> float:
    """Least-squares log-log slope, ignoring points at the error floor.

    Points within 3x of the series minimum are floor-dominated and
    carry no order information, so they are excluded (for a cleanly
    geometric series this leaves the slope unchanged).  A fit needs two
    points; when the floor claims the rest, the two largest errors are
    used.  Pass floor to override the cutoff.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("slope fit needs at least two points")
    if floor is None:
        floor = 3.0 * float(y.min())
    keep = y > floor
    if int(keep.sum()) < 2:
        keep = np.zeros(y.size, dtype=bool)
        keep[np.argsort(y)[-2:]] = True
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])
