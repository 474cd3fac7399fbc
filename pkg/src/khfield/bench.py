"""Break-even timing of the surface-operator path against direct summation.

For an ensemble of interior sources, the field at exterior points can
be computed either by summing the sources directly or by generating
surface data once and applying a propagation operator per field point.
With pre-processing time t_p (surface-data generation plus the shared
analysis matrix), per-point surface time t_s (operator assembly plus
application) and per-point direct time t_d, the surface path wins once
the number of field points exceeds

    n_f = t_p / (t_d - t_s).

Both paths consume the identical ensemble, evaluate the identical
signal functions, and are timed pinned to a single thread by default;
the field error at the benchmark point is computed from the same run
as the timings.
"""

import platform
import time
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .geometry import FieldPoint, SurfaceFrame
from .harmonics import BandLimit, build_analysis_matrix
from .operator import assemble
from .oracle import RNG_ALGORITHM, direct_series, random_ensemble, surface_data
from .propagate import FieldSeries, error_metric, run
from .quadrature import azimuth_grid, gauss_legendre_elevation, lebedev_rule

__all__ = ["BenchConfig", "BenchReport", "break_even_count", "breakeven"]


@dataclass(frozen=True)
class BenchConfig:
    """Benchmark parameters; source_counts defaults to (10, 20) x nodes."""

    node_count: int = 434
    band: int = 32
    order: int = 8
    steps: int = 1024
    dt: float = 1e-3
    c: float = 340.0
    rho: float = 2.0
    theta: float = 0.4
    phi: float = 0.3
    ramp_fraction: float = 0.05  # ramp length as a fraction of the record
    seed: int = 1905
    repeats: int = 5
    source_counts: tuple[int, ...] | None = None
    single_thread: bool = True


@dataclass(frozen=True)
class BenchReport:
    """One benchmark row: timings, break-even count and run metadata.

    The storage and cost-model fields restate the per-time-step memory
    and matrix-multiplication cost of this scheme (two source terms on
    a near-optimal spherical rule) next to the tensor-product variant
    it replaces (three source terms); they are model values, never
    compared against the wall-clock numbers.
    """

    n_s: int
    node_count: int
    band: int
    order: int
    steps: int
    dt: float
    c: float
    rho: float
    theta: float
    phi: float
    seed: int
    repeats: int
    t_p: float
    t_s: float
    t_d: float
    n_f: float | None
    eps: float
    storage_per_step: float
    storage_per_step_tensor: float
    cost_per_step: float
    cost_per_step_tensor: float
    rng: str
    single_thread: bool
    machine: str


def break_even_count(t_p: float, t_s: float, t_d: float) -> float | None:
    """Field-point count where the two paths cost the same.

    None when the direct path is no slower per point (valid outcome for
    small ensembles: there is then no break-even).
    """
    if t_d <= t_s:
        return None
    return t_p / (t_d - t_s)


def _median_time(fn, repeats: int):
    """Median wall time over repeats runs after one discarded warm-up."""
    samples = []
    result = None
    for k in range(repeats + 1):
        begin = time.perf_counter()
        result = fn()
        elapsed = time.perf_counter() - begin
        if k > 0:
            samples.append(elapsed)
    return float(np.median(samples)), result


def _machine_tag() -> str:
    return (
        f"{platform.system()} {platform.machine()}, "
        f"python {platform.python_version()}, numpy {np.__version__}"
    )


def breakeven(config: BenchConfig = BenchConfig()) -> list[BenchReport]:
    """Time both paths for each source count and report break-even."""
    counts = config.source_counts
    if counts is None:
        counts = (10 * config.node_count, 20 * config.node_count)
    rule = lebedev_rule(config.node_count)
    band = BandLimit(config.band)
    frame = SurfaceFrame(radius=1.0, rule=rule, band=band)
    fp = FieldPoint(rho=config.rho, theta=config.theta, phi=config.phi)
    x = fp.cartesian()
    ramp = config.ramp_fraction * config.steps * config.dt
    limit = 1 if config.single_thread else None
    reports = []
    for n_s in counts:
        ensemble = random_ensemble(int(n_s), config.seed, ramp=ramp)
        with threadpool_limits(limits=limit):
            # pre-processing: shared across every field point, timed once
            # (its scale is seconds; the per-point medians below are the
            # noise-sensitive quantities)
            begin = time.perf_counter()
            A = build_analysis_matrix(rule, band, strict=False)
            elev = gauss_legendre_elevation(2 * config.band + 2)
            grid = azimuth_grid(2 * config.band + 2)
            sigma, sigma_n = surface_data(
                ensemble, frame, config.steps, config.dt, config.c
            )
            t_p = time.perf_counter() - begin

            def surface_path():
                op = assemble(
                    fp, frame, elev, grid, A, config.dt, config.c, config.order
                )
                return run(op, (sigma, sigma_n))

            t_s, series = _median_time(surface_path, config.repeats)
            times = series.times()

            def direct_path():
                return direct_series(ensemble, x, times, config.c)

            t_d, p_direct = _median_time(direct_path, config.repeats)
        ref = FieldSeries(dt=config.dt, start=series.start, p=p_direct)
        eps = error_metric(ref, series)
        ns1 = float(config.band + 1)
        reports.append(
            BenchReport(
                n_s=int(n_s),
                node_count=config.node_count,
                band=config.band,
                order=config.order,
                steps=config.steps,
                dt=config.dt,
                c=config.c,
                rho=config.rho,
                theta=config.theta,
                phi=config.phi,
                seed=config.seed,
                repeats=config.repeats,
                t_p=t_p,
                t_s=t_s,
                t_d=t_d,
                n_f=break_even_count(t_p, t_s, t_d),
                eps=eps,
                storage_per_step=2.0 * ns1**2 / 3.0,
                storage_per_step_tensor=3.0 * ns1**2 / 2.0,
                cost_per_step=2.0 * ns1**4 / 9.0,
                cost_per_step_tensor=3.0 * ns1**4 / 4.0,
                rng=RNG_ALGORITHM,
                single_thread=config.single_thread,
                machine=_machine_tag(),
            )
        )
    return reports
