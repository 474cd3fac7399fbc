"""HTTP service exposing the propagation pipeline.

The command-line client talks to this app, in process by default, so
every computation runs behind one validated JSON interface: the three
accuracy studies, the benchmark, quadrature-rule export, and
general-purpose propagation of a supplied surface record (optionally
returning or consuming a serialized operator).
"""

import base64
from dataclasses import asdict
from typing import ClassVar

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .bench import BenchConfig, breakeven
from .experiments import (
    StudyConfig,
    band_sweep,
    convergence_sweep,
    radius_sweep,
)
from .geometry import FieldPoint, SurfaceFrame
from .harmonics import BandLimit, build_analysis_matrix
from .operator import assemble, operator_bytes, operator_from_bytes
from .propagate import run
from .quadrature import (
    azimuth_grid,
    gauss_legendre_elevation,
    lebedev_rule,
    lebedev_sizes,
    rule_for_band,
)

__all__ = ["create_app", "app"]


class StudyRequest(BaseModel):
    """Geometry and discretization shared by the accuracy studies."""

    a: float = 1.0
    rho: float = 2.0
    theta: float = 0.4
    phi: float = 0.3
    normal: tuple[float, float, float] | None = (0.36, -0.48, 0.8)
    band: int = 32
    node_count: int | None = None
    psi_count: int | None = None
    gamma_count: int | None = None
    order: int = 8
    steps: int = 2048
    duration: float = 4.0
    c: float = 1.0

    _extra: ClassVar[tuple[str, ...]] = ()

    def to_config(self) -> StudyConfig:
        data = self.model_dump(exclude=set(self._extra))
        return StudyConfig(**data)


class ConvergenceRequest(StudyRequest):
    steps_list: tuple[int, ...] = (128, 256, 512, 1024, 2048)
    orders: tuple[int, ...] = (4, 6, 8)

    _extra: ClassVar[tuple[str, ...]] = ("steps_list", "orders")


class BandSweepRequest(StudyRequest):
    bands: tuple[int, ...] = (8, 12, 16, 20, 24, 28, 32)

    _extra: ClassVar[tuple[str, ...]] = ("bands",)


class RadiusSweepRequest(StudyRequest):
    steps: int = 512
    radii: tuple[float, ...] = (1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5, 8.0)
    bands: tuple[int, ...] = (8, 16, 32)

    _extra: ClassVar[tuple[str, ...]] = ("radii", "bands", "steps")


class BreakevenRequest(BaseModel):
    node_count: int = 434
    band: int = 32
    order: int = 8
    steps: int = 1024
    dt: float = 1e-3
    c: float = 340.0
    rho: float = 2.0
    theta: float = 0.4
    phi: float = 0.3
    ramp_fraction: float = 0.05
    seed: int = 1905
    repeats: int = 5
    source_counts: tuple[int, ...] | None = None
    single_thread: bool = True


class PropagateRequest(BaseModel):
    """Surface record plus either assembly geometry or an operator image."""

    a: float = 1.0
    rho: float = 2.0
    theta: float = 0.4
    phi: float = 0.3
    normal: tuple[float, float, float] | None = None
    band: int = 32
    node_count: int | None = None
    psi_count: int | None = None
    gamma_count: int | None = None
    order: int = 8
    dt: float = 1e-2
    c: float = 1.0
    sigma: list[list[float]]
    sigma_n: list[list[float]]
    operator_b64: str | None = None
    return_operator: bool = False

    def echo(self) -> dict:
        out = self.model_dump(exclude={"sigma", "sigma_n", "operator_b64"})
        out["n_steps"] = len(self.sigma[0]) if self.sigma else 0
        out["node_count"] = (
            self.node_count if self.node_count is not None else len(self.sigma)
        )
        out["from_operator"] = self.operator_b64 is not None
        return out


def create_app() -> FastAPI:
    app = FastAPI(title="khfield", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/rules")
    def rules():
        return {"sizes": lebedev_sizes()}

    @app.get("/rules/{node_count}")
    def rule(node_count: int):
        r = lebedev_rule(node_count)
        return {
            "node_count": r.node_count,
            "order": r.order,
            "theta": r.theta.tolist(),
            "phi": r.phi.tolist(),
            "weight": r.weights.tolist(),
        }

    @app.post("/convergence")
    def convergence(req: ConvergenceRequest):
        rows = convergence_sweep(
            req.to_config(), steps_list=req.steps_list, orders=req.orders
        )
        config = req.model_dump()
        if config["node_count"] is None:
            config["node_count"] = rule_for_band(req.band).node_count
        return {"config": config, "rows": [asdict(r) for r in rows]}

    @app.post("/nsph")
    def nsph(req: BandSweepRequest):
        rows = band_sweep(req.to_config(), bands=req.bands)
        return {"config": req.model_dump(), "rows": [asdict(r) for r in rows]}

    @app.post("/radius-sweep")
    def radius(req: RadiusSweepRequest):
        rows = radius_sweep(
            req.to_config(), radii=req.radii, bands=req.bands, steps=req.steps
        )
        return {"config": req.model_dump(), "rows": [asdict(r) for r in rows]}

    @app.post("/breakeven")
    def bench(req: BreakevenRequest):
        cfg = BenchConfig(**req.model_dump())
        reports = breakeven(cfg)
        return {"config": req.model_dump(), "reports": [asdict(r) for r in reports]}

    @app.post("/propagate")
    def propagate(req: PropagateRequest):
        sigma = np.asarray(req.sigma, dtype=float)
        sigma_n = np.asarray(req.sigma_n, dtype=float)
        if sigma.ndim != 2 or sigma.shape != sigma_n.shape:
            raise ValueError("sigma and sigma_n must both be node_count x n_steps")
        if req.node_count is not None and req.node_count != sigma.shape[0]:
            raise ValueError(
                f"snapshots carry {sigma.shape[0]} nodes, expected "
                f"{req.node_count}"
            )
        if req.operator_b64 is not None:
            op = operator_from_bytes(base64.b64decode(req.operator_b64))
            if op.node_count != sigma.shape[0]:
                raise ValueError(
                    f"snapshots carry {sigma.shape[0]} nodes, operator expects "
                    f"{op.node_count}"
                )
        else:
            rule_ = lebedev_rule(sigma.shape[0])
            band = BandLimit(req.band)
            frame = SurfaceFrame(radius=req.a, rule=rule_, band=band)
            fp = FieldPoint(
                rho=req.rho,
                theta=req.theta,
                phi=req.phi,
                normal=None
                if req.normal is None
                else np.asarray(req.normal, dtype=float),
            )
            A = build_analysis_matrix(rule_, band, strict=False)
            elev = gauss_legendre_elevation(
                req.psi_count if req.psi_count is not None else 2 * req.band + 2
            )
            grid = azimuth_grid(
                req.gamma_count if req.gamma_count is not None else 2 * req.band + 2
            )
            op = assemble(fp, frame, elev, grid, A, req.dt, req.c, req.order)
        series = run(op, (sigma, sigma_n), want_normal=op.has_normal)
        out = {
            "config": req.echo(),
            "dt": op.dt,
            "start": series.start,
            "valid": [series.valid.start, series.valid.stop],
            "t": series.times().tolist(),
            "p": series.p.tolist(),
            "pn": None if series.pn is None else series.pn.tolist(),
        }
        if req.return_operator:
            out["operator_b64"] = base64.b64encode(operator_bytes(op)).decode()
        return out

    return app


app = create_app()
