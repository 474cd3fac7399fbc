from __future__ import annotations

from types import SimpleNamespace

import numpy as np
import pytest

from khfield.geometry import FieldPoint, SurfaceFrame
from khfield.harmonics import BandLimit, build_analysis_matrix
from khfield.operator import assemble
from khfield.oracle import random_ensemble, surface_data
from khfield.quadrature import azimuth_grid, gauss_legendre_elevation, rule_for_band


@pytest.fixture(scope="session")
def small_setup():
    """One cheap but fully featured pipeline: band 4, 38 nodes, K = 4."""
    band = BandLimit(4)
    rule = rule_for_band(4)
    frame = SurfaceFrame(radius=1.0, rule=rule, band=band)
    fp = FieldPoint(
        rho=2.0, theta=0.4, phi=0.3, normal=np.array([0.36, -0.48, 0.8])
    )
    A = build_analysis_matrix(rule, band)
    elev = gauss_legendre_elevation(10)
    grid = azimuth_grid(10)
    dt, c, steps = 0.02, 1.0, 300
    ensemble = random_ensemble(3, seed=42, ramp=0.4)
    record = surface_data(ensemble, frame, steps, dt, c)
    op = assemble(fp, frame, elev, grid, A, dt, c, K=4)
    return SimpleNamespace(
        band=band,
        rule=rule,
        frame=frame,
        fp=fp,
        A=A,
        elev=elev,
        grid=grid,
        dt=dt,
        c=c,
        steps=steps,
        ensemble=ensemble,
        record=record,
        op=op,
    )
