"""Slow reference evaluation of the surface integral, for cross-checking.

This path shares the surface samples and the band-limited interpolant
with the operator path but none of its advanced-time machinery.  For
each requested output time it interpolates the ring integrals of the
surface record at the exact retarded times with a centered high-order
stencil and sums the elevation quadrature directly.  Agreement with the
operator path therefore isolates the scatter/kernel algebra.
"""

import numpy as np

from .geometry import FieldPoint, SurfaceFrame, _factor_arrays, rotated_frame
from .harmonics import build_analysis_matrix
from .operator import _azimuthal_batch
from .quadrature import azimuth_grid, gauss_legendre_elevation
from .timeweights import _cardinal_values, _differentiation_matrix

__all__ = ["reference_field"]


def _stencil_rows(K: int, x: float, D: np.ndarray):
    vals = _cardinal_values(K, x)
    first = vals @ D
    return vals, first, first @ D


def reference_field(
    fp: FieldPoint,
    frame: SurfaceFrame,
    sigma: np.ndarray,
    sigma_n: np.ndarray,
    dt: float,
    c: float,
    steps: np.ndarray,
    psi_count: int | None = None,
    gamma_count: int | None = None,
    stencil: int = 10,
):
    """Field (and normal derivative) at selected absolute output steps.

    Parameters
    ----------
    sigma, sigma_n : ndarray
        Surface record, shape (node_count, n_steps), sampled at i*dt.
    steps : ndarray of int
        Absolute output steps; times are steps*dt.  Each must leave the
        retarded times of all elevation rings inside the record.
    psi_count, gamma_count : int, optional
        Quadrature sizes; default to twice the operator-path defaults.
    stencil : int
        Order of the centered interpolation stencil for the ring records.

    Returns
    -------
    (p, pn) arrays over the requested steps; pn is None without a normal.
    """
    n_max = frame.band.n_max
    if psi_count is None:
        psi_count = 2 * (2 * n_max + 2)
    if gamma_count is None:
        gamma_count = 2 * (2 * n_max + 2)
    elev = gauss_legendre_elevation(psi_count)
    grid = azimuth_grid(gamma_count)
    A = build_analysis_matrix(frame.rule, frame.band, strict=False)
    rot = rotated_frame(fp)
    Q0, QC, QS = _azimuthal_batch(rot, elev.nodes, grid, A)

    # ring time series of the azimuthal integrals, shape (psi_count, n_t)
    P0, PC, PS = Q0.T @ sigma, QC.T @ sigma, QS.T @ sigma
    N0, NC, NS = Q0.T @ sigma_n, QC.T @ sigma_n, QS.T @ sigma_n

    want_normal = fp.normal is not None
    n_rot = rot.to_rotated(fp.normal) if want_normal else None
    a = frame.radius
    R, f0, f1, f2, f3 = _factor_arrays(fp.rho, a, elev.nodes, n_rot)
    measure = a**2 / (4.0 * np.pi) * elev.weights * np.sin(elev.nodes)
    if want_normal:
        nx, ny, nz = n_rot
        sinp, cosp = np.sin(elev.nodes), np.cos(elev.nodes)

    n_t = sigma.shape[1]
    if n_t <= stencil:
        raise ValueError("record shorter than the interpolation stencil")
    D = _differentiation_matrix(stencil)
    steps = np.atleast_1d(np.asarray(steps))
    p_out = np.empty(steps.size)
    pn_out = np.empty(steps.size) if want_normal else None
    for jt, s in enumerate(steps):
        t = s * dt
        p_acc = 0.0
        pn_acc = 0.0
        for i in range(elev.length):
            x = (t - R[i] / c) / dt  # fractional sample of the retarded time
            i0 = int(np.floor(x)) - stencil // 2
            i0 = min(max(i0, 0), n_t - 1 - stencil)
            if not 0.0 <= x - i0 <= stencil:
                raise ValueError(
                    f"retarded time {t - R[i] / c} outside the surface record"
                )
            w, wd, wdd = _stencil_rows(stencil, x - i0, D)
            wd = wd / dt
            window = slice(i0, i0 + stencil + 1)
            p0, p0d = w @ P0[i, window], wd @ P0[i, window]
            n0 = w @ N0[i, window]
            p_acc += measure[i] * (
                f0[i] * (p0d / (R[i] * c) + p0 / R[i] ** 2) - n0 / R[i]
            )
            if want_normal:
                wdd = wdd / dt**2
                pc, ps = w @ PC[i, window], w @ PS[i, window]
                pcd, psd = wd @ PC[i, window], wd @ PS[i, window]
                p0dd = wdd @ P0[i, window]
                pcdd, psdd = wdd @ PC[i, window], wdd @ PS[i, window]
                nc, ns = w @ NC[i, window], w @ NS[i, window]
                n0d = wd @ N0[i, window]
                ncd, nsd = wd @ NC[i, window], wd @ NS[i, window]
                proj_dd = f1[i] * pcdd + f2[i] * psdd + f3[i] * p0dd
                proj_d = f1[i] * pcd + f2[i] * psd + f3[i] * p0d
                proj = f1[i] * pc + f2[i] * ps + f3[i] * p0
                raw_d = nx * sinp[i] * pcd + ny * sinp[i] * psd + nz * cosp[i] * p0d
                raw = nx * sinp[i] * pc + ny * sinp[i] * ps + nz * cosp[i] * p0
                nproj_d = f1[i] * ncd + f2[i] * nsd + f3[i] * n0d
                nproj = f1[i] * nc + f2[i] * ns + f3[i] * n0
                pn_acc += measure[i] * (
                    f0[i] * proj_dd / (R[i] * c**2)
                    + (raw_d + 3.0 * f0[i] * proj_d) / (R[i] ** 2 * c)
                    + (raw + 3.0 * f0[i] * proj) / R[i] ** 3
                    - nproj_d / (R[i] * c)
                    - nproj / R[i] ** 2
                )
        p_out[jt] = p_acc
        if want_normal:
            pn_out[jt] = pn_acc
    return p_out, pn_out
