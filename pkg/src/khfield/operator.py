"""Assembly of the per-field-point propagation matrices.

The surface integral for the field at x splits into an elevation
integral over psi, an azimuthal integral over gamma, and an
advanced-time scatter in the delay R(psi)/c.  Each stage has a matrix
realization:

* azimuthal integration: vectors q, q_C, q_S of length N_Q whose dot
  products with the nodal samples give the ring integrals of the
  band-limited surface interpolant against 1, cos(gamma), sin(gamma);
* advanced time: kernel matrices W, V (pressure) and the barred
  matrices (normal derivative), each N_W x N_psi, holding the scatter
  stencil of each elevation ring scaled by the integral kernels;
* the product, weighted by the elevation rule and the a^2 sin(psi)/4pi
  measure, gives the N_W x N_Q matrices S, S_N, S_bar, S_bar_N that
  map one surface snapshot to increments of the output series.

Time derivatives of the kernels are realized through the derivative
scatter stencils, so the surface record itself is the only input; no
time derivatives of the data are ever stored.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .geometry import (
    FieldPoint,
    RotatedFrame,
    SurfaceFrame,
    _factor_arrays,
    _surface_angles,
    rotated_frame,
)
from .harmonics import AnalysisMatrix, _eval_matrix
from .quadrature import AzimuthGrid, ElevationRule
from .timeweights import bin_delay, scatter_weights

__all__ = [
    "AzimuthalVectors",
    "KernelMatrices",
    "PropagationOperator",
    "azimuthal_vectors",
    "kernel_matrices",
    "assemble",
    "operator_bytes",
    "operator_from_bytes",
    "save_operator",
    "load_operator",
]


@dataclass(frozen=True)
class AzimuthalVectors:
    """Ring-integration vectors at one elevation psi."""

    psi: float
    q: np.ndarray
    q_c: np.ndarray
    q_s: np.ndarray


@dataclass(frozen=True)
class KernelMatrices:
    """Advanced-time scatter kernels, one column per elevation node.

    Column i is nonzero only in the K+1+2h rows (h = K//2 + 1) of the
    scatter stencil around the whole-step delay of ring i; zero padding
    aligns rings of differing delay.  The barred matrices are None when
    no field-point normal was supplied.
    """

    base_delay: int
    window: int
    W: np.ndarray
    V: np.ndarray
    Wb0: np.ndarray | None
    WbC: np.ndarray | None
    WbS: np.ndarray | None
    Vb0: np.ndarray | None
    VbC: np.ndarray | None
    VbS: np.ndarray | None


@dataclass(frozen=True)
class PropagationOperator:
    """Matrices mapping one surface snapshot to output-series increments.

    Snapshot i contributes S sigma_i + S_N sigma_i^(n) to output steps
    i + base_delay .. i + base_delay + window - 1; the barred pair feeds
    the normal-derivative series the same way.
    """

    S: np.ndarray
    S_N: np.ndarray
    S_bar: np.ndarray | None
    S_bar_N: np.ndarray | None
    base_delay: int
    window: int
    dt: float
    c: float
    K: int
    a: float
    field_point: FieldPoint

    @property
    def node_count(self) -> int:
        return self.S.shape[1]

    @property
    def has_normal(self) -> bool:
        return self.S_bar is not None


def _window_bounds(rho: float, a: float, dt: float, c: float, K: int):
    """Base delay and row count from the geometric distance extremes.

    Using rho -/+ a (rather than the delays of the quadrature nodes)
    makes the output shape independent of the elevation rule length.
    The scatter stencil extends h = K//2 + 1 steps past the plain K+1
    deposit window on each side (centered time differentiation), so the
    base delay may come out negative when the field point is within
    h*c*dt of the surface; the leading output samples are then simply
    pre-arrival zeros.
    """
    h = K // 2 + 1
    n_lo = int(np.floor((rho - a) / (c * dt)))
    n_hi = int(np.floor((rho + a) / (c * dt)))
    return n_lo - h, n_hi - n_lo + K + 1 + 2 * h


def _azimuthal_batch(
    frame: RotatedFrame,
    psis: np.ndarray,
    grid: AzimuthGrid,
    A: AnalysisMatrix,
):
    """Ring vectors for every elevation at once.

    Returns Q0, QC, QS of shape (N_Q, len(psis)).  The gamma sums are
    accumulated in coefficient space first, so the expensive conversion
    to nodal values is a single matrix product.
    """
    n_min = 2 * A.band.n_max + 1
    if grid.count < n_min:
        raise ValueError(
            f"azimuth grid of {grid.count} nodes aliases the band limit; "
            f"need at least {n_min}"
        )
    psis = np.atleast_1d(np.asarray(psis, dtype=float))
    theta, phi = _surface_angles(frame, psis, grid.nodes)
    basis = _eval_matrix(A.band, theta, phi)  # (n_coef, n_psi * n_gamma)
    basis = basis.reshape(-1, psis.size, grid.count)
    factors = np.stack(
        (np.ones(grid.count), np.cos(grid.nodes), np.sin(grid.nodes))
    )
    # coefficient-space gamma sums: (n_coef, n_psi, 3) -> (n_coef, 3*n_psi)
    sums = np.einsum("cpg,fg->cpf", basis, factors)
    stacked = sums.reshape(basis.shape[0], -1)
    nodal = A.entries.T @ stacked * (2.0 * np.pi / grid.count)
    nodal = nodal.reshape(A.node_count, psis.size, 3)
    return nodal[:, :, 0], nodal[:, :, 1], nodal[:, :, 2]


def azimuthal_vectors(
    frame: RotatedFrame, psi: float, grid: AzimuthGrid, A: AnalysisMatrix
) -> AzimuthalVectors:
    """Ring-integration vectors at elevation psi.

    Dotting q (q_C, q_S) with nodal surface samples approximates the
    integral of the band-limited interpolant against 1 (cos gamma,
    sin gamma) over the ring at psi in the rotated frame.
    """
    q0, qc, qs = _azimuthal_batch(frame, np.array([psi]), grid, A)
    return AzimuthalVectors(psi=float(psi), q=q0[:, 0], q_c=qc[:, 0], q_s=qs[:, 0])


def kernel_matrices(
    fp: FieldPoint,
    a: float,
    elev: ElevationRule,
    dt: float,
    c: float,
    K: int,
) -> KernelMatrices:
    """Advanced-time kernel matrices for all elevation nodes.

    Column i scatters ring i of the surface integrand onto the output
    grid: W and V carry the pressure kernels f0 (d/dt /Rc + 1/R^2) and
    -1/R; the barred matrices carry the normal-derivative kernels (the
    second-derivative, first-derivative and undifferentiated radial
    orders).  Derivative stencils are pre-divided by dt, dt^2.
    """
    if fp.rho <= a:
        raise ValueError(
            f"field point radius {fp.rho} inside surface radius {a}: "
            "interior problem not implemented"
        )
    want_normal = fp.normal is not None
    if want_normal and K < 2:
        raise ValueError("normal-derivative kernels need stencil order K >= 2")
    frame = rotated_frame(fp)
    n_rot = frame.to_rotated(fp.normal) if want_normal else None
    psis = elev.nodes
    R, f0, f1, f2, f3 = _factor_arrays(fp.rho, a, psis, n_rot)
    n1, nw = _window_bounds(fp.rho, a, dt, c, K)
    npsi = psis.size
    W = np.zeros((nw, npsi))
    V = np.zeros((nw, npsi))
    if want_normal:
        Wb0, WbC, WbS = (np.zeros((nw, npsi)) for _ in range(3))
        Vb0, VbC, VbS = (np.zeros((nw, npsi)) for _ in range(3))
        nx, ny, nz = n_rot
        sinp, cosp = np.sin(psis), np.cos(psis)
    else:
        Wb0 = WbC = WbS = Vb0 = VbC = VbS = None
    for i in range(npsi):
        b = bin_delay(float(R[i]), c, dt)
        sw = scatter_weights(K, b.delta)
        w = sw.w
        wd = sw.wd / dt
        # n1 already includes the stencil lead, so this offset is >= 0
        start = b.n - sw.lead - n1
        rows = slice(start, start + w.size)
        Ri = R[i]
        W[rows, i] = f0[i] * (wd / (Ri * c) + w / Ri**2)
        V[rows, i] = -w / Ri
        if want_normal:
            wdd = sw.wdd / dt**2
            d1 = wd / (Ri**2 * c) + w / Ri**3
            Wb0[rows, i] = f0[i] * f3[i] * wdd / (Ri * c**2) + (
                nz * cosp[i] + 3.0 * f0[i] * f3[i]
            ) * d1
            WbC[rows, i] = f0[i] * f1[i] * wdd / (Ri * c**2) + (
                nx * sinp[i] + 3.0 * f0[i] * f1[i]
            ) * d1
            WbS[rows, i] = f0[i] * f2[i] * wdd / (Ri * c**2) + (
                ny * sinp[i] + 3.0 * f0[i] * f2[i]
            ) * d1
            d0 = wd / (Ri * c) + w / Ri**2
            Vb0[rows, i] = -f3[i] * d0
            VbC[rows, i] = -f1[i] * d0
            VbS[rows, i] = -f2[i] * d0
    return KernelMatrices(
        base_delay=n1, window=nw, W=W, V=V,
        Wb0=Wb0, WbC=WbC, WbS=WbS, Vb0=Vb0, VbC=VbC, VbS=VbS,
    )


def assemble(
    fp: FieldPoint,
    frame: SurfaceFrame,
    elev: ElevationRule,
    grid: AzimuthGrid,
    A: AnalysisMatrix,
    dt: float,
    c: float,
    K: int,
    ring_vectors=None,
) -> PropagationOperator:
    """Build the propagation operator for one field point.

    The elevation weights, the sin(psi) measure and the a^2/(4 pi)
    prefactor of the surface integral are all applied here, so the
    kernel matrices stay individually meaningful.

    Parameters
    ----------
    ring_vectors : optional
        Precomputed (Q0, QC, QS) from the azimuthal stage, each of
        shape (N_Q, len(elev)); they depend only on the field-point
        direction, the band limit and the rules, so sweeps over dt, K
        or radius can reuse them.
    """
    if A.node_count != frame.node_count:
        raise ValueError(
            f"analysis matrix built for {A.node_count} nodes, surface has "
            f"{frame.node_count}"
        )
    if A.band.n_max != frame.band.n_max:
        raise ValueError("analysis matrix and surface band limits differ")
    rot = rotated_frame(fp)
    if ring_vectors is None:
        ring_vectors = _azimuthal_batch(rot, elev.nodes, grid, A)
    Q0, QC, QS = ring_vectors
    km = kernel_matrices(fp, frame.radius, elev, dt, c, K)
    measure = (
        frame.radius**2 / (4.0 * np.pi) * elev.weights * np.sin(elev.nodes)
    )
    S = (km.W * measure) @ Q0.T
    S_N = (km.V * measure) @ Q0.T
    if km.Wb0 is not None:
        S_bar = (
            (km.Wb0 * measure) @ Q0.T
            + (km.WbC * measure) @ QC.T
            + (km.WbS * measure) @ QS.T
        )
        S_bar_N = (
            (km.Vb0 * measure) @ Q0.T
            + (km.VbC * measure) @ QC.T
            + (km.VbS * measure) @ QS.T
        )
    else:
        S_bar = S_bar_N = None
    return PropagationOperator(
        S=S, S_N=S_N, S_bar=S_bar, S_bar_N=S_bar_N,
        base_delay=km.base_delay, window=km.window,
        dt=dt, c=c, K=K, a=frame.radius, field_point=fp,
    )


_MAGIC = b"KHOP"
_VERSION = 1


def operator_bytes(op: PropagationOperator) -> bytes:
    """Flat binary image of an operator.

    Layout (little-endian): magic "KHOP", uint32 version, then uint64
    window and node_count, int64 base_delay (negative when the field
    point sits within the stencil lead of the surface), uint64 K and
    has_normal flag; float64 dt, c, a, rho, theta, phi, normal
    components (NaN when absent); then the matrices S, S_N and, when
    present, S_bar, S_bar_N, row-major float64.
    """
    fp = op.field_point
    normal = fp.normal if fp.normal is not None else np.full(3, np.nan)
    parts = [
        _MAGIC,
        struct.pack(
            "<IQQqQQ",
            _VERSION,
            op.window,
            op.node_count,
            op.base_delay,
            op.K,
            1 if op.has_normal else 0,
        ),
        struct.pack("<9d", op.dt, op.c, op.a, fp.rho, fp.theta, fp.phi, *normal),
    ]
    for mat in (op.S, op.S_N, op.S_bar, op.S_bar_N):
        if mat is not None:
            parts.append(np.ascontiguousarray(mat, dtype="<f8").tobytes())
    return b"".join(parts)


def operator_from_bytes(data: bytes, label: str = "operator data") -> PropagationOperator:
    """Rebuild an operator from its flat binary image."""
    if data[:4] != _MAGIC:
        raise ValueError(f"{label}: not an operator image (bad magic)")
    version, window, nq, base_delay, K, has_normal = struct.unpack_from(
        "<IQQqQQ", data, 4
    )
    if version != _VERSION:
        raise ValueError(f"{label}: unsupported operator format version {version}")
    off = 4 + struct.calcsize("<IQQqQQ")
    dt, c, a, rho, theta, phi, n0, n1_, n2 = struct.unpack_from("<9d", data, off)
    off += struct.calcsize("<9d")
    count = 2 + (2 if has_normal else 0)
    need = off + count * window * nq * 8
    if len(data) != need:
        raise ValueError(f"{label}: truncated ({len(data)} bytes, need {need})")
    mats = []
    for _ in range(count):
        mats.append(
            np.frombuffer(data, dtype="<f8", count=window * nq, offset=off)
            .reshape(window, nq)
            .copy()
        )
        off += window * nq * 8
    normal = None if np.isnan(n0) else np.array((n0, n1_, n2))
    fp = FieldPoint(rho=rho, theta=theta, phi=phi, normal=normal)
    Sb, SbN = (mats[2], mats[3]) if has_normal else (None, None)
    return PropagationOperator(
        S=mats[0], S_N=mats[1], S_bar=Sb, S_bar_N=SbN,
        base_delay=int(base_delay), window=int(window),
        dt=dt, c=c, K=int(K), a=a, field_point=fp,
    )


def save_operator(op: PropagationOperator, path) -> None:
    """Write an operator to a flat binary file (see operator_bytes)."""
    with open(path, "wb") as fh:
        fh.write(operator_bytes(op))


def load_operator(path) -> PropagationOperator:
    """Read an operator written by :func:`save_operator`."""
    with open(path, "rb") as fh:
        data = fh.read()
    return operator_from_bytes(data, label=str(path))
