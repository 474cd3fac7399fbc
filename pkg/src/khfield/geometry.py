"""Field-point geometry: rotated frame, distance law and direction factors.

The surface integral is evaluated in a rotated coordinate system whose
polar axis passes through the field point, so that every surface point
at elevation psi lies at the same distance

    R(psi)^2 = rho^2 + a^2 - 2 rho a cos(psi)

from the field point.  The rotation is R_y(-theta_x) R_z(-phi_x), which
maps the field-point direction onto +z; its transpose maps rotated-frame
surface coordinates (psi, gamma) back to original-frame (theta, phi).

The kernel of the integral involves only four direction factors:

    f0 = (rho cos psi - a)/R            (r_hat . surface normal)
    f1 = n_x a sin psi / R
    f2 = n_y a sin psi / R
    f3 = n_z (a cos psi - rho)/R

with (n_x, n_y, n_z) the field-point normal expressed in the rotated
frame; -(f1 cos gamma + f2 sin gamma + f3) is r_hat . n_hat.
"""

from dataclasses import dataclass

import numpy as np

from .harmonics import BandLimit
from .quadrature import LebedevRule

__all__ = [
    "FieldPoint",
    "RotatedFrame",
    "GeometricFactors",
    "SurfaceFrame",
    "rotated_frame",
    "surface_point_in_original",
    "geometric_factors",
]


@dataclass(frozen=True)
class FieldPoint:
    """Evaluation point in original-frame spherical coordinates.

    Attributes
    ----------
    rho : float
        Radius; must exceed the surface radius for exterior evaluation.
    theta, phi : float
        Colatitude and azimuth of the point.
    normal : ndarray or None
        Unit vector along which the normal derivative of the field is
        requested, in original-frame cartesian components.
    """

    rho: float
    theta: float
    phi: float
    normal: np.ndarray | None = None

    def __post_init__(self):
        if self.normal is not None:
            n = np.asarray(self.normal, dtype=float)
            if n.shape != (3,):
                raise ValueError("normal must be a 3-vector")
            norm = np.linalg.norm(n)
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"normal must be a unit vector, |n| = {norm}")
            object.__setattr__(self, "normal", n)

    def cartesian(self) -> np.ndarray:
        st = np.sin(self.theta)
        return self.rho * np.array(
            (st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta))
        )


@dataclass(frozen=True)
class RotatedFrame:
    """Orthogonal rotation taking the field-point direction to +z."""

    matrix: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        return self.matrix.T

    def to_rotated(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def to_original(self, v: np.ndarray) -> np.ndarray:
        return self.matrix.T @ v


@dataclass(frozen=True)
class GeometricFactors:
    """Distance and direction factors at one elevation psi."""

    psi: float
    R: float
    f0: float
    f1: float | None
    f2: float | None
    f3: float | None


@dataclass(frozen=True)
class SurfaceFrame:
    """Discretized source surface: radius, sampling rule and band limit."""

    radius: float
    rule: LebedevRule
    band: BandLimit

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("surface radius must be positive")

    @property
    def node_count(self) -> int:
        return self.rule.node_count

    def nodes_cartesian(self) -> np.ndarray:
        """Surface node positions, shape (node_count, 3)."""
        return self.radius * self.rule.cartesian()


def _rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array(((c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0)))


def _rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array(((c, 0.0, s), (0.0, 1.0, 0.0), (-s, 0.0, c)))


def rotated_frame(fp: FieldPoint) -> RotatedFrame:
    """Rotation R_y(-theta) R_z(-phi) aligning the field point with +z."""
    if fp.rho <= 0.0:
        raise ValueError("field point at the origin has no direction")
    return RotatedFrame(matrix=_rot_y(-fp.theta) @ _rot_z(-fp.phi))


def surface_point_in_original(
    frame: RotatedFrame, psi: float, gamma: float, a: float = 1.0
) -> tuple[float, float]:
    """Original-frame (theta, phi) of the surface point at (psi, gamma).

    The surface radius does not affect the angles; it is accepted so the
    call site reads like the surface parametrization.
    """
    del a
    sp = np.sin(psi)
    v = np.array((sp * np.cos(gamma), sp * np.sin(gamma), np.cos(psi)))
    u = frame.to_original(v)
    theta = np.arccos(np.clip(u[2], -1.0, 1.0))
    phi = float(np.mod(np.arctan2(u[1], u[0]), 2.0 * np.pi))
    return float(theta), phi


def _surface_angles(frame: RotatedFrame, psi: np.ndarray, gamma: np.ndarray):
    """Vectorized surface_point_in_original over psi x gamma grids.

    Returns theta, phi arrays of shape (psi.size, gamma.size).
    """
    psi = np.atleast_1d(psi)
    gamma = np.atleast_1d(gamma)
    sp, cp = np.sin(psi)[:, None], np.cos(psi)[:, None]
    cg, sg = np.cos(gamma)[None, :], np.sin(gamma)[None, :]
    v = np.stack(
        (sp * cg, sp * sg, np.broadcast_to(cp, (psi.size, gamma.size))), axis=0
    )
    u = np.einsum("ab,bij->aij", frame.inverse, v)
    theta = np.arccos(np.clip(u[2], -1.0, 1.0))
    phi = np.mod(np.arctan2(u[1], u[0]), 2.0 * np.pi)
    return theta, phi


def _distance(rho: float, a: float, psi: np.ndarray) -> np.ndarray:
    return np.sqrt(rho * rho + a * a - 2.0 * rho * a * np.cos(psi))


def _factor_arrays(rho: float, a: float, psi: np.ndarray, n_rot: np.ndarray | None):
    """Vectorized (R, f0, f1, f2, f3) over an array of elevations."""
    R = _distance(rho, a, psi)
    f0 = (rho * np.cos(psi) - a) / R
    if n_rot is None:
        return R, f0, None, None, None
    f1 = n_rot[0] * a * np.sin(psi) / R
    f2 = n_rot[1] * a * np.sin(psi) / R
    f3 = n_rot[2] * (a * np.cos(psi) - rho) / R
    return R, f0, f1, f2, f3


def geometric_factors(
    fp: FieldPoint, frame: RotatedFrame, psi: float, a: float
) -> GeometricFactors:
    """Distance R(psi) and the kernel direction factors f0..f3.

    f1..f3 are computed when the field point carries a normal, with the
    normal first rotated into the field-point-aligned frame; otherwise
    they are None.
    """
    R = float(_distance(fp.rho, a, np.asarray(psi)))
    if R == 0.0:
        raise ValueError("field point on the surface: R = 0 at psi = 0")
    n_rot = frame.to_rotated(fp.normal) if fp.normal is not None else None
    R_, f0, f1, f2, f3 = _factor_arrays(fp.rho, a, np.asarray(psi, dtype=float), n_rot)
    return GeometricFactors(
        psi=float(psi),
        R=float(R_),
        f0=float(f0),
        f1=None if f1 is None else float(f1),
        f2=None if f2 is None else float(f2),
        f3=None if f3 is None else float(f3),
    )
