"""Quadrature rules used to discretize the sphere and the surface integral.

Three families are provided:

* Lebedev rules on the full sphere, used as interpolation/sampling nodes
  for the surface data.  Node coordinates and weights come from embedded
  tables of the standard octahedral constructions; weights are rescaled
  to sum to the full solid angle 4*pi.
* Gauss-Legendre rules in the elevation angle psi, mapped from [-1, 1]
  to [0, pi], used for the elevation part of the surface integral.
* Uniform (trapezoidal) grids in the azimuth gamma.
"""

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from ._lebedev_data import _GENERATORS, _ORDER

__all__ = [
    "LebedevRule",
    "ElevationRule",
    "AzimuthGrid",
    "lebedev_sizes",
    "lebedev_rule",
    "rule_for_band",
    "gauss_legendre_elevation",
    "azimuth_grid",
]


@dataclass(frozen=True)
class LebedevRule:
    """Lebedev quadrature rule on the unit sphere.

    Attributes
    ----------
    order : int
        Degree of polynomial exactness N.
    theta : ndarray
        Node colatitudes in [0, pi].
    phi : ndarray
        Node azimuths in [0, 2*pi).
    weights : ndarray
        Solid-angle weights, summing to 4*pi.
    """

    order: int
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    @property
    def node_count(self) -> int:
        return self.theta.size

    def cartesian(self) -> np.ndarray:
        """Unit vectors of the nodes, shape (node_count, 3)."""
        st = np.sin(self.theta)
        return np.column_stack(
            (st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta))
        )


@dataclass(frozen=True)
class ElevationRule:
    """Gauss-Legendre rule mapped to the elevation interval [0, pi].

    Attributes
    ----------
    nodes : ndarray
        Elevation angles psi_i in (0, pi).
    weights : ndarray
        Quadrature weights; sum to pi.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def length(self) -> int:
        return self.nodes.size


@dataclass(frozen=True)
class AzimuthGrid:
    """Uniform azimuthal grid gamma_j = 2*pi*j/count, j = 0..count-1."""

    count: int
    nodes: np.ndarray


def _orbit(code: int, a: float, b: float) -> np.ndarray:
    """Expand one octahedral symmetry orbit into cartesian points."""
    if code == 0:
        eye = np.eye(3)
        return np.vstack((eye, -eye))
    if code == 1:
        a = 1.0 / np.sqrt(2.0)
        rows = []
        for zero_axis in range(3):
            i, j = (ax for ax in range(3) if ax != zero_axis)
            for si, sj in product((1.0, -1.0), repeat=2):
                p = np.zeros(3)
                p[i], p[j] = si * a, sj * a
                rows.append(p)
        return np.array(rows)
    if code == 2:
        a = 1.0 / np.sqrt(3.0)
        return a * np.array(list(product((1.0, -1.0), repeat=3)))
    if code == 3:
        # (a, a, b) with b on each axis in turn
        b = np.sqrt(max(0.0, 1.0 - 2.0 * a * a))
        rows = []
        for b_axis in range(3):
            i, j = (ax for ax in range(3) if ax != b_axis)
            for si, sj, sb in product((1.0, -1.0), repeat=3):
                p = np.empty(3)
                p[i], p[j], p[b_axis] = si * a, sj * a, sb * b
                rows.append(p)
        return np.array(rows)
    if code == 4:
        # (a, b, 0): both orderings of (a, b) on the two nonzero axes
        b = np.sqrt(max(0.0, 1.0 - a * a))
        rows = []
        for zero_axis in range(3):
            i, j = (ax for ax in range(3) if ax != zero_axis)
            for u, v in ((a, b), (b, a)):
                for si, sj in product((1.0, -1.0), repeat=2):
                    p = np.zeros(3)
                    p[i], p[j] = si * u, sj * v
                    rows.append(p)
        return np.array(rows)
    if code == 5:
        # generic (a, b, c): all permutations and sign patterns
        c = np.sqrt(max(0.0, 1.0 - a * a - b * b))
        rows = []
        for perm in permutations((a, b, c)):
            for s in product((1.0, -1.0), repeat=3):
                rows.append(np.array(s) * perm)
        return np.array(rows)
    raise ValueError(f"unknown orbit class code {code}")


def lebedev_sizes() -> tuple[int, ...]:
    """Node counts of the embedded Lebedev rules, ascending."""
    return tuple(sorted(_GENERATORS))


def lebedev_rule(node_count: int) -> LebedevRule:
    """Return the embedded Lebedev rule with the given number of nodes.

    Parameters
    ----------
    node_count : int
        One of the tabulated sizes, see :func:`lebedev_sizes`.

    Returns
    -------
    LebedevRule
        Rule with weights rescaled so that they sum to 4*pi.
    """
    if node_count not in _GENERATORS:
        avail = ", ".join(str(s) for s in lebedev_sizes())
        raise ValueError(
            f"no Lebedev rule of size {node_count}; available sizes: {avail}"
        )
    points = []
    weights = []
    for code, a, b, v in _GENERATORS[node_count]:
        orbit = _orbit(code, a, b)
        points.append(orbit)
        weights.append(np.full(orbit.shape[0], v))
    xyz = np.vstack(points)
    w = np.concatenate(weights)
    # tabulated weights sum to 1 over the sphere
    w = w * (4.0 * np.pi / w.sum())
    theta = np.arccos(np.clip(xyz[:, 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(xyz[:, 1], xyz[:, 0]), 2.0 * np.pi)
    return LebedevRule(order=_ORDER[node_count], theta=theta, phi=phi, weights=w)


def rule_for_band(n_max: int) -> LebedevRule:
    """Smallest embedded rule exact for products of two degree-n_max harmonics.

    Analysis integrals contain products of two spherical harmonics of
    degree up to n_max, so the rule order must be at least 2*n_max.
    """
    if n_max < 0:
        raise ValueError("band limit must be nonnegative")
    for size in lebedev_sizes():
        if _ORDER[size] >= 2 * n_max:
            return lebedev_rule(size)
    raise ValueError(
        f"no embedded rule of order >= {2 * n_max}; largest is "
        f"{_ORDER[lebedev_sizes()[-1]]}"
    )


def gauss_legendre_elevation(length: int) -> ElevationRule:
    """Gauss-Legendre rule affinely mapped from [-1, 1] to [0, pi].

    Parameters
    ----------
    length : int
        Number of nodes, at least 1.
    """
    if length < 1:
        raise ValueError("elevation rule length must be at least 1")
    x, w = np.polynomial.legendre.leggauss(length)
    return ElevationRule(nodes=0.5 * np.pi * (x + 1.0), weights=0.5 * np.pi * w)


def azimuth_grid(count: int) -> AzimuthGrid:
    """Uniform azimuthal grid of the given size starting at gamma = 0."""
    if count < 1:
        raise ValueError("azimuth grid needs at least one node")
    return AzimuthGrid(count=count, nodes=2.0 * np.pi * np.arange(count) / count)
