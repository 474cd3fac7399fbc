"""Real spherical harmonics: normalized Legendre functions, analysis, synthesis.

A function on the sphere is expanded as

    f(theta, phi) = sum_{n=0}^{N_S} sum_{m=0}^{n}
        Pbar_n^m(cos theta) (a_nm cos m*phi + b_nm sin m*phi),

where Pbar_n^m is the associated Legendre function normalized so that
its square integrates to 1 over [-1, 1] (no Condon-Shortley phase).
Coefficients are stored interleaved: with j = n(n+1)/2 + m, slot 2j
holds the cosine coefficient and slot 2j+1 the sine coefficient, giving
(N_S+1)(N_S+2) slots in total.  The sine slot at m = 0 is kept, and is
identically zero, so matrix shapes match the interleaved layout exactly.

Analysis is a single matrix A applied to nodal samples on a Lebedev
rule.  The quadrature weights carry the full solid-angle measure, so
the orthogonality normalization 1/(pi (1 + delta_m0)) is folded into A,
making analysis followed by synthesis the identity on band-limited
functions.
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import LebedevRule

__all__ = [
    "BandLimit",
    "AnalysisMatrix",
    "EvalVector",
    "legendre_normalized",
    "build_analysis_matrix",
    "eval_vector",
    "interpolation_weights",
]


@dataclass(frozen=True)
class BandLimit:
    """Maximum retained spherical-harmonic degree N_S."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("band limit must be nonnegative")

    @property
    def coefficient_count(self) -> int:
        return (self.n_max + 1) * (self.n_max + 2)


@dataclass(frozen=True)
class AnalysisMatrix:
    """Dense matrix mapping nodal samples to expansion coefficients.

    Attributes
    ----------
    band : BandLimit
    node_count : int
        Number of quadrature nodes N_Q (columns).
    entries : ndarray
        Shape (band.coefficient_count, node_count).
    """

    band: BandLimit
    node_count: int
    entries: np.ndarray


@dataclass(frozen=True)
class EvalVector:
    """Harmonic basis values at one direction, in coefficient-slot order."""

    band: BandLimit
    values: np.ndarray


def _pair_index(n: int, m: int) -> int:
    return n * (n + 1) // 2 + m


def _order_indices(n_max: int) -> np.ndarray:
    """Order m of each (n, m) pair in n(n+1)/2 + m enumeration."""
    return np.concatenate([np.arange(n + 1) for n in range(n_max + 1)])


def _legendre_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """Pbar_n^m(x) for all 0 <= m <= n <= n_max.

    Returns an array of shape ((n_max+1)(n_max+2)/2,) + x.shape with the
    (n, m) entry at row n(n+1)/2 + m.  Uses the fully normalized
    recurrences, stable to high degree: the diagonal seed

        Pbar_m^m = sqrt((2m+1)/(2m)) * sin(theta) * Pbar_{m-1}^{m-1}

    followed by a three-term recurrence upward in n, vectorized over m.
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    s = np.sqrt(np.maximum(0.0, 1.0 - flat * flat))
    out = np.empty(((n_max + 1) * (n_max + 2) // 2, flat.size))
    out[0] = np.sqrt(0.5)
    for m in range(1, n_max + 1):
        out[_pair_index(m, m)] = (
            np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * out[_pair_index(m - 1, m - 1)]
        )
    for m in range(n_max):
        out[_pair_index(m + 1, m)] = (
            np.sqrt(2.0 * m + 3.0) * flat * out[_pair_index(m, m)]
        )
    for n in range(2, n_max + 1):
        m = np.arange(n - 1, dtype=float)
        anm = np.sqrt((2.0 * n + 1.0) * (2.0 * n - 1.0) / ((n - m) * (n + m)))
        bnm = np.sqrt(
            (2.0 * n + 1.0) * (n - 1.0 - m) * (n - 1.0 + m)
            / ((2.0 * n - 3.0) * (n - m) * (n + m))
        )
        rows = n * (n + 1) // 2 + np.arange(n - 1)
        out[rows] = (
            anm[:, None] * flat[None, :] * out[rows - n]
            - bnm[:, None] * out[rows - 2 * n + 1]
        )
    return out.reshape((out.shape[0],) + x.shape)


def legendre_normalized(n: int, m: int, x: float) -> float:
    """Normalized associated Legendre function Pbar_n^m(x).

    Normalization is [(2n+1)/2 * (n-m)!/(n+m)!]^(1/2) P_n^m(x) with no
    Condon-Shortley phase, so that the square of Pbar_n^m integrates to
    1 over [-1, 1].

    Parameters
    ----------
    n, m : int
        Degree and order, 0 <= m <= n.
    x : float
        Argument, |x| <= 1.
    """
    if m < 0 or m > n:
        raise ValueError(f"order m={m} outside [0, n={n}]")
    if abs(x) > 1.0:
        raise ValueError(f"argument {x} outside [-1, 1]")
    # recurrence at fixed m only; no table for other orders needed
    xa = np.asarray(float(x))
    s = np.sqrt(max(0.0, 1.0 - x * x))
    pmm = np.sqrt(0.5)
    for mm in range(1, m + 1):
        pmm = np.sqrt((2.0 * mm + 1.0) / (2.0 * mm)) * s * pmm
    if n == m:
        return float(pmm)
    pnm = np.sqrt(2.0 * m + 3.0) * xa * pmm
    if n == m + 1:
        return float(pnm)
    for nn in range(m + 2, n + 1):
        anm = np.sqrt((2.0 * nn + 1.0) * (2.0 * nn - 1.0) / ((nn - m) * (nn + m)))
        bnm = np.sqrt(
            (2.0 * nn + 1.0) * (nn - 1.0 - m) * (nn - 1.0 + m)
            / ((2.0 * nn - 3.0) * (nn - m) * (nn + m))
        )
        pnm, pmm = anm * xa * pnm - bnm * pmm, pnm
    return float(pnm)


def _eval_matrix(band: BandLimit, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Basis values at many directions, shape (coefficient_count, n_dirs)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float)).reshape(-1)
    phi = np.atleast_1d(np.asarray(phi, dtype=float)).reshape(-1)
    nmax = band.n_max
    leg = _legendre_table(nmax, np.cos(theta))
    mphi = np.arange(nmax + 1)[:, None] * phi[None, :]
    m_of = _order_indices(nmax)
    out = np.empty((band.coefficient_count, theta.size))
    out[0::2] = leg * np.cos(mphi)[m_of]
    out[1::2] = leg * np.sin(mphi)[m_of]  # m = 0 rows are exactly zero
    return out


def build_analysis_matrix(
    rule: LebedevRule, band: BandLimit, strict: bool = True
) -> AnalysisMatrix:
    """Matrix evaluating expansion coefficients from nodal samples.

    The row for coefficient (n, m, cos) at column i is

        w_i Pbar_n^m(cos theta_i) cos(m phi_i) / (pi (1 + delta_m0)),

    and the sine rows carry 1/pi.  With quadrature weights summing to
    4*pi this makes analysis of a band-limited function return its
    exact coefficients, so analysis followed by synthesis is the
    identity.

    Parameters
    ----------
    rule : LebedevRule
    band : BandLimit
    strict : bool
        When True (default), require rule.order >= 2*band.n_max, the
        condition for the analysis integrals to be quadrature-exact.
        Pass False to build an approximate (aliased) analysis matrix
        from a coarser rule, as the sweep experiments do.
    """
    if strict and rule.order < 2 * band.n_max:
        raise ValueError(
            f"rule order {rule.order} insufficient for band limit "
            f"{band.n_max}; need order >= {2 * band.n_max}"
        )
    basis = _eval_matrix(band, rule.theta, rule.phi)
    entries = basis * rule.weights
    m_of = _order_indices(band.n_max)
    entries[0::2] /= np.pi * np.where(m_of == 0, 2.0, 1.0)[:, None]
    entries[1::2] /= np.pi
    return AnalysisMatrix(band=band, node_count=rule.node_count, entries=entries)


def eval_vector(band: BandLimit, theta: float, phi: float) -> EvalVector:
    """Harmonic basis values at (theta, phi) in coefficient-slot order.

    The dot product of the result with a coefficient vector evaluates
    the band-limited expansion at that direction.
    """
    return EvalVector(band=band, values=_eval_matrix(band, theta, phi)[:, 0])


def interpolation_weights(A: AnalysisMatrix, theta: float, phi: float) -> np.ndarray:
    """Nodal-value weights interpolating to an arbitrary direction.

    Returns eval_vector(theta, phi)^T A, a vector of length N_Q whose dot
    product with nodal samples evaluates the band-limited interpolant at
    (theta, phi).
    """
    b = eval_vector(A.band, theta, phi)
    return b.values @ A.entries
