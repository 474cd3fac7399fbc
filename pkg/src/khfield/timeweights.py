"""Lagrange interpolation/differentiation weights and advanced-time binning.

Weights are computed in barycentric form on the integer nodes 0..K.
Two conventions are provided:

* :func:`lagrange_weights` evaluates the interpolant (and its first and
  second derivatives) at x = delta.  Weight k multiplies sample k.
* :func:`scatter_weights` is the advanced-time form: a source sample at
  step i is scattered onto output steps i+n-h .. i+n+K+h, where the
  delay is R/c = (n + delta)*dt and h = K//2 + 1.  The value row holds
  the plain interpolation weights (offsets h..h+K); accumulated over i,
  the output series is then the delayed signal to O(dt^(K+1)).  The
  derivative rows apply a centered finite-difference stencil of
  half-width h to that accumulated series, which is where the extra h
  steps on each side come from.  Differentiating after accumulation
  keeps the full interpolation order: the deposit error at a fixed
  surface node is a smooth function of output time (one delta per
  node), so the difference stencil maps an O(dt^(K+1)) error to an
  O(dt^(K+1)) error in the derivative.  Differentiating the stencil
  weights instead would lose one order per derivative, because the
  error oscillates with delta across nodes.

Derivative weights are per unit step: divide by dt (and dt^2) to obtain
time derivatives on a grid of spacing dt.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .propagate import FieldSeries

__all__ = [
    "StencilWeights",
    "DelayBinning",
    "lagrange_weights",
    "scatter_weights",
    "bin_delay",
    "scatter_increment",
]

MAX_ORDER = 12  # high-order equispaced differentiation turns unstable


@dataclass(frozen=True)
class StencilWeights:
    """Interpolation and differentiation weights for one delay fraction.

    Attributes
    ----------
    order : int
        Interpolation order K.
    delta : float
        Fractional offset in [0, 1).
    w : ndarray
        Interpolation weights; sum to 1.
    wd : ndarray
        First-derivative weights per unit step; sum to 0.
    wdd : ndarray
        Second-derivative weights per unit step squared; sum to 0.
    lead : int
        Steps the weight window starts before the reference node.  Plain
        gather weights have lead 0 and K+1 entries; scatter weights have
        lead h = K//2 + 1 and K+1+2h entries, covering output steps
        i+n-lead .. i+n-lead+len(w)-1.
    """

    order: int
    delta: float
    w: np.ndarray
    wd: np.ndarray
    wdd: np.ndarray
    lead: int = 0


@dataclass(frozen=True)
class DelayBinning:
    """Integer/fractional split of a propagation delay: R/c = (n + delta)*dt."""

    R: float
    c: float
    dt: float
    n: int
    delta: float


def _barycentric_weights(K: int) -> np.ndarray:
    # nodes 0..K: w_j = 1/prod_{k != j}(j - k)
    nodes = np.arange(K + 1, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / diff.prod(axis=1)


def _differentiation_matrix(K: int) -> np.ndarray:
    # D[i, j] = l_j'(x_i) on nodes 0..K; rows sum to zero
    nodes = np.arange(K + 1, dtype=float)
    bw = _barycentric_weights(K)
    dx = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (bw[None, :] / bw[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _cardinal_values(K: int, x: float) -> np.ndarray:
    """l_j(x) for the Lagrange basis on nodes 0..K, barycentric form."""
    nodes = np.arange(K + 1, dtype=float)
    dist = x - nodes
    # subnormal distances overflow the barycentric division; snap to the node
    exact = np.nonzero(np.abs(dist) < np.finfo(float).tiny)[0]
    if exact.size:
        vals = np.zeros(K + 1)
        vals[exact[0]] = 1.0
        return vals
    terms = _barycentric_weights(K) / dist
    return terms / terms.sum()


def _weight_rows(K: int, x: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, derivative and second-derivative weight rows at point x.

    The interpolant of f is p(x) = sum_j l_j(x) f_j; since p' has degree
    <= K it equals its own interpolant, so p'(x) = (l(x) @ D) f and
    p''(x) = (l(x) @ D @ D) f with D the differentiation matrix.
    """
    vals = _cardinal_values(K, x)
    if K == 0:
        return vals, np.zeros(1), np.zeros(1)
    D = _differentiation_matrix(K)
    first = vals @ D
    second = first @ D
    return vals, first, second


def lagrange_weights(K: int, delta: float) -> StencilWeights:
    """Weights interpolating value and derivatives at x = delta on nodes 0..K.

    Parameters
    ----------
    K : int
        Stencil order, 1 <= K <= 12.  Orders above 8 are permitted but
        equispaced differentiation may amplify rounding (Runge-type
        instability).
    delta : float
        Evaluation offset in [0, 1).

    Returns
    -------
    StencilWeights
        Exact for polynomials up to degree K; derivative weights are per
        unit step.
    """
    if K < 1 or K > MAX_ORDER:
        raise ValueError(f"stencil order {K} outside [1, {MAX_ORDER}]")
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"fractional offset {delta} outside [0, 1)")
    w, wd, wdd = _weight_rows(K, delta)
    return StencilWeights(order=K, delta=delta, w=w, wd=wd, wdd=wdd)


def scatter_weights(K: int, delta: float) -> StencilWeights:
    """Advanced-time scatter weights for a delay fraction delta.

    Weight u multiplies the contribution of a source sample at step i to
    output step i+n-h+u, u = 0..K+2h with h = K//2 + 1.  The value row
    is the plain interpolation row placed at offsets h..h+K; the
    derivative rows are its correlation with centered finite-difference
    stencils on 2h+1 points (exact through degree 2h >= K+2, so the
    composite keeps the interpolation order).  Accumulated over i, the
    rows produce the delayed signal q(t - R/c) and its first and second
    time derivatives (per unit step and step squared).

    With f(u) = signal sampled backward along the window, the rows
    satisfy sum w[u] f(u) = f(h+delta), sum wd[u] f(u) = -f'(h+delta)
    and sum wdd[u] f(u) = f''(h+delta) for polynomial f of degree <= K;
    the sign flip on wd cancels against the time reversal of the
    gathered samples, so the accumulated series is +d/dt of the output.
    """
    if K < 1 or K > MAX_ORDER:
        raise ValueError(f"stencil order {K} outside [1, {MAX_ORDER}]")
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"fractional offset {delta} outside [0, 1)")
    h = K // 2 + 1
    vals = _cardinal_values(K, delta)
    w = np.zeros(K + 1 + 2 * h)
    w[h : h + K + 1] = vals
    _, fd1, fd2 = _weight_rows(2 * h, float(h))
    wd = np.correlate(w, fd1, mode="same")
    wdd = np.correlate(w, fd2, mode="same")
    return StencilWeights(order=K, delta=delta, w=w, wd=wd, wdd=wdd, lead=h)


def bin_delay(R: float, c: float, dt: float) -> DelayBinning:
    """Split a propagation delay into whole steps and a fraction.

    n = floor(R/(c*dt)) and delta = R/(c*dt) - n, so that
    R/c = (n + delta)*dt with 0 <= delta < 1.
    """
    if c <= 0.0:
        raise ValueError("sound speed must be positive")
    if dt <= 0.0:
        raise ValueError("time step must be positive")
    if R < 0.0:
        raise ValueError("distance must be nonnegative")
    steps = R / (c * dt)
    n = int(np.floor(steps))
    delta = steps - n
    if delta >= 1.0:  # guard against floor/rounding disagreement
        n += 1
        delta = 0.0
    return DelayBinning(R=R, c=c, dt=dt, n=n, delta=delta)


def scatter_increment(
    series: "FieldSeries",
    i: int,
    binning: DelayBinning,
    weights: StencilWeights,
    amplitude: float,
) -> "FieldSeries":
    """Scatter one monopole source sample into a field series.

    Adds w_u * amplitude / (4*pi*R) at absolute steps i + n - lead + u
    for u = 0..len(w)-1, where amplitude is the source strength
    q(tau_i).  The series must already be sized to hold the window.
    """
    if binning.R <= 0.0:
        raise ValueError("scatter requires a positive source distance")
    first = i + binning.n - weights.lead - series.start
    last = first + weights.w.size - 1
    if first < 0 or last >= series.p.size:
        raise ValueError(
            f"scatter window [{first}, {last}] outside series of length "
            f"{series.p.size}"
        )
    series.p[first : last + 1] += (
        weights.w * amplitude / (4.0 * np.pi * binning.R)
    )
    return series
