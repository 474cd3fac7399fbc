"""Analytic point-source fields: ground truth and surface-data generation.

A monopole of strength q at position y radiates

    p(x, t) = q(t - r/c) / (4 pi r),        r = |x - y|,

and its gradient along a unit vector nhat is

    dp/dn = (nhat . rhat) * (-qdot(t - r/c)/(4 pi r c) - q(t - r/c)/(4 pi r^2)),

with rhat = (x - y)/r.  These closed forms provide exact surface data on
the sphere and exact reference fields for error measurement.

Two source signals are supported: the gaussian-modulated cosine used in
the single-source convergence studies and a pure cosine with a smooth
start-up ramp for randomized multi-source runs (the raw cosine is
always on; the ramp avoids a start-of-record discontinuity and is
applied identically wherever the signal is evaluated, so comparisons
between evaluation paths are unaffected).
"""

from dataclasses import dataclass

import numpy as np

from .geometry import SurfaceFrame

__all__ = [
    "GaussianCosine",
    "RampedCosine",
    "PointSource",
    "SourceEnsemble",
    "direct_field",
    "direct_series",
    "surface_data",
    "random_ensemble",
]

RNG_ALGORITHM = "numpy-PCG64"  # recorded in reports for replay


@dataclass(frozen=True)
class GaussianCosine:
    """Signal q(tau) = exp(-alpha (tau - t0)^2) cos(Omega tau)."""

    alpha: float
    t0: float
    omega: float

    def q(self, tau):
        tau = np.asarray(tau, dtype=float)
        u = tau - self.t0
        return np.exp(-self.alpha * u * u) * np.cos(self.omega * tau)

    def qdot(self, tau):
        tau = np.asarray(tau, dtype=float)
        u = tau - self.t0
        g = np.exp(-self.alpha * u * u)
        return g * (
            -2.0 * self.alpha * u * np.cos(self.omega * tau)
            - self.omega * np.sin(self.omega * tau)
        )

    def qddot(self, tau):
        tau = np.asarray(tau, dtype=float)
        u = tau - self.t0
        g = np.exp(-self.alpha * u * u)
        cos, sin = np.cos(self.omega * tau), np.sin(self.omega * tau)
        return g * (
            (4.0 * self.alpha**2 * u * u - 2.0 * self.alpha - self.omega**2) * cos
            + 4.0 * self.alpha * u * self.omega * sin
        )


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, smooth in between."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0.0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
        b = np.where(x < 1.0, np.exp(-1.0 / np.maximum(1.0 - x, 1e-300)), 0.0)
    return a / (a + b)


def _smoothstep_d1(x, h=1e-5):
    # analytic form is unwieldy; central differences at O(h^4) are ample
    return (
        8.0 * (_smoothstep(x + h) - _smoothstep(x - h))
        - (_smoothstep(x + 2 * h) - _smoothstep(x - 2 * h))
    ) / (12.0 * h)


def _smoothstep_d2(x, h=1e-4):
    return (
        16.0 * (_smoothstep(x + h) + _smoothstep(x - h))
        - (_smoothstep(x + 2 * h) + _smoothstep(x - 2 * h))
        - 30.0 * _smoothstep(x)
    ) / (12.0 * h * h)


def _transition(x):
    """Flat indices of the ramp transition 0 < x < 1."""
    return np.flatnonzero((x > 0.0) & (x < 1.0))


def _ramped_q(tau, om, ramp):
    """f(tau/ramp) cos(om tau); om broadcasts against tau.

    The exponentials of the ramp are evaluated only on the transition
    region; everywhere else the ramp factor is exactly 0 or 1.  This
    keeps the per-sample cost near a single cosine, which matters when
    generating surface data for large ensembles.
    """
    out = np.cos(om * tau)
    if ramp <= 0.0:
        return out
    x = tau * (1.0 / ramp)
    idx = _transition(x)
    if idx.size:
        partial = out.reshape(-1)[idx] * _smoothstep(x.reshape(-1)[idx])
    out *= x >= 1.0
    if idx.size:
        out.reshape(-1)[idx] = partial
    return out


def _ramped_qdot(tau, om, ramp):
    u = om * tau
    out = np.sin(u)
    out *= -om
    if ramp <= 0.0:
        return out
    x = tau * (1.0 / ramp)
    idx = _transition(x)
    if idx.size:
        xs = x.reshape(-1)[idx]
        us = u.reshape(-1)[idx]
        # the -om sin(u) factor is already in out at these indices
        partial = _smoothstep_d1(xs) / ramp * np.cos(us) + _smoothstep(
            xs
        ) * out.reshape(-1)[idx]
    out *= x >= 1.0
    if idx.size:
        out.reshape(-1)[idx] = partial
    return out


def _ramped_qddot(tau, om, ramp):
    u = om * tau
    out = np.cos(u)
    out *= -(om * om)
    if ramp <= 0.0:
        return out
    x = tau * (1.0 / ramp)
    idx = _transition(x)
    if idx.size:
        xs = x.reshape(-1)[idx]
        us = u.reshape(-1)[idx]
        oms = np.broadcast_to(om, tau.shape).reshape(-1)[idx]
        partial = (
            _smoothstep_d2(xs) / ramp**2 * np.cos(us)
            - 2.0 * _smoothstep_d1(xs) / ramp * oms * np.sin(us)
            + _smoothstep(xs) * out.reshape(-1)[idx]
        )
    out *= x >= 1.0
    if idx.size:
        out.reshape(-1)[idx] = partial
    return out


@dataclass(frozen=True)
class RampedCosine:
    """Signal q(tau) = f(tau/ramp) cos(omega tau) with a C-infinity ramp f.

    The ramp rises from 0 at tau <= 0 to 1 at tau >= ramp; for tau < 0
    the signal vanishes identically, making the record causal.  With
    ramp = 0 the signal is the plain, always-on cosine.
    """

    omega: float
    ramp: float = 0.0

    def q(self, tau):
        return _ramped_q(np.asarray(tau, dtype=float), self.omega, self.ramp)

    def qdot(self, tau):
        return _ramped_qdot(np.asarray(tau, dtype=float), self.omega, self.ramp)

    def qddot(self, tau):
        return _ramped_qddot(np.asarray(tau, dtype=float), self.omega, self.ramp)


@dataclass(frozen=True)
class PointSource:
    """Monopole with closed-form strength signal."""

    position: np.ndarray
    signal: GaussianCosine | RampedCosine

    def __post_init__(self):
        object.__setattr__(
            self, "position", np.asarray(self.position, dtype=float).reshape(3)
        )


@dataclass(frozen=True)
class SourceEnsemble:
    """Collection of point sources with the seed that generated it."""

    sources: tuple[PointSource, ...]
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.sources)

    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sources])


def direct_field(
    ensemble: SourceEnsemble,
    x: np.ndarray,
    t,
    c: float = 1.0,
    normal: np.ndarray | None = None,
):
    """Exact field of the ensemble at position x and time(s) t.

    Returns p, or (p, dp/dn) when a unit normal is given.  Fails if the
    evaluation point coincides with a source position.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    t = np.asarray(t, dtype=float)
    p = np.zeros(t.shape)
    pn = np.zeros(t.shape) if normal is not None else None
    for src in ensemble.sources:
        d = x - src.position
        r = float(np.linalg.norm(d))
        if r == 0.0:
            raise ValueError("field point coincides with a source position")
        tau = t - r / c
        q = src.signal.q(tau)
        p += q / (4.0 * np.pi * r)
        if pn is not None:
            cosang = float(np.dot(normal, d / r))
            pn += cosang * (
                -src.signal.qdot(tau) / (4.0 * np.pi * r * c)
                - q / (4.0 * np.pi * r * r)
            )
    if pn is None:
        return p
    return p, pn


def direct_series(
    ensemble: SourceEnsemble,
    x: np.ndarray,
    times,
    c: float = 1.0,
    normal: np.ndarray | None = None,
):
    """Field time series at x with the source loop vectorized away.

    Matches direct_field but evaluates all sources in one block when
    the ensemble is uniform (every signal a RampedCosine with the same
    ramp), which is the cost-relevant case for large random ensembles;
    mixed ensembles fall back to the per-source loop.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    times = np.asarray(times, dtype=float)
    sigs = [s.signal for s in ensemble.sources]
    uniform = all(isinstance(s, RampedCosine) for s in sigs) and (
        len({s.ramp for s in sigs}) == 1
    )
    if not uniform:
        return direct_field(ensemble, x, times, c, normal)
    d = x[None, :] - ensemble.positions()
    r = np.linalg.norm(d, axis=1)
    if np.any(r == 0.0):
        raise ValueError("field point coincides with a source position")
    om = np.array([s.omega for s in sigs])[:, None]
    ramp = sigs[0].ramp
    tau = times[None, :] - (r / c)[:, None]
    q = _ramped_q(tau, om, ramp)
    p = (1.0 / (4.0 * np.pi * r)) @ q
    if normal is None:
        return p
    cosang = d @ np.asarray(normal, dtype=float).reshape(3) / r
    qd = _ramped_qdot(tau, om, ramp)
    pn = (-cosang / (4.0 * np.pi * r * c)) @ qd
    pn += (-cosang / (4.0 * np.pi * r * r)) @ q
    return p, pn


def surface_data(
    ensemble: SourceEnsemble,
    frame: SurfaceFrame,
    steps: int,
    dt: float,
    c: float = 1.0,
):
    """Exact surface pressure and outward normal derivative per time step.

    Returns (sigma, sigma_n), each of shape (node_count, steps), with
    column i sampled at tau = i*dt.  All sources must lie strictly
    inside the surface.
    """
    nodes = frame.nodes_cartesian()
    a = frame.radius
    tau = dt * np.arange(steps)
    sigma = np.zeros((nodes.shape[0], steps))
    sigma_n = np.zeros_like(sigma)
    nhat = nodes / a  # outward radial normal at each node
    for src in ensemble.sources:
        if np.linalg.norm(src.position) >= a:
            raise ValueError(
                "source on or outside the surface; interior sources required"
            )
        d = nodes - src.position
        r = np.linalg.norm(d, axis=1)
        cosang = np.einsum("ij,ij->i", nhat, d) / r
        arg = tau[None, :] - (r / c)[:, None]
        q = src.signal.q(arg)
        sigma += q / (4.0 * np.pi * r)[:, None]
        sigma_n += cosang[:, None] * (
            -src.signal.qdot(arg) / (4.0 * np.pi * r * c)[:, None]
            - q / (4.0 * np.pi * r * r)[:, None]
        )
    return sigma, sigma_n


def random_ensemble(
    n_s: int,
    seed: int,
    radius: float = 0.7,
    omega_range: tuple[float, float] = (9.0, 11.0),
    ramp: float = 0.0,
) -> SourceEnsemble:
    """Seeded ensemble of cosine sources inside a ball.

    Positions are uniform in the ball of the given radius, angular
    frequencies uniform in omega_range.  A nonzero ramp length gives
    every signal a smooth start-up over [0, ramp].
    """
    if n_s < 1:
        raise ValueError("ensemble needs at least one source")
    rng = np.random.default_rng(seed)
    # uniform in the ball: random direction, radius ~ U^(1/3)
    v = rng.normal(size=(n_s, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    r = radius * rng.random(n_s) ** (1.0 / 3.0)
    omegas = rng.uniform(omega_range[0], omega_range[1], size=n_s)
    sources = tuple(
        PointSource(
            position=r[k] * v[k],
            signal=RampedCosine(omega=float(omegas[k]), ramp=ramp),
        )
        for k in range(n_s)
    )
    return SourceEnsemble(sources=sources, seed=seed)
