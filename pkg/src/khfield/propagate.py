"""Streaming surface snapshots through propagation operators.

Each snapshot i adds S sigma_i + S_N sigma_i^(n) into the output window
[i + base_delay, i + base_delay + window).  Output sample j (array
index, absolute step base_delay + j, time (base_delay + j) dt) is
complete once every snapshot it draws on has been folded in: with n_t
snapshots, that is j in [window - 1, n_t).  Samples outside that range
miss contributions from before the record started or after it ended
and are excluded from error measures.
"""

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .operator import PropagationOperator

__all__ = [
    "SurfaceSnapshot",
    "FieldSeries",
    "step",
    "run",
    "error_metric",
    "StreamingAccumulator",
]


@dataclass(frozen=True)
class SurfaceSnapshot:
    """Surface pressure and outward normal derivative at one time step."""

    step: int
    sigma: np.ndarray
    sigma_n: np.ndarray

    def __post_init__(self):
        if self.sigma.shape != self.sigma_n.shape or self.sigma.ndim != 1:
            raise ValueError("snapshot vectors must be 1-d and equally sized")


@dataclass
class FieldSeries:
    """Accumulated output series at one field point.

    Attributes
    ----------
    dt : float
    start : int
        Absolute step of sample 0; sample j is at time (start + j) * dt.
    p : ndarray
        Pressure series.
    pn : ndarray or None
        Normal-derivative series, when requested.
    valid : slice
        Index range of physically complete samples.
    """

    dt: float
    start: int
    p: np.ndarray
    pn: np.ndarray | None = None
    valid: slice = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.valid is None:
            self.valid = slice(0, self.p.size)

    def times(self) -> np.ndarray:
        return self.dt * (self.start + np.arange(self.p.size))


def _series_for(op: PropagationOperator, n_steps: int, want_normal: bool) -> FieldSeries:
    length = n_steps + op.window
    return FieldSeries(
        dt=op.dt,
        start=op.base_delay,
        p=np.zeros(length),
        pn=np.zeros(length) if want_normal else None,
        valid=slice(op.window - 1, max(op.window - 1, n_steps)),
    )


def step(
    op: PropagationOperator, snap: SurfaceSnapshot, series: FieldSeries
) -> FieldSeries:
    """Fold one snapshot into the series (in place)."""
    if snap.sigma.size != op.node_count:
        raise ValueError(
            f"snapshot has {snap.sigma.size} nodes, operator expects "
            f"{op.node_count}"
        )
    lo = snap.step + op.base_delay - series.start
    hi = lo + op.window
    if lo < 0 or hi > series.p.size:
        raise ValueError(
            f"output window [{lo}, {hi}) outside series of length {series.p.size}"
        )
    series.p[lo:hi] += op.S @ snap.sigma + op.S_N @ snap.sigma_n
    if series.pn is not None:
        if not op.has_normal:
            raise ValueError("operator was assembled without a field-point normal")
        series.pn[lo:hi] += op.S_bar @ snap.sigma + op.S_bar_N @ snap.sigma_n
    return series


def _as_arrays(snapshots) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(snapshots, tuple) and len(snapshots) == 2:
        sigma, sigma_n = (np.asarray(s, dtype=float) for s in snapshots)
        if sigma.shape != sigma_n.shape or sigma.ndim != 2:
            raise ValueError("snapshot arrays must both be (node_count, n_steps)")
        return sigma, sigma_n
    snaps = list(snapshots)
    for k, s in enumerate(snaps):
        if s.step != k:
            raise ValueError(f"snapshot stream has a gap: expected step {k}, got {s.step}")
    sigma = np.column_stack([s.sigma for s in snaps])
    sigma_n = np.column_stack([s.sigma_n for s in snaps])
    return sigma, sigma_n


def run(
    op: PropagationOperator,
    snapshots: Iterable[SurfaceSnapshot] | tuple[np.ndarray, np.ndarray],
    want_normal: bool = False,
) -> FieldSeries:
    """Fold a contiguous snapshot stream into a fresh series.

    Accepts either an iterable of SurfaceSnapshot with consecutive step
    indices starting at 0, or a pair of arrays (sigma, sigma_n) of shape
    (node_count, n_steps).  The matrix products are batched over all
    steps; the result is identical to repeated :func:`step` calls.
    """
    sigma, sigma_n = _as_arrays(snapshots)
    if sigma.size == 0:
        return FieldSeries(
            dt=op.dt, start=op.base_delay, p=np.zeros(op.window),
            pn=np.zeros(op.window) if want_normal else None,
            valid=slice(0, 0),
        )
    if sigma.shape[0] != op.node_count:
        raise ValueError(
            f"snapshots carry {sigma.shape[0]} nodes, operator expects "
            f"{op.node_count}"
        )
    n_steps = sigma.shape[1]
    series = _series_for(op, n_steps, want_normal)
    inc = op.S @ sigma
    inc += op.S_N @ sigma_n
    for j in range(op.window):  # diagonal accumulation of the step updates
        series.p[j : j + n_steps] += inc[j]
    if want_normal:
        if not op.has_normal:
            raise ValueError("operator was assembled without a field-point normal")
        inc_n = op.S_bar @ sigma
        inc_n += op.S_bar_N @ sigma_n
        for j in range(op.window):
            series.pn[j : j + n_steps] += inc_n[j]
    return series


class StreamingAccumulator:
    """Memory-bounded alternative to :func:`run`.

    Holds only a rolling window of window + K samples; push() folds in
    one snapshot and returns the sample that just became complete (or
    None while the pipeline fills).  Results match :func:`run` exactly.
    """

    def __init__(self, op: PropagationOperator, want_normal: bool = False):
        if want_normal and not op.has_normal:
            raise ValueError("operator was assembled without a field-point normal")
        self.op = op
        self.want_normal = want_normal
        cap = op.window + op.K
        self._buf = np.zeros(cap)
        self._buf_n = np.zeros(cap) if want_normal else None
        self._next = 0  # step index expected next

    def push(self, snap: SurfaceSnapshot):
        """Fold in the next snapshot; emit (step, p[, pn]) once complete."""
        if snap.step != self._next:
            raise ValueError(
                f"snapshot stream has a gap: expected step {self._next}, "
                f"got {snap.step}"
            )
        op = self.op
        cap = self._buf.size
        idx = (snap.step + np.arange(op.window)) % cap
        self._buf[idx] += op.S @ snap.sigma + op.S_N @ snap.sigma_n
        if self._buf_n is not None:
            self._buf_n[idx] += op.S_bar @ snap.sigma + op.S_bar_N @ snap.sigma_n
        self._next += 1
        # output row snap.step received its last contribution just now;
        # retire its slot either way so the ring stays clean when reused
        slot = snap.step % cap
        p = self._buf[slot]
        self._buf[slot] = 0.0
        if self._buf_n is not None:
            pn = self._buf_n[slot]
            self._buf_n[slot] = 0.0
        if snap.step < op.window - 1:
            return None  # head rows lack pre-record contributions
        out = (snap.step + op.base_delay, p)
        if self._buf_n is not None:
            out = out + (pn,)
        return out


def error_metric(
    reference: FieldSeries, computed: FieldSeries, component: str = "p"
) -> float:
    """Peak relative error over the common valid range.

    epsilon = max|ref - comp| / max|ref|, taken over samples that are
    valid in both series (aligned by absolute step).
    """
    if abs(reference.dt - computed.dt) > 1e-15 * max(reference.dt, computed.dt):
        raise ValueError("series time steps differ")
    r = getattr(reference, component)
    c = getattr(computed, component)
    if r is None or c is None:
        raise ValueError(f"component {component!r} missing from a series")
    lo = max(
        reference.start + reference.valid.start, computed.start + computed.valid.start
    )
    hi = min(
        reference.start + reference.valid.stop, computed.start + computed.valid.stop
    )
    if hi <= lo:
        raise ValueError("series valid ranges do not overlap")
    rseg = r[lo - reference.start : hi - reference.start]
    cseg = c[lo - computed.start : hi - computed.start]
    denom = np.max(np.abs(rseg))
    if denom == 0.0:
        raise ValueError("reference is identically zero on the common range")
    return float(np.max(np.abs(rseg - cseg)) / denom)
