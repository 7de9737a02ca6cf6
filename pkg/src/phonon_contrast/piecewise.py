"""Piecewise-quadratic drives built on the protocol's segment structure.

Every protocol force is, per segment k, of the form

    P_k(u) = const_k + scale_k * (q_k + qd_k * u + curv_k * u^2),

with u local to the segment and (q, qd) SHARED edge arrays of the underlying
CoM trajectory. Keeping the shared arrays explicit is what lets the Fourier
layer integrate by parts with exact cancellation of the continuous parts:
jump terms are formed from differences like (scale_{k-1} - scale_k) * q_k
instead of re-evaluated polynomial endpoints, so nothing cancels
catastrophically at large omega * duration. Outside the window a drive is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SegmentedDrive"]


@dataclass(frozen=True)
class SegmentedDrive:
    edges: np.ndarray  # (K+1,) breakpoints in drive-local time
    const: np.ndarray  # (K,)  additive piecewise-constant part
    scale: np.ndarray  # (K,)  multiplier of the shared quadratic
    q: np.ndarray      # (K+1,) shared edge values of the quadratic
    qd: np.ndarray     # (K+1,) shared edge slopes
    curv: np.ndarray   # (K,)  u^2 coefficient of the shared quadratic
    offset: float = 0.0  # window translation; kept separate so segment
    #                      lengths never absorb into large absolute times

    def __post_init__(self):
        k = len(self.curv)
        if not (len(self.edges) == k + 1 == len(self.q) == len(self.qd)):
            raise ValueError("inconsistent segment array lengths")
        if len(self.const) != k or len(self.scale) != k:
            raise ValueError("inconsistent segment array lengths")
        if k < 1 or not np.all(np.diff(self.edges) > 0):
            raise ValueError("edges must be strictly increasing")

    @property
    def n_segments(self) -> int:
        return len(self.curv)

    @property
    def window(self):
        return float(self.edges[0] + self.offset), float(self.edges[-1] + self.offset)

    def value_into(self, k: int, u):
        """P_k at local offset u into segment k."""
        return self.const[k] + self.scale[k] * (self.q[k] + self.qd[k] * u + self.curv[k] * u * u)

    def slope_into(self, k: int, u):
        return self.scale[k] * (self.qd[k] + 2.0 * self.curv[k] * u)

    def curvature2(self, k: int):
        """Second derivative of P_k (constant)."""
        return self.scale[k] * 2.0 * self.curv[k]

    def __call__(self, t):
        t = np.asarray(t, dtype=float) - self.offset
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        idx = np.searchsorted(self.edges, t, side="right") - 1
        idx = np.where((t == self.edges[-1]) & (idx == self.n_segments), idx - 1, idx)
        inside = (idx >= 0) & (idx < self.n_segments)
        ki = idx[inside]
        u = t[inside] - self.edges[ki]
        out[inside] = self.const[ki] + self.scale[ki] * (
            self.q[ki] + self.qd[ki] * u + self.curv[ki] * u * u
        )
        return out[0] if scalar else out

    def shifted(self, delta: float) -> "SegmentedDrive":
        """Translate the time window; all local structure is unchanged."""
        return SegmentedDrive(
            edges=self.edges.copy(),
            const=self.const.copy(),
            scale=self.scale.copy(),
            q=self.q.copy(),
            qd=self.qd.copy(),
            curv=self.curv.copy(),
            offset=self.offset + delta,
        )
