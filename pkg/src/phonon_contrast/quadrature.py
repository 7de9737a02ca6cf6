"""Oscillatory Fourier integrals of time-domain drives.

Two routes are provided and used against each other throughout the suite:

* closed-form integration by parts of SegmentedDrive (exact for the
  piecewise-quadratic protocol forces, stable at arbitrarily large
  omega * duration because continuous parts cancel through shared edge
  arrays rather than numerically);
* composite Gauss-Legendre panels (order 16, at least eight panels per
  oscillation period) with doubling refinement for arbitrary callables.

Both integrate f(t) e^{i sign w t} dt; sign=-1 gives the kernel used by the
Duhamel convolution.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import NonConvergenceError
from .piecewise import SegmentedDrive

__all__ = [
    "fourier_drive",
    "fourier_drive_prefix",
    "fourier_callable_gl",
    "QuadratureDiagnostics",
]

# Below this total phase across the window, the by-parts forms lose digits to
# cross-edge cancellation while panelled Gauss-Legendre is machine exact.
_SMALL_TOTAL_PHASE = 64.0
_PHASE_PER_PANEL = 1.5
_GL_ORDER = 16


@lru_cache(maxsize=8)
def _gl_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _cis(x):
    return np.cos(x) + 1j * np.sin(x)


def _segment_phases(drive: SegmentedDrive, w):
    """e^{i w t_k} per edge, built by multiplying per-segment factors.

    Each trig argument is a single product w * h, so protocols on exactly
    representable durations lose nothing to argument rounding even at huge
    w * t.
    """
    w = np.atleast_1d(w)
    phases = np.empty((len(drive.edges), *w.shape), dtype=complex)
    # offset enters as a pure phase with its own exact-argument product
    phases[0] = _cis(w * drive.edges[0]) * _cis(w * drive.offset)
    for k in range(drive.n_segments):
        h = drive.edges[k + 1] - drive.edges[k]
        phases[k + 1] = phases[k] * _cis(w * h)
    return phases


def _byparts_full(drive: SegmentedDrive, w):
    """Whole-window integral of drive(t) e^{i w t} dt, grouped by edges."""
    K = drive.n_segments
    iw = 1j * w
    iw2 = iw * iw
    iw3 = iw2 * iw
    B = _segment_phases(drive, w)

    def g_at(k, u):
        return (
            drive.value_into(k, u) / iw
            - drive.slope_into(k, u) / iw2
            + drive.curvature2(k) / iw3
        )

    total = B[K] * g_at(K - 1, drive.edges[K] - drive.edges[K - 1]) - B[0] * g_at(0, 0.0)
    c, s, q, qd, cv = drive.const, drive.scale, drive.q, drive.qd, drive.curv
    for j in range(1, K):
        d_p = (c[j - 1] - c[j]) + (s[j - 1] - s[j]) * q[j]
        d_pd = (s[j - 1] - s[j]) * qd[j]
        d_pdd = 2.0 * (s[j - 1] * cv[j - 1] - s[j] * cv[j])
        total += B[j] * (d_p / iw - d_pd / iw2 + d_pdd / iw3)
    return total


def _gl_panel_full(drive: SegmentedDrive, w: float, upto: float | None = None):
    """Panelled Gauss-Legendre over the segments (optionally clipped at upto).

    upto is in absolute time; panel evaluation runs in drive-local time with
    the window offset applied as one overall phase.
    """
    x, wt = _gl_nodes(_GL_ORDER)
    total = 0.0 + 0.0j
    upto_local = None if upto is None else upto - drive.offset
    for k in range(drive.n_segments):
        lo, hi = drive.edges[k], drive.edges[k + 1]
        if upto_local is not None:
            if upto_local <= lo:
                break
            hi = min(hi, upto_local)
        h = hi - lo
        n = max(1, int(np.ceil(abs(w) * h / _PHASE_PER_PANEL)))
        bounds = np.linspace(0.0, h, n + 1)
        mid = 0.5 * (bounds[:-1] + bounds[1:])
        half = 0.5 * h / n
        u = mid[:, None] + half * x[None, :]
        vals = drive.value_into(k, u) * _cis(w * (lo + u))
        total += half * np.sum(vals @ wt)
    return total * complex(_cis(np.asarray(w * drive.offset)))


def fourier_drive(drive: SegmentedDrive, omega, sign: int = +1):
    """integral drive(t) e^{i sign omega t} dt over the full window, closed form.

    omega may be a scalar or an array of positive angular frequencies.
    """
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    if not np.all(omega_arr > 0):
        raise ValueError("omega must be positive")
    a, b = drive.window
    phase_total = omega_arr * (b - a)
    out = np.empty(omega_arr.shape, dtype=complex)
    big = phase_total >= _SMALL_TOTAL_PHASE
    if np.any(big):
        out[big] = _byparts_full(drive, omega_arr[big])
    for i in np.nonzero(~big)[0]:
        out[i] = _gl_panel_full(drive, omega_arr[i])
    if sign < 0:
        out = np.conj(out)
    return complex(out[0]) if np.ndim(omega) == 0 else out


def _byparts_prefix(drive: SegmentedDrive, w: float, t: float):
    """Window-start-to-t integral via by-parts with an explicit upper boundary."""
    iw = 1j * w
    iw2 = iw * iw
    iw3 = iw2 * iw
    B = _segment_phases(drive, np.asarray([w]))[:, 0]

    def g_at(k, u):
        return (
            drive.value_into(k, u) / iw
            - drive.slope_into(k, u) / iw2
            + drive.curvature2(k) / iw3
        )

    t_local = t - drive.offset
    k_t = int(np.searchsorted(drive.edges, t_local, side="right")) - 1
    k_t = min(k_t, drive.n_segments - 1)
    u_t = t_local - drive.edges[k_t]
    b_t = complex(B[k_t] * _cis(w * u_t))
    total = b_t * g_at(k_t, u_t) - complex(B[0]) * g_at(0, 0.0)
    c, s, q, qd, cv = drive.const, drive.scale, drive.q, drive.qd, drive.curv
    for j in range(1, k_t + 1):
        d_p = (c[j - 1] - c[j]) + (s[j - 1] - s[j]) * q[j]
        d_pd = (s[j - 1] - s[j]) * qd[j]
        d_pdd = 2.0 * (s[j - 1] * cv[j - 1] - s[j] * cv[j])
        total += complex(B[j]) * (d_p / iw - d_pd / iw2 + d_pdd / iw3)
    return total


def fourier_drive_prefix(drive: SegmentedDrive, omega: float, ts, sign: int = -1) -> np.ndarray:
    """Prefix integrals from the window start to each t in ts.

    Times at or beyond the window end reuse the full-window value; times
    before the window start give zero.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    a, b = drive.window
    small = omega * (b - a) < _SMALL_TOTAL_PHASE
    full = _gl_panel_full(drive, omega) if small else complex(_byparts_full(drive, np.asarray([omega]))[0])
    out = np.zeros(len(ts), dtype=complex)
    for j, t in enumerate(ts):
        if t <= a:
            continue
        if t >= b:
            out[j] = full
        elif small:
            out[j] = _gl_panel_full(drive, omega, upto=float(t))
        else:
            out[j] = _byparts_prefix(drive, omega, t)
    return np.conj(out) if sign < 0 else out


class QuadratureDiagnostics(dict):
    """Panel count / refinement metadata attached to quadrature results."""


def fourier_callable_gl(
    f,
    window,
    omega: float,
    sign: int = +1,
    breakpoints=(),
    rel_tol: float = 1e-8,
    max_levels: int = 12,
    panels_per_period: int = 8,
    order: int = 16,
):
    """integral_window f(t) e^{i sign omega t} dt by refined Gauss-Legendre panels.

    The window is split at the declared breakpoints; each piece starts with
    panels no wider than 1/panels_per_period of the oscillation period and all
    panel counts double until two successive levels agree to rel_tol.

    f must accept ndarray arguments. Returns (value, QuadratureDiagnostics).
    Raises NonConvergenceError if the level cap is hit first, with the achieved
    self-consistency attached.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    a, b = window
    if not b > a:
        raise ValueError("window must have positive length")
    edges = [a] + sorted(t for t in breakpoints if a < t < b) + [b]
    pieces = [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    period = 2.0 * np.pi / omega
    x, wt = _gl_nodes(order)
    w = sign * omega

    def level_value(level: int):
        total = 0.0 + 0.0j
        n_panels = 0
        for lo, hi in pieces:
            length = hi - lo
            n0 = max(1, int(np.ceil(length / (period / panels_per_period))))
            n = n0 * (1 << level)
            n_panels += n
            bounds = np.linspace(lo, hi, n + 1)
            mid = 0.5 * (bounds[:-1] + bounds[1:])
            half = 0.5 * (length / n)
            # chunk so node arrays stay modest even at high levels
            chunk = max(1, (1 << 16) // order)
            for s in range(0, n, chunk):
                m = mid[s : s + chunk]
                nodes = m[:, None] + half * x[None, :]
                vals = np.asarray(f(nodes)) * _cis(w * nodes)
                total += half * np.sum(vals @ wt)
        return total, n_panels

    samples = np.asarray(f(np.asarray([0.5 * (a + b)])))
    if not np.all(np.isfinite(samples)):
        raise ValueError(f"drive returned a non-finite sample at t={0.5 * (a + b)!r}")

    prev = None
    achieved = np.inf
    value = 0.0 + 0.0j
    for level in range(max_levels + 1):
        value, n_panels = level_value(level)
        if not np.isfinite(value):
            raise ValueError("drive produced a non-finite integral")
        if prev is not None:
            err = abs(value - prev)
            scale = max(abs(value), abs(prev), 1e-300)
            achieved = err / scale
            if err <= rel_tol * scale:
                return value, QuadratureDiagnostics(
                    panels=n_panels, levels=level, rel_error=achieved, converged=True
                )
        prev = value
    raise NonConvergenceError(
        f"Fourier quadrature did not reach rel_tol={rel_tol:g} after {max_levels} doublings "
        f"(achieved {achieved:g})",
        achieved=achieved,
        value=value,
    )
