"""Exponentially fitted two-point flux weights and the 1D finite-volume operator.

Both sweeps discretise an operator of the form

    -(z (a z u_z + b u))_z + c u

on a 1D axis.  The flux z (a z u_z + b u) through a face between two nodes is
taken from the exact solution of the local two-point problem, which gives
weights built from z^alpha, alpha = b / a.  On an interval touching z = 0 the
local problem degenerates and a midpoint-type formula is used instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Axis

# Below this |alpha| the weights use the pure-diffusion (b -> 0) limit.
ALPHA_MIN = 1e-7


@dataclass(frozen=True)
class FluxWeights:
    """flux ~= w_hi * u_hi + w_lo * u_lo"""

    w_lo: np.ndarray | float
    w_hi: np.ndarray | float


def fitted_exponent(alpha, z_lo, z_hi):
    """alpha * ln(z_hi / z_lo); every power z^alpha in the scheme enters through this."""
    return alpha * (np.log(z_hi) - np.log(z_lo))


def interior_flux_weights(a, b, z_lo, z_hi, alpha=None) -> FluxWeights:
    """Weights of w = b (z_hi^al u_hi - z_lo^al u_lo) / (z_hi^al - z_lo^al).

    ``alpha`` defaults to b / a; pass it explicitly where a vanishes.  The
    quotient is evaluated through expm1 of the log-ratio so that neither large
    |alpha| nor alpha near zero loses precision.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    z_lo = np.asarray(z_lo, dtype=float)
    z_hi = np.asarray(z_hi, dtype=float)
    if np.any(z_lo <= 0.0):
        raise ValueError("interior flux weights need z_lo > 0; use origin_flux_weights at z = 0")
    if np.any(z_hi <= z_lo):
        raise ValueError("need z_lo < z_hi")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if alpha is None:
            alpha = b / a
        alpha = np.asarray(alpha, dtype=float)
        s = fitted_exponent(alpha, z_lo, z_hi)
        w_hi = b / -np.expm1(-s)
        w_lo = -b / np.expm1(s)
        near = np.abs(alpha) < ALPHA_MIN
        if np.any(near):
            lim = a / np.log(z_hi / z_lo)
            w_hi = np.where(near, lim, w_hi)
            w_lo = np.where(near, -lim, w_lo)
    if np.ndim(w_hi) == 0:
        return FluxWeights(float(w_lo), float(w_hi))
    return FluxWeights(w_lo, w_hi)


def origin_flux_weights(a, b) -> FluxWeights:
    """Weights on [0, z_1]: w = 0.5 [(a + b) u_1 - (a - b) u_0]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w_hi = 0.5 * (a + b)
    w_lo = -0.5 * (a - b)
    if np.ndim(w_hi) == 0:
        return FluxWeights(float(w_lo), float(w_hi))
    return FluxWeights(w_lo, w_hi)


@dataclass(frozen=True)
class FittedOperator:
    """Row coefficients of the cell-integrated operator, shape (N + 1, batch).

    Row i reads lower[i] u_{i-1} + center[i] u_i + upper[i] u_{i+1}; rows 0 and
    N are left zero for the caller to fill with boundary equations.
    """

    lower: np.ndarray
    center: np.ndarray
    upper: np.ndarray


def face_fluxes(axis: Axis, a, b, alpha=None) -> FluxWeights:
    """Face-scaled weights z_{i+1/2} * w for every interval i = 0..N-1, shape (N, batch)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    if alpha is not None:
        alpha = np.broadcast_to(np.atleast_1d(np.asarray(alpha, dtype=float)), a.shape)
    z = axis.nodes
    z_lo = z[:-1, None]
    z_hi = z[1:, None]
    w_lo = np.empty((z.size - 1, a.size))
    w_hi = np.empty_like(w_lo)
    origin = z[:-1] == 0.0
    inner = ~origin
    if np.any(inner):
        fw = interior_flux_weights(
            a[None, :], b[None, :], z_lo[inner], z_hi[inner],
            None if alpha is None else alpha[None, :],
        )
        w_lo[inner] = fw.w_lo
        w_hi[inner] = fw.w_hi
    if np.any(origin):
        fw = origin_flux_weights(a, b)
        w_lo[origin] = fw.w_lo
        w_hi[origin] = fw.w_hi
    face = axis.midpoints[1:-1, None]
    return FluxWeights(face * w_lo, face * w_hi)


def fitted_operator(axis: Axis, a, b, c, alpha=None) -> FittedOperator:
    """Assemble -(z (a z u_z + b u))_z + c u integrated over each interior cell.

    a, b, c (and alpha) may be scalars or 1D arrays of one batch entry each.
    """
    flux = face_fluxes(axis, a, b, alpha)
    c = np.atleast_1d(np.asarray(c, dtype=float))
    n1 = axis.nodes.size
    batch = flux.w_lo.shape[1]
    lower = np.zeros((n1, batch))
    center = np.zeros((n1, batch))
    upper = np.zeros((n1, batch))
    hbar = axis.dual_widths[1:-1, None]
    lower[1:-1] = flux.w_lo[:-1]
    center[1:-1] = flux.w_hi[:-1] - flux.w_lo[1:] + c[None, :] * hbar
    upper[1:-1] = -flux.w_hi[1:]
    return FittedOperator(lower, center, upper)
