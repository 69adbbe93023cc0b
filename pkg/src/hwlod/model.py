"""Continuous problem data for the Hull-White stochastic volatility PDE.

The solver works in time-to-expiry, so the equation integrated forward is

    u_t - 1/2 [x^2 y u_xx + 2 rho xi x y^{3/2} u_xy + xi^2 y^2 u_yy]
        - r x u_x - mu y u_y + (r + beta) u = g

on (0, X) x (zeta, Y) with u(x, y, 0) equal to the payoff.  This module holds
market constants, payoffs, the direction-split flux coefficients and the two
analytic special cases used for verification (a manufactured solution and
the zero-volatility boundary profile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

# Fallback magnitude of the fitting exponent where the x-diffusion vanishes (y = 0).
ALPHA_MAX = 1e8
# Below this the x-diffusion factor is treated as zero.
EPS_A = 1e-14


class DomainError(ValueError):
    """Argument outside the region where a model function is defined."""


@dataclass(frozen=True)
class MarketParams:
    r: float
    xi: float
    mu: float
    rho: float
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.xi <= 0.0:
            raise ValueError(f"xi must be positive, got {self.xi}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")


@dataclass(frozen=True)
class DomainBox:
    X: float
    Y: float
    T: float
    zeta: float = 0.0

    def __post_init__(self):
        if self.X <= 0.0:
            raise ValueError(f"X must be positive, got {self.X}")
        if not 0.0 <= self.zeta < self.Y:
            raise ValueError(f"need 0 <= zeta < Y, got zeta={self.zeta}, Y={self.Y}")
        if self.T <= 0.0:
            raise ValueError(f"T must be positive, got {self.T}")


# --------------------------------------------------------------------------
# Payoffs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Ramp:
    """Vanilla call, max(0, x - E)."""

    E: float
    kind: str = field(default="ramp", init=False)

    def __call__(self, x):
        return np.maximum(0.0, np.asarray(x, dtype=float) - self.E)

    @property
    def right_slope(self) -> float:
        return 1.0

    def check_box(self, X: float) -> None:
        if not 0.0 < self.E < X:
            raise ValueError(f"strike E={self.E} must lie in (0, X={X})")


@dataclass(frozen=True)
class CashOrNothing:
    """B * H(x - E).  ``at_strike`` is the value of H(0)."""

    B: float
    E: float
    at_strike: float = 0.0
    kind: str = field(default="cash", init=False)

    def __call__(self, x):
        s = np.asarray(x, dtype=float) - self.E
        return self.B * np.where(s > 0.0, 1.0, np.where(s == 0.0, self.at_strike, 0.0))

    @property
    def right_slope(self) -> float:
        return 0.0

    def check_box(self, X: float) -> None:
        if not 0.0 < self.E < X:
            raise ValueError(f"strike E={self.E} must lie in (0, X={X})")


@dataclass(frozen=True)
class BullishSpread:
    """Long call at E1, short call at E2 > E1."""

    E1: float
    E2: float
    kind: str = field(default="spread", init=False)

    def __post_init__(self):
        if not self.E1 < self.E2:
            raise ValueError(f"need E1 < E2, got {self.E1}, {self.E2}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.maximum(0.0, x - self.E1) - np.maximum(0.0, x - self.E2)

    @property
    def right_slope(self) -> float:
        return 0.0

    def check_box(self, X: float) -> None:
        if not self.E2 < X:
            raise ValueError(f"E2={self.E2} must be below X={X}")


@dataclass(frozen=True)
class Butterfly:
    """+1 on (X1, X2), -1 on (X2, X3), zero elsewhere (open intervals).

    This terminal value is negative on part of the domain, so positivity
    results do not apply to it.
    """

    X1: float
    X2: float
    X3: float
    kind: str = field(default="butterfly", init=False)

    def __post_init__(self):
        if not self.X1 < self.X2 < self.X3:
            raise ValueError(f"need X1 < X2 < X3, got {self.X1}, {self.X2}, {self.X3}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        up = (x > self.X1) & (x < self.X2)
        down = (x > self.X2) & (x < self.X3)
        return up.astype(float) - down.astype(float)

    @property
    def right_slope(self) -> float:
        return 0.0

    def check_box(self, X: float) -> None:
        if not self.X3 <= X:
            raise ValueError(f"X3={self.X3} must not exceed X={X}")


@dataclass(frozen=True)
class TableLookup:
    """Piecewise-linear payoff through sampled (x, value) pairs."""

    xs: tuple
    values: tuple
    kind: str = field(default="table", init=False)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or len(self.values) != xs.size:
            raise ValueError("table payoff needs two or more matching samples")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("table abscissae must be strictly increasing")

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.values)

    @property
    def right_slope(self) -> float:
        return (self.values[-1] - self.values[-2]) / (self.xs[-1] - self.xs[-2])

    def check_box(self, X: float) -> None:
        if self.xs[0] > 0.0 or self.xs[-1] < X:
            raise ValueError("table payoff must cover [0, X]")


Payoff = Union[Ramp, CashOrNothing, BullishSpread, Butterfly, TableLookup]

_PAYOFF_KINDS = {
    "ramp": Ramp,
    "cash": CashOrNothing,
    "spread": BullishSpread,
    "butterfly": Butterfly,
    "table": TableLookup,
}


def payoff_to_dict(payoff: Payoff) -> dict:
    out = {"kind": payoff.kind}
    for name in payoff.__dataclass_fields__:
        if name == "kind":
            continue
        value = getattr(payoff, name)
        out[name] = list(value) if isinstance(value, tuple) else value
    return out


def payoff_from_dict(data: dict) -> Payoff:
    data = dict(data)
    kind = data.pop("kind", None)
    try:
        cls = _PAYOFF_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown payoff kind {kind!r}; expected one of {sorted(_PAYOFF_KINDS)}")
    if cls is TableLookup:
        return TableLookup(tuple(data["xs"]), tuple(data["values"]))
    return cls(**data)


def evaluate_payoff(payoff: Payoff, x, upper: float | None = None):
    """Terminal value u_T(x); raises DomainError outside [0, upper]."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or (upper is not None and np.any(xa > upper)):
        raise DomainError(f"payoff argument outside [0, {upper}]")
    out = payoff(xa)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# Direction-split coefficients
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class XSweepCoeffs:
    a_bar: np.ndarray | float
    b_bar: np.ndarray | float
    c1: np.ndarray | float
    alpha_bar: np.ndarray | float
    degenerate: np.ndarray | bool


@dataclass(frozen=True)
class YSweepCoeffs:
    a_hat: float
    b_hat: float
    c2: float
    alpha_hat: float
    k: np.ndarray | float


def xsweep_coefficients(params: MarketParams, y) -> XSweepCoeffs:
    """Flux factors of the x-direction operator at variance level(s) y.

    The x-flux is x * (a_bar x u_x + b_bar u); where a_bar drops below EPS_A
    the fitting exponent is replaced by sign(b_bar) * ALPHA_MAX.
    """
    ya = np.asarray(y, dtype=float)
    if np.any(ya < 0.0):
        raise DomainError("variance must be nonnegative")
    sq = np.sqrt(ya)
    a = 0.5 * ya
    b = params.r - ya - 1.5 * params.rho * params.xi * sq
    c1 = 1.5 * params.r - ya - 1.5 * params.rho * params.xi * sq + 0.5 * params.beta
    degenerate = a < EPS_A
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(degenerate, np.sign(b) * ALPHA_MAX, b / np.where(degenerate, 1.0, a))
    if np.ndim(ya) == 0:
        return XSweepCoeffs(float(a), float(b), float(c1), float(alpha), bool(degenerate))
    return XSweepCoeffs(a, b, c1, alpha, degenerate)


def ysweep_coefficients(params: MarketParams, x, y_half) -> YSweepCoeffs:
    """Flux factors of the y-direction operator plus the mixed coefficient k(x, y_half)."""
    yh = np.asarray(y_half, dtype=float)
    if np.any(yh < 0.0):
        raise DomainError("variance must be nonnegative")
    a = 0.5 * params.xi**2
    b = params.mu - params.xi**2
    c2 = 0.5 * params.r + params.mu - params.xi**2 + 0.5 * params.beta
    k = mixed_coefficient(params, x, yh)
    return YSweepCoeffs(a, b, c2, b / a, k)


def mixed_coefficient(params: MarketParams, x, y):
    """k(x, y) = rho xi x y^{3/2}."""
    out = params.rho * params.xi * np.asarray(x, dtype=float) * np.asarray(y, dtype=float) ** 1.5
    return float(out) if np.ndim(out) == 0 else out


def total_reaction(params: MarketParams, y):
    """Reaction coefficient of the full divergence form (sum of both sweep reactions)."""
    sq = np.sqrt(np.asarray(y, dtype=float))
    return (
        params.beta + 2.0 * params.r - 0.75 * params.rho * sq * params.xi - y
        + params.mu - 0.75 * params.rho * sq * params.xi - params.xi**2
    )


@dataclass(frozen=True)
class SourceSplit:
    """Distributes a source g(x, y, t) between the two sweeps."""

    g: Callable
    weight_x: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.weight_x <= 1.0:
            raise ValueError(f"weight_x must lie in [0, 1], got {self.weight_x}")

    def g1(self, x, y, t):
        return self.weight_x * self.g(x, y, t)

    def g2(self, x, y, t):
        return (1.0 - self.weight_x) * self.g(x, y, t)


def zero_source(x, y, t):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


# --------------------------------------------------------------------------
# Analytic special cases
# --------------------------------------------------------------------------


def manufactured_case(params: MarketParams, x, y, t):
    """Exact field u = x exp(-y t) and the source it induces.

    Returns (u, g) with g = u * (-y + rho xi y^{3/2} t - xi^2 y^2 t^2 / 2 + mu y t + beta).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = x * np.exp(-y * t)
    g = u * (
        -y
        + params.rho * params.xi * y**1.5 * t
        - 0.5 * params.xi**2 * y**2 * t**2
        + params.mu * y * t
        + params.beta
    )
    if u.ndim == 0:
        return float(u), float(g)
    return u, g


def manufactured_source(params: MarketParams) -> Callable:
    return lambda x, y, t: manufactured_case(params, x, y, t)[1]


def natural_boundary_y0(payoff: Payoff, r: float, x, t: float, upper: float | None = None,
                        overflow: str = "extend"):
    """Zero-volatility price e^{-rt} u_T(x e^{rt}).

    Arguments beyond ``upper`` either extend the payoff linearly with its
    rightmost slope (``overflow="extend"``) or raise DomainError.
    """
    x = np.asarray(x, dtype=float)
    grow = math.exp(r * t)
    arg = x * grow
    if upper is None:
        val = payoff(arg)
    else:
        over = arg > upper
        if np.any(over) and overflow == "raise":
            raise DomainError(f"x*exp(rt) exceeds X={upper}")
        if overflow not in ("extend", "raise"):
            raise ValueError(f"unknown overflow policy {overflow!r}")
        inside = payoff(np.minimum(arg, upper))
        edge = float(payoff(upper))
        val = np.where(over, edge + payoff.right_slope * (arg - upper), inside)
    out = val / grow
    return float(out) if np.ndim(out) == 0 else out
