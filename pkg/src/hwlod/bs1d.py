"""One-dimensional fitted finite-volume Black-Scholes solver and 2D edge data.

The 1D operator is written in the same conservative form as the x-sweep,

    -(x (a x u_x + b u))_x + c u,   a = sigma^2 / 2,  b = r - sigma^2,  c = 2r - sigma^2,

which expands to -sigma^2 x^2 u_xx / 2 - r x u_x + r u (plus beta u when the
shifted equation is solved).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .fvcore import fitted_operator
from .mesh import Axis, Grid2D
from .model import ALPHA_MAX, EPS_A, DomainBox, MarketParams, Payoff, natural_boundary_y0
from .tridiag import TridiagonalFactor, TridiagonalSystem


@dataclass(frozen=True)
class Bs1dProblem:
    sigma: float
    r: float
    payoff: Payoff
    axis: Axis
    steps: int
    T: float
    beta: float = 0.0
    # "payoff": u(X, t) = u_T(X); "discounted": e^{-rt} u_T(X e^{rt})
    right_edge: str = "payoff"

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.steps < 1:
            raise ValueError(f"need at least one time step, got {self.steps}")
        if self.right_edge not in ("payoff", "discounted"):
            raise ValueError(f"unknown right_edge policy {self.right_edge!r}")

    @property
    def coefficients(self) -> tuple[float, float, float]:
        s2 = self.sigma**2
        return 0.5 * s2, self.r - s2, 2.0 * self.r - s2 + self.beta

    def right_value(self, t: float) -> float:
        X = self.axis.hi
        if self.right_edge == "discounted":
            return natural_boundary_y0(self.payoff, self.r, X, t, upper=X)
        return float(self.payoff(X))


def _alpha(a: float, b: float) -> float:
    return math.copysign(ALPHA_MAX, b) if a < EPS_A else b / a


def bs1d_system(problem: Bs1dProblem, tau: float, prev: np.ndarray, t_next: float) -> TridiagonalSystem:
    """Implicit Euler system for one step, with Dirichlet rows at both ends."""
    a, b, c = problem.coefficients
    op = fitted_operator(problem.axis, a, b, c, alpha=_alpha(a, b))
    hbar = problem.axis.dual_widths
    diag = hbar / tau + op.center[:, 0]
    sub = op.lower[1:, 0].copy()
    sup = op.upper[:-1, 0].copy()
    diag[0] = diag[-1] = 1.0
    sup[0] = 0.0
    sub[-1] = 0.0
    rhs = hbar / tau * prev
    rhs[0] = float(problem.payoff(problem.axis.lo))
    rhs[-1] = problem.right_value(t_next)
    return TridiagonalSystem(sub, diag, sup, rhs, frozenset({0, diag.size - 1}))


def solve_bs1d(problem: Bs1dProblem) -> np.ndarray:
    """Values at every time level, shape (steps + 1, N + 1); row 0 is the payoff."""
    axis = problem.axis
    K = problem.steps
    tau = problem.T / K
    a, b, c = problem.coefficients
    op = fitted_operator(axis, a, b, c, alpha=_alpha(a, b))
    hbar = axis.dual_widths
    lower = op.lower[:, 0].copy()
    diag = hbar / tau + op.center[:, 0]
    upper = op.upper[:, 0].copy()
    diag[0] = diag[-1] = 1.0
    upper[0] = lower[-1] = 0.0
    factor = TridiagonalFactor(lower, diag, upper)

    out = np.empty((K + 1, axis.nodes.size))
    out[0] = problem.payoff(axis.nodes)
    left = float(problem.payoff(axis.lo))
    for k in range(K):
        t = (k + 1) * tau
        rhs = hbar / tau * out[k]
        rhs[0] = left
        rhs[-1] = problem.right_value(t)
        out[k + 1] = factor.solve(rhs)
    return out


@dataclass(frozen=True)
class BoundaryProfiles:
    """Dirichlet data on the four edges at every time level.

    left/right have shape (K + 1, M + 1) along the y nodes, bottom/top
    (K + 1, N + 1) along the x nodes.
    """

    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    bottom: np.ndarray
    top: np.ndarray

    @classmethod
    def from_function(cls, grid: Grid2D, times, f) -> "BoundaryProfiles":
        """Sample an exact field f(x, y, t) on the edges."""
        x = grid.x_axis.nodes
        y = grid.y_axis.nodes
        times = np.asarray(times, dtype=float)
        left = np.array([np.broadcast_to(f(x[0], y, t), y.shape) for t in times])
        right = np.array([np.broadcast_to(f(x[-1], y, t), y.shape) for t in times])
        bottom = np.array([np.broadcast_to(f(x, y[0], t), x.shape) for t in times])
        top = np.array([np.broadcast_to(f(x, y[-1], t), x.shape) for t in times])
        return cls(times, left, right, bottom, top)

    @classmethod
    def zeros(cls, grid: Grid2D, times) -> "BoundaryProfiles":
        times = np.asarray(times, dtype=float)
        n1, m1 = grid.shape
        z = np.zeros
        return cls(times, z((times.size, m1)), z((times.size, m1)),
                   z((times.size, n1)), z((times.size, n1)))


def make_boundary_profiles(params: MarketParams, box: DomainBox, payoff: Payoff,
                           grid: Grid2D, K: int, homogeneous: bool = False) -> BoundaryProfiles:
    """Edge data on the 2D solver's time grid.

    x = 0 takes u_T(0) and x = X takes u_T(X).  The y = zeta and y = Y edges
    come from 1D solves with sigma = sqrt(zeta) and sqrt(Y) on the same x-axis
    and time grid.  With zeta = 0 the y = 0 edge is the zero-volatility price
    and the x = X edge is discounted to match it.
    """
    times = box.T * np.arange(K + 1) / K
    if homogeneous:
        return BoundaryProfiles.zeros(grid, times)
    x_axis = grid.x_axis
    m1 = grid.y_axis.nodes.size
    X = x_axis.hi
    degenerate = box.zeta == 0.0
    edge_policy = "discounted" if degenerate else "payoff"

    def run(sigma):
        prob = Bs1dProblem(sigma, params.r, payoff, x_axis, K, box.T, params.beta, edge_policy)
        return solve_bs1d(prob)

    top = run(math.sqrt(box.Y))
    if degenerate:
        bottom = np.array([natural_boundary_y0(payoff, params.r, x_axis.nodes, t, upper=X)
                           for t in times])
        right_t = np.array([natural_boundary_y0(payoff, params.r, X, t, upper=X) for t in times])
    else:
        bottom = run(math.sqrt(box.zeta))
        right_t = np.full(times.size, float(payoff(X)))
    left = np.full((times.size, m1), float(payoff(x_axis.lo)))
    right = np.repeat(right_t[:, None], m1, axis=1)
    return BoundaryProfiles(times, left, right, bottom, top)


def write_boundary_csv(profiles: BoundaryProfiles, grid: Grid2D, path) -> None:
    """Long-format dump: edge, k, t, index, coordinate, value."""
    x = grid.x_axis.nodes
    y = grid.y_axis.nodes
    edges = (("bottom", profiles.bottom, x), ("top", profiles.top, x),
             ("left", profiles.left, y), ("right", profiles.right, y))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge", "k", "t", "index", "coordinate", "value"])
        for name, data, coord in edges:
            for k, t in enumerate(profiles.times):
                for i, z in enumerate(coord):
                    w.writerow([name, k, f"{t:.17g}", i, f"{z:.17g}", f"{data[k, i]:.17g}"])
