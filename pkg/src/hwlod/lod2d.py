"""Locally one-dimensional stepping for the 2D fitted finite-volume scheme.

Each time step solves

    (I + tau L1) u_half = u^k + tau g1        rows j = 0..M, Dirichlet in x
    (I + tau L2) u^{k+1} = u_half + tau g2    columns i = 0..N, Dirichlet in y

where L1 carries the x-flux and L2 the y-flux plus the mixed-derivative
term.  The mixed term is taken explicitly from u_half so every column solve
stays tridiagonal.  Boundary rows of the x-sweep and boundary columns of the
y-sweep are evolved with the sweep operator instead of being overwritten by
Dirichlet data.

Fields are stored as arrays indexed [i, j] = (x_i, y_j).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bs1d import BoundaryProfiles
from .fvcore import fitted_operator
from .mesh import Grid2D
from .model import MarketParams, SourceSplit, mixed_coefficient, xsweep_coefficients, ysweep_coefficients
from .tridiag import MMatrixReport, SingularSystemError, TridiagonalFactor, TridiagonalSystem, check_m_matrix

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


@dataclass
class Field2D:
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("a field is a 2D array indexed [i, j]")


@dataclass(frozen=True)
class LodConfig:
    K: int
    weight_x: float = 0.5
    snapshot_steps: tuple = ()
    check_matrices: bool = True

    def __post_init__(self):
        if self.K < 0:
            raise ValueError(f"K must be nonnegative, got {self.K}")


@dataclass
class SolveRecord:
    final: Field2D
    snapshots: dict = field(default_factory=dict)
    min_values: np.ndarray | None = None
    load_min: np.ndarray | None = None
    x_reports: list = field(default_factory=list)
    y_report: MMatrixReport | None = None

    @property
    def matrices_ok(self) -> bool:
        reports = list(self.x_reports) + ([self.y_report] if self.y_report is not None else [])
        return all(bool(r) for r in reports)

    @property
    def min_over_time(self) -> float:
        return float(np.min(self.min_values))


class LodScheme:
    """Sweep matrices for one grid, parameter set and step size.

    The coefficients do not depend on time, so both sweeps are factored once.
    """

    def __init__(self, grid: Grid2D, params: MarketParams, tau: float,
                 source: SourceSplit | None = None):
        if tau <= 0.0:
            raise ValueError(f"tau must be positive, got {tau}")
        self.grid = grid
        self.params = params
        self.tau = tau
        self.source = source
        x = grid.x_axis.nodes
        y = grid.y_axis.nodes
        self.hbar_x = grid.x_axis.dual_widths
        self.hbar_y = grid.y_axis.dual_widths
        self.h_x = grid.x_axis.primal_widths

        # x-sweep: one system per row j, coefficients depend on y_j only
        self.xc = xsweep_coefficients(params, y)
        op = fitted_operator(grid.x_axis, self.xc.a_bar, self.xc.b_bar, self.xc.c1,
                             alpha=self.xc.alpha_bar)
        self._x_lower, self._x_diag, self._x_upper = _with_dirichlet(op, self.hbar_x, tau)
        try:
            self._x_factor = TridiagonalFactor(self._x_lower, self._x_diag, self._x_upper)
        except SingularSystemError as exc:
            raise SolverError(f"x-sweep matrix for row j={exc.system}: {exc}") from exc

        # y-sweep: the same matrix for every column
        self.yc = ysweep_coefficients(params, 0.0, y)
        op = fitted_operator(grid.y_axis, self.yc.a_hat, self.yc.b_hat, self.yc.c2,
                             alpha=self.yc.alpha_hat)
        self._y_lower, self._y_diag, self._y_upper = _with_dirichlet(op, self.hbar_y, tau)
        try:
            self._y_factor = TridiagonalFactor(self._y_lower, self._y_diag, self._y_upper)
        except SingularSystemError as exc:
            raise SolverError(f"y-sweep matrix: {exc}") from exc

        ym = grid.y_axis.midpoints
        self._k_up = mixed_coefficient(params, x[:, None], ym[None, 2:-1])
        self._k_dn = mixed_coefficient(params, x[:, None], ym[None, 1:-2])
        self._xx, self._yy = grid.mesh()

    # -- single-system views -------------------------------------------------

    def x_system(self, j: int, prev_row, g1_row, dirichlet: tuple[float, float]) -> TridiagonalSystem:
        rhs = self.hbar_x / self.tau * np.asarray(prev_row, dtype=float) \
            + np.asarray(g1_row, dtype=float) * self.hbar_x
        rhs[0], rhs[-1] = dirichlet
        n = rhs.size
        return TridiagonalSystem(self._x_lower[1:, j], self._x_diag[:, j], self._x_upper[:-1, j],
                                 rhs, frozenset({0, n - 1}))

    def y_system(self, half_col, mixed_col, g2_col, dirichlet: tuple[float, float]) -> TridiagonalSystem:
        rhs = self.hbar_y / self.tau * np.asarray(half_col, dtype=float) \
            + np.asarray(mixed_col, dtype=float) + np.asarray(g2_col, dtype=float) * self.hbar_y
        rhs[0], rhs[-1] = dirichlet
        n = rhs.size
        return TridiagonalSystem(self._y_lower[1:, 0], self._y_diag[:, 0], self._y_upper[:-1, 0],
                                 rhs, frozenset({0, n - 1}))

    def check_matrices(self) -> tuple[list, MMatrixReport]:
        n1, m1 = self.grid.shape
        zx = np.zeros(n1)
        xr = [check_m_matrix(self.x_system(j, zx, zx, (0.0, 0.0))) for j in range(m1)]
        zy = np.zeros(m1)
        yr = check_m_matrix(self.y_system(zy, zy, zy, (0.0, 0.0)))
        return xr, yr

    # -- sweeps ----------------------------------------------------------------

    def sources(self, t: float) -> tuple[np.ndarray, np.ndarray] | tuple[None, None]:
        if self.source is None:
            return None, None
        g = np.broadcast_to(self.source.g(self._xx, self._yy, t), self._xx.shape)
        w = self.source.weight_x
        return w * g, (1.0 - w) * g

    def x_rhs(self, u: np.ndarray, g1, left, right) -> np.ndarray:
        rhs = (self.hbar_x / self.tau)[:, None] * u
        if g1 is not None:
            rhs += g1 * self.hbar_x[:, None]
        rhs[0, :] = left
        rhs[-1, :] = right
        return rhs

    def x_sweep(self, u: np.ndarray, g1, left, right) -> np.ndarray:
        return self._x_factor.solve(self.x_rhs(u, g1, left, right))

    def mixed(self, u_half: np.ndarray) -> np.ndarray:
        """Explicit mixed-derivative contribution per cell, zero on rows 0 and M."""
        d = np.diff(u_half, axis=0) / self.h_x[:, None]
        s = np.empty_like(u_half)
        s[0] = 2.0 * d[0]
        s[-1] = 2.0 * d[-1]
        s[1:-1] = d[1:] + d[:-1]
        out = np.zeros_like(u_half)
        out[:, 1:-1] = 0.25 * (self._k_up * (s[:, 2:] + s[:, 1:-1])
                               - self._k_dn * (s[:, 1:-1] + s[:, :-2]))
        return out

    def y_rhs(self, u_half: np.ndarray, g2, bottom, top) -> np.ndarray:
        rhs = (self.hbar_y / self.tau)[:, None] * u_half.T + self.mixed(u_half).T
        if g2 is not None:
            rhs += g2.T * self.hbar_y[:, None]
        rhs[0, :] = bottom
        rhs[-1, :] = top
        return rhs

    def y_sweep(self, u_half: np.ndarray, g2, bottom, top) -> np.ndarray:
        return self._y_factor.solve(self.y_rhs(u_half, g2, bottom, top)).T

    def advance(self, u: np.ndarray, t_next: float, edges) -> np.ndarray:
        left, right, bottom, top = edges
        g1, g2 = self.sources(t_next)
        u_half = self.x_sweep(u, g1, left, right)
        return self.y_sweep(u_half, g2, bottom, top)


def _with_dirichlet(op, hbar, tau):
    lower = op.lower.copy()
    diag = hbar[:, None] / tau + op.center
    upper = op.upper.copy()
    diag[0] = diag[-1] = 1.0
    lower[0] = lower[-1] = 0.0
    upper[0] = upper[-1] = 0.0
    return lower, diag, upper


def _edges_at(bnd: BoundaryProfiles, k: int):
    return bnd.left[k], bnd.right[k], bnd.bottom[k], bnd.top[k]


# --------------------------------------------------------------------------
# Functional surface
# --------------------------------------------------------------------------


def assemble_x_row(grid: Grid2D, params: MarketParams, j: int, tau: float, prev_row, g1_row,
                   dirichlet: tuple[float, float]) -> TridiagonalSystem:
    """x-sweep system for row j (variance y_j)."""
    return LodScheme(grid, params, tau).x_system(j, prev_row, g1_row, dirichlet)


def assemble_y_column(grid: Grid2D, params: MarketParams, tau: float, half_col, mixed_col, g2_col,
                      dirichlet: tuple[float, float]) -> TridiagonalSystem:
    """y-sweep system for one column; the matrix does not depend on the column."""
    return LodScheme(grid, params, tau).y_system(half_col, mixed_col, g2_col, dirichlet)


def mixed_term(grid: Grid2D, params: MarketParams, u_half, i: int, j: int) -> float:
    if not 1 <= j <= grid.y_axis.N - 1:
        raise IndexError(f"mixed term is defined for interior rows only, got j={j}")
    u_half = np.asarray(u_half.values if isinstance(u_half, Field2D) else u_half, dtype=float)
    return float(LodScheme(grid, params, 1.0).mixed(u_half)[i, j])


def x_sweep(scheme: LodScheme, state: Field2D, bnd: BoundaryProfiles, k_next: int) -> Field2D:
    """Half step from t_k to t_{k+1}; ``k_next`` indexes the boundary data."""
    t = bnd.times[k_next]
    g1, _ = scheme.sources(t)
    left, right, _, _ = _edges_at(bnd, k_next)
    return Field2D(scheme.x_sweep(state.values, g1, left, right), t)


def y_sweep(scheme: LodScheme, half: Field2D, bnd: BoundaryProfiles, k_next: int) -> Field2D:
    t = bnd.times[k_next]
    _, g2 = scheme.sources(t)
    _, _, bottom, top = _edges_at(bnd, k_next)
    return Field2D(scheme.y_sweep(half.values, g2, bottom, top), t)


def advance(scheme: LodScheme, state: Field2D, bnd: BoundaryProfiles, k_next: int) -> Field2D:
    return y_sweep(scheme, x_sweep(scheme, state, bnd, k_next), bnd, k_next)


@dataclass(frozen=True)
class Problem:
    """A complete 2D pricing or verification problem, independent of the mesh."""

    name: str
    params: MarketParams
    box: "object"
    initial: Callable
    boundary: Callable
    source: Callable | None = None
    exact: Callable | None = None
    payoff: object = None
    nonnegative_data: bool = False


def solve(problem: Problem, grid: Grid2D, config: LodConfig,
          boundaries: BoundaryProfiles | None = None) -> SolveRecord:
    """Run K LOD steps from the terminal payoff and collect diagnostics."""
    K = config.K
    xx, yy = grid.mesh()
    u = np.array(np.broadcast_to(problem.initial(xx, yy), xx.shape), dtype=float)
    mins = [float(u.min())]
    if K == 0:
        return SolveRecord(Field2D(u, 0.0), {0: Field2D(u.copy(), 0.0)} if 0 in config.snapshot_steps else {},
                           np.array(mins), np.array([]))
    tau = problem.box.T / K
    split = None if problem.source is None else SourceSplit(problem.source, config.weight_x)
    scheme = LodScheme(grid, problem.params, tau, split)
    bnd = boundaries if boundaries is not None else problem.boundary(grid, K)
    if bnd.times.size != K + 1:
        raise ValueError(f"boundary data has {bnd.times.size} levels, expected {K + 1}")

    record = SolveRecord(Field2D(u, 0.0))
    if config.check_matrices:
        record.x_reports, record.y_report = scheme.check_matrices()
        if not record.matrices_ok:
            log.warning("sweep matrices fail the M-matrix check at tau=%g", tau)
    if 0 in config.snapshot_steps:
        record.snapshots[0] = Field2D(u.copy(), 0.0)
    loads = []
    for k in range(K):
        t = bnd.times[k + 1]
        edges = _edges_at(bnd, k + 1)
        g1, g2 = scheme.sources(t)
        u_half = scheme.x_sweep(u, g1, edges[0], edges[1])
        rhs = scheme.y_rhs(u_half, g2, edges[2], edges[3])
        loads.append(float(rhs[1:-1].min()))
        u = scheme._y_factor.solve(rhs).T
        if not np.all(np.isfinite(u)):
            raise SolverError(f"non-finite values after step {k + 1} (t={t:g})")
        mins.append(float(u.min()))
        if k + 1 in config.snapshot_steps:
            record.snapshots[k + 1] = Field2D(u.copy(), t)
    record.final = Field2D(u, bnd.times[-1])
    record.min_values = np.array(mins)
    record.load_min = np.array(loads)
    return record


def write_field_csv(field_: Field2D, grid: Grid2D, path) -> None:
    x = grid.x_axis.nodes
    y = grid.y_axis.nodes
    v = field_.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "x", "y", "value"])
        for i in range(x.size):
            for j in range(y.size):
                w.writerow([i, j, f"{x[i]:.17g}", f"{y[j]:.17g}", f"{v[i, j]:.17g}"])
