"""Tridiagonal systems: Thomas elimination, a dense reference and M-matrix checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_FLOOR = 1e-300
DOMINANCE_RTOL = 1e-12


class SingularSystemError(ArithmeticError):
    def __init__(self, row: int, pivot: float, system: int | None = None):
        where = f"row {row}" if system is None else f"row {row} of system {system}"
        super().__init__(f"zero pivot {pivot!r} in {where}")
        self.row = row
        self.pivot = pivot
        self.system = system


@dataclass
class TridiagonalSystem:
    """Rows ``A_i u_{i-1} + B_i u_i + C_i u_{i+1} = F_i`` for i = 0..n.

    ``sub`` holds A_1..A_n, ``super`` holds C_0..C_{n-1}.
    """

    sub: np.ndarray
    diag: np.ndarray
    super: np.ndarray
    rhs: np.ndarray
    dirichlet_rows: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.sub = np.asarray(self.sub, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.super = np.asarray(self.super, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.dirichlet_rows = frozenset(int(r) for r in self.dirichlet_rows)
        n = self.diag.size
        if self.sub.size != n - 1 or self.super.size != n - 1 or self.rhs.size != n:
            raise ValueError(
                f"inconsistent lengths: sub={self.sub.size}, diag={n}, "
                f"super={self.super.size}, rhs={self.rhs.size}"
            )
        for r in self.dirichlet_rows:
            if not 0 <= r < n:
                raise ValueError(f"Dirichlet row {r} out of range")
            if self.diag[r] != 1.0 or (r > 0 and self.sub[r - 1] != 0.0) or (
                r < n - 1 and self.super[r] != 0.0
            ):
                raise ValueError(f"Dirichlet row {r} is not an identity row")

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        a += np.diag(self.sub, -1)
        a += np.diag(self.super, 1)
        return a


class TridiagonalFactor:
    """Forward-elimination factors of a batch of tridiagonal matrices.

    Arrays are laid out (n, batch) with full-length diagonals: ``lower[0]``
    and ``upper[-1]`` are ignored.  A batch of width one broadcasts against
    any number of right-hand sides.
    """

    def __init__(self, lower, diag, upper):
        lower = np.asarray(lower, dtype=float)
        diag = np.asarray(diag, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if diag.ndim == 1:
            lower, diag, upper = lower[:, None], diag[:, None], upper[:, None]
        n = diag.shape[0]
        inv = np.empty_like(diag)
        cp = np.zeros_like(diag)
        pivot = diag[0]
        _check_pivot(pivot, 0)
        inv[0] = 1.0 / pivot
        for i in range(1, n):
            cp[i - 1] = upper[i - 1] * inv[i - 1]
            pivot = diag[i] - lower[i] * cp[i - 1]
            _check_pivot(pivot, i)
            inv[i] = 1.0 / pivot
        self.n = n
        self._lower = lower
        self._inv = inv
        self._cp = cp

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        squeeze = rhs.ndim == 1
        d = rhs[:, None] if squeeze else rhs
        out = np.empty(np.broadcast_shapes(d.shape, self._inv.shape))
        lower, inv, cp = self._lower, self._inv, self._cp
        out[0] = d[0] * inv[0]
        for i in range(1, self.n):
            out[i] = (d[i] - lower[i] * out[i - 1]) * inv[i]
        for i in range(self.n - 2, -1, -1):
            out[i] -= cp[i] * out[i + 1]
        return out[:, 0] if squeeze and out.shape[1] == 1 else out


def _check_pivot(pivot, row: int) -> None:
    p = np.atleast_1d(pivot)
    bad = (np.abs(p) < PIVOT_FLOOR) | ~np.isfinite(p)
    if np.any(bad):
        b = int(np.argmax(bad))
        raise SingularSystemError(row, float(p[b]), b if p.size > 1 else None)


def _full_diagonals(sys: TridiagonalSystem):
    lower = np.concatenate(([0.0], sys.sub))
    upper = np.concatenate((sys.super, [0.0]))
    return lower, sys.diag, upper


def thomas_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Solve by Thomas elimination without pivoting."""
    lower, diag, upper = _full_diagonals(sys)
    return TridiagonalFactor(lower, diag, upper).solve(sys.rhs)


def dense_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Reference solve with dense LU and partial pivoting (LAPACK)."""
    return np.linalg.solve(sys.to_dense(), sys.rhs)


@dataclass(frozen=True)
class MMatrixReport:
    is_m_matrix_after_reduction: bool
    offending_rows: tuple = ()
    folded_rows: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.is_m_matrix_after_reduction


def check_m_matrix(sys: TridiagonalSystem) -> MMatrixReport:
    """Test the Dirichlet-reduced matrix for the M-matrix sign/dominance pattern.

    Leading and trailing Dirichlet rows are eliminated by substitution.  If the
    first remaining row was coupled to the eliminated boundary through a
    positive coefficient, that row is additionally folded into its successor
    (Schur complement).  The reduced matrix must then have a positive diagonal,
    nonpositive off-diagonals and weak row dominance, strict in some row.
    """
    n = sys.size
    lower, diag, upper = _full_diagonals(sys)
    lower, diag, upper = lower.copy(), diag.copy(), upper.copy()
    dr = sys.dirichlet_rows
    lo = 0
    while lo < n and lo in dr:
        lo += 1
    hi = n - 1
    while hi >= lo and hi in dr:
        hi -= 1
    if lo > hi:
        return MMatrixReport(True, reason="all rows are Dirichlet rows")

    folded = ()
    if lo > 0 and lower[lo] > 0.0 and hi > lo:
        if diag[lo] <= 0.0:
            return MMatrixReport(False, (lo,), reason="nonpositive pivot in folded row")
        diag[lo + 1] -= upper[lo] * lower[lo + 1] / diag[lo]
        folded = (lo,)
        lo += 1

    rows = np.arange(lo, hi + 1)
    d = diag[rows]
    a = np.where(rows > lo, lower[rows], 0.0)
    c = np.where(rows < hi, upper[rows], 0.0)
    scale = np.maximum.reduce([np.abs(d), np.abs(a), np.abs(c)])
    tol = DOMINANCE_RTOL * np.where(scale > 0.0, scale, 1.0)
    margin = np.abs(d) - np.abs(a) - np.abs(c)

    problems = []
    bad_diag = d <= tol
    bad_sign = (a > tol) | (c > tol)
    bad_dom = margin < -tol
    for flag, why in ((bad_diag, "nonpositive diagonal"), (bad_sign, "positive off-diagonal"),
                      (bad_dom, "not diagonally dominant")):
        if np.any(flag):
            problems.append((int(rows[np.argmax(flag)]), why))
    offending = tuple(int(r) for r in rows[bad_diag | bad_sign | bad_dom])
    if problems:
        first = min(problems)
        return MMatrixReport(False, offending, folded, f"row {first[0]}: {first[1]}")
    if not np.any(margin > tol):
        return MMatrixReport(False, (), folded, "no strictly dominant row")
    return MMatrixReport(True, (), folded)
