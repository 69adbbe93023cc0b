"""Error norms, double-mesh convergence rates and the convergence-table studies."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .lod2d import LodConfig, Problem, SolveRecord, solve
from .mesh import AxisSpec, Grid2D, SinhOrigin, SinhStrike, Uniform, build_axis
from .model import DomainBox
from .problems import MANUFACTURED_SETS, UNIT_BOX, manufactured, tp1, tp2

NORM_LABELS = {"c": "E_inf", "l2": "E_2", "rmse": "E_rmse"}


@dataclass(frozen=True)
class Region:
    x: tuple[float, float]
    y: tuple[float, float]

    def mask(self, grid: Grid2D) -> np.ndarray:
        """Nodes inside the closed rectangle."""
        xx, yy = grid.mesh()
        return (xx >= self.x[0]) & (xx <= self.x[1]) & (yy >= self.y[0]) & (yy <= self.y[1])


@dataclass(frozen=True)
class Norms:
    c_norm: float
    l2_norm: float
    rmse: float
    n_region: int

    def get(self, key: str) -> float:
        return {"c": self.c_norm, "l2": self.l2_norm, "rmse": self.rmse}[key]


def grid_norms(err, grid: Grid2D, region: Region | None = None) -> Norms:
    """Max norm and dual-cell weighted L2 norm over all nodes, RMSE over ``region``."""
    err = np.asarray(getattr(err, "values", err), dtype=float)
    if err.shape != grid.shape:
        raise ValueError(f"error field shape {err.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(err)):
        raise ValueError("error field contains non-finite values")
    c = float(np.max(np.abs(err)))
    l2 = float(np.sqrt(np.sum(grid.cell_areas() * err**2)))
    mask = np.ones(err.shape, dtype=bool) if region is None else region.mask(grid)
    n = int(mask.sum())
    if n == 0:
        raise ValueError(f"region {region} contains no mesh nodes")
    rmse = float(np.sqrt(np.mean(err[mask] ** 2)))
    return Norms(c, l2, rmse, n)


def convergence_rate(e_coarse: float, e_fine: float) -> float:
    """log2(e_coarse / e_fine); NaN marks an undefined rate."""
    if not (e_coarse > 0.0 and e_fine > 0.0):
        return math.nan
    return math.log2(e_coarse / e_fine)


@dataclass(frozen=True)
class MeshSpec:
    label: str
    x: AxisSpec
    y: AxisSpec
    K: int

    def grid(self, box: DomainBox) -> Grid2D:
        return Grid2D(build_axis(self.x, 0.0, box.X), build_axis(self.y, box.zeta, box.Y))


@dataclass
class ConvergenceRow:
    label: str
    errors: dict
    rates: dict = field(default_factory=dict)


@dataclass
class StudyConfig:
    problem: Problem
    ladder: Sequence[MeshSpec]
    norms: tuple = ("c", "l2")
    region: Region | None = None
    reference: MeshSpec | None = None
    weight_x: float = 0.5


def sample_on(values: np.ndarray, src: Grid2D, dst: Grid2D) -> np.ndarray:
    """Restrict a field to another grid: injection when nested, else bilinear."""
    xi = _nested_index(src.x_axis.nodes, dst.x_axis.nodes)
    yi = _nested_index(src.y_axis.nodes, dst.y_axis.nodes)
    if xi is not None and yi is not None:
        return values[np.ix_(xi, yi)]
    interp = RegularGridInterpolator((src.x_axis.nodes, src.y_axis.nodes), values)
    xx, yy = dst.mesh()
    return interp(np.stack([xx.ravel(), yy.ravel()], axis=-1)).reshape(xx.shape)


def _nested_index(fine: np.ndarray, coarse: np.ndarray, tol: float = 1e-12):
    idx = np.clip(np.searchsorted(fine, coarse), 0, fine.size - 1)
    left = np.clip(idx - 1, 0, fine.size - 1)
    idx = np.where(np.abs(fine[left] - coarse) < np.abs(fine[idx] - coarse), left, idx)
    scale = max(1.0, float(np.max(np.abs(fine))))
    if np.all(np.abs(fine[idx] - coarse) <= tol * scale):
        return idx
    return None


def run_convergence_study(study: StudyConfig, on_row: Callable | None = None) -> list[ConvergenceRow]:
    """Errors on each ladder mesh against the exact solution or a fine reference run."""
    if len(study.ladder) < 2:
        raise ValueError("a convergence study needs at least two meshes")
    problem = study.problem
    box = problem.box
    ref = None
    if study.reference is not None:
        ref_grid = study.reference.grid(box)
        ref = (ref_grid, _run(problem, ref_grid, study.reference.K, study.weight_x).final.values)
    elif problem.exact is None:
        raise ValueError("problem has no exact solution; a reference mesh is required")

    rows: list[ConvergenceRow] = []
    for spec in study.ladder:
        grid = spec.grid(box)
        rec = _run(problem, grid, spec.K, study.weight_x)
        if ref is None:
            xx, yy = grid.mesh()
            target = problem.exact(xx, yy, box.T)
        else:
            target = sample_on(ref[1], ref[0], grid)
        norms = grid_norms(rec.final.values - target, grid, study.region)
        row = ConvergenceRow(spec.label, {k: norms.get(k) for k in study.norms})
        if rows:
            prev = rows[-1]
            row.rates = {k: convergence_rate(prev.errors[k], row.errors[k]) for k in study.norms}
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return rows


def _run(problem: Problem, grid: Grid2D, K: int, weight_x: float) -> SolveRecord:
    return solve(problem, grid, LodConfig(K, weight_x=weight_x, check_matrices=False))


# --------------------------------------------------------------------------
# Table layouts
# --------------------------------------------------------------------------


@dataclass
class TableBlock:
    title: str
    norms: tuple
    rows: list


def format_table(blocks: Sequence[TableBlock]) -> str:
    out = io.StringIO()
    for block in blocks:
        out.write(f"{block.title}\n")
        head = f"{'mesh':>14}"
        for k in block.norms:
            head += f"  {NORM_LABELS[k]:>11}  {'RC':>6}"
        out.write(head + "\n")
        for row in block.rows:
            line = f"{row.label:>14}"
            for k in block.norms:
                rc = row.rates.get(k)
                rc_s = "-" if rc is None else ("nan" if math.isnan(rc) else f"{rc:.3f}")
                line += f"  {row.errors[k]:11.4e}  {rc_s:>6}"
            out.write(line + "\n")
        out.write("\n")
    return out.getvalue()


def write_table_csv(blocks: Sequence[TableBlock], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["block", "mesh", "norm", "error", "rc"])
        for block in blocks:
            for row in block.rows:
                for k in block.norms:
                    rc = row.rates.get(k)
                    w.writerow([block.title, row.label, k, f"{row.errors[k]:.17g}",
                                "" if rc is None else f"{rc:.17g}"])


def _uniform_ladder(ns, box_k: Callable[[int], int], m_of: Callable[[int], int] = lambda n: n):
    return [MeshSpec(f"{n}x{m_of(n)}", Uniform(n), Uniform(m_of(n)), box_k(n)) for n in ns]


def _ladder(ns, max_n):
    return [n for n in ns if n <= max_n] if max_n else list(ns)


def table_studies(table_id: str, max_n: int | None = None, ref_n: int | None = None) -> list[tuple[str, StudyConfig]]:
    """Study definitions reproducing the layouts of the six convergence tables.

    ``max_n`` truncates the ladders and ``ref_n`` shrinks the reference mesh
    for quick runs; the defaults are the full published configurations.
    """
    if table_id == "t1":
        return [
            (f"manufactured rho={p.rho} r={p.r} mu={p.mu}, K=4096",
             StudyConfig(manufactured(p, UNIT_BOX),
                         _uniform_ladder(_ladder((8, 16, 32, 64, 128), max_n), lambda n: 4096),
                         norms=("c", "l2")))
            for p in MANUFACTURED_SETS.values()
        ]
    if table_id == "t2":
        n = min(512, max_n) if max_n else 512
        return [
            (f"manufactured rho={p.rho} r={p.r} mu={p.mu}, {n}x{n}",
             StudyConfig(manufactured(p, UNIT_BOX),
                         [MeshSpec(f"K={k}", Uniform(n), Uniform(n), k) for k in (16, 32, 64, 128, 256)],
                         norms=("c", "l2")))
            for p in MANUFACTURED_SETS.values()
        ]
    if table_id == "t3":
        box = DomainBox(X=100.0, Y=1.0, T=1.0, zeta=0.01)
        prob = manufactured(MANUFACTURED_SETS["b"], box)
        region = Region((0.0, 0.1 * box.X), (box.zeta, box.Y))
        ns = _ladder((16, 32, 64, 128), max_n)
        graded = [MeshSpec(f"{n}x128", SinhOrigin(n, box.X / 700.0), Uniform(128), 1024) for n in ns]
        uniform = [MeshSpec(f"{n}x128", Uniform(n), Uniform(128), 1024) for n in ns]
        return [
            ("sinh-origin x-mesh, d=X/700, K=1024", StudyConfig(prob, graded, ("c", "rmse"), region)),
            ("uniform x-mesh, K=1024", StudyConfig(prob, uniform, ("c", "rmse"), region)),
        ]
    if table_id in ("t4", "t6"):
        zeta = 0.01 if table_id == "t4" else 0.0
        prob = tp1(zeta)
        box = prob.box
        E = prob.payoff.E
        rn = ref_n or (512 if table_id == "t4" else 256)
        top = (8, 16, 32, 64, 128, 256) if table_id == "t4" else (8, 16, 32, 64, 128)
        ns = [n for n in _ladder(top, max_n) if n < rn]
        region = Region((0.9 * E, 1.1 * E), (box.zeta, box.Y))
        ref = MeshSpec("reference", Uniform(rn), Uniform(rn), 2 * rn)
        return [(f"TP1 zeta={zeta}, NxNx2N vs {rn}x{rn}x{2 * rn}",
                 StudyConfig(prob, _uniform_ladder(ns, lambda n: 2 * n), ("c", "rmse"), region, ref))]
    if table_id == "t5":
        prob = tp2()
        box = prob.box
        E = prob.payoff.E
        rn = ref_n or 512
        ns = [n for n in _ladder((32, 64, 128, 256), max_n) if n < rn]
        region = Region((0.9 * E, 1.1 * E), (box.zeta, box.Y))
        out = []
        for title, make in (("sinh-strike x-mesh, c=E/5", lambda n: SinhStrike(n, E, E / 5.0)),
                            ("uniform x-mesh", Uniform)):
            ladder = [MeshSpec(str(n), make(n), Uniform(n), 2 * n) for n in ns]
            ref = MeshSpec("reference", make(rn), Uniform(rn), 2 * rn)
            out.append((f"TP2 {title}, NxNx2N vs {rn}x{rn}x{2 * rn}",
                        StudyConfig(prob, ladder, ("c", "rmse"), region, ref)))
        return out
    raise ValueError(f"unknown table id {table_id!r}; expected t1..t6")


def run_table(table_id: str, max_n: int | None = None, ref_n: int | None = None,
              on_row: Callable | None = None) -> list[TableBlock]:
    blocks = []
    for title, study in table_studies(table_id, max_n, ref_n):
        rows = run_convergence_study(study, on_row)
        blocks.append(TableBlock(title, study.norms, rows))
    return blocks
