"""End-to-end acceptance criteria.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line (shown even without
``-s``) and then asserts.  The full set takes a few minutes.
"""

import math
import time

import numpy as np
import pytest

from hwlod.analysis import (
    MeshSpec,
    StudyConfig,
    convergence_rate,
    grid_norms,
    run_convergence_study,
    sample_on,
    table_studies,
)
from hwlod.bs1d import Bs1dProblem, solve_bs1d
from hwlod.fvcore import interior_flux_weights
from hwlod.lod2d import LodConfig, LodScheme, solve
from hwlod.mesh import Grid2D, Uniform, build_axis
from hwlod.model import MarketParams, Ramp, manufactured_case
from hwlod.problems import MANUFACTURED_SETS, UNIT_BOX, manufactured, tp1, tp2
from hwlod.tridiag import TridiagonalSystem, dense_solve, thomas_solve

from test_bs1d import bs_call
from test_model import _pde_residual_fd

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, started):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'} ({time.time() - started:.0f}s): {detail}")
        assert ok, detail
    return emit


def _rates(rows, key):
    return [r.rates[key] for r in rows[1:]]


def _fmt(xs):
    return "[" + ", ".join(f"{x:.3f}" for x in xs) + "]"


def test_1_spatial_convergence(report):
    t0 = time.time()
    prob = manufactured(MANUFACTURED_SETS["b"], UNIT_BOX)
    ladder = [MeshSpec(f"{n}", Uniform(n), Uniform(n), 4096) for n in (8, 16, 32, 64, 128)]
    rows = run_convergence_study(StudyConfig(prob, ladder, ("c", "l2")))
    rc = _rates(rows, "c")
    from32 = rc[1:]
    e64 = rows[3].errors["c"]
    ok = all(0.85 <= r <= 1.15 for r in from32) and 3.867e-3 / 2 <= e64 <= 3.867e-3 * 2
    report(1, ok, f"C-norm RC {_fmt(rc)} (checked from 32^2: {_fmt(from32)}), E_inf(64)={e64:.4e} vs 3.867e-3", t0)


def test_2_temporal_convergence(report):
    t0 = time.time()
    prob = manufactured(MANUFACTURED_SETS["b"], UNIT_BOX)
    ladder = [MeshSpec(f"K={k}", Uniform(512), Uniform(512), k) for k in (16, 32, 64, 128, 256)]
    rows = run_convergence_study(StudyConfig(prob, ladder, ("c",)))
    rc = _rates(rows, "c")
    e256 = rows[-1].errors["c"]
    ok = all(0.9 <= r <= 1.1 for r in rc) and 1.862e-3 / 2 <= e256 <= 1.862e-3 * 2
    report(2, ok, f"C-norm RC {_fmt(rc)}, E_inf(K=256)={e256:.4e} vs 1.862e-3", t0)


def test_3_graded_mesh_gain(report):
    t0 = time.time()
    (_, graded), (_, uniform) = table_studies("t3")
    rg = _rates(run_convergence_study(graded), "rmse")
    ru = _rates(run_convergence_study(uniform), "rmse")
    ok = all(r >= 1.6 for r in rg[-2:]) and all(r <= 1.5 for r in ru[-2:])
    report(3, ok, f"RMSE RC sinh-origin {_fmt(rg)} vs uniform {_fmt(ru)} (two finest: >=1.6 vs <=1.5)", t0)


def test_4_tp1_self_convergence(report):
    t0 = time.time()
    (_, study), = table_studies("t4")
    rows = run_convergence_study(study)
    rc = _rates(rows, "c")
    ok = rc[-1] >= 1.0 and rc[-1] > rc[0]
    trend = "increasing" if all(b > a for a, b in zip(rc, rc[1:])) else "non-monotone"
    report(4, ok, f"C-norm RC {_fmt(rc)} ({trend}) vs 512x512x1024 reference", t0)


def test_5_positivity(report):
    t0 = time.time()
    mins = {}
    for prob in (tp1(), tp2()):
        box = prob.box
        grid = Grid2D(build_axis(Uniform(64), 0.0, box.X), build_axis(Uniform(64), box.zeta, box.Y))
        rec = solve(prob, grid, LodConfig(128))
        assert rec.min_values.size == 129
        mins[prob.name] = float(rec.min_values.min())
    ok = all(m >= -1e-12 for m in mins.values())
    report(5, ok, "min over all 129 levels: " + ", ".join(f"{k}={v:.3g}" for k, v in mins.items()), t0)


def test_6_m_matrix_property(report):
    t0 = time.time()
    prob = tp1()
    box = prob.box
    grid = Grid2D(build_axis(Uniform(32), 0.0, box.X), build_axis(Uniform(32), box.zeta, box.Y))
    xr, yr = LodScheme(grid, prob.params, 1e-2).check_matrices()
    ok = all(xr) and bool(yr)
    # a deliberately large step: report whatever the check and the loads say
    rec = solve(prob, grid, LodConfig(1))
    big = (f"tau=1: matrices {'pass' if rec.matrices_ok else 'FAIL'}, "
           f"min y-sweep load {rec.load_min.min():.3g}, min field {rec.min_over_time:.3g}")
    report(6, ok, f"tau=1e-2: {len(xr)} x-sweep systems and the y-sweep system pass; {big}", t0)


def test_7_oracle_suites(report):
    t0 = time.time()
    notes = []
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        n = 64
        sub = rng.uniform(-1.0, 1.0, n - 1)
        sup = rng.uniform(-1.0, 1.0, n - 1)
        off = np.abs(np.concatenate(([0.0], sub))) + np.abs(np.concatenate((sup, [0.0])))
        diag = off + rng.uniform(0.1, 2.0, n)
        sys = TridiagonalSystem(sub, diag, sup, rng.normal(size=n))
        ref = dense_solve(sys)
        worst = max(worst, np.max(np.abs(thomas_solve(sys) - ref)) / np.max(np.abs(ref)))
    ok_thomas = worst <= 1e-12
    notes.append(f"thomas rel err {worst:.1e}")

    errs = []
    for n in (256, 512):
        ax = build_axis(Uniform(n), 0.0, 300.0)
        u = solve_bs1d(Bs1dProblem(0.6, 0.1, Ramp(57.0), ax, n, 1.0, right_edge="discounted"))[-1]
        band = (ax.nodes >= 28.5) & (ax.nodes <= 85.5)
        ref = bs_call(ax.nodes[band], 57.0, 0.1, 0.6, 1.0)
        errs.append(float(np.max(np.abs(u[band] - ref) / ref)))
    ok_bs = errs[-1] <= 0.02 and errs[-1] < errs[0]
    notes.append(f"1D vs closed form {errs[0]:.2e} -> {errs[-1]:.2e}")

    base = interior_flux_weights(0.5, 0.0, 1.0, 2.0)
    jump = 0.0
    for b in (1e-6, -1e-6, 1e-8, -1e-8):
        fw = interior_flux_weights(0.5, b, 1.0, 2.0)
        jump = max(jump, abs(fw.w_hi - base.w_hi), abs(fw.w_lo - base.w_lo))
    ok_flux = jump <= 1e-6
    notes.append(f"flux jump at b=0 {jump:.1e}")

    p = MarketParams(0.1, 1.0, 0.1, 0.9, 0.0)
    x, y, t = rng.uniform(0.1, 1.0, (3, 100))
    g = manufactured_case(p, x, y, t)[1]
    e1 = np.max(np.abs(_pde_residual_fd(p, x, y, t, 2e-3) - g))
    e2 = np.max(np.abs(_pde_residual_fd(p, x, y, t, 1e-3) - g))
    ok_g = 3.0 < e1 / e2 < 5.0 and e2 < 1e-6
    notes.append(f"source residual ratio {e1 / e2:.2f}")

    report(7, ok_thomas and ok_bs and ok_flux and ok_g, "; ".join(notes), t0)


def test_8_degenerate_zero_floor(report):
    t0 = time.time()
    (_, study), = table_studies("t6")
    ref_grid = study.reference.grid(study.problem.box)
    ref = solve(study.problem, ref_grid, LodConfig(study.reference.K, check_matrices=False))
    errs, mins = [], [ref.min_over_time]
    finite = bool(np.all(np.isfinite(ref.final.values)))
    for spec in study.ladder:
        grid = spec.grid(study.problem.box)
        rec = solve(study.problem, grid, LodConfig(spec.K, check_matrices=False))
        finite &= bool(np.all(np.isfinite(rec.final.values)))
        mins.append(rec.min_over_time)
        err = rec.final.values - sample_on(ref.final.values, ref_grid, grid)
        errs.append(grid_norms(err, grid, study.region).c_norm)
    rc = [convergence_rate(a, b) for a, b in zip(errs, errs[1:])]
    ok = finite and rc[-1] >= 1.0 and rc[-1] > rc[0] and min(mins) >= -1e-12
    report(8, ok, f"no NaN={finite}, C-norm RC {_fmt(rc)}, min value {min(mins):.3g}", t0)
