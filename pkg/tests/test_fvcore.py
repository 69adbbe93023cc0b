import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hwlod.fvcore import face_fluxes, fitted_operator, interior_flux_weights, origin_flux_weights
from hwlod.mesh import SinhOrigin, Uniform, build_axis
from hwlod.tridiag import TridiagonalSystem, thomas_solve


def _bvp_flux(a, b, z_lo, z_hi, u_lo, u_hi):
    """Constant flux w of a z v' + b v = w with v(z_lo)=u_lo, v(z_hi)=u_hi.

    Solutions are v = w/b + C z^(-b/a); the two end conditions give a 2x2
    linear system in (w, C).
    """
    al = b / a
    m = np.array([[1.0 / b, z_lo ** (-al)], [1.0 / b, z_hi ** (-al)]])
    w, _ = np.linalg.solve(m, [u_lo, u_hi])
    return w


def test_alpha_one_example():
    fw = interior_flux_weights(0.5, 0.5, 1.0, 2.0)
    assert fw.w_hi == pytest.approx(1.0, rel=1e-14)
    assert fw.w_lo == pytest.approx(-0.5, rel=1e-14)
    assert _bvp_flux(0.5, 0.5, 1.0, 2.0, 0.0, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert _bvp_flux(0.5, 0.5, 1.0, 2.0, 1.0, 0.0) == pytest.approx(-0.5, rel=1e-12)


def test_pure_diffusion_limit():
    fw = interior_flux_weights(0.5, 0.0, 1.0, 2.0)
    lim = 0.5 / math.log(2.0)
    assert fw.w_hi == pytest.approx(lim, rel=1e-15)
    assert fw.w_lo == pytest.approx(-lim, rel=1e-15)
    assert lim == pytest.approx(0.72135, abs=1e-5)
    for b in (1e-9, -1e-9, 1e-6, -1e-6):
        near = interior_flux_weights(0.5, b, 1.0, 2.0)
        assert near.w_hi == pytest.approx(lim, abs=1e-6)
        assert near.w_lo == pytest.approx(-lim, abs=1e-6)


@pytest.mark.parametrize("eps", [1e-6, 1e-8])
def test_continuity_across_zero_convection(eps):
    base = interior_flux_weights(0.3, 0.0, 0.7, 0.9)
    for b in (eps, -eps):
        fw = interior_flux_weights(0.3, b, 0.7, 0.9)
        assert abs(fw.w_hi - base.w_hi) <= 10.0 * eps
        assert abs(fw.w_lo - base.w_lo) <= 10.0 * eps


@settings(max_examples=200)
@given(a=st.floats(1e-3, 10.0), b=st.floats(1e-6, 10.0), z_lo=st.floats(1e-3, 50.0),
       ratio=st.floats(1.001, 4.0))
def test_sign_property(a, b, z_lo, ratio):
    # beyond exp(700) the upwind weight underflows to zero
    assume(b / a * math.log(ratio) < 700.0)
    z_hi = z_lo * ratio
    fw = interior_flux_weights(a, b, z_lo, z_hi)
    assert fw.w_hi > 0.0 and fw.w_lo < 0.0
    # either sign of b keeps the M-matrix sign pattern
    fw = interior_flux_weights(a, -b, z_lo, z_hi)
    assert fw.w_hi >= 0.0 and fw.w_lo < 0.0


@settings(max_examples=200)
@given(a=st.floats(0.1, 5.0), b=st.floats(-5.0, 5.0), z_lo=st.floats(0.05, 10.0),
       ratio=st.floats(1.01, 3.0), u_lo=st.floats(-10.0, 10.0), u_hi=st.floats(-10.0, 10.0))
def test_weights_reproduce_local_bvp_flux(a, b, z_lo, ratio, u_lo, u_hi):
    # keep the 2x2 oracle well conditioned
    assume(1e-3 < abs(b / a) and abs(b / a * math.log(ratio)) < 20.0)
    z_hi = z_lo * ratio
    fw = interior_flux_weights(a, b, z_lo, z_hi)
    got = fw.w_hi * u_hi + fw.w_lo * u_lo
    exact = _bvp_flux(a, b, z_lo, z_hi, u_lo, u_hi)
    assert got == pytest.approx(exact, rel=1e-10, abs=1e-10 * (abs(u_lo) + abs(u_hi)) * (abs(fw.w_hi) + abs(fw.w_lo)))


def test_large_exponent_stays_finite():
    fw = interior_flux_weights(1e-14, 0.1, 0.5, 1.0, alpha=1e8)
    assert (fw.w_hi, fw.w_lo) == (pytest.approx(0.1), 0.0)
    fw = interior_flux_weights(1e-14, -0.1, 0.5, 1.0, alpha=-1e8)
    assert (fw.w_hi, fw.w_lo) == (0.0, pytest.approx(-0.1))


def test_smooth_diffusion_flux_consistency():
    a = 0.7
    errs = []
    for h in (0.1, 0.05, 0.025):
        z_lo, z_hi = 1.0, 1.0 + h
        fw = interior_flux_weights(a, 0.0, z_lo, z_hi)
        got = fw.w_hi * z_hi + fw.w_lo * z_lo   # u = z, u' = 1
        errs.append(abs(got - a * 0.5 * (z_lo + z_hi)))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 1e-3


def test_interior_weights_reject_origin():
    with pytest.raises(ValueError):
        interior_flux_weights(0.5, 0.1, 0.0, 1.0)


def test_origin_flux_examples():
    fw = origin_flux_weights(1.0, 0.0)
    assert (fw.w_hi, fw.w_lo) == (0.5, -0.5)
    fw = origin_flux_weights(0.005, -0.045)
    assert fw.w_hi == pytest.approx(-0.02, abs=1e-15)
    # w_lo = -0.5 (a - b) = -0.5 * 0.05
    assert fw.w_lo == pytest.approx(-0.025, abs=1e-15)
    assert origin_flux_weights(0.3, 0.3).w_lo == 0.0


def test_face_fluxes_use_origin_formula_on_first_interval():
    ax = build_axis(Uniform(4), 0.0, 1.0)
    fl = face_fluxes(ax, 0.5, 0.2)
    o = origin_flux_weights(0.5, 0.2)
    mid = ax.midpoints[1]
    assert fl.w_hi[0, 0] == pytest.approx(mid * o.w_hi)
    assert fl.w_lo[0, 0] == pytest.approx(mid * o.w_lo)
    inner = interior_flux_weights(0.5, 0.2, 0.25, 0.5)
    assert fl.w_hi[1, 0] == pytest.approx(ax.midpoints[2] * inner.w_hi)


def test_constant_state_is_preserved_without_convection_or_reaction():
    ax = build_axis(SinhOrigin(7, 1.0 / 7.0), 0.0, 1.0)
    op = fitted_operator(ax, 0.4, 0.0, 0.0)
    # pure diffusion: each interior row of the operator sums to zero
    np.testing.assert_allclose((op.lower + op.center + op.upper)[1:-1, 0], 0.0, atol=1e-14)
    tau, kappa = 1e-2, 3.7
    hb = ax.dual_widths
    diag = hb / tau + op.center[:, 0]
    sub = op.lower[1:, 0].copy()
    sup = op.upper[:-1, 0].copy()
    diag[0] = diag[-1] = 1.0
    sup[0] = sub[-1] = 0.0
    rhs = hb / tau * kappa
    rhs[0] = rhs[-1] = kappa
    u = thomas_solve(TridiagonalSystem(sub, diag, sup, rhs, frozenset({0, 7})))
    np.testing.assert_allclose(u, kappa, rtol=1e-13)


def test_operator_reaction_enters_diagonal():
    ax = build_axis(Uniform(6), 1.0, 2.0)
    a = fitted_operator(ax, 0.5, 0.1, 0.0)
    b = fitted_operator(ax, 0.5, 0.1, 2.0)
    np.testing.assert_allclose((b.center - a.center)[1:-1, 0], 2.0 * ax.dual_widths[1:-1])
