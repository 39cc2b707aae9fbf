import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerineq.surface import (
    AWAY,
    TOWARD,
    RadialSurface,
    SurfaceFrame,
    curvature_sum,
    harmonic_jet,
    hessian_negative_semidefinite,
    spherical_basis,
    surface_frame,
    surface_jet,
)

from .oracles import height_fit_hessian

SURFACES = [
    RadialSurface(2.0),
    RadialSurface(1.3, ((1, 1, 0.02),)),
    RadialSurface(1.0, ((2, 0, 0.05),)),
    RadialSurface(1.2, ((2, -1, 0.03), (3, 2, 0.01), (1, 0, 0.02))),
]

thetas = st.floats(0.05, np.pi - 0.05)
phis = st.floats(0.0, 2 * np.pi)


def _frame(hxx, hxy, hyy):
    z = np.zeros(3)
    return SurfaceFrame(z, z, z, z, np.asarray(hxx), np.asarray(hxy), np.asarray(hyy), 1.0, AWAY)


def test_harmonic_table():
    rng = np.random.default_rng(0)
    t, p = rng.uniform(0.1, 3.0, 50), rng.uniform(0, 2 * np.pi, 50)
    s, c = np.sin(t), np.cos(t)
    table = {
        (0, 0): np.ones_like(t),
        (1, 0): c,
        (1, 1): s * np.cos(p),
        (1, -1): s * np.sin(p),
        (2, 0): (3 * c * c - 1) / 2,
        (2, 1): 3 * s * c * np.cos(p),
        (2, -1): 3 * s * c * np.sin(p),
        (2, 2): 3 * s * s * np.cos(2 * p),
        (2, -2): 3 * s * s * np.sin(2 * p),
    }
    for (l, m), expected in table.items():
        np.testing.assert_allclose(harmonic_jet(l, m, t, p)[0], expected, atol=1e-14, err_msg=str((l, m)))


def test_invalid_harmonic_rejected():
    with pytest.raises(ValueError):
        RadialSurface(1.0, ((1, 2, 0.01),))
    with pytest.raises(ValueError):
        RadialSurface(1.0, ((2, 0, 0.3),))  # amplitude too large for a gentle surface


def test_sphere_jet_is_constant():
    j = surface_jet(RadialSurface(2.0), 0.7, 2.1)
    assert j.R == 2.0
    for d in (j.R_t, j.R_p, j.R_tt, j.R_tp, j.R_pp):
        assert d == 0.0


def test_perturbed_jet_example():
    j = surface_jet(RadialSurface(1.3, ((1, 1, 0.02),)), np.pi / 2, 0.0)
    np.testing.assert_allclose([j.R, j.R_t, j.R_p, j.R_tt], [1.32, 0.0, 0.0, -0.02], atol=1e-15)


def test_pole_value_and_limit():
    surf = RadialSurface(1.0, ((2, 0, 0.05),))
    assert surface_jet(surf, 0.0, 0.3).R == pytest.approx(1.05, abs=1e-15)
    # approaching the pole along a meridian
    for eps in (1e-3, 1e-5):
        assert abs(surf.radius(eps, 1.0) - 1.05) < 0.2 * eps


@settings(max_examples=60, deadline=None)
@given(thetas, phis, st.sampled_from(range(len(SURFACES))))
def test_jet_matches_finite_differences(t, p, k):
    surf = SURFACES[k]
    h = 1e-5
    j = surface_jet(surf, t, p)
    tol = 1e-7 * surf.r0
    R = surf.radius
    assert abs((R(t + h, p) - R(t - h, p)) / (2 * h) - j.R_t) < tol
    assert abs((R(t, p + h) - R(t, p - h)) / (2 * h) - j.R_p) < tol
    # second derivatives from differences of the first to keep rounding at 1e-11
    jt = lambda dt, dp: surface_jet(surf, t + dt, p + dp)
    assert abs((jt(h, 0).R_t - jt(-h, 0).R_t) / (2 * h) - j.R_tt) < tol
    assert abs((jt(0, h).R_t - jt(0, -h).R_t) / (2 * h) - j.R_tp) < tol
    assert abs((jt(0, h).R_p - jt(0, -h).R_p) / (2 * h) - j.R_pp) < tol


def test_unit_sphere_frame():
    f = surface_frame(RadialSurface(1.0), np.pi / 3, 1.0, AWAY)
    e_r = spherical_basis(np.pi / 3, 1.0)[0]
    np.testing.assert_allclose(f.normal, e_r, atol=1e-15)
    np.testing.assert_allclose([f.hxx, f.hxy, f.hyy, f.area_ratio], [-1.0, 0.0, -1.0, 1.0], atol=1e-14)


def test_small_sphere_toward_origin_matches_oracle():
    surf = RadialSurface(0.5)
    f = surface_frame(surf, 1.1, 4.0, TOWARD)
    np.testing.assert_allclose(f.normal, -spherical_basis(1.1, 4.0)[0], atol=1e-15)
    np.testing.assert_allclose([f.hxx, f.hxy, f.hyy], [2.0, 0.0, 2.0], atol=1e-12)
    oracle = height_fit_hessian(surf, 1.1, 4.0, outward=False)
    np.testing.assert_allclose([f.hxx, f.hxy, f.hyy], oracle, atol=1e-6)


@pytest.mark.parametrize("surf", SURFACES[1:], ids=lambda s: str(s.terms))
@pytest.mark.parametrize("t,p", [(np.pi / 2, 0.0), (0.8, 2.0), (2.3, 5.1), (0.3, 0.9)])
def test_height_hessian_matches_fit_oracle(surf, t, p):
    for orient, outward in ((AWAY, True), (TOWARD, False)):
        f = surface_frame(surf, t, p, orient)
        oracle = height_fit_hessian(surf, t, p, outward=outward)
        np.testing.assert_allclose([f.hxx, f.hxy, f.hyy], oracle, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(thetas, phis, st.sampled_from(range(len(SURFACES))), st.sampled_from([AWAY, TOWARD]))
def test_frame_orthonormal_right_handed(t, p, k, orient):
    f = surface_frame(SURFACES[k], t, p, orient)
    B = np.stack([f.tangent1, f.tangent2, f.normal])
    np.testing.assert_allclose(B @ B.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(B) == pytest.approx(1.0, abs=1e-12)
    radial = f.point / np.linalg.norm(f.point)
    assert np.sign(f.normal @ radial) == (1 if orient == AWAY else -1)
    assert f.area_ratio * abs(f.normal_radial) == pytest.approx(1.0, abs=1e-12)


def test_area_ratio_identity_on_grid():
    T, P = np.meshgrid(np.linspace(0.01, np.pi - 0.01, 40), np.linspace(0, 2 * np.pi, 80), indexing="ij")
    for surf in SURFACES:
        f = surface_frame(surf, T, P)
        np.testing.assert_allclose(f.area_ratio * np.abs(f.normal_radial), 1.0, atol=1e-12)


def test_orientation_flip_negates():
    surf = SURFACES[3]
    a = surface_frame(surf, 1.2, 0.4, AWAY)
    b = surface_frame(surf, 1.2, 0.4, TOWARD)
    np.testing.assert_allclose(b.normal, -a.normal, atol=1e-15)
    # with t1 fixed the flip mirrors t2, so hxy keeps its sign relative to the new t2 basis
    np.testing.assert_allclose(b.tangent2, -a.tangent2, atol=1e-15)
    np.testing.assert_allclose([b.hxx, b.hyy], [-a.hxx, -a.hyy], atol=1e-13)
    # the Hessian as a tensor on the tangent plane is negated exactly
    Ha = a.hxx * np.outer(a.tangent1, a.tangent1) + a.hxy * (
        np.outer(a.tangent1, a.tangent2) + np.outer(a.tangent2, a.tangent1)
    ) + a.hyy * np.outer(a.tangent2, a.tangent2)
    Hb = b.hxx * np.outer(b.tangent1, b.tangent1) + b.hxy * (
        np.outer(b.tangent1, b.tangent2) + np.outer(b.tangent2, b.tangent1)
    ) + b.hyy * np.outer(b.tangent2, b.tangent2)
    np.testing.assert_allclose(Hb, -Ha, atol=1e-13)


def test_degenerate_jet_at_pole():
    with pytest.raises(ValueError, match="degenerate surface jet"):
        surface_frame(SURFACES[1], 0.0, 0.5)


def test_curvature_sum_examples():
    assert curvature_sum(surface_frame(RadialSurface(1.0), 1.0, 1.0)) == pytest.approx(-2.0, abs=1e-13)
    assert curvature_sum(surface_frame(RadialSurface(4.0), 2.0, 3.0)) == pytest.approx(-0.5, abs=1e-13)
    assert curvature_sum(_frame(0.3, 9.0, -1.7)) == pytest.approx(0.3 - 1.7)
    fit = height_fit_hessian(RadialSurface(4.0), 2.0, 3.0)
    assert fit[0] + fit[2] == pytest.approx(-0.5, abs=1e-6)


def test_semidefinite_examples():
    assert hessian_negative_semidefinite(surface_frame(RadialSurface(1.0), 1.0, 1.0), tol=0.0)
    assert not hessian_negative_semidefinite(_frame(0.1, 0.0, -1.0), tol=1e-9)
    assert not hessian_negative_semidefinite(_frame(-1.0, -1.05, -1.0), tol=1e-9)
    assert hessian_negative_semidefinite(_frame(-1.0, -0.99, -1.0), tol=1e-9)


def test_vectorized_matches_scalar():
    surf = SURFACES[3]
    T = np.array([[0.4, 1.0], [2.0, 2.9]])
    P = np.array([[0.1, 3.0], [4.0, 6.0]])
    fv = surface_frame(surf, T, P)
    for idx in np.ndindex(T.shape):
        fs = surface_frame(surf, T[idx], P[idx])
        np.testing.assert_allclose(fv.normal[idx], fs.normal, atol=1e-15)
        np.testing.assert_allclose([fv.hxx[idx], fv.hxy[idx], fv.hyy[idx]], [fs.hxx, fs.hxy, fs.hyy], atol=1e-15)
