import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from conftest import make_point
from morsegap import (CallableSurface, DegeneracyEnhancedSurface,
                      GroverSurface, MatrixSurface, ReducedPSpinFamily, Region,
                      ScaledSurface, SignPatternError, ToyThreePointSurface,
                      ValidationError, asymptote_angle, find_critical_points,
                      gap_from_saddle, grover_family, local_model)


# -------------------------------------------------------------------- finder

def test_grover_unique_saddle():
    res = find_critical_points(GroverSurface(5), Region(0, 1, -1, 2))
    assert len(res.points) == 1
    p = res.points[0]
    assert p.kind == "saddle"
    assert p.s == pytest.approx(0.5, abs=1e-10)
    assert p.lam == pytest.approx(0.5, abs=1e-10)
    assert p.morse_index == 1


def test_grover_stability_under_density_and_ds():
    region = Region(0, 1, -1, 2)
    for density in (16, 32, 64):
        res = find_critical_points(GroverSurface(5), region,
                                   grid_density=density)
        assert [p.kind for p in res.points] == ["saddle"]
    fam = grover_family(5)
    for ds in (1e-3, 1e-4, 1e-5):
        surf = MatrixSurface(fam, 0.0, domain=region, ds=ds)
        res = find_critical_points(surf, region)
        assert [p.kind for p in res.points] == ["saddle"]
        assert res.points[0].s == pytest.approx(0.5, abs=1e-8)


def test_degeneracy_strip_reference_points():
    surf = DegeneracyEnhancedSurface(5, 1.0)
    res = find_critical_points(surf, Region(0.475, 0.525, 0.0, 3.0))
    assert [p.kind for p in res.points] == ["maximum", "saddle"]
    p_max, p_sad = res.points
    # independent oracle: stationary lambdas of the cubic slice at s = 1/2
    c = surf.lambda_poly_coeffs(0.5)
    lam_lo, lam_hi = np.sort(npoly.polyroots(c[1:] * np.arange(1, 4)).real)
    assert p_max.s == pytest.approx(0.5, abs=1e-9)
    assert p_sad.s == pytest.approx(0.5, abs=1e-9)
    assert p_max.lam == pytest.approx(lam_lo, abs=1e-9)
    assert p_sad.lam == pytest.approx(lam_hi, abs=1e-9)
    # the strip identity: equal and opposite axis curvatures
    assert p_max.K2 == pytest.approx(-p_sad.K2, rel=1e-9)


def test_toy_three_points_pattern():
    surf = ToyThreePointSurface(0.4, 0.5, 1.0, 0.5)
    for density in (16, 24):
        res = find_critical_points(surf, grid_density=density)
        assert [p.kind for p in res.points] == ["saddle", "minimum", "saddle"]
        s_vals = [p.s for p in res.points]
        # stationary points of the symmetric quartic sit at u = 0, +-sqrt(2)
        assert s_vals[0] == pytest.approx(-np.sqrt(2) * 0.4, abs=1e-9)
        assert s_vals[1] == pytest.approx(0.0, abs=1e-9)
        assert s_vals[2] == pytest.approx(np.sqrt(2) * 0.4, abs=1e-9)
        assert all(p.lam == pytest.approx(0.0, abs=1e-9) for p in res.points)


def test_residuals_below_tolerance():
    surf = MatrixSurface(ReducedPSpinFamily(7, 5), 1.0)
    res = find_critical_points(surf)
    assert len(res.points) == 7
    for p in res.points:
        assert p.residual < res.tol_grad


def test_boundary_points_are_discarded():
    # the Grover saddle sits exactly on this region's s-boundary
    res = find_critical_points(GroverSurface(5), Region(0.5, 1.0, -1.0, 2.0))
    assert res.points == []


def test_region_must_be_inside_domain():
    with pytest.raises(ValidationError, match="not contained"):
        find_critical_points(GroverSurface(5), Region(0, 1, -5, 5))
    with pytest.raises(ValidationError, match="grid_density"):
        find_critical_points(GroverSurface(5), grid_density=8)


def test_degenerate_point_reported_as_warning():
    # quartic bowl: Morse-degenerate stationary point at the origin
    surf = CallableSurface(lambda s, l: s ** 4 + l ** 4, Region(-1, 1, -1, 1),
                           fs=lambda s, l: 4 * s ** 3 + 0 * l,
                           fl=lambda s, l: 4 * l ** 3 + 0 * s,
                           fss=lambda s, l: 12 * s ** 2 + 0 * l,
                           fsl=lambda s, l: 0.0 * s * l,
                           fll=lambda s, l: 12 * l ** 2 + 0 * s)
    res = find_critical_points(surf)
    assert res.points == []
    assert len(res.degenerate) == 1
    d = res.degenerate[0]
    assert abs(d.s) < 1e-3 and abs(d.lam) < 1e-3
    assert abs(d.det_hessian) <= res.tol_nondegen


def test_morse_index_sum_invariant_under_density(pspin_sweep_p5):
    fam, _ = pspin_sweep_p5
    surf = fam.surface_at(1.0)
    sums = []
    for density in (16, 24, 32):
        res = find_critical_points(surf, grid_density=density)
        sums.append(sum((-1) ** p.morse_index for p in res.points))
    assert sums == [-7, -7, -7]


# --------------------------------------------------------------- local model

def test_local_model_paraboloid():
    cp = make_point("minimum", K1=1.0, K2=1.0, f_val=0.0)
    m = local_model(cp)
    assert m.K1 == 1.0 and m.K2 == 1.0
    assert m.evaluate(0.7, 0.3) == pytest.approx(0.2 ** 2 + 0.3 ** 2)


def test_local_model_grover():
    res = find_critical_points(GroverSurface(5), Region(0, 1, -1, 2))
    m = local_model(res.points[0])
    assert m.K1 == pytest.approx(2 ** -5 - 1, abs=1e-9)
    assert m.K2 == pytest.approx(1.0, abs=1e-9)
    # normal form reproduces the quadratic surface exactly
    assert m.evaluate(0.6, 0.8) == pytest.approx(GroverSurface(5).value(0.6, 0.8),
                                                 abs=1e-9)


def test_degeneracy_k2_values_match_reference():
    res = find_critical_points(DegeneracyEnhancedSurface(5, 1.0),
                               Region(0.475, 0.525, 0.0, 3.0))
    k2 = sorted(p.K2 for p in res.points)
    assert k2[0] == pytest.approx(-3.81, abs=0.02)
    assert k2[1] == pytest.approx(+3.81, abs=0.02)


# ----------------------------------------------------------------- gap model

def test_grover_gap_identity():
    for N in (5, 10):
        res = find_critical_points(GroverSurface(N), Region(0, 1, -1, 2))
        gap = gap_from_saddle(res.points[0])
        assert gap.delta_min == pytest.approx(2 ** (-N / 2), rel=1e-12)


def test_gap_invariant_under_field_scaling():
    base = GroverSurface(5)
    scaled = ScaledSurface(base, 4.0)
    cp = find_critical_points(base, Region(0, 1, -1, 2)).points[0]
    cp4 = find_critical_points(scaled, Region(0, 1, -1, 2)).points[0]
    assert cp4.K2 == pytest.approx(4 * cp.K2, rel=1e-9)
    assert cp4.f_val == pytest.approx(4 * cp.f_val, rel=1e-9)
    # homogeneity of degree zero: 2*sqrt(16)/4 = 2
    assert gap_from_saddle(cp4).delta_min == pytest.approx(
        gap_from_saddle(cp).delta_min, rel=1e-12)


def test_gap_sign_pattern_errors():
    with pytest.raises(ValidationError, match="saddle"):
        gap_from_saddle(make_point("minimum", K1=1.0, K2=1.0))
    with pytest.raises(SignPatternError, match="f\\(p\\)"):
        gap_from_saddle(make_point("saddle", K1=-1.0, K2=1.0, f_val=0.5))
    with pytest.raises(SignPatternError, match="lambda"):
        gap_from_saddle(make_point("saddle", K1=1.0, K2=-1.0, f_val=-0.5))


def test_gap_model_tracks_eigensolver_gap():
    # two-level surfaces: the model is essentially exact
    fam = grover_family(5)
    surf = MatrixSurface(fam, 0.0)
    cp = find_critical_points(surf).points[0]
    gm = gap_from_saddle(cp)
    L = 0.2 * math.sqrt(abs(cp.f_val / gm.K1))
    for sig in np.linspace(-L, L, 9):
        e = np.linalg.eigvalsh(fam.evaluate(cp.s + sig, 0.0))
        assert gm.delta(sig) == pytest.approx(e[1] - e[0], rel=1e-9)


# ------------------------------------------------------------ asymptote angle

def test_angle_symmetric_saddle_is_right_angle():
    a = asymptote_angle(make_point("saddle", K1=-1.0, K2=1.0))
    assert a.theta == pytest.approx(math.pi / 2)


def test_angle_limits():
    # flat channel: the asymptotes close up
    assert asymptote_angle(make_point("saddle", K1=-1e-6, K2=1.0)).theta < 0.01
    # sharp channel (first-order signature): the angle opens toward pi
    assert asymptote_angle(make_point("saddle", K1=-1e6, K2=1.0)).theta > 3.13


def test_angle_grover_value_and_null_directions():
    cp = find_critical_points(GroverSurface(5), Region(0, 1, -1, 2)).points[0]
    a = asymptote_angle(cp)
    expected = math.pi - math.acos((cp.K1 + cp.K2) / (cp.K1 - cp.K2))
    assert a.theta == pytest.approx(expected, abs=1e-12)
    assert a.theta == pytest.approx(1.5549226443, abs=1e-9)
    dot = float(np.dot(a.direction_1, a.direction_2))
    assert a.theta == pytest.approx(math.acos(np.clip(dot, -1, 1)), abs=1e-9)
    # the directions are null directions of the quadratic model
    m = local_model(cp)
    for d in (a.direction_1, a.direction_2):
        val = m.evaluate(cp.s + 1e-3 * d[0], cp.lam + 1e-3 * d[1]) - m.f_val
        assert abs(val) < 1e-12


def test_angle_errors():
    with pytest.raises(ValidationError, match="saddle"):
        asymptote_angle(make_point("maximum", K1=-1.0, K2=-2.0))
    with pytest.raises(ValidationError, match="ill-conditioned"):
        asymptote_angle(make_point("saddle", K1=1.0, K2=1.0))


def test_angle_null_direction_agreement_on_pspin(pspin_sweep_p5):
    fam, _ = pspin_sweep_p5
    res = find_critical_points(fam.surface_at(0.1))
    for p in res.points:
        if p.kind != "saddle":
            continue
        a = asymptote_angle(p)
        dot = float(np.dot(a.direction_1, a.direction_2))
        assert a.theta == pytest.approx(math.acos(np.clip(dot, -1, 1)), abs=1e-9)
