import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from morsegap import (CallableSurface, CapacityError, GroverSurface,
                      MatrixSurface, ReducedPSpinFamily, Region,
                      ToyThreePointSurface, ValidationError,
                      charpoly_coefficients, default_spectral_domain, eval_f,
                      gauss_curvature, gradient_f, grover_family, hessian_f,
                      spectral_curves)


# ------------------------------------------------------------------ charpoly

def test_charpoly_2x2_diagonal():
    c = charpoly_coefficients(np.diag([1.0, 2.0]))
    assert np.allclose(c, [2.0, -3.0, 1.0])


def test_charpoly_zero_3x3():
    c = charpoly_coefficients(np.zeros((3, 3)))
    assert np.allclose(c, [0.0, 0.0, 0.0, -1.0])


def test_charpoly_roots_match_eigensolver():
    H = ReducedPSpinFamily(7, 5).evaluate(0.5, 1.0)
    c = charpoly_coefficients(H)
    roots = np.sort(npoly.polyroots(c).real)
    assert np.allclose(roots, np.linalg.eigvalsh(H), atol=1e-8)


def test_charpoly_validation():
    with pytest.raises(ValidationError, match="square"):
        charpoly_coefficients(np.zeros((2, 3)))
    with pytest.raises(ValidationError, match="symmetric"):
        charpoly_coefficients(np.array([[0.0, 1.0], [0.3, 0.0]]))
    with pytest.raises(CapacityError):
        charpoly_coefficients(np.eye(200))


def test_charpoly_normalize_rescales():
    H = np.diag([3.0, 5.0, 7.0])
    c = charpoly_coefficients(H, normalize=True)
    assert np.abs(c).max() == pytest.approx(1.0)


# -------------------------------------------------------------------- eval_f

def test_eval_grover_value():
    surf = GroverSurface(5)
    assert eval_f(surf, 0.5, 0.5) == pytest.approx(-0.0078125)


def test_eval_out_of_domain():
    surf = GroverSurface(5)
    with pytest.raises(ValidationError, match="outside"):
        eval_f(surf, 0.5, 5.0)
    with pytest.raises(ValidationError, match="interior"):
        gradient_f(surf, 0.0, 0.5)


def test_matrix_surface_vanishes_on_eigenvalues():
    fam = ReducedPSpinFamily(7, 5)
    surf = MatrixSurface(fam, 1.0)
    scale = surf.f_scale()
    for s in (0.2, 0.5, 0.9):
        for lam in np.linalg.eigvalsh(fam.evaluate(s, 1.0)):
            assert abs(surf.value(s, lam)) < 1e-9 * scale


def test_matrix_surface_matches_direct_determinant():
    fam = ReducedPSpinFamily(7, 5)
    surf = MatrixSurface(fam, 1.0)
    # the printed probe point
    det = np.linalg.det(fam.evaluate(0.5, 1.0))
    assert surf.value(0.5, 0.0) == pytest.approx(det, rel=1e-10)
    # 50 random probes away from the zero set
    rng = np.random.default_rng(11)
    dom = surf.domain
    checked = 0
    while checked < 50:
        s = rng.uniform(0.0, 1.0)
        lam = rng.uniform(dom.lam_min, dom.lam_max)
        det = np.linalg.det(fam.evaluate(s, 1.0) - lam * np.eye(fam.dimension))
        if abs(det) < 1e-6 * surf.f_scale():
            continue
        assert surf.value(s, lam) == pytest.approx(det, rel=1e-10)
        checked += 1


# ------------------------------------------------------------------ gradient

def test_grover_gradient_values():
    surf = GroverSurface(5)
    assert gradient_f(surf, 0.5, 0.5) == pytest.approx((0.0, 0.0), abs=1e-14)
    fs, fl = gradient_f(surf, 0.5, 0.6)
    assert fs == pytest.approx(0.0, abs=1e-14)
    assert fl == pytest.approx(0.2)


def test_matrix_gradient_against_plain_finite_differences():
    fam = ReducedPSpinFamily(7, 5)
    surf = MatrixSurface(fam, 0.3)
    rng = np.random.default_rng(5)
    dom = surf.domain
    h = surf.ds  # probe with the surface's own stencil width
    for _ in range(20):
        s = rng.uniform(0.1, 0.9)
        lam = rng.uniform(dom.lam_min, dom.lam_max)
        fs, fl = surf.gradient(s, lam)
        fs_fd = (surf.value(s + h, lam) - surf.value(s - h, lam)) / (2 * h)
        fl_fd = (surf.value(s, lam + h) - surf.value(s, lam - h)) / (2 * h)
        norm = max(np.hypot(fs, fl), 1e-6 * surf.f_scale())
        assert abs(fs - fs_fd) <= 1e-6 * norm + 1e-9
        assert abs(fl - fl_fd) <= 1e-6 * norm + 1e-9


def test_lambda_partials_against_finite_differences():
    # derivative-consistency invariant: analytic lambda-partials vs central
    # differences at 50 probe points
    fam = grover_family(6)
    surf = MatrixSurface(fam, 0.0)
    rng = np.random.default_rng(9)
    scale = surf.f_scale()
    h = 1e-5 * max(1.0, scale)
    for _ in range(50):
        s = rng.uniform(0.05, 0.95)
        lam = rng.uniform(-0.8, 1.8)
        _, fl = surf.gradient(s, lam)
        fl_fd = (surf.value(s, lam + h) - surf.value(s, lam - h)) / (2 * h)
        assert fl == pytest.approx(fl_fd, rel=1e-5, abs=1e-10 * scale)


# ------------------------------------------------------------------- hessian

def test_grover_hessian_is_constant():
    surf = GroverSurface(5)
    for (s, lam) in [(0.2, -0.5), (0.5, 0.5), (0.9, 1.7)]:
        fss, fsl, fll = hessian_f(surf, s, lam)
        assert fss == pytest.approx(2 * (2 ** -5 - 1))
        assert fsl == 0.0
        assert fll == pytest.approx(2.0)


def test_toy_f_ll_constant_two():
    surf = ToyThreePointSurface(0.4, 0.5, 1.0, 0.5)
    for s in np.linspace(-0.7, 0.7, 5):
        _, _, fll = surf.hessian(s, 0.3)
        assert fll == pytest.approx(2.0)


def test_matrix_hessian_against_finite_differences():
    fam = ReducedPSpinFamily(6, 3)
    surf = MatrixSurface(fam, 0.5)
    rng = np.random.default_rng(13)
    dom = surf.domain
    h = 1e-4
    for _ in range(10):
        s = rng.uniform(0.1, 0.9)
        lam = rng.uniform(dom.lam_min, dom.lam_max)
        fss, fsl, fll = surf.hessian(s, lam)
        fll_fd = (surf.value(s, lam + h) - 2 * surf.value(s, lam)
                  + surf.value(s, lam - h)) / h ** 2
        assert fll == pytest.approx(fll_fd, rel=1e-4, abs=1e-6 * surf.f_scale())


# ----------------------------------------------------------- Gauss curvature

def _const_surface(c):
    z = lambda s, lam: c + 0.0 * s * lam
    zero = lambda s, lam: 0.0 * s * lam
    return CallableSurface(z, Region(-1, 1, -1, 1), fs=zero, fl=zero,
                           fss=zero, fsl=zero, fll=zero)


def test_flat_graph_curvature_zero():
    K, H = gauss_curvature(_const_surface(3.7), 0.2, -0.4)
    assert K == 0.0 and H == 0.0


def test_paraboloid_curvature_at_origin():
    surf = CallableSurface(lambda s, l: s * s + l * l, Region(-1, 1, -1, 1),
                           fs=lambda s, l: 2 * s + 0 * l,
                           fl=lambda s, l: 2 * l + 0 * s,
                           fss=lambda s, l: 2.0 + 0 * s * l,
                           fsl=lambda s, l: 0.0 * s * l,
                           fll=lambda s, l: 2.0 + 0 * s * l)
    K, H = gauss_curvature(surf, 0.0, 0.0)
    assert K == pytest.approx(4.0)
    assert H == pytest.approx(2.0)


def test_grover_curvature_at_saddle():
    K, _ = gauss_curvature(GroverSurface(5), 0.5, 0.5)
    assert K == pytest.approx(2 * (2 * (2 ** -5 - 1)))
    assert K == pytest.approx(-3.875)


# ------------------------------------------------------------ spectral curves

def test_grover_closed_form_equals_effective_determinant():
    # 10x10 probe grid: the analytic field versus det(H(s) - lambda I) of the
    # 2x2 effective family
    fam = grover_family(5)
    closed = GroverSurface(5)
    for s in np.linspace(0.0, 1.0, 10):
        H = fam.evaluate(s, 0.0)
        for lam in np.linspace(-1.0, 2.0, 10):
            det = np.linalg.det(H - lam * np.eye(2))
            assert abs(closed.value(s, lam) - det) < 1e-12


def test_grover_min_gap_on_grid():
    curves = spectral_curves(grover_family(5), 0.0, np.linspace(0, 1, 101))
    assert curves.min_gap == pytest.approx(2 ** -2.5, rel=1e-9)
    assert curves.s_at_min_gap == pytest.approx(0.5)


def test_spectral_curves_endpoint_row():
    fam = ReducedPSpinFamily(5, 3)
    curves = spectral_curves(fam, 0.2, np.array([0.0]))
    assert np.allclose(curves.energies[0],
                       np.linalg.eigvalsh(fam.evaluate(0.0, 0.2)))


def test_spectral_curves_sorted_nonnegative_gap():
    curves = spectral_curves(ReducedPSpinFamily(7, 5), 0.4,
                             np.linspace(0, 1, 41))
    assert np.all(np.diff(curves.energies, axis=1) >= -1e-12)
    assert np.all(curves.gap >= 0)


def test_pspin_gap_has_single_sharp_minimum():
    # first-order transition signature at b = 1
    curves = spectral_curves(ReducedPSpinFamily(7, 5), 1.0,
                             np.linspace(0, 1, 201))
    g = curves.gap
    interior_minima = [j for j in range(1, len(g) - 1)
                       if g[j] < g[j - 1] and g[j] < g[j + 1]]
    assert len(interior_minima) == 1
    assert 0.3 < curves.s_grid[interior_minima[0]] < 0.6


def test_spectral_curves_domain_checks():
    with pytest.raises(ValidationError):
        spectral_curves(grover_family(3), 0.0, np.array([-0.2, 0.5]))


# ----------------------------------------------------- interlacing sign flips

def test_sign_interlacing_between_separated_eigenvalues():
    fam = ReducedPSpinFamily(6, 3)
    surf = MatrixSurface(fam, 0.7)
    for s in (0.15, 0.5, 0.85):
        e = np.linalg.eigvalsh(fam.evaluate(s, 0.7))
        mids = 0.5 * (e[:-1] + e[1:])
        signs = [np.sign(surf.value(s, m)) for m, gap in
                 zip(mids, np.diff(e)) if gap > 1e-6]
        for a, b in zip(signs, signs[1:]):
            assert a * b < 0


# ------------------------------------------------------------ default domain

def test_default_domain_wraps_hull():
    fam = ReducedPSpinFamily(7, 5)
    dom = default_spectral_domain(fam, 1.0)
    curves = spectral_curves(fam, 1.0, np.linspace(0, 1, 101))
    assert dom.lam_min < curves.energies.min()
    assert dom.lam_max > curves.energies.max()
    assert dom.s_min < 0.0 < 1.0 < dom.s_max  # tiny s padding


def test_matrix_surface_normalize_rescales_f_only():
    fam = grover_family(4)
    raw = MatrixSurface(fam, 0.0)
    scaled = MatrixSurface(fam, 0.0, normalize=True)
    r = scaled.value(0.3, 0.4) / raw.value(0.3, 0.4)
    # proportional fields, same zero set
    assert scaled.value(0.7, 0.1) == pytest.approx(r * raw.value(0.7, 0.1))
