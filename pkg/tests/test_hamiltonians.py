import json

import numpy as np
import pytest

from morsegap import (CapacityError, DegeneracyEnhancedSurface, GroverSurface,
                      PauliInterpolationFamily, PauliTerm, ReducedPSpinFamily,
                      ToyThreePointSurface, ValidationError, analytic_surface,
                      build_full_pspin, build_pauli_matrix, build_pspin_reduced,
                      grover_family, load_model)


# ---------------------------------------------------------------- Pauli sums

def test_single_z():
    H = build_pauli_matrix([PauliTerm(-1.0, "Z")], 1)
    assert np.array_equal(H, np.diag([-1.0, 1.0]))


def test_transverse_field_two_qubits():
    H = build_pauli_matrix([PauliTerm(1.0, "XI"), PauliTerm(1.0, "IX")], 2)
    expected = np.zeros((4, 4))
    for i in range(4):
        for bit in range(2):
            expected[i, i ^ (1 << (1 - bit))] = 1.0  # word order: qubit 0 leftmost
    assert np.array_equal(H, expected)
    # ones exactly where a single bit flips
    for i in range(4):
        for j in range(4):
            flips = bin(i ^ j).count("1")
            assert H[i, j] == (1.0 if flips == 1 else 0.0)


def test_zz_parity():
    H = build_pauli_matrix([PauliTerm(-1.0, "ZZ")], 2)
    assert np.array_equal(H, np.diag([-1.0, 1.0, 1.0, -1.0]))


def test_even_y_matches_complex_oracle():
    # independent oracle: complex Pauli algebra
    Y = np.array([[0, -1j], [1j, 0]])
    expected = np.kron(Y, Y)
    assert np.abs(expected.imag).max() == 0
    H = build_pauli_matrix([PauliTerm(1.0, "YY")], 2)
    assert np.allclose(H, expected.real)


def test_odd_y_rejected():
    with pytest.raises(ValidationError, match="odd number of Y"):
        build_pauli_matrix([PauliTerm(1.0, "Y")], 1)
    with pytest.raises(ValidationError, match="odd number of Y"):
        build_pauli_matrix([PauliTerm(1.0, "XYZ")], 3)


def test_word_validation():
    with pytest.raises(ValidationError, match="length"):
        build_pauli_matrix([PauliTerm(1.0, "XX")], 3)
    with pytest.raises(ValidationError, match="invalid Pauli"):
        build_pauli_matrix([PauliTerm(1.0, "XA")], 2)
    with pytest.raises(ValidationError, match="finite"):
        build_pauli_matrix([PauliTerm(float("nan"), "X")], 1)


def test_qubit_cap():
    with pytest.raises(CapacityError):
        build_pauli_matrix([PauliTerm(1.0, "I" * 15)], 15)


# ------------------------------------------------------------ reduced p-spin

def test_pspin_reduced_printed_endpoints():
    H = build_pspin_reduced(7, 5, 1.0, 1.0)
    assert H[0, 0] == pytest.approx(-7.0)
    assert np.abs(np.diag(H, 1)).max() == 0.0   # (1-s) factor kills the band
    assert np.abs(np.diag(H, 2)).max() == 0.0   # (1-b) factor kills the band

    H = build_pspin_reduced(7, 5, 0.0, 1.0)
    assert np.abs(np.diag(H)).max() == 0.0
    assert H[0, 1] == pytest.approx(-np.sqrt(7.0))


def test_pspin_reduced_is_pentadiagonal():
    H = build_pspin_reduced(6, 3, 0.3, 0.4)
    for off in range(3, 7):
        assert np.abs(np.diag(H, off)).max() == 0.0
    assert np.allclose(H, H.T)


def test_pspin_reduced_domain_checks():
    with pytest.raises(ValidationError):
        build_pspin_reduced(1, 5, 0.5, 0.5)
    with pytest.raises(ValidationError):
        build_pspin_reduced(7, 1, 0.5, 0.5)
    with pytest.raises(ValidationError):
        build_pspin_reduced(7, 5, 1.5, 0.5)


def _zsum_power_terms(N, p):
    """Expand (sum_i Z_i)**p in the commuting subset algebra (Z_i**2 = I)."""
    coeffs = {frozenset(): 1.0}
    for _ in range(p):
        nxt = {}
        for subset, c in coeffs.items():
            for i in range(N):
                key = subset ^ {i}
                nxt[key] = nxt.get(key, 0.0) + c
        coeffs = nxt
    return coeffs


def _full_pspin_pauli_terms(N, p, s, b):
    """Independent construction of the non-stoquastic Hamiltonian from Pauli
    words: H = -s*b*N*(M_z)^p + s*(1-b)*N*(M_x)^2 - (1-s)*sum X_i."""
    terms = []
    for subset, c in _zsum_power_terms(N, p).items():
        word = "".join("Z" if i in subset else "I" for i in range(N))
        terms.append(PauliTerm(-s * b * N ** (1 - p) * c, word))
    # N*(M_x)^2 = (1/N) * (N*I + 2*sum_{i<j} X_i X_j)
    terms.append(PauliTerm(s * (1 - b), "I" * N))
    for i in range(N):
        for j in range(i + 1, N):
            word = "".join("X" if q in (i, j) else "I" for q in range(N))
            terms.append(PauliTerm(2.0 * s * (1 - b) / N, word))
    for i in range(N):
        word = "".join("X" if q == i else "I" for q in range(N))
        terms.append(PauliTerm(-(1 - s), word))
    return terms


def test_reduced_ground_energy_matches_full_pauli_oracle():
    # N=7, p=5, s=0.5, b=0.1: reduced sector versus the full 2^7 space built
    # from explicit Pauli words.
    N, p, s, b = 7, 5, 0.5, 0.1
    H_full = build_pauli_matrix(_full_pspin_pauli_terms(N, p, s, b), N)
    H_red = build_pspin_reduced(N, p, s, b)
    e_full = np.linalg.eigvalsh(H_full)
    e_red = np.linalg.eigvalsh(H_red)
    assert abs(e_red.min() - e_full.min()) < 1e-8
    # the reduced spectrum embeds in the full one
    for lam in e_red:
        assert np.abs(e_full - lam).min() < 1e-8


# --------------------------------------------------------------- full p-spin

def test_full_pspin_two_spin_diagonal():
    H = build_full_pspin(2, 2, 1.0, 1.0)
    assert np.allclose(H, np.diag([-2.0, 0.0, 0.0, -2.0]))


def test_full_pspin_transverse_spectrum():
    H = build_full_pspin(3, 2, 0.0, 0.5)
    assert np.allclose(np.linalg.eigvalsh(H),
                       [-3, -1, -1, -1, 1, 1, 1, 3])


def test_full_pspin_vs_reduced_sector():
    # The reduced spectrum embeds in the full one and carries its bottom.
    # Note: lower-spin sectors interleave from the third level up (here the
    # full third eigenvalue, -1.834 with multiplicity 4, lies outside the
    # maximum-spin sector), so only the two lowest levels coincide.
    e_full = np.linalg.eigvalsh(build_full_pspin(5, 3, 0.4, 1.0))
    e_red = np.sort(np.linalg.eigvalsh(build_pspin_reduced(5, 3, 0.4, 1.0)))
    assert np.allclose(e_red[:2], e_full[:2], atol=1e-8)
    for lam in e_red:
        assert np.abs(e_full - lam).min() < 1e-8


def test_full_pspin_caps_and_k():
    with pytest.raises(CapacityError):
        build_full_pspin(11, 5, 0.5, 0.5)
    with pytest.raises(ValidationError):
        build_full_pspin(4, 5, 0.5, 0.5, k=3)


def test_sector_equivalence_spot():
    # light version of the acceptance sweep
    for (N, p, s, b) in [(6, 3, 0.25, 0.5), (4, 2, 0.75, 0.0), (5, 5, 0.5, 1.0)]:
        e_full = np.linalg.eigvalsh(build_full_pspin(N, p, s, b))
        e_red = np.linalg.eigvalsh(build_pspin_reduced(N, p, s, b))
        assert abs(e_red.min() - e_full.min()) < 1e-8
        for lam in e_red:
            assert np.abs(e_full - lam).min() < 1e-8


# ------------------------------------------------------------------ families

def test_families_evaluate_symmetric():
    rng = np.random.default_rng(7)
    fams = [grover_family(4), ReducedPSpinFamily(6, 3),
            PauliInterpolationFamily([PauliTerm(1.0, "ZZ")],
                                     [PauliTerm(0.5, "XI"), PauliTerm(-0.3, "IX")],
                                     [PauliTerm(0.2, "ZI")], 2)]
    for fam in fams:
        for _ in range(5):
            s, b = rng.uniform(0, 1), rng.uniform(0, 1)
            H = fam.evaluate(s, b)
            assert np.abs(H - H.T).max() < 1e-12 * max(1.0, np.abs(H).max())


def test_pauli_family_b_linearity():
    fam = PauliInterpolationFamily([PauliTerm(1.0, "ZZ")],
                                   [PauliTerm(1.0, "XI")],
                                   [PauliTerm(0.7, "IZ")], 2)
    rng = np.random.default_rng(3)
    for _ in range(5):
        s, b = rng.uniform(0, 1), rng.uniform(-1, 2)
        lhs = fam.evaluate(s, b) - fam.evaluate(s, 0.0)
        rhs = b * (fam.evaluate(s, 1.0) - fam.evaluate(s, 0.0))
        assert np.abs(lhs - rhs).max() < 1e-12


def test_pspin_family_affine_parts():
    fam = ReducedPSpinFamily(7, 5)
    H0, H1 = fam.affine_parts(0.3)
    for s in (0.0, 0.37, 1.0):
        assert np.allclose(H0 + s * H1, fam.evaluate(s, 0.3), atol=1e-12)


def test_grover_family_projector_spectra():
    fam = grover_family(5)
    assert np.allclose(np.linalg.eigvalsh(fam.evaluate(0.0, 0.0)), [0.0, 1.0])
    assert np.allclose(np.linalg.eigvalsh(fam.evaluate(1.0, 0.0)), [0.0, 1.0])
    # gap at the midpoint equals 2^{-N/2}
    e = np.linalg.eigvalsh(fam.evaluate(0.5, 0.0))
    assert e[1] - e[0] == pytest.approx(2 ** -2.5, rel=1e-12)


# --------------------------------------------------------- analytic surfaces

def test_grover_surface_value():
    surf = analytic_surface("grover", N=5)
    assert surf.value(0.5, 0.5) == pytest.approx(-2 ** -5 / 4)
    assert surf.value(0.5, 0.5) == pytest.approx(-0.0078125)


def test_degeneracy_b0_degenerates_to_grover_times_root():
    g = GroverSurface(5)
    d = DegeneracyEnhancedSurface(5, 0.0)
    for s in np.linspace(0.05, 0.95, 7):
        lam1 = (1 - np.sqrt(1 - 4 * (1 - 2 ** -5) * (s - s * s))) / 2
        for lam in np.linspace(-0.5, 2.0, 9):
            assert d.value(s, lam) == pytest.approx(
                g.value(s, lam) * (lam - lam1), abs=1e-12)


def test_degeneracy_ground_state_degenerate_at_s1():
    # the third eigenvalue branch is pinned to the ground state at s = 1
    for b in (0.25, 1.0, 2.0):
        d = DegeneracyEnhancedSurface(5, b)
        c = d.lambda_poly_coeffs(1.0)
        roots = np.sort(np.roots(c[::-1]).real)
        assert roots[0] == pytest.approx(0.0, abs=1e-12)
        assert roots[1] == pytest.approx(0.0, abs=1e-12)


def test_toy_lambda_star_interpolates_targets():
    t = ToyThreePointSurface(0.4, 0.7, 1.3, 0.9)
    assert t.lam_star(0.0) == pytest.approx(1.3)
    assert t.lam_star(0.4) == pytest.approx(0.9)
    assert t.lam_star(-0.4) == pytest.approx(0.7)
    # f vanishes on the branch lambda = lam_star
    assert t.value(0.0, 1.3) == pytest.approx(0.0, abs=1e-14)


def test_analytic_surface_factory_errors():
    with pytest.raises(ValidationError, match="unknown analytic surface"):
        analytic_surface("mexican_hat", N=3)
    with pytest.raises(ValidationError, match="missing parameter"):
        analytic_surface("grover")
    with pytest.raises(ValidationError, match="unexpected parameters"):
        analytic_surface("grover", N=3, b=1.0)
    with pytest.raises(ValidationError):
        analytic_surface("toy_three_points", eps=-1.0, a_minus=0.5,
                         a_zero=1.0, a_plus=0.5)
    with pytest.raises(ValidationError):
        analytic_surface("degeneracy_enhanced", N=5, b=-0.5)


# ------------------------------------------------------------- model loading

def test_load_model_round_trip(tmp_path):
    model = {
        "n_qubits": 2,
        "initial": [{"coeff": 1.0, "word": "XI"}, {"coeff": 1.0, "word": "IX"}],
        "final": [{"coeff": -1.0, "word": "ZZ"}],
        "enhancement": [{"coeff": 0.5, "word": "XX"}],
    }
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model))
    fam = load_model(path)
    H = fam.evaluate(0.3, 0.7)
    expected = (0.7 * build_pauli_matrix([PauliTerm(1, "XI"), PauliTerm(1, "IX")], 2)
                + 0.3 * build_pauli_matrix([PauliTerm(-1, "ZZ")], 2)
                + 0.7 * build_pauli_matrix([PauliTerm(0.5, "XX")], 2))
    assert np.allclose(H, expected)


def test_load_model_builtin_pspin():
    fam = load_model({"builtin": "pspin", "N": 6, "p": 3})
    assert fam.dimension == 7
    assert np.allclose(fam.evaluate(0.5, 0.2),
                       build_pspin_reduced(6, 3, 0.5, 0.2))


def test_load_model_diagnostics(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError, match="line 1"):
        load_model(bad)
    with pytest.raises(ValidationError, match="initial\\[1\\]"):
        load_model({"n_qubits": 2,
                    "initial": [{"coeff": 1.0, "word": "XI"},
                                {"coeff": 1.0, "word": "X"}],
                    "final": []})
    with pytest.raises(ValidationError, match="missing section"):
        load_model({"n_qubits": 2, "initial": []})
    with pytest.raises(CapacityError):
        load_model({"n_qubits": 15, "initial": [], "final": []})
