"""Hamiltonian families: Pauli-string interpolations, the reduced maximum-spin
sector of the non-stoquastic p-spin model, and closed-form spectral surfaces.

Every family evaluates to a real symmetric matrix; models that would force
complex arithmetic (odd number of Y factors in a word) are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import CapacityError, ValidationError
from .surface import MatrixSurface, MorseSurface, Region

PAULI_QUBIT_CAP = 14
FULL_PSPIN_CAP = 10
REDUCED_SPIN_CAP = 1024  # largest N for the (N+1)-dimensional sector

# Real 2x2 blocks; Y is stored as i*sigma_y so even-Y words stay real after
# multiplying the coefficient by (-1)**(y_count/2).
_PAULI_REAL = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, 1.0], [-1.0, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


@dataclass(frozen=True)
class PauliTerm:
    """One coefficient * tensor-product-of-Paulis term."""

    coeff: float
    word: str


def _check_term(term: PauliTerm, n_qubits: int, label: str) -> None:
    if not np.isfinite(term.coeff):
        raise ValidationError(f"{label}: coefficient {term.coeff!r} is not finite")
    if len(term.word) != n_qubits:
        raise ValidationError(
            f"{label}: word {term.word!r} has length {len(term.word)}, "
            f"expected {n_qubits}")
    bad = set(term.word) - set("IXYZ")
    if bad:
        raise ValidationError(f"{label}: invalid Pauli letters {sorted(bad)}")
    if term.word.count("Y") % 2:
        raise ValidationError(
            f"{label}: word {term.word!r} has an odd number of Y factors and "
            "would produce imaginary entries; only real symmetric models are "
            "supported")


def build_pauli_matrix(terms, n_qubits: int) -> np.ndarray:
    """Dense sum of Pauli-string terms on the full 2**n_qubits space."""
    if n_qubits < 1:
        raise ValidationError("n_qubits must be >= 1")
    if n_qubits > PAULI_QUBIT_CAP:
        raise CapacityError(
            f"n_qubits={n_qubits} exceeds the dense construction cap "
            f"({PAULI_QUBIT_CAP})")
    dim = 2 ** n_qubits
    out = np.zeros((dim, dim))
    for idx, term in enumerate(terms):
        if not isinstance(term, PauliTerm):
            term = PauliTerm(*term)
        _check_term(term, n_qubits, f"terms[{idx}]")
        block = np.ones((1, 1))
        for ch in term.word:
            block = np.kron(block, _PAULI_REAL[ch])
        sign = (-1.0) ** (term.word.count("Y") // 2)
        out += term.coeff * sign * block
    return out


def build_pspin_reduced(N: int, p: int, s: float, b: float) -> np.ndarray:
    """Non-stoquastic p-spin Hamiltonian restricted to the maximum-spin sector.

    Pentadiagonal (N+1)x(N+1) matrix over the basis |N/2, m>, m = 1..N+1
    (1-based, matching the printed matrix elements):

      H[m,m]   = s*(-b*N*(1 - 2(m-1)/N)**p + (1-b)*(2m - 1 - 2(m-1)**2/N))
      H[m,m+1] = -(1-s)*sqrt((N-m+1)*m)
      H[m,m+2] = s*(1-b)*sqrt(m*(m+1)*(N-m+1)*(N-m))/N

    The x-catalyst power is fixed to 2: the printed elements couple m to m+-2
    only.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 2):
        raise ValidationError(f"N must be an integer >= 2, got {N!r}")
    if N > REDUCED_SPIN_CAP:
        raise CapacityError(f"N={N} exceeds the reduced-sector cap ({REDUCED_SPIN_CAP})")
    if not (isinstance(p, (int, np.integer)) and p >= 2):
        raise ValidationError(f"p must be an integer >= 2, got {p!r}")
    if not (0.0 <= s <= 1.0):
        raise ValidationError(f"s={s} outside [0, 1]")
    return _pspin_reduced_matrix(N, p, s, b)


def _pspin_reduced_matrix(N: int, p: int, s: float, b: float) -> np.ndarray:
    # Entries are polynomial in s, so evaluation extends smoothly beyond
    # [0, 1]; finite-difference stencils and Newton steps rely on that.
    m = np.arange(1, N + 2, dtype=float)
    diag = s * (-b * N * (1.0 - 2.0 * (m - 1) / N) ** p
                + (1.0 - b) * (2.0 * m - 1.0 - 2.0 * (m - 1) ** 2 / N))
    m1 = m[:N]
    band1 = -(1.0 - s) * np.sqrt((N - m1 + 1.0) * m1)
    m2 = m[:N - 1]
    band2 = s * (1.0 - b) * np.sqrt(m2 * (m2 + 1.0) * (N - m2 + 1.0) * (N - m2)) / N
    return (np.diag(diag) + np.diag(band1, 1) + np.diag(band1, -1)
            + np.diag(band2, 2) + np.diag(band2, -2))


def build_full_pspin(N: int, p: int, s: float, b: float, k: int = 2) -> np.ndarray:
    """Full 2**N non-stoquastic p-spin Hamiltonian built by explicit matrix powers:

    H(s, b) = -s*b*N*(M_z)**p + s*(1-b)*N*(M_x)**k - (1-s)*sum_i sigma^x_i,
    with M_a = (1/N) * sum_i sigma^a_i and k fixed to 2.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 2):
        raise ValidationError(f"N must be an integer >= 2, got {N!r}")
    if N > FULL_PSPIN_CAP:
        raise CapacityError(f"N={N} exceeds the full-space cap ({FULL_PSPIN_CAP})")
    if not (isinstance(p, (int, np.integer)) and p >= 2):
        raise ValidationError(f"p must be an integer >= 2, got {p!r}")
    if k != 2:
        raise ValidationError(f"the x-catalyst power is fixed to k=2, got {k}")
    dim = 2 ** N
    pop = np.array([bin(i).count("1") for i in range(dim)], dtype=float)
    mz = (N - 2.0 * pop) / N
    x_total = np.zeros((dim, dim))
    rows = np.arange(dim)
    for bit in range(N):
        x_total[rows, rows ^ (1 << bit)] += 1.0
    mx = x_total / N
    H = np.diag(-s * b * N * mz ** p)
    H += s * (1.0 - b) * N * (mx @ mx)
    H -= (1.0 - s) * x_total
    return H


class HamiltonianFamily:
    """Common interface: evaluate(s, b) -> real symmetric matrix, and
    surface_at(b) -> the secular surface at fixed enhancement."""

    kind: str
    dimension: int

    def evaluate(self, s: float, b: float) -> np.ndarray:
        raise NotImplementedError

    def affine_parts(self, b: float):
        """(H0, H1) with H(s, b) = H0 + s*H1 when the family is affine in s,
        else None; lets the secular surface skip per-call matrix assembly."""
        return None

    def surface_at(self, b: float, **kwargs) -> MorseSurface:
        return MatrixSurface(self, b, **kwargs)


class PauliInterpolationFamily(HamiltonianFamily):
    """H(s, b) = (1-s)*H_initial + s*H_final + b*H_enhancement."""

    kind = "pauli_interpolation"

    def __init__(self, initial, final, enhancement=(), n_qubits: int = 1):
        self.n_qubits = int(n_qubits)
        self.initial = [t if isinstance(t, PauliTerm) else PauliTerm(*t) for t in initial]
        self.final = [t if isinstance(t, PauliTerm) else PauliTerm(*t) for t in final]
        self.enhancement = [t if isinstance(t, PauliTerm) else PauliTerm(*t)
                            for t in enhancement]
        self._H_initial = build_pauli_matrix(self.initial, self.n_qubits)
        self._H_final = build_pauli_matrix(self.final, self.n_qubits)
        self._H_enh = build_pauli_matrix(self.enhancement, self.n_qubits)
        self.dimension = 2 ** self.n_qubits

    def evaluate(self, s, b):
        return (1.0 - s) * self._H_initial + s * self._H_final + b * self._H_enh

    def affine_parts(self, b):
        return self._H_initial + b * self._H_enh, self._H_final - self._H_initial


class GroverEffectiveFamily(PauliInterpolationFamily):
    """2x2 Grover search Hamiltonian in the span of the marked state and its
    complement; its secular function is exactly the closed-form Grover field.
    The enhancement slot is empty, so the family is independent of b."""

    def __init__(self, N: int):
        if not (isinstance(N, (int, np.integer)) and N >= 1):
            raise ValidationError(f"N must be an integer >= 1, got {N!r}")
        mu = 2.0 ** (-N)
        off = np.sqrt(mu * (1.0 - mu))
        initial = [PauliTerm(0.5, "I"), PauliTerm(0.5 - mu, "Z"), PauliTerm(-off, "X")]
        final = [PauliTerm(0.5, "I"), PauliTerm(-0.5, "Z")]
        super().__init__(initial, final, (), n_qubits=1)
        self.N = int(N)

    def surface_at(self, b, domain=None, **kwargs):
        # The closed form equals det(H(s) - lambda I) identically; prefer the
        # exact partials.
        return GroverSurface(self.N, domain=domain)


def grover_family(N: int) -> GroverEffectiveFamily:
    return GroverEffectiveFamily(N)


class ReducedPSpinFamily(HamiltonianFamily):
    """p-spin family on the (N+1)-dimensional maximum-spin sector."""

    kind = "pspin_reduced"

    def __init__(self, N: int, p: int, k: int = 2):
        if k != 2:
            raise ValidationError(f"the x-catalyst power is fixed to k=2, got {k}")
        build_pspin_reduced(N, p, 0.0, 0.0)  # validates N, p
        self.N, self.p, self.k = int(N), int(p), 2
        self.dimension = self.N + 1

    def evaluate(self, s, b):
        return _pspin_reduced_matrix(self.N, self.p, s, b)

    def affine_parts(self, b):
        H0 = _pspin_reduced_matrix(self.N, self.p, 0.0, b)
        return H0, _pspin_reduced_matrix(self.N, self.p, 1.0, b) - H0


# --- Closed-form surfaces -------------------------------------------------

def _grover_roots(N: int, s):
    """Grover eigenvalue curves lam1 < lam2 with first and second derivatives."""
    mu = 2.0 ** (-N)
    D = 1.0 - 4.0 * (1.0 - mu) * (s - s * s)
    Dp = -4.0 * (1.0 - mu) * (1.0 - 2.0 * s)
    Dpp = 8.0 * (1.0 - mu)
    sq = np.sqrt(D)
    sq1 = Dp / (2.0 * sq)
    sq2 = Dpp / (2.0 * sq) - Dp * Dp / (4.0 * D ** 1.5)
    lam1, lam1p, lam1pp = (1.0 - sq) / 2.0, -sq1 / 2.0, -sq2 / 2.0
    lam2, lam2p, lam2pp = (1.0 + sq) / 2.0, sq1 / 2.0, sq2 / 2.0
    return lam1, lam1p, lam1pp, lam2, lam2p, lam2pp


class GroverSurface(MorseSurface):
    """f(s, lam) = (2**-N - 1)(s^2 - s) + lam^2 - lam, the Grover secular field."""

    def __init__(self, N: int, domain: Region | None = None):
        if not (isinstance(N, (int, np.integer)) and N >= 1):
            raise ValidationError(f"N must be an integer >= 1, got {N!r}")
        self.N = int(N)
        self.mu = 2.0 ** (-self.N)
        self.domain = domain or Region(0.0, 1.0, -1.0, 2.0)
        self.ds = 1e-4

    def value(self, s, lam):
        return float((self.mu - 1.0) * (s * s - s) + lam * lam - lam)

    def gradient(self, s, lam):
        return float((self.mu - 1.0) * (2.0 * s - 1.0)), float(2.0 * lam - 1.0)

    def hessian(self, s, lam):
        return 2.0 * (self.mu - 1.0), 0.0, 2.0

    def lambda_poly_coeffs(self, s):
        return np.array([(self.mu - 1.0) * (s * s - s), -1.0, 1.0])

    def derivs_rows(self, s, lam):
        lam = np.atleast_1d(lam).astype(float)
        f = (self.mu - 1.0) * (s * s - s) + lam * lam - lam
        fs = np.full_like(lam, (self.mu - 1.0) * (2.0 * s - 1.0))
        fl = 2.0 * lam - 1.0
        fss = np.full_like(lam, 2.0 * (self.mu - 1.0))
        return f, fs, fl, fss, np.zeros_like(lam), np.full_like(lam, 2.0)


class DegeneracyEnhancedSurface(MorseSurface):
    """Grover field deformed so the ground state is degenerate at s = 1.

    f^b(s, lam) = (1+b) * (lam - lam2(s) - 2b) * (lam - lam1(s))
                        * (lam - (1+2b)*lam1(s))

    At b = 0 this degenerates to f * (lam - lam1) identically, the third root
    stays pinned to zero at s = 1 for every b, and at N = 5, b = 1 the
    critical strip carries the calibration points (0.5, 0.78), (0.5, 2.05)
    with axis curvatures -3.81 / +3.81.
    """

    def __init__(self, N: int, b: float, domain: Region | None = None):
        if not (isinstance(N, (int, np.integer)) and N >= 1):
            raise ValidationError(f"N must be an integer >= 1, got {N!r}")
        if b < 0:
            raise ValidationError(f"enhancement b must be >= 0, got {b}")
        self.N = int(N)
        self.b = float(b)
        self.domain = domain or Region(0.0, 1.0, -0.5, 1.5 + 2.0 * self.b + 1.0)
        self.ds = 1e-4

    def _roots(self, s):
        lam1, lam1p, lam1pp, lam2, lam2p, lam2pp = _grover_roots(self.N, s)
        beta = 2.0 * self.b
        r = (lam2 + beta, lam1, (1.0 + beta) * lam1)
        rp = (lam2p, lam1p, (1.0 + beta) * lam1p)
        rpp = (lam2pp, lam1pp, (1.0 + beta) * lam1pp)
        return r, rp, rpp

    def _pieces(self, s, lam):
        (r1, r2, r3), rp, rpp = self._roots(s)
        return (lam - r1, lam - r2, lam - r3), rp, rpp

    @property
    def prefactor(self):
        return 1.0 + self.b

    def value(self, s, lam):
        (F1, F2, F3), _, _ = self._pieces(s, lam)
        return float(self.prefactor * F1 * F2 * F3)

    def gradient(self, s, lam):
        (F1, F2, F3), (r1p, r2p, r3p), _ = self._pieces(s, lam)
        a = self.prefactor
        fs = -a * (r1p * F2 * F3 + r2p * F1 * F3 + r3p * F1 * F2)
        fl = a * (F2 * F3 + F1 * F3 + F1 * F2)
        return float(fs), float(fl)

    def hessian(self, s, lam):
        (F1, F2, F3), (r1p, r2p, r3p), (r1pp, r2pp, r3pp) = self._pieces(s, lam)
        a = self.prefactor
        fss = a * (-r1pp * F2 * F3 - r2pp * F1 * F3 - r3pp * F1 * F2
                   + 2.0 * (r1p * r2p * F3 + r1p * r3p * F2 + r2p * r3p * F1))
        fsl = -a * (r1p * (F2 + F3) + r2p * (F1 + F3) + r3p * (F1 + F2))
        fll = 2.0 * a * (F1 + F2 + F3)
        return float(fss), float(fsl), float(fll)

    def lambda_poly_coeffs(self, s):
        (r1, r2, r3), _, _ = self._roots(s)
        a = self.prefactor
        e1, e2, e3 = r1 + r2 + r3, r1 * r2 + r1 * r3 + r2 * r3, r1 * r2 * r3
        return np.array([-a * e3, a * e2, -a * e1, a])

    def derivs_rows(self, s, lam):
        lam = np.atleast_1d(lam).astype(float)
        (F1, F2, F3), (r1p, r2p, r3p), (r1pp, r2pp, r3pp) = self._pieces(s, lam)
        a = self.prefactor
        f = a * F1 * F2 * F3
        fs = -a * (r1p * F2 * F3 + r2p * F1 * F3 + r3p * F1 * F2)
        fl = a * (F2 * F3 + F1 * F3 + F1 * F2)
        fss = a * (-r1pp * F2 * F3 - r2pp * F1 * F3 - r3pp * F1 * F2
                   + 2.0 * (r1p * r2p * F3 + r1p * r3p * F2 + r2p * r3p * F1))
        fsl = -a * (r1p * (F2 + F3) + r2p * (F1 + F3) + r3p * (F1 + F2))
        fll = 2.0 * a * (F1 + F2 + F3)
        return f, fs + 0.0 * lam, fl, fss + 0.0 * lam, fsl, fll


class ToyThreePointSurface(MorseSurface):
    """Quadratic-in-lambda field with two eigen-branches +-lam*(s).

    lam*(s) is the printed quartic in u = s/eps interpolating the reciprocal
    curvature targets a_{-1}, a_0, a_1 at u = -1, 0, 1.  With a_0 > a_1 =
    a_{-1} > a_0/4 the surface carries exactly three interior critical points
    (saddle, minimum, saddle) at u = -sqrt(2), 0, +sqrt(2).
    """

    def __init__(self, eps: float, a_minus: float, a_zero: float, a_plus: float,
                 domain: Region | None = None):
        if eps <= 0:
            raise ValidationError(f"eps must be positive, got {eps}")
        for name, val in (("a_minus", a_minus), ("a_zero", a_zero), ("a_plus", a_plus)):
            if val == 0 or not np.isfinite(val):
                raise ValidationError(f"{name} must be nonzero and finite, got {val}")
        self.eps = float(eps)
        self.a = (float(a_minus), float(a_zero), float(a_plus))
        d2 = a_plus - 2.0 * a_zero + a_minus
        d1 = a_minus - a_plus
        # ascending coefficients of lam*(u)
        self._P = np.array([a_zero, -2.0 * d1 / 3.0, 2.0 * d2 / 3.0,
                            d1 / 6.0, -d2 / 6.0])
        self._P1 = _polyder_local(self._P)
        self._P2 = _polyder_local(self._P1)
        half = 2.0 * abs(a_zero)
        self.domain = domain or Region(-2.0 * self.eps, 2.0 * self.eps, -half, half)
        self.ds = 1e-4

    def lam_star(self, s):
        return npoly.polyval(np.asarray(s) / self.eps, self._P)

    def _lam_star_derivs(self, s):
        u = np.asarray(s) / self.eps
        return (npoly.polyval(u, self._P),
                npoly.polyval(u, self._P1) / self.eps,
                npoly.polyval(u, self._P2) / self.eps ** 2)

    def value(self, s, lam):
        ls = self.lam_star(s)
        return float(lam * lam - ls * ls)

    def gradient(self, s, lam):
        ls, ls1, _ = self._lam_star_derivs(s)
        return float(-2.0 * ls * ls1), float(2.0 * lam)

    def hessian(self, s, lam):
        ls, ls1, ls2 = self._lam_star_derivs(s)
        return float(-2.0 * (ls1 * ls1 + ls * ls2)), 0.0, 2.0

    def lambda_poly_coeffs(self, s):
        ls = float(self.lam_star(s))
        return np.array([-ls * ls, 0.0, 1.0])

    def derivs_rows(self, s, lam):
        lam = np.atleast_1d(lam).astype(float)
        ls, ls1, ls2 = self._lam_star_derivs(s)
        f = lam * lam - ls * ls
        fs = np.full_like(lam, -2.0 * ls * ls1)
        fss = np.full_like(lam, -2.0 * (ls1 * ls1 + ls * ls2))
        return f, fs, 2.0 * lam, fss, np.zeros_like(lam), np.full_like(lam, 2.0)


def _polyder_local(c):
    return c[1:] * np.arange(1, len(c))


class DegeneracyFamily(HamiltonianFamily):
    """Diagonal 3x3 shadow of the degeneracy-enhanced surface: its eigenvalue
    curves are the three deformed Grover branches."""

    kind = "analytic_surface"

    def __init__(self, N: int):
        GroverSurface(N)  # validates N
        self.N = int(N)
        self.dimension = 3

    def evaluate(self, s, b):
        lam1, _, _, lam2, _, _ = _grover_roots(self.N, s)
        beta = 2.0 * b
        return np.diag([lam1, (1.0 + beta) * lam1, lam2 + beta])

    def surface_at(self, b, domain=None, **kwargs):
        return DegeneracyEnhancedSurface(self.N, b, domain=domain)


class ToyFamily(HamiltonianFamily):
    """Two-level shadow of the toy surface; the sweep parameter slot carries
    the width eps instead of an enhancement coupling."""

    kind = "analytic_surface"

    def __init__(self, a_minus: float = 0.5, a_zero: float = 1.0, a_plus: float = 0.5):
        ToyThreePointSurface(1.0, a_minus, a_zero, a_plus)  # validates the a_i
        self.a = (float(a_minus), float(a_zero), float(a_plus))
        self.dimension = 2

    def evaluate(self, s, b):
        surf = ToyThreePointSurface(b, *self.a)
        ls = float(surf.lam_star(s))
        return np.diag([ls, -ls])

    def surface_at(self, eps, domain=None, **kwargs):
        return ToyThreePointSurface(eps, *self.a, domain=domain)


_ANALYTIC_BUILDERS = {
    "grover": lambda params: GroverSurface(params.pop("N")),
    "degeneracy_enhanced": lambda params: DegeneracyEnhancedSurface(
        params.pop("N"), params.pop("b")),
    "toy_three_points": lambda params: ToyThreePointSurface(
        params.pop("eps"), params.pop("a_minus"), params.pop("a_zero"),
        params.pop("a_plus")),
}


def analytic_surface(name: str, **params) -> MorseSurface:
    """Closed-form surface factory: grover, degeneracy_enhanced, toy_three_points."""
    builder = _ANALYTIC_BUILDERS.get(name)
    if builder is None:
        raise ValidationError(
            f"unknown analytic surface {name!r}; expected one of "
            f"{sorted(_ANALYTIC_BUILDERS)}")
    params = dict(params)
    try:
        surf = builder(params)
    except KeyError as exc:
        raise ValidationError(f"analytic surface {name!r}: missing parameter {exc}")
    if params:
        raise ValidationError(
            f"analytic surface {name!r}: unexpected parameters {sorted(params)}")
    return surf


def _parse_term_list(entries, n_qubits: int, section: str):
    if not isinstance(entries, list):
        raise ValidationError(f"{section}: expected a list of terms")
    terms = []
    for i, entry in enumerate(entries):
        label = f"{section}[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{label}: expected an object with coeff/word")
        unknown = set(entry) - {"coeff", "word"}
        if unknown:
            raise ValidationError(f"{label}: unknown keys {sorted(unknown)}")
        try:
            coeff = float(entry["coeff"])
            word = str(entry["word"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{label}: {exc}")
        term = PauliTerm(coeff, word)
        _check_term(term, n_qubits, label)
        terms.append(term)
    return terms


def load_model(source) -> HamiltonianFamily:
    """Load a Hamiltonian family from a JSON model file (path, str, or dict).

    Schema: {"n_qubits": int, "initial": [{"coeff", "word"}, ...],
    "final": [...], "enhancement": [...]} with
    H(s, b) = (1-s)*initial + s*final + b*enhancement, or the reduced p-spin
    request {"builtin": "pspin", "N": int, "p": int}.
    """
    if isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read model file {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"model file {path}: invalid JSON at line {exc.lineno}, "
                f"column {exc.colno}: {exc.msg}")
    if not isinstance(data, dict):
        raise ValidationError("model root must be a JSON object")

    if "builtin" in data:
        if data["builtin"] != "pspin":
            raise ValidationError(
                f"builtin: unknown value {data['builtin']!r} (expected 'pspin')")
        unknown = set(data) - {"builtin", "N", "p"}
        if unknown:
            raise ValidationError(f"builtin model: unknown keys {sorted(unknown)}")
        try:
            return ReducedPSpinFamily(int(data["N"]), int(data["p"]))
        except KeyError as exc:
            raise ValidationError(f"builtin pspin model: missing field {exc}")

    unknown = set(data) - {"n_qubits", "initial", "final", "enhancement"}
    if unknown:
        raise ValidationError(f"model: unknown keys {sorted(unknown)}")
    try:
        n_qubits = int(data["n_qubits"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("model: n_qubits must be a positive integer")
    if n_qubits < 1:
        raise ValidationError("model: n_qubits must be a positive integer")
    if n_qubits > PAULI_QUBIT_CAP:
        raise CapacityError(
            f"model: n_qubits={n_qubits} exceeds the dense cap ({PAULI_QUBIT_CAP})")
    for section in ("initial", "final"):
        if section not in data:
            raise ValidationError(f"model: missing section {section!r}")
    initial = _parse_term_list(data["initial"], n_qubits, "initial")
    final = _parse_term_list(data["final"], n_qubits, "final")
    enhancement = _parse_term_list(data.get("enhancement", []), n_qubits, "enhancement")
    return PauliInterpolationFamily(initial, final, enhancement, n_qubits)
