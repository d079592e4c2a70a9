"""Scalar fields f(s, lambda) built from Hamiltonian families.

The central object is the secular surface f(s, lambda) = det(H(s) - lambda*I),
kept exact in lambda through its characteristic-polynomial coefficients.
Closed-form (analytic) surfaces share the same interface so the critical-point
and curvature machinery runs on both.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import CapacityError, ValidationError

CHARPOLY_DIM_CAP = 128


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle in the (s, lambda) plane."""

    s_min: float
    s_max: float
    lam_min: float
    lam_max: float

    def __post_init__(self):
        if not (self.s_min < self.s_max and self.lam_min < self.lam_max):
            raise ValidationError(f"degenerate region {self.astuple()}")

    def astuple(self) -> tuple:
        return (self.s_min, self.s_max, self.lam_min, self.lam_max)

    @property
    def s_width(self) -> float:
        return self.s_max - self.s_min

    @property
    def lam_width(self) -> float:
        return self.lam_max - self.lam_min

    def contains(self, s: float, lam: float, pad: float = 0.0) -> bool:
        return (self.s_min - pad <= s <= self.s_max + pad
                and self.lam_min - pad <= lam <= self.lam_max + pad)

    def contains_region(self, other: "Region", slack: float = 1e-9) -> bool:
        return (self.s_min - slack <= other.s_min and other.s_max <= self.s_max + slack
                and self.lam_min - slack <= other.lam_min
                and other.lam_max <= self.lam_max + slack)

    def union(self, other: "Region") -> "Region":
        return Region(min(self.s_min, other.s_min), max(self.s_max, other.s_max),
                      min(self.lam_min, other.lam_min), max(self.lam_max, other.lam_max))


def charpoly_coefficients(H: np.ndarray, normalize: bool = False,
                          check: bool = True) -> np.ndarray:
    """Ascending coefficients c with det(H - lambda*I) = sum_j c[j] * lambda**j.

    Uses the Faddeev-LeVerrier trace recursion for the monic polynomial
    det(lambda*I - H) and flips the overall sign for odd dimension, so that
    c[n] = (-1)**n.  With ``normalize`` the vector is divided by max|c|,
    which rescales f (and every quantity derived from f(p)); off by default.
    ``check=False`` skips input validation for matrices that are symmetric
    by construction.
    """
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    if check:
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {H.shape}")
        if n > CHARPOLY_DIM_CAP:
            raise CapacityError(
                f"characteristic polynomial of a {n}x{n} matrix exceeds the cap "
                f"({CHARPOLY_DIM_CAP}); use the reduced sector model")
        scale = max(1.0, float(np.abs(H).max()))
        if np.abs(H - H.T).max() > 1e-10 * scale:
            raise ValidationError("matrix is not symmetric")

    c = np.empty(n + 1)
    c[n] = 1.0
    eye = np.eye(n)
    M = eye
    HM = H
    c[n - 1] = -HM.trace()
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(2, n + 1):
            M = HM + c[n - k + 1] * eye
            HM = H @ M
            c[n - k] = -HM.trace() / k
    if not np.all(np.isfinite(c)):
        raise CapacityError(
            "characteristic-polynomial coefficients overflowed; rescale the "
            "model or use the reduced sector")
    if n % 2:
        c = -c
    if normalize:
        c = c / np.abs(c).max()
    return c


def _polyder(c: np.ndarray) -> np.ndarray:
    return c[1:] * np.arange(1, len(c))


class MorseSurface:
    """Base class: a twice-differentiable field over a rectangular domain.

    Subclasses implement value/gradient/hessian; everything geometric
    (curvature, scale estimates, vectorised grids) lives here.
    """

    domain: Region
    ds: float = 1e-4

    def value(self, s: float, lam: float) -> float:
        raise NotImplementedError

    def gradient(self, s: float, lam: float) -> tuple:
        raise NotImplementedError

    def hessian(self, s: float, lam: float) -> tuple:
        """Returns (f_ss, f_slam, f_lamlam)."""
        raise NotImplementedError

    def derivs(self, s: float, lam: float) -> tuple:
        """(f, f_s, f_lam, f_ss, f_slam, f_lamlam) in one call."""
        f = self.value(s, lam)
        fs, fl = self.gradient(s, lam)
        fss, fsl, fll = self.hessian(s, lam)
        return f, fs, fl, fss, fsl, fll

    def lambda_poly_coeffs(self, s: float):
        """Ascending lambda-polynomial coefficients at fixed s, or None.

        Surfaces polynomial in lambda expose this so root seeding and
        interlacing checks can work on exact coefficients.
        """
        return None

    def gauss_curvature(self, s: float, lam: float) -> tuple:
        """(K, H_mean) of the graph z = f at the given point."""
        fs, fl = self.gradient(s, lam)
        fss, fsl, fll = self.hessian(s, lam)
        g = 1.0 + fs * fs + fl * fl
        K = (fss * fll - fsl * fsl) / (g * g)
        H_mean = ((1.0 + fl * fl) * fss - 2.0 * fs * fl * fsl
                  + (1.0 + fs * fs) * fll) / (2.0 * g ** 1.5)
        return K, H_mean

    def f_scale(self, region: Region | None = None) -> float:
        """Typical |f| magnitude over a region, used to set tolerances."""
        region = region or self.domain
        key = region.astuple()
        cache = getattr(self, "_scale_cache", None)
        if cache is None:
            cache = self._scale_cache = {}
        if key not in cache:
            ss = np.linspace(region.s_min, region.s_max, 33)
            ll = np.linspace(region.lam_min, region.lam_max, 33)
            m = 0.0
            for s in ss:
                m = max(m, float(np.abs(self.value_row(s, ll)).max()))
            cache[key] = max(m, 1e-12)
        return cache[key]

    # Row-wise evaluation along fixed s; subclasses override with fast paths.
    def value_row(self, s: float, lam: np.ndarray) -> np.ndarray:
        return np.array([self.value(s, l) for l in np.atleast_1d(lam)])

    def derivs_rows(self, s: float, lam: np.ndarray) -> tuple:
        lam = np.atleast_1d(lam)
        out = [np.empty(lam.shape) for _ in range(6)]
        for j, l in enumerate(lam):
            vals = self.derivs(s, l)
            for a, v in zip(out, vals):
                a[j] = v
        return tuple(out)

    def curvature_density_rows(self, s: float, lam: np.ndarray) -> np.ndarray:
        """K * sqrt(1 + f_s^2 + f_lam^2), the Gauss-Bonnet integrand."""
        _, fs, fl, fss, fsl, fll = self.derivs_rows(s, lam)
        g = 1.0 + fs * fs + fl * fl
        return (fss * fll - fsl * fsl) / g ** 1.5


class MatrixSurface(MorseSurface):
    """det(H(s) - lambda*I) for a Hamiltonian family at fixed enhancement b.

    lambda-derivatives are exact (derivative polynomials); s-derivatives use
    central finite differences of the coefficient vectors with step ``ds``.
    """

    def __init__(self, family, b: float, domain: Region | None = None,
                 ds: float = 1e-4, normalize: bool = False):
        if ds <= 0:
            raise ValidationError("ds must be positive")
        self.family = family
        self.b = float(b)
        self.ds = float(ds)
        self.normalize = bool(normalize)
        self.dimension = family.dimension
        if self.dimension > CHARPOLY_DIM_CAP:
            raise CapacityError(
                f"secular surface of a {self.dimension}-dimensional family "
                f"exceeds the coefficient cap ({CHARPOLY_DIM_CAP})")
        self._domain = domain
        self._cache: OrderedDict = OrderedDict()
        affine = getattr(family, "affine_parts", None)
        self._affine = affine(self.b) if affine is not None else None

    @property
    def domain(self) -> Region:
        if self._domain is None:
            self._domain = default_spectral_domain(self.family, self.b)
        return self._domain

    def _matrix(self, s: float) -> np.ndarray:
        if self._affine is not None:
            H0, H1 = self._affine
            return H0 + s * H1
        return self.family.evaluate(s, self.b)

    def _bundle(self, s: float) -> tuple:
        """(c, c', c'') lambda-polynomial coefficient vectors at s."""
        key = float(s)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        c = charpoly_coefficients(self._matrix(key), normalize=self.normalize,
                                  check=False)
        bundle = (c, _polyder(c), _polyder(_polyder(c)))
        self._cache[key] = bundle
        if len(self._cache) > 8192:
            self._cache.popitem(last=False)
        return bundle

    def value(self, s, lam):
        c, _, _ = self._bundle(s)
        return float(npoly.polyval(lam, c))

    def gradient(self, s, lam):
        c, c1, _ = self._bundle(s)
        cp, _, _ = self._bundle(s + self.ds)
        cm, _, _ = self._bundle(s - self.ds)
        fs = (npoly.polyval(lam, cp) - npoly.polyval(lam, cm)) / (2 * self.ds)
        fl = npoly.polyval(lam, c1)
        return float(fs), float(fl)

    def hessian(self, s, lam):
        c, _, c2 = self._bundle(s)
        cp, cp1, _ = self._bundle(s + self.ds)
        cm, cm1, _ = self._bundle(s - self.ds)
        f0 = npoly.polyval(lam, c)
        fss = (npoly.polyval(lam, cp) - 2 * f0 + npoly.polyval(lam, cm)) / self.ds ** 2
        fsl = (npoly.polyval(lam, cp1) - npoly.polyval(lam, cm1)) / (2 * self.ds)
        fll = npoly.polyval(lam, c2)
        return float(fss), float(fsl), float(fll)

    def derivs(self, s, lam):
        c, c1, c2 = self._bundle(s)
        cp, cp1, _ = self._bundle(s + self.ds)
        cm, cm1, _ = self._bundle(s - self.ds)
        f = npoly.polyval(lam, c)
        vp, vm = npoly.polyval(lam, cp), npoly.polyval(lam, cm)
        fs = (vp - vm) / (2 * self.ds)
        fss = (vp - 2 * f + vm) / self.ds ** 2
        fsl = (npoly.polyval(lam, cp1) - npoly.polyval(lam, cm1)) / (2 * self.ds)
        return (float(f), float(fs), float(npoly.polyval(lam, c1)),
                float(fss), float(fsl), float(npoly.polyval(lam, c2)))

    def lambda_poly_coeffs(self, s):
        return self._bundle(s)[0]

    def value_row(self, s, lam):
        c, _, _ = self._bundle(s)
        return np.asarray(npoly.polyval(np.atleast_1d(lam), c))

    def derivs_rows(self, s, lam):
        lam = np.atleast_1d(lam)
        c, c1, c2 = self._bundle(s)
        cp, cp1, _ = self._bundle(s + self.ds)
        cm, cm1, _ = self._bundle(s - self.ds)
        f = npoly.polyval(lam, c)
        vp, vm = npoly.polyval(lam, cp), npoly.polyval(lam, cm)
        fs = (vp - vm) / (2 * self.ds)
        fss = (vp - 2 * f + vm) / self.ds ** 2
        fsl = (npoly.polyval(lam, cp1) - npoly.polyval(lam, cm1)) / (2 * self.ds)
        return f, fs, npoly.polyval(lam, c1), fss, fsl, npoly.polyval(lam, c2)


class CallableSurface(MorseSurface):
    """Analytic surface from user callables; missing partials fall back to
    central finite differences of f.  Callables must broadcast over arrays."""

    def __init__(self, f, domain: Region, fs=None, fl=None, fss=None,
                 fsl=None, fll=None, ds: float = 1e-4, fd_step: float = 1e-6):
        self._f = f
        self.domain = domain
        self.ds = ds
        self._fd = fd_step
        self._fs, self._fl = fs, fl
        self._fss, self._fsl, self._fll = fss, fsl, fll

    def value(self, s, lam):
        return float(self._f(s, lam))

    def gradient(self, s, lam):
        h = self._fd
        fs = (self._fs(s, lam) if self._fs is not None
              else (self._f(s + h, lam) - self._f(s - h, lam)) / (2 * h))
        fl = (self._fl(s, lam) if self._fl is not None
              else (self._f(s, lam + h) - self._f(s, lam - h)) / (2 * h))
        return float(fs), float(fl)

    def hessian(self, s, lam):
        h = max(self._fd, 1e-5)
        if self._fss is not None:
            fss = self._fss(s, lam)
        else:
            fss = (self._f(s + h, lam) - 2 * self._f(s, lam) + self._f(s - h, lam)) / h ** 2
        if self._fll is not None:
            fll = self._fll(s, lam)
        else:
            fll = (self._f(s, lam + h) - 2 * self._f(s, lam) + self._f(s, lam - h)) / h ** 2
        if self._fsl is not None:
            fsl = self._fsl(s, lam)
        else:
            fsl = (self._f(s + h, lam + h) - self._f(s + h, lam - h)
                   - self._f(s - h, lam + h) + self._f(s - h, lam - h)) / (4 * h ** 2)
        return float(fss), float(fsl), float(fll)

    def value_row(self, s, lam):
        return np.asarray(self._f(s, np.atleast_1d(lam)), dtype=float)

    def derivs_rows(self, s, lam):
        lam = np.atleast_1d(lam)
        if all(p is not None for p in
               (self._fs, self._fl, self._fss, self._fsl, self._fll)):
            shape = np.broadcast_shapes(np.shape(s), lam.shape)
            def full(v):
                return np.broadcast_to(np.asarray(v, dtype=float), shape).copy()
            return (full(self._f(s, lam)), full(self._fs(s, lam)),
                    full(self._fl(s, lam)), full(self._fss(s, lam)),
                    full(self._fsl(s, lam)), full(self._fll(s, lam)))
        return super().derivs_rows(s, lam)


class ScaledSurface(MorseSurface):
    """c * f for an existing surface; used to pin scaling behaviour."""

    def __init__(self, base: MorseSurface, factor: float):
        self.base = base
        self.factor = float(factor)
        self.domain = base.domain
        self.ds = base.ds

    def value(self, s, lam):
        return self.factor * self.base.value(s, lam)

    def gradient(self, s, lam):
        fs, fl = self.base.gradient(s, lam)
        return self.factor * fs, self.factor * fl

    def hessian(self, s, lam):
        return tuple(self.factor * v for v in self.base.hessian(s, lam))

    def lambda_poly_coeffs(self, s):
        c = self.base.lambda_poly_coeffs(s)
        return None if c is None else self.factor * c

    def derivs_rows(self, s, lam):
        return tuple(self.factor * a for a in self.base.derivs_rows(s, lam))


@dataclass
class SpectralCurves:
    """Sorted eigenvalue curves of a family over an s-grid."""

    s_grid: np.ndarray
    energies: np.ndarray  # shape (len(s_grid), n), rows sorted ascending
    gap: np.ndarray       # energies[:, 1] - energies[:, 0]

    @property
    def min_gap(self) -> float:
        return float(self.gap.min())

    @property
    def s_at_min_gap(self) -> float:
        return float(self.s_grid[int(np.argmin(self.gap))])


def spectral_curves(family, b: float, s_grid) -> SpectralCurves:
    """Dense symmetric eigensolve of H(s, b) on each grid point."""
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size < 1:
        raise ValidationError("s_grid must be a non-empty 1-d array")
    if s_grid.min() < -1e-12 or s_grid.max() > 1 + 1e-12:
        raise ValidationError("s_grid must lie inside [0, 1]")
    energies = np.empty((s_grid.size, family.dimension))
    for i, s in enumerate(s_grid):
        energies[i] = np.linalg.eigvalsh(family.evaluate(float(s), b))
    gap = energies[:, 1] - energies[:, 0] if family.dimension > 1 else np.zeros(s_grid.size)
    return SpectralCurves(s_grid, energies, gap)


def default_spectral_domain(family, b: float, margin: float = 0.1,
                            n_points: int = 101, s_pad: float = 1e-5) -> Region:
    """[0,1] x eigenvalue hull padded by ``margin`` times the spread.

    Interlacing puts every critical lambda strictly inside the hull, so the
    lambda margin only matters for plotting.  The tiny ``s_pad`` keeps
    anti-crossings that asymptote to the endpoints (where a coupling term
    dies) countable as interior points; the matrix entries extend
    polynomially, so evaluation just past [0, 1] is well defined.
    """
    curves = spectral_curves(family, b, np.linspace(0.0, 1.0, n_points))
    lo = float(curves.energies.min())
    hi = float(curves.energies.max())
    pad = margin * max(hi - lo, 1e-6)
    return Region(-s_pad, 1.0 + s_pad, lo - pad, hi + pad)


# Functional wrappers carrying the domain contract (out-of-domain queries are
# user errors; internal solvers call the methods directly).

def eval_f(surface: MorseSurface, s: float, lam: float) -> float:
    if not surface.domain.contains(s, lam):
        raise ValidationError(
            f"point ({s}, {lam}) outside surface domain {surface.domain.astuple()}")
    return surface.value(s, lam)


def gradient_f(surface: MorseSurface, s: float, lam: float) -> tuple:
    if not surface.domain.contains(s, lam, pad=-surface.ds):
        raise ValidationError(
            f"point ({s}, {lam}) not in the domain interior (margin {surface.ds})")
    return surface.gradient(s, lam)


def hessian_f(surface: MorseSurface, s: float, lam: float) -> tuple:
    if not surface.domain.contains(s, lam, pad=-surface.ds):
        raise ValidationError(
            f"point ({s}, {lam}) not in the domain interior (margin {surface.ds})")
    return surface.hessian(s, lam)


def gauss_curvature(surface: MorseSurface, s: float, lam: float) -> tuple:
    return surface.gauss_curvature(s, lam)
