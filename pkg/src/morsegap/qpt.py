"""Thermodynamic-limit analysis of the p-spin family.

The classical energy per spin over the magnetization angle is

    e(s, theta) = -s*b*sin(theta)**p + s*(1-b)*cos(theta)**2 - (1-s)*cos(theta)

with m_z = sin(theta), m_x = cos(theta); this is the unique angle convention
under which the p = 2, b = 1 minimizer satisfies cos(theta*) = (1-s)/(2*s).
A transition is called first order when the global minimizer angle jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import CapacityError, ValidationError
from .hamiltonians import ReducedPSpinFamily
from .surface import spectral_curves

JUMP_THRESHOLD = 0.05     # radians; an order above polish noise, an order
                          # below the p = 5 first-order jump


@dataclass(frozen=True)
class ClassicalEnergyParams:
    p: int
    b: float = 1.0
    k: int = 2

    def __post_init__(self):
        if not (isinstance(self.p, int) and self.p >= 2):
            raise ValidationError(f"p must be an integer >= 2, got {self.p!r}")
        if self.k != 2:
            raise ValidationError(f"the x-catalyst power is fixed to k=2, got {self.k}")
        if not (0.0 <= self.b <= 1.0):
            raise ValidationError(f"b={self.b} outside [0, 1]")


def magnetization_energy(s, m_z, m_x, params: ClassicalEnergyParams):
    """Per-spin energy as a function of the magnetization components; flips
    of m_z leave it invariant exactly when p is even."""
    return (-s * params.b * m_z ** params.p
            + s * (1.0 - params.b) * m_x ** 2
            - (1.0 - s) * m_x)


def classical_energy(s, theta, params: ClassicalEnergyParams):
    """e(s, theta) on the half-circle theta in [0, pi]."""
    s_arr, th = np.asarray(s, dtype=float), np.asarray(theta, dtype=float)
    if np.any(s_arr < 0) or np.any(s_arr > 1):
        raise ValidationError("s must lie in [0, 1]")
    if np.any(th < -1e-12) or np.any(th > np.pi + 1e-12):
        raise ValidationError("theta must lie in [0, pi]")
    return magnetization_energy(s_arr, np.sin(th), np.cos(th), params)


def _denergy_dtheta(s, theta, params: ClassicalEnergyParams):
    sin, cos = np.sin(theta), np.cos(theta)
    return (-s * params.b * params.p * sin ** (params.p - 1) * cos
            - 2.0 * s * (1.0 - params.b) * sin * cos
            + (1.0 - s) * sin)


@dataclass
class QptReport:
    s_grid: np.ndarray
    theta_star: np.ndarray
    e_star: np.ndarray
    order: str                    # "first" or "second_or_higher"
    s_c: float | None
    jump: float
    jump_threshold: float
    params: ClassicalEnergyParams
    degenerate_s: list = field(default_factory=list)
    spinodal_s: float | None = None  # onset of a second (metastable) minimum


def _local_minima(s: float, params: ClassicalEnergyParams,
                  theta_grid: np.ndarray):
    """All local minima of e(s, .) on [0, pi], polished to stationarity.

    The derivative carries a sin(theta) factor, so the endpoints are always
    stationary; interior minima come from bracketed sign changes of the
    derivative.
    """
    d = _denergy_dtheta(s, theta_grid, params)
    minima = []
    for j in np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0):
        if d[j] < 0 < d[j + 1]:  # descending-to-ascending: a minimum
            root = brentq(lambda t: _denergy_dtheta(s, t, params),
                          theta_grid[j], theta_grid[j + 1],
                          xtol=1e-13, rtol=1e-15)
            minima.append(float(root))
    eps = np.pi / len(theta_grid)
    if _denergy_dtheta(s, eps, params) > 0:
        minima.append(0.0)
    if _denergy_dtheta(s, np.pi - eps, params) < 0:
        minima.append(float(np.pi))
    if not minima:
        minima.append(float(theta_grid[int(np.argmin(
            magnetization_energy(s, np.sin(theta_grid), np.cos(theta_grid), params)))]))
    energies = [float(magnetization_energy(s, np.sin(t), np.cos(t), params))
                for t in minima]
    return minima, energies


def _minimize_at(s: float, params: ClassicalEnergyParams, theta_grid: np.ndarray):
    """(theta*, e*, degenerate?) -- global minimum with plateau detection."""
    minima, energies = _local_minima(s, params, theta_grid)
    order = np.argsort(energies)
    best = order[0]
    degenerate = any(energies[k] - energies[best] <= 1e-10
                     and abs(minima[k] - minima[best]) > 1e-6
                     for k in order[1:])
    return minima[best], energies[best], degenerate


def _spinodal(s_grid, params: ClassicalEnergyParams, theta_grid) -> float | None:
    """Smallest s at which the energy carries more than one local minimum
    (the fold where the metastable branch is born)."""
    counts = [len(_local_minima(float(s), params, theta_grid)[0]) > 1
              for s in s_grid]
    if not any(counts):
        return None
    i = counts.index(True)
    if i == 0:
        return float(s_grid[0])
    lo, hi = float(s_grid[i - 1]), float(s_grid[i])
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if len(_local_minima(mid, params, theta_grid)[0]) > 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def minimizer_curve(s_grid, params: ClassicalEnergyParams,
                    theta_resolution: int = 512,
                    jump_threshold: float = JUMP_THRESHOLD) -> QptReport:
    """Track the global minimizer angle over s and classify the transition.

    The largest consecutive jump of theta* decides the order; for first-order
    curves the jump location is refined by three bisections of the jump
    interval.  Grid points whose energy landscape has two global minima
    within 1e-10 are flagged (that degeneracy is the transition point).
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size < 2:
        raise ValidationError("s_grid must be a 1-d array with >= 2 entries")
    if theta_resolution < 256:
        raise ValidationError(
            f"theta_resolution must be >= 256, got {theta_resolution}")
    theta_grid = np.linspace(0.0, np.pi, theta_resolution)

    theta_star = np.empty(s_grid.size)
    e_star = np.empty(s_grid.size)
    degenerate_s = []
    for i, s in enumerate(s_grid):
        t, e_min, degenerate = _minimize_at(float(s), params, theta_grid)
        theta_star[i] = t
        e_star[i] = e_min
        if degenerate:
            degenerate_s.append(float(s))

    jumps = np.abs(np.diff(theta_star))
    jump = float(jumps.max()) if jumps.size else 0.0
    order = "first" if jump > jump_threshold else "second_or_higher"
    s_c = None
    if order == "first":
        j = int(np.argmax(jumps))
        lo, hi = float(s_grid[j]), float(s_grid[j + 1])
        t_lo, t_hi = theta_star[j], theta_star[j + 1]
        for _ in range(3):
            mid = 0.5 * (lo + hi)
            t_mid, _, _ = _minimize_at(mid, params, theta_grid)
            if abs(t_mid - t_lo) >= abs(t_hi - t_mid):
                hi, t_hi = mid, t_mid
            else:
                lo, t_lo = mid, t_mid
        s_c = 0.5 * (lo + hi)
    spinodal = _spinodal(s_grid, params, theta_grid) if order == "first" else None
    return QptReport(s_grid=s_grid, theta_star=theta_star, e_star=e_star,
                     order=order, s_c=s_c, jump=jump,
                     jump_threshold=jump_threshold, params=params,
                     degenerate_s=degenerate_s, spinodal_s=spinodal)


@dataclass
class GapScanRow:
    N: int
    min_gap: float
    s_at_min: float


def finite_size_gap_scan(N_list, p: int, b: float,
                         s_resolution: int = 501) -> list:
    """Minimum spectral gap of the reduced p-spin family per system size."""
    if s_resolution < 2:
        raise ValidationError("s_resolution must be >= 2")
    rows = []
    s_grid = np.linspace(0.0, 1.0, s_resolution)
    for N in N_list:
        try:
            fam = ReducedPSpinFamily(int(N), p)
        except ValidationError:
            raise
        except Exception as exc:  # pragma: no cover
            raise CapacityError(str(exc))
        curves = spectral_curves(fam, b, s_grid)
        rows.append(GapScanRow(N=int(N), min_gap=curves.min_gap,
                               s_at_min=curves.s_at_min_gap))
    return rows
