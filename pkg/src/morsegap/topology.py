"""Euler characteristics from Morse counts and numerical Gauss-Bonnet
accounting: regional curvature integrals and their redistribution across
critical-point neighbourhoods.

Regional integrals carry boundary terms the closed-surface theorem does not,
so reports state raw integrals plus the defect against 2*pi*chi instead of
asserting equality.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .critical_points import (KIND_MAXIMUM, KIND_MINIMUM, KIND_SADDLE,
                              CriticalPoint, find_critical_points)
from .errors import ValidationError
from .surface import MorseSurface, Region


def euler_characteristic(points) -> int:
    """Morse count: #minima - #saddles + #maxima."""
    chi = 0
    for p in points:
        if p.kind == KIND_SADDLE:
            chi -= 1
        elif p.kind in (KIND_MINIMUM, KIND_MAXIMUM):
            chi += 1
        else:
            raise ValidationError(f"unknown critical point kind {p.kind!r}")
    return chi


@dataclass
class CurvatureIntegral:
    """Midpoint-rule integral of K dA with one Richardson refinement."""

    region: Region
    resolution: int
    coarse: float
    fine: float          # at 2x resolution
    workers: int = 1

    @property
    def value(self) -> float:
        return self.fine

    @property
    def richardson_defect(self) -> float:
        return self.fine - self.coarse


def _curvature_cell_sums(surface: MorseSurface, region: Region,
                         resolution: int, workers: int) -> float:
    ds = region.s_width / resolution
    dl = region.lam_width / resolution
    s_mid = region.s_min + (np.arange(resolution) + 0.5) * ds
    lam_mid = region.lam_min + (np.arange(resolution) + 0.5) * dl

    def row_sum(s):
        integrand = surface.curvature_density_rows(float(s), lam_mid)
        if not np.all(np.isfinite(integrand)):
            raise ValidationError(f"non-finite curvature integrand at s={s}")
        return float(integrand.sum())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(row_sum, s_mid))
    else:
        sums = [row_sum(s) for s in s_mid]
    # Fixed summation order keeps results identical across worker counts.
    return float(np.sum(sums)) * ds * dl


def integrate_curvature(surface: MorseSurface, region: Region | None = None,
                        resolution: int = 128, workers: int = 1
                        ) -> CurvatureIntegral:
    """Integral of the Gaussian curvature over the graph of f above region.

    Midpoint rule at ``resolution`` and ``2*resolution`` cells per axis; the
    difference of the two is the convergence defect (second-order rule, so it
    shrinks by about 4x per doubling).
    """
    region = region or surface.domain
    if resolution < 64:
        raise ValidationError(f"resolution must be >= 64, got {resolution}")
    coarse = _curvature_cell_sums(surface, region, resolution, workers)
    fine = _curvature_cell_sums(surface, region, 2 * resolution, workers)
    return CurvatureIntegral(region=region, resolution=resolution,
                             coarse=coarse, fine=fine, workers=workers)


@dataclass
class PointNeighbourhood:
    point: CriticalPoint
    local_integral: float
    level_radius: float   # the |f - f(p)| level bound
    n_cells: int


@dataclass
class CurvatureReport:
    region: Region
    total_curvature: float
    per_point: list
    chi_morse: int
    defect: float            # total_curvature - 2*pi*chi_morse
    resolution: int
    workers: int = 1
    warnings: list = field(default_factory=list)


def _level_radii(points) -> list:
    """Half the distance to the nearest other *distinct* critical value.

    Symmetric spectra produce exactly coincident critical values (mirror
    saddles), so values closer than a relative tolerance count as one level
    and the radius is taken to the next distinct one.
    """
    values = [p.f_val for p in points]
    scale = max((abs(v) for v in values), default=1.0) or 1.0
    tol = 1e-9 * scale
    radii = []
    for i, v in enumerate(values):
        others = [abs(v - w) for j, w in enumerate(values) if j != i]
        others = [d for d in others if d > tol]
        radii.append(0.5 * min(others) if others else None)
    return radii


def curvature_report(surface: MorseSurface, region: Region | None = None,
                     resolution: int = 128, grid_density: int = 24,
                     workers: int = 1, points=None) -> CurvatureReport:
    """Regional curvature total plus per-point Morse-neighbourhood integrals.

    Each neighbourhood is the connected component, through the point's cell,
    of the value-based patch |f - f(p)| <= r; r starts at half the distance
    to the nearest other critical value and shrinks (with a warning) until
    the patches are pairwise disjoint.
    """
    region = region or surface.domain
    if resolution < 64:
        raise ValidationError(f"resolution must be >= 64, got {resolution}")
    if points is None:
        points = find_critical_points(surface, region, grid_density).points
    points = list(points)

    total = integrate_curvature(surface, region, resolution, workers)
    chi = euler_characteristic(points)
    warnings: list = []

    ds = region.s_width / resolution
    dl = region.lam_width / resolution
    s_mid = region.s_min + (np.arange(resolution) + 0.5) * ds
    lam_mid = region.lam_min + (np.arange(resolution) + 0.5) * dl
    F = np.empty((resolution, resolution))
    G = np.empty((resolution, resolution))
    for i, s in enumerate(s_mid):
        f, fs, fl, fss, fsl, fll = surface.derivs_rows(float(s), lam_mid)
        F[i] = f
        G[i] = (fss * fll - fsl * fsl) / (1.0 + fs * fs + fl * fl) ** 1.5

    spread = float(F.max() - F.min())
    radii = _level_radii(points)
    radii = [r if r is not None else 0.25 * max(spread, 1e-12) for r in radii]

    def components(radii_now):
        comps = []
        for p, r in zip(points, radii_now):
            mask = np.abs(F - p.f_val) <= r
            labels, _ = ndimage.label(mask)
            ci = min(int((p.s - region.s_min) / ds), resolution - 1)
            cj = min(int((p.lam - region.lam_min) / dl), resolution - 1)
            lab = labels[ci, cj]
            comps.append(labels == lab if lab != 0 else np.zeros_like(mask))
        return comps

    comps = components(radii)
    for _ in range(6):
        overlap = False
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                if np.any(comps[i] & comps[j]):
                    overlap = True
        if not overlap:
            break
        radii = [0.5 * r for r in radii]
        warnings.append("overlapping Morse neighbourhoods; level radii halved")
        comps = components(radii)
    else:
        warnings.append("neighbourhood overlap persists; contested cells "
                        "assigned to the closer critical value")
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                shared = comps[i] & comps[j]
                if np.any(shared):
                    closer_i = (np.abs(F - points[i].f_val)
                                <= np.abs(F - points[j].f_val))
                    comps[i] &= ~shared | closer_i
                    comps[j] &= ~shared | ~closer_i

    cell = ds * dl
    per_point = [PointNeighbourhood(point=p,
                                    local_integral=float(G[c].sum() * cell),
                                    level_radius=float(r),
                                    n_cells=int(c.sum()))
                 for p, r, c in zip(points, radii, comps)]
    return CurvatureReport(region=region, total_curvature=total.value,
                           per_point=per_point, chi_morse=chi,
                           defect=total.value - 2.0 * math.pi * chi,
                           resolution=resolution, workers=workers,
                           warnings=warnings)


def curvature_redistribution(surface_a: MorseSurface, surface_b: MorseSurface,
                             region: Region, resolution: int = 128,
                             grid_density: int = 24, workers: int = 1
                             ) -> tuple:
    """Paired curvature reports over a shared region, showing how the total
    curvature re-spreads as the critical-point census changes."""
    if not (surface_a.domain.contains_region(region)
            and surface_b.domain.contains_region(region)):
        raise ValidationError("both surfaces must contain the shared region")
    rep_a = curvature_report(surface_a, region, resolution, grid_density, workers)
    rep_b = curvature_report(surface_b, region, resolution, grid_density, workers)
    return rep_a, rep_b
