"""Locating and classifying nondegenerate critical points of a surface.

Newton iteration on grad f = 0 seeded from a coarse grid plus the roots of
the lambda-derivative polynomial on each grid column.  Per-point quantities
follow the local quadratic model f(p) + K1*u^2 + K2*v^2 with K_i the Taylor
coefficients (half the Hessian eigenvalues); the gap and asymptote-angle
formulas are calibrated so the Grover saddle reproduces the exact minimum gap
2**(-N/2) with no stray factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import SignPatternError, ValidationError
from .surface import MorseSurface, Region

KIND_MINIMUM = "minimum"
KIND_SADDLE = "saddle"
KIND_MAXIMUM = "maximum"

_NEWTON_MAX_ITER = 50


@dataclass
class CriticalPoint:
    s: float
    lam: float
    f_val: float
    f_ss: float
    f_sl: float
    f_ll: float
    kind: str
    morse_index: int
    K1: float
    K2: float
    axis_rotation: float
    gauss_K: float      # det of the Hessian = 4*K1*K2
    residual: float     # |grad f| at the accepted point
    b: float | None = None
    level_index: int | None = None  # eigenvalue curves below the point

    @property
    def hessian(self) -> np.ndarray:
        return np.array([[self.f_ss, self.f_sl], [self.f_sl, self.f_ll]])

    @property
    def det_hessian(self) -> float:
        return self.f_ss * self.f_ll - self.f_sl ** 2


@dataclass
class DegeneratePoint:
    """Converged stationary point whose Hessian determinant is below the
    nondegeneracy threshold; a Cerf event is likely nearby."""

    s: float
    lam: float
    f_val: float
    det_hessian: float
    residual: float


@dataclass
class CriticalPointSearch:
    points: list
    degenerate: list
    region: Region
    tol_grad: float
    tol_nondegen: float
    tol_dedup: float = 1e-6

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _level_index(surface: MorseSurface, s: float, lam: float):
    """Number of lambda-roots of f(s, .) strictly below lam.

    A critical point sits between two fixed eigenvalue curves along its whole
    branch, so this discrete label makes continuation matching channel-safe.
    """
    c = surface.lambda_poly_coeffs(s)
    if c is None:
        return None
    roots = npoly.polyroots(c)
    real = roots[np.abs(roots.imag) <= 1e-6 * (1.0 + np.abs(roots.real))].real
    return int(np.sum(real < lam))


def _classify(s, lam, f, fs, fl, fss, fsl, fll, b=None, level=None) -> CriticalPoint:
    hess = np.array([[fss, fsl], [fsl, fll]])
    w, v = np.linalg.eigh(hess)
    # K1 goes to the principal axis leaning along s; ties prefer the negative
    # curvature (anti-crossing channels run along s).
    c0, c1 = abs(v[0, 0]), abs(v[0, 1])
    if abs(c0 - c1) < 1e-12:
        i1 = int(np.argmin(w))
    else:
        i1 = 0 if c0 > c1 else 1
    i2 = 1 - i1
    K1, K2 = w[i1] / 2.0, w[i2] / 2.0
    rot = math.atan2(v[1, i1], v[0, i1])
    if rot <= -math.pi / 2:
        rot += math.pi
    elif rot > math.pi / 2:
        rot -= math.pi
    index = int(np.sum(w < 0))
    if index == 0:
        kind = KIND_MINIMUM
    elif index == 1:
        kind = KIND_SADDLE
    else:
        kind = KIND_MAXIMUM
    return CriticalPoint(
        s=float(s), lam=float(lam), f_val=float(f), f_ss=float(fss),
        f_sl=float(fsl), f_ll=float(fll), kind=kind, morse_index=index,
        K1=float(K1), K2=float(K2), axis_rotation=float(rot),
        gauss_K=float(fss * fll - fsl * fsl), residual=float(math.hypot(fs, fl)),
        b=b, level_index=level)


def _newton(surface: MorseSurface, s0: float, lam0: float, region: Region,
            tol_grad: float):
    """Newton with backtracking on |grad f|^2; returns (s, lam) or None.

    Iterates to position stagnation regardless of the gradient tolerance;
    acceptance then requires a small gradient AND a small residual Newton
    step, which rejects flat-valley stagnation far from any true root.
    """
    s, lam = float(s0), float(lam0)
    wander_s = 0.5 * region.s_width
    wander_l = 0.5 * region.lam_width
    width = max(region.s_width, region.lam_width)
    step_tol = 1e-11 * width
    f, fs, fl, fss, fsl, fll = surface.derivs(s, lam)
    g2 = fs * fs + fl * fl
    if not np.isfinite(g2):
        return None
    for _ in range(_NEWTON_MAX_ITER):
        det = fss * fll - fsl * fsl
        if det == 0.0 or not np.isfinite(det):
            break
        step_s = -(fll * fs - fsl * fl) / det
        step_l = -(fss * fl - fsl * fs) / det
        if max(abs(step_s), abs(step_l)) < step_tol:
            break
        alpha = 1.0
        moved = False
        for _ in range(10):
            s_new, lam_new = s + alpha * step_s, lam + alpha * step_l
            if (region.s_min - wander_s <= s_new <= region.s_max + wander_s
                    and region.lam_min - wander_l <= lam_new <= region.lam_max + wander_l):
                trial = surface.derivs(s_new, lam_new)
                g2_new = trial[1] ** 2 + trial[2] ** 2
                if np.isfinite(g2_new) and g2_new <= (1.0 - 1e-4 * alpha) * g2 + 1e-300:
                    s, lam = s_new, lam_new
                    f, fs, fl, fss, fsl, fll = trial
                    g2 = g2_new
                    moved = True
                    break
            alpha *= 0.5
        if not moved:
            break
    # Endgame: inside the quadratic basin take full Newton steps so every
    # convergent seed lands on the same machine-precision point (dedup relies
    # on that).
    for _ in range(8):
        det = fss * fll - fsl * fsl
        if det == 0.0 or not np.isfinite(det):
            break
        step_s = -(fll * fs - fsl * fl) / det
        step_l = -(fss * fl - fsl * fs) / det
        norm = max(abs(step_s), abs(step_l))
        if not np.isfinite(norm) or norm > 1e-4 * width:
            break
        if norm < step_tol:
            break
        trial = surface.derivs(s + step_s, lam + step_l)
        g2_new = trial[1] ** 2 + trial[2] ** 2
        if not np.isfinite(g2_new):
            break
        s, lam = s + step_s, lam + step_l
        f, fs, fl, fss, fsl, fll = trial
        g2 = g2_new
    if math.sqrt(g2) >= tol_grad:
        return None
    det = fss * fll - fsl * fsl
    if det != 0.0 and np.isfinite(det):
        resid_step = max(abs(fll * fs - fsl * fl), abs(fss * fl - fsl * fs)) / abs(det)
    else:
        resid_step = 0.0 if g2 == 0.0 else np.inf
    if resid_step > 1e-6 * width:
        return None
    return s, lam


def _interlacing_seeds(surface: MorseSurface, s_cols, region: Region):
    """Roots of d f/d lambda on each grid column; near-exact lambda seeds."""
    seeds = []
    pad = 0.05 * region.lam_width
    for s in s_cols:
        c = surface.lambda_poly_coeffs(s)
        if c is None:
            return []
        d1 = c[1:] * np.arange(1, len(c))
        if len(d1) < 2 or not np.any(d1[1:]):
            continue
        roots = npoly.polyroots(d1)
        for r in roots:
            if abs(r.imag) > 1e-8 * (1.0 + abs(r.real)):
                continue
            lam = float(r.real)
            if region.lam_min - pad <= lam <= region.lam_max + pad:
                seeds.append((float(s), lam))
    return seeds


def _channel_columns(region: Region, n_uniform: int) -> np.ndarray:
    """Scan columns: uniform across the region plus geometric tails packed
    toward both s-edges, where anti-crossings of weakly coupled levels pile
    up exponentially close to the boundary."""
    w = region.s_width
    uniform = np.linspace(region.s_min, region.s_max, n_uniform)
    offsets = np.geomspace(1e-10 * w, 0.05 * w, 40)
    tails = np.concatenate([region.s_min + offsets, region.s_max - offsets])
    cols = np.unique(np.concatenate([uniform, tails]))
    return cols[(cols >= region.s_min) & (cols <= region.s_max)]


def _channel_roots_fs(surface: MorseSurface, s: float):
    """Sorted real roots of df/dlam at s and the f_s values on them."""
    c = surface.lambda_poly_coeffs(s)
    d1 = c[1:] * np.arange(1, len(c))
    roots = npoly.polyroots(d1)
    roots = np.sort(np.real(roots[np.abs(roots.imag) <= 1e-8 * (1.0 + np.abs(roots.real))]))
    if roots.size == 0:
        return roots, roots
    ds = surface.ds
    cp = surface.lambda_poly_coeffs(s + ds)
    cm = surface.lambda_poly_coeffs(s - ds)
    fs = (npoly.polyval(roots, cp) - npoly.polyval(roots, cm)) / (2 * ds)
    return roots, fs


def _channel_crossing_seeds(surface: MorseSurface, region: Region,
                            n_uniform: int):
    """Bracketed sign changes of f_s along the df/dlam = 0 channels.

    Every critical point sits on one of these channels, so sign-change
    bracketing plus a short bisection yields seeds that Newton polishes in a
    couple of steps, including points exponentially close to the s-edges
    that uniform grids miss.
    """
    if surface.lambda_poly_coeffs(region.s_min + 0.5 * region.s_width) is None:
        return []
    cols = _channel_columns(region, n_uniform)
    prev_roots = prev_fs = None
    brackets = []
    n_channels = None
    for s in cols:
        roots, fs = _channel_roots_fs(surface, float(s))
        if prev_roots is not None and roots.size == prev_roots.size and roots.size:
            for j in range(roots.size):
                if prev_fs[j] * fs[j] < 0:
                    brackets.append((float(prev_s), float(s), j))
        prev_roots, prev_fs, prev_s = roots, fs, s
        n_channels = roots.size
    seeds = []
    for s_lo, s_hi, j in brackets:
        f_lo = None
        for _ in range(12):
            mid = 0.5 * (s_lo + s_hi)
            roots, fs = _channel_roots_fs(surface, mid)
            if roots.size != n_channels or j >= roots.size:
                break
            if f_lo is None:
                r_lo, fvals = _channel_roots_fs(surface, s_lo)
                if j >= fvals.size:
                    break
                f_lo = fvals[j]
            if f_lo * fs[j] <= 0:
                s_hi = mid
            else:
                s_lo, f_lo = mid, fs[j]
        mid = 0.5 * (s_lo + s_hi)
        roots, _ = _channel_roots_fs(surface, mid)
        if j < roots.size:
            seeds.append((mid, float(roots[j])))
    return seeds


def find_critical_points(surface: MorseSurface, region: Region | None = None,
                         grid_density: int = 24, tol_grad: float | None = None,
                         tol_dedup: float = 1e-6,
                         tol_nondegen: float | None = None,
                         extra_seeds=(), b: float | None = None
                         ) -> CriticalPointSearch:
    """Find, deduplicate and classify all critical points inside a region.

    Seeding is the completeness mechanism: every cell centre of a
    grid_density x grid_density grid, the lambda-interlacing roots on each
    grid column, and any caller-provided continuation seeds.  Converged
    points closer than ``tol_dedup`` (max-norm) collapse to the best
    residual; points that close to the region boundary are discarded.
    Stationary points with |det Hess| below the nondegeneracy threshold are
    returned separately as degenerate warnings.
    """
    region = region or surface.domain
    if grid_density < 16:
        raise ValidationError(f"grid_density must be >= 16, got {grid_density}")
    if not surface.domain.contains_region(region):
        raise ValidationError(
            f"region {region.astuple()} not contained in surface domain "
            f"{surface.domain.astuple()}")
    if tol_dedup <= 0:
        raise ValidationError("tol_dedup must be positive")

    scale = surface.f_scale(region)
    if tol_grad is None:
        tol_grad = 1e-9 * scale

    s_cols = region.s_min + (np.arange(grid_density) + 0.5) * region.s_width / grid_density
    lam_rows = region.lam_min + (np.arange(grid_density) + 0.5) * region.lam_width / grid_density
    has_poly = surface.lambda_poly_coeffs(float(s_cols[0])) is not None
    if has_poly:
        # Channels carry every critical point (grad f = 0 implies df/dlam = 0),
        # so grid seeds only need to cover the |grad f| basins: keep the cells
        # that are 3x3-neighbourhood minima of |grad f|^2.
        g2 = np.empty((grid_density, grid_density))
        for i, s in enumerate(s_cols):
            _, fs, fl, _, _, _ = surface.derivs_rows(float(s), lam_rows)
            g2[i] = fs * fs + fl * fl
        padded = np.pad(g2, 1, constant_values=np.inf)
        is_min = np.ones_like(g2, dtype=bool)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == dj == 0:
                    continue
                is_min &= g2 <= padded[1 + di:1 + di + grid_density,
                                       1 + dj:1 + dj + grid_density]
        seeds = [(float(s_cols[i]), float(lam_rows[j]))
                 for i, j in np.argwhere(is_min)]
    else:
        seeds = [(float(s), float(l)) for s in s_cols for l in lam_rows]
    seeds.extend(_interlacing_seeds(surface, s_cols, region))
    seeds.extend(_channel_crossing_seeds(surface, region, max(64, 2 * grid_density)))
    seeds.extend((float(s), float(l)) for s, l in extra_seeds)

    hits = []
    for s0, lam0 in seeds:
        res = _newton(surface, s0, lam0, region, tol_grad)
        if res is None:
            continue
        s, lam = res
        if not region.contains(s, lam):
            continue
        hits.append((s, lam))

    # Deduplicate keeping the smallest-residual representative.
    enriched = []
    for s, lam in hits:
        f, fs, fl, fss, fsl, fll = surface.derivs(s, lam)
        enriched.append((math.hypot(fs, fl), s, lam, f, fs, fl, fss, fsl, fll))
    enriched.sort(key=lambda t: (t[0], t[1], t[2]))
    accepted = []
    for cand in enriched:
        _, s, lam, *_ = cand
        if any(max(abs(s - a[1]), abs(lam - a[2])) < tol_dedup for a in accepted):
            continue
        accepted.append(cand)

    # Boundary exclusion prevents spurious half-converged points at clips.
    interior = [c for c in accepted
                if (c[1] - region.s_min > tol_dedup and region.s_max - c[1] > tol_dedup
                    and c[2] - region.lam_min > tol_dedup
                    and region.lam_max - c[2] > tol_dedup)]

    dets = np.array([abs(c[6] * c[8] - c[7] ** 2) for c in interior])
    if tol_nondegen is None:
        med = float(np.median(dets)) if len(dets) else 0.0
        tol_nondegen = max(1e-8 * med, 1e-12)

    points, degenerate = [], []
    for (res_norm, s, lam, f, fs, fl, fss, fsl, fll) in interior:
        det = fss * fll - fsl ** 2
        if abs(det) <= tol_nondegen:
            degenerate.append(DegeneratePoint(s=s, lam=lam, f_val=f,
                                              det_hessian=det, residual=res_norm))
        else:
            points.append(_classify(s, lam, f, fs, fl, fss, fsl, fll, b=b,
                                    level=_level_index(surface, s, lam)))

    points.sort(key=lambda p: (p.s, p.lam))
    degenerate.sort(key=lambda p: (p.s, p.lam))
    return CriticalPointSearch(points=points, degenerate=degenerate, region=region,
                               tol_grad=tol_grad, tol_nondegen=tol_nondegen,
                               tol_dedup=tol_dedup)


def extend_search(surface: MorseSurface, search: CriticalPointSearch,
                  seeds, b: float | None = None) -> bool:
    """Newton-polish extra seeds and merge any new points into ``search``.

    Used by continuation sweeps to repair snapshots from neighbouring ones;
    returns True when the search gained a point.
    """
    region = search.region
    tol = search.tol_dedup
    added = False
    for s0, lam0 in seeds:
        res = _newton(surface, float(s0), float(lam0), region, search.tol_grad)
        if res is None:
            continue
        s, lam = res
        if not region.contains(s, lam):
            continue
        if (s - region.s_min <= tol or region.s_max - s <= tol
                or lam - region.lam_min <= tol or region.lam_max - lam <= tol):
            continue
        if any(max(abs(s - p.s), abs(lam - p.lam)) < tol for p in search.points):
            continue
        if any(max(abs(s - d.s), abs(lam - d.lam)) < tol for d in search.degenerate):
            continue
        f, fs, fl, fss, fsl, fll = surface.derivs(s, lam)
        det = fss * fll - fsl ** 2
        if abs(det) <= search.tol_nondegen:
            search.degenerate.append(DegeneratePoint(
                s=s, lam=lam, f_val=f, det_hessian=det,
                residual=math.hypot(fs, fl)))
            search.degenerate.sort(key=lambda p: (p.s, p.lam))
        else:
            search.points.append(_classify(s, lam, f, fs, fl, fss, fsl, fll, b=b,
                                           level=_level_index(surface, s, lam)))
            search.points.sort(key=lambda p: (p.s, p.lam))
        added = True
    return added


@dataclass
class LocalModel:
    """Quadratic normal form f(p) + K1*u^2 + K2*v^2 in principal coordinates."""

    s: float
    lam: float
    f_val: float
    K1: float
    K2: float
    axis_rotation: float
    u_axis: np.ndarray = field(repr=False, default=None)
    v_axis: np.ndarray = field(repr=False, default=None)

    def evaluate(self, s, lam):
        ds, dl = np.asarray(s) - self.s, np.asarray(lam) - self.lam
        u = ds * self.u_axis[0] + dl * self.u_axis[1]
        v = ds * self.v_axis[0] + dl * self.v_axis[1]
        return self.f_val + self.K1 * u ** 2 + self.K2 * v ** 2


def local_model(cp: CriticalPoint) -> LocalModel:
    if abs(cp.det_hessian) < 1e-300:
        raise ValidationError("degenerate Hessian has no quadratic normal form")
    rot = cp.axis_rotation
    u_axis = np.array([math.cos(rot), math.sin(rot)])
    v_axis = np.array([-math.sin(rot), math.cos(rot)])
    return LocalModel(s=cp.s, lam=cp.lam, f_val=cp.f_val, K1=cp.K1, K2=cp.K2,
                      axis_rotation=rot, u_axis=u_axis, v_axis=v_axis)


@dataclass
class SaddleGap:
    """Anti-crossing gap model Delta(u) = 2*sqrt(-K2*(f(p) + K1*u^2))/K2.

    K1 and K2 are the quadratic coefficients of the model expressed in the
    fixed-s slice frame (K2 = f_ll/2, K1 = det Hess/(4*K2)), which is where
    the eigensolver gap lives; for axis-aligned saddles they coincide with
    the principal Taylor curvatures, so the Grover saddle reproduces the
    exact minimum gap 2**(-N/2).
    """

    s: float
    lam: float
    f_val: float
    K1: float
    K2: float
    delta_min: float

    def delta(self, u):
        u = np.asarray(u, dtype=float)
        arg = -self.K2 * (self.f_val + self.K1 * u ** 2)
        return 2.0 * np.sqrt(arg) / self.K2


def gap_from_saddle(cp: CriticalPoint) -> SaddleGap:
    """Gap model from the local saddle data; minimum at the saddle itself."""
    if cp.kind != KIND_SADDLE:
        raise ValidationError(f"gap model requires a saddle, got {cp.kind}")
    k2 = cp.f_ll / 2.0
    if k2 <= 0 or cp.K2 <= 0:
        raise SignPatternError(
            f"saddle at ({cp.s:.6g}, {cp.lam:.6g}) has non-positive curvature "
            "along lambda; the anti-crossing gap model needs the positive "
            "curvature on the lambda-like axis")
    if cp.f_val >= 0:
        raise SignPatternError(
            f"saddle at ({cp.s:.6g}, {cp.lam:.6g}) has f(p) = {cp.f_val:.6g} >= 0, "
            "violating the saddle sign table (K1 < 0 < K2 and f(p) < 0)")
    k1 = cp.det_hessian / (4.0 * k2)
    delta_min = 2.0 * math.sqrt(-k2 * cp.f_val) / k2
    return SaddleGap(s=cp.s, lam=cp.lam, f_val=cp.f_val, K1=k1, K2=k2,
                     delta_min=delta_min)


@dataclass
class AsymptoteAngle:
    theta: float
    direction_1: np.ndarray
    direction_2: np.ndarray


def asymptote_angle(cp: CriticalPoint) -> AsymptoteAngle:
    """Angle between the two asymptote directions of the saddle.

    theta = pi - arccos((Kn + Kp)/(Kn - Kp)) with Kn < 0 < Kp the curvatures
    in the saddle sign convention (the negative one spans the anti-crossing
    channel); this equals the angle between the returned null directions of
    the quadratic model, measured across the channel axis.  Sharp channels
    (|Kn| >> Kp, the first-order-transition signature) open theta toward pi;
    flattening the channel closes it toward 0.
    """
    if cp.kind != KIND_SADDLE:
        raise ValidationError(f"asymptote angle requires a saddle, got {cp.kind}")
    if abs(cp.K1 - cp.K2) < 1e-12 * max(abs(cp.K1), abs(cp.K2), 1.0):
        raise ValidationError("|K1 - K2| below tolerance; angle is ill-conditioned")
    k_neg, k_pos = min(cp.K1, cp.K2), max(cp.K1, cp.K2)
    ratio = (k_neg + k_pos) / (k_neg - k_pos)
    theta = math.pi - math.acos(max(-1.0, min(1.0, ratio)))
    # Null directions of Kn*t^2 + Kp*w^2 = 0 back in (s, lambda), oriented
    # with a common component along the channel (negative-curvature) axis.
    rot = cp.axis_rotation
    u_axis = np.array([math.cos(rot), math.sin(rot)])      # K1 axis
    v_axis = np.array([-math.sin(rot), math.cos(rot)])     # K2 axis
    chan_axis, cross_axis = (u_axis, v_axis) if cp.K1 < 0 else (v_axis, u_axis)
    a, c = math.sqrt(abs(k_pos)), math.sqrt(abs(k_neg))
    d1 = a * chan_axis + c * cross_axis
    d2 = a * chan_axis - c * cross_axis
    d1 /= np.linalg.norm(d1)
    d2 /= np.linalg.norm(d2)
    return AsymptoteAngle(theta=float(theta), direction_1=d1, direction_2=d2)
