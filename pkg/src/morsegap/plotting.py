"""Matplotlib rendering of the standard reports.

Imported lazily by the CLI (--plot); the analysis path never needs it.
Colour code follows the census figures: saddles red, maxima green, minima
blue.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KIND_COLORS = {"saddle": "tab:red", "maximum": "tab:green", "minimum": "tab:blue"}
KIND_MARKERS = {"saddle": "x", "maximum": "^", "minimum": "o"}


def _save(fig, path, dpi=150):
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def plot_spectrum(curves, path, title=None):
    fig, ax = plt.subplots(figsize=(7, 5))
    for k in range(curves.energies.shape[1]):
        ax.plot(curves.s_grid, curves.energies[:, k], lw=1.0)
    i = int(np.argmin(curves.gap))
    ax.axvline(curves.s_grid[i], color="0.6", ls="--", lw=0.8,
               label=f"min gap {curves.gap[i]:.3g} at s={curves.s_grid[i]:.3g}")
    ax.set_xlabel("s")
    ax.set_ylabel("energy")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_critical_points(points, path, curves=None, title=None):
    fig, ax = plt.subplots(figsize=(7, 5))
    if curves is not None:
        for k in range(curves.energies.shape[1]):
            ax.plot(curves.s_grid, curves.energies[:, k], lw=0.8, color="0.7")
    seen = set()
    for p in points:
        label = p.kind if p.kind not in seen else None
        seen.add(p.kind)
        ax.scatter([p.s], [p.lam], c=KIND_COLORS[p.kind],
                   marker=KIND_MARKERS[p.kind], s=45, label=label, zorder=3)
    ax.set_xlabel("s")
    ax.set_ylabel("lambda")
    if title:
        ax.set_title(title)
    if seen:
        ax.legend(loc="best", fontsize=9)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_census(rows, path, title=None):
    rows = list(rows)
    b = [r[0] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(b, [r[1] + r[2] + r[3] for r in rows], "k.-", label="total")
    ax1.plot(b, [r[2] for r in rows], ".-", color="tab:red", label="saddles")
    ax1.plot(b, [r[1] for r in rows], ".-", color="tab:blue", label="minima")
    ax1.plot(b, [r[3] for r in rows], ".-", color="tab:green", label="maxima")
    ax1.set_ylabel("critical points")
    ax1.legend(fontsize=9)
    ax1.grid(alpha=0.3)
    ax2.plot(b, [r[4] for r in rows], "k.-")
    ax2.set_xlabel("b")
    ax2.set_ylabel("Euler characteristic")
    ax2.grid(alpha=0.3)
    if title:
        ax1.set_title(title)
    return _save(fig, path)


def plot_branches(diagram, path, title=None):
    fig, ax = plt.subplots(figsize=(7, 5))
    for br in diagram.branches:
        bs = [n.b for n in br.nodes]
        ss = [n.point.s for n in br.nodes]
        ax.plot(bs, ss, ".-", color=KIND_COLORS[br.kind], lw=0.8, ms=3)
    for ev in diagram.events:
        ax.axvline(0.5 * sum(ev.b_interval), color="0.8", lw=0.6, zorder=0)
    ax.set_xlabel("b")
    ax.set_ylabel("s of critical point")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_qpt(report, path, title=None):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(report.s_grid, report.theta_star, lw=1.2)
    ax1.set_ylabel("theta*")
    if report.s_c is not None:
        ax1.axvline(report.s_c, color="tab:red", ls="--", lw=0.8,
                    label=f"jump at s={report.s_c:.4g}")
        ax1.legend(fontsize=9)
    ax1.grid(alpha=0.3)
    ax2.plot(report.s_grid, report.e_star, lw=1.2)
    ax2.set_xlabel("s")
    ax2.set_ylabel("e*")
    ax2.grid(alpha=0.3)
    if title:
        ax1.set_title(title)
    return _save(fig, path)


def plot_field(surface, region, resolution, path, points=(), title=None):
    s_mid = region.s_min + (np.arange(resolution) + 0.5) * region.s_width / resolution
    lam_mid = (region.lam_min
               + (np.arange(resolution) + 0.5) * region.lam_width / resolution)
    F = np.empty((resolution, resolution))
    for i, s in enumerate(s_mid):
        F[i] = surface.value_row(float(s), lam_mid)
    fig, ax = plt.subplots(figsize=(7, 5))
    lim = np.percentile(np.abs(F), 98) or 1.0
    im = ax.pcolormesh(s_mid, lam_mid, F.T, cmap="RdBu_r", vmin=-lim, vmax=lim,
                       shading="auto")
    fig.colorbar(im, ax=ax, label="f(s, lambda)")
    for p in points:
        ax.scatter([p.s], [p.lam], c=KIND_COLORS[p.kind],
                   marker=KIND_MARKERS[p.kind], s=40)
    ax.set_xlabel("s")
    ax.set_ylabel("lambda")
    if title:
        ax.set_title(title)
    return _save(fig, path)
