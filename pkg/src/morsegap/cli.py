"""Command-line interface.

Subcommands cover the full pipeline: spectrum, critical, sweep, qpt,
curvature.  Outputs are CSV/JSON with fixed %.12g formatting so identical
configurations produce byte-identical files; --plot additionally renders
matplotlib figures next to them.

Exit codes: 0 success, 2 validation/parse error, 3 capacity error,
4 invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cerf_sweep import sweep, verify_invariants
from .critical_points import (KIND_SADDLE, asymptote_angle, find_critical_points,
                              gap_from_saddle)
from .errors import (CapacityError, InvariantViolationError, SignPatternError,
                     ValidationError)
from .hamiltonians import (DegeneracyFamily, GroverEffectiveFamily,
                           ReducedPSpinFamily, ToyFamily, load_model)
from .io_utils import fmt, write_csv, write_json
from .qpt import ClassicalEnergyParams, finite_size_gap_scan, minimizer_curve
from .surface import Region, spectral_curves
from .topology import curvature_report, curvature_redistribution

CRITICAL_HEADER = ["b", "s", "lambda", "f", "kind", "index", "K1", "K2",
                   "detHess", "theta", "gap_min", "residual"]


def _parse_region(text: str) -> Region:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError(f"--region expects s0,s1,l0,l1, got {text!r}")
    try:
        s0, s1, l0, l1 = (float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"--region has non-numeric entries: {text!r}")
    return Region(s0, s1, l0, l1)


def _parse_b_range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"--b range expects start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"--b range has non-numeric entries: {text!r}")
    if step <= 0:
        raise ValidationError("--b range step must be positive")
    n = int(round(abs(stop - start) / step))
    if n < 1:
        raise ValidationError("--b range must contain at least two values")
    return np.linspace(start, stop, n + 1)


def _parse_n_list(text: str):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(p) for p in text.split(",")]


def _family(args):
    if getattr(args, "model", None):
        return load_model(args.model)
    builtin = getattr(args, "builtin", None)
    if builtin is None:
        raise ValidationError("one of --builtin or --model is required")
    if builtin == "grover":
        return GroverEffectiveFamily(args.N)
    if builtin == "pspin":
        if args.p is None:
            raise ValidationError("--builtin pspin requires --p")
        return ReducedPSpinFamily(args.N, args.p)
    if builtin == "degeneracy":
        return DegeneracyFamily(args.N)
    if builtin == "toy":
        return ToyFamily()
    raise ValidationError(f"unknown builtin {builtin!r}")


def _surface(args, family, b):
    kwargs = {}
    if getattr(args, "ds", None):
        kwargs["ds"] = args.ds
    if getattr(args, "region", None):
        kwargs["domain"] = args.region
    surf = family.surface_at(b, **kwargs)
    region = args.region if getattr(args, "region", None) else surf.domain
    if not surf.domain.contains_region(region):
        surf = family.surface_at(b, domain=region, **{k: v for k, v in
                                                      kwargs.items() if k != "domain"})
    return surf, region


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _critical_rows(points, b):
    rows = []
    for p in points:
        theta = gap_min = None
        if p.kind == KIND_SADDLE:
            theta = asymptote_angle(p).theta
            try:
                gap_min = gap_from_saddle(p).delta_min
            except SignPatternError:
                gap_min = None
        rows.append([b, p.s, p.lam, p.f_val, p.kind, p.morse_index, p.K1,
                     p.K2, p.gauss_K, theta, gap_min, p.residual])
    return rows


def cmd_spectrum(args) -> int:
    family = _family(args)
    out = _out_dir(args)
    s_grid = np.linspace(0.0, 1.0, args.s_points)
    curves = spectral_curves(family, args.b, s_grid)
    n = curves.energies.shape[1]
    header = ["s"] + [f"lambda_{k + 1}" for k in range(n)] + ["gap"]
    rows = [[s, *curves.energies[i], curves.gap[i]]
            for i, s in enumerate(curves.s_grid)]
    path = write_csv(out / "spectrum.csv", header, rows)
    print(f"wrote {path}")
    print(f"min gap {fmt(curves.min_gap)} at s = {fmt(curves.s_at_min_gap)}")
    if args.plot:
        from . import plotting
        print(f"wrote {plotting.plot_spectrum(curves, out / 'spectrum.png')}")
    return 0


def cmd_critical(args) -> int:
    family = _family(args)
    out = _out_dir(args)
    surf, region = _surface(args, family, args.b)
    search = find_critical_points(surf, region, args.density,
                                  tol_grad=args.tol_grad,
                                  tol_dedup=args.tol_dedup,
                                  tol_nondegen=args.tol_nondegen, b=args.b)
    path = write_csv(out / "critical_points.csv", CRITICAL_HEADER,
                     _critical_rows(search.points, args.b))
    kinds = [p.kind for p in search.points]
    summary = {
        "b": args.b,
        "counts": {"minimum": kinds.count("minimum"),
                   "saddle": kinds.count("saddle"),
                   "maximum": kinds.count("maximum")},
        "chi": kinds.count("minimum") - kinds.count("saddle") + kinds.count("maximum"),
        "n_degenerate": len(search.degenerate),
        "region": list(region.astuple()),
        "grid_density": args.density,
    }
    jpath = write_json(out / "critical_summary.json", summary)
    print(f"wrote {path}")
    print(f"wrote {jpath}")
    print(f"{len(search.points)} critical points "
          f"({summary['counts']['minimum']} min, {summary['counts']['saddle']} saddle, "
          f"{summary['counts']['maximum']} max), chi = {summary['chi']}")
    if args.plot:
        from . import plotting
        curves = None
        try:
            curves = spectral_curves(family, args.b, np.linspace(0, 1, 201))
        except ValidationError:
            pass
        print(f"wrote {plotting.plot_critical_points(search.points, out / 'critical_points.png', curves)}")
    return 0


def cmd_sweep(args) -> int:
    family = _family(args)
    out = _out_dir(args)
    b_grid = _parse_b_range(args.b)
    diagram = sweep(family, b_grid, region=args.region,
                    grid_density=args.density, ds=args.ds, workers=args.workers)
    census = diagram.census()
    write_csv(out / "census.csv", ["b", "n_min", "n_saddle", "n_max", "chi"], census)
    write_csv(out / "events.csv",
              ["b_lo", "b_hi", "type", "saddle_branch", "extremum_branch", "s", "lambda"],
              [[ev.b_interval[0], ev.b_interval[1], ev.type, ev.saddle_branch,
                ev.extremum_branch, ev.location[0], ev.location[1]]
               for ev in diagram.events])
    write_csv(out / "branches.csv",
              ["branch_id", "b", "s", "lambda", "kind", "K1", "K2", "theta"],
              [[br.branch_id, node.b, node.point.s, node.point.lam, br.kind,
                node.point.K1, node.point.K2,
                asymptote_angle(node.point).theta if br.kind == KIND_SADDLE else None]
               for br in diagram.branches for node in br.nodes])
    payload = {
        "b_grid": [float(b) for b in diagram.b_grid],
        "region": list(diagram.region.astuple()),
        "grid_density": diagram.grid_density,
        "workers": diagram.workers,
        "branches": [{"id": br.branch_id, "kind": br.kind,
                      "nodes": [[node.b, node.point.s, node.point.lam]
                                for node in br.nodes]}
                     for br in diagram.branches],
        "events": [{"b_interval": list(ev.b_interval), "type": ev.type,
                    "saddle_branch": ev.saddle_branch,
                    "extremum_branch": ev.extremum_branch,
                    "location": list(ev.location)}
                   for ev in diagram.events],
    }
    write_json(out / "cerf_diagram.json", payload)
    print(f"wrote {out / 'census.csv'}, {out / 'events.csv'}, "
          f"{out / 'branches.csv'}, {out / 'cerf_diagram.json'}")
    if args.plot:
        from . import plotting
        print(f"wrote {plotting.plot_census(census, out / 'census.png')}")
        print(f"wrote {plotting.plot_branches(diagram, out / 'branches.png')}")
    report = verify_invariants(diagram)
    print(f"chi = {report.chi} at every b; {report.n_events} birth/death events")
    return 0


def cmd_qpt(args) -> int:
    if args.p is None:
        raise ValidationError("qpt requires --p")
    out = _out_dir(args)
    params = ClassicalEnergyParams(p=args.p, b=args.b)
    s_grid = np.linspace(0.0, 1.0, args.s_resolution)
    report = minimizer_curve(s_grid, params,
                             theta_resolution=args.theta_resolution,
                             jump_threshold=args.jump_threshold)
    write_csv(out / "qpt_curve.csv", ["s", "theta_star", "e_star"],
              zip(report.s_grid, report.theta_star, report.e_star))
    payload = {
        "p": args.p, "b": args.b, "order": report.order,
        "s_c": report.s_c, "jump": report.jump,
        "jump_threshold": report.jump_threshold,
        "degenerate_s": report.degenerate_s,
        "spinodal_s": report.spinodal_s,
    }
    write_json(out / "qpt_report.json", payload)
    print(f"wrote {out / 'qpt_curve.csv'}, {out / 'qpt_report.json'}")
    desc = f"order: {report.order} (max jump {fmt(report.jump)} rad)"
    if report.s_c is not None:
        desc += f", s_c = {fmt(report.s_c)}"
    print(desc)
    if args.scan_N:
        rows = finite_size_gap_scan(_parse_n_list(args.scan_N), args.p, args.b,
                                    s_resolution=args.s_resolution)
        write_csv(out / "gap_scan.csv", ["N", "min_gap", "s_at_min"],
                  [[r.N, r.min_gap, r.s_at_min] for r in rows])
        print(f"wrote {out / 'gap_scan.csv'}")
    if args.plot:
        from . import plotting
        print(f"wrote {plotting.plot_qpt(report, out / 'qpt.png')}")
    return 0


def cmd_curvature(args) -> int:
    family = _family(args)
    out = _out_dir(args)
    surf, region = _surface(args, family, args.b)
    if args.compare_b is None:
        report = curvature_report(surf, region, resolution=args.resolution,
                                  grid_density=args.density, workers=args.workers)
        reports = [("b", args.b, surf, report)]
    else:
        surf2, region2 = _surface(args, family, args.compare_b)
        if args.region is None:
            region = region.union(region2)
            surf, _ = _surface(args, family, args.b)
            surf2, _ = _surface(args, family, args.compare_b)
            if not surf.domain.contains_region(region):
                surf = family.surface_at(args.b, domain=region)
            if not surf2.domain.contains_region(region):
                surf2 = family.surface_at(args.compare_b, domain=region)
        rep_a, rep_b = curvature_redistribution(surf, surf2, region,
                                                resolution=args.resolution,
                                                grid_density=args.density,
                                                workers=args.workers)
        reports = [("b", args.b, surf, rep_a), ("compare_b", args.compare_b, surf2, rep_b)]

    def report_payload(b, rep):
        return {
            "b": b,
            "region": list(rep.region.astuple()),
            "total_curvature": rep.total_curvature,
            "chi_morse": rep.chi_morse,
            "defect": rep.defect,
            "resolution": rep.resolution,
            "workers": rep.workers,
            "warnings": rep.warnings,
            "per_point": [{"s": nb.point.s, "lambda": nb.point.lam,
                           "kind": nb.point.kind,
                           "local_integral": nb.local_integral,
                           "r": nb.level_radius}
                          for nb in rep.per_point],
        }

    payload = {"reports": [report_payload(b, rep) for _, b, _, rep in reports]}
    write_json(out / "curvature_report.json", payload)
    write_csv(out / "curvature_points.csv",
              ["s", "lambda", "kind", "local_integral", "r"],
              [[nb.point.s, nb.point.lam, nb.point.kind, nb.local_integral,
                nb.level_radius]
               for _, _, _, rep in reports for nb in rep.per_point])
    # Field grid export for heatmaps.
    res = args.resolution
    s_mid = region.s_min + (np.arange(res) + 0.5) * region.s_width / res
    lam_mid = region.lam_min + (np.arange(res) + 0.5) * region.lam_width / res
    rows = []
    for s in s_mid:
        f, fs, fl, fss, fsl, fll = surf.derivs_rows(float(s), lam_mid)
        K = (fss * fll - fsl * fsl) / (1.0 + fs * fs + fl * fl) ** 2
        rows.extend([float(s), float(l), float(fv), float(kv)]
                    for l, fv, kv in zip(lam_mid, f, K))
    write_csv(out / "field_grid.csv", ["s", "lambda", "f", "K"], rows)
    print(f"wrote {out / 'curvature_report.json'}, {out / 'curvature_points.csv'}, "
          f"{out / 'field_grid.csv'}")
    rep = reports[0][3]
    print(f"total curvature {fmt(rep.total_curvature)}; chi = {rep.chi_morse}; "
          f"defect vs 2*pi*chi = {fmt(rep.defect)}")
    if args.plot:
        from . import plotting
        pts = [nb.point for nb in rep.per_point]
        print(f"wrote {plotting.plot_field(surf, region, min(args.resolution, 256), out / 'field.png', pts)}")
    return 0


def _add_model_flags(sp, need_b=True):
    sp.add_argument("--builtin", choices=["grover", "degeneracy", "pspin", "toy"],
                    help="built-in family (toy interprets the b slot as the width eps)")
    sp.add_argument("--model", help="JSON model file")
    sp.add_argument("--N", type=int, default=5, help="qubit/spin count (default 5)")
    sp.add_argument("--p", type=int, default=None, help="z-term power for pspin/qpt")
    if need_b:
        sp.add_argument("--b", type=float, default=0.0,
                        help="enhancement parameter (default 0)")


def _add_common_flags(sp):
    sp.add_argument("--out", default=".", help="output directory (default .)")
    sp.add_argument("--plot", action="store_true",
                    help="render matplotlib figures alongside the CSV/JSON")
    sp.add_argument("--workers", type=int, default=1,
                    help="parallel map width; results are worker-count independent")


def _add_tolerance_flags(sp):
    sp.add_argument("--density", type=int, default=24,
                    help="seed grid density per axis (default 24)")
    sp.add_argument("--ds", type=float, default=None,
                    help="finite-difference step for s-derivatives (default 1e-4)")
    sp.add_argument("--region", type=_parse_region, default=None,
                    help="search region s0,s1,l0,l1 (default: eigenvalue hull)")
    sp.add_argument("--tol-grad", type=float, default=None, dest="tol_grad",
                    help="gradient tolerance (default 1e-9 * field scale)")
    sp.add_argument("--tol-nondegen", type=float, default=None, dest="tol_nondegen",
                    help="Hessian-determinant nondegeneracy threshold")
    sp.add_argument("--tol-dedup", type=float, default=1e-6, dest="tol_dedup",
                    help="deduplication distance in max-norm (default 1e-6)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morsegap",
        description="Morse-theoretic analysis of annealing Hamiltonian surfaces "
                    "f(s, lambda) = det(H(s) - lambda I)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="eigenvalue curves and spectral gap")
    _add_model_flags(sp)
    sp.add_argument("--s-points", type=int, default=201, dest="s_points",
                    help="number of s grid points (default 201)")
    _add_common_flags(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("critical", help="find and classify critical points")
    _add_model_flags(sp)
    _add_tolerance_flags(sp)
    _add_common_flags(sp)
    sp.set_defaults(func=cmd_critical)

    sp = sub.add_parser("sweep", help="track the census across b (Cerf diagram)")
    _add_model_flags(sp, need_b=False)
    sp.add_argument("--b", required=True,
                    help="b range start:stop:step, e.g. 1:0:0.02")
    _add_tolerance_flags(sp)
    _add_common_flags(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("qpt", help="thermodynamic-limit transition order")
    sp.add_argument("--p", type=int, required=True, help="z-term power")
    sp.add_argument("--b", type=float, default=1.0,
                    help="enhancement parameter in [0, 1] (default 1)")
    sp.add_argument("--s-resolution", type=int, default=6001, dest="s_resolution",
                    help="s grid size (default 6001)")
    sp.add_argument("--theta-resolution", type=int, default=512,
                    dest="theta_resolution", help="theta grid size (default 512)")
    sp.add_argument("--jump-threshold", type=float, default=0.05,
                    dest="jump_threshold",
                    help="first-order jump threshold in radians (default 0.05)")
    sp.add_argument("--scan-N", dest="scan_N", default=None,
                    help="also scan finite-size gaps, e.g. 5:11 or 5,7,9")
    _add_common_flags(sp)
    sp.set_defaults(func=cmd_qpt)

    sp = sub.add_parser("curvature", help="Gauss-Bonnet curvature accounting")
    _add_model_flags(sp)
    _add_tolerance_flags(sp)
    sp.add_argument("--resolution", type=int, default=128,
                    help="integration cells per axis (default 128)")
    sp.add_argument("--compare-b", type=float, default=None, dest="compare_b",
                    help="second b value for a redistribution comparison")
    _add_common_flags(sp)
    sp.set_defaults(func=cmd_curvature)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
