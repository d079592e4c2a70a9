"""Tracking the critical-point census across the enhancement parameter b.

A sweep takes independent snapshots on the b grid, repairs misses by
re-seeding from neighbouring snapshots (continuation), chains points into
kind-constant branches with velocity-aware matching, and pairs branch
endpoints into birth/death events.  The Euler characteristic must come out
b-independent; a jump means a missed point and is reported as a hard
invariant violation.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .critical_points import KIND_SADDLE, find_critical_points
from .errors import InvariantViolationError, ValidationError
from .surface import Region

MATCH_CAP = 0.05          # max-norm matching distance; guards cross-channel jumps
MATCH_FLOOR = 0.005
CHANNEL_CAP = 0.5         # looser cap when the interlacing channel is known
STITCH_CAP = 0.1          # re-joining a branch broken by a single missed match


@dataclass
class BranchNode:
    b: float
    point: CriticalPoint


@dataclass
class Branch:
    branch_id: int
    kind: str
    nodes: list

    @property
    def b_first(self) -> float:
        return self.nodes[0].b

    @property
    def b_last(self) -> float:
        return self.nodes[-1].b

    def velocity(self, db: float) -> float | None:
        """Max-norm speed estimate d(s, lambda)/db from the last two nodes."""
        if len(self.nodes) < 2 or db == 0:
            return None
        a, c = self.nodes[-2].point, self.nodes[-1].point
        prev_db = abs(self.nodes[-1].b - self.nodes[-2].b)
        if prev_db == 0:
            return None
        return max(abs(c.s - a.s), abs(c.lam - a.lam)) / prev_db


@dataclass
class CerfEvent:
    b_interval: tuple
    type: str                   # "birth" or "death" along the grid order
    saddle_branch: int
    extremum_branch: int
    location: tuple             # approximate (s, lambda) midpoint
    evidence: list = field(default_factory=list)


@dataclass
class CerfDiagram:
    b_grid: np.ndarray
    snapshots: list             # list[list[CriticalPoint]] per b
    degenerate: list            # list[list[DegeneratePoint]] per b
    branches: list
    events: list
    unpaired: list
    region: Region
    grid_density: int
    workers: int = 1

    def branch(self, branch_id: int) -> Branch:
        for br in self.branches:
            if br.branch_id == branch_id:
                return br
        raise ValidationError(f"no branch with id {branch_id}")

    def census(self):
        """Rows (b, n_min, n_saddle, n_max, chi)."""
        rows = []
        for b, snap in zip(self.b_grid, self.snapshots):
            kinds = [p.kind for p in snap]
            n_min = kinds.count("minimum")
            n_sad = kinds.count("saddle")
            n_max = kinds.count("maximum")
            rows.append((float(b), n_min, n_sad, n_max, n_min - n_sad + n_max))
        return rows


def _snapshot(family, b, region, grid_density, ds, extra_seeds=()):
    kwargs = {"ds": ds} if ds else {}
    surface = family.surface_at(b, **kwargs)
    if not surface.domain.contains_region(region):
        surface = family.surface_at(b, domain=region, **kwargs)
    return find_critical_points(surface, region, grid_density,
                                extra_seeds=extra_seeds, b=float(b))


def _snapshot_args(args):
    return _snapshot(*args)


def sweep_region(family, b_grid, margin: float = 0.1) -> Region:
    """Union of the default domains at the sweep endpoints and midpoint."""
    probes = {float(b_grid[0]), float(b_grid[-1]),
              float(b_grid[len(b_grid) // 2])}
    region = None
    for b in sorted(probes):
        dom = family.surface_at(b).domain
        region = dom if region is None else region.union(dom)
    return region


def _match_snapshots(prev_points, next_points, branches_at_prev, db):
    """Pair points of consecutive snapshots; returns list of (i_prev, i_next).

    Points are grouped by (kind, interlacing channel) before nearest-neighbour
    assignment.  The channel label pins a point between two fixed eigenvalue
    curves, so a generous in-channel cap tolerates fast drift while
    cross-channel mismatches stay impossible; points without a channel label
    fall back to the velocity-scaled cap.
    """
    pairs = []
    if not prev_points or not next_points:
        return pairs

    def group_key(p):
        return (p.kind, p.level_index)

    keys = sorted({group_key(p) for p in prev_points}
                  | {group_key(q) for q in next_points},
                  key=lambda k: (k[0], -1 if k[1] is None else k[1]))
    for key in keys:
        idx_prev = [i for i, p in enumerate(prev_points) if group_key(p) == key]
        idx_next = [j for j, q in enumerate(next_points) if group_key(q) == key]
        if not idx_prev or not idx_next:
            continue
        cost = np.empty((len(idx_prev), len(idx_next)))
        for a, i in enumerate(idx_prev):
            p = prev_points[i]
            for c, j in enumerate(idx_next):
                q = next_points[j]
                cost[a, c] = max(abs(p.s - q.s), abs(p.lam - q.lam))
        rows, cols = linear_sum_assignment(cost)
        channel_known = key[1] is not None
        for a, c in zip(rows, cols):
            i, j = idx_prev[a], idx_next[c]
            if channel_known:
                thr = CHANNEL_CAP
            else:
                branch = branches_at_prev.get(i)
                vel = branch.velocity(db) if branch is not None else None
                if vel is None:
                    thr = MATCH_CAP
                else:
                    thr = min(MATCH_CAP, max(3.0 * vel * abs(db), MATCH_FLOOR))
            if cost[a, c] <= thr:
                pairs.append((i, j))

    # Rescue pass: an exact level crossing (f(p) = 0) shifts the channel
    # label by one, so allow leftovers to pair across adjacent channels at a
    # tight cap.
    matched_prev = {i for i, _ in pairs}
    matched_next = {j for _, j in pairs}
    rest_prev = [i for i in range(len(prev_points)) if i not in matched_prev]
    rest_next = [j for j in range(len(next_points)) if j not in matched_next]
    if rest_prev and rest_next:
        cost = np.full((len(rest_prev), len(rest_next)), np.inf)
        for a, i in enumerate(rest_prev):
            p = prev_points[i]
            for c, j in enumerate(rest_next):
                q = next_points[j]
                if p.kind != q.kind:
                    continue
                if (p.level_index is not None and q.level_index is not None
                        and abs(p.level_index - q.level_index) > 1):
                    continue
                cost[a, c] = max(abs(p.s - q.s), abs(p.lam - q.lam))
        if np.any(np.isfinite(cost)):
            big = 1e6
            rows, cols = linear_sum_assignment(np.where(np.isfinite(cost), cost, big))
            for a, c in zip(rows, cols):
                if cost[a, c] <= 0.15:
                    pairs.append((rest_prev[a], rest_next[c]))
    return pairs


def sweep(family, b_grid, region: Region | None = None, grid_density: int = 24,
          ds: float | None = None, workers: int = 1) -> CerfDiagram:
    """Track the critical-point census of family.surface_at(b) over b_grid.

    Snapshots at distinct b are independent (parallel when workers > 1); a
    sequential continuation pass then re-seeds each snapshot with its
    neighbours' points, which repairs isolated misses and census
    oscillations deterministically regardless of worker count.
    """
    b_grid = np.asarray(b_grid, dtype=float)
    if b_grid.ndim != 1 or b_grid.size < 2:
        raise ValidationError("b_grid must be a 1-d array with >= 2 entries")
    steps = np.diff(b_grid)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValidationError("b_grid must be strictly monotone")
    region = region or sweep_region(family, b_grid)

    args = [(family, float(b), region, grid_density, ds) for b in b_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            searches = list(pool.map(_snapshot_args, args))
    else:
        searches = [_snapshot_args(a) for a in args]

    _continuation_repair(family, b_grid, region, grid_density, ds, searches)

    snapshots = [list(sr.points) for sr in searches]
    degenerate = [list(sr.degenerate) for sr in searches]
    branches, events, unpaired = _build_branches(b_grid, snapshots, degenerate)
    return CerfDiagram(b_grid=b_grid, snapshots=snapshots, degenerate=degenerate,
                       branches=branches, events=events, unpaired=unpaired,
                       region=region, grid_density=grid_density, workers=workers)


def _continuation_repair(family, b_grid, region, grid_density, ds, searches):
    """Re-seed each snapshot from its neighbours until the censuses settle.

    A point present at b_i seeds a Newton polish at b_{i+1} (and vice versa);
    this repairs isolated misses and census oscillations (found at b_i and
    b_{i+2} but not b_{i+1}) without touching already-found points.  The pass
    is sequential and deterministic, so sweep results do not depend on the
    worker count used for the independent snapshots.
    """
    from .critical_points import extend_search

    surfaces = {}

    def surface_at(i):
        if i not in surfaces:
            b = float(b_grid[i])
            kwargs = {"ds": ds} if ds else {}
            surf = family.surface_at(b, **kwargs)
            if not surf.domain.contains_region(region):
                surf = family.surface_at(b, domain=region, **kwargs)
            surfaces[i] = surf
        return surfaces[i]

    n = len(b_grid)
    for _ in range(3):
        changed = False
        passes = [zip(range(1, n), range(0, n - 1)),
                  zip(range(n - 2, -1, -1), range(n - 1, 0, -1))]
        for index_pairs in passes:
            for i, j in index_pairs:
                target, source = searches[i], searches[j]
                missing = []
                for p in source.points:
                    near = any(q.kind == p.kind
                               and max(abs(q.s - p.s), abs(q.lam - p.lam)) <= MATCH_CAP
                               for q in target.points)
                    if not near:
                        missing.append((p.s, p.lam))
                if missing and extend_search(surface_at(i), target, missing,
                                             b=float(b_grid[i])):
                    changed = True
        if not changed:
            break


def _build_branches(b_grid, snapshots, degenerate):
    branches: list = []
    events: list = []
    unpaired: list = []
    active = {}   # index in current snapshot -> Branch
    next_id = 0
    for j, p in enumerate(snapshots[0]):
        br = Branch(branch_id=next_id, kind=p.kind,
                    nodes=[BranchNode(float(b_grid[0]), p)])
        branches.append(br)
        active[j] = br
        next_id += 1

    for i in range(len(b_grid) - 1):
        b_lo, b_hi = float(b_grid[i]), float(b_grid[i + 1])
        db = b_hi - b_lo
        prev_points, next_points = snapshots[i], snapshots[i + 1]
        pairs = _match_snapshots(prev_points, next_points, active, db)
        matched_prev = {i_ for i_, _ in pairs}
        matched_next = {j_ for _, j_ in pairs}

        new_active = {}
        for i_, j_ in pairs:
            br = active[i_]
            br.nodes.append(BranchNode(b_hi, next_points[j_]))
            new_active[j_] = br

        ended = [active[i_] for i_ in sorted(set(active) - matched_prev)]
        started_points = [(j_, next_points[j_])
                          for j_ in range(len(next_points))
                          if j_ not in matched_next]

        # Re-join same-kind end/start pairs: a genuine Cerf event destroys a
        # (saddle, extremum) pair, so a lone same-kind end+start within one
        # interval is a matching miss, not an event.
        still_started = []
        for j_, q in started_points:
            best = None
            for br in ended:
                if br.kind != q.kind:
                    continue
                tail = br.nodes[-1].point
                same_channel = (tail.level_index is not None
                                and tail.level_index == q.level_index)
                cap = CHANNEL_CAP if same_channel else STITCH_CAP
                d = max(abs(tail.s - q.s), abs(tail.lam - q.lam))
                if d <= cap and (best is None or d < best[0]):
                    best = (d, br)
            if best is not None:
                _, br = best
                br.nodes.append(BranchNode(b_hi, q))
                new_active[j_] = br
                ended.remove(br)
            else:
                still_started.append((j_, q))

        new_branches = []
        for j_, q in still_started:
            br = Branch(branch_id=next_id, kind=q.kind,
                        nodes=[BranchNode(b_hi, q)])
            branches.append(br)
            new_active[j_] = br
            new_branches.append(br)
            next_id += 1

        evidence = list(degenerate[i]) + list(degenerate[i + 1])
        events.extend(_pair_events(ended, "death", (b_lo, b_hi), evidence, unpaired))
        events.extend(_pair_events(new_branches, "birth", (b_lo, b_hi), evidence, unpaired))
        active = new_active
    return branches, events, unpaired


def _pair_events(group, kind_of_event, interval, evidence, unpaired):
    """Pair saddles with extrema among branches appearing/vanishing together."""
    saddles = [br for br in group if br.kind == KIND_SADDLE]
    extrema = [br for br in group if br.kind != KIND_SADDLE]
    events = []
    if saddles and extrema:
        cost = np.empty((len(saddles), len(extrema)))
        for a, sb in enumerate(saddles):
            node = sb.nodes[-1 if kind_of_event == "death" else 0].point
            for c, eb in enumerate(extrema):
                other = eb.nodes[-1 if kind_of_event == "death" else 0].point
                cost[a, c] = max(abs(node.s - other.s), abs(node.lam - other.lam))
        rows, cols = linear_sum_assignment(cost)
        used_s, used_e = set(), set()
        for a, c in zip(rows, cols):
            sb, eb = saddles[a], extrema[c]
            ps = sb.nodes[-1 if kind_of_event == "death" else 0].point
            pe = eb.nodes[-1 if kind_of_event == "death" else 0].point
            loc = (0.5 * (ps.s + pe.s), 0.5 * (ps.lam + pe.lam))
            near = [d for d in evidence
                    if max(abs(d.s - loc[0]), abs(d.lam - loc[1])) < 0.1]
            events.append(CerfEvent(b_interval=interval, type=kind_of_event,
                                    saddle_branch=sb.branch_id,
                                    extremum_branch=eb.branch_id,
                                    location=loc, evidence=near))
            used_s.add(a)
            used_e.add(c)
        leftovers = ([saddles[a] for a in range(len(saddles)) if a not in used_s]
                     + [extrema[c] for c in range(len(extrema)) if c not in used_e])
    else:
        leftovers = list(group)
    for br in leftovers:
        node = br.nodes[-1 if kind_of_event == "death" else 0]
        unpaired.append({"branch_id": br.branch_id, "kind": br.kind,
                         "type": kind_of_event, "b_interval": interval,
                         "s": node.point.s, "lam": node.point.lam})
    return events


@dataclass
class SweepReport:
    rows: list           # (b, n_min, n_saddle, n_max, chi)
    chi: int
    n_events: int
    all_events_paired: bool


def verify_invariants(diagram: CerfDiagram) -> SweepReport:
    """Assert chi(b) is constant and every event is a (saddle, extremum) pair.

    A chi jump indicates a missed point; rerun with denser seeding.
    """
    rows = diagram.census()
    chis = [r[4] for r in rows]
    for i in range(1, len(chis)):
        if chis[i] != chis[i - 1]:
            raise InvariantViolationError(
                f"Euler characteristic jumps from {chis[i - 1]} to {chis[i]} in "
                f"b-interval [{rows[i - 1][0]:.6g}, {rows[i][0]:.6g}]; a critical "
                "point was missed - rerun with denser seeding")
    if diagram.unpaired:
        u = diagram.unpaired[0]
        raise InvariantViolationError(
            f"unpaired {u['kind']} {u['type']} for branch {u['branch_id']} in "
            f"b-interval {u['b_interval']}; events must pair a saddle with an "
            "extremum")
    return SweepReport(rows=rows, chi=chis[0], n_events=len(diagram.events),
                       all_events_paired=True)


@dataclass
class AngleTrace:
    branch_id: int
    values: list          # (b, theta)
    death_event: CerfEvent | None = None


def angle_trace(diagram: CerfDiagram, branch_id: int) -> AngleTrace:
    """Asymptote angle along a saddle branch; truncated traces carry the
    death event that ended the branch."""
    from .critical_points import asymptote_angle

    br = diagram.branch(branch_id)
    if br.kind != KIND_SADDLE:
        raise ValidationError(
            f"branch {branch_id} is a {br.kind} branch; angle traces need a saddle")
    values = [(node.b, asymptote_angle(node.point).theta) for node in br.nodes]
    death = None
    if br.nodes[-1].b != float(diagram.b_grid[-1]):
        for ev in diagram.events:
            if ev.type == "death" and branch_id in (ev.saddle_branch,
                                                    ev.extremum_branch):
                death = ev
                break
    return AngleTrace(branch_id=branch_id, values=values, death_event=death)


def first_gap_saddle_branch(diagram: CerfDiagram, family) -> int:
    """Branch id of the dominant anti-crossing: the saddle sitting between
    the two lowest eigenvalue curves at the first sweep value, with the
    smallest local gap if several qualify."""
    b0 = float(diagram.b_grid[0])
    best = None
    for br in diagram.branches:
        if br.kind != KIND_SADDLE or br.nodes[0].b != b0:
            continue
        p = br.nodes[0].point
        energies = np.linalg.eigvalsh(family.evaluate(p.s, b0))
        if energies[0] < p.lam < energies[1]:
            gap = energies[1] - energies[0]
            if best is None or gap < best[0]:
                best = (gap, br.branch_id)
    if best is None:
        raise ValidationError("no saddle between the two lowest curves at the "
                              "first sweep value")
    return best[1]
