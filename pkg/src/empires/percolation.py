"""Bond percolation on the square torus and its coupling to region merging.

Every lattice edge carries an Exponential(1) opening time, so the open-edge
configuration at time t is bond percolation with p(t) = 1 - exp(-t). The
same clocks drive the boundary-length-kernel merging process on the dual
grid of unit cells: a segment's clock firing merges the two cells' regions
if they are still distinct, and otherwise is a cycle edge of the primal
component. With components and regions identified through the shared
clocks, the multiset identity

    open edges of a component  ==  (cells of its region) - 1 + (cycle edges)

holds exactly at every event time: singleton cells count as edge-0 trees,
and each cycle edge "absorbs" one more unit of effective area. The
coupling check replays both sides independently (union-find on vertices
versus the full region-graph bookkeeping) and compares the multisets after
every event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import lattice as lat
from .backend import core as _core
from .errors import CouplingViolationError
from .rng import SplitMix64, derive_stream


@dataclass(frozen=True)
class BondConfig:
    """Per-edge Exponential(1) opening times on an N x N square torus."""

    size: int
    seed: int
    edge_times: tuple[float, ...]

    @property
    def n_edges(self) -> int:
        return 2 * self.size * self.size


def edge_times(seed: int, size: int, stream: int = 0) -> BondConfig:
    """Draw the opening time of every edge, in canonical segment order."""
    spec = lat.square(size, size)
    rng = SplitMix64(derive_stream(seed, stream))
    times = tuple(-math.log1p(-rng.next_double())
                  for _ in range(len(lat.contacts(spec))))
    return BondConfig(size, seed, times)


class _UnionFind:
    __slots__ = ("parent", "size")

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx, rx
        if self.size[ry] > self.size[rx] or (
                self.size[ry] == self.size[rx] and ry < rx):
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        return rx, ry


@dataclass(frozen=True)
class ComponentSnapshot:
    """Open-edge components at one threshold time."""

    t: float
    p: float
    vertex_counts: list[int]       # per component, descending
    edge_counts: list[int]         # aligned with vertex_counts
    n_components: int
    largest_fraction: float


def percolate(seed: int, size: int, times: list[float],
              stream: int = 0) -> tuple[BondConfig, list[ComponentSnapshot]]:
    """Sweep opening times once, reporting components at each requested t."""
    config = edge_times(seed, size, stream)
    spec = lat.square(size, size)
    segs = lat.contacts(spec)
    n = spec.n_cells
    order = sorted(range(len(segs)), key=lambda k: config.edge_times[k])
    uf = _UnionFind(n)
    edges_of = [0] * n
    out = []
    idx = 0
    for t in sorted(times):
        while idx < len(order) and config.edge_times[order[idx]] <= t:
            u, v = segs[order[idx]]
            keep, gone = uf.union(u, v)
            if keep == gone:
                edges_of[keep] += 1
            else:
                edges_of[keep] += edges_of[gone] + 1
            idx += 1
        comps = [(uf.size[r], edges_of[r])
                 for r in range(n) if uf.find(r) == r]
        comps.sort(reverse=True)
        out.append(ComponentSnapshot(
            t=t,
            p=1.0 - math.exp(-t),
            vertex_counts=[c[0] for c in comps],
            edge_counts=[c[1] for c in comps],
            n_components=len(comps),
            largest_fraction=comps[0][0] / n,
        ))
    return config, out


def crossing_time(seed: int, size: int, fraction: float = 0.5,
                  stream: int = 0) -> float:
    """First opening time at which the largest component reaches the given
    vertex fraction."""
    config = edge_times(seed, size, stream)
    spec = lat.square(size, size)
    segs = lat.contacts(spec)
    n = spec.n_cells
    target = fraction * n
    order = sorted(range(len(segs)), key=lambda k: config.edge_times[k])
    uf = _UnionFind(n)
    for k in order:
        u, v = segs[k]
        keep, _ = uf.union(u, v)
        if uf.size[keep] >= target:
            return config.edge_times[k]
    return math.inf


class _MultisetMatch:
    """Two integer multisets with an O(1) mismatch indicator."""

    __slots__ = ("counts", "unbalanced")

    def __init__(self):
        self.counts = {}
        self.unbalanced = 0

    def add(self, key, side):
        delta = 1 if side == 0 else -1
        old = self.counts.get(key, 0)
        new = old + delta
        if old == 0:
            self.unbalanced += 1
        elif new == 0:
            self.unbalanced -= 1
        if new:
            self.counts[key] = new
        else:
            del self.counts[key]

    def remove(self, key, side):
        delta = -1 if side == 0 else 1
        old = self.counts.get(key, 0)
        new = old + delta
        if old == 0:
            self.unbalanced += 1
        elif new == 0:
            self.unbalanced -= 1
        if new:
            self.counts[key] = new
        else:
            del self.counts[key]

    @property
    def matched(self):
        return self.unbalanced == 0


@dataclass
class CouplingReport:
    size: int
    seed: int
    events: int
    merges: int
    cycle_events: int
    mismatch_events: int
    first_mismatch_event: int | None

    @property
    def ok(self) -> bool:
        return self.mismatch_events == 0


def couple_with_empire(seed: int, size: int, t_max: float | None = None,
                       stream: int = 0, strict: bool = False) -> CouplingReport:
    """Drive percolation and the dual merging process off shared clocks and
    compare the edge-count/effective-area multisets after every event.

    The dual side runs through the full region-graph bookkeeping (the same
    code the simulator uses), so this doubles as an end-to-end cross-check
    of the incremental geometry. With strict=True a mismatch raises
    CouplingViolationError immediately.
    """
    config = edge_times(seed, size, stream)
    spec = lat.square(size, size)
    segs = lat.contacts(spec)
    n = spec.n_cells
    order = sorted(range(len(segs)), key=lambda k: config.edge_times[k])

    # primal side: vertex components with open-edge counts
    uf = _UnionFind(n)
    edges_of = [0] * n
    # dual side: the real region graph, plus per-region cycle-edge counts
    core = _core.SimCore(n, lat.initial_edges(spec))
    cycles_of: dict[int, int] = {}

    match = _MultisetMatch()
    for _ in range(n):
        match.add(0, 0)  # every component starts with 0 edges
        match.add(0, 1)  # every region starts with effective area 1-1+0 = 0

    events = merges = cycle_events = mismatches = 0
    first_bad = None
    for k in order:
        if t_max is not None and config.edge_times[k] > t_max:
            break
        u, v = segs[k]

        keep, gone = uf.union(u, v)
        if keep == gone:
            match.remove(edges_of[keep], 0)
            edges_of[keep] += 1
            match.add(edges_of[keep], 0)
        else:
            match.remove(edges_of[keep], 0)
            match.remove(edges_of[gone], 0)
            edges_of[keep] += edges_of[gone] + 1
            match.add(edges_of[keep], 0)

        ru = core.find(u)
        rv = core.find(v)
        if ru == rv:
            cycle_events += 1
            old = core.region_area(ru) - 1 + cycles_of.get(ru, 0)
            cycles_of[ru] = cycles_of.get(ru, 0) + 1
            match.remove(old, 1)
            match.add(old + 1, 1)
        else:
            merges += 1
            ea = core.region_area(ru) - 1 + cycles_of.get(ru, 0)
            eb = core.region_area(rv) - 1 + cycles_of.get(rv, 0)
            cyc = cycles_of.pop(ru, 0) + cycles_of.pop(rv, 0)
            survivor = core.merge_cells(u, v)
            cycles_of[survivor] = cyc
            match.remove(ea, 1)
            match.remove(eb, 1)
            match.add(core.region_area(survivor) - 1 + cyc, 1)

        events += 1
        if not match.matched:
            mismatches += 1
            if first_bad is None:
                first_bad = events
            if strict:
                raise CouplingViolationError(
                    f"multiset mismatch at event {events} "
                    f"(seed {seed}, size {size})")
    return CouplingReport(size, seed, events, merges, cycle_events,
                          mismatches, first_bad)


def boundary_length_agreement(seed: int, size: int, t: float,
                              stream: int = 0) -> bool:
    """Check that the number of closed primal edges between two adjacent
    components equals the shared boundary length of the two dual regions."""
    config = edge_times(seed, size, stream)
    spec = lat.square(size, size)
    segs = lat.contacts(spec)
    n = spec.n_cells
    uf = _UnionFind(n)
    core = _core.SimCore(n, lat.initial_edges(spec))
    order = sorted(range(len(segs)), key=lambda k: config.edge_times[k])
    for k in order:
        if config.edge_times[k] > t:
            break
        u, v = segs[k]
        uf.union(u, v)
        if core.find(u) != core.find(v):
            core.merge_cells(u, v)
    # count, for every adjacent component pair, the edges between them
    between: dict[tuple[int, int], int] = {}
    for u, v in segs:
        cu, cv = uf.find(u), uf.find(v)
        if cu == cv:
            continue
        key = (cu, cv) if cu < cv else (cv, cu)
        between[key] = between.get(key, 0) + 1
    # compare with the region graph's shared lengths (components and
    # regions share root cells by construction)
    shared = {}
    for a, b, length in core.edge_list():
        shared[(a, b)] = length
    return between == shared
