"""Pure-Python core: dynamic region graph plus the event-driven merge loop.

This module is the fallback twin of the compiled extension
``empires._speedups``. The two implementations must stay behaviourally
identical: same random draws in the same order, same floating-point
operations in the same association, same tie-breaking rules. Any run is then
bit-reproducible regardless of which backend is active.

Layout of the region graph
--------------------------
Cells are merged through a union-find (path compression, union by area,
ties to the smaller root index); the public identity of a region is its
union-find root cell. Region aggregates (area, perimeter) live on a
separate "handle" so that merging two regions can always fold the smaller
neighbour map into the larger one, independent of which root survives.
Adjacency edges live in fixed slots; merges only ever remove or combine
slots, never allocate, so the initial edge count bounds the slot table.

Determinism rules baked in here (and mirrored in the extension):
- neighbour maps are folded and refreshed in ascending-handle order;
- the per-edge queue breaks (never observed) time ties by push order;
- uniform doubles are (u64 >> 11) * 2**-53 and exponentials -log1p(-u)/rate.
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

from .rng import SplitMix64

# kernel kinds
K_CONSTANT = 0
K_AREA_PRODUCT = 1
K_BOUNDARY_LENGTH = 2
K_INVERSE_AREA_PRODUCT = 3
K_NORMALIZED_BOUNDARY = 4
K_TABLE = 5

# scheduler modes
SCHED_NONE = 0
SCHED_AGGREGATE = 1
SCHED_QUEUE = 2

# stop-rule kinds
STOP_TIME = 0
STOP_REGIONS = 1
STOP_FRACTION = 2

_FENWICK_REBUILD_EVERY = 16384

BACKEND_NAME = "python"


def _edge_rate(kind, scale, rate_fn, aa, pa, ab, pb, length):
    # The five closed-form kernels; kind 5 defers to a user-supplied callable.
    if kind == K_CONSTANT:
        return scale
    if kind == K_AREA_PRODUCT:
        return scale * float(aa * ab)
    if kind == K_BOUNDARY_LENGTH:
        return scale * float(length)
    if kind == K_INVERSE_AREA_PRODUCT:
        return scale / float(aa * ab)
    if kind == K_NORMALIZED_BOUNDARY:
        mx = pa if pa >= pb else pb
        return scale * (float(length) / float(mx))
    return rate_fn(aa, pa, ab, pb, length)


class SimCore:
    """Mutable partition state over a fixed cell graph."""

    def __init__(self, n_cells, edges):
        n = n_cells
        self.n_cells = n
        self.parent = list(range(n))
        # per-handle region records; handle h starts as cell h
        self.area = [1] * n
        self.peri = [0] * n
        self.rootcell = list(range(n))
        self.handle_of = list(range(n))  # valid at live roots only
        self.nbr = [dict() for _ in range(n)]  # handle -> {nbr_handle: slot}

        m = len(edges)
        self.n_slots = m
        self.e_ha = [0] * m
        self.e_hb = [0] * m
        self.e_len = [0] * m
        self.e_rate = [0.0] * m
        for slot, (a, b, length) in enumerate(edges):
            self.e_ha[slot] = a
            self.e_hb[slot] = b
            self.e_len[slot] = length
            self.nbr[a][b] = slot
            self.nbr[b][a] = slot
            self.peri[a] += length
            self.peri[b] += length

        self.n_regions = n
        self.n_edges = m
        self.sum_sq = n            # sum of area^2
        self.max_area = 1
        self.sum_peri = sum(self.peri)
        self.sum_len = sum(self.e_len)

        # scheduler state (inactive until a run configures it)
        self.sched = SCHED_NONE
        self.kind = K_CONSTANT
        self.scale = 1.0
        self.rate_fn = None
        self.rng = None
        self.now = 0.0
        self.fen = []
        self.heap = []
        self.slot_ver = []
        self.heap_seq = 0

    # ------------------------------------------------------------------ #
    # queries

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def is_live_root(self, rid):
        return 0 <= rid < self.n_cells and self.parent[rid] == rid

    def region_area(self, rid):
        return self.area[self.handle_of[rid]]

    def region_perimeter(self, rid):
        return self.peri[self.handle_of[rid]]

    def region_neighbors(self, rid):
        h = self.handle_of[rid]
        rows = [(self.rootcell[c], self.e_len[s]) for c, s in self.nbr[h].items()]
        rows.sort()
        return rows

    def live_roots(self):
        return [c for c in range(self.n_cells) if self.parent[c] == c]

    def owners(self):
        return [self.find(c) for c in range(self.n_cells)]

    def edge_list(self):
        out = []
        for s in range(self.n_slots):
            ha = self.e_ha[s]
            if ha < 0:
                continue
            a = self.rootcell[ha]
            b = self.rootcell[self.e_hb[s]]
            if a > b:
                a, b = b, a
            out.append((a, b, self.e_len[s]))
        out.sort()
        return out

    # ------------------------------------------------------------------ #
    # merging

    def merge_pair(self, a, b):
        """Merge live root regions a and b. Returns the surviving root,
        or -2 if the edge is stale (endpoint gone or not adjacent)."""
        if a == b or not self.is_live_root(a) or not self.is_live_root(b):
            return -2
        slot = self.nbr[self.handle_of[a]].get(self.handle_of[b], -1)
        if slot < 0:
            return -2
        return self._merge_slot(slot)

    def merge_cells(self, u, v):
        """Merge the regions containing cells u and v; -1 if already one."""
        ru = self.find(u)
        rv = self.find(v)
        if ru == rv:
            return -1
        slot = self.nbr[self.handle_of[ru]].get(self.handle_of[rv], -1)
        if slot < 0:
            return -2
        return self._merge_slot(slot)

    def _free_slot(self, slot):
        self.e_ha[slot] = -1
        self.e_rate_set(slot, 0.0)
        self.n_edges -= 1

    def e_rate_set(self, slot, rate):
        if self.sched == SCHED_AGGREGATE:
            delta = rate - self.e_rate[slot]
            self.e_rate[slot] = rate
            self._fen_add(slot + 1, delta)
        elif self.sched == SCHED_QUEUE:
            self.e_rate[slot] = rate
            self.slot_ver[slot] += 1
            if rate > 0.0:
                t = self.now - math.log1p(-self.rng.next_double()) / rate
                self.heap_seq += 1
                heappush(self.heap, (t, self.heap_seq, slot, self.slot_ver[slot]))
        else:
            self.e_rate[slot] = rate

    def _merge_slot(self, slot):
        ha = self.e_ha[slot]
        hb = self.e_hb[slot]
        ra = self.rootcell[ha]
        rb = self.rootcell[hb]
        # union by area; ties go to the smaller root index
        if self.area[hb] > self.area[ha] or (
                self.area[hb] == self.area[ha] and rb < ra):
            ha, hb = hb, ha
            ra, rb = rb, ra
        self.parent[rb] = ra

        length0 = self.e_len[slot]
        area_a = self.area[ha]
        area_b = self.area[hb]
        new_area = area_a + area_b
        new_peri = self.peri[ha] + self.peri[hb] - 2 * length0

        self.sum_sq += 2 * area_a * area_b
        if new_area > self.max_area:
            self.max_area = new_area
        self.sum_peri -= 2 * length0
        self.sum_len -= length0
        self.n_regions -= 1

        # keep the larger neighbour map, fold the smaller one into it
        if len(self.nbr[hb]) > len(self.nbr[ha]):
            h_keep, h_drop = hb, ha
        else:
            h_keep, h_drop = ha, hb

        del self.nbr[ha][hb]
        del self.nbr[hb][ha]
        self._free_slot(slot)

        self.area[h_keep] = new_area
        self.peri[h_keep] = new_peri
        self.rootcell[h_keep] = ra
        self.handle_of[ra] = h_keep

        keep_map = self.nbr[h_keep]
        drop_map = self.nbr[h_drop]
        refresh_all = self.kind in (K_AREA_PRODUCT, K_INVERSE_AREA_PRODUCT,
                                    K_NORMALIZED_BOUNDARY, K_TABLE)
        sched = self.sched
        for c in sorted(drop_map):
            s = drop_map[c]
            cmap = self.nbr[c]
            del cmap[h_drop]
            s2 = keep_map.get(c, -1)
            if s2 >= 0:
                # common neighbour: shared boundary lengths add
                self.e_len[s2] += self.e_len[s]
                self._free_slot(s)
                if sched != SCHED_NONE and self.kind == K_BOUNDARY_LENGTH:
                    self.e_rate_set(s2, self.scale * float(self.e_len[s2]))
            else:
                keep_map[c] = s
                cmap[h_keep] = s
                self.e_ha[s] = h_keep
                self.e_hb[s] = c
        drop_map.clear()

        if sched != SCHED_NONE and refresh_all:
            # the merged region's aggregates changed, so every incident edge
            # carries a new rate (exact for the queue by memorylessness)
            aa = self.area[h_keep]
            pa = self.peri[h_keep]
            for c in sorted(keep_map):
                s = keep_map[c]
                r = _edge_rate(self.kind, self.scale, self.rate_fn,
                               aa, pa, self.area[c], self.peri[c],
                               self.e_len[s])
                self.e_rate_set(s, r)
        return ra

    # ------------------------------------------------------------------ #
    # Fenwick tree over slot rates (aggregate sampler)

    def _fen_build(self):
        m = self.n_slots
        fen = [0.0] * (m + 1)
        rates = self.e_rate
        for i in range(1, m + 1):
            fen[i] += rates[i - 1]
            j = i + (i & -i)
            if j <= m:
                fen[j] += fen[i]
        self.fen = fen

    def _fen_add(self, i, delta):
        fen = self.fen
        m = self.n_slots
        while i <= m:
            fen[i] += delta
            i += i & -i

    def _fen_total(self):
        fen = self.fen
        i = self.n_slots
        total = 0.0
        while i > 0:
            total += fen[i]
            i -= i & -i
        return total

    def _fen_select(self, target):
        fen = self.fen
        m = self.n_slots
        pos = 0
        bit = 1
        while (bit << 1) <= m:
            bit <<= 1
        while bit:
            nxt = pos + bit
            if nxt <= m and fen[nxt] < target:
                target -= fen[nxt]
                pos = nxt
            bit >>= 1
        # pos leaves are strictly below target; slot index == pos
        slot = pos if pos < m else m - 1
        # guard against float residue landing on a dead slot
        scanned = 0
        while self.e_rate[slot] <= 0.0 and scanned <= m:
            slot += 1
            scanned += 1
            if slot == m:
                slot = 0
        return slot

    # ------------------------------------------------------------------ #
    # event loop

    def _sched_init(self, kind, scale, rate_fn, sched, rng_state):
        self.kind = kind
        self.scale = scale
        self.rate_fn = rate_fn
        self.sched = sched
        self.rng = SplitMix64(rng_state)
        self.now = 0.0
        for s in range(self.n_slots):
            if self.e_ha[s] < 0:
                self.e_rate[s] = 0.0
            else:
                ha = self.e_ha[s]
                hb = self.e_hb[s]
                self.e_rate[s] = _edge_rate(
                    kind, scale, rate_fn, self.area[ha], self.peri[ha],
                    self.area[hb], self.peri[hb], self.e_len[s])
        if sched == SCHED_AGGREGATE:
            self._fen_build()
        else:
            self.heap = []
            self.heap_seq = 0
            self.slot_ver = [0] * self.n_slots
            rng = self.rng
            for s in range(self.n_slots):
                if self.e_ha[s] >= 0:
                    t = -math.log1p(-rng.next_double()) / self.e_rate[s]
                    self.heap_seq += 1
                    heappush(self.heap, (t, self.heap_seq, s, 0))

    def _queue_pop(self):
        heap = self.heap
        while heap:
            t, _, slot, ver = heappop(heap)
            if self.e_ha[slot] >= 0 and self.slot_ver[slot] == ver:
                return t, slot
        return math.inf, -1

    def gillespie_run(self, kind, scale, rate_fn, rng_state, sched,
                      stop_kind, stop_value, sample_every,
                      time_probes, ref_cell, fraction_probes,
                      snapshot_densities, record_events):
        """Run merges until the stop rule fires or no event remains.

        Returns (final_time, n_events, events, samples, probe_rows,
        fraction_times, snapshots); see engine.run for the friendly wrapper.
        """
        self._sched_init(kind, scale, rate_fn, sched, rng_state)
        n_cells = self.n_cells

        events = ([], [], [], []) if record_events else None
        samples = []
        if sample_every > 0:
            samples.append((0.0, self.n_regions, self.sum_sq, self.max_area))
        probe_rows = []
        ti = 0
        fraction_times = [math.nan] * len(fraction_probes)
        fi = 0
        snapshots = []
        di = 0
        # triggers already satisfied by the initial state fire at t = 0
        while fi < len(fraction_probes) and \
                self.max_area >= fraction_probes[fi] * n_cells:
            fraction_times[fi] = 0.0
            fi += 1
        while di < len(snapshot_densities) and \
                self.n_regions <= snapshot_densities[di] * n_cells:
            snapshots.append((snapshot_densities[di], 0.0, self.owners()))
            di += 1

        stop_regions = 0
        if stop_kind == STOP_REGIONS:
            stop_regions = int(stop_value)

        n_ev = 0
        exhausted = False
        while True:
            if self.n_regions <= 1:
                exhausted = True
                break
            if stop_kind == STOP_REGIONS and self.n_regions <= stop_regions:
                break
            if stop_kind == STOP_FRACTION and \
                    self.max_area >= stop_value * n_cells:
                break

            if sched == SCHED_AGGREGATE:
                total = self._fen_total()
                if total <= 0.0:
                    exhausted = True
                    break
                u = self.rng.next_double()
                t_next = self.now - math.log1p(-u) / total
                slot = -1
            else:
                t_next, slot = self._queue_pop()
                if slot < 0:
                    exhausted = True
                    break

            while ti < len(time_probes) and time_probes[ti] < t_next:
                tau = time_probes[ti]
                if stop_kind == STOP_TIME and tau > stop_value:
                    break
                rh = self.handle_of[self.find(ref_cell)]
                probe_rows.append((tau, self.area[rh], self.peri[rh],
                                   self.n_regions, self.sum_sq, self.max_area))
                ti += 1

            if stop_kind == STOP_TIME and t_next > stop_value:
                self.now = stop_value
                break

            if sched == SCHED_AGGREGATE:
                target = self.rng.next_double() * total
                slot = self._fen_select(target)

            self.now = t_next
            a_root = self.rootcell[self.e_ha[slot]]
            b_root = self.rootcell[self.e_hb[slot]]
            survivor = self._merge_slot(slot)
            n_ev += 1
            if record_events:
                events[0].append(t_next)
                events[1].append(a_root)
                events[2].append(b_root)
                events[3].append(survivor)

            while fi < len(fraction_probes) and \
                    self.max_area >= fraction_probes[fi] * n_cells:
                fraction_times[fi] = self.now
                fi += 1
            while di < len(snapshot_densities) and \
                    self.n_regions <= snapshot_densities[di] * n_cells:
                snapshots.append((snapshot_densities[di], self.now,
                                  self.owners()))
                di += 1
            if sample_every > 0 and n_ev % sample_every == 0:
                samples.append((self.now, self.n_regions, self.sum_sq,
                                self.max_area))
            if sched == SCHED_AGGREGATE and n_ev % _FENWICK_REBUILD_EVERY == 0:
                self._fen_build()

        if exhausted:
            # no further event is possible: the state holds forever, so any
            # remaining probes read the final state
            while ti < len(time_probes):
                tau = time_probes[ti]
                if stop_kind == STOP_TIME and tau > stop_value:
                    break
                rh = self.handle_of[self.find(ref_cell)]
                probe_rows.append((tau, self.area[rh], self.peri[rh],
                                   self.n_regions, self.sum_sq, self.max_area))
                ti += 1

        if sample_every > 0 and (not samples or
                                 samples[-1][0] != self.now):
            # final row at the stop time (a time-stop can advance the clock
            # past the last event without one)
            samples.append((self.now, self.n_regions, self.sum_sq,
                            self.max_area))
        self.sched = SCHED_NONE
        return (self.now, n_ev, events, samples, probe_rows,
                fraction_times, snapshots)
