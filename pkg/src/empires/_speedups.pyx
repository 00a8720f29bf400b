# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled core: the hot merge loop, twin of ``empires._core_py``.

Every observable behaviour here must match the pure-Python fallback
bit-for-bit: the same SplitMix64 draws in the same order, the same float
operations in the same association (the extension is built with
-ffp-contract=off for exactly that reason), the same sorted iteration
order when folding neighbour maps, and the same heap tie-breaking. The
cross-backend equality test in the suite holds both implementations to it.
"""

from libc.math cimport log1p
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from libcpp.algorithm cimport sort as cpp_sort
from cython.operator cimport dereference, preincrement

ctypedef long long i64
ctypedef unsigned long long u64
ctypedef double f64

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

DEF FENWICK_REBUILD_EVERY = 16384

BACKEND_NAME = "compiled"

cdef u64 GOLDEN = 0x9E3779B97F4A7C15u
cdef f64 INV53 = 1.0 / 9007199254740992.0  # 2**-53


cdef inline u64 mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9u
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBu
    return z ^ (z >> 31)


cdef struct HeapEntry:
    f64 t
    i64 seq
    i64 slot
    i64 ver


cdef inline bint heap_less(HeapEntry a, HeapEntry b) nogil:
    if a.t != b.t:
        return a.t < b.t
    return a.seq < b.seq


cdef class SimCore:
    """Mutable partition state over a fixed cell graph (compiled)."""

    cdef i64 _n_cells
    cdef vector[i64] parent
    cdef vector[i64] area
    cdef vector[i64] peri
    cdef vector[i64] rootcell
    cdef vector[i64] handle_of
    cdef vector[unordered_map[i64, i64]] nbr

    cdef i64 n_slots
    cdef vector[i64] e_ha
    cdef vector[i64] e_hb
    cdef vector[i64] e_len
    cdef vector[f64] e_rate

    cdef i64 _n_regions
    cdef i64 _n_edges
    cdef i64 _sum_sq
    cdef i64 _max_area
    cdef i64 _sum_peri
    cdef i64 _sum_len

    cdef int sched
    cdef int kind
    cdef f64 scale
    cdef object rate_fn
    cdef u64 rng_state
    cdef f64 now
    cdef vector[f64] fen
    cdef vector[HeapEntry] heap
    cdef vector[i64] slot_ver
    cdef i64 heap_seq

    def __init__(self, n_cells, edges):
        cdef i64 n = n_cells
        cdef i64 c, slot, a, b, length
        self._n_cells = n
        self.parent.resize(n)
        self.area.resize(n)
        self.peri.resize(n)
        self.rootcell.resize(n)
        self.handle_of.resize(n)
        self.nbr.resize(n)
        for c in range(n):
            self.parent[c] = c
            self.area[c] = 1
            self.peri[c] = 0
            self.rootcell[c] = c
            self.handle_of[c] = c

        cdef i64 m = len(edges)
        self.n_slots = m
        self.e_ha.resize(m)
        self.e_hb.resize(m)
        self.e_len.resize(m)
        self.e_rate.resize(m)
        slot = 0
        for a_py, b_py, length_py in edges:
            a = a_py
            b = b_py
            length = length_py
            self.e_ha[slot] = a
            self.e_hb[slot] = b
            self.e_len[slot] = length
            self.e_rate[slot] = 0.0
            self.nbr[a][b] = slot
            self.nbr[b][a] = slot
            self.peri[a] += length
            self.peri[b] += length
            slot += 1

        self._n_regions = n
        self._n_edges = m
        self._sum_sq = n
        self._max_area = 1
        self._sum_peri = 0
        for c in range(n):
            self._sum_peri += self.peri[c]
        self._sum_len = 0
        for slot in range(m):
            self._sum_len += self.e_len[slot]

        self.sched = SCHED_NONE
        self.kind = K_CONSTANT
        self.scale = 1.0
        self.rate_fn = None
        self.now = 0.0
        self.heap_seq = 0

    # ------------------------------------------------------------------ #
    # python-visible aggregates (same names as the fallback attributes)

    @property
    def n_cells(self):
        return self._n_cells

    @property
    def n_regions(self):
        return self._n_regions

    @property
    def n_edges(self):
        return self._n_edges

    @property
    def sum_sq(self):
        return self._sum_sq

    @property
    def max_area(self):
        return self._max_area

    @property
    def sum_peri(self):
        return self._sum_peri

    @property
    def sum_len(self):
        return self._sum_len

    # ------------------------------------------------------------------ #
    # rng

    cdef inline f64 _next_double(self):
        self.rng_state += GOLDEN
        return <f64>(mix64(self.rng_state) >> 11) * INV53

    # ------------------------------------------------------------------ #
    # queries

    cdef i64 _find(self, i64 x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def find(self, x):
        return self._find(x)

    def is_live_root(self, rid):
        return 0 <= rid < self._n_cells and self.parent[rid] == rid

    def region_area(self, rid):
        return self.area[self.handle_of[rid]]

    def region_perimeter(self, rid):
        return self.peri[self.handle_of[rid]]

    def region_neighbors(self, rid):
        cdef i64 h = self.handle_of[rid]
        cdef unordered_map[i64, i64].iterator it = self.nbr[h].begin()
        rows = []
        while it != self.nbr[h].end():
            rows.append((self.rootcell[dereference(it).first],
                         self.e_len[dereference(it).second]))
            preincrement(it)
        rows.sort()
        return rows

    def live_roots(self):
        cdef i64 c
        return [c for c in range(self._n_cells) if self.parent[c] == c]

    def owners(self):
        cdef i64 c
        return [self._find(c) for c in range(self._n_cells)]

    def edge_list(self):
        cdef i64 s, a, b
        out = []
        for s in range(self.n_slots):
            if self.e_ha[s] < 0:
                continue
            a = self.rootcell[self.e_ha[s]]
            b = self.rootcell[self.e_hb[s]]
            if a > b:
                a, b = b, a
            out.append((a, b, self.e_len[s]))
        out.sort()
        return out

    # ------------------------------------------------------------------ #
    # merging

    def merge_pair(self, a, b):
        cdef i64 ra = a, rb = b, slot
        if ra == rb:
            return -2
        if not (0 <= ra < self._n_cells and self.parent[ra] == ra):
            return -2
        if not (0 <= rb < self._n_cells and self.parent[rb] == rb):
            return -2
        cdef unordered_map[i64, i64].iterator it = \
            self.nbr[self.handle_of[ra]].find(self.handle_of[rb])
        if it == self.nbr[self.handle_of[ra]].end():
            return -2
        slot = dereference(it).second
        return self._merge_slot(slot)

    def merge_cells(self, u, v):
        cdef i64 ru = self._find(u)
        cdef i64 rv = self._find(v)
        cdef i64 slot
        if ru == rv:
            return -1
        cdef unordered_map[i64, i64].iterator it = \
            self.nbr[self.handle_of[ru]].find(self.handle_of[rv])
        if it == self.nbr[self.handle_of[ru]].end():
            return -2
        slot = dereference(it).second
        return self._merge_slot(slot)

    cdef void _free_slot(self, i64 slot):
        self.e_ha[slot] = -1
        self._rate_set(slot, 0.0)
        self._n_edges -= 1

    cdef void _rate_set(self, i64 slot, f64 rate):
        cdef f64 delta, t
        if self.sched == SCHED_AGGREGATE:
            delta = rate - self.e_rate[slot]
            self.e_rate[slot] = rate
            self._fen_add(slot + 1, delta)
        elif self.sched == SCHED_QUEUE:
            self.e_rate[slot] = rate
            self.slot_ver[slot] += 1
            if rate > 0.0:
                t = self.now - log1p(-self._next_double()) / rate
                self.heap_seq += 1
                self._heap_push(t, self.heap_seq, slot, self.slot_ver[slot])
        else:
            self.e_rate[slot] = rate

    cdef f64 _kernel_rate(self, i64 aa, i64 pa, i64 ab, i64 pb, i64 length):
        cdef i64 mx
        if self.kind == K_CONSTANT:
            return self.scale
        if self.kind == K_AREA_PRODUCT:
            return self.scale * <f64>(aa * ab)
        if self.kind == K_BOUNDARY_LENGTH:
            return self.scale * <f64>length
        if self.kind == K_INVERSE_AREA_PRODUCT:
            return self.scale / <f64>(aa * ab)
        if self.kind == K_NORMALIZED_BOUNDARY:
            mx = pa if pa >= pb else pb
            return self.scale * (<f64>length / <f64>mx)
        return <f64>self.rate_fn(aa, pa, ab, pb, length)

    cdef i64 _merge_slot(self, i64 slot):
        cdef i64 ha = self.e_ha[slot]
        cdef i64 hb = self.e_hb[slot]
        cdef i64 ra = self.rootcell[ha]
        cdef i64 rb = self.rootcell[hb]
        cdef i64 tmp, length0, area_a, area_b, new_area, new_peri
        cdef i64 h_keep, h_drop, c, s, s2, aa, pa
        cdef bint refresh_all

        if self.area[hb] > self.area[ha] or (
                self.area[hb] == self.area[ha] and rb < ra):
            tmp = ha; ha = hb; hb = tmp
            tmp = ra; ra = rb; rb = tmp
        self.parent[rb] = ra

        length0 = self.e_len[slot]
        area_a = self.area[ha]
        area_b = self.area[hb]
        new_area = area_a + area_b
        new_peri = self.peri[ha] + self.peri[hb] - 2 * length0

        self._sum_sq += 2 * area_a * area_b
        if new_area > self._max_area:
            self._max_area = new_area
        self._sum_peri -= 2 * length0
        self._sum_len -= length0
        self._n_regions -= 1

        if self.nbr[hb].size() > self.nbr[ha].size():
            h_keep = hb; h_drop = ha
        else:
            h_keep = ha; h_drop = hb

        self.nbr[ha].erase(hb)
        self.nbr[hb].erase(ha)
        self._free_slot(slot)

        self.area[h_keep] = new_area
        self.peri[h_keep] = new_peri
        self.rootcell[h_keep] = ra
        self.handle_of[ra] = h_keep

        refresh_all = (self.kind == K_AREA_PRODUCT or
                       self.kind == K_INVERSE_AREA_PRODUCT or
                       self.kind == K_NORMALIZED_BOUNDARY or
                       self.kind == K_TABLE)

        cdef vector[i64] keys
        cdef unordered_map[i64, i64].iterator it = self.nbr[h_drop].begin()
        while it != self.nbr[h_drop].end():
            keys.push_back(dereference(it).first)
            preincrement(it)
        cpp_sort(keys.begin(), keys.end())

        cdef size_t k
        for k in range(keys.size()):
            c = keys[k]
            s = self.nbr[h_drop][c]
            self.nbr[c].erase(h_drop)
            it = self.nbr[h_keep].find(c)
            if it != self.nbr[h_keep].end():
                s2 = dereference(it).second
                self.e_len[s2] += self.e_len[s]
                self._free_slot(s)
                if self.sched != SCHED_NONE and self.kind == K_BOUNDARY_LENGTH:
                    self._rate_set(s2, self.scale * <f64>self.e_len[s2])
            else:
                self.nbr[h_keep][c] = s
                self.nbr[c][h_keep] = s
                self.e_ha[s] = h_keep
                self.e_hb[s] = c
        self.nbr[h_drop].clear()

        if self.sched != SCHED_NONE and refresh_all:
            aa = self.area[h_keep]
            pa = self.peri[h_keep]
            keys.clear()
            it = self.nbr[h_keep].begin()
            while it != self.nbr[h_keep].end():
                keys.push_back(dereference(it).first)
                preincrement(it)
            cpp_sort(keys.begin(), keys.end())
            for k in range(keys.size()):
                c = keys[k]
                s = self.nbr[h_keep][c]
                self._rate_set(s, self._kernel_rate(
                    aa, pa, self.area[c], self.peri[c], self.e_len[s]))
        return ra

    # ------------------------------------------------------------------ #
    # Fenwick tree over slot rates

    cdef void _fen_build(self):
        cdef i64 m = self.n_slots
        cdef i64 i, j
        self.fen.assign(m + 1, 0.0)
        for i in range(1, m + 1):
            self.fen[i] += self.e_rate[i - 1]
            j = i + (i & -i)
            if j <= m:
                self.fen[j] += self.fen[i]

    cdef void _fen_add(self, i64 i, f64 delta):
        cdef i64 m = self.n_slots
        while i <= m:
            self.fen[i] += delta
            i += i & -i

    cdef f64 _fen_total(self):
        cdef i64 i = self.n_slots
        cdef f64 total = 0.0
        while i > 0:
            total += self.fen[i]
            i -= i & -i
        return total

    cdef i64 _fen_select(self, f64 target):
        cdef i64 m = self.n_slots
        cdef i64 pos = 0
        cdef i64 bit = 1
        cdef i64 nxt, slot, scanned
        while (bit << 1) <= m:
            bit <<= 1
        while bit:
            nxt = pos + bit
            if nxt <= m and self.fen[nxt] < target:
                target -= self.fen[nxt]
                pos = nxt
            bit >>= 1
        slot = pos if pos < m else m - 1
        scanned = 0
        while self.e_rate[slot] <= 0.0 and scanned <= m:
            slot += 1
            scanned += 1
            if slot == m:
                slot = 0
        return slot

    # ------------------------------------------------------------------ #
    # binary min-heap of edge timers (lazy deletion)

    cdef void _heap_push(self, f64 t, i64 seq, i64 slot, i64 ver):
        cdef HeapEntry e
        e.t = t; e.seq = seq; e.slot = slot; e.ver = ver
        self.heap.push_back(e)
        cdef size_t i = self.heap.size() - 1
        cdef size_t up
        while i > 0:
            up = (i - 1) >> 1
            if heap_less(self.heap[i], self.heap[up]):
                e = self.heap[i]
                self.heap[i] = self.heap[up]
                self.heap[up] = e
                i = up
            else:
                break

    cdef bint _heap_pop(self, HeapEntry* out):
        cdef size_t n = self.heap.size()
        cdef size_t i, child
        cdef HeapEntry e
        if n == 0:
            return False
        out[0] = self.heap[0]
        self.heap[0] = self.heap[n - 1]
        self.heap.pop_back()
        n -= 1
        i = 0
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and heap_less(self.heap[child + 1],
                                           self.heap[child]):
                child += 1
            if heap_less(self.heap[child], self.heap[i]):
                e = self.heap[i]
                self.heap[i] = self.heap[child]
                self.heap[child] = e
                i = child
            else:
                break
        return True

    # ------------------------------------------------------------------ #
    # event loop

    cdef void _sched_init(self, int kind, f64 scale, object rate_fn,
                          int sched, u64 rng_state):
        cdef i64 s, ha, hb
        cdef f64 t
        self.kind = kind
        self.scale = scale
        self.rate_fn = rate_fn
        self.sched = sched
        self.rng_state = rng_state
        self.now = 0.0
        for s in range(self.n_slots):
            if self.e_ha[s] < 0:
                self.e_rate[s] = 0.0
            else:
                ha = self.e_ha[s]
                hb = self.e_hb[s]
                self.e_rate[s] = self._kernel_rate(
                    self.area[ha], self.peri[ha], self.area[hb],
                    self.peri[hb], self.e_len[s])
        if sched == SCHED_AGGREGATE:
            self._fen_build()
        else:
            self.heap.clear()
            self.heap_seq = 0
            self.slot_ver.assign(self.n_slots, 0)
            for s in range(self.n_slots):
                if self.e_ha[s] >= 0:
                    t = -log1p(-self._next_double()) / self.e_rate[s]
                    self.heap_seq += 1
                    self._heap_push(t, self.heap_seq, s, 0)

    cdef bint _queue_pop(self, f64* t_out, i64* slot_out):
        cdef HeapEntry e
        while self._heap_pop(&e):
            if self.e_ha[e.slot] >= 0 and self.slot_ver[e.slot] == e.ver:
                t_out[0] = e.t
                slot_out[0] = e.slot
                return True
        return False

    def gillespie_run(self, kind, scale, rate_fn, rng_state, sched,
                      stop_kind, stop_value, sample_every,
                      time_probes, ref_cell, fraction_probes,
                      snapshot_densities, record_events):
        """Run merges until the stop rule fires or no event remains."""
        cdef int c_kind = kind
        cdef f64 c_scale = scale
        cdef int c_sched = sched
        cdef int c_stop_kind = stop_kind
        cdef f64 c_stop_value = stop_value
        cdef i64 c_sample_every = sample_every
        cdef i64 c_ref = ref_cell
        cdef bint c_record = record_events

        self._sched_init(c_kind, c_scale, rate_fn, c_sched, rng_state)

        cdef vector[f64] tp
        for x in time_probes:
            tp.push_back(x)
        cdef vector[f64] fp
        for x in fraction_probes:
            fp.push_back(x)
        cdef vector[f64] dens
        for x in snapshot_densities:
            dens.push_back(x)

        cdef i64 n_cells = self._n_cells
        events = ([], [], [], []) if c_record else None
        samples = []
        if c_sample_every > 0:
            samples.append((0.0, self._n_regions, self._sum_sq,
                            self._max_area))
        probe_rows = []
        fraction_times = [float("nan")] * len(fraction_probes)
        snapshots = []
        cdef size_t ti = 0, fi = 0, di = 0
        # triggers already satisfied by the initial state fire at t = 0
        while fi < fp.size() and \
                <f64>self._max_area >= fp[fi] * <f64>n_cells:
            fraction_times[fi] = 0.0
            fi += 1
        while di < dens.size() and \
                <f64>self._n_regions <= dens[di] * <f64>n_cells:
            snapshots.append((dens[di], 0.0, self.owners()))
            di += 1

        cdef i64 stop_regions = 0
        if c_stop_kind == STOP_REGIONS:
            stop_regions = <i64>c_stop_value

        cdef i64 n_ev = 0
        cdef bint exhausted = False
        cdef f64 total, u, t_next, tau, target
        cdef i64 slot, a_root, b_root, survivor, rh

        while True:
            if self._n_regions <= 1:
                exhausted = True
                break
            if c_stop_kind == STOP_REGIONS and \
                    self._n_regions <= stop_regions:
                break
            if c_stop_kind == STOP_FRACTION and \
                    <f64>self._max_area >= c_stop_value * <f64>n_cells:
                break

            if c_sched == SCHED_AGGREGATE:
                total = self._fen_total()
                if total <= 0.0:
                    exhausted = True
                    break
                u = self._next_double()
                t_next = self.now - log1p(-u) / total
                slot = -1
            else:
                if not self._queue_pop(&t_next, &slot):
                    exhausted = True
                    break

            while ti < tp.size() and tp[ti] < t_next:
                tau = tp[ti]
                if c_stop_kind == STOP_TIME and tau > c_stop_value:
                    break
                rh = self.handle_of[self._find(c_ref)]
                probe_rows.append((tau, self.area[rh], self.peri[rh],
                                   self._n_regions, self._sum_sq,
                                   self._max_area))
                ti += 1

            if c_stop_kind == STOP_TIME and t_next > c_stop_value:
                self.now = c_stop_value
                break

            if c_sched == SCHED_AGGREGATE:
                target = self._next_double() * total
                slot = self._fen_select(target)

            self.now = t_next
            a_root = self.rootcell[self.e_ha[slot]]
            b_root = self.rootcell[self.e_hb[slot]]
            survivor = self._merge_slot(slot)
            n_ev += 1
            if c_record:
                events[0].append(t_next)
                events[1].append(a_root)
                events[2].append(b_root)
                events[3].append(survivor)

            while fi < fp.size() and \
                    <f64>self._max_area >= fp[fi] * <f64>n_cells:
                fraction_times[fi] = self.now
                fi += 1
            while di < dens.size() and \
                    <f64>self._n_regions <= dens[di] * <f64>n_cells:
                snapshots.append((dens[di], self.now, self.owners()))
                di += 1
            if c_sample_every > 0 and n_ev % c_sample_every == 0:
                samples.append((self.now, self._n_regions, self._sum_sq,
                                self._max_area))
            if c_sched == SCHED_AGGREGATE and \
                    n_ev % FENWICK_REBUILD_EVERY == 0:
                self._fen_build()

        if exhausted:
            while ti < tp.size():
                tau = tp[ti]
                if c_stop_kind == STOP_TIME and tau > c_stop_value:
                    break
                rh = self.handle_of[self._find(c_ref)]
                probe_rows.append((tau, self.area[rh], self.peri[rh],
                                   self._n_regions, self._sum_sq,
                                   self._max_area))
                ti += 1

        if c_sample_every > 0 and (not samples or
                                   samples[len(samples) - 1][0] != self.now):
            # final row at the stop time (a time-stop can advance the clock
            # past the last event without one)
            samples.append((self.now, self._n_regions, self._sum_sq,
                            self._max_area))
        self.sched = SCHED_NONE
        return (self.now, n_ev, events, samples, probe_rows,
                fraction_times, snapshots)
