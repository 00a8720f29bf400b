"""The evolving planar partition: regions, adjacency, and exact geometry.

A partition starts as one region per lattice cell and only ever coarsens:
merging two adjacent regions adds areas, combines shared boundary lengths
of common neighbours, and shortens the joint perimeter by twice the
consumed boundary. All geometry is integer-exact; `recount_geometry` is an
independent brute-force scan used as the test oracle for the incremental
bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from . import lattice as lat
from .backend import core as _core
from .errors import StaleEdgeError


@dataclass(frozen=True)
class RegionRecord:
    """Aggregate geometry of one region."""

    id: int
    area: int
    perimeter: int


@dataclass(frozen=True)
class AdjacencyEdge:
    """An unordered adjacent pair and its total shared boundary length."""

    region_a: int
    region_b: int
    shared_length: int


class Partition:
    """Partition of a toroidal lattice into merged regions."""

    def __init__(self, spec: lat.LatticeSpec, core=None):
        self.lattice = spec
        self._core = core if core is not None else \
            _core.SimCore(spec.n_cells, lat.initial_edges(spec))

    # -- queries ---------------------------------------------------------

    @property
    def num_regions(self) -> int:
        return self._core.n_regions

    @property
    def num_edges(self) -> int:
        return self._core.n_edges

    @property
    def total_area(self) -> int:
        return self.lattice.n_cells

    @property
    def sum_sq_area(self) -> int:
        return self._core.sum_sq

    @property
    def largest_area(self) -> int:
        return self._core.max_area

    @property
    def sum_perimeter(self) -> int:
        return self._core.sum_peri

    @property
    def sum_shared_length(self) -> int:
        return self._core.sum_len

    def owner(self, cell: int) -> int:
        return self._core.find(cell)

    def owners(self) -> list[int]:
        return self._core.owners()

    def region(self, rid: int) -> RegionRecord:
        if not self._core.is_live_root(rid):
            raise StaleEdgeError(f"region {rid} does not exist")
        return RegionRecord(rid, self._core.region_area(rid),
                            self._core.region_perimeter(rid))

    def regions(self) -> Iterator[RegionRecord]:
        for rid in self._core.live_roots():
            yield RegionRecord(rid, self._core.region_area(rid),
                               self._core.region_perimeter(rid))

    def areas(self) -> list[int]:
        return [self._core.region_area(r) for r in self._core.live_roots()]

    def neighbors(self, rid: int) -> list[tuple[int, int]]:
        """(neighbour id, shared length) pairs, ascending by id."""
        if not self._core.is_live_root(rid):
            raise StaleEdgeError(f"region {rid} does not exist")
        return self._core.region_neighbors(rid)

    def edges(self) -> list[AdjacencyEdge]:
        return [AdjacencyEdge(a, b, length)
                for a, b, length in self._core.edge_list()]

    # -- mutation --------------------------------------------------------

    def merge(self, a: int, b: int) -> int:
        """Merge adjacent regions a and b; returns the surviving id.

        Raises StaleEdgeError if either endpoint has been absorbed or the
        two regions are not adjacent (callers replaying queued events are
        expected to catch this and discard the event).
        """
        survivor = self._core.merge_pair(a, b)
        if survivor < 0:
            raise StaleEdgeError(f"no live edge between {a} and {b}")
        return survivor

    def merge_edge(self, edge: AdjacencyEdge) -> int:
        return self.merge(edge.region_a, edge.region_b)


def init_partition(spec: lat.LatticeSpec) -> Partition:
    """One region per cell; unit cells have perimeter 4 (square) or 6 (hex)."""
    return Partition(spec)


@dataclass(frozen=True)
class GeometryCount:
    """Result of a brute-force geometry scan."""

    areas: dict[int, int]
    perimeters: dict[int, int]
    shared_lengths: dict[tuple[int, int], int]


def recount_geometry(partition: Partition) -> GeometryCount:
    """Recompute every area, perimeter, and shared length from cell owners.

    This scans all unit boundary segments of the lattice directly and is
    deliberately independent of the incremental bookkeeping (it only reads
    the cell-owner map), so tests can use it as an oracle. A torus has no
    outer boundary, so a single remaining region reports perimeter 0.
    """
    owners = partition.owners()
    areas: dict[int, int] = {}
    for root in owners:
        areas[root] = areas.get(root, 0) + 1
    perimeters = {root: 0 for root in areas}
    shared: dict[tuple[int, int], int] = {}
    for u, v in lat.contacts(partition.lattice):
        ou, ov = owners[u], owners[v]
        if ou == ov:
            continue
        key = (ou, ov) if ou < ov else (ov, ou)
        shared[key] = shared.get(key, 0) + 1
        perimeters[ou] += 1
        perimeters[ov] += 1
    return GeometryCount(areas, perimeters, shared)
