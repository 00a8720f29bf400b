"""Toroidal lattice geometry: cell indexing and boundary-segment enumeration.

Both supported lattices are periodic in each direction, so every unit cell
has the same number of unit boundary segments (4 on the square torus, 6 on
the hexagonal torus) and there is no outer boundary. The hexagonal lattice
uses odd-row offset coordinates; an even height keeps row parity consistent
across the vertical wrap.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError

SQUARE = "square"
HEX = "hex"

CELL_PERIMETER = {SQUARE: 4, HEX: 6}


@dataclass(frozen=True)
class LatticeSpec:
    """A periodic lattice of unit cells."""

    topology: str
    width: int
    height: int

    def __post_init__(self):
        if self.topology not in (SQUARE, HEX):
            raise ConfigurationError(f"unknown topology {self.topology!r}")
        if self.width < 2 or self.height < 2:
            raise ConfigurationError(
                f"lattice must be at least 2x2, got {self.width}x{self.height}")
        if self.topology == HEX and self.height % 2 != 0:
            raise ConfigurationError(
                "hexagonal torus needs an even height for a consistent wrap")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    @property
    def cell_perimeter(self) -> int:
        return CELL_PERIMETER[self.topology]

    def cell_index(self, x: int, y: int) -> int:
        return (y % self.height) * self.width + (x % self.width)

    def cell_xy(self, cell: int) -> tuple[int, int]:
        return cell % self.width, cell // self.width


def square(width: int, height: int) -> LatticeSpec:
    return LatticeSpec(SQUARE, width, height)


def hexagonal(width: int, height: int) -> LatticeSpec:
    return LatticeSpec(HEX, width, height)


def contacts(spec: LatticeSpec) -> list[tuple[int, int]]:
    """All unit boundary segments as (cell, neighbour) pairs, each once.

    Every cell contributes its "forward" half of the neighbourhood (east plus
    the downward directions), so the list has exactly 2*n cells entries on the
    square torus and 3*n on the hexagonal one. The order is canonical: it is
    the segment numbering used for shared-clock couplings.
    """
    w, h = spec.width, spec.height
    out = []
    if spec.topology == SQUARE:
        for y in range(h):
            row = y * w
            row_s = ((y + 1) % h) * w
            for x in range(w):
                c = row + x
                out.append((c, row + (x + 1) % w))   # east
                out.append((c, row_s + x))           # south
    else:
        for y in range(h):
            row = y * w
            row_s = ((y + 1) % h) * w
            odd = y % 2
            for x in range(w):
                c = row + x
                out.append((c, row + (x + 1) % w))   # east
                if odd:
                    out.append((c, row_s + x))               # down-left
                    out.append((c, row_s + (x + 1) % w))     # down-right
                else:
                    out.append((c, row_s + (x - 1) % w))     # down-left
                    out.append((c, row_s + x))               # down-right
    return out


def initial_edges(spec: LatticeSpec) -> list[tuple[int, int, int]]:
    """Adjacency list of the initial partition: (cell_a, cell_b, shared_length).

    Segments between the same unordered cell pair are accumulated into one
    edge (this only happens on width-2 or height-2 tori, where two cells can
    touch along two distinct segments).
    """
    acc: dict[tuple[int, int], int] = {}
    for u, v in contacts(spec):
        key = (u, v) if u < v else (v, u)
        acc[key] = acc.get(key, 0) + 1
    return [(a, b, length) for (a, b), length in acc.items()]


def neighbour_counts(spec: LatticeSpec) -> list[int]:
    """Number of distinct neighbouring cells per cell (for tests)."""
    counts = [0] * spec.n_cells
    for a, b, _ in initial_edges(spec):
        counts[a] += 1
        counts[b] += 1
    return counts
