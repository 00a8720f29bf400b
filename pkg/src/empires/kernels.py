"""Merger-rate kernels: declarative rate functions over region aggregates.

A kernel maps the aggregates of two adjacent regions (areas, perimeters)
and their shared boundary length L to a positive merge rate. The catalog:

    constant               scale
    area-product           scale * area_a * area_b
    boundary-length        scale * L
    inverse-area-product   scale / (area_a * area_b)
    normalized-boundary    scale * L / max(peri_a, peri_b)
    user-table             scale * table[(area_a, area_b)] (fallback default)

Every kernel returns a finite positive rate whenever L >= 1, which is what
makes "adjacent" and "positive merge rate" the same thing. The `scale`
factor is a pure time rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigurationError, UnsupportedKernelError
from .partition import RegionRecord
from .backend import core as _core

CONSTANT = "constant"
AREA_PRODUCT = "area-product"
BOUNDARY_LENGTH = "boundary-length"
INVERSE_AREA_PRODUCT = "inverse-area-product"
NORMALIZED_BOUNDARY = "normalized-boundary"
USER_TABLE = "user-table"

CLOSED_FORM_KINDS = (CONSTANT, AREA_PRODUCT, BOUNDARY_LENGTH,
                     INVERSE_AREA_PRODUCT, NORMALIZED_BOUNDARY)
KINDS = CLOSED_FORM_KINDS + (USER_TABLE,)

_KIND_CODE = {
    CONSTANT: _core.K_CONSTANT,
    AREA_PRODUCT: _core.K_AREA_PRODUCT,
    BOUNDARY_LENGTH: _core.K_BOUNDARY_LENGTH,
    INVERSE_AREA_PRODUCT: _core.K_INVERSE_AREA_PRODUCT,
    NORMALIZED_BOUNDARY: _core.K_NORMALIZED_BOUNDARY,
    USER_TABLE: _core.K_TABLE,
}

# linear-scaling exponents: rate(c*A, c*B) = c**(2*gamma) * rate(A, B)
GAMMA = {
    CONSTANT: Fraction(0),
    AREA_PRODUCT: Fraction(2),
    BOUNDARY_LENGTH: Fraction(1, 2),
    INVERSE_AREA_PRODUCT: Fraction(-2),
    NORMALIZED_BOUNDARY: Fraction(0),
}


@dataclass(frozen=True)
class KernelSpec:
    """A rate function selected by kind, with a time-rescaling factor."""

    kind: str
    scale: float = 1.0
    # user-table only: unordered (area, area) -> rate, with a default for
    # pairs not listed; all values must be positive
    table: dict[tuple[int, int], float] | None = None
    table_default: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown kernel kind {self.kind!r}")
        if not self.scale > 0.0:
            raise ConfigurationError("kernel scale must be positive")
        if self.kind == USER_TABLE:
            if self.table_default <= 0.0 or (
                    self.table and any(v <= 0.0 for v in self.table.values())):
                raise ConfigurationError("table rates must be positive")

    @property
    def code(self) -> int:
        return _KIND_CODE[self.kind]

    def table_fn(self):
        """Callable (aa, pa, ab, pb, L) -> rate for the user-table kind."""
        if self.kind != USER_TABLE:
            return None
        table = self.table or {}
        scale = self.scale
        default = self.table_default

        def fn(aa, pa, ab, pb, length):
            key = (aa, ab) if aa <= ab else (ab, aa)
            return scale * table.get(key, default)

        return fn


def rate(kernel: KernelSpec, a: RegionRecord, b: RegionRecord,
         shared_length: int) -> float:
    """Merge rate of two adjacent regions with shared boundary length L >= 1."""
    return rate_from_aggregates(kernel, a.area, a.perimeter,
                                b.area, b.perimeter, shared_length)


def rate_from_aggregates(kernel: KernelSpec, area_a: int, peri_a: int,
                         area_b: int, peri_b: int, shared_length: int) -> float:
    k = kernel.kind
    if k == CONSTANT:
        return kernel.scale
    if k == AREA_PRODUCT:
        return kernel.scale * float(area_a * area_b)
    if k == BOUNDARY_LENGTH:
        return kernel.scale * float(shared_length)
    if k == INVERSE_AREA_PRODUCT:
        return kernel.scale / float(area_a * area_b)
    if k == NORMALIZED_BOUNDARY:
        return kernel.scale * (float(shared_length) / float(max(peri_a, peri_b)))
    fn = kernel.table_fn()
    return fn(area_a, peri_a, area_b, peri_b, shared_length)


def rate_exact(kind: str, area_a, peri_a, area_b, peri_b, shared_length,
               scale=Fraction(1)) -> Fraction:
    """Rational-arithmetic rate for the closed-form kinds (probing only)."""
    area_a, peri_a = Fraction(area_a), Fraction(peri_a)
    area_b, peri_b = Fraction(area_b), Fraction(peri_b)
    shared_length = Fraction(shared_length)
    if kind == CONSTANT:
        return scale
    if kind == AREA_PRODUCT:
        return scale * area_a * area_b
    if kind == BOUNDARY_LENGTH:
        return scale * shared_length
    if kind == INVERSE_AREA_PRODUCT:
        return scale / (area_a * area_b)
    if kind == NORMALIZED_BOUNDARY:
        return scale * shared_length / max(peri_a, peri_b)
    raise UnsupportedKernelError(f"no closed form for {kind!r}")


# ---------------------------------------------------------------------- #
# scaling exponents


@dataclass(frozen=True)
class ScalingReport:
    kernel_kind: str
    gamma: Fraction
    verified: bool


def _block_pair(k: int) -> tuple[int, int, int, int, int]:
    # two adjacent k-by-k square blocks sharing a side of length k
    area = k * k
    peri = 4 * k
    return area, peri, area, peri, k


def scaling_exponent(kernel: KernelSpec) -> ScalingReport:
    """Exponent gamma with rate(cA, cB) = c**(2*gamma) rate(A, B), verified
    exactly in rational arithmetic on scaled square-block probes."""
    if kernel.kind not in GAMMA:
        raise UnsupportedKernelError(
            "scaling exponent undefined for table kernels")
    gamma = GAMMA[kernel.kind]
    verified = True
    for k in (1, 2, 3):
        aa, pa, ab, pb, length = _block_pair(k)
        base = rate_exact(kernel.kind, aa, pa, ab, pb, length)
        for c in (2, 3):
            scaled = rate_exact(kernel.kind, c * c * aa, c * pa,
                                c * c * ab, c * pb, c * length)
            if scaled != Fraction(c) ** (2 * gamma) * base:
                verified = False
    return ScalingReport(kernel.kind, gamma, verified)


# ---------------------------------------------------------------------- #
# superadditivity probes


@dataclass(frozen=True)
class SplitProbe:
    """A rectangle split A = A1 | A2 lying against a rectangle B.

    A is width x height, cut vertically after `cut` columns; B spans the
    full width below A, so both halves touch B (L(A1,B) = cut,
    L(A2,B) = width - cut, L(A,B) = width).
    """

    width: int
    height: int
    cut: int
    b_height: int

    def pieces(self):
        w, h, c, hb = self.width, self.height, self.cut, self.b_height
        a1 = (c * h, 2 * (c + h), c)
        a2 = ((w - c) * h, 2 * ((w - c) + h), w - c)
        whole = (w * h, 2 * (w + h), w)
        b = (w * hb, 2 * (w + hb))
        return a1, a2, whole, b


DEFAULT_SPLIT_PROBES = (
    SplitProbe(2, 1, 1, 1),
    SplitProbe(3, 1, 1, 2),
    SplitProbe(4, 2, 2, 1),
    SplitProbe(6, 3, 2, 2),
    SplitProbe(5, 2, 4, 3),
)


@dataclass(frozen=True)
class ProbeResult:
    probe: SplitProbe
    split_rate_sum: Fraction
    joint_rate: Fraction

    @property
    def superadditive(self) -> bool:
        return self.split_rate_sum <= self.joint_rate


def superadditivity_probe(kernel: KernelSpec,
                          probes=DEFAULT_SPLIT_PROBES) -> list[ProbeResult]:
    """Check rate(A1,B) + rate(A2,B) <= rate(A1 u A2, B) on each probe."""
    out = []
    for probe in probes:
        (a1, p1, l1), (a2, p2, l2), (a, p, l), (ab, pb) = probe.pieces()
        lhs = (rate_exact(kernel.kind, a1, p1, ab, pb, l1) +
               rate_exact(kernel.kind, a2, p2, ab, pb, l2))
        rhs = rate_exact(kernel.kind, a, p, ab, pb, l)
        out.append(ProbeResult(probe, lhs, rhs))
    return out
