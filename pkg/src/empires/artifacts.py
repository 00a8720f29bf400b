"""Deterministic file outputs: trajectory CSVs, curve CSVs, PPM snapshots,
and the run manifest.

Floats are written with repr (shortest round-trip), so identical runs
produce byte-identical files. Snapshot images are binary PPM with a color
per region id derived from a fixed 64-bit hash; no imaging library is
involved, which keeps images bit-reproducible too.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .rng import mix64

TRAJECTORY_COLUMNS = ("replica", "seed", "t", "regions", "D", "S",
                      "S_over_A", "largest_fraction")
CURVE_COLUMNS = ("D", "mean_S", "se_S", "mean_S_over_A", "se_S_over_A")


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_trajectory_csv(path, rows) -> None:
    """rows: iterables matching TRAJECTORY_COLUMNS."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def trajectory_rows(replica: int, seed: int, samples):
    for s in samples:
        yield (replica, seed, s.t, s.regions, s.density, s.mean_sq_area,
               s.s_over_a, s.largest_fraction)


def write_curve_csv(path, curve) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        mean_s = curve.mean_s
        se_s = curve.se_s
        for k in range(len(curve.density)):
            writer.writerow([_fmt(float(curve.density[k])),
                             _fmt(float(mean_s[k])), _fmt(float(se_s[k])),
                             _fmt(float(curve.mean_s_over_a[k])),
                             _fmt(float(curve.se_s_over_a[k]))])


def region_color(rid: int) -> tuple[int, int, int]:
    """Stable, well-spread color for a region id."""
    h = mix64(rid + 1)
    # keep channels off the extremes so adjacent regions stay separable
    return (64 + ((h >> 8) & 0x7F) + ((h >> 1) & 0x3F),
            64 + ((h >> 24) & 0x7F) + ((h >> 2) & 0x3F),
            64 + ((h >> 40) & 0x7F) + ((h >> 3) & 0x3F))


def write_ppm(path, width: int, height: int, owners) -> None:
    """Binary PPM (P6), one pixel per lattice cell, colored by region id."""
    buf = bytearray(f"P6\n{width} {height}\n255\n".encode())
    cache: dict[int, tuple[int, int, int]] = {}
    for owner in owners:
        rgb = cache.get(owner)
        if rgb is None:
            rgb = region_color(owner)
            cache[owner] = rgb
        buf.extend(rgb)
    Path(path).write_bytes(bytes(buf))


def write_manifest(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
