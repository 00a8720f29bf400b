"""Survival analysis of a circuit under constant-rate merging.

A circuit of length 2n in the hexagonal lattice initially touches n+3
exterior and n-3 interior regions. While the circuit survives, the pair
(exterior count, interior count) evolves as a continuous-time Markov chain:
from (i, j), exterior neighbours merge at rate i, interior neighbours at
rate j, and an interior-exterior merge destroys the circuit at rate i+j
(so every jump is a destruction with probability exactly 1/2). Dropping
the destruction branch gives the "pure" chain, whose embedded jump chain
is drawing balls without replacement from i exterior plus j interior.

Everything combinatorial here is exact big-rational arithmetic; Monte
Carlo appears only where time dependence is intrinsic (the survival-
weighting identity and occupation-time cross-checks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .rng import SplitMix64, derive_stream


@dataclass(frozen=True)
class CircuitSpec:
    """A circuit of even length 2*half_length (at least 6) enclosing a cell."""

    half_length: int

    def __post_init__(self):
        if self.half_length < 3:
            raise ValueError("circuit length must be at least 6")

    @property
    def length(self) -> int:
        return 2 * self.half_length

    @property
    def exterior0(self) -> int:
        return self.half_length + 3

    @property
    def interior0(self) -> int:
        return self.half_length - 3


@dataclass(frozen=True)
class ChainState:
    exterior: int
    interior: int
    destroyed: bool = False


# ---------------------------------------------------------------------- #
# exact combinatorics


def hitting_probability(exterior0: int, interior0: int,
                        exterior: int, interior: int) -> Fraction:
    """Chance that the pure chain's jump chain ever visits (exterior,
    interior), starting from (exterior0, interior0).

    Drawing without replacement, the visited state after s draws is
    hypergeometric: exactly e of the s draws were exterior with probability
    C(E, e) C(I, s-e) / C(E+I, s).
    """
    if not (0 <= exterior <= exterior0 and 0 <= interior <= interior0):
        raise ValueError("state outside the reachable rectangle")
    drawn_e = exterior0 - exterior
    drawn_i = interior0 - interior
    return Fraction(comb(exterior0, drawn_e) * comb(interior0, drawn_i),
                    comb(exterior0 + interior0, drawn_e + drawn_i))


def falling_factorial(x: int, k: int) -> int:
    out = 1
    for step in range(k):
        out *= x - step
    return out


def closed_form_interior1(half_length: int, exterior: int) -> Fraction:
    """Closed form for hitting (exterior, 1) from (n+3, n-3):

        (i+1) * (n-3)/(2n) * (n+3)_i / (2n-1)_i

    with (x)_i the falling factorial. Must equal `hitting_probability`
    exactly; the equality adjudicates the falling-factorial reading and is
    itself part of the acceptance suite.
    """
    n = half_length
    i = exterior
    if n < 4:
        raise ValueError("need half_length >= 4 so the interior count starts >= 1")
    if not 1 <= i <= n + 3:
        raise ValueError("exterior count out of range")
    return (Fraction(i + 1) * Fraction(n - 3, 2 * n) *
            Fraction(falling_factorial(n + 3, i),
                     falling_factorial(2 * n - 1, i)))


def occupation_integral(half_length: int, exterior: int,
                        interior: int) -> Fraction:
    """Expected total time the pure chain spends in (exterior, interior):
    hitting probability times the mean holding time 1/(exterior+interior)."""
    if exterior + interior < 1:
        raise ValueError("state (0, 0) is absorbing: holding time is infinite")
    spec = CircuitSpec(half_length)
    q = hitting_probability(spec.exterior0, spec.interior0, exterior, interior)
    return q / (exterior + interior)


def inner_sum(half_length: int) -> Fraction:
    """Exact survival-weighted occupation sum for one circuit length:

        sum_{i=1}^{n-3} 2^i [ q(i,1)/(i+1) + q(i,0)/i ]

    where q is the hitting probability from (n+3, n-3). This is the
    per-length ingredient of the circuit-counting series; it grows
    linearly in n.
    """
    n = half_length
    spec = CircuitSpec(n)
    total = Fraction(0)
    for i in range(1, n - 2):
        q1 = hitting_probability(spec.exterior0, spec.interior0, i, 1)
        q0 = hitting_probability(spec.exterior0, spec.interior0, i, 0)
        total += (1 << i) * (q1 / (i + 1) + q0 / i)
    return total


@dataclass
class ConvergenceReport:
    """Inner sums plus delta-weighted outer partial sums.

    `delta` is the self-avoiding-walk discount exponent, a user parameter:
    the outer series weights circuit length 2n by 2**(-delta*n). The inner
    sums being O(n) makes every delta > 0 summable, with geometric tails.
    """

    deltas: tuple[float, ...]
    half_lengths: list[int]
    inner_sums: dict[int, Fraction]
    linear_ratio: dict[int, float]              # inner_sum(n) / n
    partial_sums: dict[float, list[float]]      # per delta, cumulative
    tail_ratio: dict[float, float]              # last term ratio per delta


def convergence_sum(deltas, n_max: int, n_min: int = 4) -> ConvergenceReport:
    """Exact inner sums for n_min..n_max and outer partial sums per delta."""
    if n_max < n_min:
        raise ValueError("n_max below n_min")
    half_lengths = list(range(n_min, n_max + 1))
    inner = {n: inner_sum(n) for n in half_lengths}
    ratio = {n: float(inner[n]) / n for n in half_lengths}
    partial: dict[float, list[float]] = {}
    tails: dict[float, float] = {}
    for delta in deltas:
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        terms = [2.0 ** (-delta * n) * float(inner[n]) for n in half_lengths]
        sums = []
        acc = 0.0
        for term in terms:
            acc += term
            sums.append(acc)
        partial[delta] = sums
        tails[delta] = terms[-1] / terms[-2] if len(terms) > 1 else math.nan
    return ConvergenceReport(tuple(deltas), half_lengths, inner, ratio,
                             partial, tails)


def fitted_bound_constant(n_max: int, n_min: int = 4) -> Fraction:
    """Smallest C with q(i,1) <= C (i+1) 2^-i over all n <= n_max, 1 <= i <= n+3."""
    best = Fraction(0)
    for n in range(n_min, n_max + 1):
        spec = CircuitSpec(n)
        for i in range(1, n + 4):
            q = hitting_probability(spec.exterior0, spec.interior0, i, 1)
            ratio = q * (1 << i) / (i + 1)
            if ratio > best:
                best = ratio
    return best


# ---------------------------------------------------------------------- #
# chain simulation


def _merge_rates(i: int, j: int, corrected: bool) -> tuple[float, float]:
    if not corrected:
        return float(i), float(j)
    # neighbour counts of 2 along a circuit form a single mergeable pair,
    # and a single neighbour has nothing to merge with
    def adj(c):
        if c <= 1:
            return 0.0
        if c == 2:
            return 1.0
        return float(c)
    return adj(i), adj(j)


@dataclass
class ChainTrajectory:
    times: list[float]
    states: list[tuple[int, int]]
    destroyed: bool
    destroyed_time: float

    def state_at(self, t: float) -> ChainState:
        if self.destroyed and t >= self.destroyed_time:
            return ChainState(0, 0, destroyed=True)
        i, j = self.states[0]
        for k, tk in enumerate(self.times):
            if tk > t:
                break
            i, j = self.states[k]
        return ChainState(i, j)


def simulate_chain(spec: CircuitSpec, seed: int, with_destruction: bool = True,
                   corrected_rates: bool = False, stream: int = 0) -> ChainTrajectory:
    """One exact trajectory; jump times and states, in order.

    "Fictitious" transitions from a count of 1 to 0 are allowed (the
    idealised rates); corrected_rates switches the merge rates to the
    0/1/c variant for counts 1 and 2, without any claim that the two
    variants agree beyond the summability conclusion.
    """
    rng = SplitMix64(derive_stream(seed, stream))
    i, j = spec.exterior0, spec.interior0
    t = 0.0
    times = [0.0]
    states = [(i, j)]
    destroyed = False
    destroyed_time = math.inf
    while i + j > 0:
        rate_e, rate_i = _merge_rates(i, j, corrected_rates)
        rate_d = float(i + j) if with_destruction else 0.0
        total = rate_e + rate_i + rate_d
        if total <= 0.0:
            break
        t += -math.log1p(-rng.next_double()) / total
        u = rng.next_double() * total
        if u < rate_d:
            destroyed = True
            destroyed_time = t
            break
        if u < rate_d + rate_e:
            i -= 1
        else:
            j -= 1
        times.append(t)
        states.append((i, j))
    return ChainTrajectory(times, states, destroyed, destroyed_time)


def state_counts(spec: CircuitSpec, times, n_paths: int, seed: int,
                 with_destruction: bool = True,
                 corrected_rates: bool = False,
                 keep_exit_clock: bool = False,
                 stream: int = 0) -> list[dict[tuple[int, int], int]]:
    """Vectorised Monte Carlo: per requested time, the count of paths in
    each surviving state (destroyed paths are excluded).

    keep_exit_clock applies to the pure chain only: the state's exit clock
    stays at the full rate 2(i+j) of the destructible chain and only the
    destruction outcome is dropped (merges split i : j as always). That is
    the time parametrisation under which the survival weighting holds at
    fixed times; without it the pure chain runs at rate i+j, the
    parametrisation the occupation-time integrals use.
    """
    rng = np.random.default_rng(np.random.PCG64(derive_stream(seed, stream)))
    e0, i0 = spec.exterior0, spec.interior0
    ext = np.full(n_paths, e0, dtype=np.int64)
    itr = np.full(n_paths, i0, dtype=np.int64)
    dead = np.zeros(n_paths, dtype=bool)
    pure_speed = 2.0 if (keep_exit_clock and not with_destruction) else 1.0

    def totals():
        if corrected_rates:
            re = np.where(ext <= 1, 0.0, np.where(ext == 2, 1.0,
                                                  ext.astype(float)))
            ri = np.where(itr <= 1, 0.0, np.where(itr == 2, 1.0,
                                                  itr.astype(float)))
        else:
            re = ext.astype(float)
            ri = itr.astype(float)
        if with_destruction:
            rd = (ext + itr).astype(float)
        else:
            rd = np.zeros(n_paths)
            if pure_speed != 1.0:
                re = re * pure_speed
                ri = ri * pure_speed
        return re, ri, rd

    re, ri, rd = totals()
    tot = re + ri + rd
    t_next = np.where(tot > 0.0, rng.exponential(1.0, n_paths) /
                      np.where(tot > 0.0, tot, 1.0), np.inf)

    out = []
    for t in sorted(times):
        while True:
            active = (~dead) & (t_next <= t)
            k = int(active.sum())
            if k == 0:
                break
            u = rng.random(k) * tot[active]
            re_a, ri_a, rd_a = re[active], ri[active], rd[active]
            destroy = u < rd_a
            ext_merge = (~destroy) & (u < rd_a + re_a)
            idx = np.nonzero(active)[0]
            dead[idx[destroy]] = True
            ext[idx[ext_merge]] -= 1
            itr[idx[(~destroy) & (~ext_merge)]] -= 1
            re, ri, rd = totals()
            tot = re + ri + rd
            # redraw the next jump only for paths that just jumped
            stepped = idx[~destroy]
            hold = rng.exponential(1.0, len(stepped))
            alive_rate = tot[stepped]
            t_next[stepped] = np.where(
                alive_rate > 0.0,
                t_next[stepped] + hold / np.where(alive_rate > 0.0,
                                                  alive_rate, 1.0),
                np.inf)
            t_next[idx[destroy]] = np.inf
        counts: dict[tuple[int, int], int] = {}
        alive = ~dead
        if alive.any():
            code = ext[alive] * (i0 + 1) + itr[alive]
            binned = np.bincount(code, minlength=(e0 + 1) * (i0 + 1))
            for flat in np.nonzero(binned)[0]:
                counts[(int(flat) // (i0 + 1), int(flat) % (i0 + 1))] = \
                    int(binned[flat])
        out.append(counts)
    return out


@dataclass(frozen=True)
class IdentityRow:
    half_length: int
    t: float
    exterior: int
    interior: int
    p_with_destruction: float
    p_weighted_pure: float
    sigma: float
    z: float
    compared: bool


def survival_identity_check(half_length: int, times, n_paths: int, seed: int,
                            min_hits: int = 100) -> list[IdentityRow]:
    """Monte Carlo check of the survival weighting

        P(state (i,j) at t)  ==  2^(i+j-2n) P*(state (i,j) at t)

    between the chain with destruction and the pure chain. Both chains
    share the embedded jump chain; for the weighting to hold at fixed
    times (not just jump counts) the pure chain must keep the full exit
    clock of the destructible one (see state_counts), which is the
    convention used here. States where either side has fewer than
    `min_hits` hits are reported but not compared (their z is meaningless
    at this budget).
    """
    spec = CircuitSpec(half_length)
    times = sorted(times)
    with_d = state_counts(spec, times, n_paths, seed, with_destruction=True,
                          stream=1)
    pure = state_counts(spec, times, n_paths, seed, with_destruction=False,
                        keep_exit_clock=True, stream=2)
    n2 = 2 * half_length
    rows = []
    for t, counts_d, counts_p in zip(times, with_d, pure):
        for state in sorted(set(counts_d) | set(counts_p)):
            i, j = state
            cd = counts_d.get(state, 0)
            cp = counts_p.get(state, 0)
            p_d = cd / n_paths
            p_p = cp / n_paths
            weight = 2.0 ** (i + j - n2)
            var = (p_d * (1 - p_d) + weight * weight * p_p * (1 - p_p)) \
                / n_paths
            sigma = math.sqrt(var)
            diff = p_d - weight * p_p
            compared = cd >= min_hits and cp >= min_hits
            z = diff / sigma if sigma > 0 else 0.0
            rows.append(IdentityRow(half_length, t, i, j, p_d,
                                    weight * p_p, sigma, z, compared))
    return rows


def occupation_time_mc(half_length: int, exterior: int, interior: int,
                       n_paths: int, seed: int, stream: int = 0) -> float:
    """Monte Carlo mean total time the pure chain spends in one state."""
    spec = CircuitSpec(half_length)
    rng = np.random.default_rng(np.random.PCG64(derive_stream(seed, stream)))
    ext = np.full(n_paths, spec.exterior0, dtype=np.int64)
    itr = np.full(n_paths, spec.interior0, dtype=np.int64)
    acc = np.zeros(n_paths)
    while True:
        active = (ext + itr) > 0
        if not active.any():
            break
        rate = (ext + itr).astype(float)
        hold = np.zeros(n_paths)
        hold[active] = rng.exponential(1.0, int(active.sum())) / rate[active]
        acc += hold * ((ext == exterior) & (itr == interior))
        u = rng.random(n_paths)
        go_ext = active & (u * rate < ext)
        go_int = active & ~go_ext
        ext[go_ext] -= 1
        itr[go_int] -= 1
    return float(acc.mean())
