import math
from fractions import Fraction

import pytest

from empires import contour


def test_circuit_spec_initial_counts():
    spec = contour.CircuitSpec(6)
    assert spec.length == 12
    assert (spec.exterior0, spec.interior0) == (9, 3)
    with pytest.raises(ValueError):
        contour.CircuitSpec(2)


def test_hitting_probability_examples():
    assert contour.hitting_probability(9, 3, 9, 1) == Fraction(1, 22)
    assert contour.hitting_probability(9, 3, 9, 0) == Fraction(1, 220)
    assert contour.hitting_probability(9, 3, 9, 3) == 1
    assert contour.hitting_probability(7, 1, 1, 1) == Fraction(1, 4)
    assert contour.hitting_probability(7, 1, 1, 0) == Fraction(7, 8)
    with pytest.raises(ValueError):
        contour.hitting_probability(9, 3, 10, 1)


def test_hitting_probability_levels_sum_to_one():
    # after s draws the chain is somewhere: probabilities on each
    # anti-diagonal sum to 1
    for e0, i0 in ((9, 3), (7, 5), (6, 6)):
        for s in range(e0 + i0 + 1):
            total = sum(
                contour.hitting_probability(e0, i0, e0 - de, i0 - (s - de))
                for de in range(s + 1)
                if de <= e0 and 0 <= s - de <= i0)
            assert total == 1


def test_jump_chain_matches_recursive_oracle():
    # independent recursion: p(i, j) = p(i+1, j) (i+1)/(i+1+j)
    #                              + p(i, j+1) (j+1)/(i+j+1)
    e0, i0 = 8, 4
    p = {(e0, i0): Fraction(1)}
    for s in range(1, e0 + i0 + 1):
        for de in range(s + 1):
            i, j = e0 - de, i0 - (s - de)
            if i < 0 or j < 0:
                continue
            acc = Fraction(0)
            if i + 1 <= e0 and (i + 1, j) in p:
                acc += p[(i + 1, j)] * Fraction(i + 1, i + 1 + j)
            if j + 1 <= i0 and (i, j + 1) in p:
                acc += p[(i, j + 1)] * Fraction(j + 1, i + j + 1)
            p[(i, j)] = acc
    for (i, j), expect in p.items():
        assert contour.hitting_probability(e0, i0, i, j) == expect


def test_closed_form_equals_hypergeometric():
    for n in range(4, 21):
        for i in range(1, n + 4):
            assert contour.closed_form_interior1(n, i) == \
                contour.hitting_probability(n + 3, n - 3, i, 1)


def test_closed_form_example_value():
    assert contour.closed_form_interior1(6, 9) == Fraction(1, 22)


def test_bound_constant_is_modest():
    c = contour.fitted_bound_constant(30)
    assert c == Fraction(16)  # attained at the shortest circuit, n = 4, i = 7
    for n in (10, 20, 30):
        for i in range(1, n + 4):
            q = contour.hitting_probability(n + 3, n - 3, i, 1)
            assert q <= c * (i + 1) * Fraction(1, 2 ** i)


def test_occupation_integral_values():
    # the initial state is always hit and holds for mean time 1/(2n)
    spec = contour.CircuitSpec(6)
    assert contour.occupation_integral(6, spec.exterior0, spec.interior0) \
        == Fraction(1, 12)
    assert contour.occupation_integral(6, 9, 1) == Fraction(1, 220)
    with pytest.raises(ValueError):
        contour.occupation_integral(6, 0, 0)


def test_occupation_integral_against_monte_carlo():
    exact = float(contour.occupation_integral(6, 9, 1))
    est = contour.occupation_time_mc(6, 9, 1, n_paths=400_000, seed=5)
    # crude binomial-style error bound: holding time 1/10 per visit
    sigma = math.sqrt(float(contour.hitting_probability(9, 3, 9, 1))
                      * (0.1 ** 2) * 2 / 400_000)
    assert abs(est - exact) < 3 * sigma


def test_simulate_chain_shapes():
    spec = contour.CircuitSpec(6)
    traj = contour.simulate_chain(spec, seed=1)
    assert traj.states[0] == (9, 3)
    assert traj.times[0] == 0.0
    pure = contour.simulate_chain(spec, seed=1, with_destruction=False)
    assert not pure.destroyed
    assert pure.states[-1] == (0, 0)  # drains the whole box
    assert len(pure.states) == 1 + 9 + 3


def test_first_jump_is_destruction_half_the_time():
    spec = contour.CircuitSpec(4)
    destroyed_first = 0
    n = 4000
    for seed in range(n):
        traj = contour.simulate_chain(spec, seed=seed)
        if traj.destroyed and len(traj.states) == 1:
            destroyed_first += 1
    p = destroyed_first / n
    sigma = math.sqrt(0.25 / n)
    assert abs(p - 0.5) < 4 * sigma


def test_survivors_thin_by_half_per_jump():
    # surviving k jumps has probability 2^-k
    spec = contour.CircuitSpec(5)
    n = 4000
    survived_2 = sum(
        1 for seed in range(n)
        if len(contour.simulate_chain(spec, seed=seed).states) >= 3)
    p = survived_2 / n
    sigma = math.sqrt(0.25 * 0.75 / n)
    assert abs(p - 0.25) < 4 * sigma


def test_corrected_rates_variant():
    assert contour._merge_rates(1, 0, corrected=True) == (0.0, 0.0)
    assert contour._merge_rates(2, 2, corrected=True) == (1.0, 1.0)
    assert contour._merge_rates(5, 3, corrected=True) == (5.0, 3.0)
    assert contour._merge_rates(1, 0, corrected=False) == (1.0, 0.0)


def test_state_counts_at_time_zero():
    spec = contour.CircuitSpec(4)
    counts = contour.state_counts(spec, [0.0], 1000, seed=3)[0]
    assert counts == {(7, 1): 1000}


def test_survival_identity_smoke():
    rows = contour.survival_identity_check(4, [0.1], n_paths=30_000, seed=9)
    compared = [r for r in rows if r.compared]
    assert compared, "expected at least one comparable state"
    assert all(abs(r.z) <= 3.0 for r in compared)


def test_convergence_report():
    rep = contour.convergence_sum([0.1, 0.2], 24)
    assert rep.inner_sums[4] == 2  # exact smallest-circuit value
    # bounded by a linear envelope and stabilising
    assert all(float(rep.inner_sums[n]) <= 1.5 * n for n in rep.half_lengths)
    for delta in (0.1, 0.2):
        tail = rep.tail_ratio[delta]
        assert tail < 1.0
        assert abs(tail - 2 ** -delta) < 0.05
        sums = rep.partial_sums[delta]
        assert all(b >= a for a, b in zip(sums, sums[1:]))
    with pytest.raises(ValueError):
        contour.convergence_sum([1.5], 20)
