import math
import statistics

import networkx as nx
import pytest

import empires as E
from empires import lattice as lat
from empires import percolation


def test_percolate_trivial_endpoints():
    _, snaps = percolation.percolate(1, 8, [0.0, 60.0])
    assert snaps[0].n_components == 64
    assert snaps[0].largest_fraction == 1 / 64
    assert snaps[1].n_components == 1
    assert snaps[1].vertex_counts == [64]
    assert snaps[1].edge_counts == [2 * 64]  # all edges eventually open


def test_percolate_at_log2_is_half_open():
    config, snaps = percolation.percolate(2, 16, [math.log(2.0)])
    assert snaps[0].p == pytest.approx(0.5)
    open_edges = sum(1 for t in config.edge_times if t <= math.log(2.0))
    assert sum(snaps[0].edge_counts) == open_edges


def test_components_match_networkx_oracle():
    # independent reconstruction of the open subgraph
    for stream in range(5):
        t = 0.7
        config, snaps = percolation.percolate(31, 10, [t], stream=stream)
        segs = lat.contacts(lat.square(10, 10))
        g = nx.MultiGraph()
        g.add_nodes_from(range(100))
        for k, (u, v) in enumerate(segs):
            if config.edge_times[k] <= t:
                g.add_edge(u, v)
        sizes = sorted((len(c) for c in nx.connected_components(g)),
                       reverse=True)
        edges = sorted((g.subgraph(c).number_of_edges()
                        for c in nx.connected_components(g)), reverse=True)
        assert sizes == snaps[0].vertex_counts
        assert sorted(snaps[0].edge_counts, reverse=True) == edges


def test_tree_components_have_one_more_vertex_than_edges():
    # early in the sweep everything is a tree or a singleton
    _, snaps = percolation.percolate(3, 12, [0.05])
    for v, e in zip(snaps[0].vertex_counts, snaps[0].edge_counts):
        assert e >= v - 1  # cycles only add edges
    # and globally the forest part dominates at small t
    assert sum(snaps[0].edge_counts) <= sum(snaps[0].vertex_counts)


def test_coupling_exact_small_lattices():
    for size in (4, 6, 8):
        for stream in range(10):
            report = percolation.couple_with_empire(97, size, stream=stream)
            assert report.ok
            assert report.merges == size * size - 1  # ends in one region
            assert report.events == 2 * size * size


def test_coupling_strict_mode_passes_clean_sweep():
    report = percolation.couple_with_empire(1, 4, strict=True)
    assert report.ok and report.first_mismatch_event is None


def test_coupling_partial_sweep():
    report = percolation.couple_with_empire(5, 8, t_max=0.3)
    assert report.ok
    assert report.events < 2 * 64


def test_boundary_lengths_equal_intercomponent_edge_counts():
    for t in (0.2, 0.6, 1.0):
        assert percolation.boundary_length_agreement(12, 6, t)
        assert percolation.boundary_length_agreement(13, 8, t)


def test_crossing_time_approaches_log2():
    # the largest-component half-occupancy time tightens around log 2
    means = {}
    for size in (16, 48):
        ts = [percolation.crossing_time(71, size, 0.5, stream=k)
              for k in range(12)]
        means[size] = statistics.mean(ts)
    assert abs(means[48] - math.log(2)) < abs(means[16] - math.log(2)) + 0.02
    assert abs(means[48] - math.log(2)) < 0.06


def test_dcrit_route_agrees_with_percolation_route():
    # the boundary-length process on the dual grid IS bond percolation, so
    # the threshold crossing of S(D)/A can be estimated from either side;
    # the two independent pipelines must agree
    import numpy as np

    import empires as E
    from empires import stats

    n = 41
    theta = 0.01
    spec = E.square(n, n)
    cfg = E.EngineConfig(seed=1234, kernel=E.KernelSpec("boundary-length"))
    runs = E.run_replicas(spec, cfg, 12, E.ObserverSpec(record_events=False))
    curve = stats.percolation_function([stats.trajectory(r) for r in runs],
                                       spec.n_cells)
    engine_crossing = stats.crossing_density(curve, theta)

    # percolation route: component vertex counts play the region areas
    cells = n * n
    t_grid = list(np.linspace(0.05, 1.6, 60))
    rows = []
    for k in range(12):
        _, snaps = percolation.percolate(1234, n, t_grid, stream=k)
        d = np.array([s.n_components / cells for s in snaps])[::-1]
        soa = np.array([sum(v * v for v in s.vertex_counts) / cells ** 2
                        for s in snaps])[::-1]
        grid = stats.default_density_grid()
        rows.append(np.interp(grid[::-1], d, soa)[::-1])
    mat = np.vstack(rows)
    perc_curve = stats.Curve(cells, 12, stats.default_density_grid(),
                             mat.mean(axis=0),
                             mat.std(axis=0, ddof=1) / np.sqrt(12))
    perc_crossing = stats.crossing_density(perc_curve, theta)
    assert abs(engine_crossing - perc_crossing) < 0.02


def test_edge_times_are_reproducible_streams():
    a = percolation.edge_times(9, 6, stream=0)
    b = percolation.edge_times(9, 6, stream=0)
    c = percolation.edge_times(9, 6, stream=1)
    assert a.edge_times == b.edge_times
    assert a.edge_times != c.edge_times
