import pytest

from qroute.errors import ConfigurationError
from qroute.landmarks import bfs_distances
from qroute.queries import QueryKind
from qroute.synth import grid_graph, random_graph
from qroute.workload import (
    WorkloadSpec,
    generate_workload,
    load_workload,
    parse_workload_spec,
    save_workload,
)


def test_queries_stay_within_radius_of_center():
    g = grid_graph(30, 30)
    spec = WorkloadSpec(num_hotspots=5, queries_per_hotspot=10, hotspot_radius=2, hops=2, seed=3)
    wl = generate_workload(g, spec)
    assert len(wl.queries) == 50
    for hotspot, center in enumerate(wl.centers):
        dist = bfs_distances(g, center)
        group = wl.queries[hotspot * 10 : (hotspot + 1) * 10]
        for q in group:
            assert dist[q.source] <= 2
        # pairwise distance within a hotspot is at most 2r
        for a in group:
            da = bfs_distances(g, a.source)
            for b in group:
                assert da[b.source] <= 4


def test_deterministic_given_seed():
    g = grid_graph(20, 20)
    spec = WorkloadSpec(num_hotspots=8, queries_per_hotspot=5, seed=11)
    a = generate_workload(g, spec)
    b = generate_workload(g, spec)
    assert a.centers == b.centers
    assert a.queries == b.queries
    c = generate_workload(g, WorkloadSpec(num_hotspots=8, queries_per_hotspot=5, seed=12))
    assert c.queries != a.queries


def test_kind_rotation_split():
    g = grid_graph(40, 40)
    spec = WorkloadSpec(num_hotspots=30, queries_per_hotspot=10, seed=1)
    wl = generate_workload(g, spec)
    counts = {kind: 0 for kind in QueryKind}
    for q in wl.queries:
        counts[q.kind] += 1
    assert counts[QueryKind.AGGREGATION] == 100
    assert counts[QueryKind.RANDOM_WALK] == 100
    assert counts[QueryKind.REACHABILITY] == 100


def test_groups_emitted_consecutively():
    g = grid_graph(25, 25)
    spec = WorkloadSpec(num_hotspots=6, queries_per_hotspot=7, seed=2)
    wl = generate_workload(g, spec)
    for i, q in enumerate(wl.queries):
        assert q.query_id == i
    # each block of 7 stays within its hotspot's ball
    for hotspot, center in enumerate(wl.centers):
        dist = bfs_distances(g, center)
        for q in wl.queries[hotspot * 7 : (hotspot + 1) * 7]:
            assert dist[q.source] <= spec.hotspot_radius


def test_reachability_target_from_same_ball():
    g = grid_graph(25, 25)
    spec = WorkloadSpec(num_hotspots=10, queries_per_hotspot=9, seed=5)
    wl = generate_workload(g, spec)
    for hotspot, center in enumerate(wl.centers):
        dist = bfs_distances(g, center)
        for q in wl.queries[hotspot * 9 : (hotspot + 1) * 9]:
            if q.kind is QueryKind.REACHABILITY:
                assert q.target is not None
                assert dist[q.target] <= spec.hotspot_radius


def test_small_ball_centers_resampled():
    # low-degree centers have 1-balls smaller than the per-hotspot count;
    # the generator must skip them (counting skips) and keep only viable ones
    g = random_graph(300, 1200, seed=8)
    spec = WorkloadSpec(num_hotspots=12, queries_per_hotspot=8, hotspot_radius=1, seed=4)
    wl = generate_workload(g, spec)
    assert len(wl.centers) == 12
    assert wl.center_resamples > 0
    from qroute.landmarks import bfs_distances_truncated

    for center in wl.centers:
        assert len(bfs_distances_truncated(g, center, 1)) >= 8


def test_graph_too_small_rejected():
    g = grid_graph(3, 3)
    with pytest.raises(ConfigurationError):
        generate_workload(g, WorkloadSpec(num_hotspots=100, queries_per_hotspot=2))


def test_spec_string_parsing():
    spec = parse_workload_spec("hotspot:100x10:r2:h3")
    assert spec.num_hotspots == 100
    assert spec.queries_per_hotspot == 10
    assert spec.hotspot_radius == 2
    assert spec.hops == 3
    with pytest.raises(ConfigurationError):
        parse_workload_spec("zipf:10")
    with pytest.raises(ConfigurationError):
        parse_workload_spec("hotspot:abc")


def test_save_load_round_trip(tmp_path):
    g = grid_graph(20, 20)
    wl = generate_workload(g, WorkloadSpec(num_hotspots=4, queries_per_hotspot=6, seed=9))
    path = tmp_path / "workload.json"
    save_workload(wl, path)
    loaded = load_workload(path)
    assert loaded.spec == wl.spec
    assert loaded.centers == wl.centers
    assert loaded.queries == wl.queries
