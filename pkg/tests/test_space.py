import json

import numpy as np
import pytest

from pharmonious import (ConfigurationError, DisconnectedSpaceError, Space,
                         SpaceFormatError, disk_grid, interval_grid,
                         path_graph, space_from_dict, square_grid)


def brute_force_shortest_paths(n, edges):
    """Floyd-Warshall oracle for small graphs."""
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for i, j, w in edges:
        d[i, j] = min(d[i, j], w)
        d[j, i] = min(d[j, i], w)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


# -- distances ------------------------------------------------------------------


def test_distance_same_point_is_zero(grid1d):
    assert grid1d.distance(13, 13) == 0.0


def test_distance_1d_closed_form():
    sp = interval_grid(5)  # h = 0.25, points 0, 0.25, ..., 1
    assert sp.distance(0, 3) == 0.75


def test_path_graph_distance_matches_dijkstra_oracle():
    edges = [[0, 1, 1.0], [1, 2, 1.0]]
    sp = path_graph(3)
    oracle = brute_force_shortest_paths(3, edges)
    for i in range(3):
        for j in range(3):
            assert sp.distance(i, j) == oracle[i, j]
    assert sp.distance(0, 2) == 2.0


def test_disconnected_graph_raises():
    sp = Space(weights=[1.0, 1.0, 1.0], boundary=[0], metric="graph",
               edges=[[0, 1, 1.0]])
    with pytest.raises(DisconnectedSpaceError):
        sp.distance(0, 2)


def test_metric_axioms_on_random_triples(grid2d_small, rng):
    n = len(grid2d_small)
    idx = rng.integers(0, n, size=(10_000, 3))
    for i, j, k in idx[:200]:  # exact per-triple checks on a subsample
        dij = grid2d_small.distance(int(i), int(j))
        assert dij == grid2d_small.distance(int(j), int(i))
        assert dij <= grid2d_small.distance(int(i), int(k)) \
            + grid2d_small.distance(int(k), int(j)) + 1e-12
    # vectorized scan of the full sample
    i, j, k = idx.T
    ci, cj, ck = (grid2d_small.coords[v] for v in (i, j, k))
    dij = np.sqrt(((ci - cj) ** 2).sum(1))
    dik = np.sqrt(((ci - ck) ** 2).sum(1))
    dkj = np.sqrt(((ck - cj) ** 2).sum(1))
    assert np.all(dij <= dik + dkj + 1e-12)


# -- balls ----------------------------------------------------------------------


def test_ball_radius_zero_is_singleton(grid1d):
    b = grid1d.ball(100, 0.0)
    assert list(b.members) == [100]


def test_ball_negative_radius_rejected(grid1d):
    with pytest.raises(SpaceFormatError):
        grid1d.ball(0, -0.1)


def test_ball_21_members_oracle():
    sp = interval_grid(101)  # h = 0.01 on [0,1]
    x = 50  # the point 0.5
    b = sp.ball(x, 0.1)
    # oracle: enumerate every point and count d <= r
    d = np.abs(sp.coords[:, 0] - sp.coords[x, 0])
    expected = np.flatnonzero(d <= 0.1)
    assert np.array_equal(b.members, expected)
    assert len(b) == 21


def test_ball_beyond_diameter_is_whole_space(grid1d):
    assert len(grid1d.ball(17, grid1d.diameter() + 1.0)) == len(grid1d)


def test_ball_membership_monotone_in_radius(grid1d, rng):
    for _ in range(20):
        x = int(rng.integers(len(grid1d)))
        r1, r2 = sorted(rng.uniform(0, 1, size=2))
        m1 = set(grid1d.ball(x, r1).members)
        m2 = set(grid1d.ball(x, r2).members)
        assert m1 <= m2


# -- measures -------------------------------------------------------------------


def test_measure_empty_set_is_zero(grid1d):
    assert grid1d.measure([]) == 0.0


def test_measure_ball_oracle():
    sp = interval_grid(101)
    b = sp.ball(50, 0.1)
    oracle = float(sp.weights[b.members].sum())
    assert sp.measure(b.members) == oracle
    assert abs(oracle - 0.21) < 1e-12  # 21 atoms of h = 0.01


def test_measure_additive_and_monotone(grid1d, rng):
    n = len(grid1d)
    for _ in range(50):
        a = np.flatnonzero(rng.uniform(size=n) < 0.3)
        b = np.flatnonzero(rng.uniform(size=n) < 0.3)
        union = np.union1d(a, b)
        inter = np.intersect1d(a, b)
        lhs = grid1d.measure(union) + grid1d.measure(inter)
        rhs = grid1d.measure(a) + grid1d.measure(b)
        assert abs(lhs - rhs) < 1e-12
        assert grid1d.measure(inter) <= grid1d.measure(a) + 1e-15


def test_measure_symdiff_triangle(grid1d, rng):
    def symdiff(a, b):
        return np.setxor1d(a, b)

    n = len(grid1d)
    for _ in range(50):
        a, b, c = (np.flatnonzero(rng.uniform(size=n) < 0.3) for _ in range(3))
        ab = grid1d.measure(symdiff(a, b))
        ac = grid1d.measure(symdiff(a, c))
        cb = grid1d.measure(symdiff(c, b))
        assert ab <= ac + cb + 1e-12
        assert abs(grid1d.measure(a) - grid1d.measure(b)) <= ab + 1e-12


# -- boundary geometry ------------------------------------------------------------


def test_boundary_point_distance_zero(grid1d):
    for b in grid1d.boundary_indices:
        assert grid1d.dist_to_boundary(int(b)) == 0.0


def test_dist_to_boundary_1d_closed_form():
    sp = interval_grid(11)  # h = 0.1
    x = 3  # the point 0.3
    assert abs(sp.dist_to_boundary(x) - 0.3) < 1e-15


def test_ell_is_half_width(grid1d):
    # oracle: max over the grid of the boundary distance
    oracle = max(grid1d.dist_to_boundary(int(i)) for i in range(0, len(grid1d), 16))
    assert grid1d.ell() == 0.5
    assert grid1d.ell() >= oracle


def test_empty_boundary_is_configuration_error():
    sp = Space(weights=[1.0, 1.0], boundary=[],
               coords=[[0.0], [1.0]], metric="euclidean")
    with pytest.raises(ConfigurationError):
        sp.dist_to_boundary(0)


def test_diameter_2d_is_sqrt2(grid2d_small):
    assert abs(grid2d_small.diameter() - np.sqrt(2.0)) < 1e-15


# -- probes ---------------------------------------------------------------------


def test_annular_decay_1d_close_to_analytic(grid1d):
    est = grid1d.probe_annular_decay(1.0, seed=0)
    h, r_min = grid1d.resolution(), 16 * grid1d.resolution()
    assert 1.0 <= est <= 1.0 * (1 + 10 * h / r_min)


def test_annular_decay_2d_close_to_analytic(grid2d_65):
    est = grid2d_65.probe_annular_decay(1.0, seed=0)
    h, r_min = grid2d_65.resolution(), 16 * grid2d_65.resolution()
    assert 1.9 <= est <= 2.0 * (1 + 10 * h / r_min)


def test_annular_decay_skips_degenerate_annuli():
    sp = interval_grid(5)
    # every shell is below r_min: no valid samples, clamped estimate
    assert sp.probe_annular_decay(1.0, seed=0) == 1.0


def test_annular_decay_rejects_bad_delta(grid1d):
    with pytest.raises(SpaceFormatError):
        grid1d.probe_annular_decay(1.5)


def test_doubling_1d(grid1d):
    est = grid1d.probe_doubling(seed=0)
    assert 1.8 <= est <= 2.05


def test_doubling_2d(grid2d_65):
    est = grid2d_65.probe_doubling(seed=0)
    assert 3.5 <= est <= 4.4


def test_doubling_single_point_space():
    sp = Space(weights=[2.0], boundary=[], coords=[[0.0]], metric="euclidean")
    assert sp.probe_doubling() == 1.0


def test_ring_continuity_no_new_members(grid1d):
    h = grid1d.resolution()
    # radii strictly inside the first shell: no jumps after the start
    assert grid1d.probe_ring_continuity(128, [h / 4, h / 3, h / 2]) == 0.0


def test_ring_continuity_sweep_oracle():
    sp = interval_grid(101)
    h = sp.resolution()
    radii = np.arange(1, 41) * h + h / 2  # between-shell radii
    jump = sp.probe_ring_continuity(50, radii)
    # oracle: single-step jump is two atoms over the running ball measure
    mus = [sp.measure(sp.ball(50, r).members) for r in radii]
    oracle = max((b - a) / b for a, b in zip(mus[:-1], mus[1:]))
    assert jump == oracle


def test_ring_continuity_halves_with_h():
    radii = np.linspace(0.25, 0.5, 65)
    coarse = interval_grid(129).probe_ring_continuity(64, radii)
    fine = interval_grid(257).probe_ring_continuity(128, radii)
    assert 0.4 <= fine / coarse <= 0.6


def test_ring_continuity_rejects_unsorted(grid1d):
    with pytest.raises(SpaceFormatError):
        grid1d.probe_ring_continuity(10, [0.3, 0.2])


def test_geodesic_defect_graph_is_zero():
    assert path_graph(9).probe_geodesic_defect() == 0.0


def test_geodesic_defect_grid_small(grid2d_small):
    defect = grid2d_small.probe_geodesic_defect(samples=16, seed=0)
    # 8-neighbor lattice paths stretch straight lines by at most ~8.3%
    assert 0.0 <= defect <= 0.09 * grid2d_small.diameter()


def test_probe_report_fields(grid1d):
    rep = grid1d.probe_report(samples=50, seed=0)
    doc = rep.to_dict()
    assert doc["doubling_estimate"] >= 1.0
    assert all(v >= 1.0 for v in doc["annular_decay_estimates"].values())
    assert 0.0 <= doc["ring_jump"] < 1.0
    assert doc["geodesic_defect"] >= 0.0


# -- the disk grid -----------------------------------------------------------------


def test_disk_grid_structure():
    sp = disk_grid(33)
    c = np.array([0.5, 0.5])
    r = np.sqrt(((sp.coords - c) ** 2).sum(1))
    assert np.all(r <= 0.5 + 1e-12)
    assert len(sp.boundary_indices) > 0
    assert len(sp.interior_indices) > 0
    # boundary points hug the circle
    assert r[sp.boundary_indices].min() > 0.5 - 2.5 * sp.resolution()


# -- loader validation --------------------------------------------------------------


def _point(i, w=1.0, boundary=False, coords=None):
    p = {"id": i, "weight": w, "boundary": boundary}
    if coords is not None:
        p["coords"] = coords
    return p


def test_loader_round_trip_euclidean(tmp_path):
    doc = {
        "metric": "euclidean",
        "points": [_point(10, 0.5, True, [0.0]), _point(11, 0.5, False, [0.5]),
                   _point(12, 0.5, True, [1.0])],
    }
    path = tmp_path / "space.json"
    path.write_text(json.dumps(doc))
    from pharmonious import load_space
    sp = load_space(path)
    assert len(sp) == 3
    assert list(sp.ids) == [10, 11, 12]
    assert sp.distance(0, 2) == 1.0


def test_loader_rejects_empty_points():
    with pytest.raises(SpaceFormatError, match="no points"):
        space_from_dict({"metric": "euclidean", "points": []})


def test_loader_rejects_nonpositive_weight():
    with pytest.raises(SpaceFormatError, match="weight"):
        space_from_dict({"metric": "euclidean",
                         "points": [_point(0, 0.0, coords=[0.0])]})


def test_loader_rejects_negative_edge():
    doc = {"metric": "graph",
           "points": [_point(0), _point(1)],
           "edges": [[0, 1, -2.0]]}
    with pytest.raises(SpaceFormatError, match="edge"):
        space_from_dict(doc)


def test_loader_rejects_asymmetric_matrix():
    doc = {"metric": "matrix",
           "points": [_point(0), _point(1)],
           "matrix": [[0.0, 1.0], [2.0, 0.0]]}
    with pytest.raises(SpaceFormatError, match="symmetric|asymmetric"):
        space_from_dict(doc)


def test_loader_rejects_triangle_violation():
    m = [[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]
    doc = {"metric": "matrix",
           "points": [_point(i) for i in range(3)],
           "matrix": m}
    with pytest.raises(SpaceFormatError, match="triangle"):
        space_from_dict(doc)


def test_loader_rejects_duplicate_points_in_matrix():
    m = [[0.0, 0.0], [0.0, 0.0]]
    doc = {"metric": "matrix", "points": [_point(0), _point(1)], "matrix": m}
    with pytest.raises(SpaceFormatError, match="duplicate"):
        space_from_dict(doc)


def test_matrix_space_distances_work():
    m = [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]
    sp = space_from_dict({"metric": "matrix",
                          "points": [_point(0, boundary=True), _point(1),
                                     _point(2, boundary=True)],
                          "matrix": m})
    assert sp.distance(0, 2) == 2.0
    assert sp.dist_to_boundary(1) == 1.0
