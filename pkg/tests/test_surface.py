import random

import pytest
from hypothesis import given, settings, strategies as st

from qdifflab.surface import (
    ArcSystem, MarkedSurfaceData, SurfaceError, a_n_fan, annulus_system, boundary_walk_indices,
    disk_chord_system, hat_rank, infer_genus, load_arc_system, dump_arc_system, numerical_data,
    qr_system, validate_arc_system,
)
import json


def test_disk_fan_is_valid():
    sysm = ArcSystem.from_lists([(["B", 0, 1], [0]), (["B", 1], []), (["B", 0], [])])
    assert validate_arc_system(sysm, genus=0) == []


def test_two_boundary_segments_flagged():
    sysm = ArcSystem.from_lists([(["B", 0, "B", 1], [0]), (["B", 1], []), (["B", 0], [])])
    report = validate_arc_system(sysm, genus=0)
    assert any("not full formal" in r for r in report)


def test_violations_are_collected_not_aborted():
    sysm = ArcSystem.from_lists([(["B", "B", 0, 1], [0]), (["B", 1, 1], []), ([0], [])])
    report = validate_arc_system(sysm, genus=0)
    assert len(report) >= 3


def test_qr_system_valid_and_disk():
    sysm = qr_system((1, -2, 3), 2, -1)
    assert validate_arc_system(sysm, genus=0) == []
    data = numerical_data(sysm, 0)
    assert data.boundary_orders == (7,)
    assert data.boundary_indices == (4,)
    assert len(sysm.polygons) == 7 and sysm.n_arcs == 6


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_disk_numerical_data(n):
    data = numerical_data(a_n_fan(n, list(range(n - 1))), 0)
    assert (data.genus, data.b, data.boundary_orders, data.boundary_indices) == (0, 1, (n + 1,), (4,))
    assert hat_rank(data) == n


@pytest.mark.parametrize("p,q", [(1, 1), (2, 1), (1, 3), (3, 2)])
def test_annulus_numerical_data(p, q):
    data = numerical_data(annulus_system(p, q), 0)
    assert data.b == 2
    assert sorted(data.boundary_orders) == sorted((p, q))
    assert data.boundary_indices == (2, 2)
    assert hat_rank(data) == p + q


def test_torus_with_one_hole():
    sysm = ArcSystem.from_lists([(["B", 0, 1, 0, 1], [2, -1, 5])])
    assert infer_genus(sysm) == 1
    data = numerical_data(sysm, 1)
    assert data.boundary_indices == (0,)
    assert validate_arc_system(sysm, genus=0) != []


def test_hat_rank_examples():
    assert hat_rank(MarkedSurfaceData(0, (5,), (4,))) == 4
    assert hat_rank(MarkedSurfaceData(0, (2, 3), (2, 2))) == 5
    assert hat_rank(MarkedSurfaceData(1, (3,), (0,))) == 4


def test_surface_data_invariants():
    with pytest.raises(SurfaceError):
        MarkedSurfaceData(0, (2,), (4,))
    with pytest.raises(SurfaceError):
        MarkedSurfaceData(0, (3,), (3,))
    with pytest.raises(SurfaceError):
        MarkedSurfaceData(0, (0, 3), (2, 2))
    with pytest.raises(SurfaceError):
        MarkedSurfaceData(0, (3,), (2, 2))


def test_json_roundtrip():
    sysm = qr_system((1, 0, 2))
    back, g = load_arc_system(json.loads(dump_arc_system(sysm)))
    assert g == 0 and back == sysm


def random_gluing(rng, n_arcs, n_polys):
    """Random polygons glued along arcs; every arc appears exactly twice."""
    slots = list(range(n_arcs)) * 2
    rng.shuffle(slots)
    cuts = sorted(rng.sample(range(1, len(slots)), n_polys - 1)) if n_polys > 1 else []
    pieces, prev = [], 0
    for c in cuts + [len(slots)]:
        pieces.append(slots[prev:c])
        prev = c
    polys = [(["B"] + piece, [rng.randint(-3, 3) for _ in range(len(piece) - 1)])
             for piece in pieces]
    return ArcSystem.from_lists(polys, n_arcs)


@settings(max_examples=400, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6), st.integers(1, 5))
def test_indices_sum_and_walk_oracle(seed, n_arcs, n_polys):
    rng = random.Random(seed)
    n_polys = min(n_polys, 2 * n_arcs)
    sysm = random_gluing(rng, n_arcs, n_polys)
    try:
        g = infer_genus(sysm)
    except SurfaceError:
        return
    if g == 0 and len(sysm.polygons) == 2 and sysm.n_arcs == 1:
        return  # disk with two marked points
    data = numerical_data(sysm, g)
    assert sum(data.boundary_indices) == 4 - 4 * g
    assert list(data.boundary_indices) == boundary_walk_indices(sysm)
    assert hat_rank(data) == sysm.n_arcs


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_relabeling_invariance(seed):
    rng = random.Random(seed)
    sysm = random_gluing(rng, rng.randint(2, 6), rng.randint(1, 4))
    try:
        g = infer_genus(sysm)
        data = numerical_data(sysm, g)
    except SurfaceError:
        return
    perm = list(range(sysm.n_arcs))
    rng.shuffle(perm)
    order = list(range(len(sysm.polygons)))
    rng.shuffle(order)
    other = sysm.relabel(perm, order)
    # rotating each polygon's side list does not change the system either
    rotated = ArcSystem.from_lists(
        [(list(p.sides[1:]) + [p.sides[0]], p.degrees) for p in other.polygons], other.n_arcs)
    for alt in (other, rotated):
        d2 = numerical_data(alt, g)
        assert sorted(zip(d2.boundary_orders, d2.boundary_indices)) == \
            sorted(zip(data.boundary_orders, data.boundary_indices))


def test_chord_system_orders_points():
    sysm = disk_chord_system(4, [(0, 1), (0, 2), (0, 3)])
    assert numerical_data(sysm, 0).boundary_orders == (4,)
