"""Discrete disks, boundary rings and cover-radius bookkeeping."""

import math

import pytest

from coverlab.lattice import (CoverRadius, VisitedGrid, boundary_points,
                              boundary_start, cover_radius, disk_points,
                              disk_threshold, on_boundary)


def brute_disk(r):
    t = disk_threshold(r)
    m = int(math.isqrt(t))
    return {(x, y) for x in range(-m - 2, m + 3) for y in range(-m - 2, m + 3)
            if x * x + y * y <= t}


def test_disk_points_small_radii():
    assert disk_points(0) == {(0, 0)}
    assert disk_points(1) == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    assert len(disk_points(2)) == 13


def test_disk_points_matches_brute_force():
    for r in (2, 3.5, 7, 10):
        assert disk_points(r) == brute_disk(r)


def test_disk_points_rejects_negative_radius():
    with pytest.raises(ValueError):
        disk_points(-1)


def test_boundary_points_small_radii():
    assert boundary_points(0) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert boundary_points(1) == {(2, 0), (-2, 0), (0, 2), (0, -2),
                                  (1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_boundary_disjoint_from_disk():
    for r in (0, 1, 2, 5, 9):
        assert not boundary_points(r) & disk_points(r)


def test_boundary_matches_neighbor_scan():
    for r in (2, 5, 8):
        disk = disk_points(r)
        brute = set()
        for x, y in disk:
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if (x + dx, y + dy) not in disk:
                    brute.add((x + dx, y + dy))
        assert boundary_points(r) == brute


def test_dihedral_symmetry():
    for r in (2, 6):
        for pts in (disk_points(r), boundary_points(r)):
            assert pts == {(-x, y) for x, y in pts}
            assert pts == {(x, -y) for x, y in pts}
            assert pts == {(y, x) for x, y in pts}


def test_on_boundary_agrees_with_set():
    for r in (2, 5, 11):
        t = disk_threshold(r)
        ring = boundary_points(r)
        m = int(math.isqrt(t)) + 3
        for x in range(-m, m + 1):
            for y in range(-m, m + 1):
                assert on_boundary(x, y, t) == ((x, y) in ring)


def test_boundary_start_on_ring():
    for r in (2, 8, 40):
        assert boundary_start(r) in boundary_points(r)


def test_disk_density_approaches_pi():
    for r in (50, 80):
        ratio = len(disk_points(r)) / (math.pi * r * r)
        assert abs(ratio - 1.0) < 0.05


def test_disk_threshold_exact_arithmetic():
    assert disk_threshold(2) == 4
    assert disk_threshold(2.5) == 6  # floor(6.25)
    assert disk_threshold(math.sqrt(5)) == 5  # exact despite rounding of sqrt


def test_cover_radius_sup_convention():
    g = VisitedGrid(6)
    assert cover_radius(g) == CoverRadius(0.0, False)
    g.mark(0, 0)
    assert cover_radius(g).radius == 1.0
    g.mark_many(disk_points(2))
    assert cover_radius(g).radius == math.sqrt(5)
    g.mark(1, 2)
    # all norm-5 points must be visited before the radius passes sqrt(5)
    assert cover_radius(g).radius == math.sqrt(5)
    g.mark_many([(2, 1), (-1, 2), (-2, 1), (1, -2), (2, -1), (-1, -2), (-2, -1)])
    assert cover_radius(g).radius > math.sqrt(5)


def test_cover_radius_monotone_and_saturates():
    g = VisitedGrid(3)
    last = 0.0
    for p in sorted(disk_points(3), key=lambda p: p[0] * p[0] + p[1] * p[1]):
        g.mark(*p)
        now = cover_radius(g).radius
        assert now >= last
        last = now
    assert cover_radius(g) == CoverRadius(3.0, True)
