import random
from fractions import Fraction

import pytest

from saddlekit.builders import sheared_torus, slit_torus, square_torus, torus_from_matrix
from saddlekit.errors import ResourceLimitError
from saddlekit.exactplane import ExactMatrix, ExactVector, primitive_points_in_disc
from saddlekit.geodesic import (
    Cylinder,
    Unknown,
    count,
    detect_cylinder,
    enumerate_connections,
    reverse_of,
    second_shortest_nonhomologous,
    shortest,
    trace_connection,
)
from saddlekit.surface import apply_surface


def V(x, y):
    return ExactVector.of(x, y)


# Quadratic-envelope windows per surface, recorded by a calibration run of
# this suite and asserted stable since (counts hover near 6/pi ~ 1.91 per
# unit R^2 on tori; the slit surface adds two shifted-lattice families).
ENVELOPE = {
    "torus": (1.5, 2.3),
    "shear2": (1.5, 2.3),
    "slit": (7.0, 9.0),
}


def test_torus_oracle_equivalence(torus):
    for r in (1, 2, 3, 5, 10):
        got = enumerate_connections(torus, r).vectors()
        expected = set(primitive_points_in_disc(r))
        assert got == expected, f"radius {r}"


def test_count_matches_oracle(torus):
    assert count(torus, 1) == 4
    assert count(torus, Fraction(1, 2)) == 0  # below the shortest connection


def test_count_r20_envelope(torus):
    import math

    n = count(torus, 20)
    assert abs(n - math.pi * 400 / (math.pi ** 2 / 6)) / 400 < 0.15


def test_equivariance_under_integral_shears(torus):
    rng = random.Random(2)
    for _ in range(20):
        k = rng.randint(-6, 6)
        lower = rng.choice([True, False])
        m = ExactMatrix.of(1, k, 0, 1) if lower else ExactMatrix.of(1, 0, k, 1)
        assert m.det() == 1
        r = Fraction(rng.randint(2, 5))
        image = enumerate_connections(apply_surface(m, torus), r).vectors()
        # brute force: map a comfortably larger preimage ball through m
        ops = 1 + abs(k)  # operator norm bound for a unipotent integer shear
        pre = primitive_points_in_disc(r * (ops + 1))
        expected = {m.apply(v) for v in pre if m.apply(v).norm_sq() <= r * r}
        assert image == expected


def test_holonomy_set_negation_symmetric(torus, slit_13_15, octagon):
    for s in (torus, slit_13_15, octagon):
        vecs = enumerate_connections(s, 2).vectors()
        assert {-v for v in vecs} == vecs


def test_count_monotone_in_radius(slit_13_15):
    counts = [count(slit_13_15, r) for r in (Fraction(1, 2), 1, 2, 3)]
    assert counts == sorted(counts)


def test_quadratic_envelope_windows(torus, slit_13_15):
    surfaces = {"torus": torus, "shear2": sheared_torus(2), "slit": slit_13_15}
    for name, s in surfaces.items():
        lo, hi = ENVELOPE[name]
        for r in (5, 10, 20):
            ratio = count(s, r) / r ** 2
            assert lo <= ratio <= hi, (name, r, ratio)


def test_shortest_examples(torus):
    assert shortest(torus).length_sq() == 1
    scaled = torus_from_matrix(ExactMatrix.diagonal(Fraction(1, 2), 2))
    sc = shortest(scaled)
    assert sc.length_sq() == Fraction(1, 4)
    assert sc.holonomy in (V(Fraction(1, 2), 0), V(Fraction(-1, 2), 0))
    slit = slit_torus(V(Fraction(1, 3), Fraction(1, 5)))
    assert shortest(slit).length_sq() == Fraction(34, 225)


def test_second_shortest_examples(torus):
    snd = second_shortest_nonhomologous(torus)
    assert snd.length_sq() == 1
    assert snd.holonomy.x == 0  # the vertical class, distinct from horizontal
    scaled = torus_from_matrix(ExactMatrix.diagonal(Fraction(1, 2), 2))
    assert second_shortest_nonhomologous(scaled).length_sq() == 4


def test_second_shortest_skips_parallel_homologous(slit_13_15):
    # The two slit banks share endpoints and homology class; the second
    # nonhomologous connection is the next lattice translate.
    gamma = shortest(slit_13_15)
    snd = second_shortest_nonhomologous(slit_13_15)
    assert snd.length_sq() == Fraction(109, 225)
    assert snd.length_sq() > gamma.length_sq()


def test_second_shortest_proportional_mode(torus):
    pm = second_shortest_nonhomologous(torus, mode="pm")
    prop = second_shortest_nonhomologous(torus, mode="proportional")
    assert pm.length_sq() == prop.length_sq() == 1


def test_detect_cylinder_square_torus(torus):
    conn = trace_connection(torus, 0, V(1, 0))
    cyl = detect_cylinder(torus, conn, 10)
    assert isinstance(cyl, Cylinder)
    assert cyl.width_sq == 1 and cyl.height_sq == 1


def test_detect_cylinder_slit_truncates(slit_13_15):
    # Slit with y-extent 1/5: horizontal leaves at heights inside (0, 1/5)
    # swap sheets across the slit, so the horizontal side of the square lies
    # on a circumference-2 cylinder of height 1/5 (truncated below 1).
    conn = trace_connection(slit_13_15, 0, V(1, 0))
    cyl = detect_cylinder(slit_13_15, conn, 20)
    assert isinstance(cyl, Cylinder)
    assert cyl.height_sq < 1
    assert cyl.width_sq == 4 and cyl.height_sq == Fraction(1, 25)


def test_detect_cylinder_budget_exhaustion(torus):
    conn = trace_connection(torus, 0, V(13, 8))
    res = detect_cylinder(torus, conn, Fraction(1, 100))
    assert isinstance(res, Unknown)


def test_resource_limit(torus):
    with pytest.raises(ResourceLimitError):
        enumerate_connections(torus, 40, budget=50)


def test_trace_connection_agrees_with_enumeration(slit_13_15):
    hs = enumerate_connections(slit_13_15, 1)
    for conn in hs.connections[:8]:
        traced = trace_connection(slit_13_15, conn.start, conn.holonomy)
        assert traced.holonomy == conn.holonomy
        assert traced.end == conn.end


def test_reverse_of_is_involution(slit_13_15):
    hs = enumerate_connections(slit_13_15, 1)
    for conn in hs.connections[:10]:
        rev = reverse_of(slit_13_15, conn)
        assert rev.holonomy == -conn.holonomy
        assert (rev.start, rev.end) == (conn.end, conn.start)
        back = reverse_of(slit_13_15, rev)
        assert back.holonomy == conn.holonomy
        assert back.crossings == conn.crossings
        assert back.start_corner == conn.start_corner


def test_homology_classes_negate_under_reversal(torus):
    hs = enumerate_connections(torus, 2)
    by_key = {}
    for c in hs.connections:
        by_key[(c.holonomy.x, c.holonomy.y)] = c
    from saddlekit.homology import EdgeHomology

    hom = EdgeHomology(torus)
    for c in hs.connections:
        mate = by_key[(-c.holonomy.x, -c.holonomy.y)]
        assert hom.is_pm(c.homology_class, mate.homology_class)


def test_csv_rows_schema(torus):
    hs = enumerate_connections(torus, 1)
    rows = hs.csv_rows()
    assert len(rows) == 4
    assert all(len(r) == 8 for r in rows)
    assert hs.CSV_HEADER[0] == "x_num"
