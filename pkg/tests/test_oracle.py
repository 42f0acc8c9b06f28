import math
from fractions import Fraction

import pytest

from saddlekit.builders import slit_torus, torus_from_matrix
from saddlekit.errors import InputError
from saddlekit.exactplane import ExactMatrix, ExactVector, euler_phi, primitive_points_in_disc
from saddlekit.geodesic import enumerate_connections
from saddlekit.oracle import (
    SlitTorusPoint,
    TorusPoint,
    collinear_pairs_are_opposite,
    determinant_histogram,
    siegel_constant_torus,
    slit_torus_holonomy,
    sv_measure_torus,
    torus_holonomy,
    zeta2_partial,
)


def V(x, y):
    return ExactVector.of(x, y)


def test_torus_holonomy_identity_radius_1():
    t = TorusPoint(ExactMatrix.identity())
    assert torus_holonomy(t, 1) == {V(1, 0), V(-1, 0), V(0, 1), V(0, -1)}


def test_torus_holonomy_shear_image():
    m = ExactMatrix.shear(1)
    t = TorusPoint(m)
    got = torus_holonomy(t, 1)
    expected = {
        m.apply(v) for v in primitive_points_in_disc(3) if m.apply(v).norm_sq() <= 1
    }
    assert got == expected


def test_torus_holonomy_agrees_with_enumeration():
    m = ExactMatrix.shear(Fraction(1, 2))
    surf = torus_from_matrix(m)
    for r in (2, 5):
        assert enumerate_connections(surf, r).vectors() == frozenset(
            torus_holonomy(TorusPoint(m), r)
        )


def test_torus_point_validates_determinant():
    with pytest.raises(InputError):
        TorusPoint(ExactMatrix.of(2, 0, 0, 1))


def test_slit_holonomy_direct_formula():
    v = V(Fraction(1, 3), Fraction(1, 5))
    t = SlitTorusPoint(ExactMatrix.identity(), v)
    res = slit_torus_holonomy(t, 1)
    assert v in res.vectors
    assert V(Fraction(1, 3) - 1, Fraction(1, 5)) in res.vectors
    assert -v in res.vectors
    for w in primitive_points_in_disc(1):
        assert w in res.vectors


def test_slit_holonomy_cross_check_with_surface():
    v = V(Fraction(1, 3), Fraction(1, 5))
    res = slit_torus_holonomy(SlitTorusPoint(ExactMatrix.identity(), v), 2)
    surf = slit_torus(v)
    assert enumerate_connections(surf, 2).vectors() == res.vectors


def test_slit_holonomy_degenerate_rational_flagged():
    res = slit_torus_holonomy(SlitTorusPoint(ExactMatrix.identity(), V(Fraction(1, 2), 0)), 2)
    assert res.corrections
    assert V(1, 0) in res.corrections  # blocked through the midpoint marked point


def test_slit_point_rejects_lattice_vector():
    with pytest.raises(InputError):
        SlitTorusPoint(ExactMatrix.identity(), V(1, 0))


def test_sv_measure_atoms():
    m = sv_measure_torus(8)
    assert m.nu_weights[1] == 1  # phi(1)
    assert m.nu_weights[-6] == 2  # phi(6) by gcd scan
    assert sum(1 for k in range(1, 7) if math.gcd(k, 6) == 1) == 2
    assert m.eta_atoms == {1: 1, -1: 1}
    assert m.normalizer == "zeta(2)"


def test_nu_symmetry_up_to_100():
    m = sv_measure_torus(100)
    for n in range(1, 101):
        assert m.nu_weights[n] == m.nu_weights[-n]
        assert m.nu_weights[n] == euler_phi(n)


def test_siegel_constant_value():
    c = siegel_constant_torus()
    lo, hi = zeta2_partial()
    # independent partial-sum evaluation of zeta(2) brackets 1/c
    assert lo <= 1.0 / c <= hi
    assert abs(c - 0.607927) < 1e-6


def test_primitive_density_converges_to_constant():
    c = siegel_constant_torus()
    ratios = []
    for r in (20, 40, 80):
        count = len(primitive_points_in_disc(r))
        ratios.append(count / (math.pi * r * r))
    assert abs(ratios[-1] - c) < 0.01
    assert abs(ratios[-1] - c) <= abs(ratios[0] - c)


def test_determinant_histogram_shadow():
    hist = determinant_histogram(12)
    assert set(hist) <= set(range(-400, 401))
    assert all(isinstance(k, int) for k in hist)
    # Haar scaling: frequency of det = n falls like phi(n)/n.
    assert abs(2 * hist[2] / hist[1] - euler_phi(2)) < 0.1
    assert abs(3 * hist[3] / hist[1] - euler_phi(3)) < 0.2
    assert hist[2] == hist[-2]  # determinant symmetry


def test_collinear_pairs_eta_support():
    assert collinear_pairs_are_opposite(12)


def test_measure_serialization():
    data = sv_measure_torus(4).to_json_dict()
    assert data["normalizer"] == "zeta(2)"
    assert {"n": 3, "weight_phi": 2} in data["nu_atoms"]
