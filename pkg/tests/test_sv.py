import math
from fractions import Fraction

import pytest

from saddlekit.builders import (
    octagon_h2,
    sheared_torus,
    slit_torus,
    square_torus,
    torus_from_matrix,
)
from saddlekit.errors import AmbiguousMembershipError, InputError
from saddlekit.exactplane import ExactMatrix, ExactVector, primitive_points_in_disc
from saddlekit.geodesic import enumerate_connections, shortest
from saddlekit.surface import apply_surface
from saddlekit.sv import (
    AnnulusIndicator,
    ClassLabel,
    DiscIndicator,
    ProductPair,
    SectorIndicator,
    classify,
    pair_transform,
    rotational_average_AR,
    sector_sandwich,
    test_function_from_json,
    transform,
    transform_report,
)


def V(x, y):
    return ExactVector.of(x, y)


def test_transform_disc_counts(torus):
    assert transform(torus, DiscIndicator(1)) == 4
    assert transform(torus, DiscIndicator(Fraction(1, 2))) == 0  # below shortest
    assert transform(torus, DiscIndicator(2)) == 8


def test_transform_annulus(torus):
    assert transform(torus, AnnulusIndicator(1, 2)) == 4  # norms in (1, 2]


def test_transform_sector_vs_brute_filter(torus):
    f = SectorIndicator(3, 0.0, math.pi / 4)
    rep = transform_report(torus, f)
    strict_inside = 0
    boundary = 0
    for v in primitive_points_in_disc(3):
        x, y = float(v.x), float(v.y)
        ang = math.atan2(y, x)
        if abs(ang) < math.pi / 4 - 1e-9:
            strict_inside += 1
        elif abs(abs(ang) - math.pi / 4) < 1e-9:
            boundary += 1
    assert rep.value == strict_inside
    assert rep.ambiguous == boundary
    with pytest.raises(AmbiguousMembershipError):
        transform(torus, f)


def test_pair_transform_identity_and_products(torus):
    f1 = DiscIndicator(1)
    f2 = DiscIndicator(2)
    assert pair_transform(torus, f1, f1) == transform(torus, f1) ** 2 == 16
    assert pair_transform(torus, f1, f2) == 4 * 8
    empty = DiscIndicator(Fraction(1, 3))
    assert pair_transform(torus, empty, f2) == 0


def test_pair_transform_matches_literal_double_sum(torus):
    # independent oracle: literal double loop over the enumerated vectors
    f = DiscIndicator(1)
    g = DiscIndicator(2)
    vecs = enumerate_connections(torus, 2).vectors()
    literal = sum(
        f.evaluate_exact(v1)[0] * g.evaluate_exact(v2)[0]
        for v1 in vecs
        for v2 in vecs
    )
    assert pair_transform(torus, f, g) == literal


def test_product_pair_routes_through_transform(torus):
    h = ProductPair(DiscIndicator(1), DiscIndicator(2))
    assert transform_report(torus, h).value == 32


def test_rotational_average_identity(torus):
    f = DiscIndicator(Fraction(3, 2))
    rep = rotational_average_AR(torus, f, 1.0, 64)
    assert rep.value == transform(torus, f)
    assert rep.ambiguous_fraction == 0


def test_rotational_average_richardson(torus):
    f = DiscIndicator(Fraction(3, 2))
    a = rotational_average_AR(torus, f, 4.0, 256).value
    b = rotational_average_AR(torus, f, 4.0, 512).value
    assert abs(a - b) < 0.5


def test_sector_sandwich_ordered(torus):
    for R in (5.0, 10.0):
        for theta in (math.pi / 16, math.pi / 32):
            rep = sector_sandwich(torus, R, theta, quadrature_n=256)
            assert rep.ordered_within_margin(), (R, theta, rep)
            assert rep.ambiguous_fraction < 0.01


def test_sector_sandwich_width_shrinks_with_theta(torus):
    wide = sector_sandwich(torus, 5.0, math.pi / 8, quadrature_n=256)
    narrow = sector_sandwich(torus, 5.0, math.pi / 32, quadrature_n=256)
    assert narrow.upper - narrow.lower <= wide.upper - wide.lower + narrow.margin


def test_sector_sandwich_boundary_case(torus):
    rep = sector_sandwich(torus, 2.0, math.pi / 8, quadrature_n=256)
    assert rep.ordered_within_margin()


def test_classify_h1(torus):
    assert classify(torus, Fraction(1, 2), Fraction(1, 6)).label == "H1"


def test_classify_thin_torus_omega2():
    thin = torus_from_matrix(ExactMatrix.diagonal(Fraction(1, 8), 8))
    label = classify(thin, Fraction(1, 2), Fraction(1, 6))
    assert label.label == "Omega2"
    assert label.cylinder is not None
    assert label.cylinder.width_sq == Fraction(1, 64)
    # epsilon(X, omega) = 8 exceeds |gamma|^p
    assert label.second_length_sq == 64


def test_classify_small_slit_is_omega_branch():
    s = slit_torus(V(Fraction(6, 1000), Fraction(3, 1000)))
    label = classify(s, Fraction(1, 2), Fraction(1, 6))
    assert label.label in ("Omega1", "Omega2")
    assert label.label == "Omega2"  # rational data: the direction is periodic


def test_classify_moderate_slit_h2(slit_13_15):
    # slit length ~0.39, doubled loop ~0.78 > 1/2: no short loop
    label = classify(slit_13_15, Fraction(1, 2), Fraction(1, 6))
    assert label.label == "H2"


def test_classify_omega0_requires_tiny_second():
    # second shortest below |gamma|^p: scaled torus where both directions
    # are short but one is much shorter
    s = torus_from_matrix(ExactMatrix.of(Fraction(1, 1024), 0, 0, 1024))
    label = classify(s, Fraction(1, 2), Fraction(1, 2))
    # epsilon = 1024 is far above |gamma|^(1/2); stays in the cylinder branch
    assert label.label == "Omega2"


def test_classify_unknown_on_tiny_budget():
    thin = torus_from_matrix(ExactMatrix.diagonal(Fraction(1, 8), 8))
    label = classify(thin, Fraction(1, 2), Fraction(1, 6), cylinder_trace=Fraction(1, 50))
    assert label.label == "Unknown"


def test_classify_scale_trigger_monotone(torus):
    # once a connection drops below eps0 the label leaves H1 and stays away
    labels = []
    for c in (1, 2, 4, 8, 16):
        s = torus_from_matrix(ExactMatrix.diagonal(Fraction(1, c), c))
        labels.append(classify(s, Fraction(1, 2), Fraction(1, 6)).label)
    assert labels[0] == "H1"
    first_short = next(i for i, lab in enumerate(labels) if lab != "H1")
    assert all(lab != "H1" for lab in labels[first_short:])


def test_gl2_contravariance(torus):
    m = ExactMatrix.of(2, 1, 1, 1)
    image = apply_surface(m, torus)
    r = Fraction(3)
    val = transform(image, DiscIndicator(r))
    direct = sum(
        1
        for v in primitive_points_in_disc(3 * 4)
        if m.apply(v).norm_sq() <= r * r
    )
    assert val == direct


def test_eskin_masur_tripwire(torus, slit_13_15):
    # recorded constant: transform(disc eps0) * |gamma|^{1+delta} stays small
    eps0 = Fraction(1, 2)
    bound = 2.0  # calibrated on this corpus
    for s in (torus, sheared_torus(2), slit_13_15):
        gamma_sq = float(shortest(s).length_sq())
        value = transform_report(s, DiscIndicator(eps0)).value
        assert value * gamma_sq ** ((1 + 0.1) / 2) <= bound


def test_test_function_json_round_trip():
    for f in (
        DiscIndicator(Fraction(3, 2)),
        AnnulusIndicator(1, 2),
        SectorIndicator(2, 0.3, 0.2),
        ProductPair(DiscIndicator(1), DiscIndicator(2)),
    ):
        again = test_function_from_json(f.to_json())
        assert again.to_json() == f.to_json()


def test_classify_rejects_bad_parameters(torus):
    with pytest.raises(InputError):
        classify(torus, 0, Fraction(1, 6))
    with pytest.raises(InputError):
        classify(torus, Fraction(1, 2), Fraction(3, 2))
