import json
from fractions import Fraction

import pytest

from saddlekit.builders import (
    centered_octagon_h2,
    marked_torus,
    octagon_h2,
    regular_octagon_approx,
    slit_torus,
    square_torus,
    wrap_points_in_torus,
)
from saddlekit.errors import (
    AreaError,
    EdgeSumError,
    GluingInvolutionError,
    GluingOppositeError,
    SingularMatrixError,
)
from saddlekit.exactplane import ExactMatrix, ExactVector
from saddlekit.surface import TranslationSurface, Triangle, apply_surface, area, surfaces_equal


def V(x, y):
    return ExactVector.of(x, y)


def test_square_torus_signature(torus):
    sig = torus.validate()
    assert sig.zero_orders == (0,)
    assert sig.genus == 1
    assert sig.dim_relative_homology == 2


def test_centered_octagon_collapses_to_h2():
    s = centered_octagon_h2()
    sig = s.validate()
    assert sig.zero_orders == (2,)
    assert sig.genus == 2
    assert sig.dim_relative_homology == 4


def test_slit_torus_signature():
    s = slit_torus(V(Fraction(1, 3), Fraction(1, 5)))
    sig = s.validate()
    assert sig.zero_orders == (1, 1)
    assert sig.genus == 2
    assert sig.dim_relative_homology == 5


def test_marked_torus_signature():
    s = marked_torus(V(Fraction(1, 3), Fraction(1, 5)))
    sig = s.validate()
    assert sig.zero_orders == (0, 0)
    assert sig.dim_relative_homology == 3


def _torus_cells():
    t0 = Triangle((V(1, 0), V(0, 1), V(-1, -1)))
    t1 = Triangle((V(1, 1), V(-1, 0), V(0, -1)))
    gl = {}
    for a, b in [((0, 0), (1, 1)), ((0, 1), (1, 2)), ((0, 2), (1, 0))]:
        gl[a] = b
        gl[b] = a
    return [t0, t1], gl


def test_edge_sum_error():
    tris, gl = _torus_cells()
    tris[0] = Triangle((V(1, 0), V(0, 1), V(-1, 0)))
    with pytest.raises(EdgeSumError):
        TranslationSurface(tris, gl).validate()


def test_area_error():
    tris, gl = _torus_cells()
    # clockwise triangle: edges sum to zero but signed area is negative
    tris[0] = Triangle((V(0, 1), V(1, 0), V(-1, -1)))
    with pytest.raises(AreaError):
        TranslationSurface(tris, gl).validate()


def test_gluing_involution_error():
    tris, gl = _torus_cells()
    gl[(0, 0)] = (0, 0)
    with pytest.raises(GluingInvolutionError):
        TranslationSurface(tris, gl).validate()
    tris, gl = _torus_cells()
    del gl[(1, 2)]
    gl[(0, 1)] = (1, 1)
    with pytest.raises(GluingInvolutionError):
        TranslationSurface(tris, gl).validate()


def test_gluing_opposite_error():
    tris, gl = _torus_cells()
    # swap two partners so vectors no longer cancel
    gl[(0, 0)], gl[(0, 1)] = gl[(0, 1)], gl[(0, 0)]
    gl[(1, 2)] = (0, 0)
    gl[(1, 1)] = (0, 1)
    with pytest.raises(GluingOppositeError):
        TranslationSurface(tris, gl).validate()


def test_area_examples(torus):
    assert area(torus) == 1
    oct_approx = regular_octagon_approx()
    a = area(oct_approx)
    # exact rational shoelace of the approximating polygon, near 2(1+sqrt 2)
    assert a.denominator >= 1
    assert abs(float(a) - 4.828) < 0.01
    scaled = apply_surface(ExactMatrix.diagonal(2, Fraction(1, 2)), torus)
    assert area(scaled) == 1


def test_area_scales_by_determinant(torus, octagon):
    m = ExactMatrix.of(2, 1, 1, 1)  # det 1
    assert area(apply_surface(m, octagon)) == area(octagon)
    m2 = ExactMatrix.of(3, 0, 0, 2)  # det 6
    assert area(apply_surface(m2, torus)) == 6 * area(torus)


def test_apply_surface_identity(torus):
    assert surfaces_equal(apply_surface(ExactMatrix.identity(), torus), torus)


def test_apply_surface_preserves_signature(octagon):
    m = ExactMatrix.of(2, 3, 1, 2)  # det 1
    sig = apply_surface(m, octagon).validate()
    assert sig == octagon.validate()


def test_apply_surface_rejects_singular(torus):
    with pytest.raises(SingularMatrixError):
        apply_surface(ExactMatrix.of(1, 2, 2, 4), torus)


def test_diag_action_on_lattice(torus):
    scaled = apply_surface(ExactMatrix.diagonal(2, Fraction(1, 2)), torus)
    vecs = {scaled.edge_vector(s) for s in scaled.slots()}
    assert V(2, 0) in vecs and V(0, Fraction(1, 2)) in vecs


def test_json_round_trip_byte_identical(torus, octagon, slit_13_15):
    for s in (torus, octagon, slit_13_15):
        text = s.to_json()
        again = TranslationSurface.from_json(text)
        again.validate()
        assert again.to_json() == text


def test_json_format_shape(torus):
    data = json.loads(torus.to_json())
    assert set(data) == {"triangles", "gluings"}
    assert data["triangles"][0]["edges"][0] == ["1", "0"]


def test_json_accepts_n_over_1():
    data = {
        "triangles": [
            {"edges": [["1/1", "0"], ["0", "1"], ["-1", "-1"]]},
            {"edges": [["1", "1"], ["-1", "0"], ["0", "-1"]]},
        ],
        "gluings": [[[0, 0], [1, 1]], [[0, 1], [1, 2]], [[0, 2], [1, 0]]],
    }
    s = TranslationSurface.from_json_dict(data)
    s.validate()
    assert json.loads(s.to_json())["triangles"][0]["edges"][0] == ["1", "0"]


def test_gauss_bonnet_on_corpus(torus, octagon, slit_13_15):
    for s in (torus, octagon, slit_13_15):
        sig = s.validate()
        orders = s.vertex_orders()
        assert sum(orders.values()) == 2 * sig.genus - 2


def test_wrapped_points_are_marked(torus):
    pts = [V(0, 0), V(1, 0), V(Fraction(1, 2), Fraction(3, 4))]
    s, ids, _ = wrap_points_in_torus(pts)
    assert len(set(ids)) == 3
    sig = s.validate()
    assert sig.genus == 1
    assert all(k == 0 for k in s.vertex_orders().values())
