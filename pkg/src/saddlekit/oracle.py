"""Exact analytic models for tori, marked tori, and slit tori.

The flat torus for a unimodular matrix g has holonomy set g applied to the
primitive integer vectors; a slit torus adds the translates of the slit
holonomy by the lattice, in both orientations.  For rational slit vectors
the idealized formula overcounts: segments that pass through the other
marked point on the way are excluded by an exact rationality test, and the
excluded vectors are reported as corrections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from .errors import InputError
from .exactplane import (
    ExactMatrix,
    ExactVector,
    FloatMatrix,
    euler_phi,
    to_fraction,
)

_F0 = Fraction(0)


@dataclass(frozen=True)
class TorusPoint:
    """Unit-covolume lattice g Z^2, exact or float."""

    g: object  # ExactMatrix | FloatMatrix

    def __post_init__(self):
        det = self.g.det()
        if isinstance(self.g, ExactMatrix):
            if det != 1:
                raise InputError("torus matrix must have determinant one")
        else:
            if abs(det - 1.0) > 1e-12:
                raise InputError("torus matrix determinant must be 1 within 1e-12")

    def is_exact(self) -> bool:
        return isinstance(self.g, ExactMatrix)


@dataclass(frozen=True)
class SlitTorusPoint:
    g: object
    v: ExactVector

    def __post_init__(self):
        TorusPoint(self.g)
        if not isinstance(self.g, ExactMatrix):
            raise InputError("slit torus oracle requires an exact matrix")
        w = self.g.inverse().apply(self.v)
        if w.x.denominator == 1 and w.y.denominator == 1:
            raise InputError("slit vector must not lie in the lattice")


def _lattice_box_bound(g: ExactMatrix, radius: Fraction) -> int:
    """Integer bound B with |g w| <= radius implying |w|_inf <= B."""
    fr = g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d
    # Operator norm of g^{-1} is at most its Frobenius norm = sqrt(fr)/|det|.
    det = abs(g.det())
    bound_sq = radius * radius * fr / (det * det)
    return math.isqrt(bound_sq.numerator // bound_sq.denominator) + 1


def torus_holonomy(t: TorusPoint, radius) -> Set[ExactVector]:
    """{g w : w primitive, |g w| <= radius}, exact for exact matrices."""
    radius = to_fraction(radius)
    if radius <= 0:
        raise InputError("radius must be positive")
    if not t.is_exact():
        raise InputError("exact holonomy needs an exact matrix")
    g = t.g
    bound = _lattice_box_bound(g, radius)
    r_sq = radius * radius
    out = set()
    for p in range(-bound, bound + 1):
        for q in range(-bound, bound + 1):
            if math.gcd(abs(p), abs(q)) != 1:
                continue
            img = g.apply(ExactVector(Fraction(p), Fraction(q)))
            if img.norm_sq() <= r_sq:
                out.add(img)
    return out


def _passes_through(w: ExactVector, target: ExactVector) -> bool:
    """Exact test: does {t w : 0 < t < 1} meet target + Z^2?

    w and target are in lattice coordinates (g factored out).
    """
    # t w = target + m with m integral; solve per coordinate.
    if w.x != 0:
        # Enumerate integers m1 with 0 < (m1 + target.x) / w.x < 1.
        candidates = []
        span = sorted([_F0, w.x])
        m1 = math.floor(span[0] - target.x) - 1
        while m1 <= math.ceil(span[1] - target.x) + 1:
            t = (target.x + m1) / w.x
            if 0 < t < 1:
                candidates.append(t)
            m1 += 1
        for t in candidates:
            val = t * w.y - target.y
            if val.denominator == 1:
                return True
        return False
    if w.y == 0:
        return False
    span = sorted([_F0, w.y])
    m2 = math.floor(span[0] - target.y) - 1
    while m2 <= math.ceil(span[1] - target.y) + 1:
        t = (target.y + m2) / w.y
        if 0 < t < 1 and (t * w.x - target.x).denominator == 1:
            return True
        m2 += 1
    return False


@dataclass(frozen=True)
class SlitHolonomyResult:
    vectors: frozenset
    corrections: frozenset  # formula vectors removed by the blocking filter


def slit_torus_holonomy(t: SlitTorusPoint, radius) -> SlitHolonomyResult:
    """Predicted holonomy set of the slit torus [g, v] up to a radius.

    Idealized set: g Z^2_prim together with g Z^2 + v and g Z^2 - v (both
    orientations of marked-point-to-marked-point segments).  Rational slit
    vectors admit coincidences; a candidate is dropped when every segment
    realizing it passes through the other marked point, and such vectors are
    reported in corrections.
    """
    radius = to_fraction(radius)
    if radius <= 0:
        raise InputError("radius must be positive")
    g = t.g
    v0 = g.inverse().apply(t.v)  # slit in lattice coordinates
    r_sq = radius * radius
    bound = _lattice_box_bound(g, radius) + int(abs(v0.x) + abs(v0.y)) + 2

    vectors = set()
    corrections = set()
    for p in range(-bound, bound + 1):
        for q in range(-bound, bound + 1):
            w = ExactVector(Fraction(p), Fraction(q))
            if math.gcd(abs(p), abs(q)) == 1:
                img = g.apply(w)
                if img.norm_sq() <= r_sq:
                    # Loop at a marked point; exists on the copy based at 0
                    # unless it hits v, and at v unless it hits -v's copy.
                    blocked_at_zero = _passes_through(w, v0)
                    blocked_at_v = _passes_through(w, -v0)
                    if blocked_at_zero and blocked_at_v:
                        corrections.add(img)
                    else:
                        vectors.add(img)
            for sign in (1, -1):
                shifted = ExactVector(w.x + sign * v0.x, w.y + sign * v0.y)
                img = g.apply(shifted)
                if img.norm_sq() <= r_sq and not shifted.is_zero():
                    # Segment between the two marked points: blocked by an
                    # interior lattice point or an interior copy of v.
                    if _passes_through(shifted, ExactVector(_F0, _F0)) or _passes_through(
                        shifted, ExactVector(sign * v0.x, sign * v0.y)
                    ):
                        corrections.add(img)
                    else:
                        vectors.add(img)
    return SlitHolonomyResult(frozenset(vectors), frozenset(corrections))


@dataclass(frozen=True)
class SiegelVeechMeasureTorus:
    """Atomic spectral measures of the flat torus.

    nu has an atom of mass phi(|n|) / zeta(2) at each nonzero integer n;
    eta is the counting measure on slopes +1 and -1.  zeta(2) stays
    symbolic: atoms store the integer weight, the normalizer names the
    constant.
    """

    max_index: int
    nu_weights: Dict[int, int]
    eta_atoms: Dict[int, int]
    normalizer: str = "zeta(2)"

    def nu_weight(self, n: int) -> int:
        if n == 0:
            raise InputError("nu has no atom at zero")
        return euler_phi(abs(n))

    def to_json_dict(self):
        return {
            "normalizer": self.normalizer,
            "nu_atoms": [
                {"n": n, "weight_phi": w} for n, w in sorted(self.nu_weights.items())
            ],
            "eta_atoms": [{"slope": s, "weight": w} for s, w in sorted(self.eta_atoms.items())],
        }


def sv_measure_torus(max_index: int = 24) -> SiegelVeechMeasureTorus:
    weights = {}
    for n in range(1, max_index + 1):
        weights[n] = euler_phi(n)
        weights[-n] = weights[n]
    return SiegelVeechMeasureTorus(
        max_index=max_index, nu_weights=weights, eta_atoms={1: 1, -1: 1}
    )


def zeta2_partial(terms: int = 200_000) -> Tuple[float, float]:
    """Partial sum of sum 1/n^2 with an integral tail bound; independent of
    the closed form."""
    s = 0.0
    for n in range(terms, 0, -1):
        s += 1.0 / (n * n)
    # Tail is between 1/(terms+1) and 1/terms.
    return (s + 1.0 / (terms + 1), s + 1.0 / terms)


def siegel_constant_torus() -> float:
    """1 / zeta(2) at double precision: mean holonomy count per unit area."""
    return 6.0 / (math.pi * math.pi)


def _primitive_array(bound: int):
    import numpy as np

    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    px, py = np.meshgrid(rng, rng, indexing="ij")
    px = px.ravel()
    py = py.ravel()
    mask = (px * px + py * py <= bound * bound) & (np.gcd(np.abs(px), np.abs(py)) == 1)
    return px[mask], py[mask]


def determinant_histogram(bound: int) -> Dict[int, int]:
    """Frequencies of det(v1, v2) over ordered pairs of primitive vectors of
    length at most bound; the finite-volume shadow of the nu spectrum."""
    import numpy as np

    xs, ys = _primitive_array(bound)
    dets = xs[:, None] * ys[None, :] - ys[:, None] * xs[None, :]
    values, counts = np.unique(dets, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def collinear_pairs_are_opposite(bound: int) -> bool:
    """det = 0 on primitive pairs only at v2 = +-v1 (eta support check)."""
    import numpy as np

    xs, ys = _primitive_array(bound)
    dets = xs[:, None] * ys[None, :] - ys[:, None] * xs[None, :]
    zi, zj = np.nonzero(dets == 0)
    same = (xs[zi] == xs[zj]) & (ys[zi] == ys[zj])
    opp = (xs[zi] == -xs[zj]) & (ys[zi] == -ys[zj])
    return bool(np.all(same | opp))
