"""Transforms of compactly supported test functions over holonomy sets.

The transform of an indicator is an exact count over the enumerated
holonomy vectors.  Sector boundaries are rational approximants of the true
rays; points closer to a boundary than the declared margin are counted as
ambiguous and surfaced, never silently assigned.  The rotational averaging
operator evaluates float images of the exact holonomy set under
stretch-rotate matrices, again with an explicit ambiguity margin.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .errors import AmbiguousMembershipError, InputError, PrecisionLimitError
from .exactplane import ExactVector, compare_sqrt_sum, to_fraction
from .geodesic import (
    SaddleConnection,
    Cylinder,
    NotOnBoundary,
    Unknown,
    detect_cylinder,
    enumerate_connections,
    reverse_of,
    second_shortest_nonhomologous,
    shortest,
)
from .surface import TranslationSurface

_RAY_SCALE = 1 << 32
_SECTOR_MARGIN = Fraction(1, 1 << 20)  # angular slack around approximate rays


def _ray_approx(angle: float) -> ExactVector:
    return ExactVector(
        Fraction(round(math.cos(angle) * _RAY_SCALE), _RAY_SCALE),
        Fraction(round(math.sin(angle) * _RAY_SCALE), _RAY_SCALE),
    )


class TestFunction:
    """Bounded, compactly supported test function on the plane."""

    def support_radius(self) -> Fraction:
        raise NotImplementedError

    def evaluate_exact(self, v: ExactVector) -> Tuple[int, bool]:
        """(value, ambiguous) on an exact vector."""
        raise NotImplementedError

    def evaluate_batch(self, xs, ys, delta: float):
        """(values, ambiguous_mask) on float coordinate arrays."""
        raise NotImplementedError

    def to_json_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class DiscIndicator(TestFunction):
    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", to_fraction(self.r))
        if self.r <= 0:
            raise InputError("disc radius must be positive")

    def support_radius(self) -> Fraction:
        return self.r

    def evaluate_exact(self, v: ExactVector):
        return (1 if v.norm_sq() <= self.r * self.r else 0, False)

    def evaluate_batch(self, xs, ys, delta: float):
        r2 = float(self.r) ** 2
        d = xs * xs + ys * ys
        inside = d <= r2
        ambiguous = np.abs(d - r2) <= delta * (1.0 + d)
        return inside.astype(np.int64), ambiguous

    def to_json_dict(self):
        from .exactplane import format_rational

        return {"variant": "disc", "r": format_rational(self.r)}


@dataclass(frozen=True)
class AnnulusIndicator(TestFunction):
    r1: Fraction
    r2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r1", to_fraction(self.r1))
        object.__setattr__(self, "r2", to_fraction(self.r2))
        if not (0 <= self.r1 < self.r2):
            raise InputError("annulus radii must satisfy 0 <= r1 < r2")

    def support_radius(self) -> Fraction:
        return self.r2

    def evaluate_exact(self, v: ExactVector):
        n = v.norm_sq()
        return (1 if self.r1 * self.r1 < n <= self.r2 * self.r2 else 0, False)

    def evaluate_batch(self, xs, ys, delta: float):
        lo = float(self.r1) ** 2
        hi = float(self.r2) ** 2
        d = xs * xs + ys * ys
        inside = (d > lo) & (d <= hi)
        ambiguous = (np.abs(d - lo) <= delta * (1.0 + d)) | (
            np.abs(d - hi) <= delta * (1.0 + d)
        )
        return inside.astype(np.int64), ambiguous

    def to_json_dict(self):
        from .exactplane import format_rational

        return {
            "variant": "annulus",
            "r1": format_rational(self.r1),
            "r2": format_rational(self.r2),
        }


@dataclass(frozen=True)
class SectorIndicator(TestFunction):
    """Indicator of {v: |v| <= r, angle(v) within half_angle of theta}.

    Boundary rays are rational approximants; membership within the reported
    angular margin of a ray counts as ambiguous.
    """

    r: Fraction
    theta: float
    half_angle: float
    ray_lo: ExactVector = field(init=False, compare=False)
    ray_hi: ExactVector = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "r", to_fraction(self.r))
        if self.r <= 0:
            raise InputError("sector radius must be positive")
        if not (0 < self.half_angle < math.pi / 2):
            raise InputError("half_angle must lie in (0, pi/2)")
        object.__setattr__(self, "ray_lo", _ray_approx(self.theta - self.half_angle))
        object.__setattr__(self, "ray_hi", _ray_approx(self.theta + self.half_angle))

    def support_radius(self) -> Fraction:
        return self.r

    def margin(self) -> Fraction:
        return _SECTOR_MARGIN

    def angular_inside(self, v: ExactVector) -> Tuple[bool, bool]:
        """(inside, ambiguous) for the angular condition alone (scale-free)."""
        c1 = self.ray_lo.cross(v)
        c2 = v.cross(self.ray_hi)
        m2 = _SECTOR_MARGIN * _SECTOR_MARGIN
        if c1 * c1 <= m2 * v.norm_sq() * self.ray_lo.norm_sq():
            return (False, True)
        if c2 * c2 <= m2 * v.norm_sq() * self.ray_hi.norm_sq():
            return (False, True)
        return (c1 > 0 and c2 > 0, False)

    def evaluate_exact(self, v: ExactVector):
        if v.norm_sq() > self.r * self.r:
            return (0, False)
        inside, ambiguous = self.angular_inside(v)
        if ambiguous:
            return (0, True)
        return (1 if inside else 0, False)

    def evaluate_batch(self, xs, ys, delta: float):
        r2 = float(self.r) ** 2
        d = xs * xs + ys * ys
        lx, ly = float(self.ray_lo.x), float(self.ray_lo.y)
        hx, hy = float(self.ray_hi.x), float(self.ray_hi.y)
        c1 = lx * ys - ly * xs
        c2 = xs * hy - ys * hx
        norm = np.sqrt(np.maximum(d, 1e-300))
        margin = max(delta, float(_SECTOR_MARGIN))
        amb = (
            (np.abs(c1) <= margin * norm)
            | (np.abs(c2) <= margin * norm)
            | (np.abs(d - r2) <= delta * (1.0 + d))
        )
        inside = (d <= r2) & (c1 > 0) & (c2 > 0)
        return inside.astype(np.int64), amb

    def to_json_dict(self):
        from .exactplane import format_rational

        return {
            "variant": "sector",
            "r": format_rational(self.r),
            "theta": self.theta,
            "half_angle": self.half_angle,
        }


@dataclass(frozen=True)
class ProductPair(TestFunction):
    """h(v1, v2) = f(v1) g(v2) on pairs of holonomy vectors."""

    f: TestFunction
    g: TestFunction

    def support_radius(self) -> Fraction:
        return max(self.f.support_radius(), self.g.support_radius())

    def to_json_dict(self):
        return {
            "variant": "product",
            "f": self.f.to_json_dict(),
            "g": self.g.to_json_dict(),
        }


@dataclass(frozen=True)
class TriangleIndicator(TestFunction):
    """Indicator of the triangle hull{0, p, q} (ccw); used by the sector
    sandwich, where images of triangles under stretches stay triangles."""

    p: ExactVector
    q: ExactVector

    def __post_init__(self):
        if self.p.cross(self.q) <= 0:
            raise InputError("triangle corners must be counterclockwise")

    def support_radius(self) -> Fraction:
        # Rational upper bound for max corner length.
        m = max(self.p.norm_sq(), self.q.norm_sq())
        num = math.isqrt(m.numerator * m.denominator) + 1
        return Fraction(num, m.denominator)

    def evaluate_exact(self, v: ExactVector):
        c1 = self.p.cross(v)
        c2 = (self.q - self.p).cross(v - self.p)
        c3 = (-self.q).cross(v - self.q)
        return (1 if (c1 >= 0 and c2 >= 0 and c3 >= 0) else 0, False)

    def evaluate_batch(self, xs, ys, delta: float):
        px, py = float(self.p.x), float(self.p.y)
        qx, qy = float(self.q.x), float(self.q.y)
        c1 = px * ys - py * xs
        ex, ey = qx - px, qy - py
        c2 = ex * (ys - py) - ey * (xs - px)
        c3 = (-qx) * (ys - qy) + qy * (xs - qx)
        scale = 1.0 + np.sqrt(xs * xs + ys * ys)
        amb = (
            (np.abs(c1) <= delta * scale)
            | (np.abs(c2) <= delta * scale)
            | (np.abs(c3) <= delta * scale)
        )
        inside = (c1 >= 0) & (c2 >= 0) & (c3 >= 0)
        return inside.astype(np.int64), amb

    def to_json_dict(self):
        return {"variant": "triangle", "p": self.p.to_json(), "q": self.q.to_json()}


def test_function_from_json(data) -> TestFunction:
    if isinstance(data, str):
        data = json.loads(data)
    variant = data.get("variant")
    if variant == "disc":
        return DiscIndicator(to_fraction(data["r"]))
    if variant == "annulus":
        return AnnulusIndicator(to_fraction(data["r1"]), to_fraction(data["r2"]))
    if variant == "sector":
        return SectorIndicator(
            to_fraction(data["r"]), float(data["theta"]), float(data["half_angle"])
        )
    if variant == "product":
        return ProductPair(
            test_function_from_json(data["f"]), test_function_from_json(data["g"])
        )
    raise InputError(f"unknown test function variant {variant!r}")


# --- transforms -------------------------------------------------------------


@dataclass(frozen=True)
class TransformReport:
    value: float
    ambiguous: int
    n_vectors: int


def transform_report(
    s: TranslationSurface, f: TestFunction, budget: Optional[int] = None
) -> TransformReport:
    if isinstance(f, ProductPair):
        inner = pair_transform(s, f.f, f.g, budget=budget)
        return TransformReport(value=inner, ambiguous=0, n_vectors=0)
    hs = enumerate_connections(s, radius=f.support_radius(), budget=budget)
    total = 0
    ambiguous = 0
    vectors = hs.vectors()
    for v in vectors:
        val, amb = f.evaluate_exact(v)
        if amb:
            ambiguous += 1
        else:
            total += val
    return TransformReport(value=float(total), ambiguous=ambiguous, n_vectors=len(vectors))


def transform(s: TranslationSurface, f: TestFunction, budget: Optional[int] = None) -> float:
    """Sum of f over the holonomy set, exact for indicator variants.

    Raises AmbiguousMembershipError if any vector falls within a boundary
    margin; use transform_report to inspect ambiguity counts instead.
    """
    rep = transform_report(s, f, budget=budget)
    if rep.ambiguous:
        raise AmbiguousMembershipError(
            f"{rep.ambiguous} holonomy vectors within the boundary margin",
            ambiguous=rep.ambiguous,
        )
    return rep.value


def pair_transform(
    s: TranslationSurface, f: TestFunction, g: TestFunction, budget: Optional[int] = None
) -> float:
    """Double sum of f(v1) g(v2) over pairs of holonomy vectors.

    For product integrands the double sum factors exactly into the product
    of the single transforms; one enumeration covers both supports.
    """
    r = max(f.support_radius(), g.support_radius())
    hs = enumerate_connections(s, radius=r, budget=budget)
    vectors = hs.vectors()

    def total(fn):
        acc = 0
        for v in vectors:
            val, amb = fn.evaluate_exact(v)
            if amb:
                raise AmbiguousMembershipError("ambiguous membership in pair transform")
            acc += val
        return acc

    return float(total(f)) * float(total(g))


# --- rotational averaging ---------------------------------------------------


@dataclass(frozen=True)
class ARReport:
    value: float
    ambiguous_fraction: float
    quadrature_n: int

    def __float__(self):
        return self.value


def _holonomy_array(s: TranslationSurface, radius: Fraction, budget):
    hs = enumerate_connections(s, radius=radius, budget=budget)
    vecs = sorted(hs.vectors(), key=lambda v: (v.norm_sq(), v.x, v.y))
    if not vecs:
        return np.zeros((0, 2))
    return np.array([[float(v.x), float(v.y)] for v in vecs])


def rotational_average_AR(
    s: TranslationSurface,
    f: TestFunction,
    R: float,
    quadrature_n: int = 256,
    budget: Optional[int] = None,
    delta_num: float = 1e-9,
    ambiguous_tolerance: float = 0.01,
    _points: Optional[np.ndarray] = None,
) -> ARReport:
    """Average of the transform over rotated, diag(R, 1/R)-stretched copies.

    Trapezoidal quadrature over the full rotation; since the surface's
    holonomy set transforms equivariantly, images of the exact vectors are
    tested in floats with the safety margin delta_num and ambiguous points
    are counted, never assigned.
    """
    if quadrature_n < 8:
        raise InputError("quadrature_n must be at least 8")
    if R < 1:
        raise InputError("stretch factor must be >= 1")
    if _points is None:
        pre_radius = f.support_radius() * to_fraction(R)
        pts = _holonomy_array(s, pre_radius, budget)
    else:
        pts = _points
    if pts.shape[0] == 0:
        return ARReport(0.0, 0.0, quadrature_n)
    xs = pts[:, 0]
    ys = pts[:, 1]
    total = 0.0
    ambiguous = 0
    block = max(1, 1 << 22 >> max(pts.shape[0].bit_length(), 1))
    for start in range(0, quadrature_n, block):
        jj = np.arange(start, min(start + block, quadrature_n))
        th = 2.0 * math.pi * jj / quadrature_n
        ct = np.cos(th)[:, None]
        st = np.sin(th)[:, None]
        # a_R r_theta applied to every vector at every grid angle
        ix = R * (ct * xs - st * ys)
        iy = (st * xs + ct * ys) / R
        vals, amb = f.evaluate_batch(ix, iy, delta_num)
        total += float(vals[~amb].sum())
        ambiguous += int(amb.sum())
    frac = ambiguous / (quadrature_n * pts.shape[0])
    if frac > ambiguous_tolerance:
        raise AmbiguousMembershipError(
            f"ambiguous membership fraction {frac:.4g} exceeds tolerance",
            fraction=frac,
        )
    return ARReport(total / quadrature_n, frac, quadrature_n)


@dataclass(frozen=True)
class SandwichReport:
    lower: float
    scaled_count: float
    upper: float
    margin: float
    ambiguous_fraction: float
    theta_r: float

    def ordered_within_margin(self) -> bool:
        return (
            self.lower - self.margin <= self.scaled_count <= self.upper + self.margin
        )


def sector_sandwich(
    s: TranslationSurface,
    R: float,
    theta: float,
    quadrature_n: int = 1024,
    budget: Optional[int] = None,
) -> SandwichReport:
    """Rotational averages of the two triangles enclosing a symmetric
    sector, against the scaled exact count.

    The inner triangle has its corners on the unit circle (height cos
    theta), the outer one has its top edge tangent at the midpoint (height
    1); both map to triangles under the stretch, so their averaged
    transforms bracket (theta_R / pi) N(R) with theta_R = atan(tan theta /
    R^2).
    """
    if not (0 < theta <= math.pi / 8):
        raise InputError("theta must lie in (0, pi/8]")
    if R < 2:
        raise InputError("R must be at least 2")
    sin_t = Fraction(round(math.sin(theta) * _RAY_SCALE), _RAY_SCALE)
    cos_t = Fraction(round(math.cos(theta) * _RAY_SCALE), _RAY_SCALE)
    tan_t = Fraction(round(math.tan(theta) * _RAY_SCALE), _RAY_SCALE)
    w1 = TriangleIndicator(ExactVector(sin_t, cos_t), ExactVector(-sin_t, cos_t))
    w2 = TriangleIndicator(ExactVector(tan_t, Fraction(1)), ExactVector(-tan_t, Fraction(1)))
    r_frac = to_fraction(R)
    pre_radius = w2.support_radius() * r_frac
    pts = _holonomy_array(s, pre_radius, budget)
    theta_r = math.atan(math.tan(theta) / (R * R))
    # The stretched cone has angular width ~2 theta_r; resolve each window
    # with a dozen grid cells (the reported margin carries the residual).
    n_eff = max(quadrature_n, int(12.0 * math.pi / theta_r) + 1)
    lo_n = rotational_average_AR(s, w1, R, n_eff, budget=budget, _points=pts)
    hi_n = rotational_average_AR(s, w2, R, n_eff, budget=budget, _points=pts)
    lo_2n = rotational_average_AR(s, w1, R, 2 * n_eff, budget=budget, _points=pts)
    hi_2n = rotational_average_AR(s, w2, R, 2 * n_eff, budget=budget, _points=pts)
    n_count = len(
        enumerate_connections(s, radius=r_frac, budget=budget).vectors()
    )
    scaled = theta_r / math.pi * n_count
    margin = 2.0 * max(abs(lo_2n.value - lo_n.value), abs(hi_2n.value - hi_n.value))
    margin += (lo_2n.ambiguous_fraction + hi_2n.ambiguous_fraction) * max(n_count, 1)
    # Discretization floor: each vector's window is resolved to one grid cell.
    margin += 2.0 * max(n_count, 1) / (2 * n_eff)
    margin += 1e-9 * max(n_count, 1)
    return SandwichReport(
        lower=lo_2n.value,
        scaled_count=scaled,
        upper=hi_2n.value,
        margin=margin,
        ambiguous_fraction=max(lo_2n.ambiguous_fraction, hi_2n.ambiguous_fraction),
        theta_r=theta_r,
    )


# --- surface classification -------------------------------------------------


@dataclass(frozen=True)
class ClassLabel:
    label: str  # H1 | H2 | Omega0 | Omega1 | Omega2 | Unknown
    shortest_length_sq: Optional[Fraction] = None
    second_length_sq: Optional[Fraction] = None
    cylinder: Optional[Cylinder] = None
    detail: str = ""

    def to_json_dict(self):
        from .exactplane import format_rational

        out = {"label": self.label, "detail": self.detail}
        if self.shortest_length_sq is not None:
            out["shortest_length_sq"] = format_rational(self.shortest_length_sq)
        if self.second_length_sq is not None:
            out["second_length_sq"] = format_rational(self.second_length_sq)
        if self.cylinder is not None:
            out["cylinder"] = {
                "width_sq": format_rational(self.cylinder.width_sq),
                "height_sq": format_rational(self.cylinder.height_sq),
            }
        return out


def _power_leq(x_sq: Fraction, y_sq: Fraction, p: Fraction) -> bool:
    """Exact test sqrt(x_sq) <= sqrt(y_sq)^p for rational p = a/b > 0.

    Equivalent to x_sq^b <= y_sq^a; denominators above 10^4 are refused.
    """
    a, b = p.numerator, p.denominator
    if b > 10_000:
        raise PrecisionLimitError("exponent denominator too large for exact powers")
    return x_sq ** b <= y_sq ** a


def _has_short_loop(s, hs, eps0: Fraction, cylinder_trace, budget):
    """Short homotopically nontrivial closed curve made of enumerated
    connections: a closed connection, a non-backtracking 2-chain, or a
    cylinder core.  Returns (found, unknown)."""
    eps0_sq = eps0 * eps0
    short = [c for c in hs.connections if c.holonomy.norm_sq() < eps0_sq]
    for c in short:
        if c.start == c.end:
            return True, False
    by_endpoints = {}
    for c in short:
        by_endpoints.setdefault((c.start, c.end), []).append(c)
    for c in short:
        mates = by_endpoints.get((c.end, c.start), [])
        if not mates:
            continue
        rev = reverse_of(s, c)
        for m in mates:
            if (
                m.holonomy == rev.holonomy
                and m.crossings == rev.crossings
                and m.start == rev.start
                and m.start_corner == rev.start_corner
            ):
                continue  # exact backtracking is null-homotopic
            if compare_sqrt_sum(
                [c.holonomy.norm_sq(), m.holonomy.norm_sq()], eps0_sq
            ) < 0:
                return True, False
    unknown = False
    for c in short:
        res = detect_cylinder(s, c, cylinder_trace)
        if isinstance(res, Cylinder):
            if res.width_sq < eps0_sq:
                return True, False
        elif isinstance(res, Unknown):
            unknown = True
    return False, unknown


def classify(
    s: TranslationSurface,
    eps0,
    p,
    budget: Optional[int] = None,
    cylinder_trace=None,
) -> ClassLabel:
    """Place a surface in the short-curve decomposition.

    H1: no connection shorter than eps0.  H2: short connections but no
    short nontrivial closed curve (closed connection, non-backtracking
    two-chain, or cylinder core below eps0).  Otherwise, with gamma the
    shortest connection and eps the second shortest nonhomologous length:
    Omega0 when eps <= |gamma|^p, else Omega2 when gamma bounds a cylinder,
    else Omega1; Unknown when cylinder tracing exhausts its budget.
    """
    eps0 = to_fraction(eps0)
    if eps0 <= 0:
        raise InputError("eps0 must be positive")
    p = to_fraction(p)
    if not (0 < p < 1):
        raise InputError("p must lie in (0, 1)")
    if cylinder_trace is None:
        cylinder_trace = 64 * eps0 + 64
    s.validate()
    gamma = shortest(s, budget=budget)
    g_sq = gamma.length_sq()
    if g_sq >= eps0 * eps0:
        return ClassLabel("H1", shortest_length_sq=g_sq, detail="no short connection")
    hs = enumerate_connections(s, radius=eps0, budget=budget)
    found, unknown = _has_short_loop(s, hs, eps0, cylinder_trace, budget)
    if unknown and not found:
        return ClassLabel("Unknown", shortest_length_sq=g_sq, detail="cylinder trace budget")
    if not found:
        return ClassLabel("H2", shortest_length_sq=g_sq, detail="short connections, no short loop")
    second = second_shortest_nonhomologous(s, budget=budget)
    e_sq = second.length_sq()
    if _power_leq(e_sq, g_sq, p):
        return ClassLabel(
            "Omega0", shortest_length_sq=g_sq, second_length_sq=e_sq,
            detail="second shortest below power of shortest",
        )
    res = detect_cylinder(s, gamma, cylinder_trace)
    if isinstance(res, Cylinder):
        return ClassLabel(
            "Omega2", shortest_length_sq=g_sq, second_length_sq=e_sq, cylinder=res,
            detail="shortest bounds a cylinder",
        )
    if isinstance(res, NotOnBoundary):
        return ClassLabel(
            "Omega1", shortest_length_sq=g_sq, second_length_sq=e_sq,
            detail="shortest not on a cylinder boundary",
        )
    return ClassLabel("Unknown", shortest_length_sq=g_sq, detail="cylinder trace budget")
