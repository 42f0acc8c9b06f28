"""Exact rational planar arithmetic and integer-lattice primitives.

All geometric decisions elsewhere in the package reduce to exact sign or
ordering tests on the rationals produced here (squared Euclidean norms, L1
norms, cross products).  Floating point appears only in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .errors import InputError, PrecisionLimitError, SingularMatrixError

Rational = Union[Fraction, int, str]


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions, "num/den" strings and floats to Fraction.

    Floats go through their shortest decimal repr, so 0.05 means 1/20, not
    the IEEE-754 neighbor with a 2**55 denominator.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, str):
        return Fraction(x.replace("−", "-").strip())
    raise InputError(f"cannot interpret {x!r} as a rational")


def format_rational(q: Fraction) -> str:
    """Canonical serialization: "n" for integers, "num/den" otherwise."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, slots=True)
class ExactVector:
    """Planar vector with exact rational coordinates."""

    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x: Rational, y: Rational) -> "ExactVector":
        return cls(to_fraction(x), to_fraction(y))

    def __add__(self, other: "ExactVector") -> "ExactVector":
        return ExactVector(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "ExactVector") -> "ExactVector":
        return ExactVector(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "ExactVector":
        return ExactVector(-self.x, -self.y)

    def scale(self, c: Rational) -> "ExactVector":
        c = to_fraction(c)
        return ExactVector(self.x * c, self.y * c)

    def dot(self, other: "ExactVector") -> Fraction:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "ExactVector") -> Fraction:
        return self.x * other.y - self.y * other.x

    def norm_sq(self) -> Fraction:
        return self.x * self.x + self.y * self.y

    def norm_l1(self) -> Fraction:
        return abs(self.x) + abs(self.y)

    def perp(self) -> "ExactVector":
        """Counterclockwise quarter turn."""
        return ExactVector(-self.y, self.x)

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def as_floats(self) -> tuple:
        return (float(self.x), float(self.y))

    def to_json(self) -> list:
        return [format_rational(self.x), format_rational(self.y)]

    @classmethod
    def from_json(cls, data) -> "ExactVector":
        if not isinstance(data, (list, tuple)) or len(data) != 2:
            raise InputError(f"vector must be a 2-element list, got {data!r}")
        return cls(to_fraction(data[0]), to_fraction(data[1]))

    def __str__(self):
        return f"({format_rational(self.x)}, {format_rational(self.y)})"


ZERO = ExactVector(Fraction(0), Fraction(0))


@dataclass(frozen=True, slots=True)
class ExactMatrix:
    """2x2 matrix with exact rational entries, acting on column vectors."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @classmethod
    def of(cls, a: Rational, b: Rational, c: Rational, d: Rational) -> "ExactMatrix":
        return cls(to_fraction(a), to_fraction(b), to_fraction(c), to_fraction(d))

    @classmethod
    def identity(cls) -> "ExactMatrix":
        return cls.of(1, 0, 0, 1)

    @classmethod
    def diagonal(cls, p: Rational, q: Rational) -> "ExactMatrix":
        return cls.of(p, 0, 0, q)

    @classmethod
    def shear(cls, s: Rational) -> "ExactMatrix":
        return cls.of(1, s, 0, 1)

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def is_sl2(self) -> bool:
        return self.det() == 1

    def apply(self, v: ExactVector) -> ExactVector:
        return ExactVector(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)

    def compose(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "ExactMatrix":
        det = self.det()
        if det == 0:
            raise SingularMatrixError("matrix is singular")
        return ExactMatrix(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def as_floats(self) -> tuple:
        return (float(self.a), float(self.b), float(self.c), float(self.d))


@dataclass(frozen=True, slots=True)
class FloatMatrix:
    """2x2 float matrix for report-side transformations (rotations, a_R)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for entry in (self.a, self.b, self.c, self.d):
            if not math.isfinite(entry):
                raise InputError("FloatMatrix entries must be finite")

    @classmethod
    def rotation(cls, theta: float) -> "FloatMatrix":
        ct, st = math.cos(theta), math.sin(theta)
        return cls(ct, -st, st, ct)

    @classmethod
    def stretch(cls, r: float) -> "FloatMatrix":
        """diag(r, 1/r)."""
        return cls(r, 0.0, 0.0, 1.0 / r)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def apply(self, v) -> tuple:
        if isinstance(v, ExactVector):
            x, y = float(v.x), float(v.y)
        else:
            x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def compose(self, other: "FloatMatrix") -> "FloatMatrix":
        return FloatMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)


def apply_matrix(m, v):
    """Linear action of an ExactMatrix or FloatMatrix on a vector.

    Exact in, exact out when both operands are exact; FloatMatrix returns a
    float pair.
    """
    if isinstance(m, ExactMatrix) and isinstance(v, ExactVector):
        return m.apply(v)
    if isinstance(m, FloatMatrix):
        return m.apply(v)
    raise InputError(f"unsupported operands {type(m).__name__}, {type(v).__name__}")


def euler_phi(n: int) -> int:
    """Number of 1 <= k <= n coprime to n, by trial-division factorization."""
    if n < 1:
        raise InputError("euler_phi requires n >= 1")
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


def primitive_points_in_disc(radius: Rational) -> list:
    """All primitive integer vectors (p, q) with p^2 + q^2 <= radius^2.

    The comparison is exact: the radius is a rational and only its square is
    used.  Points are returned sorted by (norm^2, x, y).
    """
    r = to_fraction(radius)
    if r <= 0:
        raise InputError("radius must be positive")
    r_sq = r * r
    bound = math.isqrt(r_sq.numerator // r_sq.denominator) + 1
    out = []
    for p in range(-bound, bound + 1):
        for q in range(-bound, bound + 1):
            if math.gcd(abs(p), abs(q)) != 1:
                continue
            if p * p + q * q <= r_sq:
                out.append(ExactVector(Fraction(p), Fraction(q)))
    out.sort(key=lambda v: (v.norm_sq(), v.x, v.y))
    return out


# --- certified comparisons of sums of square roots ------------------------
#
# Edge lengths are square roots of rationals.  Comparing a sum of such
# lengths against another root is done exactly for one or two terms, and by
# directed-rounding dyadic intervals (doubling precision, capped) otherwise.


def sqrt_bounds(q: Fraction, prec: int) -> tuple:
    """Dyadic lower/upper bounds for sqrt(q) with error < 2**-prec."""
    if q < 0:
        raise InputError("sqrt of negative rational")
    if q == 0:
        return (Fraction(0), Fraction(0))
    scale = 1 << prec
    n = q.numerator * q.denominator * scale * scale
    root = math.isqrt(n)
    lo = Fraction(root, q.denominator * scale)
    hi = Fraction(root + 1, q.denominator * scale)
    return (lo, hi)


def is_perfect_square(q: Fraction):
    """Return sqrt(q) as a Fraction if q is a square of a rational, else None."""
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def compare_sqrt_sum(terms: Iterable[Fraction], bound_sq: Fraction, max_bits: int = 256) -> int:
    """Sign of (sum_i sqrt(t_i)) - sqrt(bound_sq), decided exactly or by
    certified intervals.

    Returns -1, 0 or +1.  Exact routes: all-square terms, and the two-term
    case via (a+b)^2 vs c with the cross term 2*sqrt(t0*t1) squared away.
    Raises PrecisionLimitError if still undecided at max_bits (which can only
    happen at exact equality of irrational sums).
    """
    terms = [to_fraction(t) for t in terms]
    bound_sq = to_fraction(bound_sq)
    if any(t < 0 for t in terms) or bound_sq < 0:
        raise InputError("compare_sqrt_sum needs nonnegative radicands")

    roots = [is_perfect_square(t) for t in terms]
    if all(r is not None for r in roots):
        total = sum(roots, Fraction(0))
        diff = total * total - bound_sq
        return (diff > 0) - (diff < 0)

    irrational = [t for t, r in zip(terms, roots) if r is None]
    rational_part = sum((r for r in roots if r is not None), Fraction(0))
    if len(irrational) == 1:
        # Compare (rational_part + sqrt(t))^2 = rp^2 + t + 2 rp sqrt(t) vs B.
        t = irrational[0]
        lhs_known = rational_part * rational_part + t
        # remaining: 2*rp*sqrt(t) vs B - lhs_known
        rem = bound_sq - lhs_known
        coeff = 2 * rational_part
        # coeff * sqrt(t) vs rem, with coeff >= 0
        if coeff == 0:
            diff = t - bound_sq
            return (diff > 0) - (diff < 0)
        if rem < 0:
            return 1
        left = coeff * coeff * t
        right = rem * rem
        return (left > right) - (left < right)
    if len(irrational) == 2 and rational_part == 0:
        # sqrt(x) + sqrt(y) vs sqrt(B): square once, isolate the cross term.
        x, y = irrational
        rem = bound_sq - x - y
        if rem < 0:
            return 1
        left = 4 * x * y
        right = rem * rem
        return (left > right) - (left < right)

    prec = 64
    while prec <= max_bits:
        lo = Fraction(0)
        hi = Fraction(0)
        for t in terms:
            l, h = sqrt_bounds(t, prec)
            lo += l
            hi += h
        bl, bh = sqrt_bounds(bound_sq, prec)
        if hi < bl:
            return -1
        if lo > bh:
            return 1
        prec *= 2
    raise PrecisionLimitError(
        f"sqrt-sum comparison undecided at {max_bits} bits", terms=len(terms)
    )
