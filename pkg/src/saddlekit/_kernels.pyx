# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernel: primitive lattice points of a sheared lattice in a
disc.  Must stay numerically identical to the pure fallback: the membership
expression (a*p + b*q)**2 + (c*p + d*q)**2 <= radius**2 is evaluated with
the same operation order in both.
"""

from libc.math cimport sqrt, floor


cdef inline long long _gcd(long long a, long long b) nogil:
    cdef long long t
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        t = a % b
        a = b
        b = t
    return a


def count_primitive_in_disc(double a, double b, double c, double d, double radius):
    """Number of primitive (p, q) in Z^2 with |M (p, q)| <= radius for
    M = [[a, b], [c, d]]."""
    cdef double r2 = radius * radius
    cdef double fr = a * a + b * b + c * c + d * d
    cdef double det = a * d - b * c
    if det < 0:
        det = -det
    if det == 0:
        raise ValueError("matrix is singular")
    cdef long long qmax = <long long> floor(radius * sqrt(fr) / det) + 1
    cdef double A = a * a + c * c
    cdef double B = 2.0 * (a * b + c * d)
    cdef double C = b * b + d * d
    cdef long long count = 0
    cdef long long p, q, plo, phi
    cdef double disc, mid, half, t1, t2
    with nogil:
        for q in range(-qmax, qmax + 1):
            disc = B * B * q * q - 4.0 * A * (C * q * q - r2)
            if disc < 0:
                continue
            half = sqrt(disc) / (2.0 * A)
            mid = -B * q / (2.0 * A)
            plo = <long long> floor(mid - half) - 1
            phi = <long long> floor(mid + half) + 1
            for p in range(plo, phi + 1):
                if _gcd(p, q) != 1:
                    continue
                t1 = a * p + b * q
                t2 = c * p + d * q
                if t1 * t1 + t2 * t2 <= r2:
                    count += 1
    return count
