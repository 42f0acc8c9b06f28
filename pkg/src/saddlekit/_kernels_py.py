"""Pure-numpy fallback for the lattice counting kernel.

Keeps the exact same membership expression as the compiled version so both
backends return identical counts on identical float inputs.
"""

from __future__ import annotations

import math

import numpy as np


def count_primitive_in_disc(a: float, b: float, c: float, d: float, radius: float) -> int:
    r2 = radius * radius
    fr = a * a + b * b + c * c + d * d
    det = abs(a * d - b * c)
    if det == 0:
        raise ValueError("matrix is singular")
    qmax = int(math.floor(radius * math.sqrt(fr) / det)) + 1
    A = a * a + c * c
    B = 2.0 * (a * b + c * d)
    C = b * b + d * d

    q = np.arange(-qmax, qmax + 1, dtype=np.int64)
    disc = B * B * (q * q).astype(np.float64) - 4.0 * A * (C * (q * q) - r2)
    keep = disc >= 0
    q = q[keep]
    if q.size == 0:
        return 0
    disc = disc[keep]
    half = np.sqrt(disc) / (2.0 * A)
    mid = -B * q / (2.0 * A)
    plo = np.floor(mid - half).astype(np.int64) - 1
    phi = np.floor(mid + half).astype(np.int64) + 1
    counts = phi - plo + 1
    total = int(counts.sum())
    ps = np.concatenate([np.arange(lo, hi + 1) for lo, hi in zip(plo, phi)]) if total else np.zeros(0, np.int64)
    qs = np.repeat(q, counts)
    prim = np.gcd(np.abs(ps), np.abs(qs)) == 1
    t1 = a * ps + b * qs
    t2 = c * ps + d * qs
    inside = t1 * t1 + t2 * t2 <= r2
    return int(np.count_nonzero(prim & inside))
