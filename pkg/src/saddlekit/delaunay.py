"""L1 (taxicab) Delaunay triangulations by exact edge flips.

The circumscribing diamond of a triangle is the L1 disc through its three
vertices; it is found by case analysis over assignments of each vertex to
one of the four diamond sides (each assignment is a linear system).  An
interior edge is locally Delaunay when each adjacent triangle's diamond has
the opposite vertex outside or on its boundary; flipping repeats until no
edge violates this.  Everything is decided exactly over the rationals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import DegenerateDiamondError, FlipCycleError, InputError
from .exactplane import ExactVector
from .surface import Slot, TranslationSurface, Triangle

_F0 = Fraction(0)
_SIDES = ((1, 1), (-1, 1), (-1, -1), (1, -1))  # NE, NW, SW, SE


@dataclass(frozen=True, slots=True)
class DiamondCertificate:
    center: ExactVector
    radius_l1: Fraction

    def contains_strictly(self, p: ExactVector) -> bool:
        return (p - self.center).norm_l1() < self.radius_l1

    def on_boundary(self, p: ExactVector) -> bool:
        return (p - self.center).norm_l1() == self.radius_l1

    def to_json_dict(self):
        from .exactplane import format_rational

        return {
            "center": self.center.to_json(),
            "radius_l1": format_rational(self.radius_l1),
        }


def _solve3(rows):
    """Solve a 3x3 rational system by Cramer; None if singular."""
    (a11, a12, a13, b1), (a21, a22, a23, b2), (a31, a32, a33, b3) = rows
    det = (
        a11 * (a22 * a33 - a23 * a32)
        - a12 * (a21 * a33 - a23 * a31)
        + a13 * (a21 * a32 - a22 * a31)
    )
    if det == 0:
        return None
    dx = (
        b1 * (a22 * a33 - a23 * a32)
        - a12 * (b2 * a33 - a23 * b3)
        + a13 * (b2 * a32 - a22 * b3)
    )
    dy = (
        a11 * (b2 * a33 - a23 * b3)
        - b1 * (a21 * a33 - a23 * a31)
        + a13 * (a21 * b3 - b2 * a31)
    )
    dz = (
        a11 * (a22 * b3 - b2 * a32)
        - a12 * (a21 * b3 - b2 * a31)
        + b1 * (a21 * a32 - a22 * a31)
    )
    return (dx / det, dy / det, dz / det)


def diamond_of(p1: ExactVector, p2: ExactVector, p3: ExactVector) -> DiamondCertificate:
    """Circumscribing diamond (L1 circumdisc) of three points, exactly.

    When two points share a slope +-1 line, circumscribing diamonds slide in
    a one-parameter family; the admissible solution is the member with at
    most one point per open side (points may share corners), which pins the
    family to its corner-touching end.  Raises DegenerateDiamondError for
    collinear points, when no admissible diamond exists, or when several
    distinct admissible diamonds remain.
    """
    if (p2 - p1).cross(p3 - p1) == 0:
        raise DegenerateDiamondError("collinear points have no circumscribing diamond")
    pts = (p1, p2, p3)
    solutions = []
    for s1 in _SIDES:
        for s2 in _SIDES:
            for s3 in _SIDES:
                assign = (s1, s2, s3)
                rows = [
                    (
                        Fraction(ex),
                        Fraction(ey),
                        Fraction(1),
                        ex * p.x + ey * p.y,
                    )
                    for (ex, ey), p in zip(assign, pts)
                ]
                sol = _solve3(rows)
                if sol is None:
                    # Underdetermined assignments belong to sliding families;
                    # their admissible ends reappear as isolated solutions of
                    # corner-compatible assignments.
                    continue
                cx, cy, r = sol
                if r <= 0:
                    continue
                center = ExactVector(cx, cy)
                if not _assignment_consistent(center, r, assign, pts):
                    continue
                if not _open_sides_simple(center, r, pts):
                    continue
                key = (cx, cy, r)
                if key not in [s[0] for s in solutions]:
                    solutions.append((key, DiamondCertificate(center, r)))
    if not solutions:
        raise DegenerateDiamondError("no admissible circumscribing diamond")
    if len(solutions) > 1:
        raise DegenerateDiamondError(
            "ambiguous circumscribing diamond (multiple solutions)",
            count=len(solutions),
        )
    return solutions[0][1]


def _assignment_consistent(center, r, assign, pts) -> bool:
    for (ex, ey), p in zip(assign, pts):
        dx = p.x - center.x
        dy = p.y - center.y
        if ex * dx < 0 or ey * dy < 0:
            return False
        if ex * dx + ey * dy != r:
            return False
    return True


def _open_sides_simple(center, r, pts) -> bool:
    """At most one of the points on the open part of each diamond side."""
    for ex, ey in _SIDES:
        on_open = 0
        for p in pts:
            dx = p.x - center.x
            dy = p.y - center.y
            if ex * dx > 0 and ey * dy > 0 and ex * dx + ey * dy == r:
                on_open += 1
        if on_open > 1:
            return False
    return True


# --- surface-level local Delaunay test and flips ---------------------------


def _developed_quad(tris, glue, slot: Slot):
    """Positions (a, b, c, d) for the two triangles adjacent to an edge,
    developed into a common plane: edge a->b, c the apex of slot's triangle,
    d the apex of the neighbor."""
    t, i = slot
    u, j = glue[slot]
    e = tris[t]
    a = ExactVector(_F0, _F0)
    b = e[i]
    c = e[i] + e[(i + 1) % 3]
    f = tris[u]
    # neighbor corners relative: corner j at b, corner j+1 at a
    std = [ExactVector(_F0, _F0), f[0], f[0] + f[1]]
    offset = b - std[j]
    d = offset + std[(j + 2) % 3]
    return a, b, c, d


def is_locally_delaunay(s_or_tris, slot: Slot, glue: Optional[Dict[Slot, Slot]] = None) -> bool:
    """Local L1 Delaunay test across an interior edge.

    True iff the opposite vertex of each adjacent triangle lies outside or
    on the other triangle's circumscribing diamond.  On-boundary is
    accepted.  Accepts a TranslationSurface or raw (triangles, gluings).
    """
    if isinstance(s_or_tris, TranslationSurface):
        tris = [list(t.edges) for t in s_or_tris.triangles]
        glue = s_or_tris.gluings
    else:
        tris = s_or_tris
    a, b, c, d = _developed_quad(tris, glue, slot)
    dia1 = diamond_of(a, b, c)
    if dia1.contains_strictly(d):
        return False
    dia2 = diamond_of(b, a, d)
    if dia2.contains_strictly(c):
        return False
    return True


def delaunay_edge_vectors(dt: "DelaunayTriangulation") -> set:
    return {dt.surface.edge_vector(slot) for slot in dt.surface.slots()}


@dataclass
class DelaunayTriangulation:
    surface: TranslationSurface
    certificates: Tuple[DiamondCertificate, ...]
    flip_count: int
    vertex_of_corner: Dict[Slot, int]  # vertex ids of the input surface

    def to_json_dict(self):
        data = self.surface.to_json_dict()
        data["certificates"] = [c.to_json_dict() for c in self.certificates]
        data["flip_count"] = self.flip_count
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


def _flip(tris, glue, vertex, slot: Slot):
    """Flip the edge at slot in place; returns the four outer edge slots of
    the flipped quad (new labels)."""
    t, i = slot
    u, j = glue[slot]
    if (u, j) == (t, i):
        raise InputError("cannot flip a self-glued slot")
    a, b, c, d = _developed_quad(tris, glue, slot)
    # Quad ccw cycle a -> d -> b -> c; new diagonal d -> c.
    if (b - d).cross(c - b) <= 0 or (c - d).cross(a - c) <= 0:
        raise DegenerateDiamondError("flip would create a degenerate triangle")

    va = vertex[(t, i)]
    vb = vertex[(t, (i + 1) % 3)]
    vc = vertex[(t, (i + 2) % 3)]
    vd = vertex[(u, (j + 2) % 3)]

    old_outer = [
        (t, (i + 1) % 3),  # b -> c
        (t, (i + 2) % 3),  # c -> a
        (u, (j + 1) % 3),  # a -> d
        (u, (j + 2) % 3),  # d -> b
    ]
    partners = [glue[s] for s in old_outer]
    old_new = {
        old_outer[0]: (t, 1),
        old_outer[1]: (u, 1),
        old_outer[2]: (u, 2),
        old_outer[3]: (t, 0),
    }
    # New triangles: t := (d, b, c), u := (d, c, a).
    tris[t] = [b - d, c - b, d - c]
    tris[u] = [c - d, a - c, d - a]
    # Rebuild gluings; partners that were themselves outer edges of this
    # quad are remapped to their new labels.
    for s_old, partner in zip(old_outer, partners):
        s_new = old_new[s_old]
        partner = old_new.get(partner, partner)
        glue[s_new] = partner
        glue[partner] = s_new
    glue[(t, 2)] = (u, 0)
    glue[(u, 0)] = (t, 2)

    vertex[(t, 0)], vertex[(t, 1)], vertex[(t, 2)] = vd, vb, vc
    vertex[(u, 0)], vertex[(u, 1)], vertex[(u, 2)] = vd, vc, va
    return [old_new[s] for s in old_new] + [(t, 2)]


def _euclidean_needs_flip(tris, glue, slot) -> bool:
    a, b, c, d = _developed_quad(tris, glue, slot)
    return _incircle_strict(a, b, c, d)


def _flip_until_stable(tris, glue, vertex, decide, max_flips, flips_so_far=0) -> int:
    from collections import deque

    pending = deque(sorted({tuple(sorted((sl, glue[sl])))[0] for sl in glue}))
    seen_states = set()
    flips = flips_so_far
    while pending:
        slot = pending.popleft()
        if slot not in glue:
            continue
        if not decide(tris, glue, slot):
            continue
        if flips >= max_flips:
            raise FlipCycleError("flip budget exhausted", flips=flips)
        state = _state_key(tris, glue)
        if state in seen_states:
            raise FlipCycleError("flip cycle detected", flips=flips)
        seen_states.add(state)
        touched = _flip(tris, glue, vertex, slot)
        flips += 1
        for ts in touched:
            pending.append(ts)
    return flips


def delaunay_l1(
    s: TranslationSurface, max_flips: Optional[int] = None
) -> DelaunayTriangulation:
    """Flip non-locally-Delaunay edges (FIFO) until none remain.

    Runs a Euclidean Delaunay pass first (exact incircle flips, which always
    terminate) and then L1 flips from that start; cocircular quadruples are
    accepted on-boundary with ties broken toward the strictly shorter
    diagonal.  A repeated global state raises FlipCycleError; the final
    triangulation is re-verified by a full scan and certified per triangle.
    """
    s.validate()
    tris = [list(t.edges) for t in s.triangles]
    glue = dict(s.gluings)
    vertex = {(t, c): s.corner_vertex((t, c)) for t in range(s.n_triangles()) for c in range(3)}
    if max_flips is None:
        max_flips = 400 + 60 * len(tris)

    flips = _flip_until_stable(tris, glue, vertex, _euclidean_needs_flip, max_flips)
    flips = _flip_until_stable(tris, glue, vertex, _needs_flip, max_flips, flips)

    surface = TranslationSurface([Triangle(tuple(e)) for e in tris], glue)
    surface.validate()
    certificates = []
    for t in range(len(tris)):
        p0 = ExactVector(_F0, _F0)
        p1 = tris[t][0]
        p2 = tris[t][0] + tris[t][1]
        certificates.append(diamond_of(p0, p1, p2))
    for slot in glue:
        if not is_locally_delaunay(tris, slot, glue):
            raise FlipCycleError("post-hoc Delaunay verification failed", slot=slot)
    # Consistency: the maintained vertex labels must refine to the same
    # partition the new surface derives on its own.
    derived = {}
    for corner, vid in vertex.items():
        derived.setdefault(surface.corner_vertex(corner), set()).add(vid)
    for group in derived.values():
        if len(group) != 1:
            raise InputError("vertex tracking diverged during flips")
    return DelaunayTriangulation(
        surface=surface,
        certificates=tuple(certificates),
        flip_count=flips,
        vertex_of_corner=vertex,
    )


def _incircle_strict(a, b, c, d) -> bool:
    """Exact Euclidean incircle test: d strictly inside the circumcircle of
    the ccw triangle (a, b, c)."""
    ax, ay = a.x - d.x, a.y - d.y
    bx, by = b.x - d.x, b.y - d.y
    cx, cy = c.x - d.x, c.y - d.y
    na = ax * ax + ay * ay
    nb = bx * bx + by * by
    nc = cx * cx + cy * cy
    det = (
        ax * (by * nc - nb * cy)
        - ay * (bx * nc - nb * cx)
        + na * (bx * cy - by * cx)
    )
    return det > 0


class _Feasible1D:
    """Feasible set of linear constraints alpha * t + beta >= 0 (or > 0)."""

    def __init__(self):
        self.lo = None  # Fraction or None for -inf
        self.hi = None
        self.empty = False
        self.strict = []  # (alpha, beta) strict constraints

    def add(self, alpha: Fraction, beta: Fraction, strict: bool = False):
        if self.empty:
            return
        if alpha == 0:
            if beta < 0 or (strict and beta == 0):
                self.empty = True
            return
        bound = -beta / alpha
        if alpha > 0:
            if self.lo is None or bound > self.lo:
                self.lo = bound
        else:
            if self.hi is None or bound < self.hi:
                self.hi = bound
        if strict:
            self.strict.append((alpha, beta))
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            self.empty = True

    def nonempty(self) -> bool:
        if self.empty:
            return False
        if self.lo is not None and self.hi is not None and self.lo == self.hi:
            t = self.lo
            return all(al * t + be > 0 for al, be in self.strict)
        return True

    def snapshot(self):
        return (self.lo, self.hi, self.empty, tuple(self.strict))

    def restore(self, snap):
        self.lo, self.hi, self.empty, strict = snap
        self.strict = list(strict)


def _edge_empty_diamond_exists(a, b, c, d) -> bool:
    """Exists an L1 disc with a, b on its boundary and c, d outside or on.

    Searches side assignments for a and b; each yields a line of diamond
    parameters, and all side/exclusion conditions are linear along it.
    """
    for sa in _SIDES:
        for sb in _SIDES:
            if sa == sb:
                continue  # two points on one side line: excluded by genericity
            sax, say = Fraction(sa[0]), Fraction(sa[1])
            sbx, sby = Fraction(sb[0]), Fraction(sb[1])
            e1 = sax * a.x + say * a.y
            e2 = sbx * b.x + sby * b.y
            # Null direction of [[sax, say, 1], [sbx, sby, 1]].
            n = (say - sby, sbx - sax, sax * sby - say * sbx)
            det = sax * sby - say * sbx
            if det != 0:
                p0 = (
                    (e1 * sby - e2 * say) / det,
                    (sax * e2 - sbx * e1) / det,
                    Fraction(0),
                )
            else:
                # Opposite sides: solve with cy = 0 using columns (cx, r).
                det2 = sax - sbx
                if det2 == 0:
                    continue
                cx0 = (e1 - e2) / det2
                p0 = (cx0, Fraction(0), e1 - sax * cx0)

            def lin(coeff_x, coeff_y, coeff_r, const):
                alpha = coeff_x * n[0] + coeff_y * n[1] + coeff_r * n[2]
                beta = coeff_x * p0[0] + coeff_y * p0[1] + coeff_r * p0[2] + const
                return alpha, beta

            base = _Feasible1D()
            base.add(*lin(Fraction(0), Fraction(0), Fraction(1), Fraction(0)), strict=True)
            # Side-consistency: s_x (p.x - cx) >= 0 etc.
            base.add(*lin(-sax, Fraction(0), Fraction(0), sax * a.x))
            base.add(*lin(Fraction(0), -say, Fraction(0), say * a.y))
            base.add(*lin(-sbx, Fraction(0), Fraction(0), sbx * b.x))
            base.add(*lin(Fraction(0), -sby, Fraction(0), sby * b.y))
            if not base.nonempty():
                continue
            snap = base.snapshot()
            for ec in _SIDES:
                for ed in _SIDES:
                    base.restore(snap)
                    ecx, ecy = Fraction(ec[0]), Fraction(ec[1])
                    edx, edy = Fraction(ed[0]), Fraction(ed[1])
                    base.add(*lin(-ecx, -ecy, Fraction(-1), ecx * c.x + ecy * c.y))
                    base.add(*lin(-edx, -edy, Fraction(-1), edx * d.x + edy * d.y))
                    if base.nonempty():
                        return True
    return False


def _needs_flip(tris, glue, slot) -> bool:
    """L1 flip decision for one edge: flip when no L1 disc through the edge
    endpoints excludes both apexes (and the quad is strictly convex), with
    the cocircular tie broken toward the strictly shorter diagonal."""
    a, b, c, d = _developed_quad(tris, glue, slot)
    convex = (b - d).cross(c - b) > 0 and (c - d).cross(a - c) > 0
    # Fast path: an existing circumdisc of either adjacent triangle decides.
    for p, q, apex, other in ((a, b, c, d), (b, a, d, c)):
        try:
            dia = diamond_of(p, q, apex)
        except DegenerateDiamondError:
            continue
        if dia.contains_strictly(other):
            return convex
        if dia.on_boundary(other):
            # Degenerate quadruple: prefer the strictly shorter diagonal.
            return convex and (c - d).norm_sq() < (b - a).norm_sq()
        return False
    if not convex:
        return False
    return not _edge_empty_diamond_exists(a, b, c, d)


def _state_key(tris, glue):
    edges = tuple(tuple((e.x, e.y) for e in tri) for tri in tris)
    gl = tuple(sorted(glue.items()))
    return hash((edges, gl))


# --- planar brute force (testing oracle) -----------------------------------


def planar_empty_diamond_triples(points: List[ExactVector]):
    """All point triples whose circumscribing diamond strictly contains no
    other point; the planar L1 Delaunay triangles for generic sets."""
    n = len(points)
    triples = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                try:
                    dia = diamond_of(points[i], points[j], points[k])
                except DegenerateDiamondError:
                    continue
                if any(
                    dia.contains_strictly(points[m])
                    for m in range(n)
                    if m not in (i, j, k)
                ):
                    continue
                triples.append(frozenset((i, j, k)))
    return triples
