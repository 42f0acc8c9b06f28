"""Saddle connection enumeration and directional geometry.

Enumeration develops triangles into the plane along a queue of
(triangle, direction-wedge) states rooted at each vertex corner.  A state
carries the developed edge just crossed and the open wedge of directions
still visible from the apex; the neighbor's new vertex either splits the
wedge (and may be emitted as a connection) or passes it through.  A state is
pruned when the visible part of its crossed edge is entirely farther than
the search radius.  Every decision is an exact sign or ordering test on
rationals.

The homology class of an emitted connection is the chain of triangulation
edges along the right-hand boundary of the developed triangle strip (the
strip's two boundary paths differ by triangle boundaries, hence are
homologous), reduced to canonical form.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import InputError, ResourceLimitError
from .exactplane import ExactVector, to_fraction
from .homology import EdgeHomology
from .surface import Slot, TranslationSurface

_F0 = Fraction(0)
_ORIGIN = ExactVector(_F0, _F0)

DEFAULT_BUDGET = 500_000


def default_budget() -> int:
    env = os.environ.get("SADDLEKIT_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"SADDLEKIT_BUDGET must be an integer, got {env!r}")
    return DEFAULT_BUDGET


@dataclass(frozen=True, slots=True)
class SaddleConnection:
    holonomy: ExactVector
    start: int
    end: int
    crossings: Tuple[Slot, ...]
    homology_class: Tuple[int, ...]
    start_corner: Slot

    def length_sq(self) -> Fraction:
        return self.holonomy.norm_sq()

    def sort_key(self):
        h = self.holonomy
        return (h.norm_sq(), h.x, h.y, self.start, self.end, self.crossings)

    def __str__(self):
        return f"SaddleConnection({self.holonomy}, {self.start}->{self.end})"


@dataclass(frozen=True)
class HolonomySet:
    radius_sq: Fraction
    connections: Tuple[SaddleConnection, ...]

    def vectors(self) -> frozenset:
        return frozenset(c.holonomy for c in self.connections)

    def __len__(self):
        return len(self.connections)

    def csv_rows(self) -> List[List]:
        rows = []
        for c in self.connections:
            h, n = c.holonomy, c.length_sq()
            rows.append(
                [
                    h.x.numerator,
                    h.x.denominator,
                    h.y.numerator,
                    h.y.denominator,
                    n.numerator,
                    n.denominator,
                    c.start,
                    c.end,
                ]
            )
        return rows

    CSV_HEADER = ["x_num", "x_den", "y_num", "y_den", "len_sq_num", "len_sq_den", "start", "end"]


def _std_corners(s: TranslationSurface, t: int):
    return s.triangles[t].corner_positions()


def _seg_min_dist_sq(p: ExactVector, q: ExactVector) -> Fraction:
    """Exact squared distance from the origin to segment [p, q]."""
    d = q - p
    dd = d.norm_sq()
    if dd == 0:
        return p.norm_sq()
    t = -p.dot(d) / dd
    if t <= 0:
        return p.norm_sq()
    if t >= 1:
        return q.norm_sq()
    return (p + d.scale(t)).norm_sq()


def _ray_segment_point(dirv: ExactVector, p: ExactVector, q: ExactVector) -> ExactVector:
    """Intersection of ray {t * dirv} with segment [p, q] (assumed to cross)."""
    cp = dirv.cross(p)
    cq = dirv.cross(q)
    denom = cp - cq
    if denom == 0:
        raise InputError("segment parallel to ray")
    t = cp / denom
    return p + (q - p).scale(t)


def _visible_min_dist_sq(x, y, a, b) -> Fraction:
    """Min distance^2 from apex to the part of segment [x, y] inside wedge (a, b)."""
    px = x if a.cross(x) >= 0 else _ray_segment_point(a, x, y)
    py = y if y.cross(b) >= 0 else _ray_segment_point(b, x, y)
    return _seg_min_dist_sq(px, py)


class _Enumerator:
    def __init__(self, s: TranslationSurface, radius_sq: Fraction, budget: int):
        s.validate()
        self.s = s
        self.r2 = radius_sq
        self.budget = budget
        self.homology = EdgeHomology(s)
        self.out: List[SaddleConnection] = []
        self.states = 0

    def run(self) -> List[SaddleConnection]:
        s = self.s
        for t in range(s.n_triangles()):
            corners = _std_corners(s, t)
            for c in range(3):
                e = s.triangles[t].edges[c]
                if e.norm_sq() <= self.r2:
                    self._emit_edge(t, c)
        for t in range(s.n_triangles()):
            for c in range(3):
                self._search_corner(t, c)
        self.out.sort(key=lambda c: c.sort_key())
        dedup = []
        seen = set()
        for c in self.out:
            # start_corner participates in identity: distinct parallel
            # segments (e.g. the two banks of a slit) agree in holonomy,
            # endpoints and crossings.
            key = (c.holonomy.x, c.holonomy.y, c.start, c.end, c.crossings, c.start_corner)
            if key not in seen:
                seen.add(key)
                dedup.append(c)
        return dedup

    def _emit_edge(self, t: int, c: int):
        s = self.s
        slot = (t, c)
        self.out.append(
            SaddleConnection(
                holonomy=s.triangles[t].edges[c],
                start=s.corner_vertex((t, c)),
                end=s.corner_vertex((t, (c + 1) % 3)),
                crossings=(),
                homology_class=self.homology.class_of_slots([slot]),
                start_corner=slot,
            )
        )

    def _search_corner(self, t: int, c: int):
        s = self.s
        std = _std_corners(s, t)
        # Corner c at the origin; the other two corners span the wedge.
        base = std[c]
        p1 = std[(c + 1) % 3] - base
        p2 = std[(c + 2) % 3] - base
        start_vertex = s.corner_vertex((t, c))
        cross_slot = (t, (c + 1) % 3)
        queue = deque()
        state = (cross_slot, p1, p2, p1, p2, ((t, (c + 1) % 3),), ((t, c),))
        if _visible_min_dist_sq(p1, p2, p1, p2) <= self.r2:
            queue.append(state)
        while queue:
            self.states += 1
            if self.states > self.budget:
                raise ResourceLimitError(
                    "enumeration state budget exceeded", budget=self.budget
                )
            slot, x, y, a, b, crossings, lower = queue.popleft()
            u, j = s.gluings[slot]
            ustd = _std_corners(s, u)
            offset = y - ustd[j]
            # The glued edge runs head-to-tail: corner j sits at y, j+1 at x.
            cpos = offset + ustd[(j + 2) % 3]
            ca = a.cross(cpos)
            cb = cpos.cross(b)
            slot_a = (u, (j + 1) % 3)  # x -> c
            slot_b = (u, (j + 2) % 3)  # c -> y
            if ca > 0 and cb > 0:
                if cpos.norm_sq() <= self.r2:
                    end_vertex = s.corner_vertex((u, (j + 2) % 3))
                    self.out.append(
                        SaddleConnection(
                            holonomy=cpos,
                            start=start_vertex,
                            end=end_vertex,
                            crossings=crossings,
                            homology_class=self.homology.class_of_slots(
                                list(lower) + [slot_a]
                            ),
                            start_corner=(t, c),
                        )
                    )
                if _visible_min_dist_sq(x, cpos, a, cpos) <= self.r2:
                    queue.append((slot_a, x, cpos, a, cpos, crossings + (slot_a,), lower))
                if _visible_min_dist_sq(cpos, y, cpos, b) <= self.r2:
                    queue.append(
                        (slot_b, cpos, y, cpos, b, crossings + (slot_b,), lower + (slot_a,))
                    )
            elif ca <= 0:
                # New vertex at or below ray a: the wedge passes through c -> y.
                if _visible_min_dist_sq(cpos, y, a, b) <= self.r2:
                    queue.append(
                        (slot_b, cpos, y, a, b, crossings + (slot_b,), lower + (slot_a,))
                    )
            else:
                # cb <= 0: at or above ray b, pass through x -> c.
                if _visible_min_dist_sq(x, cpos, a, b) <= self.r2:
                    queue.append((slot_a, x, cpos, a, b, crossings + (slot_a,), lower))


def enumerate_connections(
    s: TranslationSurface,
    radius=None,
    *,
    radius_sq=None,
    budget: Optional[int] = None,
) -> HolonomySet:
    """All saddle connections of Euclidean length <= radius.

    Exactly one of radius / radius_sq must be given; radius_sq admits search
    circles whose radius is an irrational square root of a rational (used by
    analytic area normalization).
    """
    if (radius is None) == (radius_sq is None):
        raise InputError("pass exactly one of radius, radius_sq")
    if radius is not None:
        r = to_fraction(radius)
        if r <= 0:
            raise InputError("radius must be positive")
        radius_sq = r * r
    else:
        radius_sq = to_fraction(radius_sq)
        if radius_sq <= 0:
            raise InputError("radius_sq must be positive")
    if budget is None:
        budget = default_budget()
    conns = _Enumerator(s, radius_sq, budget).run()
    return HolonomySet(radius_sq=radius_sq, connections=tuple(conns))


def count(s: TranslationSurface, radius=None, *, radius_sq=None, budget=None) -> int:
    """Number of distinct holonomy vectors of length <= radius."""
    return len(enumerate_connections(s, radius, radius_sq=radius_sq, budget=budget).vectors())


def shortest(s: TranslationSurface, budget=None) -> SaddleConnection:
    """A connection of minimal length; ties broken lexicographically.

    The shortest connection is never longer than the shortest triangulation
    edge, so one enumeration at that radius suffices.
    """
    hs = enumerate_connections(s, radius_sq=s.min_edge_norm_sq(), budget=budget)
    return min(hs.connections, key=lambda c: c.sort_key())


def second_shortest_nonhomologous(
    s: TranslationSurface, mode: str = "pm", budget=None, max_doublings: int = 20
) -> SaddleConnection:
    """Shortest connection whose class differs from the shortest's.

    mode "pm": class not equal to +/- the class of the shortest (default);
    mode "proportional": class not an integer multiple of it.
    """
    if mode not in ("pm", "proportional"):
        raise InputError(f"unknown mode {mode!r}")
    gamma = shortest(s, budget=budget)
    homology = EdgeHomology(s)
    r2 = s.min_edge_norm_sq()
    for _ in range(max_doublings):
        hs = enumerate_connections(s, radius_sq=r2, budget=budget)
        if mode == "pm":
            candidates = [
                c
                for c in hs.connections
                if not homology.is_pm(c.homology_class, gamma.homology_class)
            ]
        else:
            candidates = [
                c
                for c in hs.connections
                if not homology.is_proportional(c.homology_class, gamma.homology_class)
            ]
        if candidates:
            return min(candidates, key=lambda c: c.sort_key())
        r2 *= 4
    raise ResourceLimitError("no nonhomologous connection found within doubling budget")


def reverse_of(s: TranslationSurface, conn: SaddleConnection) -> SaddleConnection:
    """The same geodesic segment traversed backwards."""
    rev_crossings = tuple(s.gluings[slot] for slot in reversed(conn.crossings))
    if conn.crossings:
        u, j = s.gluings[conn.crossings[-1]]
        end_corner = (u, (j + 2) % 3)
    else:
        end_corner = s.gluings[conn.start_corner]
    homology = EdgeHomology(s)
    return SaddleConnection(
        holonomy=-conn.holonomy,
        start=conn.end,
        end=conn.start,
        crossings=rev_crossings,
        homology_class=homology.reduce(tuple(-x for x in conn.homology_class)),
        start_corner=end_corner,
    )


# --- developing chains and tracing straight segments ----------------------


def develop_chain(s: TranslationSurface, conn: SaddleConnection):
    """Placements (triangle, offset) of the strip crossed by the connection,
    with the start vertex at the origin."""
    t, c = conn.start_corner
    offset = _ORIGIN - _std_corners(s, t)[c]
    chain = [(t, offset)]
    cur_t, cur_off = t, offset
    for slot in conn.crossings:
        p, q = slot
        if p != cur_t:
            raise InputError("crossing sequence inconsistent with chain")
        head = cur_off + _std_corners(s, p)[(q + 1) % 3]
        u, j = s.gluings[slot]
        cur_t = u
        cur_off = head - _std_corners(s, u)[j]
        chain.append((cur_t, cur_off))
    return chain


class BlockedAtVertex(Exception):
    """Straight segment hits an intermediate vertex; carries its position."""

    def __init__(self, position: ExactVector, vertex: int):
        super().__init__(f"segment blocked at {position}")
        self.position = position
        self.vertex = vertex


def trace_connection(
    s: TranslationSurface, start_vertex: int, displacement: ExactVector
) -> SaddleConnection:
    """The saddle connection from a vertex with the given exact holonomy.

    Raises BlockedAtVertex if the straight segment passes through another
    vertex first, InputError if no vertex sits at the displacement.
    """
    s.validate()
    if displacement.is_zero():
        raise InputError("displacement must be nonzero")
    corner = None
    along_edge = None
    for t in range(s.n_triangles()):
        for c in range(3):
            if s.corner_vertex((t, c)) != start_vertex:
                continue
            u = s.triangles[t].edges[c]
            w = -s.triangles[t].edges[(c + 2) % 3]
            if u.cross(displacement) == 0 and u.dot(displacement) > 0:
                corner = (t, c)
                along_edge = u
                break
            if u.cross(displacement) > 0 and displacement.cross(w) > 0:
                corner = (t, c)
                break
        if corner:
            break
    if corner is None:
        raise InputError(f"no corner of vertex {start_vertex} contains the direction")

    homology = EdgeHomology(s)
    t, c = corner
    if along_edge is not None:
        d_sq = displacement.norm_sq()
        e_sq = along_edge.norm_sq()
        if d_sq == e_sq:
            return SaddleConnection(
                holonomy=displacement,
                start=start_vertex,
                end=s.corner_vertex((t, (c + 1) % 3)),
                crossings=(),
                homology_class=homology.class_of_slots([(t, c)]),
                start_corner=(t, c),
            )
        if d_sq > e_sq:
            raise BlockedAtVertex(along_edge, s.corner_vertex((t, (c + 1) % 3)))
        raise InputError("displacement falls short of the edge vertex")

    std = _std_corners(s, t)
    base = std[c]
    x = std[(c + 1) % 3] - base
    y = std[(c + 2) % 3] - base
    cur_slot = (t, (c + 1) % 3)
    crossings = [cur_slot]
    lower = [(t, c)]
    d = displacement
    guard = 0
    while True:
        guard += 1
        if guard > 100_000:
            raise ResourceLimitError("segment trace did not terminate")
        u, j = s.gluings[cur_slot]
        ustd = _std_corners(s, u)
        offset = y - ustd[j]
        cpos = offset + ustd[(j + 2) % 3]
        slot_a = (u, (j + 1) % 3)
        slot_b = (u, (j + 2) % 3)
        side = d.cross(cpos)
        if side == 0:
            if cpos == d:
                return SaddleConnection(
                    holonomy=d,
                    start=start_vertex,
                    end=s.corner_vertex((u, (j + 2) % 3)),
                    crossings=tuple(crossings),
                    homology_class=homology.class_of_slots(lower + [slot_a]),
                    start_corner=(t, c),
                )
            if cpos.norm_sq() < d.norm_sq() and cpos.dot(d) > 0:
                raise BlockedAtVertex(cpos, s.corner_vertex((u, (j + 2) % 3)))
            raise InputError("trace left the segment corridor; displacement invalid")
        if side > 0:
            # New vertex above the segment: exit through x -> c.
            cur_slot = slot_a
            y = cpos
            crossings.append(cur_slot)
        else:
            cur_slot = slot_b
            x = cpos
            crossings.append(cur_slot)
            lower.append(slot_a)


# --- cylinder detection ----------------------------------------------------


@dataclass(frozen=True)
class Cylinder:
    width_sq: Fraction  # circumference^2 of the core curves
    height_sq: Fraction
    period: ExactVector  # holonomy of the core

    def width(self) -> float:
        return float(self.width_sq) ** 0.5

    def height(self) -> float:
        return float(self.height_sq) ** 0.5


@dataclass(frozen=True)
class NotOnBoundary:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str


def _point_in_triangle(p, a, b, c) -> bool:
    return (b - a).cross(p - a) > 0 and (c - b).cross(p - b) > 0 and (a - c).cross(p - c) > 0


def _trace_closed_leaf(s, t0, off0, q, d, max_trace_sq, max_steps=200_000):
    """Flow from q in direction d until the leaf closes, hits a vertex, or
    exhausts the trace budget.

    Returns ("closed", period, min_left, min_right), ("vertex", pos) or
    ("budget",).  min_left / min_right are the smallest positive and
    negative-side |cross(d, v - q)| over vertices of the visited strip.
    """
    d_sq = d.norm_sq()
    cur_t, cur_off = t0, off0
    point = q
    t_travel = _F0  # ray parameter along d
    min_left = None
    min_right = None
    steps = 0
    while True:
        steps += 1
        if steps > max_steps:
            return ("budget",)
        std = _std_corners(s, cur_t)
        corners = [cur_off + v for v in std]
        for v in corners:
            cr = d.cross(v - q)
            if cr > 0:
                min_left = cr if min_left is None or cr < min_left else min_left
            elif cr < 0:
                min_right = -cr if min_right is None or -cr < min_right else min_right
        # Exit edge: smallest positive ray parameter among the three sides.
        best = None
        for i in range(3):
            a = corners[i]
            b = corners[(i + 1) % 3]
            u = b - a
            den = d.cross(u)
            if den == 0:
                continue
            tt = (a - q).cross(u) / den
            if tt <= t_travel:
                continue
            ss = (a - q).cross(d) / den
            if ss < 0 or ss > 1:
                continue
            if best is None or tt < best[0]:
                best = (tt, ss, i, a, b)
        if best is None:
            raise InputError("leaf trace lost containment")
        tt, ss, i, a, b = best
        if ss == 0:
            return ("vertex", a)
        if ss == 1:
            return ("vertex", b)
        if tt * tt * d_sq > max_trace_sq:
            return ("budget",)
        u2, j = s.gluings[(cur_t, i)]
        head = corners[(i + 1) % 3]
        new_off = head - _std_corners(s, u2)[j]
        cur_t, cur_off = u2, new_off
        t_travel = tt
        if cur_t == t0:
            w = cur_off - off0
            if d.cross(w) == 0 and d.dot(w) > 0:
                return ("closed", w, min_left, min_right)


def detect_cylinder(s: TranslationSurface, conn: SaddleConnection, max_trace):
    """Cylinder with the connection on its boundary, if one closes up.

    Traces the parallel leaf at a small exact offset on each side of the
    connection; a closed leaf yields the maximal cylinder (circumference =
    leaf period, height = clearance to the nearest strip vertices).  Returns
    Unknown when tracing exceeds max_trace.  On surfaces with rational edge
    data every rational direction is completely periodic, so NotOnBoundary
    is not produced by this tracer; it remains part of the result type for
    callers.
    """
    s.validate()
    max_trace = to_fraction(max_trace)
    if max_trace <= 0:
        raise InputError("max_trace must be positive")
    max_trace_sq = max_trace * max_trace
    d = conn.holonomy
    d_sq = d.norm_sq()
    chain = develop_chain(s, conn)
    mid = d.scale(Fraction(1, 2))
    perp = d.perp()

    for side in (1, -1):
        eps = s.min_edge_norm_sq() / d_sq / 8
        for _ in range(60):
            q = mid + perp.scale(side * eps)
            placed = None
            for tri, off in chain:
                std = _std_corners(s, tri)
                if _point_in_triangle(q, off + std[0], off + std[1], off + std[2]):
                    placed = (tri, off)
                    break
            if placed is None:
                eps /= 2
                continue
            result = _trace_closed_leaf(s, placed[0], placed[1], q, d, max_trace_sq)
            if result[0] == "budget":
                return Unknown("trace budget exceeded")
            if result[0] == "vertex":
                eps /= 2
                continue
            _, period, min_left, min_right = result
            toward = min_right if side == 1 else min_left
            away = min_left if side == 1 else min_right
            expected = eps * d_sq
            if toward is None or away is None:
                raise InputError("closed leaf with no bounding vertices")
            if toward == expected:
                extent = toward + away
                return Cylinder(
                    width_sq=period.norm_sq(),
                    height_sq=extent * extent / d_sq,
                    period=period,
                )
            if toward < expected:
                # A singular leaf lies strictly between; aim inside the gap.
                eps = toward / d_sq / 2
                continue
            eps /= 2
        # retries exhausted on this side; try the other side
    return Unknown("offset search exhausted")
