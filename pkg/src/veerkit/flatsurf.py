"""Exact flat surfaces, saddle connections, maximal rectangles, and the
layered triangulation of the punctured mapping torus.

Surfaces are unions of convex polygons with vertices in a real algebraic
number field, glued by translations (optionally with a central flip).  Every
polygon vertex is a marked singularity.  All geometric predicates reduce to
exact sign computations in the field, so "singularity-free" statements are
decided, never approximated.  Candidate saddle connections come from a
bounded developing-map search and are certified by exact segment tracing;
maximal rectangles are grown from the connections they span and re-verified
by a development flood that must tile the rectangle exactly.
"""

import json
import math
from fractions import Fraction

from .errors import (BadSurfaceData, BoundExhausted, HorizontalOrVerticalSaddle,
                     NonManifoldGluing, NotPseudoAnosov)
from .field import FieldElement, NumberField
from .triangulation import IdealTriangulation, from_gluing_data
from .veering import RED, BLUE, TautStructure, VeeringStructure


# -- exact planar helpers (vectors are pairs of field elements) --

def _vadd(u, v):
    return (u[0] + v[0], u[1] + v[1])


def _vsub(u, v):
    return (u[0] - v[0], u[1] - v[1])


def _vneg(u):
    return (-u[0], -u[1])


def _vscale(u, c):
    return (u[0] * c, u[1] * c)


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _place(state, point):
    p, s, u = state
    if s == 1:
        return _vadd(point, u)
    return _vadd(_vneg(point), u)


def _key_of(x):
    return tuple((c.numerator, c.denominator) for c in x.vec)


def _vkey(v):
    return (_key_of(v[0]), _key_of(v[1]))


def _vfloat(v):
    return (float(v[0]), float(v[1]))


class SaddleConnection:
    """An exact geodesic between singularities, with its developing witness."""

    def __init__(self, corner, holonomy, end_corner, witness):
        self.corner = corner            # (polygon, vertex) start slot
        self.holonomy = holonomy        # field vector
        self.end_corner = end_corner
        self.witness = witness          # list of developing states along the segment

    def __repr__(self):
        return f"SaddleConnection({self.corner} -> {self.end_corner}, {_vfloat(self.holonomy)})"


class MaximalRectangle:
    """A maximal singularity-free rectangle with one singularity per side."""

    def __init__(self, bottom_corner, diag, x_left, x_right, side_points, seeds):
        self.bottom_corner = bottom_corner  # corner slot of the bottom singularity
        self.diag = diag                    # holonomy of the bottom-to-top edge
        self.x_left = x_left
        self.x_right = x_right
        self.side_points = side_points      # {"L","R","B","T"} -> (position, occurrence)
        self.seeds = seeds                  # developing states covering the rectangle
        self.width = x_right - x_left
        self.height = diag[1]

    def __repr__(self):
        return (f"MaximalRectangle(width={float(self.width):.6f}, "
                f"height={float(self.height):.6f})")


class FlatSurface:
    """Convex polygons with exact coordinates and edge identifications."""

    def __init__(self, field, polygons, identifications):
        self.field = field
        self.polygons = [[(x, y) for (x, y) in poly] for poly in polygons]
        self.identifications = list(identifications)
        self._validate_polygons()
        self._build_edge_map()
        self._build_corners()

    # --- structure ---

    def _validate_polygons(self):
        for pi, poly in enumerate(self.polygons):
            n = len(poly)
            if n < 3:
                raise BadSurfaceData(f"polygon {pi} has fewer than 3 vertices")
            for i in range(n):
                a = poly[i]
                b = poly[(i + 1) % n]
                c = poly[(i + 2) % n]
                turn = _cross(_vsub(b, a), _vsub(c, b))
                if not turn.sign() > 0:
                    raise BadSurfaceData(
                        f"polygon {pi} is not strictly convex counterclockwise at vertex {(i + 1) % n}")

    def edge_vec(self, p, e):
        poly = self.polygons[p]
        return _vsub(poly[(e + 1) % len(poly)], poly[e])

    def _build_edge_map(self):
        self.edge_map = {}
        used = set()
        for (p1, e1, p2, e2, sgn) in self.identifications:
            for key in ((p1, e1), (p2, e2)):
                if key in used:
                    raise BadSurfaceData(f"edge {key} identified twice")
                used.add(key)
            v1 = self.edge_vec(p1, e1)
            v2 = self.edge_vec(p2, e2)
            want = _vneg(v1) if sgn == 1 else v1
            if not ((v2[0] - want[0]).sign() == 0 and (v2[1] - want[1]).sign() == 0):
                raise BadSurfaceData(
                    f"identified edges ({p1},{e1}) and ({p2},{e2}) are not parallel of equal length")
            self.edge_map[(p1, e1)] = (p2, e2, sgn)
            self.edge_map[(p2, e2)] = (p1, e1, sgn)
        for p, poly in enumerate(self.polygons):
            for e in range(len(poly)):
                if (p, e) not in self.edge_map:
                    raise BadSurfaceData(f"edge ({p},{e}) is unglued")

    def _next_corner(self, corner):
        """Rotate around the vertex: cross the outgoing edge of the corner."""
        p, i = corner
        q, f, sgn = self.edge_map[(p, i)]
        if sgn == 1:
            return (q, (f + 1) % len(self.polygons[q]))
        return (q, f)

    def _build_corners(self):
        all_corners = [(p, i) for p, poly in enumerate(self.polygons)
                       for i in range(len(poly))]
        seen = {}
        self.vertex_classes = []
        self.cone_angles = []
        for c in all_corners:
            if c in seen:
                continue
            star = [c]
            seen[c] = len(self.vertex_classes)
            cur = self._next_corner(c)
            while cur != c:
                star.append(cur)
                seen[cur] = len(self.vertex_classes)
                cur = self._next_corner(cur)
            self.vertex_classes.append(tuple(star))
            self.cone_angles.append(self._cone_angle(star))
        self.corner_class = seen

    def corner_directions(self, corner):
        """Outgoing and incoming edge directions at a corner, in local coordinates."""
        p, i = corner
        poly = self.polygons[p]
        n = len(poly)
        d_out = _vsub(poly[(i + 1) % n], poly[i])
        d_in = _vsub(poly[(i - 1) % n], poly[i])
        return d_out, d_in

    def _cone_angle(self, star):
        """Total angle as an integer multiple of pi, certified by interval bounds."""
        lo_sum = hi_sum = 0.0
        for corner in star:
            d_out, d_in = self.corner_directions(corner)
            ox, oy = float(d_out[0]), float(d_out[1])
            ix, iy = float(d_in[0]), float(d_in[1])
            ang = math.atan2(ox * iy - oy * ix, ox * ix + oy * iy)
            if ang <= 0:
                ang += 2 * math.pi
            lo_sum += ang - 1e-9
            hi_sum += ang + 1e-9
        mid = 0.5 * (lo_sum + hi_sum)
        k = round(mid / math.pi)
        if k < 1 or abs(mid - k * math.pi) > 0.3 or hi_sum - lo_sum > 0.5:
            raise BadSurfaceData("total cone angle is not a positive multiple of pi")
        return k

    def singular_corners(self):
        return [c for star in self.vertex_classes for c in star]

    # --- developing ---

    def cross_state(self, state, e):
        """Develop across edge e of the state's polygon."""
        p, s, u = state
        poly = self.polygons[p]
        b = poly[(e + 1) % len(poly)]
        q, f, sgn = self.edge_map[(p, e)]
        s2 = s * sgn
        B = _place(state, b)
        a2 = self.polygons[q][f]
        if s2 == 1:
            u2 = _vsub(B, a2)
        else:
            u2 = _vadd(B, a2)
        return (q, s2, u2)

    def _state_key(self, state):
        p, s, u = state
        return (p, s, _vkey(u))

    def _bbox_overlaps(self, state, bx, by):
        """Cheap pruning: placed polygon bounding box meets [-bx,bx] x [-by,by]."""
        p, _s, _u = state
        xs = []
        ys = []
        for v in self.polygons[p]:
            w = _place(state, v)
            fx = float(w[0])
            fy = float(w[1])
            xs.append(fx)
            ys.append(fy)
        pad = 1e-9 * (1 + bx + by)
        return (min(xs) <= bx + pad and max(xs) >= -bx - pad
                and min(ys) <= by + pad and max(ys) >= -by - pad)

    def develop(self, corner, bx, by):
        """All developing states of polygons meeting the box around the corner vertex."""
        p, i = corner
        seed = (p, 1, _vneg(self.polygons[p][i]))
        states = [seed]
        seen = {self._state_key(seed)}
        queue = [seed]
        while queue:
            st = queue.pop()
            for e in range(len(self.polygons[st[0]])):
                nxt = self.cross_state(st, e)
                k = self._state_key(nxt)
                if k in seen:
                    continue
                if not self._bbox_overlaps(nxt, bx, by):
                    continue
                seen.add(k)
                states.append(nxt)
                queue.append(nxt)
        return states

    def singular_positions(self, states, bx, by):
        """Map position-key -> (position, (state, vertex)) for developed vertices in the box."""
        out = {}
        for st in states:
            p = st[0]
            for j, v in enumerate(self.polygons[p]):
                w = _place(st, v)
                if abs(float(w[0])) > float(bx) + 1e-6 or abs(float(w[1])) > float(by) + 1e-6:
                    continue
                key = _vkey(w)
                if key not in out:
                    out[key] = (w, (st, j))
        return out

    # --- exact segment tracing ---

    def direction_in_corner(self, state, i, d):
        """Is the plane direction d strictly inside the placed corner cone?

        The boundary ray along the outgoing edge counts as inside (half-open),
        so every direction at a vertex belongs to exactly one corner of its
        developed star.
        """
        p, s, _u = state
        d_out, d_in = self.corner_directions((p, i))
        if s == -1:
            d_out, d_in = _vneg(d_out), _vneg(d_in)
        c1 = _cross(d_out, d).sign()
        c2 = _cross(d, d_in).sign()
        along_out = c1 == 0 and (d[0] * d_out[0] + d[1] * d_out[1]).sign() > 0
        return (c1 > 0 and c2 > 0) or (along_out and c2 > 0)

    def trace(self, corner, h):
        """Certify the straight segment from the corner vertex with holonomy h.

        Returns (witness states, end occurrence) when the open segment stays
        in the surface and ends exactly at a singularity; None when blocked.
        """
        p, i = corner
        state = (p, 1, _vneg(self.polygons[p][i]))
        if not self.direction_in_corner(state, i, h):
            return None
        one = self.field.one()
        t_cur = (self.field.zero(), one)       # rational pair (num, positive den)
        witness = [state]

        def less(a, b):
            return (a[0] * b[1] - b[0] * a[1]).sign() < 0

        for _guard in range(100000):
            poly = self.polygons[state[0]]
            n = len(poly)
            placed = [_place(state, v) for v in poly]
            best = None
            for e in range(n):
                A, B = placed[e], placed[(e + 1) % n]
                # intersect t*h with A + r*(B-A); keep t, r as pairs over det > 0
                ex = B[0] - A[0]
                ey = B[1] - A[1]
                det = h[1] * ex - h[0] * ey
                s = det.sign()
                if s == 0:
                    continue
                t_num = A[1] * ex - A[0] * ey
                r_num = h[0] * A[1] - h[1] * A[0]
                if s < 0:
                    det, t_num, r_num = -det, -t_num, -r_num
                t = (t_num, det)
                if not less(t_cur, t) or less((one, one), t):
                    continue
                if r_num.sign() < 0 or (r_num - det).sign() > 0:
                    continue
                if best is None or less(t, best[0]):
                    best = (t, e, r_num, det)
            if best is None:
                return None
            t, e, r_num, det = best
            at_end = (t[0] - t[1]).sign() == 0
            if r_num.sign() == 0 or (r_num - det).sign() == 0:
                # hits a vertex: success only at the far endpoint
                v_idx = e if r_num.sign() == 0 else (e + 1) % len(poly)
                if at_end:
                    return witness, (state, v_idx)
                return None
            if at_end:
                return None    # ends on an edge interior, not a singularity
            state = self.cross_state(state, e)
            witness.append(state)
            t_cur = t
        raise NonManifoldGluing("segment tracing did not terminate")

    # --- rectangle development ---

    def _clip_to_rect(self, placed, xs, ys):
        """Sutherland-Hodgman clip of a placed convex polygon to a rectangle."""
        pts = list(placed)
        for (axis, bound, keep_le) in ((0, xs[0], False), (0, xs[1], True),
                                       (1, ys[0], False), (1, ys[1], True)):
            if not pts:
                return []
            nxt = []
            n = len(pts)
            for i in range(n):
                a, b = pts[i], pts[(i + 1) % n]
                fa = (a[axis] - bound).sign()
                fb = (b[axis] - bound).sign()
                ina = fa <= 0 if keep_le else fa >= 0
                inb = fb <= 0 if keep_le else fb >= 0
                if ina:
                    nxt.append(a)
                if ina != inb:
                    span = b[axis] - a[axis]
                    t = (bound - a[axis]) / span
                    nxt.append((a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t))
            pts = nxt
        return pts

    @staticmethod
    def _area2(pts):
        total = None
        n = len(pts)
        if n < 3:
            return None
        for i in range(n):
            a, b = pts[i], pts[(i + 1) % n]
            term = a[0] * b[1] - a[1] * b[0]
            total = term if total is None else total + term
        return total

    def develop_rectangle(self, seeds, xs, ys, collect_singular=False):
        """Flood the open rectangle (xs[0],xs[1]) x (ys[0],ys[1]) from seed states.

        Returns (interior singular occurrences, boundary occurrences, covered
        area doubled).  The flood crosses an edge only where the shared placed
        segment meets the open rectangle with positive length, so it follows
        the sheet of the seeds.
        """
        zero = self.field.zero()
        seen = {}
        queue = []
        for st in seeds:
            k = self._state_key(st)
            if k not in seen:
                seen[k] = st
                queue.append(st)
        interior = {}
        boundary = {}
        area2 = zero
        processed = set()
        while queue:
            st = queue.pop()
            k = self._state_key(st)
            if k in processed:
                continue
            processed.add(k)
            poly = self.polygons[st[0]]
            placed = [_place(st, v) for v in poly]
            clip = self._clip_to_rect(placed, xs, ys)
            a2 = self._area2(clip)
            if a2 is None or a2.sign() <= 0:
                continue
            area2 = area2 + a2
            for j, w in enumerate(placed):
                in_x = (w[0] - xs[0]).sign() > 0 and (xs[1] - w[0]).sign() > 0
                in_y = (w[1] - ys[0]).sign() > 0 and (ys[1] - w[1]).sign() > 0
                on_x = (w[0] - xs[0]).sign() == 0 or (xs[1] - w[0]).sign() == 0
                on_y = (w[1] - ys[0]).sign() == 0 or (ys[1] - w[1]).sign() == 0
                if in_x and in_y:
                    interior.setdefault(_vkey(w), (w, (st, j)))
                elif collect_singular and (on_x or on_y) \
                        and (w[0] - xs[0]).sign() >= 0 and (xs[1] - w[0]).sign() >= 0 \
                        and (w[1] - ys[0]).sign() >= 0 and (ys[1] - w[1]).sign() >= 0:
                    boundary.setdefault(_vkey(w), (w, (st, j)))
            n = len(poly)
            for e in range(n):
                A, B = placed[e], placed[(e + 1) % n]
                if self._segment_meets_open_rect(A, B, xs, ys):
                    nxt = self.cross_state(st, e)
                    k2 = self._state_key(nxt)
                    if k2 not in seen:
                        seen[k2] = nxt
                        queue.append(nxt)
        return list(interior.values()), list(boundary.values()), area2

    def _segment_meets_open_rect(self, A, B, xs, ys):
        """Does the open segment (A,B) intersect the open rectangle along a positive length?

        Division-free: clip parameters are kept as (numerator, positive
        denominator) pairs and compared by cross-multiplication.
        """
        one = self.field.one()
        lo_n, lo_d = self.field.zero(), one       # lo = 0/1
        hi_n, hi_d = one, one                     # hi = 1/1
        for axis, (b0, b1) in ((0, xs), (1, ys)):
            d = B[axis] - A[axis]
            s = d.sign()
            if s == 0:
                if (A[axis] - b0).sign() <= 0 or (A[axis] - b1).sign() >= 0:
                    return False
                continue
            if s < 0:
                d = -d
                n0 = A[axis] - b1
                n1 = A[axis] - b0
            else:
                n0 = b0 - A[axis]
                n1 = b1 - A[axis]
            # candidate lo = n0/d, hi = n1/d with d > 0
            if (n0 * lo_d - lo_n * d).sign() > 0:
                lo_n, lo_d = n0, d
            if (n1 * hi_d - hi_n * d).sign() < 0:
                hi_n, hi_d = n1, d
        return (hi_n * lo_d - lo_n * hi_d).sign() > 0


# -- operations --

def _cross_f(u, v):
    return u[0] * v[1] - u[1] * v[0]


def saddle_connections(surface, bound_x, bound_y):
    """All saddle connections with |dx| <= bound_x and |dy| <= bound_y.

    Each connection appears once, oriented with dx > 0 (no axis-parallel
    connection may exist; finding one raises HorizontalOrVerticalSaddle).
    """
    out = []
    for star in surface.vertex_classes:
        for corner in star:
            states = surface.develop(corner, bound_x, bound_y)
            cands = surface.singular_positions(states, bound_x, bound_y)
            items = sorted(cands.items(), key=lambda kv: kv[0])
            for _key, (h, _occ) in items:
                sx = h[0].sign()
                sy = h[1].sign()
                if sx == 0 and sy == 0:
                    continue
                if sx < 0 or (sx == 0 and sy < 0):
                    continue
                if abs(float(h[0])) > float(bound_x) + 1e-9 \
                        or abs(float(h[1])) > float(bound_y) + 1e-9:
                    continue
                traced = surface.trace(corner, h)
                if traced is None:
                    continue
                witness, (end_state, vj) = traced
                if sx == 0 or sy == 0:
                    raise HorizontalOrVerticalSaddle(
                        f"axis-parallel saddle connection with holonomy {_vfloat(h)}")
                out.append(SaddleConnection(corner, h, (end_state[0], vj), witness))
    return out


def spans_empty_rectangle(surface, sc):
    """True iff the open axis rectangle spanned by the connection is singularity-free."""
    zero = surface.field.zero()
    hx, hy = sc.holonomy
    x0 = zero if hx.sign() > 0 else hx
    x1 = hx if hx.sign() > 0 else zero
    y0 = zero if hy.sign() > 0 else hy
    y1 = hy if hy.sign() > 0 else zero
    if (x1 - x0).sign() == 0 or (y1 - y0).sign() == 0:
        raise BadSurfaceData("axis-parallel connection spans no rectangle")
    interior, _b, area2 = surface.develop_rectangle(sc.witness, (x0, x1), (y0, y1))
    if interior:
        return False
    want = (x1 - x0) * (y1 - y0) * 2
    if (area2 - want).sign() != 0:
        raise NonManifoldGluing("rectangle development failed to tile the rectangle")
    return True


class AffinePA:
    """The affine pseudo-Anosov data: expansion factor and the corner action.

    The derivative is diag(lam, 1/lam) globally; ``vertex_class_map`` sends
    each singularity class to its image class.  The action on a (corner,
    direction) pair locates the image direction in the image class's star,
    which is unambiguous when that class has cone angle 2*pi; surfaces with
    larger cone angles must supply an explicit ``corner_map``.
    """

    def __init__(self, field, lam, vertex_class_map, corner_map=None):
        self.field = field
        self.lam = lam
        self.vertex_class_map = list(vertex_class_map)
        self.corner_map = dict(corner_map) if corner_map else None

    def scale(self, v, power=1):
        lam = self.lam ** power
        return (v[0] * lam, v[1] / lam)

    def map_corner_direction(self, surface, corner, d, power=1):
        d2 = self.scale(d, power)
        if self.corner_map is not None and power == 1:
            c2 = self.corner_map[corner]
            return c2, d2
        cls = surface.corner_class[corner]
        img_cls = cls
        for _ in range(abs(power)):
            img_cls = self.vertex_class_map[img_cls] if power > 0 else \
                self.vertex_class_map.index(img_cls)
        star = surface.vertex_classes[img_cls]
        if surface.cone_angles[img_cls] != 2:
            raise BadSurfaceData(
                "corner action is ambiguous at a cone angle above 2*pi; supply corner_map")
        for c2 in star:
            p2, i2 = c2
            state = (p2, 1, _vneg(surface.polygons[p2][i2]))
            if surface.direction_in_corner(state, i2, d2):
                return c2, d2
        raise BadSurfaceData("image direction not found in the image star")


def _connection_id(surface, occ, d):
    """Canonical (corner, local direction) of a connection end.

    ``occ`` is a developed occurrence (state, vertex); the local direction is
    the plane direction pulled back through the state's flip, located in the
    star around the vertex.
    """
    state, j = occ
    p, s, _u = state
    local = d if s == 1 else _vneg(d)
    corner = (p, j)
    for _guard in range(1000):
        p2, i2 = corner
        st2 = (p2, 1, _vneg(surface.polygons[p2][i2]))
        if surface.direction_in_corner(st2, i2, local):
            return corner, local
        nxt = surface._next_corner(corner)
        q, f, sgn = surface.edge_map[(p2, i2)]
        if sgn == -1:
            local = _vneg(local)
        corner = nxt
    raise NonManifoldGluing("failed to locate a direction in a vertex star")


def _id_key(cid):
    corner, local = cid
    return (corner, _vkey(local))


def _canonical_edge(surface, occ_a, occ_b, pos_a, pos_b):
    """Identity of the connection joining two placed occurrences, plus roles.

    Returns (key, start_label) where start_label says which argument is the
    canonical start (the end whose (corner, direction) key is smaller).
    """
    d = _vsub(pos_b, pos_a)
    ia = _connection_id(surface, occ_a, d)
    ib = _connection_id(surface, occ_b, _vneg(d))
    ka, kb = _id_key(ia), _id_key(ib)
    if ka <= kb:
        return (ka, kb), 0
    return (kb, ka), 1


def default_bound(surface):
    """Initial enumeration bound: a few diameters of an area-typical square."""
    extent = 0.0
    area2 = 0.0
    for poly in surface.polygons:
        pts = [(float(v[0]), float(v[1])) for v in poly]
        for (x, y) in pts:
            extent = max(extent, abs(x), abs(y))
        for i in range(len(pts)):
            x1, y1 = pts[i]
            x2, y2 = pts[(i + 1) % len(pts)]
            area2 += x1 * y2 - y1 * x2
    return max(2.5 * extent, 3.2 * math.sqrt(abs(area2) / 2.0))


def maximal_rectangles(surface, pa, bound=None):
    """One representative per monodromy orbit of maximal singularity-free rectangles.

    Enumerates spanning connections within the bound, grows each into its
    maximal rectangle (verified by an exact development flood), groups the
    rectangles into monodromy orbits by scaling-normalized keys, and returns
    the squarest member of each orbit (any member serves equally, since all
    downstream matching is scaling-normalized; the squarest needs the least
    enumeration).  Completeness of the orbit census is ultimately certified by
    the face pairing of the triangulation built from it.
    """
    if bound is None:
        bound = default_bound(surface)
    scs = saddle_connections(surface, bound, bound)
    edges = [sc for sc in scs if spans_empty_rectangle(surface, sc)]
    orbits = {}
    for sc in edges:
        rect = _grow_rectangle(surface, sc, bound)
        if rect is None:
            raise BoundExhausted("rectangle growth exceeded the enumeration bound")
        okey = _rect_orbit_key(surface, pa, rect)
        size = max(float(rect.width), float(rect.height))
        cur = orbits.get(okey)
        if cur is None or size < cur[0] - 1e-12 \
                or (abs(size - cur[0]) <= 1e-12 and _rect_key(surface, rect) < cur[2]):
            orbits[okey] = (size, rect, _rect_key(surface, rect))
    if not orbits:
        raise BoundExhausted("no spanning connections found within the bound")
    return [rect for (_s, rect, _k) in orbits.values()]


def _rect_orbit_key(surface, pa, rect):
    """Monodromy-invariant key: normalize the diagonal's x-extent into [1, lam)."""
    lam = pa.lam
    one = surface.field.one()
    w = abs(rect.diag[0])
    power = 0
    for _ in range(1000):
        if (w - one).sign() >= 0 and (w - lam).sign() < 0:
            break
        if (w - one).sign() < 0:
            w = w * lam
            power += 1
        else:
            w = w / lam
            power -= 1
    else:
        raise BoundExhausted("orbit normalization did not converge")
    return _rect_key_image(surface, pa, rect, power)


def _grow_rectangle(surface, sc, bound):
    """Maximal rectangle with ``sc`` as its bottom-to-top spanning edge."""
    zero = surface.field.zero()
    hx, hy = sc.holonomy
    if hy.sign() < 0:
        return _grow_rectangle(surface, _reverse_connection(surface, sc), bound)
    x_lo = zero if hx.sign() > 0 else hx
    x_hi = hx if hx.sign() > 0 else zero
    # strip flood, widening until blockers appear on both sides
    reach = Fraction(math.ceil(abs(float(hx)) + 1.0))
    for _ in range(30):
        if float(reach) > 4 * bound:
            return None
        xs = (x_lo - surface.field.from_rational(reach),
              x_hi + surface.field.from_rational(reach))
        ys = (zero, hy)
        interior, _b, _a = surface.develop_rectangle(sc.witness, xs, ys)
        left = [w for (w, _occ) in interior if (w[0] - x_lo).sign() < 0]
        right = [w for (w, _occ) in interior if (w[0] - x_hi).sign() > 0]
        for (w, _occ) in interior:
            if (w[0] - x_lo).sign() == 0 or (w[0] - x_hi).sign() == 0:
                raise HorizontalOrVerticalSaddle(
                    "vertical alignment of singularities inside a growth strip")
        if left and right:
            xl = max(left, key=lambda w: w[0])
            xr = min(right, key=lambda w: w[0])
            return _verify_rectangle(surface, sc, xl, xr)
        reach *= 2
    return None


def _reverse_connection(surface, sc):
    end_p, end_v = sc.end_corner
    # re-trace from the end corner to build the reversed witness
    h = _vneg(sc.holonomy)
    # the end corner slot: locate the sector containing the reverse direction
    end_state = sc.witness[-1]
    cid, local = _connection_id(surface, (end_state, end_v), h)
    traced = surface.trace(cid, local)
    if traced is None:
        raise NonManifoldGluing("failed to reverse a certified connection")
    witness, (st, vj) = traced
    return SaddleConnection(cid, local, (st[0], vj), witness)


def _verify_rectangle(surface, sc, left_pt, right_pt):
    """Check one-singularity-per-side and emptiness; build the rectangle record."""
    zero = surface.field.zero()
    hx, hy = sc.holonomy
    xl, xr = left_pt[0], right_pt[0]
    ys = (zero, hy)
    interior, boundary, area2 = surface.develop_rectangle(
        sc.witness, (xl, xr), ys, collect_singular=True)
    if interior:
        return None
    want = (xr - xl) * hy * 2
    if (area2 - want).sign() != 0:
        raise NonManifoldGluing("maximal rectangle development inconsistency")
    sides = {"L": [], "R": [], "B": [], "T": []}
    corners_hit = []
    for (w, occ) in boundary:
        on_l = (w[0] - xl).sign() == 0
        on_r = (w[0] - xr).sign() == 0
        on_b = w[1].sign() == 0
        on_t = (w[1] - hy).sign() == 0
        if (on_l or on_r) and (on_b or on_t):
            corners_hit.append(w)
        elif on_l:
            sides["L"].append((w, occ))
        elif on_r:
            sides["R"].append((w, occ))
        elif on_b:
            sides["B"].append((w, occ))
        elif on_t:
            sides["T"].append((w, occ))
    if corners_hit:
        raise NonManifoldGluing("singularity at a maximal rectangle corner")
    if any(len(v) != 1 for v in sides.values()):
        return None
    side_points = {k: v[0] for k, v in sides.items()}
    return MaximalRectangle(sc.corner, sc.holonomy, xl, xr, side_points, sc.witness)


def _rect_key(surface, rect):
    b_pos, b_occ = rect.side_points["B"]
    cid, local = _connection_id(surface, b_occ, _vsub(rect.side_points["T"][0], b_pos))
    return (cid, _vkey(local), _vkey((rect.x_left - b_pos[0], rect.x_right - b_pos[0])))


def _rect_key_image(surface, pa, rect, power):
    b_pos, b_occ = rect.side_points["B"]
    d = _vsub(rect.side_points["T"][0], b_pos)
    cid, local = _connection_id(surface, b_occ, d)
    c2, d2 = pa.map_corner_direction(surface, cid, local, power)
    lam = pa.lam ** power
    xl = (rect.x_left - b_pos[0]) * lam
    xr = (rect.x_right - b_pos[0]) * lam
    return (c2, _vkey(d2), _vkey((xl, xr)))


# -- the layered triangulation from maximal rectangles --

_LABELS = ("L", "R", "B", "T")   # tetrahedron labels 0..3 before orientation fix-up


def _rect_vertex_data(surface, rect):
    """Positions and occurrences of the four rectangle singularities."""
    out = {}
    for side in _LABELS:
        pos, occ = rect.side_points[side]
        out[side] = (pos, occ)
    return out


def _rect_edges(surface, rect):
    """The six connections of a rectangle tetrahedron, with roles and slopes.

    Returns {frozenset({side1, side2}): (start_key, end_key, start_side,
    slope_sign)} where keys are canonical connection-end identities.
    """
    data = _rect_vertex_data(surface, rect)
    out = {}
    for i in range(4):
        for j in range(i + 1, 4):
            sa, sb = _LABELS[i], _LABELS[j]
            (pa, oa), (pb, ob) = data[sa], data[sb]
            d = _vsub(pb, pa)
            ia = _connection_id(surface, oa, d)
            ib = _connection_id(surface, ob, _vneg(d))
            ka, kb = _id_key(ia), _id_key(ib)
            slope = d[0].sign() * d[1].sign()
            if ka <= kb:
                out[frozenset((sa, sb))] = (ka, kb, sa, slope)
            else:
                out[frozenset((sa, sb))] = (kb, ka, sb, slope)
    return out


def _id_image_key(surface, pa, cid_key, power):
    """Image of a canonical connection-end key under the monodromy."""
    corner, vkey = cid_key
    field = surface.field
    local = (field.element([Fraction(n, d) for n, d in vkey[0]]),
             field.element([Fraction(n, d) for n, d in vkey[1]]))
    c2, d2 = pa.map_corner_direction(surface, corner, local, power)
    return (c2, _vkey(d2))


def _normalize_triple(surface, pa, triple_keys):
    """Apply one monodromy power to a face triple so its x-extent lands in [1, lam)."""
    lam = pa.lam
    one = surface.field.one()
    widths = []
    for (ka, kb, *_rest) in triple_keys:
        vx = abs(surface.field.element([Fraction(n, d) for n, d in ka[1][0]]))
        widths.append(vx)
    wmax = max(widths)
    power = 0
    w = wmax
    for _ in range(1000):
        if (w - one).sign() >= 0 and (w - lam).sign() < 0:
            break
        if (w - one).sign() < 0:
            w = w * lam
            power += 1
        else:
            w = w / lam
            power -= 1
    else:
        raise BoundExhausted("face normalization did not converge")
    out = []
    for (ka, kb, start_side, slope) in triple_keys:
        if power == 0:
            out.append((ka, kb, start_side, slope))
        else:
            ka2 = _id_image_key(surface, pa, ka, power)
            kb2 = _id_image_key(surface, pa, kb, power)
            out.append((ka2, kb2, start_side, slope))
    return out, power


def gueritaud_triangulation(surface, pa, initial_bound=None, escalations=4):
    """The layered veering triangulation of the punctured mapping torus.

    Tetrahedra are the monodromy orbits of maximal rectangles; two are glued
    along a face exactly when the corresponding triples of saddle connections
    agree up to a monodromy power.  Output labels are coherently oriented;
    the taut structure puts the angle pi on both rectangle diagonals with the
    spanning (more vertical) edge on top, and edge colors follow slope signs.
    An incomplete census surfaces as a face-pairing failure, which escalates
    the enumeration bound (doubling, up to ``escalations``) before giving up.
    """
    bound = initial_bound if initial_bound is not None else default_bound(surface)
    last = None
    for _ in range(max(1, escalations)):
        try:
            return _gueritaud_from_bound(surface, pa, bound)
        except (BoundExhausted, NonManifoldGluing) as exc:
            last = exc
            bound *= 1.6
    raise BoundExhausted(f"construction did not stabilize below bound {bound}: {last}")


def _gueritaud_from_bound(surface, pa, bound):
    rects = maximal_rectangles(surface, pa, bound)
    tets = []
    for rect in rects:
        tets.append({"rect": rect, "edges": _rect_edges(surface, rect)})

    # Face keys: normalized connection triples plus the relative geometry of
    # the three punctures.  The bare triple can collide on small symmetric
    # surfaces (an immersed rectangle may reuse a connection on two sides), so
    # positions are anchored at the canonical start of the least connection
    # and rescaled by the normalizing monodromy power.
    face_table = {}
    for t, tet in enumerate(tets):
        data = _rect_vertex_data(surface, tet["rect"])
        for f, omitted in enumerate(_LABELS):
            kept = [s for s in _LABELS if s != omitted]
            triple = []
            label_pairs = []
            for i in range(3):
                for j in range(i + 1, 3):
                    triple.append(tet["edges"][frozenset((kept[i], kept[j]))])
                    label_pairs.append((kept[i], kept[j]))
            normalized, power = _normalize_triple(surface, pa, triple)
            # canonical orientation can flip under the monodromy power, so
            # sort each normalized pair and track which label carries its min
            pairs = []
            min_label = []
            for (nka, nkb, _s, _sl), (orig, labs) in zip(normalized,
                                                         zip(triple, label_pairs)):
                start_side = orig[2]
                other = labs[1] if labs[0] == start_side else labs[0]
                if nka <= nkb:
                    pairs.append((nka, nkb))
                    min_label.append(start_side)
                else:
                    pairs.append((nkb, nka))
                    min_label.append(other)
            base_idx = min(range(3), key=lambda k: pairs[k])
            base_label = min_label[base_idx]
            base_pos = data[base_label][0]
            lam_p = pa.lam ** power
            rel = {}
            for lab in kept:
                d = _vsub(data[lab][0], base_pos)
                rel[lab] = _vkey((d[0] * lam_p, d[1] / lam_p))
            key = (tuple(sorted(pairs)), tuple(sorted(rel.values())))
            face_table.setdefault(key, []).append((t, f, rel))

    for key, faces in face_table.items():
        if len(faces) != 2:
            raise NonManifoldGluing(
                f"face matched {len(faces)} times; census incomplete or folded")

    glu = [[None] * 4 for _ in range(len(tets))]
    for key, ((t1, f1, rel1), (t2, f2, rel2)) in face_table.items():
        sigma = [None] * 4
        pos_to_label2 = {}
        for lab2, rk in rel2.items():
            if rk in pos_to_label2:
                raise NonManifoldGluing("coincident punctures on a face")
            pos_to_label2[rk] = lab2
        for lab1, rk in rel1.items():
            if rk not in pos_to_label2:
                raise NonManifoldGluing("face vertices fail to match positionally")
            sigma[_LABELS.index(lab1)] = _LABELS.index(pos_to_label2[rk])
        sigma[f1] = f2
        if sorted(x for x in sigma if x is not None) != [0, 1, 2, 3]:
            raise NonManifoldGluing("face matching does not induce a permutation")
        sigma = tuple(sigma)
        inv = [0] * 4
        for a, b in enumerate(sigma):
            inv[b] = a
        glu[t1][f1] = (t2, f2, sigma)
        glu[t2][f2] = (t1, f1, tuple(inv))

    tri = from_gluing_data(glu)
    tri2, perms = tri.oriented_copy()

    # taut structure: both diagonals carry pi; the spanning edge {B, T} is the top
    n = tri2.tet_count
    tops = []
    for t in range(n):
        rho = perms[t]
        top = tuple(sorted((rho[2], rho[3])))
        tops.append(top)
    taut = TautStructure([0] * n, tops)

    colors = [None] * len(tri2.edge_classes)
    for t, tet in enumerate(tets):
        rho = perms[t]
        for pair, (_ka, _kb, _ss, slope) in tet["edges"].items():
            a, b = sorted(_LABELS.index(s) for s in pair)
            a2, b2 = sorted((rho[a], rho[b]))
            idx = tri2.edge_index[(t, a2, b2)]
            col = RED if slope > 0 else BLUE
            if colors[idx] is None:
                colors[idx] = col
            elif colors[idx] != col:
                raise NonManifoldGluing("inconsistent edge colors across an edge class")
    if any(c is None for c in colors):
        raise NonManifoldGluing("an edge class received no color")
    veering = VeeringStructure(taut, colors)

    order = sorted(range(n), key=lambda t: -float(tets[t]["rect"].width / tets[t]["rect"].height))
    layering = {"time_order": order,
                "aspect": [float(tets[t]["rect"].width / tets[t]["rect"].height)
                           for t in range(n)]}
    return tri2, veering, layering


# -- punctured-torus bundles --

def lr_matrix(word):
    """Monodromy of an LR word; R = [[1,1],[0,1]], L = [[1,0],[1,1]]."""
    m = ((1, 0), (0, 1))
    mats = {"R": ((1, 1), (0, 1)), "L": ((1, 0), (1, 1))}
    for ch in word:
        a = mats[ch]
        m = ((m[0][0] * a[0][0] + m[0][1] * a[1][0], m[0][0] * a[0][1] + m[0][1] * a[1][1]),
             (m[1][0] * a[0][0] + m[1][1] * a[1][0], m[1][0] * a[0][1] + m[1][1] * a[1][1]))
    return m


def eigen_torus_surface(matrix):
    """The square torus sheared into the eigenbasis of a hyperbolic matrix.

    Coordinates are chosen so the matrix acts as diag(lam, 1/lam); the marked
    point at the origin is the lattice class.  Returns (surface, pa).
    """
    (a, b), (c, d) = matrix
    tr = a + d
    if a * d - b * c != 1:
        raise NotPseudoAnosov("matrix must have determinant 1")
    if tr <= 2:
        raise NotPseudoAnosov(f"trace {tr} is not hyperbolic")
    field = NumberField([1, -tr, 1], (Fraction(tr) - 1, Fraction(tr)))
    lam = field.gen()
    if b == 0:
        raise NotPseudoAnosov("matrix must mix the standard basis (b != 0)")
    # eigenvectors u+ = (b, lam - a), u- = (b, mu - a) with mu = tr - lam
    mu = field.from_rational(tr) - lam
    up = (field.from_rational(b), lam - field.from_rational(a))
    um = (field.from_rational(b), mu - field.from_rational(a))
    det = up[0] * um[1] - up[1] * um[0]
    # eigen-coordinates of the standard basis: solve (e) = x*up + y*um
    def coords(v0, v1):
        v = (field.from_rational(v0), field.from_rational(v1))
        x = (v[0] * um[1] - v[1] * um[0]) / det
        y = (up[0] * v[1] - up[1] * v[0]) / det
        return (x, y)
    E1 = coords(1, 0)
    E2 = coords(0, 1)
    if (E1[0] * E2[1] - E1[1] * E2[0]).sign() < 0:
        E2 = _vneg(E2)
    zero = field.zero()
    poly = [(zero, zero), E1, _vadd(E1, E2), E2]
    surface = FlatSurface(field, [poly], [(0, 0, 0, 2, 1), (0, 1, 0, 3, 1)])
    pa = AffinePA(field, lam, [0])
    return surface, pa


def ptorus_bundle(word):
    """Veering triangulation of the once-punctured-torus bundle over an LR word."""
    if not word or set(word) - {"L", "R"}:
        raise NotPseudoAnosov("word must be a nonempty string over {L, R}")
    if "L" not in word or "R" not in word:
        raise NotPseudoAnosov(f"word {word!r} gives a non-hyperbolic (trace <= 2) matrix")
    surface, pa = eigen_torus_surface(lr_matrix(word))
    tri, veering, _layering = gueritaud_triangulation(surface, pa)
    return tri, veering


# -- serialization --

def surface_to_json_obj(surface, pa=None):
    obj = {"field": surface.field.to_json_obj(),
           "polygons": [[[v[0].to_json_obj(), v[1].to_json_obj()] for v in poly]
                        for poly in surface.polygons],
           "identifications": [list(ident) for ident in surface.identifications]}
    if pa is not None:
        obj["automorphism"] = {"lambda": pa.lam.to_json_obj(),
                               "vertex_class_map": list(pa.vertex_class_map)}
        if pa.corner_map:
            obj["automorphism"]["corner_map"] = [
                [list(k), list(v)] for k, v in pa.corner_map.items()]
    return obj


def surface_from_json_obj(obj):
    field = NumberField.from_json_obj(obj["field"])

    def elem(data):
        return field.element([Fraction(n, d) for n, d in data])

    polygons = [[(elem(x), elem(y)) for x, y in poly] for poly in obj["polygons"]]
    idents = [tuple(e) for e in obj["identifications"]]
    surface = FlatSurface(field, polygons, idents)
    pa = None
    if "automorphism" in obj:
        auto = obj["automorphism"]
        lam = elem(auto["lambda"])
        corner_map = None
        if auto.get("corner_map"):
            corner_map = {tuple(k): tuple(v) for k, v in auto["corner_map"]}
        pa = AffinePA(field, lam, auto["vertex_class_map"], corner_map)
    return surface, pa


def surface_from_json(text):
    return surface_from_json_obj(json.loads(text))
