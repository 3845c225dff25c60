"""Gluing/completeness equations, Newton solving, volumes, and Pachner transport.

Shape conventions.  A tetrahedron with vertex labels (0,1,2,3) placed at
projective points (p0,p1,p2,p3) on the boundary sphere has shape

    z = cross(p0,p1,p2,p3) = (d30*d21)/(d20*d31),   dij = xi*yj - xj*yi,

so that edges (01),(23) carry z, edges (03),(12) carry z' = 1/(1-z), and
edges (02),(13) carry z'' = 1 - 1/z.  Equations are kept in logarithmic form

    sum_j A_j log z_j + B_j log(1-z_j) = i*pi*C

with integer A, B, C; C absorbs the constant i*pi carried by each z''-type
parameter, normalized at the complete structure.
"""

import cmath
import json
import math
import random as _random
from fractions import Fraction

from .errors import (DegenerateDrift, DegenerateMove, DegenerateShape,
                     NoConvergence, NonTorusLink, SingularJacobian)
from .triangulation import EDGE_PAIRS, PAIR_OF_EDGE

TWO_PI = 2.0 * math.pi


# -- shape assignments --

class ShapeAssignment:
    """Per-tetrahedron complex shapes plus log-branch integers.

    ``branches[j] = (p, q)`` means the logarithms used for tetrahedron j are
    Log z_j + 2*pi*i*p and Log(1-z_j) + 2*pi*i*q.
    """

    def __init__(self, shapes, branches=None):
        self.shapes = tuple(complex(z) for z in shapes)
        if branches is None:
            branches = [(0, 0)] * len(self.shapes)
        self.branches = tuple((int(p), int(q)) for p, q in branches)

    def __len__(self):
        return len(self.shapes)

    def __getitem__(self, i):
        return self.shapes[i]

    def conjugate(self):
        return ShapeAssignment([z.conjugate() for z in self.shapes],
                               [(-p, -q) for p, q in self.branches])

    def to_json_obj(self):
        return {"shapes": [[f"{z.real:.25g}", f"{z.imag:.25g}"] for z in self.shapes],
                "branches": [list(b) for b in self.branches]}

    @classmethod
    def from_json_obj(cls, obj):
        shapes = [complex(float(re), float(im)) for re, im in obj["shapes"]]
        return cls(shapes, [tuple(b) for b in obj["branches"]])

    def __repr__(self):
        return f"ShapeAssignment({list(self.shapes)})"


# -- system assembly --

class Row:
    """One log-form equation: counts of each parameter type per tetrahedron.

    ``incidence[(t, pair)]`` is the signed number of times tetrahedron t's
    parameter of that type appears; ``kind`` is "edge" or "cusp".
    """

    def __init__(self, kind, incidence, n_tets, meta=None):
        self.kind = kind
        self.incidence = dict(incidence)
        self.meta = meta
        self.A = [0] * n_tets
        self.B = [0] * n_tets
        const = 0
        for (t, pair), m in self.incidence.items():
            if pair == 0:
                self.A[t] += m
            elif pair == 1:
                self.B[t] -= m
            else:
                self.A[t] -= m
                self.B[t] += m
                const += m
        if kind == "edge":
            self.C = 2 - const
        else:
            self.C = -const

    def coefficient_sum(self):
        return sum(self.incidence.values())

    def value(self, assignment):
        tot = 0j
        for j, (A, B) in enumerate(zip(self.A, self.B)):
            if A == 0 and B == 0:
                continue
            z = assignment.shapes[j]
            p, q = assignment.branches[j]
            if A:
                tot += A * (cmath.log(z) + 2j * math.pi * p)
            if B:
                tot += B * (cmath.log(1 - z) + 2j * math.pi * q)
        return tot - 1j * math.pi * self.C

    def derivative(self, shapes, j):
        z = shapes[j]
        return self.A[j] / z - self.B[j] / (1 - z)


class GluingSystem:
    """Edge rows (target 2*pi*i) and two holonomy rows per cusp (target 0)."""

    def __init__(self, tri, cusps):
        if not tri.is_oriented:
            raise ValueError(
                "gluing equations require a coherently oriented triangulation; "
                "normalize with oriented_copy() first")
        self.tri = tri
        self.cusps = cusps
        n = tri.tet_count
        self.rows = []
        for e, cls in enumerate(tri.edge_classes):
            inc = {}
            for (t, a, b) in cls:
                key = (t, PAIR_OF_EDGE[(a, b)])
                inc[key] = inc.get(key, 0) + 1
            self.rows.append(Row("edge", inc, n, meta=("edge", e)))
        for ci, cusp in enumerate(cusps):
            for bi, inc in enumerate(cusp.basis_incidences()):
                self.rows.append(Row("cusp", inc, n, meta=("cusp", ci, bi)))
        self.n_edges = len(tri.edge_classes)
        self.n_cusps = len(cusps)
        # endpoints of each edge class on each cusp, and corner counts per cusp
        self.edge_cusp_counts = [[0] * self.n_cusps for _ in range(self.n_edges)]
        for e, cls in enumerate(tri.edge_classes):
            t, a, b = cls[0]
            for v in (a, b):
                self.edge_cusp_counts[e][tri.vertex_index[(t, v)]] += 1
        self.cusp_corner_counts = [len(tri.vertex_classes[j]) for j in range(self.n_cusps)]
        self._plan_square_subsystem()

    def _plan_square_subsystem(self):
        """One dropped edge row per cusp; kept rows: other edges + first basis curve."""
        dropped = []
        used = set()
        for j in range(self.n_cusps):
            cand = [e for e in range(self.n_edges)
                    if self.edge_cusp_counts[e][j] > 0 and e not in used]
            if not cand:
                raise NonTorusLink(f"cusp {j} has no incident edge class")
            e = max(cand)
            dropped.append(e)
            used.add(e)
        self.dropped_edges = dropped
        self.square_rows = [r for r in self.rows
                            if (r.meta[0] == "edge" and r.meta[1] not in used)
                            or (r.meta[0] == "cusp" and r.meta[2] == 0)]
        self.checked_rows = [r for r in self.rows if r not in self.square_rows]

    def size(self):
        return self.tri.tet_count

    def residuals(self, assignment, reduce_mod=False):
        out = []
        for row in self.rows:
            v = row.value(assignment)
            if reduce_mod:
                v -= 2j * math.pi * round(v.imag / TWO_PI)
            out.append(v)
        return out

    def max_residual(self, assignment, reduce_mod=False):
        return max(abs(v) for v in self.residuals(assignment, reduce_mod))


def assemble(tri, cusps=None):
    """Build the gluing system; cusp sections are computed when not supplied."""
    if cusps is None:
        from .veering import cusp_cross_section
        cusps = cusp_cross_section(tri)
    return GluingSystem(tri, cusps)


# -- Newton solving --

_GUARD_NEAR = 1e-8
_GUARD_FAR = 1e10


def _check_drift(shapes):
    for z in shapes:
        if abs(z) < _GUARD_NEAR or abs(z - 1) < _GUARD_NEAR or abs(z) > _GUARD_FAR:
            raise DegenerateDrift(f"shape {z} entered the degeneracy guard region")


def _reduce_lattice(v):
    return v - 2j * math.pi * round(v.imag / TWO_PI)


def _newton(system, z0, tol, max_iter=60, reduce=False):
    """Newton on the square subsystem with fixed winding targets.

    In ``reduce`` mode each residual is taken modulo the 2*pi*i lattice, which
    reaches solutions whose log branches differ from the standard targets
    (typical for non-geometric solutions).
    """
    import numpy as np
    rows = system.square_rows
    n = system.size()
    z = np.array(z0, dtype=complex)
    assignment = ShapeAssignment(z)
    for _ in range(max_iter):
        _check_drift(z)
        F = np.array([row.value(assignment) for row in rows])
        if reduce:
            F = np.array([_reduce_lattice(v) for v in F])
        if np.max(np.abs(F)) < tol:
            full = system.max_residual(assignment, reduce_mod=reduce)
            if full < tol * 10:
                return ShapeAssignment(z)
            raise NoConvergence("square subsystem converged but a dropped row fails")
        J = np.array([[row.derivative(z, j) for j in range(n)] for row in rows])
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from None
        # damped update to avoid wild excursions early on
        scale = 1.0
        if np.max(np.abs(step)) > 0.5:
            scale = 0.5 / np.max(np.abs(step))
        z = z - scale * step
        assignment = ShapeAssignment(z)
    raise NoConvergence(f"Newton did not reach residual {tol}")


def solve(system, initial=None, tol=1e-12):
    """Shapes satisfying every row to ``tol``; deterministic retry ladder.

    Strict winding targets are tried first from each initial guess, then the
    lattice-reduced iteration; the default ladder starts at all-i and falls
    back to ten random points in the upper half disk around 0.5 + 0.87i.
    """
    n = system.size()
    attempts = []
    if initial is not None:
        attempts.append(list(initial.shapes if isinstance(initial, ShapeAssignment) else initial))
    attempts.append([1j] * n)
    rng = _random.Random(0)
    for _ in range(10):
        attempts.append([complex(0.5 + 0.87j)
                         + 0.4 * math.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
                         for _ in range(n)])
    last = None
    for reduce in (False, True):
        for z0 in attempts:
            try:
                return _newton(system, z0, tol, reduce=reduce)
            except (NoConvergence, SingularJacobian, DegenerateDrift) as exc:
                last = exc
    raise NoConvergence(f"all initial guesses failed: {last}")


# -- classification --

class Classification:
    GEOMETRIC = "Geometric"
    NON_GEOMETRIC = "NonGeometric"
    CONTAINS_FLAT = "ContainsFlat"

    def __init__(self, kind, indices=()):
        self.kind = kind
        self.indices = tuple(indices)

    def __eq__(self, other):
        if isinstance(other, str):
            return self.kind == other
        return (self.kind, self.indices) == (other.kind, other.indices)

    def __repr__(self):
        return f"Classification({self.kind}, {list(self.indices)})"


def classify(shapes, tol=1e-9):
    ims = [z.imag for z in shapes.shapes] if isinstance(shapes, ShapeAssignment) \
        else [complex(z).imag for z in shapes]
    if all(im > tol for im in ims):
        return Classification(Classification.GEOMETRIC)
    neg = [i for i, im in enumerate(ims) if im < -tol]
    if neg:
        return Classification(Classification.NON_GEOMETRIC, neg)
    flat = [i for i, im in enumerate(ims) if abs(im) <= tol]
    return Classification(Classification.CONTAINS_FLAT, flat)


# -- volume via the Lobachevsky function --

def _bernoulli_numbers(count):
    """B_0 .. B_{count-1} as exact Fractions."""
    out = [Fraction(1)]
    for m in range(1, count):
        acc = Fraction(0)
        binom = 1
        for j in range(m):
            acc += binom * out[j]
            binom = binom * (m + 1 - j) // (j + 1)
        out.append(-acc / (m + 1))
    return out


def _lobachevsky_coefficients(n_terms=32):
    """c_n = zeta(2n)/(n(2n+1)pi^{2n}) = 4^n |B_{2n}| / (2 n (2n+1) (2n)!), exact."""
    bern = _bernoulli_numbers(2 * n_terms + 2)
    coeffs = []
    fact = 1
    for n in range(1, n_terms + 1):
        for k in (2 * n - 1, 2 * n):
            fact *= k
        c = Fraction(4 ** n) * abs(bern[2 * n]) / (2 * n * (2 * n + 1) * fact)
        coeffs.append(c)
    return coeffs

_LOB_COEFFS_EXACT = _lobachevsky_coefficients()
LOB_COEFFS = [float(c) for c in _LOB_COEFFS_EXACT]


def lobachevsky(theta):
    """The Lobachevsky function, odd and pi-periodic; series valid on [-pi/2, pi/2]."""
    theta = math.fmod(theta, math.pi)
    if theta > math.pi / 2:
        theta -= math.pi
    elif theta < -math.pi / 2:
        theta += math.pi
    if theta == 0.0:
        return 0.0
    sign = 1.0
    if theta < 0:
        theta, sign = -theta, -1.0
    acc = theta - theta * math.log(2.0 * theta)
    t2 = theta * theta
    power = theta
    for c in LOB_COEFFS:
        power *= t2
        acc += c * power
    return sign * acc


def bloch_wigner(z):
    """D(z): signed volume of the ideal tetrahedron of shape z."""
    z = complex(z)
    if not (abs(z) > 0 and abs(z - 1) > 0) or cmath.isinf(z) or cmath.isnan(z):
        raise DegenerateShape(f"shape {z} has no volume")
    if z.imag == 0.0:
        return 0.0
    if z.imag < 0:
        return -bloch_wigner(z.conjugate())
    alpha = cmath.phase(z)
    beta = cmath.phase(1 / (1 - z))
    gamma = cmath.phase((z - 1) / z)
    return lobachevsky(alpha) + lobachevsky(beta) + lobachevsky(gamma)


def volume(shapes):
    """Total algebraic volume: the sum of D over all shape coordinates."""
    seq = shapes.shapes if isinstance(shapes, ShapeAssignment) else shapes
    return sum(bloch_wigner(z) for z in seq)


# -- cross-ratio machinery (generic over the scalar type) --

def _det2(p, q):
    return p[0] * q[1] - q[0] * p[1]


def cross_ratio(p0, p1, p2, p3):
    num = _det2(p3, p0) * _det2(p2, p1)
    den = _det2(p2, p0) * _det2(p3, p1)
    return num / den


def _solve3(z, a, b, c):
    """The point X with cross(a, b, c, X) = z."""
    dca = _det2(c, a)
    dcb = _det2(c, b)
    return (z * dca * b[0] - dcb * a[0], z * dca * b[1] - dcb * a[1])


def solve_fourth_point(z, points, unknown):
    """Place the missing vertex of a tetrahedron of shape z.

    ``points`` is a dict label -> projective pair for the three known labels
    0..3; ``unknown`` is the missing slot.
    """
    p = points
    if unknown == 3:
        return _solve3(z, p[0], p[1], p[2])
    if unknown == 2:
        return _solve3(1 / z, p[0], p[1], p[3])
    if unknown == 1:
        return _solve3(z, p[2], p[3], p[0])
    return _solve3(1 / z, p[2], p[3], p[1])


def tet_shape(points):
    return cross_ratio(points[0], points[1], points[2], points[3])


_DEGEN_TOL = 1e-10


def _require_nondegenerate(z, context):
    a = abs(z)
    if not (a > _DEGEN_TOL and abs(z - 1) > _DEGEN_TOL and a < _GUARD_FAR):
        raise DegenerateMove(f"{context}: produced shape {z} is degenerate")
    return z


_TAGS = ("e0", "e1", "e2", "a", "b")


def place_bipyramid(known_frames, known_shapes, one=1.0):
    """Projective positions of the five bipyramid points from framed shapes.

    ``known_frames`` maps tetrahedron index -> 4-tuple of point tags (one per
    vertex label); ``known_shapes`` gives each such tetrahedron's shape.  Three
    tags are pinned to a standard position and the rest are solved greedily
    from tetrahedra with a single unplaced vertex.  ``one`` fixes the scalar
    type so the identical code runs on floats and interval boxes.

    Raises DegenerateMove when the placement cannot be completed (collapsed
    points make the cross-ratio solve singular).
    """
    zero = one - one
    std = ((zero, one), (one, zero), (one, one))
    tets = sorted(known_frames)
    from itertools import combinations
    last_err = None
    for fixed in combinations(_TAGS, 3):
        pos = {tag: std[i] for i, tag in enumerate(fixed)}
        try:
            progress = True
            while progress and len(pos) < 5:
                progress = False
                for t in tets:
                    frame = known_frames[t]
                    unknown = [i for i in range(4) if frame[i] not in pos]
                    if len(unknown) != 1:
                        continue
                    i = unknown[0]
                    pts = {j: pos[frame[j]] for j in range(4) if j != i}
                    p = solve_fourth_point(known_shapes[t], pts, i)
                    if p[0] == zero and p[1] == zero:
                        raise ZeroDivisionError("degenerate projective point")
                    pos[frame[i]] = p
                    progress = True
            if len(pos) == 5:
                return pos
        except ZeroDivisionError as exc:
            last_err = exc
            continue
    raise DegenerateMove(f"bipyramid placement failed: {last_err}")


def _transport(shapes, move, after_count, forward, one=1.0):
    d = move.detail
    src_frames = d["old_frames"] if forward else d["new_frames"]
    dst_frames = d["new_frames"] if forward else d["old_frames"]
    seq = shapes.shapes if isinstance(shapes, ShapeAssignment) else shapes
    for t in src_frames:
        _require_nondegenerate(seq[t], "transport source")
    pos = place_bipyramid(src_frames, {t: seq[t] for t in src_frames}, one=one)
    out = [None] * after_count
    if forward:
        for old, new in move.tet_map.items():
            out[new] = seq[old]
    else:
        for old, new in move.tet_map.items():
            out[old] = seq[new]
    for t, frame in dst_frames.items():
        try:
            z = cross_ratio(*(pos[tag] for tag in frame))
        except ZeroDivisionError:
            raise DegenerateMove("transport flattened a tetrahedron") from None
        out[t] = _require_nondegenerate(z, "transport target")
    return out


def transport_23(shapes, move, before, after):
    """Push shapes through a 2-3 move; replacement tetrahedra get cross-ratio shapes."""
    if move.kind != "23":
        raise ValueError("transport_23 expects a 2-3 move")
    return ShapeAssignment(_transport(shapes, move, after.tet_count, forward=True))


def transport_32(shapes, move, before, after):
    """Push shapes through a 3-2 move."""
    if move.kind != "32":
        raise ValueError("transport_32 expects a 3-2 move")
    return ShapeAssignment(_transport(shapes, move, after.tet_count, forward=True))


def transport_backward(shapes_after, move, before_count, one=1.0):
    """Recover the shapes on the pre-move triangulation from post-move shapes.

    Works generically over the scalar type (floats or interval boxes); used by
    the certification backward pass.
    """
    return _transport(shapes_after, move, before_count, forward=False, one=one)
