"""Interval-certified geometricity and non-geometricity of ideal triangulations.

The pipeline: verify a geometric solution on some triangulation with a
Krawczyk test over complex interval boxes, then transport the certified boxes
backward along a Pachner path with interval cross-ratio arithmetic.  Every
intermediate box must stay away from {0, 1} and the real axis, so the final
boxes on the starting triangulation pin the sign of each shape's imaginary
part.  Certificates replay with interval evaluation only; no solving.
"""

import json
import math
import random as _random
from fractions import Fraction

from . import __version__
from .errors import (BudgetExhausted, NoConvergence, NotCertified, NotNonGeometric,
                     TransportDegenerate, VeerkitError, VerificationFailed,
                     DegenerateMove, SingularJacobian, DegenerateDrift)
from .geometry import (GluingSystem, ShapeAssignment, assemble, classify, solve,
                       transport_23, transport_32, transport_backward, Classification)
from .interval import PI, ComplexBox, RealInterval
from .triangulation import (IdealTriangulation, from_json_obj, pachner_23,
                            pachner_32)

GEOMETRIC = "GeometricCertified"
NON_GEOMETRIC = "NonGeometricCertified"


class BoxAssignment:
    """One certified rectangle per tetrahedron shape."""

    def __init__(self, boxes, unique=False):
        self.boxes = list(boxes)
        self.unique = unique

    def __len__(self):
        return len(self.boxes)

    def __getitem__(self, i):
        return self.boxes[i]

    def all_positive(self):
        return all(b.im.lo > 0 for b in self.boxes)

    def any_negative(self):
        return any(b.im.hi < 0 for b in self.boxes)

    def nondegenerate(self):
        return all(b.is_finite() and b.excludes_point(0) and b.excludes_point(1)
                   and b.excludes_real_axis() for b in self.boxes)


# -- interval row evaluation --

def row_value_boxes(row, boxes, winding=0):
    total = ComplexBox.exact(0.0)
    for j in range(len(boxes)):
        a, b = row.A[j], row.B[j]
        if a:
            total = total + boxes[j].log() * a
        if b:
            total = total + (1 - boxes[j]).log() * b
    target = PI * (row.C + 2 * winding)
    return total - ComplexBox(RealInterval(0.0), target)


def row_jacobian_boxes(row, boxes):
    out = []
    for j in range(len(boxes)):
        a, b = row.A[j], row.B[j]
        entry = ComplexBox.exact(0.0)
        if a:
            entry = entry + a / boxes[j]
        if b:
            entry = entry - b / (1 - boxes[j])
        out.append(entry)
    return out


def _mat_vec_boxes(M, v):
    out = []
    for row in M:
        acc = ComplexBox.exact(0.0)
        for x, y in zip(row, v):
            acc = acc + x * y
        out.append(acc)
    return out


def _mat_mul_boxes(A, B):
    n, m, k = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc = ComplexBox.exact(0.0)
            for t in range(m):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


# -- Krawczyk verification --

def _windings(system, approx):
    """Nearest 2*pi*i lattice shift of each row at the approximate solution."""
    out = []
    for row in system.rows:
        v = row.value(approx)
        out.append(round(v.imag / (2 * math.pi)))
    return out


def _verify_dropped_edges(system, windings):
    """Exact verification that the dropped edge rows hold at any solution of
    the kept rows, via the per-cusp corner-sum identities.

    Around a cusp, the three shape parameters at each corner triangle sum to
    i*pi exactly, so the edge rows weighted by endpoint counts satisfy a
    pointwise linear identity.  This pins the dropped rows' values to exact
    multiples of i*pi; solving the resulting linear system over the dropped
    rows must reproduce their targets.
    """
    n_edges = system.n_edges
    n_cusps = system.n_cusps
    dropped = system.dropped_edges
    # integer-level identity check: weighted coefficient vectors cancel
    for j in range(n_cusps):
        accA = [0] * system.size()
        accB = [0] * system.size()
        for e in range(n_edges):
            w = system.edge_cusp_counts[e][j]
            if w:
                row = system.rows[e]
                accA = [x + w * a for x, a in zip(accA, row.A)]
                accB = [x + w * b for x, b in zip(accB, row.B)]
        if any(accA) or any(accB):
            raise VerificationFailed("corner-sum identity fails at the coefficient level")
    # solve for the dropped rows' values (in units of i*pi) exactly
    M = [[Fraction(system.edge_cusp_counts[d][j]) for d in dropped]
         for j in range(n_cusps)]
    rhs = []
    for j in range(n_cusps):
        total = Fraction(system.cusp_corner_counts[j])
        for e in range(n_edges):
            w = system.edge_cusp_counts[e][j]
            if not w:
                continue
            row = system.rows[e]
            n2 = sum(m for (t, p), m in row.incidence.items() if p == 2)
            total -= w * n2
            if e not in dropped:
                if windings[e] != 0:
                    raise VerificationFailed("edge row with nonstandard winding")
                total -= w * row.C
        rhs.append(total)
    sol = _solve_fraction_system(M, rhs)
    if sol is None:
        raise VerificationFailed("dropped-edge system is singular; cannot pin values")
    for d, val in zip(dropped, sol):
        if val != system.rows[d].C or windings[d] != 0:
            raise VerificationFailed(
                f"dropped edge row {d} pinned to {val} i*pi, target {system.rows[d].C} i*pi")


def _solve_fraction_system(M, rhs):
    n = len(M)
    A = [list(row) + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


def krawczyk_verify(system, approx, inflation=1.0):
    """Certify a unique solution near ``approx`` in interval boxes.

    On success the returned boxes each contain exactly one solution of the
    square subsystem; the dropped edge rows are pinned exactly through the
    corner-sum identities, and the remaining holonomy rows are verified over
    the boxes (their values lie on the 2*pi*i lattice once the meridians are
    parabolic, so an enclosure within the open pi/2 disk around the target is
    decisive).  Fails rather than returning an unverified enclosure.
    """
    import numpy as np
    res = system.max_residual(approx, reduce_mod=True)
    if not res <= 1e-8:
        raise VerificationFailed(f"approximate residual {res} exceeds 1e-8")
    windings = _windings(system, approx)
    row_index = {id(r): i for i, r in enumerate(system.rows)}
    sq = system.square_rows
    n = system.size()
    z = list(approx.shapes)
    J_mid = np.array([[row.derivative(z, j) for j in range(n)] for row in sq])
    try:
        Y = np.linalg.inv(J_mid)
    except np.linalg.LinAlgError as exc:
        raise VerificationFailed(f"midpoint Jacobian is singular: {exc}") from None
    Y_boxes = [[ComplexBox.exact(complex(Y[i, j])) for j in range(n)] for i in range(n)]
    mid_boxes = [ComplexBox.exact(w) for w in z]
    F_mid = [row_value_boxes(row, mid_boxes, windings[row_index[id(row)]]) for row in sq]
    YF = _mat_vec_boxes(Y_boxes, F_mid)

    radius = max(1e-12, 20 * res) * inflation
    boxes = None
    for _attempt in range(10):
        X = [ComplexBox.from_center(w, radius) for w in z]
        K = _krawczyk_operator(sq, windings, row_index, X, mid_boxes, YF, Y_boxes)
        if K is not None and all(x.strictly_contains(k) for x, k in zip(X, K)):
            boxes = K
            for _ in range(3):   # contraction iterations tighten the enclosure
                K2 = _krawczyk_operator(sq, windings, row_index, boxes, mid_boxes, YF, Y_boxes)
                if K2 is None or not all(b.contains(k) for b, k in zip(boxes, K2)):
                    break
                boxes = K2
            break
        radius *= 8
    if boxes is None:
        raise VerificationFailed("Krawczyk operator never contracted")

    out = BoxAssignment(boxes, unique=True)
    if not out.nondegenerate():
        raise VerificationFailed("certified boxes meet {0,1} or the real axis")
    _verify_dropped_edges(system, windings)
    _verify_dropped_cusp_rows(system, windings, boxes, out)
    return out, windings


def _krawczyk_operator(sq_rows, windings, row_index, X, mid_boxes, YF, Y_boxes):
    n = len(X)
    try:
        J_int = [row_jacobian_boxes(row, X) for row in sq_rows]
        YJ = _mat_mul_boxes(Y_boxes, J_int)
        IYJ = [[(1 if i == j else 0) - YJ[i][j] for j in range(n)] for i in range(n)]
        dx = [X[j] - mid_boxes[j] for j in range(n)]
        spread = _mat_vec_boxes(IYJ, dx)
        return [mid_boxes[i] - YF[i] + spread[i] for i in range(n)]
    except (ZeroDivisionError, VeerkitError):
        return None


def _verify_dropped_cusp_rows(system, windings, boxes, assignment):
    """Interval check of the unkept holonomy rows over the certified boxes.

    Requires all boxes on one side of the real axis with positive imaginary
    part: then the meridian holonomies certified by the square system are
    parabolic, the commuting longitude holonomies are parabolic as well, and
    the rows' true values sit on the 2*pi*i lattice.
    """
    kept = set(id(r) for r in system.square_rows)
    unkept = [r for r in system.rows if r.kind == "cusp" and id(r) not in kept]
    if not unkept:
        return
    if not assignment.all_positive():
        raise VerificationFailed(
            "longitude verification requires all-positive boxes (geometric case)")
    row_index = {id(r): i for i, r in enumerate(system.rows)}
    for row in unkept:
        val = row_value_boxes(row, boxes, windings[row_index[id(row)]])
        mag = max(abs(val.re.lo), abs(val.re.hi), abs(val.im.lo), abs(val.im.hi))
        if not mag < math.pi / 2:
            raise VerificationFailed(
                f"holonomy row enclosure {val} not within pi/2 of its target")


# -- certificates --

class Certificate:
    """A Pachner path with per-step certified boxes and a verdict."""

    def __init__(self, triangulations, moves, box_steps, verdict, seed=None,
                 windings=None, version=__version__):
        self.triangulations = list(triangulations)
        self.moves = list(moves)           # (kind, target) pairs
        self.box_steps = [list(bs) for bs in box_steps]
        self.verdict = verdict
        self.seed = seed
        self.windings = list(windings) if windings is not None else None
        self.version = version

    def to_json_obj(self):
        def box_json(b):
            return [float.hex(v) for v in b.endpoints()]
        return {
            "steps": [{"triangulation": tri.to_json_obj(),
                       "boxes": [box_json(b) for b in boxes]}
                      for tri, boxes in zip(self.triangulations, self.box_steps)],
            "moves": [{"kind": kind, "target": list(t) if isinstance(t, tuple) else t}
                      for kind, t in self.moves],
            "verdict": self.verdict,
            "seed": self.seed,
            "windings": self.windings,
            "version": self.version,
        }

    def to_json(self):
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj):
        tris = []
        box_steps = []
        for step in obj["steps"]:
            tris.append(from_json_obj(step["triangulation"]))
            boxes = []
            for b in step["boxes"]:
                vals = [float.fromhex(x) for x in b]
                boxes.append(ComplexBox.from_endpoints(*vals))
            box_steps.append(boxes)
        moves = [(m["kind"], tuple(m["target"]) if isinstance(m["target"], list) else m["target"])
                 for m in obj["moves"]]
        return cls(tris, moves, box_steps, obj["verdict"], obj.get("seed"),
                   obj.get("windings"), obj.get("version", "?"))

    @classmethod
    def from_json(cls, text):
        return cls.from_json_obj(json.loads(text))


def _inflate_slightly(box):
    r = 1e-15 * max(1.0, max(abs(v) for v in box.endpoints())) + 1e-300
    return box.inflated(r)


def _tight(stored, computed, rel=1e-10):
    """Stored enclosures may exceed recomputed ones only by a tiny slack.

    This makes every materially loosened endpoint detectable: a loosened box
    is still a true enclosure, but it is no longer the one this pipeline
    produces, so the certificate is rejected as tampered.
    """
    slack = rel * max(1.0, max(abs(v) for v in computed.endpoints()))
    return computed.inflated(slack).contains(stored)


def certify_geometric(tri):
    """Certificate that the triangulation is geometric, or NotCertified."""
    if not tri.is_oriented:
        raise NotCertified("triangulation must be coherently oriented")
    try:
        system = assemble(tri)
        approx = solve(system)
        boxes, windings = krawczyk_verify(system, approx)
    except (NoConvergence, SingularJacobian, DegenerateDrift, VerificationFailed) as exc:
        raise NotCertified(str(exc)) from None
    if not boxes.all_positive():
        raise NotCertified("certified boxes are not all positively oriented")
    stored = [_inflate_slightly(b) for b in boxes.boxes]
    return Certificate([tri], [], [stored], GEOMETRIC, windings=windings)


# -- path search --

def _negative_tets(shapes, tol=1e-9):
    return [i for i, z in enumerate(shapes.shapes) if z.imag < -tol]


def _candidate_moves(tri, shapes, rng, eps=0.25):
    """Moves biased toward negatively oriented tetrahedra, epsilon-greedy."""
    neg = set(_negative_tets(shapes))
    faces = []
    edges = []
    for t in range(tri.tet_count):
        for f in range(4):
            t2 = tri.gluings[t][f][0]
            if t2 != t:
                biased = t in neg or t2 in neg
                faces.append((biased, ("23", (t, f))))
    for e, cls in enumerate(tri.edge_classes):
        if len(cls) == 3 and len({s[0] for s in cls}) == 3:
            biased = any(s[0] in neg for s in cls)
            edges.append((biased, ("32", e)))
    pool = faces + edges
    biased_pool = [m for b, m in pool if b]
    all_pool = [m for _b, m in pool]
    rng.shuffle(biased_pool)
    rng.shuffle(all_pool)
    if biased_pool and rng.random() > eps:
        return biased_pool + all_pool
    return all_pool


def _apply_move(tri, move_spec):
    kind, target = move_spec
    if kind == "23":
        return pachner_23(tri, tuple(target))
    return pachner_32(tri, int(target))


def _transport_forward(shapes, move, before, after):
    if move.kind == "23":
        return transport_23(shapes, move, before, after)
    return transport_32(shapes, move, before, after)


def find_geometric_path(tri, budget=20000, seed=0, initial=None):
    """A Pachner path from ``tri`` to a certified-geometric triangulation.

    Returns (triangulations, move specs, final boxes, final windings); the
    search is a seeded random walk biased toward negatively oriented
    tetrahedra, with restarts, and is deterministic given the seed.
    """
    if not tri.is_oriented:
        raise NotCertified("triangulation must be coherently oriented")
    rng = _random.Random(seed)
    system0 = assemble(tri)
    shapes0 = solve(system0, initial=initial)
    spent = 0
    max_len = 24
    while spent < budget:
        cur_tri, shapes = tri, shapes0
        tris, moves = [tri], []
        for _step in range(max_len):
            spent += 1
            if spent > budget:
                break
            if classify(shapes).kind == Classification.GEOMETRIC:
                try:
                    cur_system = assemble(cur_tri)
                    refined = _refine(cur_system, shapes)
                    boxes, windings = krawczyk_verify(cur_system, refined)
                    if boxes.all_positive():
                        return tris, moves, boxes, windings
                except (VerificationFailed, NoConvergence, SingularJacobian,
                        DegenerateDrift):
                    pass
            advanced = False
            for spec in _candidate_moves(cur_tri, shapes, rng):
                try:
                    new_tri, move = _apply_move(cur_tri, spec)
                    new_shapes = _transport_forward(shapes, move, cur_tri, new_tri)
                    new_system = assemble(new_tri)
                    new_shapes = _refine(new_system, new_shapes)
                except (DegenerateMove, NoConvergence, SingularJacobian,
                        DegenerateDrift, VeerkitError):
                    spent += 1
                    continue
                cur_tri, shapes = new_tri, new_shapes
                tris.append(new_tri)
                moves.append(spec)
                advanced = True
                break
            if not advanced:
                break
    raise BudgetExhausted(f"no geometric path found within budget {budget}")


def _refine(system, shapes, tol=1e-12):
    """Newton polish against the lattice-nearest targets; keeps the same branch."""
    import numpy as np
    windings = _windings(system, shapes)
    rows = system.square_rows
    idx = {id(r): i for i, r in enumerate(system.rows)}
    n = system.size()
    z = np.array(shapes.shapes, dtype=complex)
    for _ in range(30):
        sa = ShapeAssignment(z)
        F = np.array([row.value(sa) - 2j * math.pi * windings[idx[id(row)]]
                      for row in rows])
        if np.max(np.abs(F)) < tol:
            full = system.max_residual(sa, reduce_mod=True)
            if full < tol * 100:
                return sa
            raise NoConvergence("refinement left a dropped row unsatisfied")
        J = np.array([[row.derivative(z, j) for j in range(n)] for row in rows])
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from None
        if np.max(np.abs(step)) > 0.25:
            step = step * (0.25 / np.max(np.abs(step)))
        z = z - step
        for w in z:
            if abs(w) < 1e-9 or abs(w - 1) < 1e-9 or abs(w) > 1e9:
                raise DegenerateDrift(f"refinement drifted to {w}")
    raise NoConvergence("refinement did not converge")


def certify_nongeometric(tri, budget=20000, seed=0, initial=None):
    """The backward-transport certificate that ``tri`` is non-geometric.

    Finds a Pachner path to a certified-geometric triangulation, transports
    the certified boxes backward with interval cross-ratio evaluation, checks
    every intermediate box against {0,1} and the real axis, and demands a
    strictly negative box on the starting triangulation.
    """
    if not tri.is_oriented:
        raise NotCertified("triangulation must be coherently oriented")
    rng = _random.Random(seed)
    spent = 0
    last_exc = None
    while spent < budget:
        sub_seed = rng.getrandbits(32)
        sub_budget = min(budget - spent, 4000)
        try:
            tris, moves, final_boxes, windings = find_geometric_path(
                tri, budget=sub_budget, seed=sub_seed, initial=initial)
        except BudgetExhausted as exc:
            spent += sub_budget
            last_exc = exc
            continue
        spent += sub_budget
        try:
            box_steps = _backward_boxes(tris, moves, final_boxes)
        except TransportDegenerate as exc:
            last_exc = exc
            continue
        first = BoxAssignment(box_steps[0])
        if first.any_negative():
            return Certificate(tris, moves, box_steps, NON_GEOMETRIC,
                               seed=seed, windings=windings)
        if first.all_positive():
            raise NotNonGeometric(
                "the input triangulation is certified geometric along this path")
        last_exc = TransportDegenerate("first-step boxes have ambiguous signs")
    raise BudgetExhausted(f"no certificate found within budget {budget}: {last_exc}")


def _backward_boxes(tris, moves, final_boxes):
    """Interval transport of certified boxes back along the move list."""
    steps = [None] * len(tris)
    steps[-1] = [_inflate_slightly(b) for b in final_boxes.boxes]
    one = ComplexBox.exact(1.0)
    for i in range(len(moves) - 1, -1, -1):
        _after, move = _apply_move(tris[i], moves[i])
        try:
            prev = transport_backward(steps[i + 1], move, tris[i].tet_count, one=one)
        except (DegenerateMove, ZeroDivisionError, VeerkitError) as exc:
            raise TransportDegenerate(f"backward transport failed at step {i}: {exc}") from None
        prev = [_inflate_slightly(b) for b in prev]
        if not BoxAssignment(prev).nondegenerate():
            raise TransportDegenerate(f"intermediate boxes at step {i} meet the excluded set")
        steps[i] = prev
    return steps


# -- certificate checking --

def check_certificate(cert):
    """Replay a certificate with interval arithmetic only.

    Returns (ok, report) where report lists the first failure; performs the
    combinatorial move replay, the final-step Krawczyk re-verification, the
    backward containment checks, the non-degeneracy exclusions, and the
    verdict's sign condition.
    """
    report = []

    def fail(msg):
        report.append(msg)
        return False, report

    tris = cert.triangulations
    steps = cert.box_steps
    if len(tris) != len(steps) or len(cert.moves) != len(tris) - 1:
        return fail("malformed certificate: step/move counts disagree")
    if cert.verdict not in (GEOMETRIC, NON_GEOMETRIC):
        return fail(f"unknown verdict {cert.verdict}")

    # (a) combinatorial replay
    rebuilt_moves = []
    for i, spec in enumerate(cert.moves):
        try:
            nxt, move = _apply_move(tris[i], spec)
        except VeerkitError as exc:
            return fail(f"move mismatch at step {i}: {exc}")
        if nxt.gluings != tris[i + 1].gluings:
            return fail(f"move mismatch at step {i}")
        rebuilt_moves.append(move)

    # (b) final-step Krawczyk re-verification over the stored boxes
    final_tri = tris[-1]
    final_boxes = steps[-1]
    try:
        system = assemble(final_tri)
    except VeerkitError as exc:
        return fail(f"cannot assemble final system: {exc}")
    if cert.windings is None or len(cert.windings) != len(system.rows):
        return fail("certificate lacks winding data for the final step")
    if not _recheck_krawczyk(system, cert.windings, final_boxes, report):
        return False, report

    # (c) + (d) backward containment, tightness, and exclusions
    one = ComplexBox.exact(1.0)
    for i in range(len(cert.moves) - 1, -1, -1):
        try:
            prev = transport_backward(steps[i + 1], rebuilt_moves[i],
                                      tris[i].tet_count, one=one)
        except (DegenerateMove, ZeroDivisionError, VeerkitError) as exc:
            return fail(f"backward transport fails at step {i}: {exc}")
        for j, (p, stored) in enumerate(zip(prev, steps[i])):
            if not stored.contains(p):
                return fail(f"containment fails at step {i}, tetrahedron {j}")
            if not _tight(stored, p):
                return fail(f"stored box at step {i}, tetrahedron {j} is looser than computed")
        if not BoxAssignment(steps[i]).nondegenerate():
            return fail(f"boxes at step {i} meet the excluded set")
    if not BoxAssignment(steps[-1]).nondegenerate():
        return fail("final boxes meet the excluded set")

    # (e) the verdict's sign condition
    first = BoxAssignment(steps[0])
    if cert.verdict == GEOMETRIC:
        if len(tris) != 1:
            return fail("geometric certificates must have a single step")
        if not first.all_positive():
            return fail("sign condition fails: a box is not positively oriented")
    else:
        if not first.any_negative():
            return fail("sign condition fails: no box has negative imaginary part")

    return True, ["ok"]


def _recheck_krawczyk(system, windings, stored_boxes, report):
    import numpy as np
    n = system.size()
    if len(stored_boxes) != n:
        report.append("final box count disagrees with the triangulation")
        return False
    for e in range(system.n_edges):
        if windings[e] != 0:
            report.append("edge rows must carry standard windings")
            return False
    X = [b.inflated(max(b.max_width(), 1e-13)) for b in stored_boxes]
    mids = [b.mid() for b in stored_boxes]
    sq = system.square_rows
    idx = {id(r): i for i, r in enumerate(system.rows)}
    J_mid = np.array([[row.derivative(mids, j) for j in range(n)] for row in sq])
    try:
        Y = np.linalg.inv(J_mid)
    except np.linalg.LinAlgError:
        report.append("final-step midpoint Jacobian is singular")
        return False
    Y_boxes = [[ComplexBox.exact(complex(Y[i, j])) for j in range(n)] for i in range(n)]
    mid_boxes = [ComplexBox.exact(w) for w in mids]
    try:
        F_mid = [row_value_boxes(row, mid_boxes, windings[idx[id(row)]]) for row in sq]
    except VeerkitError as exc:
        report.append(f"cannot evaluate final rows: {exc}")
        return False
    YF = _mat_vec_boxes(Y_boxes, F_mid)
    K = _krawczyk_operator(sq, windings, idx, X, mid_boxes, YF, Y_boxes)
    if K is None:
        report.append("Krawczyk operator undefined over the stored boxes")
        return False
    if not all(x.strictly_contains(k) for x, k in zip(X, K)):
        report.append("Krawczyk contraction fails over the stored boxes")
        return False
    for k, stored in zip(K, stored_boxes):
        if not stored.contains(k):
            report.append("certified solution box escapes the stored box")
            return False
        if not _tight(stored, k):
            report.append("stored final box is looser than the certified enclosure")
            return False
    try:
        _verify_dropped_edges(system, windings)
        _verify_dropped_cusp_rows(system, windings, K, BoxAssignment(K))
    except VerificationFailed as exc:
        report.append(f"dropped-row verification fails: {exc}")
        return False
    return True
