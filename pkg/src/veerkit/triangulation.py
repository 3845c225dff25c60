"""Ideal triangulations: gluing data, derived combinatorics, signatures, Pachner moves.

A triangulation is stored SnapPea-style: ``gluings[t][f] = (t2, f2, sigma)``
where face ``f`` of tetrahedron ``t`` (the face opposite vertex ``f``) is
glued to face ``f2`` of tetrahedron ``t2`` by the vertex permutation
``sigma`` (a 4-tuple, ``sigma[v]`` the image label), with ``sigma[f] == f2``.
All values are immutable after construction; operations return fresh objects.
"""

import json
import string
from fractions import Fraction
from itertools import permutations

from .errors import (InvalidPermutation, NonInvolutiveGluing, NonManifoldGluing,
                     RepeatedTetrahedron, SelfGluedFace, UngluedFace, WrongValence)

IDENTITY = (0, 1, 2, 3)
ALL_PERMS = tuple(permutations(range(4)))
PERM_INDEX = {p: i for i, p in enumerate(ALL_PERMS)}

# Opposite-edge pairs of a tetrahedron, indexed 0..2.  The same index names the
# shape-parameter type of the edges in geometry (z, 1/(1-z), 1-1/z).
EDGE_PAIRS = (((0, 1), (2, 3)), ((0, 3), (1, 2)), ((0, 2), (1, 3)))
PAIR_OF_EDGE = {(0, 1): 0, (2, 3): 0, (0, 3): 1, (1, 2): 1, (0, 2): 2, (1, 3): 2}

_SIG_ALPHABET = string.ascii_lowercase + string.ascii_uppercase + string.digits + '+-'
_SIG_NEW, _SIG_GLUE = 62, 63


def perm_inverse(p):
    inv = [0] * 4
    for i, v in enumerate(p):
        inv[v] = i
    return tuple(inv)


def perm_compose(p, q):
    """Return the permutation mapping v to p[q[v]]."""
    return tuple(p[q[v]] for v in range(4))


def perm_sign(p):
    sign = 1
    for i in range(4):
        for j in range(i + 1, 4):
            if p[i] > p[j]:
                sign = -sign
    return sign


def _check_perm(p):
    return (isinstance(p, tuple) and len(p) == 4
            and sorted(p) == [0, 1, 2, 3])


class PachnerMove:
    """Record of a single 2-3 or 3-2 move.

    ``tet_map`` sends each surviving tetrahedron's old index to its new
    index.  The affected tetrahedra and the vertex conventions of the
    replacement tetrahedra are kept so shape transport can reconstruct the
    bipyramid exactly; see ``detail`` for the per-kind payload.
    """

    def __init__(self, kind, target, tet_map, detail):
        self.kind = kind          # "23" or "32"
        self.target = target      # face (t, f) or edge-class index
        self.tet_map = dict(tet_map)
        self.detail = dict(detail)

    def __repr__(self):
        return f"PachnerMove({self.kind!r}, target={self.target!r})"


class IdealTriangulation:
    """A closed ideal triangulation with derived edge/vertex classes."""

    def __init__(self, gluings):
        self.gluings = tuple(tuple(face for face in tet) for tet in gluings)
        self.tet_count = len(self.gluings)
        self._validate()
        self.edge_classes = self._orbits(self._edge_slots(), self._edge_neighbors)
        self.vertex_classes = self._orbits(self._vertex_slots(), self._vertex_neighbors)
        self.edge_index = {}
        for i, cls in enumerate(self.edge_classes):
            for slot in cls:
                self.edge_index[slot] = i
        self.vertex_index = {}
        for i, cls in enumerate(self.vertex_classes):
            for slot in cls:
                self.vertex_index[slot] = i
        self.orientation = self._orient()
        self.orientable = self.orientation is not None

    # -- validation and derived structure --

    def _validate(self):
        n = self.tet_count
        if n == 0:
            raise UngluedFace("empty gluing data describes no closed complex")
        for t in range(n):
            if len(self.gluings[t]) != 4:
                raise UngluedFace(f"tetrahedron {t} must glue all 4 faces")
            for f in range(4):
                entry = self.gluings[t][f]
                if entry is None:
                    raise UngluedFace(f"face ({t},{f}) is unglued")
                t2, f2, sigma = entry
                if not (0 <= t2 < n):
                    raise UngluedFace(f"face ({t},{f}) glued to missing tetrahedron {t2}")
                if not _check_perm(sigma):
                    raise InvalidPermutation(f"face ({t},{f}): {sigma} is not a permutation of 0..3")
                if sigma[f] != f2:
                    raise InvalidPermutation(
                        f"face ({t},{f}): permutation must carry face {f} to face {f2}")
                if (t2, f2) == (t, f):
                    raise InvalidPermutation(f"face ({t},{f}) glued to itself")
                back = self.gluings[t2][f2]
                if back is None or back[:2] != (t, f) or back[2] != perm_inverse(sigma):
                    raise NonInvolutiveGluing(
                        f"gluing at ({t},{f}) is not matched by its inverse at ({t2},{f2})")

    def _edge_slots(self):
        return [(t, a, b) for t in range(self.tet_count)
                for a in range(4) for b in range(a + 1, 4)]

    def _edge_neighbors(self, slot):
        t, a, b = slot
        out = []
        for f in range(4):
            if f in (a, b):
                continue
            t2, _f2, sigma = self.gluings[t][f]
            x, y = sigma[a], sigma[b]
            out.append((t2, min(x, y), max(x, y)))
        return out

    def _vertex_slots(self):
        return [(t, v) for t in range(self.tet_count) for v in range(4)]

    def _vertex_neighbors(self, slot):
        t, v = slot
        out = []
        for f in range(4):
            if f == v:
                continue
            t2, _f2, sigma = self.gluings[t][f]
            out.append((t2, sigma[v]))
        return out

    @staticmethod
    def _orbits(slots, neighbors):
        seen = {}
        classes = []
        for s in slots:
            if s in seen:
                continue
            orbit = []
            stack = [s]
            seen[s] = True
            while stack:
                cur = stack.pop()
                orbit.append(cur)
                for nb in neighbors(cur):
                    if nb not in seen:
                        seen[nb] = True
                        stack.append(nb)
            classes.append(tuple(sorted(orbit)))
        return tuple(classes)

    def _orient(self):
        """Assign +-1 per tetrahedron so every gluing permutation is odd, or None."""
        flags = [0] * self.tet_count
        for start in range(self.tet_count):
            if flags[start]:
                continue
            flags[start] = 1
            stack = [start]
            while stack:
                t = stack.pop()
                for f in range(4):
                    t2, _f2, sigma = self.gluings[t][f]
                    want = flags[t] * (-perm_sign(sigma))
                    if flags[t2] == 0:
                        flags[t2] = want
                        stack.append(t2)
                    elif flags[t2] != want:
                        return None
        return tuple(flags)

    # -- basic queries --

    @property
    def face_count(self):
        return 2 * self.tet_count

    @property
    def edge_count(self):
        return len(self.edge_classes)

    @property
    def vertex_count(self):
        return len(self.vertex_classes)

    def euler_characteristic(self):
        return self.vertex_count - self.edge_count + self.face_count - self.tet_count

    def edge_valence(self, i):
        return len(self.edge_classes[i])

    def relabeled(self, tet_perm, vertex_perms=None):
        """Rebuild with tetrahedron t renamed tet_perm[t] and optional per-tet vertex relabelings."""
        n = self.tet_count
        if vertex_perms is None:
            vertex_perms = [IDENTITY] * n
        glu = [[None] * 4 for _ in range(n)]
        for t in range(n):
            rho = vertex_perms[t]
            for f in range(4):
                t2, _f2, sigma = self.gluings[t][f]
                rho2 = vertex_perms[t2]
                new_sigma = perm_compose(rho2, perm_compose(sigma, perm_inverse(rho)))
                glu[tet_perm[t]][rho[f]] = (tet_perm[t2], new_sigma[rho[f]], new_sigma)
        return IdealTriangulation(glu)

    @property
    def is_oriented(self):
        """True iff all labelings are coherently positive (every gluing permutation odd)."""
        return self.orientable and all(f == 1 for f in self.orientation)

    def oriented_copy(self):
        """A coherently labeled isomorphic copy, plus the per-tet vertex relabelings used.

        Tetrahedra whose orientation flag is negative get labels 0 and 1
        swapped.  Shape and equation conventions elsewhere assume coherent
        labels, so constructors normalize through this.
        """
        if not self.orientable:
            raise ValueError("cannot orient a non-orientable triangulation")
        if self.is_oriented:
            return self, [IDENTITY] * self.tet_count
        perms = [IDENTITY if f == 1 else (1, 0, 2, 3) for f in self.orientation]
        return self.relabeled(list(range(self.tet_count)), perms), perms

    # -- serialization --

    def to_json_obj(self):
        return {"tet_count": self.tet_count,
                "gluings": [[[t2, f2, list(sigma)] for (t2, f2, sigma) in tet]
                            for tet in self.gluings]}

    def to_json(self):
        return json.dumps(self.to_json_obj())

    def __eq__(self, other):
        return isinstance(other, IdealTriangulation) and self.gluings == other.gluings

    def __hash__(self):
        return hash(self.gluings)

    def __repr__(self):
        return f"IdealTriangulation({self.tet_count} tetrahedra)"


def from_gluing_data(raw):
    """Build a validated triangulation from per-face gluing triples.

    ``raw`` is a list (one entry per tetrahedron) of 4-entry lists
    ``(t2, f2, sigma)`` in face order 0..3, as in the JSON format.
    """
    data = []
    for tet in raw:
        row = []
        for entry in tet:
            if entry is None:
                row.append(None)
            else:
                t2, f2, sigma = entry
                row.append((int(t2), int(f2), tuple(int(x) for x in sigma)))
        data.append(row)
    return IdealTriangulation(data)


def from_json_obj(obj):
    return from_gluing_data(obj["gluings"])


def from_json(text):
    return from_json_obj(json.loads(text))


def edge_valences(tri):
    """Valence (number of tetrahedron-edge slots) of each edge class."""
    return [len(cls) for cls in tri.edge_classes]


# -- isomorphism signatures --

def _bfs_encode(tri, t0, rho0):
    """Canonical stream for the relabeling determined by (start tet, start labeling).

    Discovered tetrahedra are numbered in BFS order and each new tetrahedron is
    relabeled so its discovery gluing becomes the identity permutation; the
    stream then lists, for each face in scan order, either a discovery marker
    or the (partner, permutation) of a non-tree gluing seen from its first end.
    """
    order = [t0]
    newindex = {t0: 0}
    rho = {t0: rho0}
    stream = [tri.tet_count]
    consumed = set()
    i = 0
    while i < len(order):
        t = order[i]
        rho_t = rho[t]
        rho_t_inv = perm_inverse(rho_t)
        for f_new in range(4):
            if (i, f_new) in consumed:
                continue
            f_old = rho_t_inv[f_new]
            t2, f2_old, sigma = tri.gluings[t][f_old]
            if t2 not in newindex:
                j = len(order)
                newindex[t2] = j
                rho[t2] = perm_compose(rho_t, perm_inverse(sigma))
                order.append(t2)
                consumed.add((j, f_new))
                stream.append(_SIG_NEW)
            else:
                j = newindex[t2]
                sigma_new = perm_compose(rho[t2], perm_compose(sigma, rho_t_inv))
                consumed.add((j, sigma_new[f_new]))
                stream.extend((_SIG_GLUE, j % 62, j // 62, PERM_INDEX[sigma_new]))
        i += 1
    return tuple(stream)


def isomorphism_signature(tri):
    """Canonical string equal for two triangulations iff they are isomorphic."""
    if tri.tet_count >= 62 * 62:
        raise ValueError("signatures support fewer than 3844 tetrahedra")
    best = None
    for t0 in range(tri.tet_count):
        for rho0 in ALL_PERMS:
            enc = _bfs_encode(tri, t0, rho0)
            if best is None or enc < best:
                best = enc
    out = [_SIG_ALPHABET[best[0] % 62], _SIG_ALPHABET[best[0] // 62]]
    out.extend(_SIG_ALPHABET[v] for v in best[1:])
    return ''.join(out)


def from_signature(sig):
    """Decode a signature back into a representative triangulation."""
    vals = [_SIG_ALPHABET.index(c) for c in sig]
    n = vals[0] + 62 * vals[1]
    pos = 2
    glu = [[None] * 4 for _ in range(n)]
    next_tet = 1
    i = 0
    while i < n:
        for f in range(4):
            if glu[i][f] is not None:
                continue
            tag = vals[pos]
            pos += 1
            if tag == _SIG_NEW:
                j = next_tet
                next_tet += 1
                glu[i][f] = (j, f, IDENTITY)
                glu[j][f] = (i, f, IDENTITY)
            elif tag == _SIG_GLUE:
                j = vals[pos] + 62 * vals[pos + 1]
                perm = ALL_PERMS[vals[pos + 2]]
                pos += 3
                glu[i][f] = (j, perm[f], perm)
                glu[j][perm[f]] = (i, f, perm_inverse(perm))
            else:
                raise ValueError("corrupt signature")
        i += 1
    return IdealTriangulation(glu)


# -- Pachner moves --
#
# Both moves carry "frames": per affected tetrahedron, the tuple assigning to
# each vertex label one of the five bipyramid point tags e0, e1, e2 (equator),
# a (apex on the first/valence side), b (the other apex).  Shape transport
# reconstructs the bipyramid from frames alone, so the normalization below
# (relabeling replacement tetrahedra to keep the triangulation coherently
# oriented) only has to fix up the frames.

# Exact convex model of the bipyramid, for deciding frame orientations: the
# equator triangle in the z=0 plane with apex b above and apex a below (inside
# the triangle's vertical prism).
_BIPYRAMID_MODEL = {
    "e0": (Fraction(0), Fraction(0), Fraction(0)),
    "e1": (Fraction(1), Fraction(0), Fraction(0)),
    "e2": (Fraction(0), Fraction(1), Fraction(0)),
    "b": (Fraction(0), Fraction(0), Fraction(1)),
    "a": (Fraction(1, 4), Fraction(1, 4), Fraction(-1)),
}


def _frame_orientation(frame):
    """Sign of the model orientation of a 4-tuple of bipyramid point tags."""
    p = [_BIPYRAMID_MODEL[tag] for tag in frame]
    u = [p[1][i] - p[0][i] for i in range(3)]
    v = [p[2][i] - p[0][i] for i in range(3)]
    w = [p[3][i] - p[0][i] for i in range(3)]
    det = (u[0] * (v[1] * w[2] - v[2] * w[1])
           - u[1] * (v[0] * w[2] - v[2] * w[0])
           + u[2] * (v[0] * w[1] - v[1] * w[0]))
    return 1 if det > 0 else -1


def _orient_move_output(glu, new_tets, frames, survivors, old_frames):
    """Relabel replacement tetrahedra so the output stays coherently oriented.

    The input orientation is carried through the bipyramid model: every source
    tetrahedron's frame fixes the same global sign, which then dictates each
    replacement tetrahedron's required flag.
    """
    signs = {_frame_orientation(fr) for fr in old_frames.values()}
    if len(signs) != 1:
        raise NonManifoldGluing("inconsistent source frames in Pachner move")
    s = signs.pop()
    tri0 = IdealTriangulation(glu)
    flags = tri0.orientation
    if flags is None:
        raise NonManifoldGluing("Pachner move produced a non-orientable complex")
    required = {t: s * _frame_orientation(frames[t]) for t in new_tets}
    if flags[new_tets[0]] != required[new_tets[0]]:
        flags = tuple(-f for f in flags)
    if any(flags[t] != required[t] for t in new_tets) \
            or any(flags[x] == -1 for x in survivors):
        raise NonManifoldGluing("move produced an inconsistent orientation")
    swap = (1, 0, 2, 3)
    perms = [IDENTITY] * tri0.tet_count
    for t in new_tets:
        if required[t] == -1:
            perms[t] = swap
            old = frames[t]
            frames[t] = (old[1], old[0], old[2], old[3])
    return tri0.relabeled(list(range(tri0.tet_count)), perms)


def pachner_23(tri, face):
    """Replace the two tetrahedra sharing ``face = (t, f)`` by three around a dual edge.

    Requires a coherently oriented triangulation and returns one; the three
    replacement tetrahedra are numbered last, each containing the dual edge
    (the one joining the two apexes ``a`` and ``b``).
    """
    if not tri.is_oriented:
        raise ValueError("pachner_23 requires a coherently oriented triangulation")
    t1, f1 = face
    t2, f2, sigma = tri.gluings[t1][f1]
    if t2 == t1:
        raise SelfGluedFace(f"face ({t1},{f1}) is shared by a single tetrahedron")
    n = tri.tet_count
    u = tuple(v for v in range(4) if v != f1)          # equator labels in t1
    su = tuple(sigma[v] for v in u)                    # equator labels in t2

    survivors = [t for t in range(n) if t not in (t1, t2)]
    new_index = {t: i for i, t in enumerate(survivors)}
    nt = [n - 2, n - 1, n]

    portal = {}
    for k in range(3):
        mu1 = [None] * 4
        mu1[u[(k + 1) % 3]] = 0
        mu1[u[(k + 2) % 3]] = 1
        mu1[f1] = 2
        mu1[u[k]] = 3
        portal[(t1, u[k])] = (nt[k], 3, tuple(mu1))
        mu2 = [None] * 4
        mu2[su[(k + 1) % 3]] = 0
        mu2[su[(k + 2) % 3]] = 1
        mu2[f2] = 3
        mu2[su[k]] = 2
        portal[(t2, su[k])] = (nt[k], 2, tuple(mu2))

    glu = [[None] * 4 for _ in range(n + 1)]

    def rewrite(src_t, src_f, pi):
        if (src_t, src_f) in portal:
            N2, _F2, m2 = portal[(src_t, src_f)]
            return N2, perm_compose(m2, pi)
        return new_index[src_t], pi

    for s in survivors:
        for g in range(4):
            s2, _g2, pi = tri.gluings[s][g]
            N2, pi_new = rewrite(s2, pi[g], pi)
            glu[new_index[s]][g] = (N2, pi_new[g], pi_new)

    for (old_t, old_f), (N, F, m) in portal.items():
        s2, g2, pi = tri.gluings[old_t][old_f]
        pi_from_new = perm_compose(pi, perm_inverse(m))
        N2, pi_new = rewrite(s2, g2, pi_from_new)
        glu[N][F] = (N2, pi_new[F], pi_new)

    inner = (1, 0, 2, 3)
    for k in range(3):
        glu[nt[k]][0] = (nt[(k + 1) % 3], 1, inner)
        glu[nt[(k + 1) % 3]][1] = (nt[k], 0, inner)

    old_frames = {}
    fr1 = [None] * 4
    for k in range(3):
        fr1[u[k]] = f"e{k}"
    fr1[f1] = "a"
    old_frames[t1] = tuple(fr1)
    fr2 = [None] * 4
    for k in range(3):
        fr2[su[k]] = f"e{k}"
    fr2[f2] = "b"
    old_frames[t2] = tuple(fr2)
    frames = {nt[k]: (f"e{(k + 1) % 3}", f"e{(k + 2) % 3}", "a", "b") for k in range(3)}

    out = _orient_move_output(glu, nt, frames, [new_index[s] for s in survivors], old_frames)
    new_edge_slots = []
    for x in nt:
        la = frames[x].index("a")
        lb = frames[x].index("b")
        new_edge_slots.append((x, min(la, lb), max(la, lb)))
    move = PachnerMove(
        "23", face, new_index,
        {"t1": t1, "f1": f1, "t2": t2, "f2": f2, "sigma": sigma,
         "equator": u, "new_tets": tuple(nt),
         "old_frames": old_frames, "new_frames": frames,
         "new_edge_slots": tuple(new_edge_slots)})
    return out, move


def pachner_32(tri, edge_class_index):
    """Collapse a valence-3 edge with three distinct incident tetrahedra to two.

    Requires a coherently oriented triangulation and returns one; the two
    replacement tetrahedra are numbered last.
    """
    if not tri.is_oriented:
        raise ValueError("pachner_32 requires a coherently oriented triangulation")
    cls = tri.edge_classes[edge_class_index]
    if len(cls) != 3:
        raise WrongValence(
            f"edge class {edge_class_index} has valence {len(cls)}, need 3")
    tets = {slot[0] for slot in cls}
    if len(tets) != 3:
        raise RepeatedTetrahedron(
            f"edge class {edge_class_index} passes through only {len(tets)} distinct tetrahedra")

    # Walk around the edge, recording per tet the labels of the edge endpoints
    # (a, b) and of the entry/exit vertices (the two equatorial labels).
    t0, a0, b0 = cls[0]
    walk = []
    t, a, b = t0, a0, b0
    others = [v for v in range(4) if v not in (a, b)]
    enter = others[0]
    for _step in range(3):
        exit_v = next(v for v in range(4) if v not in (a, b, enter))
        walk.append({"tet": t, "a": a, "b": b, "in": enter, "out": exit_v})
        t2, _g, pi = tri.gluings[t][exit_v]
        t, a, b, enter = t2, pi[a], pi[b], pi[exit_v]
    if (t, a, b) != (t0, a0, b0):
        raise RepeatedTetrahedron(
            "edge link does not close up compatibly; 3-2 move undefined")

    n = tri.tet_count
    involved = [w["tet"] for w in walk]
    survivors = [x for x in range(n) if x not in involved]
    new_index = {x: i for i, x in enumerate(survivors)}
    A, B = n - 3, n - 2

    # In walk position k: equator vertex e_{k+2} has label walk[k]["in"],
    # e_{k+1} has label walk[k]["out"] (indices mod 3).
    lamb = (1, 0, 2)
    portal = {}
    for k in range(3):
        w = walk[k]
        mA = [None] * 4
        mA[w["out"]] = (k + 1) % 3
        mA[w["in"]] = (k + 2) % 3
        mA[w["a"]] = 3
        mA[w["b"]] = k
        portal[(w["tet"], w["b"])] = (A, k, tuple(mA))
        mB = [None] * 4
        mB[w["out"]] = lamb[(k + 1) % 3]
        mB[w["in"]] = lamb[(k + 2) % 3]
        mB[w["b"]] = 3
        mB[w["a"]] = lamb[k]
        portal[(w["tet"], w["a"])] = (B, lamb[k], tuple(mB))

    glu = [[None] * 4 for _ in range(n - 1)]

    def rewrite(src_t, src_f, pi):
        if (src_t, src_f) in portal:
            N2, _F2, m2 = portal[(src_t, src_f)]
            return N2, perm_compose(m2, pi)
        return new_index[src_t], pi

    for s in survivors:
        for g in range(4):
            s2, _g2, pi = tri.gluings[s][g]
            N2, pi_new = rewrite(s2, pi[g], pi)
            glu[new_index[s]][g] = (N2, pi_new[g], pi_new)

    for (old_t, old_f), (N, F, m) in portal.items():
        s2, g2, pi = tri.gluings[old_t][old_f]
        pi_from_new = perm_compose(pi, perm_inverse(m))
        N2, pi_new = rewrite(s2, g2, pi_from_new)
        glu[N][F] = (N2, pi_new[F], pi_new)

    inner = (1, 0, 2, 3)
    glu[A][3] = (B, 3, inner)
    glu[B][3] = (A, 3, inner)

    old_frames = {}
    for k, w in enumerate(walk):
        fr = [None] * 4
        fr[w["out"]] = f"e{(k + 1) % 3}"
        fr[w["in"]] = f"e{(k + 2) % 3}"
        fr[w["a"]] = "a"
        fr[w["b"]] = "b"
        old_frames[w["tet"]] = tuple(fr)
    frames = {A: ("e0", "e1", "e2", "a"), B: ("e1", "e0", "e2", "b")}

    out = _orient_move_output(glu, [A, B], frames, [new_index[s] for s in survivors], old_frames)
    move = PachnerMove(
        "32", edge_class_index, new_index,
        {"walk": walk, "new_tets": (A, B),
         "old_frames": old_frames, "new_frames": frames})
    return out, move
