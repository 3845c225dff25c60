"""Taut and veering structures, cusp cross-sections, and degeneracy slopes.

Conventions.  A taut structure picks one opposite-edge pair per tetrahedron to
carry dihedral angle pi (the other four edges carry 0) and optionally singles
out one pi-edge as the "top" of the tetrahedron.  A veering structure colors
edge classes Red/Blue so that in each tetrahedron the four equatorial edges
alternate colors; the chirality is anchored to the flat-surface model by the
rule below (Red = positive slope).  Given an oriented tetrahedron with bottom
pi-edge {r, s} and top pi-edge {p, q}, order the labels so that (r, s, p, q)
is an even permutation when the orientation flag is +1 (odd when -1); then
{q, r} and {p, s} are Red while {p, r} and {q, s} are Blue.
"""

from math import gcd

from .errors import MismatchedCuspCount, NonTorusLink, VeerkitError
from .homology import TruncatedComplex, free_quotient_basis, kernel_basis
from .triangulation import EDGE_PAIRS, PAIR_OF_EDGE, perm_sign

RED, BLUE = "R", "B"


class TautStructure:
    """Pi-pair assignment per tetrahedron, with optional top-edge choices."""

    def __init__(self, pair_indices, tops=None):
        self.pair_indices = tuple(pair_indices)
        self.tops = tuple(tuple(sorted(t)) for t in tops) if tops is not None else None

    def pi_edges(self, t):
        return EDGE_PAIRS[self.pair_indices[t]]

    def angle(self, t, edge):
        """Dihedral angle contribution (multiples of pi) of edge {a,b} in tet t."""
        return 1 if PAIR_OF_EDGE[tuple(sorted(edge))] == self.pair_indices[t] else 0

    def __repr__(self):
        return f"TautStructure({self.pair_indices})"


class VeeringStructure:
    def __init__(self, taut, coloring):
        self.taut = taut
        self.coloring = tuple(coloring)  # one of RED/BLUE per edge class

    def edge_color(self, tri, t, a, b):
        return self.coloring[tri.edge_index[(t, min(a, b), max(a, b))]]

    def to_json_obj(self):
        return {"pi_pairs": list(self.taut.pair_indices),
                "tops": [list(t) for t in self.taut.tops] if self.taut.tops else None,
                "colors": list(self.coloring)}

    @classmethod
    def from_json_obj(cls, obj):
        tops = [tuple(t) for t in obj["tops"]] if obj.get("tops") else None
        return cls(TautStructure(obj["pi_pairs"], tops), obj["colors"])

    def __repr__(self):
        return f"VeeringStructure(pairs={self.taut.pair_indices}, colors={''.join(self.coloring)})"


def _edge_pi_counts(tri, pair_indices):
    counts = [0] * len(tri.edge_classes)
    for t, p in enumerate(pair_indices):
        for edge in EDGE_PAIRS[p]:
            counts[tri.edge_index[(t,) + edge]] += 1
    return counts


def check_taut(tri, taut):
    """True iff every edge class receives total angle exactly 2*pi."""
    return all(c == 2 for c in _edge_pi_counts(tri, taut.pair_indices))


def find_taut_structures(tri):
    """All pi-pair assignments whose angle sums are 2*pi around every edge."""
    n = tri.tet_count
    n_edges = len(tri.edge_classes)
    remaining = [0] * n_edges           # pi-slots still assignable per edge class
    for t in range(n):
        for a in range(4):
            for b in range(a + 1, 4):
                remaining[tri.edge_index[(t, a, b)]] += 1
    # each tetrahedron contributes exactly one pi-pair: two pi-slots among its six
    counts = [0] * n_edges
    out = []
    choice = [0] * n

    def slots(t, p):
        return [tri.edge_index[(t,) + e] for e in EDGE_PAIRS[p]]

    def feasible(t):
        # prune: no overfull edge; every edge must still be able to reach 2
        for e in range(n_edges):
            if counts[e] > 2 or counts[e] + remaining[e] < 2:
                return False
        return True

    def rec(t):
        if t == n:
            if all(c == 2 for c in counts):
                out.append(TautStructure(tuple(choice)))
            return
        for a in range(4):
            for b in range(a + 1, 4):
                remaining[tri.edge_index[(t, a, b)]] -= 1
        for p in range(3):
            for e in slots(t, p):
                counts[e] += 1
            choice[t] = p
            if feasible(t):
                rec(t + 1)
            for e in slots(t, p):
                counts[e] -= 1
        for a in range(4):
            for b in range(a + 1, 4):
                remaining[tri.edge_index[(t, a, b)]] += 1

    rec(0)
    return out


def _forced_colors(tri, pair_indices, orientation):
    """Equatorial colors forced by the chirality rule, or None on conflict.

    The rule is independent of which pi-edge is called the top (swapping the
    roles of the two pi-edges is an even relabeling), so only the pair split
    and the orientation flags enter.  Edges that are pi-edges in every
    incident tetrahedron are left None.
    """
    colors = [None] * len(tri.edge_classes)
    for t in range(len(pair_indices)):
        pair = EDGE_PAIRS[pair_indices[t]]
        r, s = pair[0]
        p, q = pair[1]
        want = 1 if orientation[t] == 1 else -1
        if perm_sign((r, s, p, q)) != want:
            r, s = s, r
        for edge, col in (((q, r), RED), ((p, s), RED), ((p, r), BLUE), ((q, s), BLUE)):
            idx = tri.edge_index[(t, min(edge), max(edge))]
            if colors[idx] is None:
                colors[idx] = col
            elif colors[idx] != col:
                return None
    return colors


def _faces_bicolored(tri, colors):
    for t in range(tri.tet_count):
        for f in range(4):
            cs = {colors[tri.edge_index[(t, min(a, b), max(a, b))]]
                  for a in range(4) for b in range(a + 1, 4)
                  if f not in (a, b)}
            cs.discard(None)
            if len(cs) < 2:
                return False
    return True


def find_veering_structure(tri):
    """The canonical veering structure of the triangulation, or None.

    Searches taut structures, forcing equatorial colors through the chirality
    rule for the stored orientation flags; deterministic, returning the
    lexicographically least valid (pair assignment, coloring).
    """
    if not tri.orientable:
        return None
    found = []
    for taut in find_taut_structures(tri):
        colors = _forced_colors(tri, taut.pair_indices, tri.orientation)
        if colors is None:
            continue
        free = [i for i, c in enumerate(colors) if c is None]
        if len(free) > 12:
            continue
        for mask in range(1 << len(free)):
            trial = list(colors)
            for k, i in enumerate(free):
                trial[i] = RED if (mask >> k) & 1 == 0 else BLUE
            if _faces_bicolored(tri, trial):
                found.append((taut.pair_indices, tuple(trial)))
                break
    if not found:
        return None
    pairs, colors = min(found)
    return VeeringStructure(TautStructure(pairs), colors)


def is_veering(tri, veering):
    """Validate angle sums, chirality-consistent colors, and bicolored faces.

    The chirality rule is checked against both global orientations of the
    manifold, since neither is canonical.
    """
    if not tri.orientable or not check_taut(tri, veering.taut):
        return False
    forced = _forced_colors(tri, veering.taut.pair_indices, tri.orientation)
    if forced is None:
        return False
    ok = all(f is None or f == c for f, c in zip(forced, veering.coloring))
    if not ok:
        swapped = [None if f is None else (RED if f == BLUE else BLUE) for f in forced]
        if not all(f is None or f == c for f, c in zip(swapped, veering.coloring)):
            return False
    return _faces_bicolored(tri, list(veering.coloring))


# -- cusp cross-sections --

class CuspCrossSection:
    """Triangulated torus link of one ideal vertex class, with a homology basis.

    Triangles are tetrahedron corners (t, v); the sides of the triangle at
    (t, v) are the faces f != v, and the corner of the triangle on side pair
    {f1, f2} is the tetrahedron edge {v, w} with w the remaining label.  The
    two basis "slopes" are stored as integer combinations of dual-graph loops
    (each loop a list of passages through triangles), which is the form needed
    both for holonomy rows and for intersection pairings.  Class coordinates
    are canonical up to one global sign per cusp; all consumers are
    sign-insensitive.
    """

    def __init__(self, tri, vertex_class_index, cx=None):
        self.tri = tri
        self.vertex_class_index = vertex_class_index
        self.cx = cx if cx is not None else TruncatedComplex(tri)
        self.triangles = tri.vertex_classes[vertex_class_index]
        self._tri_set = set(self.triangles)
        self._build_sides()
        if len(self._side_classes) - len(self.triangles) != len(self._vert_classes) \
                or self._chi() != 0:
            raise NonTorusLink(
                f"vertex class {vertex_class_index} link is not a torus")
        self._orient_triangles()
        self._build_basis()
        self.colors = None

    # --- combinatorial structure ---

    def _build_sides(self):
        cx = self.cx
        self._side_classes = sorted({cx.sides.index[(t, v, f)]
                                     for (t, v) in self.triangles
                                     for f in range(4) if f != v})
        self._side_local = {c: i for i, c in enumerate(self._side_classes)}
        self._vert_classes = sorted({cx.corner_verts.index[(t, v, w)]
                                     for (t, v) in self.triangles
                                     for w in range(4) if w != v})

    def _chi(self):
        return (len(self._vert_classes) - len(self._side_classes)
                + len(self.triangles))

    def _orient_triangles(self):
        """Positive cyclic corner order per triangle, from the manifold orientation."""
        if not self.tri.orientable:
            raise NonTorusLink("cusp cross-sections require an orientable triangulation")
        self.cycle = {}
        for (t, v) in self.triangles:
            ws = sorted(x for x in range(4) if x != v)
            if self.tri.orientation[t] * (-1) ** (v + 1) == 1:
                self.cycle[(t, v)] = tuple(ws)
            else:
                self.cycle[(t, v)] = (ws[0], ws[2], ws[1])

    def _next_prev(self, tv, w):
        cyc = self.cycle[tv]
        i = cyc.index(w)
        return cyc[(i + 1) % 3], cyc[(i - 1) % 3]

    def triangle_count(self):
        return len(self.triangles)

    # --- passages and pairings ---

    def passage_corner_sign(self, t, v, f_in, f_out):
        """Corner label and sign for a dual passage through triangle (t,v)."""
        w = next(x for x in range(4) if x not in (v, f_in, f_out))
        nxt, prv = self._next_prev((t, v), w)
        if (f_in, f_out) == (nxt, prv):
            return w, 1
        return w, -1

    def _side_positive_exit(self, t, v, f):
        """+1 if the canonical direction of side (t,v,f) agrees with the positive
        boundary traversal of triangle (t,v) along that side."""
        x, y = sorted(a for a in range(4) if a not in (v, f))
        # positive boundary traverses side f from corner c to next(c) with the
        # third corner label equal to f
        cyc = self.cycle[(t, v)]
        i = cyc.index(f)
        frm, to = cyc[(i + 1) % 3], cyc[(i + 2) % 3]
        canon = 1 if (frm, to) == (x, y) else -1
        cx = self.cx
        rep = cx.sides.reps[cx.sides.index[(t, v, f)]][0]
        return canon * cx.side_sign[(t, v, f)] * cx.side_sign[rep]

    def loop_crossings(self, passages):
        """Signed side-class crossings of a closed dual loop."""
        out = {}
        for k, (t, v, f_in, f_out) in enumerate(passages):
            cls = self.cx.sides.index[(t, v, f_out)]
            sg = self._side_positive_exit(t, v, f_out)
            out[cls] = out.get(cls, 0) + sg
        return out

    def pair_loop_chain(self, passages, chain):
        """Intersection number of a dual loop with a side-class 1-chain."""
        total = 0
        for (t, v, f_in, f_out) in passages:
            cls = self.cx.sides.index[(t, v, f_out)]
            coeff = chain.get(cls, 0)
            if coeff:
                total += self._side_positive_exit(t, v, f_out) * coeff
        return total

    # --- homology basis ---

    def _build_basis(self):
        cx = self.cx
        tri_list = sorted(self.triangles)
        root = tri_list[0]
        # spanning tree of the dual graph: parent[child] = (parent triangle,
        # parent's side toward the child, child's side toward the parent)
        parent = {root: None}
        order = [root]
        tree_sides = set()
        i = 0
        while i < len(order):
            t, v = order[i]
            for f in sorted(x for x in range(4) if x != v):
                t2, f2, sigma = self.tri.gluings[t][f]
                nb = (t2, sigma[v])
                if nb not in parent:
                    parent[nb] = ((t, v), f, f2)
                    tree_sides.add(cx.sides.index[(t, v, f)])
                    order.append(nb)
            i += 1
        if set(order) != set(tri_list):
            raise NonTorusLink("cusp link is disconnected")

        def hops_to_root(node):
            """Root-ward hops (child, child_side, parent, parent_side)."""
            out = []
            while parent[node] is not None:
                pnode, f_par, f_child = parent[node]
                out.append((node, f_child, pnode, f_par))
                node = pnode
            return out

        # Fundamental loops, one per non-tree side class: descend from the
        # common ancestor to one end, cross the side, climb back.
        self.loops = []
        seen = set()
        for (t, v) in tri_list:
            for f in sorted(x for x in range(4) if x != v):
                cls = cx.sides.index[(t, v, f)]
                if cls in tree_sides or cls in seen:
                    continue
                seen.add(cls)
                t2, f2, sigma = self.tri.gluings[t][f]
                a_node, b_node = (t, v), (t2, sigma[v])
                pa = hops_to_root(a_node)
                pb = hops_to_root(b_node)
                while pa and pb and pa[-1] == pb[-1]:
                    pa.pop()
                    pb.pop()
                exits = [(par, ps) for (_ch, _cs, par, ps) in reversed(pa)]
                exits.append((a_node, f))
                exits.extend((child, cs) for (child, cs, _par, _ps) in pb)
                self.loops.append(self._exits_to_passages(exits))

        # homology cycle basis from the cusp chain complex
        d1 = self._cusp_d1()
        kb = kernel_basis(d1) if d1 else []
        zbasis = free_quotient_basis(kb, self._cusp_d2_columns())
        if len(zbasis) != 2:
            raise NonTorusLink("cusp link homology is not Z^2")
        zchains = [{self._side_classes[i]: x for i, x in enumerate(z) if x}
                   for z in zbasis]
        coords = [[self.pair_loop_chain(lp, zchains[0]),
                   self.pair_loop_chain(lp, zchains[1])] for lp in self.loops]
        combos = _coordinate_basis_combos(coords)
        if combos is None:
            raise NonTorusLink("dual loops fail to generate the cusp homology")
        self.basis_combos = combos      # two rows of integer loop-coefficients

    def _exits_to_passages(self, exits):
        """Turn a cyclic (triangle, exit side) sequence into passages with entries."""
        passages = []
        for i, (node, out_side) in enumerate(exits):
            pt, pv = exits[i - 1][0]
            ps = exits[i - 1][1]
            t2, f2, sigma = self.tri.gluings[pt][ps]
            if (t2, sigma[pv]) != node:
                raise VeerkitError("loop assembly failed to close")
            if f2 == out_side:
                raise VeerkitError("degenerate turn-back passage in loop")
            passages.append((node[0], node[1], f2, out_side))
        return passages

    def _cusp_d1(self):
        cx = self.cx
        vert_local = {c: i for i, c in enumerate(self._vert_classes)}
        rows = [[0] * len(self._side_classes) for _ in self._vert_classes]
        for j, cls in enumerate(self._side_classes):
            t, v, f = cx.sides.reps[cls][0]
            w1, w2 = sorted(x for x in range(4) if x not in (v, f))
            rows[vert_local[cx.corner_verts.index[(t, v, w2)]]][j] += 1
            rows[vert_local[cx.corner_verts.index[(t, v, w1)]]][j] -= 1
        return rows

    def _cusp_d2_columns(self):
        cx = self.cx
        cols = []
        for (t, v) in sorted(self.triangles):
            col = [0] * len(self._side_classes)
            for idx, sg in cx.triangle_boundary(t, v):
                col[self._side_local[idx]] += sg
            cols.append(col)
        return cols

    # --- the public interface used by geometry / homology / veering ---

    def basis_incidences(self):
        """For each basis slope: per-(tet, pair-type) signed counts and pi-constant.

        Each passage around corner (t, v, w) contributes the shape parameter of
        edge {v, w}; the return value is ready to assemble completeness rows.
        """
        out = []
        for combo in self.basis_combos:
            inc = {}
            for coeff, passages in zip(combo, self.loops):
                if coeff == 0:
                    continue
                for (t, v, f_in, f_out) in passages:
                    w, sg = self.passage_corner_sign(t, v, f_in, f_out)
                    pair = PAIR_OF_EDGE[(min(v, w), max(v, w))]
                    key = (t, pair)
                    inc[key] = inc.get(key, 0) + coeff * sg
            out.append(inc)
        return out

    def chain_class(self, side_chain):
        """Coordinates (x, y) of a 1-chain in the basis, up to one global sign."""
        vals = []
        for combo in self.basis_combos:
            tot = 0
            for coeff, passages in zip(combo, self.loops):
                if coeff:
                    tot += coeff * self.pair_loop_chain(passages, side_chain)
            vals.append(tot)
        # <basis1, chain> = y, <basis2, chain> = -x up to the global sign
        return (-vals[1], vals[0])

    def attach_colors(self, veering):
        self.colors = {}
        for (t, v) in self.triangles:
            for w in range(4):
                if w != v:
                    self.colors[(t, v, w)] = veering.coloring[
                        self.tri.edge_index[(t, min(v, w), max(v, w))]]


def _coordinate_basis_combos(coords):
    """Two integer combinations of rows achieving coordinates (1,0) and (0,1)."""
    from .homology import smith_normal_form
    if not coords:
        return None
    P = [list(c) for c in coords]
    U, S, V = smith_normal_form(P)
    if len(S[0]) < 2 or len(S) < 2 or S[0][0] != 1 or S[1][1] != 1:
        return None
    # A = V * U[0:2] satisfies A * P = I (2x2)
    rows = []
    for i in range(2):
        rows.append([V[i][0] * U[0][j] + V[i][1] * U[1][j] for j in range(len(U))])
    return rows


def cusp_cross_section(tri):
    """One cross-section per ideal vertex class, with deterministic bases."""
    cx = TruncatedComplex(tri)
    return [CuspCrossSection(tri, i, cx) for i in range(len(tri.vertex_classes))]


# -- slopes --

def degeneracy_slope(tri, veering, cusp):
    """Primitive ladderpole class of the veering structure on one cusp.

    Sides of the cusp triangulation whose two endpoint corners have equal
    color are the ladderpole segments; they close up into parallel essential
    cycles whose common class is the degeneracy slope.
    """
    cx = cusp.cx
    pole_slots = {}
    for (t, v) in cusp.triangles:
        for f in range(4):
            if f == v:
                continue
            w1, w2 = sorted(x for x in range(4) if x not in (v, f))
            c1 = veering.coloring[tri.edge_index[(t, min(v, w1), max(v, w1))]]
            c2 = veering.coloring[tri.edge_index[(t, min(v, w2), max(v, w2))]]
            if c1 == c2:
                pole_slots.setdefault(cx.sides.index[(t, v, f)], (t, v, f))
    if not pole_slots:
        raise VeerkitError("no ladderpole sides found; structure is not veering")
    # Walk the pole subgraph (it is a disjoint union of cycles) and orient one.
    ends = {}
    for cls, (t, v, f) in pole_slots.items():
        w1, w2 = sorted(x for x in range(4) if x not in (v, f))
        a = cx.corner_verts.index[(t, v, w1)]
        b = cx.corner_verts.index[(t, v, w2)]
        ends.setdefault(a, []).append((cls, b, 1))
        ends.setdefault(b, []).append((cls, a, -1))
    for v, lst in ends.items():
        if len(lst) != 2:
            raise VeerkitError("ladderpole sides do not form simple cycles")
    start = min(ends)
    chain = {}
    vert = start
    used = set()
    while True:
        options = [e for e in ends[vert] if e[0] not in used]
        if not options:
            break
        cls, nxt, sg = options[0]
        used.add(cls)
        chain[cls] = chain.get(cls, 0) + sg
        vert = nxt
        if vert == start:
            break
    x, y = cusp.chain_class(chain)
    g = gcd(abs(x), abs(y))
    if g == 0:
        raise VeerkitError("ladderpole cycle is null-homologous; not a slope")
    x, y = x // g, y // g
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return (x, y)


def is_principal_fiber(boundary_slopes, degeneracy_slopes):
    """True iff on every cusp the two given slopes intersect exactly once."""
    if len(boundary_slopes) != len(degeneracy_slopes):
        raise MismatchedCuspCount(
            f"{len(boundary_slopes)} boundary slopes vs {len(degeneracy_slopes)} degeneracy slopes")
    for (p1, q1), (p2, q2) in zip(boundary_slopes, degeneracy_slopes):
        if abs(p1 * q2 - q1 * p2) != 1:
            return False
    return True
