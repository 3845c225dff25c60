"""Integer homology of ideal triangulations and slope arithmetic on cusp tori.

Homology is computed on the truncated complex: cutting tetrahedron corners
leaves a compact cell complex whose boundary is the union of cusp tori.  Long
edges are barycentrically split at their midpoints so that edge classes
identified to themselves with a flip still quotient to honest CW cells.
"""

import json
from fractions import Fraction
from math import gcd

from .errors import NonPositiveGenus, NonTorusLink, ParityViolation


# -- exact Smith normal form --

def smith_normal_form(A):
    """Return (U, S, V) with U*A*V = S, U and V unimodular, diagonal divisibility."""
    m = len(A)
    n = len(A[0]) if m else 0
    S = [list(map(int, row)) for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        S[dst] = [x + c * y for x, y in zip(S[dst], S[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in S:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    k = 0
    while k < min(m, n):
        # find a nonzero pivot of minimal absolute value
        pivot = None
        for i in range(k, m):
            for j in range(k, n):
                if S[i][j] and (pivot is None or abs(S[i][j]) < abs(S[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(k, pivot[0])
        swap_cols(k, pivot[1])
        done = False
        while not done:
            done = True
            for i in range(k + 1, m):
                if S[i][k]:
                    add_row(k, i, -(S[i][k] // S[k][k]))
                    if S[i][k]:
                        swap_rows(k, i)
                        done = False
            for j in range(k + 1, n):
                if S[k][j]:
                    add_col(k, j, -(S[k][j] // S[k][k]))
                    if S[k][j]:
                        swap_cols(k, j)
                        done = False
        k += 1

    # ensure positive diagonal
    for i in range(min(m, n)):
        if S[i][i] < 0:
            for j in range(n):
                S[i][j] = -S[i][j]
            for j in range(m):
                U[i][j] = -U[i][j]

    # enforce the divisibility chain d_i | d_{i+1}
    r = 0
    while r < min(m, n) and S[r][r] != 0:
        r += 1
    changed = True
    while changed:
        changed = False
        for i in range(r - 1):
            a, b = S[i][i], S[i + 1][i + 1]
            if b % a != 0:
                # standard trick: add col i+1 to col i, re-reduce the 2x2 block
                add_col(i + 1, i, 1)
                _blocked_pair_reduce(S, U, V, i)
                changed = True
    return U, S, V


def _blocked_pair_reduce(S, U, V, i):
    """Re-diagonalize the 2x2 block at (i, i) after a divisibility fix-up."""
    m, n = len(S), len(S[0])

    def add_row(src, dst, c):
        S[dst] = [x + c * y for x, y in zip(S[dst], S[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in S:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    def swap_rows(a, b):
        S[a], S[b] = S[b], S[a]
        U[a], U[b] = U[b], U[a]

    def swap_cols(a, b):
        for row in S:
            row[a], row[b] = row[b], row[a]
        for row in V:
            row[a], row[b] = row[b], row[a]

    while True:
        # reduce within rows/cols i, i+1 (entries only at (i,i),(i+1,i),(i,i+1),(i+1,i+1))
        if S[i + 1][i]:
            if abs(S[i + 1][i]) < abs(S[i][i]):
                swap_rows(i, i + 1)
            q = S[i + 1][i] // S[i][i]
            add_row(i, i + 1, -q)
            continue
        if S[i][i + 1]:
            if abs(S[i][i + 1]) < abs(S[i][i]):
                swap_cols(i, i + 1)
            q = S[i][i + 1] // S[i][i]
            add_col(i, i + 1, -q)
            continue
        break
    for j in (i, i + 1):
        if j < min(m, n) and S[j][j] < 0:
            for c in range(n):
                S[j][c] = -S[j][c]
            for c in range(m):
                U[j][c] = -U[j][c]
    return S[i][i]


def _mat_mul(A, B):
    n, k = len(A), len(B[0])
    m = len(B)
    return [[sum(A[i][t] * B[t][j] for t in range(m)) for j in range(k)] for i in range(n)]


def _mat_vec(A, v):
    return [sum(row[j] * v[j] for j in range(len(v))) for row in A]


def kernel_basis(A):
    """Integer basis of ker(A) as a list of column vectors."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    _U, S, V = smith_normal_form(A)
    rank = sum(1 for i in range(min(m, n)) if S[i][i] != 0)
    return [[V[i][j] for i in range(n)] for j in range(rank, n)]


def solve_integer(A, y):
    """One integer solution x of A x = y, or None if unsolvable over Z."""
    m = len(A)
    n = len(A[0]) if m else 0
    U, S, V = smith_normal_form(A)
    z = _mat_vec(U, y)
    x = [0] * n
    for i in range(min(m, n)):
        if S[i][i] != 0:
            if z[i] % S[i][i] != 0:
                return None
            x[i] = z[i] // S[i][i]
        elif z[i] != 0:
            return None
    for i in range(min(m, n), m):
        if z[i] != 0:
            return None
    return _mat_vec(V, x)


def unimodular_inverse(U):
    """Exact inverse of a unimodular integer matrix."""
    n = len(U)
    M = [[Fraction(U[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for i in range(n):
        p = next(r for r in range(i, n) if M[r][i] != 0)
        M[i], M[p] = M[p], M[i]
        inv = 1 / M[i][i]
        M[i] = [x * inv for x in M[i]]
        for r in range(n):
            if r != i and M[r][i] != 0:
                f = M[r][i]
                M[r] = [x - f * y for x, y in zip(M[r], M[i])]
    out = [[M[i][n + j] for j in range(n)] for i in range(n)]
    assert all(x.denominator == 1 for row in out for x in row)
    return [[int(x) for x in row] for row in out]


def free_quotient_basis(ambient_basis, sub_vectors):
    """Chains generating the free part of (span ambient_basis)/(span sub_vectors)."""
    k = len(ambient_basis)
    n = len(ambient_basis[0])
    B = [[ambient_basis[j][i] for j in range(k)] for i in range(n)]
    coords = []
    for v in sub_vectors:
        x = solve_integer(B, list(v))
        if x is None:
            raise ValueError("subgroup vector outside the ambient lattice")
        coords.append(x)
    if coords:
        C = [[coords[j][i] for j in range(len(coords))] for i in range(k)]
        U, S, _V = smith_normal_form(C)
        rank = sum(1 for i in range(min(len(S), len(S[0]))) if S[i][i] != 0)
        Uinv = unimodular_inverse(U)
        free_cols = range(rank, k)
    else:
        Uinv = [[int(i == j) for j in range(k)] for i in range(k)]
        free_cols = range(k)
    out = []
    for j in free_cols:
        coeffs = [Uinv[i][j] for i in range(k)]
        chain = [sum(coeffs[i] * ambient_basis[i][c] for i in range(k)) for c in range(n)]
        out.append(chain)
    return out


def quotient_group(ambient_basis, sub_vectors):
    """Invariant factors of (Z^k spanned by ambient_basis) / (span of sub_vectors).

    ``ambient_basis`` is a list of column vectors in Z^n forming a basis of a
    subgroup L; ``sub_vectors`` must lie in L.  Returns (rank, torsion list).
    """
    k = len(ambient_basis)
    if k == 0:
        return 0, []
    n = len(ambient_basis[0])
    B = [[ambient_basis[j][i] for j in range(k)] for i in range(n)]
    coords = []
    for v in sub_vectors:
        x = solve_integer(B, list(v))
        if x is None:
            raise ValueError("subgroup vector outside the ambient lattice")
        coords.append(x)
    if not coords:
        return k, []
    C = [[coords[j][i] for j in range(len(coords))] for i in range(k)]
    _U, S, _V = smith_normal_form(C)
    diag = [S[i][i] for i in range(min(len(S), len(S[0])))]
    rank = k - sum(1 for d in diag if d != 0)
    torsion = sorted(d for d in diag if d > 1)
    return rank, torsion


# -- the truncated cell complex --

class _Classes:
    """Orbit bookkeeping: canonical representative and index per slot."""

    def __init__(self, slots, neighbors):
        self.index = {}
        self.reps = []
        for s in slots:
            if s in self.index:
                continue
            i = len(self.reps)
            orbit = [s]
            self.index[s] = i
            stack = [s]
            while stack:
                cur = stack.pop()
                for nb in neighbors(cur):
                    if nb not in self.index:
                        self.index[nb] = i
                        orbit.append(nb)
                        stack.append(nb)
            self.reps.append(tuple(sorted(orbit)))

    def __len__(self):
        return len(self.reps)


class TruncatedComplex:
    """CW structure on the compact core of an ideal triangulation."""

    def __init__(self, tri):
        self.tri = tri
        g = tri.gluings
        n = tri.tet_count

        def corner_neighbors(slot):
            t, v, w = slot
            out = []
            for f in range(4):
                if f not in (v, w):
                    t2, _f2, sigma = g[t][f]
                    out.append((t2, sigma[v], sigma[w]))
            return out

        def half_neighbors(slot):
            return corner_neighbors(slot)

        corner_slots = [(t, v, w) for t in range(n) for v in range(4)
                        for w in range(4) if v != w]
        self.corner_verts = _Classes(corner_slots, corner_neighbors)
        self.halves = _Classes(corner_slots, half_neighbors)

        def side_neighbors(slot):
            t, v, f = slot
            t2, f2, sigma = g[t][f]
            return [(t2, sigma[v], f2)]

        side_slots = [(t, v, f) for t in range(n) for v in range(4)
                      for f in range(4) if v != f]
        self.sides = _Classes(side_slots, side_neighbors)
        self.side_sign = {}
        for cls in self.sides.reps:
            rep = cls[0]
            self.side_sign[rep] = 1
            t, v, f = rep
            t2, f2, sigma = g[t][f]
            other = (t2, sigma[v], f2)
            w1, w2 = sorted(x for x in range(4) if x not in (v, f))
            a, b = sigma[w1], sigma[w2]
            self.side_sign[other] = 1 if a < b else -1

        self.faces = _Classes([(t, f) for t in range(n) for f in range(4)],
                              lambda s: [g[s[0]][s[1]][:2]])
        self.n_tets = n
        self.n_edges = len(tri.edge_classes)

    # cell counts: 0-cells = corner_verts + edge midpoints;
    # 1-cells = halves + sides; 2-cells = corner triangles + hexagons; 3-cells = tets.

    def d1(self):
        nv = len(self.corner_verts) + self.n_edges
        cols = []
        for cls in self.halves.reps:
            t, a, b = cls[0]
            col = [0] * nv
            col[len(self.corner_verts) + self.tri.edge_index[(t, min(a, b), max(a, b))]] += 1
            col[self.corner_verts.index[(t, a, b)]] -= 1
            cols.append(col)
        for cls in self.sides.reps:
            t, v, f = cls[0]
            w1, w2 = sorted(x for x in range(4) if x not in (v, f))
            col = [0] * nv
            col[self.corner_verts.index[(t, v, w2)]] += 1
            col[self.corner_verts.index[(t, v, w1)]] -= 1
            cols.append(col)
        return _transpose_to_rows(cols)

    def _side_entry(self, t, v, f, sign):
        rep = self.sides.reps[self.sides.index[(t, v, f)]][0]
        return self.sides.index[(t, v, f)], sign * self.side_sign[(t, v, f)] * self.side_sign[rep]

    def triangle_boundary(self, t, v):
        """Signed side classes of the corner triangle (t, v), plus nothing else."""
        w0, w1, w2 = sorted(x for x in range(4) if x != v)
        out = []
        for f, s in ((w2, 1), (w0, 1), (w1, -1)):
            idx, sg = self._side_entry(t, v, f, s)
            out.append((idx, sg))
        return out

    def hexagon_boundary(self, t, f):
        """Boundary of the truncated-face hexagon at representative slot (t, f).

        Returns (half_part, side_part) as lists of (class index, coefficient).
        """
        a, b, c = sorted(x for x in range(4) if x != f)
        halves = {}
        sides = {}
        for (x, y) in ((a, b), (b, c), (c, a)):
            halves[self.halves.index[(t, x, y)]] = halves.get(self.halves.index[(t, x, y)], 0) + 1
            halves[self.halves.index[(t, y, x)]] = halves.get(self.halves.index[(t, y, x)], 0) - 1
        for (v, frm, to) in ((b, a, c), (c, b, a), (a, c, b)):
            idx, sg = self._side_entry(t, v, f, 1 if frm < to else -1)
            sides[idx] = sides.get(idx, 0) + sg
        return list(halves.items()), list(sides.items())

    def d2(self, relative=False):
        """Boundary matrix of 2-cells; relative mode drops all cusp cells."""
        n_half = len(self.halves)
        n_side = len(self.sides)
        cols = []
        self._hex_col_offset = 0
        if not relative:
            for t in range(self.n_tets):
                for v in range(4):
                    col = [0] * (n_half + n_side)
                    for idx, sg in self.triangle_boundary(t, v):
                        col[n_half + idx] += sg
                    cols.append(col)
            self._hex_col_offset = 4 * self.n_tets
        for cls in self.faces.reps:
            t, f = cls[0]
            rows = n_half if relative else n_half + n_side
            col = [0] * rows
            hpart, spart = self.hexagon_boundary(t, f)
            for idx, sg in hpart:
                col[idx] += sg
            if not relative:
                for idx, sg in spart:
                    col[n_half + idx] += sg
            cols.append(col)
        return _transpose_to_rows(cols)

    def _hexagon_sign(self, t, f):
        """Orientation of face slot (t, f)'s ascending triple against its class rep."""
        cls = self.faces.reps[self.faces.index[(t, f)]]
        rep = cls[0]
        if rep == (t, f):
            return 1
        t2, f2, sigma = self.tri.gluings[t][f]
        trip = tuple(sigma[x] for x in sorted(y for y in range(4) if y != f))
        target = tuple(sorted(y for y in range(4) if y != f2))
        return _triple_parity(trip, target)

    def d3(self, relative=False):
        n_tri = 0 if relative else 4 * self.n_tets
        n_hex = len(self.faces)
        cols = []
        for t in range(self.n_tets):
            col = [0] * (n_tri + n_hex)
            for f in range(4):
                sg = (-1) ** f * self._hexagon_sign(t, f)
                col[n_tri + self.faces.index[(t, f)]] += sg
            if not relative:
                for v in range(4):
                    col[4 * t + v] += (-1) ** (v + 1)
            cols.append(col)
        return _transpose_to_rows(cols)


def _transpose_to_rows(cols):
    if not cols:
        return []
    n = len(cols[0])
    return [[col[i] for col in cols] for i in range(n)]


def _triple_parity(trip, target):
    perm = [target.index(x) for x in trip]
    inv = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
    return 1 if inv % 2 == 0 else -1


# -- homology groups --

class HomologyInfo:
    def __init__(self, h1_rank, h1_torsion, h2_rel_rank, h2_rel_torsion):
        self.h1_rank = h1_rank
        self.h1_torsion = list(h1_torsion)
        self.h2_rel_rank = h2_rel_rank
        self.h2_rel_torsion = list(h2_rel_torsion)

    def __repr__(self):
        return (f"HomologyInfo(H1 = Z^{self.h1_rank} + {self.h1_torsion}, "
                f"H2(M,dM) = Z^{self.h2_rel_rank} + {self.h2_rel_torsion})")


def check_torus_links(tri):
    """Raise NonTorusLink unless every ideal vertex link has Euler characteristic 0."""
    cx = TruncatedComplex(tri)
    for vi, vcls in enumerate(tri.vertex_classes):
        corners = set(vcls)
        verts = {i for (t, v, w), i in cx.corner_verts.index.items() if (t, v) in corners}
        sides = {i for (t, v, f), i in cx.sides.index.items() if (t, v) in corners}
        chi = len(verts) - len(sides) + len(vcls)  # one link triangle per corner
        if chi != 0:
            raise NonTorusLink(f"vertex class {vi} has link Euler characteristic {chi}")
    return cx


def _homology_from_maps(d_low, d_high, n_chains):
    """(rank, torsion) of ker(d_low)/im(d_high) for integer matrices."""
    if d_low:
        kb = kernel_basis(d_low)
    else:
        kb = [[int(i == j) for i in range(n_chains)] for j in range(n_chains)]
    if d_high and d_high[0]:
        cols = [[row[j] for row in d_high] for j in range(len(d_high[0]))]
    else:
        cols = []
    return quotient_group(kb, cols)


def homology_groups(tri):
    """H1(M;Z) and H2(M, dM; Z) of the underlying compact manifold."""
    cx = check_torus_links(tri)
    d1 = cx.d1()
    d2 = cx.d2()
    n1 = len(cx.halves) + len(cx.sides)
    h1_rank, h1_tor = _homology_from_maps(d1, d2, n1)
    d2r = cx.d2(relative=True)
    d3r = cx.d3(relative=True)
    h2_rank, h2_tor = _homology_from_maps(d2r, d3r, len(cx.halves))
    return HomologyInfo(h1_rank, h1_tor, h2_rank, h2_tor)


def relative_h2_cycles(tri):
    """Generators of H2(M, dM) as hexagon chains, with the ambient complex."""
    cx = check_torus_links(tri)
    d2r = cx.d2(relative=True)
    kb = kernel_basis(d2r) if d2r else []
    return cx, kb


def boundary_side_chain(cx, hex_chain):
    """Honest boundary (side-class 1-chain) of a relative 2-cycle of hexagons."""
    out = {}
    for j, coeff in enumerate(hex_chain):
        if coeff == 0:
            continue
        t, f = cx.faces.reps[j][0]
        _hp, sp = cx.hexagon_boundary(t, f)
        for idx, sg in sp:
            out[idx] = out.get(idx, 0) + coeff * sg
    return out


# -- slopes and fibered-face arithmetic --

def normalize_slope(p, q):
    g = gcd(abs(p), abs(q))
    if g == 0:
        return (0, 0)
    p, q = p // g, q // g
    if p < 0 or (p == 0 and q < 0):
        p, q = -p, -q
    return (p, q)


def intersection_number(s1, s2):
    p1, q1 = s1
    p2, q2 = s2
    return abs(p1 * q2 - q1 * p2)


def slope_sum(weighted_slopes):
    """Homological sum of (multiplicity, slope) pairs on one torus.

    Returns (component_count, class) where the class is the primitive slope
    and component_count = gcd of the summed coordinates (0 for the zero class).
    """
    P = sum(m * s[0] for m, s in weighted_slopes)
    Q = sum(m * s[1] for m, s in weighted_slopes)
    g = gcd(abs(P), abs(Q))
    if g == 0:
        return 0, (0, 0)
    return g, normalize_slope(P, Q)


class FaceData:
    """Two vertices of a fibered face with norms and per-cusp boundary data."""

    def __init__(self, cusp_count, norm1, boundary1, norm2, boundary2, coeff_scheme="raw"):
        if norm1 <= 0 or norm2 <= 0:
            raise ValueError("vertex norms must be positive")
        self.cusp_count = cusp_count
        self.norms = (int(norm1), int(norm2))
        self.boundaries = (
            [[(int(m), (int(p), int(q))) for (m, (p, q)) in cusp] for cusp in boundary1],
            [[(int(m), (int(p), int(q))) for (m, (p, q)) in cusp] for cusp in boundary2],
        )
        for b in self.boundaries:
            if len(b) != cusp_count:
                raise ValueError("boundary data must list every cusp")
        self.coeff_scheme = coeff_scheme

    @classmethod
    def from_json_obj(cls, obj):
        def conv(bnd):
            return [[(entry[0], (entry[1][0], entry[1][1])) for entry in cusp] for cusp in bnd]
        return cls(obj["cusps"], obj["v1"]["norm"], conv(obj["v1"]["boundary"]),
                   obj["v2"]["norm"], conv(obj["v2"]["boundary"]),
                   obj.get("coeff_scheme", "raw"))

    @classmethod
    def from_json(cls, text):
        return cls.from_json_obj(json.loads(text))


def fiber_type(face, coeffs):
    """Topological type (genus, punctures, norm) of the fiber a*v1 + b*v2.

    The norm is linear on the cone over the face; the puncture count comes
    from the per-cusp homological sums of the two vertices' boundaries; the
    genus is solved from norm = 2g - 2 + punctures and must be a nonnegative
    integer, otherwise the input is rejected.
    """
    a, b = coeffs
    if a < 0 or b < 0 or (a == 0 and b == 0):
        raise ValueError("coefficients must be nonnegative and not both zero")
    if gcd(a, b) != 1:
        raise ValueError("coefficient pair must be primitive")
    norm = a * face.norms[0] + b * face.norms[1]
    punctures = 0
    for cusp in range(face.cusp_count):
        weighted = ([(a * m, s) for m, s in face.boundaries[0][cusp]]
                    + [(b * m, s) for m, s in face.boundaries[1][cusp]])
        count, _cls = slope_sum(weighted)
        punctures += count
    if (norm + 2 - punctures) % 2 != 0:
        raise ParityViolation(
            f"norm {norm} and boundary count {punctures} have incompatible parity")
    genus = (norm + 2 - punctures) // 2
    if genus < 0:
        raise NonPositiveGenus(f"solved genus {genus} is negative")
    return genus, punctures, norm
