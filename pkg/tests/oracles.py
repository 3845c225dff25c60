"""Independent brute-force oracles used to freeze expected test values.

Everything in here is deliberately written against raw gluing data, not the
package's derived structures, so disagreements point at real bugs.

The layered-lattice bundle construction realizes a once-punctured-torus
bundle with monodromy given by an LR word: the fiber is triangulated by the
two lattice triangles of a basis (e, f), a letter flips one diagonal (giving
one tetrahedron per letter), and the top layer is glued back to the bottom
through the inverse of the monodromy matrix.  This route never touches flat
geometry, so it is independent of the package's rectangle enumeration.
"""

from fractions import Fraction


# -- brute-force union-find on gluing data --

class UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        if p != x:
            p = self.parent[x] = self.find(p)
        return p

    def union(self, x, y):
        self.parent[self.find(x)] = self.find(y)

    def classes(self):
        groups = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return [sorted(v) for v in groups.values()]


def brute_edge_classes(gluings):
    """Orbits of the 6*T tetrahedron-edge slots under all face identifications."""
    uf = UnionFind()
    for t, tet in enumerate(gluings):
        for a in range(4):
            for b in range(a + 1, 4):
                uf.find((t, a, b))
        for f, (t2, _f2, sigma) in enumerate(tet):
            for a in range(4):
                for b in range(a + 1, 4):
                    if f in (a, b):
                        continue
                    x, y = sigma[a], sigma[b]
                    uf.union((t, a, b), (t2, min(x, y), max(x, y)))
    return uf.classes()


def brute_vertex_classes(gluings):
    uf = UnionFind()
    for t, tet in enumerate(gluings):
        for v in range(4):
            uf.find((t, v))
        for f, (t2, _f2, sigma) in enumerate(tet):
            for v in range(4):
                if v != f:
                    uf.union((t, v), (t2, sigma[v]))
    return uf.classes()


# -- layered lattice construction of punctured-torus bundles --

def _v_add(p, q):
    return (p[0] + q[0], p[1] + q[1])


def _v_sub(p, q):
    return (p[0] - q[0], p[1] - q[1])


def _mat_vec(m, p):
    return (m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1])


def _mat_inv(m):
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return ((Fraction(m[1][1], det), Fraction(-m[0][1], det)),
            (Fraction(-m[1][0], det), Fraction(m[0][0], det)))


def farey_bundle_gluings(word):
    """Raw gluing data of the punctured-torus bundle over an LR word."""
    assert word and set(word) <= {"L", "R"}
    n = len(word)
    e, f = (1, 0), (0, 1)
    origin = (0, 0)
    tets = []
    for letter in word:
        ef = _v_add(e, f)
        tri_plus = (origin, e, ef)
        tri_minus = (origin, f, ef)
        if letter == "R":
            shift = _v_sub(origin, e)           # -e
            corners = [shift, origin, f, ef]
            e2, f2 = e, ef
            lower = {"-": (origin, tri_minus), "+": (shift, None)}
        else:
            shift = _v_sub(origin, f)           # -f
            corners = [shift, origin, e, ef]
            e2, f2 = ef, f
            lower = {"+": (origin, tri_plus), "-": (shift, None)}
        for s, (c, pts) in lower.items():
            if pts is None:
                base = tri_plus if s == "+" else tri_minus
                lower[s] = (c, tuple(_v_add(p, c) for p in base))
        ef2 = _v_add(e2, f2)
        tri_plus2 = (origin, e2, ef2)
        tri_minus2 = (origin, f2, ef2)
        upper = {"+": (shift, tuple(_v_add(p, shift) for p in tri_plus2)),
                 "-": (shift, tuple(_v_add(p, shift) for p in tri_minus2))}
        label_of = {p: i for i, p in enumerate(sorted(corners))}
        tets.append({"corners": sorted(corners), "label": label_of,
                     "lower": lower, "upper": upper})
        e, f = e2, f2

    monodromy = ((e[0], f[0]), (e[1], f[1]))    # columns are images of the basis
    minv = _mat_inv(monodromy)

    gluings = [[None] * 4 for _ in range(n)]
    for i in range(n):
        j = (i + 1) % n
        for s in "+-":
            c_up, pts_up = tets[i]["upper"][s]
            c_lo, pts_lo = tets[j]["lower"][s]
            if j == 0:
                def pmap(p, cu=c_up, cl=c_lo):
                    q = _mat_vec(minv, _v_sub(p, cu))
                    q = (int(q[0]), int(q[1]))
                    return _v_add(q, cl)
            else:
                def pmap(p, cu=c_up, cl=c_lo):
                    return _v_add(_v_sub(p, cu), cl)
            up_off = next(p for p in tets[i]["corners"] if p not in pts_up)
            lo_off = next(p for p in tets[j]["corners"] if p not in pts_lo)
            sigma = [None] * 4
            for p in tets[i]["corners"]:
                if p == up_off:
                    sigma[tets[i]["label"][p]] = tets[j]["label"][lo_off]
                else:
                    sigma[tets[i]["label"][p]] = tets[j]["label"][pmap(p)]
            fa = tets[i]["label"][up_off]
            fb = tets[j]["label"][lo_off]
            sigma = tuple(sigma)
            gluings[i][fa] = (j, fb, sigma)
            inv = [None] * 4
            for a, b in enumerate(sigma):
                inv[b] = a
            gluings[j][fb] = (i, fa, tuple(inv))
    return gluings


def lr_matrix(word):
    """Monodromy matrix of an LR word, R = [[1,1],[0,1]] and L = [[1,0],[1,1]]."""
    m = ((1, 0), (0, 1))
    mats = {"R": ((1, 1), (0, 1)), "L": ((1, 0), (1, 1))}
    for ch in word:
        a = mats[ch]
        m = ((m[0][0] * a[0][0] + m[0][1] * a[1][0], m[0][0] * a[0][1] + m[0][1] * a[1][1]),
             (m[1][0] * a[0][0] + m[1][1] * a[1][0], m[1][0] * a[0][1] + m[1][1] * a[1][1]))
    return m
