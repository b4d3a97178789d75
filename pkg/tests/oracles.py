"""Independent group oracles used by the test suite.

Nothing here touches the rewriting engine: dihedral groups are realized by
(rotation, flip) pairs with modular arithmetic, and rank-3 groups by the
geometric reflection representation with exact arithmetic in the field
Q(sqrt2, sqrt5), which covers every exponent in {2, 3, 4, 5}.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from coxfold.coxeter import CoxeterMatrix, INF, Word


# -- dihedral oracle (rank 2) ------------------------------------------


class DihedralOracle:
    """W = <s, t | s^2, t^2, (st)^m> realized as symmetries of an m-gon.

    Elements are (rotation mod m, flip) pairs; s = (0, 1), t = (1, 1).
    """

    def __init__(self, matrix: CoxeterMatrix):
        s, t = matrix.generators
        m = matrix.entry(s, t)
        if m == INF or matrix.rank != 2:
            raise ValueError("dihedral oracle needs rank 2 and a finite exponent")
        self.m = int(m)
        self.gen = {s: (0, 1), t: (1 % self.m, 1)}
        self.identity = (0, 0)

    def mul(self, a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
        k1, f1 = a
        k2, f2 = b
        if f1 == 0:
            return ((k1 + k2) % self.m, f2)
        return ((k1 - k2) % self.m, 1 - f2)

    def eval(self, w: Word) -> tuple[int, int]:
        out = self.identity
        for letter in w:
            out = self.mul(out, self.gen[letter])
        return out

    def is_identity(self, w: Word) -> bool:
        return self.eval(w) == self.identity

    def geodesic_length(self, w: Word) -> int:
        """Cayley-graph distance from 1, by BFS over the 2m elements."""
        return self.distances()[self.eval(w)]

    def distances(self) -> dict[tuple[int, int], int]:
        if not hasattr(self, "_dist"):
            dist = {self.identity: 0}
            queue = deque([self.identity])
            while queue:
                g = queue.popleft()
                for x in self.gen.values():
                    h = self.mul(g, x)
                    if h not in dist:
                        dist[h] = dist[g] + 1
                        queue.append(h)
            self._dist = dist
        return self._dist


# -- exact arithmetic in Q(sqrt2, sqrt5) -------------------------------


@dataclass(frozen=True)
class Quad:
    """a + b*sqrt2 + c*sqrt5 + d*sqrt10 with rational coefficients."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)
    d: Fraction = Fraction(0)

    def __add__(self, other: "Quad") -> "Quad":
        return Quad(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __sub__(self, other: "Quad") -> "Quad":
        return Quad(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __mul__(self, other: "Quad") -> "Quad":
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        return Quad(
            a1 * a2 + 2 * b1 * b2 + 5 * c1 * c2 + 10 * d1 * d2,
            a1 * b2 + b1 * a2 + 5 * (c1 * d2 + d1 * c2),
            a1 * c2 + c1 * a2 + 2 * (b1 * d2 + d1 * b2),
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        )

    def scaled(self, k: Fraction) -> "Quad":
        return Quad(self.a * k, self.b * k, self.c * k, self.d * k)

    def key(self) -> tuple:
        return (self.a, self.b, self.c, self.d)


QZERO = Quad()
QONE = Quad(a=Fraction(1))

_COS = {
    2: QZERO,
    3: Quad(a=Fraction(1, 2)),
    4: Quad(b=Fraction(1, 2)),
    5: Quad(a=Fraction(1, 4), c=Fraction(1, 4)),
}


def _reflection_matrices(matrix: CoxeterMatrix) -> dict[str, tuple]:
    """Generator images under the standard reflection representation.

    The bilinear form has B(a_s, a_t) = -cos(pi / m_st); each generator
    acts by x -> x - 2 B(x, a_s) a_s.  Faithful for every Coxeter group,
    so word equality in W(M) is matrix equality.  Exponents must lie in
    {2, 3, 4, 5} off the diagonal.
    """
    gens = matrix.generators
    n = len(gens)
    B: list[list[Quad]] = [[QZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                B[i][j] = QONE
            else:
                m = matrix.entry(gens[i], gens[j])
                if m == INF or int(m) not in _COS:
                    raise ValueError("reflection oracle supports finite exponents in {2,3,4,5}")
                B[i][j] = QZERO - _COS[int(m)]
    mats: dict[str, tuple] = {}
    for i in range(n):
        rows = []
        for r in range(n):
            row = []
            for c in range(n):
                val = QONE if r == c else QZERO
                if r == i:
                    val = val - B[i][c].scaled(Fraction(2))
                row.append(val)
            rows.append(tuple(row))
        mats[gens[i]] = tuple(rows)
    return mats


def _mat_mul(x: tuple, y: tuple) -> tuple:
    n = len(x)
    return tuple(
        tuple(
            sum((x[r][k] * y[k][c] for k in range(n)), QZERO)
            for c in range(n)
        )
        for r in range(n)
    )


def _mat_key(x: tuple) -> tuple:
    return tuple(cell.key() for row in x for cell in row)


class CayleyOracle:
    """Exact finite-group oracle via the reflection representation.

    Builds the whole group by BFS over generator multiplication, so the
    matrix must present a finite group (all the fixtures used in tests do).
    """

    def __init__(self, matrix: CoxeterMatrix, max_size: int = 20000):
        self.matrix = matrix
        self.gens = _reflection_matrices(matrix)
        n = matrix.rank
        ident = tuple(
            tuple(QONE if r == c else QZERO for c in range(n)) for r in range(n)
        )
        self.identity = ident
        dist = {_mat_key(ident): 0}
        elems = {_mat_key(ident): ident}
        queue = deque([ident])
        while queue:
            g = queue.popleft()
            dg = dist[_mat_key(g)]
            for mat in self.gens.values():
                h = _mat_mul(g, mat)
                key = _mat_key(h)
                if key not in dist:
                    if len(dist) >= max_size:
                        raise ValueError("group larger than the oracle size cap")
                    dist[key] = dg + 1
                    elems[key] = h
                    queue.append(h)
        self.dist = dist
        self.elements = elems

    @property
    def order(self) -> int:
        return len(self.dist)

    def eval_key(self, w: Word) -> tuple:
        out = self.identity
        for letter in w:
            out = _mat_mul(out, self.gens[letter])
        return _mat_key(out)

    def is_identity(self, w: Word) -> bool:
        return self.eval_key(w) == _mat_key(self.identity)

    def equal(self, w1: Word, w2: Word) -> bool:
        return self.eval_key(w1) == self.eval_key(w2)

    def geodesic_length(self, w: Word) -> int:
        return self.dist[self.eval_key(w)]

    def generator_keys(self) -> dict[str, tuple]:
        return {g: self.eval_key((g,)) for g in self.gens}

    def _permutations(self) -> tuple[list, dict, dict]:
        """Element order, key -> index, and the right-multiplication
        permutation of each generator; built once, then cached."""
        if not hasattr(self, "_perm_cache"):
            order = sorted(self.dist)
            index = {key: i for i, key in enumerate(order)}
            perms = {}
            for g, mat in self.gens.items():
                perms[g] = [
                    index[_mat_key(_mat_mul(self.elements[key], mat))]
                    for key in order
                ]
            self._perm_cache = (order, index, perms)
        return self._perm_cache

    def subgroup(self, words: Sequence[Word]) -> frozenset:
        """Element keys of the subgroup generated by the given words."""
        order, index, perms = self._permutations()
        ident = index[_mat_key(self.identity)]
        # generators are involutions, so the inverse of a word is its reversal
        seeds = []
        for w in words:
            for letters in (w, tuple(reversed(w))):
                perm = list(range(len(order)))
                for letter in letters:
                    p = perms[letter]
                    perm = [p[i] for i in perm]
                seeds.append(perm)
        members = {ident}
        queue = deque(members)
        while queue:
            i = queue.popleft()
            for perm in seeds:
                j = perm[i]
                if j not in members:
                    members.add(j)
                    queue.append(j)
        return frozenset(order[i] for i in members)
