"""Words over a Coxeter generating set and Tits' rewriting system.

A Coxeter matrix ``M = (m_st)`` over a finite ordered generator set ``S``
presents the group ``W(M) = <S | (st)^m_st>``.  Generators are involutions,
so the inverse of a word is its reversal.  The word problem is solved by
exploring the closure of a word under two length-non-increasing moves:

* cancellation: delete an adjacent equal pair ``ss``;
* homotopy: replace a factor ``gamma_st(m_st)`` by ``gamma_ts(m_st)``
  when ``m_st`` is finite.

A word represents the identity iff the empty word appears in that closure.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

INF = math.inf

DEFAULT_BUDGET = 2_000_000

Word = tuple[str, ...]


class Indeterminate(Exception):
    """The closure search exhausted its budget before reaching an answer."""


class CoxeterMatrix:
    """Symmetric matrix of exponents over an ordered finite generator set.

    Diagonal entries are 1, off-diagonal entries lie in {2, 3, ...} or are
    infinite (``math.inf``).
    """

    def __init__(self, generators: Sequence[str], entries: Mapping[tuple[str, str], int | float]):
        gens = tuple(generators)
        if len(set(gens)) != len(gens) or not gens:
            raise ValueError("generators must be a nonempty sequence of distinct symbols")
        for g in gens:
            if not g or any(ch.isspace() for ch in g):
                raise ValueError(f"bad generator symbol {g!r}")
        self._generators = gens
        self._index = {g: i for i, g in enumerate(gens)}
        table: dict[tuple[str, str], int | float] = {}
        for i, s in enumerate(gens):
            for t in gens[i + 1:]:
                if (s, t) in entries:
                    m = entries[(s, t)]
                elif (t, s) in entries:
                    m = entries[(t, s)]
                else:
                    raise ValueError(f"missing entry for pair ({s}, {t})")
                if m != INF:
                    if not isinstance(m, int) or m < 2:
                        raise ValueError(f"entry for ({s}, {t}) must be an integer >= 2 or infinity")
                table[(s, t)] = m
                table[(t, s)] = m
        for key in entries:
            s, t = key
            if s not in self._index or t not in self._index:
                raise ValueError(f"entry {key} mentions an unknown generator")
            if s == t and entries[key] != 1:
                raise ValueError("diagonal entries must be 1")
        self._table = table

    @property
    def generators(self) -> tuple[str, ...]:
        return self._generators

    @property
    def rank(self) -> int:
        return len(self._generators)

    def index(self, s: str) -> int:
        return self._index[s]

    def entry(self, s: str, t: str) -> int | float:
        if s == t:
            if s not in self._index:
                raise KeyError(s)
            return 1
        return self._table[(s, t)]

    def is_skew_angled(self) -> bool:
        return all(m >= 3 for m in self._table.values())

    def pairs(self) -> Iterator[tuple[str, str]]:
        """Unordered generator pairs, each yielded once."""
        for i, s in enumerate(self._generators):
            for t in self._generators[i + 1:]:
                yield s, t

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CoxeterMatrix)
            and self._generators == other._generators
            and self._table == other._table
        )

    def __hash__(self) -> int:
        return hash((self._generators, tuple(sorted((k, v) for k, v in self._table.items()))))

    def __repr__(self) -> str:
        return f"CoxeterMatrix(generators={self._generators!r})"

    # -- serialization --------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "CoxeterMatrix":
        """Parse the plain-text format.

        Line one holds the space-separated generator names; each following
        line holds the upper-triangular entries of one row, with the token
        ``inf`` for an infinite exponent.
        """
        lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln and not ln.startswith("#")]
        if not lines:
            raise ValueError("empty matrix file")
        gens = tuple(lines[0].split())
        n = len(gens)
        rows = lines[1:]
        if len(rows) != max(n - 1, 0):
            raise ValueError(f"expected {n - 1} entry rows, found {len(rows)}")
        entries: dict[tuple[str, str], int | float] = {}
        for i, row in enumerate(rows):
            tokens = row.split()
            if len(tokens) != n - 1 - i:
                raise ValueError(f"row {i + 1}: expected {n - 1 - i} entries, found {len(tokens)}")
            for j, tok in enumerate(tokens, start=i + 1):
                entries[(gens[i], gens[j])] = INF if tok == "inf" else int(tok)
        return cls(gens, entries)

    def to_text(self) -> str:
        lines = [" ".join(self._generators)]
        gens = self._generators
        for i in range(len(gens) - 1):
            tokens = []
            for j in range(i + 1, len(gens)):
                m = self.entry(gens[i], gens[j])
                tokens.append("inf" if m == INF else str(m))
            lines.append(" ".join(tokens))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "CoxeterMatrix":
        gens = tuple(data["generators"])
        upper = data["upper_triangular"]
        entries: dict[tuple[str, str], int | float] = {}
        if len(upper) != max(len(gens) - 1, 0):
            raise ValueError("upper_triangular has the wrong number of rows")
        for i, row in enumerate(upper):
            if len(row) != len(gens) - 1 - i:
                raise ValueError(f"upper_triangular row {i} has the wrong length")
            for j, value in enumerate(row, start=i + 1):
                entries[(gens[i], gens[j])] = INF if value == "inf" else int(value)
        return cls(gens, entries)

    def to_json_dict(self) -> dict:
        gens = self._generators
        upper = []
        for i in range(len(gens) - 1):
            row = []
            for j in range(i + 1, len(gens)):
                m = self.entry(gens[i], gens[j])
                row.append("inf" if m == INF else m)
            upper.append(row)
        return {"generators": list(gens), "upper_triangular": upper}

    @classmethod
    def load(cls, path: str) -> "CoxeterMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        if path.endswith(".json"):
            return cls.from_json_dict(json.loads(text))
        return cls.from_text(text)


# -- words --------------------------------------------------------------


def parse_word(text: str, matrix: CoxeterMatrix | None = None) -> Word:
    """Split a word on whitespace; an empty string is the empty word."""
    letters = tuple(text.split())
    if matrix is not None:
        for x in letters:
            if x not in matrix.generators:
                raise ValueError(f"letter {x!r} is not a generator")
    return letters


def word_to_str(w: Word) -> str:
    return " ".join(w)


def inverse_word(w: Word) -> Word:
    """Generators are involutions, so inversion is reversal."""
    return tuple(reversed(w))


def alternating_word(s: str, t: str, k: int) -> Word:
    """The length-k word s t s t ... starting with s."""
    if s == t:
        raise ValueError("alternating word needs two distinct generators")
    if k < 0:
        raise ValueError("length must be nonnegative")
    return tuple(s if i % 2 == 0 else t for i in range(k))


def free_reduce(w: Word) -> Word:
    """Delete adjacent equal pairs until none remain (confluent)."""
    out: list[str] = []
    for x in w:
        if out and out[-1] == x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cancellation_sites(w: Word) -> list[int]:
    """Indices i with w[i] == w[i+1]; applying a site deletes both letters."""
    return [i for i in range(len(w) - 1) if w[i] == w[i + 1]]


def homotopy_sites(w: Word, matrix: CoxeterMatrix) -> list[tuple[int, str, str]]:
    """Positions where a factor gamma_st(m_st) with finite m_st begins.

    Applying a site replaces the factor by gamma_ts(m_st).  Pairs with an
    infinite exponent never produce a site.
    """
    sites: list[tuple[int, str, str]] = []
    n = len(w)
    for i in range(n - 1):
        s, t = w[i], w[i + 1]
        if s == t:
            continue
        m = matrix.entry(s, t)
        if m == INF or i + m > n:
            continue
        if w[i:i + m] == alternating_word(s, t, m):
            sites.append((i, s, t))
    return sites


def apply_cancellation(w: Word, i: int) -> Word:
    if not (0 <= i < len(w) - 1 and w[i] == w[i + 1]):
        raise ValueError("not a cancellation site")
    return w[:i] + w[i + 2:]


def apply_homotopy(w: Word, site: tuple[int, str, str], matrix: CoxeterMatrix) -> Word:
    i, s, t = site
    m = matrix.entry(s, t)
    if m == INF or w[i:i + m] != alternating_word(s, t, m):
        raise ValueError("not a homotopy site")
    return w[:i] + alternating_word(t, s, int(m)) + w[i + m:]


@dataclass(frozen=True)
class TitsClosure:
    origin: Word
    members: frozenset[Word]
    budget_exhausted: bool


def tits_closure(w: Word, matrix: CoxeterMatrix, budget: int = DEFAULT_BUDGET) -> TitsClosure:
    """Breadth-first closure of {w} under cancellations and homotopies.

    The search stops once ``budget`` distinct words have been collected;
    truncation is flagged, not an error.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    w = tuple(w)
    seen: set[Word] = {w}
    queue: deque[Word] = deque([w])
    exhausted = False
    while queue:
        cur = queue.popleft()
        nexts: list[Word] = [apply_cancellation(cur, i) for i in cancellation_sites(cur)]
        nexts.extend(apply_homotopy(cur, site, matrix) for site in homotopy_sites(cur, matrix))
        for nxt in nexts:
            if nxt not in seen:
                if len(seen) >= budget:
                    exhausted = True
                    queue.clear()
                    break
                seen.add(nxt)
                queue.append(nxt)
    return TitsClosure(origin=w, members=frozenset(seen), budget_exhausted=exhausted)


def _identity_search(w: Word, matrix: CoxeterMatrix, budget: int) -> bool:
    """Like tits_closure membership of the empty word, with early exit."""
    w = tuple(w)
    if not w:
        return True
    seen: set[Word] = {w}
    queue: deque[Word] = deque([w])
    while queue:
        cur = queue.popleft()
        nexts = [apply_cancellation(cur, i) for i in cancellation_sites(cur)]
        nexts.extend(apply_homotopy(cur, site, matrix) for site in homotopy_sites(cur, matrix))
        for nxt in nexts:
            if not nxt:
                return True
            if nxt not in seen:
                if len(seen) >= budget:
                    raise Indeterminate(
                        f"closure budget of {budget} words exhausted on a word of length {len(w)}"
                    )
                seen.add(nxt)
                queue.append(nxt)
    return False


def is_identity(w: Word, matrix: CoxeterMatrix, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff w represents 1 in W(M).

    Adjacent equal pairs are cancelled up front; cancellations preserve the
    represented element and the empty word is reachable from the original
    word iff it is reachable from the cancelled one.
    """
    return _identity_search(free_reduce(w), matrix, budget)


def equal_in_group(w1: Word, w2: Word, matrix: CoxeterMatrix, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff w1 and w2 represent the same element of W(M)."""
    return is_identity(tuple(w1) + inverse_word(tuple(w2)), matrix, budget)


def reduce_word(w: Word, matrix: CoxeterMatrix, budget: int = DEFAULT_BUDGET) -> Word:
    """A shortest word equal to w in W(M); ties broken lexicographically.

    The lexicographic order follows the generator order of the matrix, so
    the result is a canonical form: two words are equal in the group iff
    their reduced forms coincide.  Adjacent equal pairs are cancelled up
    front; every geodesic word of the element remains reachable because
    equal-length geodesics are connected by homotopies alone.
    """
    closure = tits_closure(free_reduce(w), matrix, budget)
    if closure.budget_exhausted:
        raise Indeterminate(f"closure budget of {budget} words exhausted")
    order = matrix.index
    return min(closure.members, key=lambda v: (len(v), [order(x) for x in v]))


def is_reduced(w: Word, matrix: CoxeterMatrix, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff w is geodesic: no sequence of moves shortens it."""
    return len(reduce_word(w, matrix, budget)) == len(w)


# -- alternating-subword bookkeeping ------------------------------------


def _is_alternating(w: Word, i: int, j: int) -> bool:
    """True iff w[i:j] alternates between two symbols (or is shorter than 2)."""
    for k in range(i, j - 1):
        if w[k] == w[k + 1]:
            return False
        if k + 2 < j and w[k] != w[k + 2]:
            return False
    return True


def maximal_alternating_runs(w: Word) -> list[tuple[int, int]]:
    """Index ranges [i, j) of the maximal alternating subwords of w.

    Maximality is by inclusion; distinct runs may overlap in one letter.
    """
    n = len(w)
    runs: list[tuple[int, int]] = []
    for i in range(n):
        for j in range(i + 1, n + 1):
            if not _is_alternating(w, i, j):
                continue
            if i > 0 and _is_alternating(w, i - 1, j):
                continue
            if j < n and _is_alternating(w, i, j + 1):
                continue
            runs.append((i, j))
    return runs


def kappa(w: Word, matrix: CoxeterMatrix, budget: int = DEFAULT_BUDGET) -> int:
    """Minimal number of maximal alternating subwords covering w.

    Defined only for reduced (geodesic) input; other input is a
    precondition error.  Computed by an exhaustive cover search over the
    maximal alternating subwords.
    """
    w = tuple(w)
    if not is_reduced(w, matrix, budget):
        raise ValueError("kappa requires a reduced word")
    n = len(w)
    if n == 0:
        return 0
    runs = maximal_alternating_runs(w)
    best = [math.inf] * (n + 1)
    best[0] = 0
    for covered in range(n):
        if best[covered] == math.inf:
            continue
        for (a, b) in runs:
            if a <= covered < b and best[covered] + 1 < best[b]:
                best[b] = best[covered] + 1
    assert best[n] != math.inf, "maximal runs always cover a word"
    return int(best[n])


def find_almost_relator(w: Word, matrix: CoxeterMatrix) -> Optional[tuple[int, int, frozenset[str]]]:
    """Leftmost maximal alternating subword of length >= 2*m_st - 3.

    Only pairs with a finite exponent qualify.  Returns (start, end, type)
    with an exclusive end index, or None.
    """
    w = tuple(w)
    hits: list[tuple[int, int, frozenset[str]]] = []
    for (a, b) in maximal_alternating_runs(w):
        if b - a < 2:
            continue
        s, t = w[a], w[a + 1]
        m = matrix.entry(s, t)
        if m == INF:
            continue
        if b - a >= 2 * m - 3:
            hits.append((a, b, frozenset((s, t))))
    if not hits:
        return None
    return min(hits, key=lambda h: (h[0], h[1]))


# -- elementary rank bounds ---------------------------------------------


def mod2_rank_bound(matrix: CoxeterMatrix) -> int:
    """Components of the graph on S joining s-t when m_st is odd.

    This is the rank of the image of W(M) in its mod-2 abelianization,
    hence a lower bound for the rank of W(M).
    """
    parent = {g: g for g in matrix.generators}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, t in matrix.pairs():
        m = matrix.entry(s, t)
        if m != INF and m % 2 == 1:
            parent[find(s)] = find(t)
    return len({find(g) for g in matrix.generators})


def petersen_thom_bound(matrix: CoxeterMatrix) -> Optional[int]:
    """ceil(n/2) when (1/2) * sum over ordered pairs s != t of 1/m_st < 1.

    Convention: the sum ranges over ordered pairs and infinite entries
    contribute 0.  Returns None when the hypothesis fails.
    """
    total = Fraction(0)
    for s, t in matrix.pairs():
        m = matrix.entry(s, t)
        if m != INF:
            total += Fraction(2, int(m))  # both ordered pairs at once
    if Fraction(1, 2) * total < 1:
        return -(-matrix.rank // 2)
    return None
