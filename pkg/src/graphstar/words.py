"""Simplicial graphs and the word calculus of partially commutative words.

Vertices are integers 0..n-1 and words are tuples of vertices.  The graph
encodes which letters commute: two words are equivalent under the relation
generated by

* deleting one of two equal adjacent letters, and
* swapping two adjacent letters joined by an edge.

A word is *reduced* when any two equal letters are separated by some letter
not adjacent to them (the empty word is reduced).  Every word is equivalent
to a reduced one, all reduced representatives of a class share their length
and letter multiset, and each class has a unique lexicographically least
representative which we use as the *minimal* (normal form) word.

On top of reduction this module implements the non-commutative length of a
word with respect to a distinguished vertex, the truncation partial order,
complete sets (truncation-closed sets containing the empty word), and the
standard form factorization y . c . (v0) . b that extremizes non-commutative
length.  Everything here is exact integer combinatorics; brute-force
enumeration backed by memoization is preferred over cleverness.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

from .errors import (
    BadVertexError,
    CapExceededError,
    NonUniqueError,
    VertexAbsentError,
)

__all__ = [
    "SimplicialGraph",
    "is_reduced",
    "reduce_word",
    "equivalence_class",
    "normal_form",
    "normal_form_with_perm",
    "nc_length",
    "nc_length_set",
    "truncations",
    "complete_closure",
    "is_complete",
    "StdForm",
    "standard_form",
    "word_from_text",
    "word_to_text",
    "find_merge_pair",
]

DEFAULT_CLASS_CAP = 100_000


class SimplicialGraph:
    """Undirected graph without loops; the commutation pattern for words.

    Immutable and hashable, so graphs can key memoization caches.  Adjacency
    is kept as per-vertex bitmasks for fast inner loops.
    """

    __slots__ = ("n", "edges", "_mask")

    def __init__(self, n_vertices: int, edges=()):
        if n_vertices < 0:
            raise BadVertexError("vertex count must be nonnegative")
        norm = set()
        for i, j in edges:
            if not (0 <= i < n_vertices and 0 <= j < n_vertices):
                raise BadVertexError(f"edge ({i},{j}) outside 0..{n_vertices - 1}")
            if i == j:
                raise BadVertexError(f"loop at vertex {i} is not allowed")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "n", n_vertices)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        mask = [0] * n_vertices
        for i, j in norm:
            mask[i] |= 1 << j
            mask[j] |= 1 << i
        object.__setattr__(self, "_mask", tuple(mask))

    def __setattr__(self, *_):
        raise AttributeError("SimplicialGraph is immutable")

    def adjacent(self, u: int, v: int) -> bool:
        return bool((self._mask[u] >> v) & 1)

    def neighbor_mask(self, v: int) -> int:
        return self._mask[v]

    def __eq__(self, other):
        return (
            isinstance(other, SimplicialGraph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"SimplicialGraph(n={self.n}, edges={list(self.edges)})"

    # -- constructors --------------------------------------------------------

    @classmethod
    def edgeless(cls, n: int) -> "SimplicialGraph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "SimplicialGraph":
        return cls(n, combinations(range(n), 2))

    @classmethod
    def path(cls, n: int) -> "SimplicialGraph":
        return cls(n, ((i, i + 1) for i in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> "SimplicialGraph":
        if n < 3:
            raise BadVertexError("a cycle needs at least 3 vertices")
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    @staticmethod
    def all_graphs(n: int):
        """All graphs on n labeled vertices (2^C(n,2) of them); for sweeps."""
        pairs = list(combinations(range(n), 2))
        for bits in range(1 << len(pairs)):
            yield SimplicialGraph(n, [p for k, p in enumerate(pairs) if (bits >> k) & 1])

    # -- text format ---------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "SimplicialGraph":
        """Parse the graph text format: 'n <count>' then 'e <i> <j>' lines.

        Blank lines and '#' comments are ignored.
        """
        n = None
        edges = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise BadVertexError(f"line {lineno}: cannot parse {raw!r}")
        if n is None:
            raise BadVertexError("graph text is missing the 'n <count>' line")
        return cls(n, edges)

    def to_text(self) -> str:
        lines = [f"n {self.n}"]
        lines += [f"e {i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"


def _check_word(g: SimplicialGraph, w) -> tuple:
    w = tuple(int(v) for v in w)
    for v in w:
        if not (0 <= v < g.n):
            raise BadVertexError(f"letter {v} outside 0..{g.n - 1}")
    return w


def word_from_text(text: str) -> tuple:
    """Parse a comma-separated vertex word; '' is the empty word."""
    text = text.strip()
    if not text:
        return ()
    return tuple(int(t) for t in text.split(","))


def word_to_text(w) -> str:
    return ",".join(str(v) for v in w)


# ---------------------------------------------------------------------------
# reduction and normal forms
# ---------------------------------------------------------------------------


def is_reduced(g: SimplicialGraph, w) -> bool:
    """True iff equal letters are always separated by a non-neighbor.

    Scans each position backwards, tracking whether every letter seen so far
    is adjacent to the reference letter; a matching earlier letter found while
    that is still true means the pair could merge.
    """
    w = _check_word(g, w)
    for l in range(len(w)):
        v = w[l]
        all_adj = True
        for k in range(l - 1, -1, -1):
            if w[k] == v:
                if all_adj:
                    return False
                break  # any earlier equal letter is separated by this blocker too
            all_adj = all_adj and g.adjacent(w[k], v)
            if not all_adj:
                break
    return True


def find_merge_pair(g: SimplicialGraph, letters, key=None):
    """Leftmost pair (k, l) of equal letters with all between them adjacent.

    `letters` may be a vertex tuple or a sequence of richer objects; `key`
    extracts the vertex.  Returns None when the word is reduced.
    """
    if key is None:
        key = lambda x: x
    n = len(letters)
    for k in range(n):
        v = key(letters[k])
        all_adj = True
        for l in range(k + 1, n):
            u = key(letters[l])
            if u == v and all_adj:
                return (k, l)
            all_adj = all_adj and g.adjacent(u, v)
            if not all_adj:
                break
    return None


def reduce_word(g: SimplicialGraph, w) -> tuple:
    """Reduce a word: repeatedly merge the leftmost mergeable equal pair.

    Merging keeps the later occurrence in place and drops the earlier one
    (the earlier letter is walked right across the intermediate letters, all
    adjacent to it, until the two copies are adjacent and collapse).  The
    result is reduced and equivalent to the input; its length is the common
    length of all reduced representatives.
    """
    w = list(_check_word(g, w))
    while True:
        pair = find_merge_pair(g, w)
        if pair is None:
            return tuple(w)
        k, _ = pair
        del w[k]


def equivalence_class(g: SimplicialGraph, w, cap: int = DEFAULT_CLASS_CAP) -> frozenset:
    """All reduced representatives of w's class, by BFS over edge swaps.

    The input must be reduced.  Raises CapExceededError when the class grows
    past `cap`.
    """
    w = _check_word(g, w)
    if not is_reduced(g, w):
        raise BadVertexError("equivalence_class expects a reduced word")
    return _class_cached(g, w, cap)


@lru_cache(maxsize=None)
def _class_cached(g: SimplicialGraph, w: tuple, cap: int) -> frozenset:
    seen = {w}
    frontier = [w]
    while frontier:
        nxt = []
        for word in frontier:
            for i in range(len(word) - 1):
                if g.adjacent(word[i], word[i + 1]):
                    swapped = word[:i] + (word[i + 1], word[i]) + word[i + 2 :]
                    if swapped not in seen:
                        seen.add(swapped)
                        nxt.append(swapped)
                        if len(seen) > cap:
                            raise CapExceededError(
                                f"equivalence class exceeds cap {cap}"
                            )
        frontier = nxt
    return frozenset(seen)


def normal_form_with_perm(g: SimplicialGraph, w) -> tuple:
    """Normal form of a reduced word plus the positions it pulled from.

    Returns (nf, perm) where nf[i] == w[perm[i]].  The normal form is the
    lexicographically least member of the class, computed greedily: among the
    letters that can move to the front (all earlier letters adjacent), the
    smallest vertex is pulled out, repeatedly.  In a reduced word that
    smallest movable vertex occurs in exactly one movable position, so the
    permutation is well-defined; it is also the unique order-preserving one
    on equal letters.
    """
    w = tuple(w)
    remaining = list(range(len(w)))
    out = []
    perm = []
    while remaining:
        best = None
        for pos_idx, i in enumerate(remaining):
            ok = True
            for j in remaining[:pos_idx]:
                if not g.adjacent(w[j], w[i]):
                    ok = False
                    break
            if ok and (best is None or w[i] < w[remaining[best]]):
                best = pos_idx
        i = remaining.pop(best)
        out.append(w[i])
        perm.append(i)
    return tuple(out), tuple(perm)


def normal_form(g: SimplicialGraph, w) -> tuple:
    """Canonical representative: reduce, then take the lex-least class member."""
    r = reduce_word(g, w)
    return _nf_cached(g, r)


@lru_cache(maxsize=None)
def _nf_cached(g: SimplicialGraph, r: tuple) -> tuple:
    nf, _ = normal_form_with_perm(g, r)
    return nf


# ---------------------------------------------------------------------------
# non-commutative length
# ---------------------------------------------------------------------------


def nc_length(g: SimplicialGraph, w, v0: int) -> int:
    """Right-hand non-commutative length of a reduced word w.r.t. v0.

    -1 when no representative of w ends in v0.  Otherwise the number of
    letters, other than the terminal v0, not adjacent to v0; this counts
    repeated occurrences of v0 itself, and is independent of the chosen
    representative because it only depends on the letter multiset.

    Only the last occurrence of v0 can be moved to the right end (an earlier
    occurrence would have to cross the later one, and a vertex is never
    adjacent to itself), so the test is: does the last occurrence commute
    past everything to its right?
    """
    w = _check_word(g, w)
    if not (0 <= v0 < g.n):
        raise BadVertexError(f"vertex {v0} outside 0..{g.n - 1}")
    last = None
    for i, v in enumerate(w):
        if v == v0:
            last = i
    if last is None:
        return -1
    for i in range(last + 1, len(w)):
        if not g.adjacent(w[i], v0):
            return -1
    return sum(1 for i, v in enumerate(w) if i != last and not g.adjacent(v, v0))


def nc_length_set(g: SimplicialGraph, words, v0: int) -> int:
    """max over the set; -1 on an empty set or when nothing ends in v0."""
    best = -1
    for w in words:
        best = max(best, nc_length(g, w, v0))
    return best


# ---------------------------------------------------------------------------
# truncations, the partial order, complete sets
# ---------------------------------------------------------------------------


def _movable_positions(g: SimplicialGraph, w):
    """(left_movable, right_movable) position lists of a reduced word."""
    left, right = [], []
    n = len(w)
    for i in range(n):
        if all(g.adjacent(w[j], w[i]) for j in range(i)):
            left.append(i)
        if all(g.adjacent(w[j], w[i]) for j in range(i + 1, n)):
            right.append(i)
    return left, right


def truncations(g: SimplicialGraph, w) -> frozenset:
    """One-step truncations: delete any letter movable to an end, normalize.

    A letter that commutes with everything before it can be the first letter
    of some representative, so deleting it is a left truncation; dually on
    the right.  Results are normal forms.
    """
    w = _check_word(g, w)
    if not is_reduced(g, w):
        raise BadVertexError("truncations expects a reduced word")
    return _truncations_cached(g, w)


@lru_cache(maxsize=None)
def _truncations_cached(g: SimplicialGraph, w: tuple) -> frozenset:
    left, right = _movable_positions(g, w)
    out = set()
    for i in set(left) | set(right):
        out.add(normal_form(g, w[:i] + w[i + 1 :]))
    return frozenset(out)


def complete_closure(g: SimplicialGraph, words) -> frozenset:
    """Smallest complete set containing the given words.

    Inputs are reduced and normalized first; the closure is the downward
    closure under truncations plus the empty word.  Idempotent.
    """
    closed = {()}
    frontier = []
    for w in words:
        nf = normal_form(g, w)
        if nf not in closed:
            closed.add(nf)
            frontier.append(nf)
    while frontier:
        w = frontier.pop()
        for t in _truncations_cached(g, w):
            if t not in closed:
                closed.add(t)
                frontier.append(t)
    return frozenset(closed)


def is_complete(g: SimplicialGraph, words) -> bool:
    """Check the complete-set predicate on a set of normal-form words."""
    ws = set(words)
    if () not in ws:
        return False
    for w in ws:
        if normal_form(g, w) != w:
            return False
        if not _truncations_cached(g, w) <= ws:
            return False
    return True


def down_set(g: SimplicialGraph, w) -> frozenset:
    """The truncation down-set {x : x <= w}, i.e. the closure of a singleton."""
    return complete_closure(g, [w])


# ---------------------------------------------------------------------------
# standard form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StdForm:
    """The factorization w ~ y . c . (v0) . b extremizing nc-length.

    b is shortest such that y.c.(v0) still realizes the maximal
    non-commutative length of the down-set of w; among those, y is the
    shortest prefix with y.(v0) below w at that same nc-length.  All three
    parts are normal-form words; uniqueness is a theorem that the
    construction asserts (NonUniqueError must never fire).
    """

    y: tuple
    c: tuple
    b: tuple
    v0: int

    def concat(self) -> tuple:
        return self.y + self.c + (self.v0,) + self.b


def standard_form(
    g: SimplicialGraph, w, v0: int, cap: int = DEFAULT_CLASS_CAP
) -> StdForm:
    """Compute the standard form of a reduced word w containing v0.

    Brute force over the equivalence class and the truncation down-set:

    1. M = maximal nc-length over the down-set of w.
    2. Among splits r = u | b of class representatives with u ending in v0
       and nc-length(u) = M, take the longest u (shortest b); its class and
       b's class must be unique.
    3. Among words y with y.(v0) in the down-set at nc-length M, take the
       shortest; it must be unique and must divide u-without-its-final-v0 on
       the left, which yields c.
    """
    w = _check_word(g, w)
    if not is_reduced(g, w):
        raise BadVertexError("standard_form expects a reduced word")
    if v0 not in w:
        raise VertexAbsentError(f"vertex {v0} does not occur in {w}")

    cls = equivalence_class(g, w, cap)
    down = down_set(g, w)
    big_m = nc_length_set(g, down, v0)

    # step 2: longest u = y.c.(v0) with nc-length M, from splits of the class
    best_k = -1
    finalists = set()
    for r in cls:
        for k in range(1, len(r) + 1):
            if r[k - 1] != v0:
                continue
            u = r[:k]
            if nc_length(g, u, v0) != big_m:
                continue
            if k > best_k:
                best_k = k
                finalists = set()
            if k == best_k:
                finalists.add((normal_form(g, u), normal_form(g, r[k:])))
    if len(finalists) != 1:
        raise NonUniqueError(
            f"{len(finalists)} maximal-length prefixes ending in {v0} for {w}"
        )
    ((u_nf, b_nf),) = finalists

    # strip the terminal v0 from u: all ways must agree on the remainder class
    p_candidates = {
        normal_form(g, r[:-1])
        for r in equivalence_class(g, u_nf, cap)
        if r[-1] == v0
    }
    if len(p_candidates) != 1:
        raise NonUniqueError(f"ambiguous removal of terminal {v0} from {u_nf}")
    (p_nf,) = p_candidates

    # step 3: globally shortest y with y.(v0) <= w at nc-length M
    y_best_len = None
    y_set = set()
    for u2 in down:
        if nc_length(g, u2, v0) != big_m:
            continue
        for r in equivalence_class(g, u2, cap):
            if r[-1] != v0:
                continue
            y = normal_form(g, r[:-1])
            if y_best_len is None or len(y) < y_best_len:
                y_best_len = len(y)
                y_set = {y}
            elif len(y) == y_best_len:
                y_set.add(y)
    if len(y_set) != 1:
        raise NonUniqueError(f"{len(y_set)} shortest prefixes y for {w} at v0={v0}")
    (y_nf,) = y_set

    # c: the left-quotient of p by y, found among class representatives of p
    ly = len(y_nf)
    c_candidates = set()
    for r in equivalence_class(g, p_nf, cap):
        if normal_form(g, r[:ly]) == y_nf:
            c_candidates.add(normal_form(g, r[ly:]))
    if len(c_candidates) != 1:
        raise NonUniqueError(
            f"y = {y_nf} does not uniquely divide {p_nf} on the left"
        )
    (c_nf,) = c_candidates

    form = StdForm(y=y_nf, c=c_nf, b=b_nf, v0=v0)
    if normal_form(g, form.concat()) != normal_form(g, w):
        raise NonUniqueError(f"standard form of {w} failed to recompose")
    return form


# ---------------------------------------------------------------------------
# enumeration helpers (shared by tests, suites, and the Fock basis)
# ---------------------------------------------------------------------------


def all_words(n_vertices: int, max_len: int):
    """Every vertex word of length <= max_len, shortest first."""
    for length in range(max_len + 1):
        yield from product(range(n_vertices), repeat=length)


def reduced_words(g: SimplicialGraph, max_len: int):
    """Every reduced word of length <= max_len, by DFS with pruning."""
    stack = [()]
    while stack:
        w = stack.pop()
        yield w
        if len(w) < max_len:
            for v in range(g.n - 1, -1, -1):
                nxt = w + (v,)
                if _tail_reduced(g, nxt):
                    stack.append(nxt)


def _tail_reduced(g: SimplicialGraph, w: tuple) -> bool:
    """Reducedness check for w given that w[:-1] is reduced."""
    v = w[-1]
    for k in range(len(w) - 2, -1, -1):
        if w[k] == v:
            return False
        if not g.adjacent(w[k], v):
            return True
    return True


def minimal_words(g: SimplicialGraph, max_len: int):
    """Normal-form representatives of every class of length <= max_len."""
    seen = set()
    for w in reduced_words(g, max_len):
        nf = normal_form(g, w)
        if nf not in seen:
            seen.add(nf)
            yield nf
