"""Graph products of finite groups and positive-definite functions.

Elements of the graph product of groups are words of (vertex, group element)
syllables in normal form: the vertex word is reduced and lexicographically
minimal, and no syllable carries the identity.  Multiplication concatenates
and then repeatedly merges same-vertex syllables brought together across
commuting letters, multiplying inside the vertex group and deleting
identities.  A complete graph therefore gives the direct product and an
edgeless graph the free product.

A positive-definite function on a vertex group maps group elements to D x D
matrices with f(e) = I and full translated Gram [f(g^{-1} h)] PSD; the graph
product of such functions (with commuting ranges across edges) evaluates a
normal form letterwise and is itself positive-definite, which check_gp_pd
samples on balls and random words.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import linalg
from .algebra import GroupAlgebraV, greedy_coloring
from .config import DEFAULT, Tolerances
from .errors import BadVertexError, SizeCapError, SpecInvalidError
from .words import SimplicialGraph, find_merge_pair, normal_form_with_perm

__all__ = [
    "FiniteGroup",
    "cyclic_group",
    "symmetric_group",
    "group_from_text",
    "GpGroupElement",
    "gp_group_identity",
    "gp_group_mul",
    "gp_group_inverse",
    "ball",
    "PdFunction",
    "random_pd",
    "gp_pd_eval",
    "check_gp_pd",
]


class FiniteGroup:
    """A finite group given by its Cayley table.

    The table, identity, and inverses are validated exhaustively on
    construction (associativity is O(n^3); orders here are tiny).
    """

    def __init__(self, cayley, name: str = "G"):
        t = np.asarray(cayley, dtype=int)
        n = t.shape[0]
        if t.shape != (n, n):
            raise BadVertexError("Cayley table must be square")
        self.cayley = t
        self.order = n
        self.name = name
        ident = None
        for e in range(n):
            if all(t[e, g] == g and t[g, e] == g for g in range(n)):
                ident = e
                break
        if ident is None:
            raise BadVertexError("table has no identity element")
        self.identity = ident
        inv = np.full(n, -1, dtype=int)
        for g in range(n):
            for h in range(n):
                if t[g, h] == ident and t[h, g] == ident:
                    inv[g] = h
                    break
            if inv[g] < 0:
                raise BadVertexError(f"element {g} has no inverse")
        self.inverse = inv
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    if t[t[a, b], c] != t[a, t[b, c]]:
                        raise BadVertexError("table is not associative")

    def mul(self, g: int, h: int) -> int:
        return int(self.cayley[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverse[g])

    def algebra(self) -> GroupAlgebraV:
        """The group algebra with its canonical trace."""
        return GroupAlgebraV(self.cayley, self.identity, self.inverse)

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and np.array_equal(
            self.cayley, other.cayley
        )

    def __hash__(self):
        return hash(self.cayley.tobytes())

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"


def cyclic_group(k: int) -> FiniteGroup:
    if k < 1:
        raise BadVertexError("cyclic order must be positive")
    table = [[(i + j) % k for j in range(k)] for i in range(k)]
    return FiniteGroup(table, name=f"Z{k}")


def symmetric_group(n: int) -> FiniteGroup:
    """S_n on tuples in lexicographic order (n <= 4 is plenty here)."""
    perms = sorted(permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [
        [index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms
    ]
    return FiniteGroup(table, name=f"S{n}")


def group_from_text(text: str) -> FiniteGroup:
    """Parse per-vertex group specs like 'cyclic:3' or 'sym:3'."""
    kind, _, arg = text.partition(":")
    if kind == "cyclic":
        return cyclic_group(int(arg))
    if kind == "sym":
        return symmetric_group(int(arg))
    raise BadVertexError(f"unknown group spec {text!r}")


# ---------------------------------------------------------------------------
# the graph product of groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GpGroupElement:
    """Normal-form word of (vertex, non-identity element index) syllables."""

    word: tuple

    def __len__(self):
        return len(self.word)


def gp_group_identity() -> GpGroupElement:
    return GpGroupElement(())


def _normalize_syllables(g: SimplicialGraph, groups, syl):
    """Merge and delete until reduced, then sort to the minimal word."""
    out = [s for s in syl if s[1] != groups[s[0]].identity]
    while True:
        pair = find_merge_pair(g, out, key=lambda s: s[0])
        if pair is None:
            break
        k, l = pair
        v = out[k][0]
        merged = groups[v].mul(out[k][1], out[l][1])
        del out[k]
        if merged == groups[v].identity:
            del out[l - 1]
        else:
            out[l - 1] = (v, merged)
    word = tuple(s[0] for s in out)
    _, perm = normal_form_with_perm(g, word)
    return GpGroupElement(tuple(out[i] for i in perm))


def gp_group_mul(
    g: SimplicialGraph, groups, a: GpGroupElement, b: GpGroupElement
) -> GpGroupElement:
    return _normalize_syllables(g, groups, list(a.word) + list(b.word))


def gp_group_inverse(g: SimplicialGraph, groups, a: GpGroupElement) -> GpGroupElement:
    syl = [(v, groups[v].inv(x)) for v, x in reversed(a.word)]
    return _normalize_syllables(g, groups, syl)


def ball(g: SimplicialGraph, groups, radius: int, cap: int = 20_000):
    """All elements of normal-form length <= radius, sorted deterministically.

    BFS by right multiplication with single nontrivial syllables; elements
    are deduplicated by their normal form.  Raises SizeCapError past cap.
    """
    if len(groups) != g.n:
        raise BadVertexError("need one group per vertex")
    gens = [
        GpGroupElement(((v, x),))
        for v in range(g.n)
        for x in range(groups[v].order)
        if x != groups[v].identity
    ]
    seen = {gp_group_identity().word: gp_group_identity()}
    frontier = [gp_group_identity()]
    for _ in range(radius):
        nxt = []
        for el in frontier:
            for s in gens:
                prod = gp_group_mul(g, groups, el, s)
                if len(prod.word) <= radius and prod.word not in seen:
                    seen[prod.word] = prod
                    nxt.append(prod)
                    if len(seen) > cap:
                        raise SizeCapError(f"ball exceeds cap {cap}")
        frontier = nxt
    return sorted(seen.values(), key=lambda e: (len(e.word), e.word))


def random_elements(g, groups, rng, count: int, max_len: int):
    """Seeded random normal-form elements (products of random syllables)."""
    out = []
    for _ in range(count):
        length = int(rng.integers(0, max_len + 1))
        syl = []
        for _ in range(length):
            v = int(rng.integers(0, g.n))
            choices = [x for x in range(groups[v].order) if x != groups[v].identity]
            if not choices:
                continue
            syl.append((v, int(rng.choice(choices))))
        out.append(_normalize_syllables(g, groups, syl))
    return out


# ---------------------------------------------------------------------------
# positive-definite functions
# ---------------------------------------------------------------------------


class PdFunction:
    """A matrix-valued positive-definite function on one vertex group.

    table[g] holds f(g); f(identity) must be the identity matrix and the
    full translated Gram [f(g^{-1} h)]_{g,h} must be PSD.
    """

    def __init__(self, group: FiniteGroup, table, tols: Tolerances = DEFAULT):
        self.group = group
        self.table = np.asarray(table, dtype=complex)
        self.dim = self.table.shape[1]
        if self.table.shape != (group.order, self.dim, self.dim):
            raise SpecInvalidError("table must be (order, D, D)")
        if np.linalg.norm(self.table[group.identity] - np.eye(self.dim)) > 1e-10:
            raise SpecInvalidError("f(identity) must be the identity matrix")
        verdict = self.full_gram_verdict(tols)
        if not verdict.passed:
            raise SpecInvalidError(
                f"translated Gram is not PSD (lambda_min {verdict.lambda_min:.2e})"
            )

    def __call__(self, x: int) -> np.ndarray:
        return self.table[x]

    def full_gram_verdict(self, tols: Tolerances = DEFAULT) -> linalg.PsdVerdict:
        n, d = self.group.order, self.dim
        gram_mat = np.zeros((n * d, n * d), dtype=complex)
        for i in range(n):
            for j in range(n):
                x = self.group.mul(self.group.inv(i), j)
                gram_mat[i * d : (i + 1) * d, j * d : (j + 1) * d] = self.table[x]
        return linalg.is_psd(gram_mat, tol=tols.psd_sqrt, tols=tols)


def random_pd(group: FiniteGroup, dim: int, seed, copies: int | None = None) -> PdFunction:
    """Seeded random pd function: f(g) = W* rho(g) W via the regular representation.

    rho is `copies` copies of the left-regular representation (enough to
    embed dimension `dim`), W a random isometry, so f(e) = I and the full
    translated Gram is PSD by construction.
    """
    n = group.order
    if copies is None:
        copies = max(1, -(-dim // n))
    big = n * copies
    if dim > big:
        raise SpecInvalidError("not enough representation space")
    rng = linalg.rng_from(seed)
    w = linalg.random_isometry(dim, big, rng)
    table = np.zeros((n, dim, dim), dtype=complex)
    for x in range(n):
        reg = np.zeros((n, n))
        for h in range(n):
            reg[group.mul(x, h), h] = 1.0
        rho = np.kron(np.eye(copies), reg)
        table[x] = w.conj().T @ rho @ w
    return PdFunction(group, table)


@dataclass
class PdFamily:
    """Per-vertex pd functions into one shared target, commuting across edges.

    Matrix-valued functions act on color legs of a tensor target (mirroring
    the product-map construction); scalar-valued families need no legs at
    all since scalars always commute.
    """

    graph: SimplicialGraph
    groups: list
    functions: list  # per-vertex PdFunction
    colors: list
    block_dims: list

    @property
    def target_dim(self) -> int:
        out = 1
        for b in self.block_dims:
            out *= b
        return out

    def image(self, v: int, x: int) -> np.ndarray:
        blk = self.functions[v](x)
        pre = 1
        for b in self.block_dims[: self.colors[v]]:
            pre *= b
        post = self.target_dim // (pre * self.block_dims[self.colors[v]])
        out = blk
        if pre > 1:
            out = np.kron(np.eye(pre), out)
        if post > 1:
            out = np.kron(out, np.eye(post))
        return out

    def commutation_residual(self) -> float:
        worst = 0.0
        for u, v in self.graph.edges:
            for x in range(self.groups[u].order):
                iu = self.image(u, x)
                for y in range(self.groups[v].order):
                    iv = self.image(v, y)
                    worst = max(worst, float(np.linalg.norm(iu @ iv - iv @ iu)))
        return worst


def random_pd_family(
    graph: SimplicialGraph, groups, dim: int, seed, tols: Tolerances = DEFAULT
) -> PdFamily:
    """Seeded commuting-ranges family: one block per color, one pd per vertex."""
    rng = linalg.rng_from(seed)
    colors = greedy_coloring(graph)
    n_colors = (max(colors) + 1) if colors else 0
    if dim == 1:
        block_dims = [1] * n_colors
    else:
        block_dims = [dim] * n_colors
    functions = [random_pd(groups[v], dim, rng) for v in range(graph.n)]
    fam = PdFamily(
        graph=graph, groups=groups, functions=functions, colors=colors,
        block_dims=block_dims,
    )
    res = fam.commutation_residual()
    if res > tols.commute:
        raise SpecInvalidError(f"ranges do not commute ({res:.2e})")
    return fam


def gp_pd_eval(fam: PdFamily, el: GpGroupElement) -> np.ndarray:
    """Evaluate the graph product function on a normal-form element."""
    out = np.eye(fam.target_dim, dtype=complex)
    for v, x in el.word:
        out = out @ fam.image(v, x)
    return out


def check_gp_pd(fam: PdFamily, sample, tols: Tolerances = DEFAULT) -> dict:
    """PSD of the sampled translated Gram [F(g_i^{-1} g_j)]."""
    n = len(sample)
    d = fam.target_dim
    gram_mat = np.zeros((n * d, n * d), dtype=complex)
    for i, gi in enumerate(sample):
        inv_i = gp_group_inverse(fam.graph, fam.groups, gi)
        for j, gj in enumerate(sample):
            x = gp_group_mul(fam.graph, fam.groups, inv_i, gj)
            gram_mat[i * d : (i + 1) * d, j * d : (j + 1) * d] = gp_pd_eval(fam, x)
    verdict = linalg.is_psd(gram_mat, tol=tols.gram_psd, tols=tols)
    return {
        "passed": verdict.passed,
        "lambda_min": verdict.lambda_min,
        "lambda_max": verdict.lambda_max,
        "n_sample": n,
    }
