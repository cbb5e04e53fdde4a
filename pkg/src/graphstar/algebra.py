"""Concrete vertex algebras, formal graph-product elements, and product maps.

Three kinds of vertex algebra are supported, each with a distinguished state:

* full matrix algebras with a density-matrix state,
* group algebras of a finite group with the canonical trace (coefficient of
  the identity), and
* a banded Laurent-monomial algebra (polynomials in x, x^{-1} with degree
  capped at +-band) with the canonical trace c_0.  Products that leave the
  band raise; they are never wrapped around.

A GpElement is a formal linear combination of reduced operator words over a
graph of such algebras: a complex multiple of the unit plus elementary
tensors (minimal vertex word, one state-centered letter per position, scalar
coefficient).  Multiplication concatenates words and then repeatedly merges
equal-vertex letters that meet across commuting letters, splitting each merge
into its centered part and a scalar via a = (a - state(a)) + state(a) * 1.
The unit coefficient of a canonical element is the graph product state: it
vanishes on every nontrivial reduced word, which is the graph-independence
property of the construction.

A ThetaSpec assigns each vertex a unital completely positive map into one
shared matrix target with edge-commuting ranges; theta_eval applies the
product map, sending a reduced word to the ordered product of its letters'
images.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .config import DEFAULT, Tolerances
from .errors import (
    AlgebraMismatchError,
    BandExceededError,
    CapExceededError,
    IncompatibleStatesError,
    SpecInvalidError,
)
from .serialize import carray_from_json, carray_to_json
from .words import SimplicialGraph, find_merge_pair, normal_form_with_perm

__all__ = [
    "MatrixAlgebra",
    "GroupAlgebraV",
    "LaurentAlgebra",
    "center",
    "GraphAlgebra",
    "Term",
    "GpElement",
    "gp_word",
    "gp_unit",
    "gp_mul",
    "gp_adjoint",
    "vacuum_state",
    "expand",
    "gp_allclose",
    "greedy_coloring",
    "VertexSite",
    "StinespringMap",
    "PowersMap",
    "TableMap",
    "ThetaSpec",
    "theta_eval",
    "random_theta",
    "random_choda_maps",
    "choda_check",
]

_CENTER_EPS = 1e-14   # |state(a)| below this (relative) counts as centered
_DROP_EPS = 1e-14     # letters / coefficients below this (relative) are dropped
_MERGE_CAP = 4096     # max expansion size when merging colliding terms


# ---------------------------------------------------------------------------
# vertex algebras
# ---------------------------------------------------------------------------


class MatrixAlgebra:
    """M_d with the state a -> tr(rho a) for a fixed density matrix rho."""

    kind = "matrix"

    def __init__(self, dim: int, rho=None):
        self.dim_space = dim
        if rho is None:
            rho = np.eye(dim) / dim
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (dim, dim):
            raise AlgebraMismatchError("state has the wrong shape")
        if abs(np.trace(rho) - 1.0) > 1e-10 or linalg.herm_residual(rho) > 1e-10:
            raise AlgebraMismatchError("state must be a trace-one Hermitian matrix")
        if linalg.herm_eig(rho).eigenvalues[0] < -1e-12:
            raise AlgebraMismatchError("state must be positive semidefinite")
        self.rho = 0.5 * (rho + rho.conj().T)
        self.dim = dim * dim
        self._state_vec = self.rho.T.reshape(-1)
        self._centered_basis = self._build_centered_basis()

    def _build_centered_basis(self):
        # HS-orthonormal basis of ker(state): complete conj(state_vec) to an
        # orthonormal basis and drop its first column.
        d2 = self.dim
        w = self._state_vec.conj()
        w = w / np.linalg.norm(w)
        cols = [w]
        for k in range(d2):
            e = np.zeros(d2, dtype=complex)
            e[k] = 1.0
            for c in cols:
                e = e - c * (c.conj() @ e)
            nrm = np.linalg.norm(e)
            if nrm > 1e-8:
                cols.append(e / nrm)
            if len(cols) == d2:
                break
        return np.array(cols[1:]).T  # (d^2, d^2-1)

    def unit(self):
        return np.eye(self.dim_space, dtype=complex)

    def mul(self, a, b):
        return a @ b

    def adjoint(self, a):
        return a.conj().T

    def state(self, a) -> complex:
        return complex(a.reshape(-1) @ self._state_vec)

    def norm(self, a) -> float:
        return linalg.op_norm(a)

    def hs_basis(self):
        d = self.dim_space
        out = []
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1.0
                out.append(e)
        return out

    def centered_dim(self) -> int:
        return self._centered_basis.shape[1]

    def centered_coords(self, a) -> np.ndarray:
        return self._centered_basis.conj().T @ a.reshape(-1)

    def centered_from_coords(self, coords) -> np.ndarray:
        d = self.dim_space
        return (self._centered_basis @ coords).reshape(d, d)

    def random_element(self, rng):
        d = self.dim_space
        return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))

    def random_centered(self, rng, unit_norm: bool = True):
        for _ in range(100):
            a = self.random_element(rng)
            a = a - self.state(a) * self.unit()
            n = self.norm(a)
            if n > 1e-8:
                return a / n if unit_norm else a
        raise AlgebraMismatchError("could not draw a nonzero centered element")

    def __eq__(self, other):
        return (
            isinstance(other, MatrixAlgebra)
            and self.dim_space == other.dim_space
            and np.array_equal(self.rho, other.rho)
        )

    def __hash__(self):
        return hash(("matrix", self.dim_space, self.rho.tobytes()))

    def to_json_dict(self):
        return {"kind": "matrix", "dim": self.dim_space, "state": carray_to_json(self.rho)}


class GroupAlgebraV:
    """Group algebra of a finite group with the canonical trace.

    Elements are coefficient vectors indexed by the group's element order.
    The Cayley table, identity index, and inverse table come from the caller
    (see graphstar.groups.FiniteGroup.algebra()).
    """

    kind = "group"

    def __init__(self, cayley, identity: int, inverse):
        self.cayley = np.asarray(cayley, dtype=int)
        self.identity = int(identity)
        self.inverse = np.asarray(inverse, dtype=int)
        self.order = self.cayley.shape[0]
        self.dim = self.order

    def unit(self):
        e = np.zeros(self.order, dtype=complex)
        e[self.identity] = 1.0
        return e

    def mul(self, a, b):
        out = np.zeros(self.order, dtype=complex)
        for g in range(self.order):
            if a[g] != 0:
                out[self.cayley[g]] += a[g] * b
        return out

    def adjoint(self, a):
        out = np.empty(self.order, dtype=complex)
        out[self.inverse] = a.conj()
        return out

    def state(self, a) -> complex:
        return complex(a[self.identity])

    def left_action(self, a) -> np.ndarray:
        """Matrix of left multiplication on the group algebra (faithful)."""
        m = np.zeros((self.order, self.order), dtype=complex)
        for g in range(self.order):
            if a[g] != 0:
                m[self.cayley[g], np.arange(self.order)] += a[g]
        return m

    def norm(self, a) -> float:
        return linalg.op_norm(self.left_action(a))

    def hs_basis(self):
        return [self._delta(g) for g in range(self.order)]

    def _delta(self, g):
        e = np.zeros(self.order, dtype=complex)
        e[g] = 1.0
        return e

    def centered_dim(self) -> int:
        return self.order - 1

    def centered_coords(self, a) -> np.ndarray:
        return np.array([a[g] for g in range(self.order) if g != self.identity])

    def random_element(self, rng):
        return rng.standard_normal(self.order) + 1j * rng.standard_normal(self.order)

    def random_centered(self, rng, unit_norm: bool = True):
        a = self.random_element(rng)
        a[self.identity] = 0.0
        n = self.norm(a)
        return a / n if unit_norm and n > 1e-8 else a

    def __eq__(self, other):
        return (
            isinstance(other, GroupAlgebraV)
            and self.identity == other.identity
            and np.array_equal(self.cayley, other.cayley)
        )

    def __hash__(self):
        return hash(("group", self.identity, self.cayley.tobytes()))

    def to_json_dict(self):
        return {
            "kind": "group",
            "cayley": self.cayley.tolist(),
            "identity": self.identity,
            "inverse": self.inverse.tolist(),
        }


class LaurentAlgebra:
    """Laurent polynomials in one unitary generator, banded at +-band.

    Coefficient index m + band holds the degree-m coefficient.  The state is
    the canonical trace c_0.  Products whose support would leave the band
    raise BandExceededError; wrapping would silently change the algebra.
    """

    kind = "laurent"

    def __init__(self, band: int = 6):
        if band < 1:
            raise AlgebraMismatchError("band must be at least 1")
        self.band = band
        self.dim = 2 * band + 1

    def unit(self):
        e = np.zeros(self.dim, dtype=complex)
        e[self.band] = 1.0
        return e

    def monomial(self, m: int, coeff: complex = 1.0):
        if abs(m) > self.band:
            raise BandExceededError(f"degree {m} outside band {self.band}")
        e = np.zeros(self.dim, dtype=complex)
        e[m + self.band] = coeff
        return e

    def mul(self, a, b):
        conv = np.convolve(a, b)
        n = self.band
        head, mid, tail = conv[: n], conv[n : 3 * n + 1], conv[3 * n + 1 :]
        if np.any(head != 0) or np.any(tail != 0):
            raise BandExceededError(
                f"product support leaves the degree band +-{self.band}"
            )
        return mid

    def adjoint(self, a):
        return a[::-1].conj()

    def state(self, a) -> complex:
        return complex(a[self.band])

    def norm(self, a, grid: int = 4096) -> float:
        """Sup of |p(z)| over the unit circle, on a fine grid.

        This is the exact norm for monomials; for general elements it is a
        grid surrogate (a lower bound within O(band^2/grid)).
        """
        theta = 2.0 * np.pi * np.arange(grid) / grid
        degrees = np.arange(-self.band, self.band + 1)
        vals = np.exp(1j * np.outer(theta, degrees)) @ a
        return float(np.max(np.abs(vals)))

    def hs_basis(self):
        return [self.monomial(m) for m in range(-self.band, self.band + 1)]

    def centered_dim(self) -> int:
        return self.dim - 1

    def centered_coords(self, a) -> np.ndarray:
        return np.concatenate([a[: self.band], a[self.band + 1 :]])

    def random_element(self, rng):
        return rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)

    def random_centered(self, rng, unit_norm: bool = True):
        a = self.random_element(rng)
        a[self.band] = 0.0
        n = self.norm(a)
        return a / n if unit_norm and n > 1e-8 else a

    def __eq__(self, other):
        return isinstance(other, LaurentAlgebra) and self.band == other.band

    def __hash__(self):
        return hash(("laurent", self.band))

    def to_json_dict(self):
        return {"kind": "laurent", "band": self.band}


def algebra_from_json(d):
    if d["kind"] == "matrix":
        return MatrixAlgebra(d["dim"], carray_from_json(d["state"]))
    if d["kind"] == "group":
        return GroupAlgebraV(np.array(d["cayley"]), d["identity"], np.array(d["inverse"]))
    if d["kind"] == "laurent":
        return LaurentAlgebra(d["band"])
    raise AlgebraMismatchError(f"unknown algebra kind {d['kind']!r}")


def center(algebra, a):
    """Split a = centered + scalar * unit with state(centered) = 0."""
    s = algebra.state(a)
    return a - s * algebra.unit(), s


# ---------------------------------------------------------------------------
# the formal graph product
# ---------------------------------------------------------------------------


class GraphAlgebra:
    """A graph together with one vertex algebra (and state) per vertex."""

    def __init__(self, graph: SimplicialGraph, algebras):
        algebras = tuple(algebras)
        if len(algebras) != graph.n:
            raise AlgebraMismatchError(
                f"{graph.n} vertices but {len(algebras)} algebras"
            )
        self.graph = graph
        self.algebras = algebras

    def __eq__(self, other):
        return (
            isinstance(other, GraphAlgebra)
            and self.graph == other.graph
            and self.algebras == other.algebras
        )

    def __hash__(self):
        return hash((self.graph, self.algebras))

    def to_json_dict(self):
        return {
            "graph": {"n": self.graph.n, "edges": [list(e) for e in self.graph.edges]},
            "algebras": [a.to_json_dict() for a in self.algebras],
        }

    @classmethod
    def from_json_dict(cls, d):
        g = SimplicialGraph(d["graph"]["n"], [tuple(e) for e in d["graph"]["edges"]])
        return cls(g, [algebra_from_json(a) for a in d["algebras"]])


@dataclass(frozen=True, eq=False)
class Term:
    """One elementary tensor: a minimal word, centered letters, a coefficient."""

    word: tuple
    letters: tuple
    coeff: complex


class GpElement:
    """Formal element of the graph product: unit coefficient plus terms.

    Canonical form is maintained by construction: every term's word is
    reduced and minimal, every letter is centered for its vertex state, and
    colliding terms over one word are merged by expanding their letters over
    fixed centered bases (skipped above a size cap; evaluation never depends
    on the merge).
    """

    __slots__ = ("ctx", "unit", "terms")

    def __init__(self, ctx: GraphAlgebra, unit: complex = 0.0, terms=()):
        self.ctx = ctx
        self.unit = complex(unit)
        self.terms = tuple(terms)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def one(ctx: GraphAlgebra) -> "GpElement":
        return GpElement(ctx, 1.0)

    @staticmethod
    def zero(ctx: GraphAlgebra) -> "GpElement":
        return GpElement(ctx, 0.0)

    @staticmethod
    def from_letters(ctx: GraphAlgebra, letters, coeff: complex = 1.0) -> "GpElement":
        """Canonical element for a raw product of per-vertex algebra elements.

        `letters` is a sequence of (vertex, element); elements need not be
        centered and the vertex word need not be reduced.
        """
        unit, terms = _canonicalize(ctx, [(list(letters), complex(coeff))])
        return GpElement(ctx, unit, terms)

    # -- arithmetic ----------------------------------------------------------

    def _require_same_ctx(self, other):
        if self.ctx != other.ctx:
            raise AlgebraMismatchError("elements live over different graph algebras")

    def __add__(self, other):
        if not isinstance(other, GpElement):
            return NotImplemented
        self._require_same_ctx(other)
        unit, terms = _canonicalize(
            self.ctx,
            [( [(v, m) for v, m in zip(t.word, t.letters)], t.coeff)
             for t in self.terms + other.terms],
        )
        return GpElement(self.ctx, unit + self.unit + other.unit, terms)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        s = complex(scalar)
        return GpElement(
            self.ctx,
            s * self.unit,
            tuple(Term(t.word, t.letters, s * t.coeff) for t in self.terms),
        )

    def __mul__(self, other):
        if isinstance(other, GpElement):
            return gp_mul(self, other)
        return complex(other) * self

    def adjoint(self) -> "GpElement":
        return gp_adjoint(self)

    def n_terms(self) -> int:
        return len(self.terms)

    def __repr__(self):
        return f"GpElement(unit={self.unit:.4g}, terms={len(self.terms)})"


def gp_unit(ctx: GraphAlgebra) -> GpElement:
    return GpElement.one(ctx)


def gp_word(ctx: GraphAlgebra, letters, coeff: complex = 1.0) -> GpElement:
    return GpElement.from_letters(ctx, letters, coeff)


def _canonicalize(ctx: GraphAlgebra, raw_terms):
    """Reduce raw (letters, coeff) pairs to canonical unit + Term tuple.

    Each work item is a list of (vertex, element) pairs with a coefficient.
    Non-centered letters are split into centered + scalar branches; mergeable
    equal-vertex pairs are multiplied (the product letter then re-enters the
    centering split).  Finished words are put in normal form with the letters
    carried along the permutation.
    """
    g = ctx.graph
    algebras = ctx.algebras
    unit = 0.0 + 0.0j
    done = []
    work = [(list(letters), complex(coeff)) for letters, coeff in raw_terms]
    while work:
        letters, coeff = work.pop()
        if coeff == 0:
            continue
        # split the first non-centered letter
        split = False
        for idx, (v, a) in enumerate(letters):
            alg = algebras[v]
            s = alg.state(a)
            scale = 1.0 + alg.norm(a)
            if abs(s) > _CENTER_EPS * scale:
                centered = a - s * alg.unit()
                rest = letters[:idx] + letters[idx + 1 :]
                work.append((rest, coeff * s))
                if alg.norm(centered) > _DROP_EPS * scale:
                    work.append(
                        (letters[:idx] + [(v, centered)] + letters[idx + 1 :], coeff)
                    )
                split = True
                break
        if split:
            continue
        if not letters:
            unit += coeff
            continue
        # merge one mergeable pair, if any
        pair = find_merge_pair(g, letters, key=lambda vl: vl[0])
        if pair is not None:
            k, l = pair
            v = letters[k][0]
            merged = algebras[v].mul(letters[k][1], letters[l][1])
            nxt = letters[:k] + letters[k + 1 :]
            nxt[l - 1] = (v, merged)
            work.append((nxt, coeff))
            continue
        # reduced and centered: normalize the word, letters along for the ride
        word = tuple(v for v, _ in letters)
        nf, perm = normal_form_with_perm(g, word)
        done.append(Term(nf, tuple(letters[i][1] for i in perm), coeff))
    return unit, _merge_collisions(ctx, done)


def _merge_collisions(ctx: GraphAlgebra, terms):
    """Merge terms sharing a word by expansion over centered bases.

    Groups whose estimated expansion exceeds _MERGE_CAP are kept as-is; the
    representation is still exact, only less merged.  Merged groups come back
    as basis elementary tensors, one per surviving multi-index.
    """
    groups = {}
    for t in terms:
        groups.setdefault(t.word, []).append(t)
    out = []
    for word in sorted(groups, key=lambda w: (len(w), w)):
        group = groups[word]
        if len(group) == 1:
            out.extend(group)
            continue
        algs = [ctx.algebras[v] for v in word]
        est = 0
        for t in group:
            size = 1
            for alg, letter in zip(algs, t.letters):
                size *= int(np.count_nonzero(np.abs(alg.centered_coords(letter)) > 1e-16))
            est += size
        if est > _MERGE_CAP:
            out.extend(group)
            continue
        sparse = {}
        for t in group:
            coords = [alg.centered_coords(letter) for alg, letter in zip(algs, t.letters)]
            _expand_into(sparse, coords, t.coeff)
        scale = max((abs(c) for c in sparse.values()), default=0.0)
        basis_elems = [_centered_basis_elements(alg) for alg in algs]
        for midx in sorted(sparse):
            c = sparse[midx]
            if abs(c) <= _DROP_EPS * (1.0 + scale):
                continue
            letters = tuple(basis_elems[pos][k] for pos, k in enumerate(midx))
            out.append(Term(word, letters, c))
    return tuple(out)


_BASIS_CACHE = {}


def _centered_basis_elements(alg):
    key = alg
    if key not in _BASIS_CACHE:
        if alg.kind == "matrix":
            elems = [
                alg.centered_from_coords(_unit_vec(alg.centered_dim(), k))
                for k in range(alg.centered_dim())
            ]
        elif alg.kind == "group":
            elems = [b for g, b in enumerate(alg.hs_basis()) if g != alg.identity]
        else:  # laurent
            elems = [alg.monomial(m) for m in range(-alg.band, alg.band + 1) if m != 0]
        _BASIS_CACHE[key] = elems
    return _BASIS_CACHE[key]


def _unit_vec(n, k):
    e = np.zeros(n, dtype=complex)
    e[k] = 1.0
    return e


def _expand_into(sparse, coords, coeff):
    """Accumulate coeff * (outer product of coordinate vectors) into a dict."""
    stack = [((), coeff)]
    for c in coords:
        nxt = []
        nz = np.nonzero(np.abs(c) > 1e-16)[0]
        for prefix, w in stack:
            for k in nz:
                nxt.append((prefix + (int(k),), w * c[k]))
        stack = nxt
    for midx, w in stack:
        sparse[midx] = sparse.get(midx, 0.0) + w


def gp_mul(e1: GpElement, e2: GpElement) -> GpElement:
    """Bilinear product in the formal graph product algebra."""
    if not isinstance(e1, GpElement) or not isinstance(e2, GpElement):
        raise AlgebraMismatchError("gp_mul expects two GpElements")
    e1._require_same_ctx(e2)
    ctx = e1.ctx
    raw = []
    for t1 in e1.terms:
        l1 = list(zip(t1.word, t1.letters))
        for t2 in e2.terms:
            raw.append((l1 + list(zip(t2.word, t2.letters)), t1.coeff * t2.coeff))
        if e2.unit != 0:
            raw.append((list(l1), t1.coeff * e2.unit))
    if e1.unit != 0:
        for t2 in e2.terms:
            raw.append((list(zip(t2.word, t2.letters)), e1.unit * t2.coeff))
    unit, terms = _canonicalize(ctx, raw)
    return GpElement(ctx, unit + e1.unit * e2.unit, terms)


def gp_adjoint(e: GpElement) -> GpElement:
    """The involution: reverses each word and adjoints each letter."""
    raw = []
    for t in e.terms:
        letters = [
            (v, e.ctx.algebras[v].adjoint(a))
            for v, a in zip(t.word[::-1], t.letters[::-1])
        ]
        raw.append((letters, np.conj(t.coeff)))
    unit, terms = _canonicalize(e.ctx, raw)
    return GpElement(e.ctx, unit + np.conj(e.unit), terms)


def vacuum_state(e: GpElement) -> complex:
    """The graph product state: the unit coefficient of a canonical element."""
    return e.unit


def expand(e: GpElement, cap: int = 200_000) -> dict:
    """Coordinates of e over the centered product bases.

    Returns a dict mapping (word, multi_index) to a complex coefficient, with
    the unit under the key ((), ()).  Intended for equality testing in tests
    and small examples; raises CapExceededError when the expansion would be
    larger than cap.
    """
    out = {((), ()): complex(e.unit)}
    total = 0
    for t in e.terms:
        algs = [e.ctx.algebras[v] for v in t.word]
        coords = [alg.centered_coords(a) for alg, a in zip(algs, t.letters)]
        size = 1
        for c in coords:
            size *= max(1, int(np.count_nonzero(np.abs(c) > 1e-16)))
        total += size
        if total > cap:
            raise CapExceededError(f"expansion exceeds cap {cap}")
        sparse = {}
        _expand_into(sparse, coords, t.coeff)
        for midx, w in sparse.items():
            key = (t.word, midx)
            out[key] = out.get(key, 0.0) + w
    return out


def gp_allclose(e1: GpElement, e2: GpElement, tol: float = 1e-10) -> bool:
    """Compare two elements coordinatewise, relative to their total weight."""
    x1, x2 = expand(e1), expand(e2)
    scale = 1.0 + max(
        max((abs(v) for v in x1.values()), default=0.0),
        max((abs(v) for v in x2.values()), default=0.0),
    )
    for key in x1.keys() | x2.keys():
        if abs(x1.get(key, 0.0) - x2.get(key, 0.0)) > tol * scale:
            return False
    return True


# ---------------------------------------------------------------------------
# graph products of ucp maps
# ---------------------------------------------------------------------------


def greedy_coloring(graph: SimplicialGraph) -> list:
    """Proper coloring, first-fit in vertex order."""
    colors = []
    for v in range(graph.n):
        used = {colors[u] for u in range(v) if graph.adjacent(u, v)}
        c = 0
        while c in used:
            c += 1
        colors.append(c)
    return colors


class StinespringMap:
    """Local ucp map a -> W* (a tensor I_env) W into one matrix block."""

    kind = "stinespring"

    def __init__(self, isometry: np.ndarray, source_dim: int, env: int):
        self.w = np.asarray(isometry, dtype=complex)
        self.source_dim = source_dim
        self.env = env
        self.block_dim = self.w.shape[1]
        if self.w.shape[0] != source_dim * env:
            raise SpecInvalidError("isometry rows do not match source x env")

    def apply(self, a) -> np.ndarray:
        return self.w.conj().T @ np.kron(a, np.eye(self.env)) @ self.w

    def to_json_dict(self):
        return {
            "kind": self.kind,
            "isometry": carray_to_json(self.w),
            "source_dim": self.source_dim,
            "env": self.env,
        }


class PowersMap:
    """Laurent monomials to contraction powers: x^m -> T^m, x^{-m} -> (T*)^m."""

    kind = "powers"

    def __init__(self, contraction: np.ndarray, band: int):
        self.t = np.asarray(contraction, dtype=complex)
        self.band = band
        self.block_dim = self.t.shape[0]
        powers = [np.eye(self.block_dim, dtype=complex)]
        for _ in range(band):
            powers.append(powers[-1] @ self.t)
        star = self.t.conj().T
        neg = [np.eye(self.block_dim, dtype=complex)]
        for _ in range(band):
            neg.append(neg[-1] @ star)
        self._pow = powers
        self._neg = neg

    def apply(self, coeffs) -> np.ndarray:
        out = np.zeros((self.block_dim, self.block_dim), dtype=complex)
        for idx, c in enumerate(coeffs):
            if c != 0:
                m = idx - self.band
                out += c * (self._pow[m] if m >= 0 else self._neg[-m])
        return out

    def to_json_dict(self):
        return {
            "kind": self.kind,
            "contraction": carray_to_json(self.t),
            "band": self.band,
        }


class TableMap:
    """Group algebra to matrices through a table g -> f(g)."""

    kind = "table"

    def __init__(self, table: np.ndarray):
        self.table = np.asarray(table, dtype=complex)  # (|G|, D, D)
        self.block_dim = self.table.shape[1]

    def apply(self, coeffs) -> np.ndarray:
        return np.einsum("g,gij->ij", np.asarray(coeffs), self.table)

    def to_json_dict(self):
        return {"kind": self.kind, "table": carray_to_json(self.table)}


def _local_map_from_json(d):
    if d["kind"] == "stinespring":
        return StinespringMap(carray_from_json(d["isometry"]), d["source_dim"], d["env"])
    if d["kind"] == "powers":
        return PowersMap(carray_from_json(d["contraction"]), d["band"])
    if d["kind"] == "table":
        return TableMap(carray_from_json(d["table"]))
    raise SpecInvalidError(f"unknown local map kind {d['kind']!r}")


@dataclass
class VertexSite:
    """One vertex's ucp map: a local block map plus its tensor position."""

    color: int
    local: object


class ThetaSpec:
    """Per-vertex ucp maps into one shared matrix target.

    The target is a tensor product of matrix blocks indexed by a proper
    coloring of the graph; each vertex acts on its color's leg and as the
    identity elsewhere, so edge-adjacent vertices (different colors) commute
    exactly while same-color non-adjacent vertices interact on a shared leg.
    Validation checks unitality, complete positivity of each local map (Choi
    matrix for matrix algebras, full-group Gram for group algebras; banded
    Laurent maps have no finite certificate and are flagged as surrogate),
    and edge commutation of the ranges on algebra bases.
    """

    def __init__(self, ctx: GraphAlgebra, sites, block_dims, tols: Tolerances = DEFAULT,
                 validate: bool = True):
        self.ctx = ctx
        self.sites = list(sites)
        self.block_dims = list(block_dims)
        self.target_dim = int(np.prod(self.block_dims)) if self.block_dims else 1
        self._image_cache = {}
        self._embed_shapes = []
        for c in range(len(self.block_dims)):
            pre = int(np.prod(self.block_dims[:c])) if c else 1
            post = int(np.prod(self.block_dims[c + 1 :])) if c + 1 < len(self.block_dims) else 1
            self._embed_shapes.append((pre, post))
        self.validation = None
        if validate:
            self.validation = self.validate(tols)
            if not self.validation["valid"]:
                raise SpecInvalidError(self.validation["reason"])

    # -- evaluation ----------------------------------------------------------

    def embed(self, color: int, block: np.ndarray) -> np.ndarray:
        pre, post = self._embed_shapes[color]
        out = block
        if pre > 1:
            out = np.kron(np.eye(pre), out)
        if post > 1:
            out = np.kron(out, np.eye(post))
        return out

    def image(self, v: int, a) -> np.ndarray:
        """Theta restricted to vertex v, applied to algebra element a."""
        key = (v, np.asarray(a).tobytes())
        hit = self._image_cache.get(key)
        if hit is not None:
            return hit
        site = self.sites[v]
        out = self.embed(site.color, site.local.apply(a))
        if len(self._image_cache) < 50_000:
            self._image_cache[key] = out
        return out

    def eye(self) -> np.ndarray:
        return np.eye(self.target_dim, dtype=complex)

    # -- validation ----------------------------------------------------------

    def validate(self, tols: Tolerances = DEFAULT) -> dict:
        report = {"valid": True, "reason": "", "unital": [], "cp": [], "commute": 0.0}
        for v, site in enumerate(self.sites):
            alg = self.ctx.algebras[v]
            res = float(
                np.linalg.norm(site.local.apply(alg.unit()) - np.eye(site.local.block_dim))
            )
            report["unital"].append(res)
            if res > 10 * tols.commute:
                report.update(valid=False, reason=f"theta at vertex {v} is not unital")
                return report
            cp = self._cp_residual(v, tols)
            report["cp"].append(cp)
            if cp is not None and cp > tols.choi:
                report.update(
                    valid=False,
                    reason=f"theta at vertex {v} failed complete positivity ({cp:.2e})",
                )
                return report
        worst = 0.0
        for u, v in self.ctx.graph.edges:
            for a in self.ctx.algebras[u].hs_basis():
                ia = self.image(u, a)
                for b in self.ctx.algebras[v].hs_basis():
                    ib = self.image(v, b)
                    comm = ia @ ib - ib @ ia
                    scale = 1.0 + linalg.op_norm(ia) * linalg.op_norm(ib)
                    worst = max(worst, float(np.linalg.norm(comm)) / scale)
        report["commute"] = worst
        if worst > tols.commute:
            report.update(valid=False, reason=f"edge ranges do not commute ({worst:.2e})")
        return report

    def _cp_residual(self, v: int, tols: Tolerances):
        """Negative part of the positivity certificate; None when surrogate."""
        alg = self.ctx.algebras[v]
        local = self.sites[v].local
        if alg.kind == "matrix":
            d = alg.dim_space
            k = local.block_dim
            choi = np.zeros((d * k, d * k), dtype=complex)
            for i in range(d):
                for j in range(d):
                    e = np.zeros((d, d), dtype=complex)
                    e[i, j] = 1.0
                    choi[i * k : (i + 1) * k, j * k : (j + 1) * k] = local.apply(e)
            verdict = linalg.is_psd(choi, tol=tols.choi, tols=tols)
            return max(0.0, -verdict.lambda_min / (1.0 + verdict.lambda_max))
        if alg.kind == "group":
            n = alg.order
            k = local.block_dim
            gram = np.zeros((n * k, n * k), dtype=complex)
            deltas = alg.hs_basis()
            for g in range(n):
                for h in range(n):
                    prod = alg.mul(alg.adjoint(deltas[g]), deltas[h])
                    gram[g * k : (g + 1) * k, h * k : (h + 1) * k] = local.apply(prod)
            verdict = linalg.is_psd(gram, tol=tols.choi, tols=tols)
            return max(0.0, -verdict.lambda_min / (1.0 + verdict.lambda_max))
        return None  # banded Laurent: no finite certificate, surrogate checks apply

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            **self.ctx.to_json_dict(),
            "block_dims": self.block_dims,
            "sites": [
                {"vertex": v, "color": s.color, "map": s.local.to_json_dict()}
                for v, s in enumerate(self.sites)
            ],
        }

    @classmethod
    def from_json_dict(cls, d, tols: Tolerances = DEFAULT) -> "ThetaSpec":
        ctx = GraphAlgebra.from_json_dict(d)
        sites = [None] * ctx.graph.n
        for s in d["sites"]:
            sites[s["vertex"]] = VertexSite(s["color"], _local_map_from_json(s["map"]))
        return cls(ctx, sites, d["block_dims"], tols=tols)


def theta_eval(spec: ThetaSpec, e: GpElement) -> np.ndarray:
    """Apply the graph product map: unit to I, words to ordered products."""
    if spec.validation is not None and not spec.validation["valid"]:
        raise SpecInvalidError(spec.validation["reason"])
    if e.ctx != spec.ctx:
        raise AlgebraMismatchError("element and spec use different graph algebras")
    out = e.unit * spec.eye()
    for t in e.terms:
        m = None
        for v, a in zip(t.word, t.letters):
            img = spec.image(v, a)
            m = img if m is None else m @ img
        out = out + t.coeff * (m if m is not None else spec.eye())
    return out


def random_theta(
    graph: SimplicialGraph,
    dims,
    seed,
    block_size: int = 2,
    tols: Tolerances = DEFAULT,
) -> ThetaSpec:
    """Seeded random ThetaSpec over matrix algebras.

    dims gives the per-vertex matrix size (an int broadcasts).  Each color
    gets one target block of size block_size; vertex maps are Stinespring
    compressions W*(a tensor I)W through seeded random isometries, so they
    are ucp by construction, and adjacent vertices land on different legs.
    """
    rng = linalg.rng_from(seed)
    if isinstance(dims, int):
        dims = [dims] * graph.n
    if len(dims) != graph.n:
        raise AlgebraMismatchError("need one dimension per vertex")
    algebras = [
        MatrixAlgebra(d, linalg.random_density(d, rng)) for d in dims
    ]
    ctx = GraphAlgebra(graph, algebras)
    colors = greedy_coloring(graph)
    n_colors = (max(colors) + 1) if colors else 0
    block_dims = [block_size] * n_colors
    sites = []
    for v in range(graph.n):
        k = block_dims[colors[v]]
        d = dims[v]
        env = max(1, -(-k // d))  # smallest env with d*env >= k
        if rng.integers(0, 2) == 1:
            env += 1
        w = linalg.random_isometry(k, d * env, rng)
        sites.append(VertexSite(colors[v], StinespringMap(w, d, env)))
    return ThetaSpec(ctx, sites, block_dims, tols=tols)


# ---------------------------------------------------------------------------
# state-compatible maps between graph algebras
# ---------------------------------------------------------------------------


def random_choda_maps(graph: SimplicialGraph, dims, seed):
    """Seeded per-vertex ucp maps theta_v with psi_v . theta_v = phi_v.

    Source and target at each vertex are matrix algebras whose states share a
    spectrum; theta interpolates between the state itself and conjugation by
    the unitary aligning the two density matrices, which preserves the state
    composition exactly.

    Returns (source_ctx, target_ctx, maps) where maps[v] is a callable.
    """
    rng = linalg.rng_from(seed)
    if isinstance(dims, int):
        dims = [dims] * graph.n
    sources, targets, maps = [], [], []
    for d in dims:
        spec_vals = rng.random(d) + 0.1
        spec_vals /= spec_vals.sum()
        ua = linalg.random_isometry(d, d, rng)
        ub = linalg.random_isometry(d, d, rng)
        rho = (ua * spec_vals) @ ua.conj().T
        sigma = (ub * spec_vals) @ ub.conj().T
        u = ua @ ub.conj().T
        t = float(rng.random())
        src = MatrixAlgebra(d, rho)
        tgt = MatrixAlgebra(d, sigma)

        def theta(a, _u=u, _t=t, _src=src, _d=d):
            return (1.0 - _t) * _src.state(a) * np.eye(_d) + _t * (_u.conj().T @ a @ _u)

        sources.append(src)
        targets.append(tgt)
        maps.append(theta)
    return GraphAlgebra(graph, sources), GraphAlgebra(graph, targets), maps


def choda_check(
    source_ctx: GraphAlgebra,
    target_ctx: GraphAlgebra,
    maps,
    e: GpElement,
    tols: Tolerances = DEFAULT,
) -> dict:
    """Verify that mapping letterwise preserves the graph product state.

    Precondition: psi_v(theta_v(a)) = phi_v(a) on each vertex algebra basis
    (IncompatibleStatesError otherwise).  The element is pushed through the
    maps letter by letter, re-canonicalized over the target algebras, and the
    two vacuum expectations are compared.
    """
    if e.ctx != source_ctx:
        raise AlgebraMismatchError("element does not live over the source algebras")
    for v in range(source_ctx.graph.n):
        src, tgt = source_ctx.algebras[v], target_ctx.algebras[v]
        for a in src.hs_basis():
            lhs = tgt.state(maps[v](a))
            rhs = src.state(a)
            if abs(lhs - rhs) > tols.state_compat * (1.0 + abs(rhs)):
                raise IncompatibleStatesError(
                    f"psi.theta != phi at vertex {v} (residual {abs(lhs - rhs):.2e})"
                )
    raw = []
    for t in e.terms:
        letters = [(v, maps[v](a)) for v, a in zip(t.word, t.letters)]
        raw.append((letters, t.coeff))
    unit, terms = _canonicalize(target_ctx, raw)
    mapped = GpElement(target_ctx, unit + e.unit, terms)
    lhs = vacuum_state(mapped)
    rhs = vacuum_state(e)
    residual = abs(lhs - rhs)
    return {
        "passed": residual <= tols.choda * (1.0 + abs(rhs)),
        "residual": residual,
        "lhs": lhs,
        "rhs": rhs,
    }
