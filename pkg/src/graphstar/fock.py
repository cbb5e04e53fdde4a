"""Truncated graph-product Hilbert space and its left representations.

Each vertex carries a pointed Hilbert space (H_v, xi_v), obtained here from
the GNS construction of a matrix algebra with a state.  The product space is
spanned by a vacuum vector plus, for every minimal word w = (w_1..w_n) up to
a length cutoff, the tensor product of the complements H_v minus the line
through xi_v along the word.  Basis vectors are indexed by (word, occupation
tuple) with occupation indices running over each complement's basis.

The left representation of an operator x on H_{v0} acts by the unitary
exchange rules: on a word w that stays reduced when v0 is prepended, the
xi-component of x fixes the word while the complement components raise it to
v0.w; on a word with a front-movable v0 letter, x acts inside that slot, the
xi-component lowering the word.  Raising past the cutoff is truncated: those
components are annihilated and the operator is flagged partial.  All exact
assertions are therefore restricted to the safe subspace of words short
enough that no truncation is touched.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import linalg
from .config import DEFAULT, Tolerances
from .errors import BudgetExceededError, DimensionMismatchError
from .words import (
    SimplicialGraph,
    is_reduced,
    minimal_words,
    normal_form_with_perm,
)

__all__ = [
    "VertexSpace",
    "gns",
    "TruncatedFock",
    "LambdaOperator",
    "lam",
    "moment",
    "check_independence",
    "commutation_residual",
    "homomorphism_residual",
]


@dataclass
class VertexSpace:
    """GNS space of a vertex algebra: coordinates with the unit's class first.

    `embed` sends the flat coordinates of an algebra element to the class
    coordinates; the distinguished unit vector is e_1 by convention and the
    complement spans the remaining dim-1 coordinates.
    """

    dim: int
    embed: np.ndarray
    embed_pinv: np.ndarray
    algebra: object

    @property
    def xi(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def vector_of(self, a) -> np.ndarray:
        """Class of the algebra element a as a vector."""
        return self.embed @ np.asarray(a, dtype=complex).reshape(-1)

    def represent(self, a) -> np.ndarray:
        """Left multiplication by a, compressed to the class space."""
        d = self.algebra.dim_space
        left = np.kron(np.asarray(a, dtype=complex), np.eye(d))
        return self.embed @ left @ self.embed_pinv


def gns(algebra, tols: Tolerances = DEFAULT) -> VertexSpace:
    """GNS construction for a matrix algebra with its density state.

    The sesquilinear form <a, b> = phi(b* a) on the algebra is diagonalized;
    directions with eigenvalue below tols.gns_cutoff (relative) are
    quotiented away.  The class of the unit is rotated to the first basis
    vector, and <pi(a) xi, xi> = phi(a) holds to working precision.
    """
    d = algebra.dim_space
    basis = algebra.hs_basis()
    n = len(basis)
    s = np.empty((n, n), dtype=complex)
    for p, ep in enumerate(basis):
        for q, eq in enumerate(basis):
            s[q, p] = algebra.state(algebra.mul(algebra.adjoint(eq), ep))
    eig = linalg.herm_eig(s, tols)
    vals, vecs = eig.eigenvalues, eig.eigenvectors
    top = float(vals[-1])
    keep = vals > tols.gns_cutoff * max(top, 1.0)
    lam_k = vals[keep]
    q_k = vecs[:, keep]
    t = (np.sqrt(lam_k)[:, None]) * q_k.conj().T     # r x d^2
    t_pinv = q_k * (1.0 / np.sqrt(lam_k))[None, :]   # d^2 x r

    xi_hat = t @ algebra.unit().reshape(-1)
    r = t.shape[0]
    cols = [xi_hat / np.linalg.norm(xi_hat)]
    for k in range(r):
        e = np.zeros(r, dtype=complex)
        e[k] = 1.0
        for c in cols:
            e = e - c * (c.conj() @ e)
        nrm = np.linalg.norm(e)
        if nrm > 1e-8:
            cols.append(e / nrm)
        if len(cols) == r:
            break
    u = np.array(cols).conj()  # rows are the new basis vectors
    return VertexSpace(dim=r, embed=u @ t, embed_pinv=t_pinv @ u.conj().T, algebra=algebra)


class TruncatedFock:
    """Ordered basis of the product space up to a word-length cutoff.

    Basis order: the vacuum first, then by (word length, word, occupation),
    occupation indices 1..dim_v-1 along each word letter.  Vertices whose
    complement is empty (one-dimensional GNS space) contribute no words.
    """

    def __init__(self, graph: SimplicialGraph, spaces, cutoff: int = 4,
                 max_dim: int = 6000):
        if cutoff < 1:
            raise DimensionMismatchError("cutoff must be at least 1")
        self.graph = graph
        self.spaces = list(spaces)
        if len(self.spaces) != graph.n:
            raise DimensionMismatchError("need one vertex space per vertex")
        self.cutoff = cutoff
        self.words = sorted(minimal_words(graph, cutoff), key=lambda w: (len(w), w))
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.basis = []
        self.index = {}
        for wi, w in enumerate(self.words):
            ranges = [range(1, self.spaces[v].dim) for v in w]
            for occ in product(*ranges):
                self.index[(wi, occ)] = len(self.basis)
                self.basis.append((wi, occ))
                if len(self.basis) > max_dim:
                    raise BudgetExceededError(
                        f"truncated space exceeds {max_dim} dimensions"
                    )
        self.dim = len(self.basis)

    @property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[(self.word_index[()], ())]] = 1.0
        return v

    def word_length_of(self, basis_idx: int) -> int:
        return len(self.words[self.basis[basis_idx][0]])

    # -- per-vertex word classification, cached ------------------------------

    def _classify(self, v0: int):
        """For each word: how prepending v0 interacts with it.

        Returns a list over word ids of either
          ("raise", target_word_id_or_None, perm) when v0.w is reduced
          ("lower", j, rest_word_id, rest_perm)   when w has a front-movable
                                                  v0 at position j.
        """
        key = ("classify", v0)
        cache = self.__dict__.setdefault("_cache", {})
        if key in cache:
            return cache[key]
        out = []
        for w in self.words:
            j = _front_movable_at(self.graph, w, v0)
            if j is None:
                new = (v0,) + w
                if len(new) <= self.cutoff:
                    nf, perm = normal_form_with_perm(self.graph, new)
                    out.append(("raise", self.word_index[nf], perm))
                else:
                    out.append(("raise", None, None))
            else:
                rest = w[:j] + w[j + 1 :]
                nf, perm = normal_form_with_perm(self.graph, rest)
                out.append(("lower", j, self.word_index[nf], perm))
        cache[key] = out
        return out


def _front_movable_at(g: SimplicialGraph, w, v0):
    """Position of the unique occurrence of v0 movable to the front, if any."""
    for i, v in enumerate(w):
        if v == v0 and all(g.adjacent(w[j], v0) for j in range(i)):
            return i
        if v == v0:
            return None  # later occurrences cannot cross this one
    return None


@dataclass
class LambdaOperator:
    """Left representation matrix; partial when truncation annihilated images."""

    v0: int
    matrix: np.ndarray
    partial: bool

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


def lam(f: TruncatedFock, v0: int, x) -> LambdaOperator:
    """Left representation of the operator x on H_{v0}.

    Exact on basis vectors whose image stays within the cutoff; raising
    components that would exceed it are annihilated and the operator is
    flagged partial.
    """
    x = np.asarray(x, dtype=complex)
    r0 = f.spaces[v0].dim
    if x.shape != (r0, r0):
        raise DimensionMismatchError(
            f"operator must be {r0}x{r0} on the vertex space of {v0}"
        )
    info = f._classify(v0)
    m = np.zeros((f.dim, f.dim), dtype=complex)
    partial = False
    for col, (wi, occ) in enumerate(f.basis):
        kind = info[wi]
        if kind[0] == "raise":
            _, tid, perm = kind
            m[col, col] += x[0, 0]
            if tid is None:
                if np.any(x[1:, 0] != 0):
                    partial = True
                continue
            for p in range(1, r0):
                if x[p, 0] == 0:
                    continue
                combined = (p,) + occ
                new_occ = tuple(combined[i] for i in perm)
                m[f.index[(tid, new_occ)], col] += x[p, 0]
        else:
            _, j, rest_id, rest_perm = kind
            k = occ[j]
            rest_occ_raw = occ[:j] + occ[j + 1 :]
            rest_occ = tuple(rest_occ_raw[i] for i in rest_perm)
            m[f.index[(rest_id, rest_occ)], col] += x[0, k]
            for p in range(1, r0):
                if x[p, k] == 0:
                    continue
                new_occ = occ[:j] + (p,) + occ[j + 1 :]
                m[f.index[(wi, new_occ)], col] += x[p, k]
    return LambdaOperator(v0=v0, matrix=m, partial=partial)


def moment(f: TruncatedFock, letters, budget: int = 50_000_000) -> complex:
    """Vacuum expectation of a product of represented algebra elements.

    `letters` is a sequence of (vertex, algebra element); the product word
    need not be reduced but its total length must fit inside the cutoff so
    truncation is never touched.
    """
    letters = list(letters)
    if len(letters) > f.cutoff:
        raise BudgetExceededError(
            f"word of length {len(letters)} exceeds cutoff {f.cutoff}"
        )
    if f.dim * f.dim * max(1, len(letters)) > budget:
        raise BudgetExceededError("moment computation over budget")
    ops = {}
    vec = f.vacuum
    for v, a in reversed(letters):
        key = (v, np.asarray(a).tobytes())
        if key not in ops:
            ops[key] = lam(f, v, f.spaces[v].represent(a))
        vec = ops[key].apply(vec)
    return complex(vec @ np.conj(f.vacuum))


def check_independence(
    f: TruncatedFock,
    elements,
    word,
    budget: int = 50_000_000,
    tols: Tolerances = DEFAULT,
) -> dict:
    """Vanishing of the vacuum moment of a reduced word of centered elements.

    `elements` maps each vertex to a state-centered algebra element; `word`
    is a reduced vertex word within the cutoff.
    """
    word = tuple(word)
    if not is_reduced(f.graph, word):
        raise DimensionMismatchError("independence check expects a reduced word")
    val = moment(f, [(v, elements[v]) for v in word], budget=budget)
    return {"passed": abs(val) <= tols.independence, "moment": val, "word": word}


def _safe_columns(f: TruncatedFock, max_len: int):
    return [i for i in range(f.dim) if f.word_length_of(i) <= max_len]


def commutation_residual(f: TruncatedFock, v: int, x, w: int, y) -> float:
    """Norm of [lam_v(x), lam_w(y)] on columns two steps inside the cutoff."""
    a = lam(f, v, x).matrix
    b = lam(f, w, y).matrix
    comm = a @ b - b @ a
    cols = _safe_columns(f, f.cutoff - 2)
    if not cols:
        return 0.0
    scale = 1.0 + linalg.op_norm(np.asarray(x)) * linalg.op_norm(np.asarray(y))
    return float(np.linalg.norm(comm[:, cols], 2)) / scale


def homomorphism_residual(f: TruncatedFock, v: int, x, y) -> float:
    """Norm of lam(xy) - lam(x)lam(y) on columns one step inside the cutoff."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    ab = lam(f, v, x @ y).matrix
    a = lam(f, v, x).matrix
    b = lam(f, v, y).matrix
    diff = ab - a @ b
    cols = _safe_columns(f, f.cutoff - 1)
    if not cols:
        return 0.0
    scale = 1.0 + linalg.op_norm(x) * linalg.op_norm(y)
    return float(np.linalg.norm(diff[:, cols], 2)) / scale
