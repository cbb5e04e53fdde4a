"""Gram positivity, the concatenation-Stinespring space, and inequality checks.

The central object is the block Gram matrix [Theta(x* y)] over a complete set
X of words, instantiated by a WordFamily: one state-centered letter per
vertex (or one monomial per syllable), reused coherently across the family so
that left concatenation acts on the index set.  Positivity of that Gram is
the finite fingerprint of the product map being completely positive.

From a positive Gram the quotient space construction follows: factor
G = R* R over the kept spectrum, embed the target space along the unit word
(an isometry V1), and realize left concatenation by one bounded operator per
length-one member of X, with norm at most the letter's norm and with
Theta(x* y) = V1* Lx* Ly V1 as the compression identity.

The remaining checks are the matrix inequalities used on the way to the main
positivity result: a generalized Schwarz inequality over composable pairs,
two cross-term factorization identities driven by standard forms and
non-commutative length, the y* a* a y bound for arbitrary (not centered)
letters, and the squared block version over families sharing a y-word.
Instances for those are searched for by combinatorial generators, so the
suites never pass vacuously; candidates failing the hypotheses raise
HypothesisNotMetError and are counted as skips, not passes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .algebra import (
    GpElement,
    Term,
    ThetaSpec,
    center,
    gp_adjoint,
    gp_mul,
    gp_word,
    theta_eval,
)
from .config import DEFAULT, Tolerances
from .errors import (
    GramNotPsdError,
    HypothesisNotMetError,
    PairNotInXError,
    SpecInvalidError,
)
from .words import (
    SimplicialGraph,
    complete_closure,
    down_set,
    find_merge_pair,
    is_reduced,
    nc_length,
    nc_length_set,
    normal_form,
    normal_form_with_perm,
    reduce_word,
    standard_form,
)

__all__ = [
    "WordFamily",
    "tensor_family",
    "syllable_family",
    "syllable_normal_form",
    "syllable_mul",
    "syllable_closure",
    "GramReport",
    "gram",
    "ConcatSpace",
    "build_concat_space",
    "check_lx_bound",
    "check_compression",
    "check_schwarz",
    "X1Instance",
    "find_x1_words",
    "check_lemma_x1",
    "Y1Instance",
    "find_y1_words",
    "check_lemma_y1",
    "TechInstance",
    "check_techlem",
    "Y1SquareInstance",
    "find_y1_square_words",
    "check_y1_square",
    "free_gram_oracle",
    "complete_graph_order_residual",
    "degeneration_suite",
]


# ---------------------------------------------------------------------------
# word families
# ---------------------------------------------------------------------------


def syllable_normal_form(g: SimplicialGraph, syl) -> tuple:
    """Normal form of a reduced syllable word ((vertex, exponent), ...)."""
    word = tuple(v for v, _ in syl)
    nf, perm = normal_form_with_perm(g, word)
    return tuple(syl[i] for i in perm)


def syllable_mul(g: SimplicialGraph, a, b) -> tuple:
    """Product of two syllable words in the graph product of copies of Z."""
    out = list(a) + list(b)
    while True:
        pair = find_merge_pair(g, out, key=lambda s: s[0])
        if pair is None:
            return syllable_normal_form(g, tuple(out))
        k, l = pair
        m = out[k][1] + out[l][1]
        v = out[k][0]
        del out[k]
        if m == 0:
            del out[l - 1]
        else:
            out[l - 1] = (v, m)


def syllable_truncations(g: SimplicialGraph, syl) -> set:
    word = tuple(v for v, _ in syl)
    out = set()
    n = len(word)
    for i in range(n):
        left_ok = all(g.adjacent(word[j], word[i]) for j in range(i))
        right_ok = all(g.adjacent(word[j], word[i]) for j in range(i + 1, n))
        if left_ok or right_ok:
            out.add(syllable_normal_form(g, syl[:i] + syl[i + 1 :]))
    return out


def syllable_closure(g: SimplicialGraph, syl_words) -> frozenset:
    """Smallest complete set of syllable words containing the inputs."""
    closed = {()}
    frontier = []
    for s in syl_words:
        nf = syllable_normal_form(g, tuple(s))
        if nf not in closed:
            closed.add(nf)
            frontier.append(nf)
    while frontier:
        s = frontier.pop()
        for t in syllable_truncations(g, s):
            if t not in closed:
                closed.add(t)
                frontier.append(t)
    return frozenset(closed)


class WordFamily:
    """A complete set of words with one coherent element per word.

    kind "tensor": keys are vertex words; each vertex draws one centered
    unit-norm letter, reused at every occurrence, so prepending a length-one
    member maps family elements to family elements.  kind "syllable": keys
    are ((vertex, exponent), ...) words over banded Laurent algebras; the
    letter of a syllable is the corresponding monomial, and index actions
    multiply in the graph product of copies of Z.
    """

    def __init__(self, spec: ThetaSpec, kind: str, keys, letters):
        self.spec = spec
        self.kind = kind
        self.keys = sorted(keys, key=lambda k: (len(k), k))
        if self.keys[0] != ():
            raise PairNotInXError("a word family must contain the unit word")
        self.key_index = {k: i for i, k in enumerate(self.keys)}
        self.letters = letters
        self._elements = {}

    def __len__(self):
        return len(self.keys)

    @property
    def generators(self):
        return [k for k in self.keys if len(k) == 1]

    def vertex_word(self, key) -> tuple:
        if self.kind == "tensor":
            return key
        return tuple(v for v, _ in key)

    def element(self, key) -> GpElement:
        el = self._elements.get(key)
        if el is None:
            ctx = self.spec.ctx
            if key == ():
                el = GpElement.one(ctx)
            elif self.kind == "tensor":
                el = GpElement(
                    ctx, 0.0, (Term(key, tuple(self.letters[v] for v in key), 1.0),)
                )
            else:
                word = self.vertex_word(key)
                mats = tuple(
                    ctx.algebras[v].monomial(m) for v, m in key
                )
                el = GpElement(ctx, 0.0, (Term(word, mats, 1.0),))
            self._elements[key] = el
        return el

    def letter_norm(self, gen_key) -> float:
        if self.kind == "tensor":
            v = gen_key[0]
            return self.spec.ctx.algebras[v].norm(self.letters[v])
        v, m = gen_key[0]
        return self.spec.ctx.algebras[v].norm(self.spec.ctx.algebras[v].monomial(m))

    def act(self, gen_key, key):
        """Index action of left concatenation; None when it leaves the set."""
        g = self.spec.ctx.graph
        if self.kind == "tensor":
            (v,) = gen_key
            new = (v,) + key
            if not is_reduced(g, new):
                return None
            nf = normal_form(g, new)
            return nf if nf in self.key_index else None
        prod = syllable_mul(g, gen_key, key)
        band = self.spec.ctx.algebras[gen_key[0][0]].band
        if any(abs(m) > band for _, m in prod):
            return None
        return prod if prod in self.key_index else None

    def compose(self, key_a, key_b):
        """Key of the product element a.b, or None when outside the family."""
        g = self.spec.ctx.graph
        if self.kind == "tensor":
            new = key_a + key_b
            if not is_reduced(g, new):
                return None
            nf = normal_form(g, new)
            return nf if nf in self.key_index else None
        prod = syllable_mul(g, key_a, key_b)
        return prod if prod in self.key_index else None

    def to_json_dict(self) -> dict:
        from .serialize import carray_to_json

        d = {"kind": self.kind, "keys": [list(map(list, k)) if self.kind == "syllable"
                                          else list(k) for k in self.keys]}
        if self.kind == "tensor":
            d["letters"] = {str(v): carray_to_json(a) for v, a in self.letters.items()}
        return d


def tensor_family(spec: ThetaSpec, words, seed) -> WordFamily:
    """Family over a complete set of vertex words with seeded letters."""
    g = spec.ctx.graph
    keys = complete_closure(g, words)
    rng = linalg.rng_from(seed)
    letters = {
        v: spec.ctx.algebras[v].random_centered(rng, unit_norm=True)
        for v in range(g.n)
    }
    return WordFamily(spec, "tensor", keys, letters)


def tensor_family_from_letters(spec: ThetaSpec, words, letters) -> WordFamily:
    keys = complete_closure(spec.ctx.graph, words)
    return WordFamily(spec, "tensor", keys, dict(letters))


def syllable_family(spec: ThetaSpec, syl_words) -> WordFamily:
    """Family over a complete set of syllable words (monomial letters)."""
    keys = syllable_closure(spec.ctx.graph, syl_words)
    return WordFamily(spec, "syllable", keys, None)


# ---------------------------------------------------------------------------
# the Gram matrix
# ---------------------------------------------------------------------------


@dataclass
class GramReport:
    """Block Gram [Theta(x* y)] with its spectrum and verdict."""

    keys: list
    matrix: np.ndarray
    block_dim: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    herm_residual: float
    quotient_rank: int
    verdict: linalg.PsdVerdict

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def summary(self) -> dict:
        return {
            "n_words": len(self.keys),
            "size": int(self.matrix.shape[0]),
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "quotient_rank": self.quotient_rank,
            "herm_residual": self.herm_residual,
            "passed": self.verdict.passed,
        }


def gram(spec: ThetaSpec, fam: WordFamily, tols: Tolerances = DEFAULT) -> GramReport:
    """Assemble and judge the block Gram matrix over the family."""
    keys = fam.keys
    n = len(keys)
    d = spec.target_dim
    big = np.zeros((n * d, n * d), dtype=complex)
    adjoints = [gp_adjoint(fam.element(k)) for k in keys]
    for i in range(n):
        for j in range(i, n):
            block = theta_eval(spec, gp_mul(adjoints[i], fam.element(keys[j])))
            big[i * d : (i + 1) * d, j * d : (j + 1) * d] = block
            if j > i:
                big[j * d : (j + 1) * d, i * d : (i + 1) * d] = block.conj().T
    herm_res = linalg.herm_residual(big)
    big = 0.5 * (big + big.conj().T)
    eig = linalg.herm_eig(big, tols)
    hi = float(eig.eigenvalues[-1])
    rank = int(np.sum(eig.eigenvalues > tols.rank_cutoff * max(hi, 0.0)))
    lo = float(eig.eigenvalues[0])
    verdict = linalg.PsdVerdict(
        passed=lo >= -tols.gram_psd * (1.0 + hi),
        lambda_min=lo,
        lambda_max=hi,
        tol=tols.gram_psd,
    )
    return GramReport(
        keys=keys,
        matrix=big,
        block_dim=d,
        eigenvalues=eig.eigenvalues,
        eigenvectors=eig.eigenvectors,
        herm_residual=herm_res,
        quotient_rank=rank,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# the concatenation-Stinespring space
# ---------------------------------------------------------------------------


class ConcatSpace:
    """Quotient of H tensor C^X by the Gram form, with concatenation operators.

    R factors the Gram as G = R* R over the eigenvalues kept by the relative
    rank cutoff, and V1 = R E_1 embeds the target space isometrically along
    the unit word.  Left concatenation by a length-one member acts on the
    embedded vectors by the index action (always exact, by coherence of the
    family); the matrix realizations Lx = R Px R+ on the quotient coordinates
    are additionally well-defined operators exactly when the Gram kernel is
    trivial after the cutoff (quotient_exact).  On rank-deficient Grams the
    concatenation maps genuinely fail to preserve the kernel, so the matrix
    Lx are then best-effort representatives: their well-definedness residuals
    are reported, not asserted.
    """

    def __init__(self, spec, fam, report, tols: Tolerances = DEFAULT):
        if not report.verdict.passed:
            raise GramNotPsdError(
                f"Gram lambda_min {report.verdict.lambda_min:.3e} fails positivity"
            )
        self.spec = spec
        self.fam = fam
        self.report = report
        self.tols = tols
        d = report.block_dim
        vals = np.clip(report.eigenvalues, 0.0, None)
        hi = float(report.eigenvalues[-1])
        keep = report.eigenvalues > tols.rank_cutoff * max(hi, 0.0)
        self.kept_vals = vals[keep]
        self.q_kept = report.eigenvectors[:, keep]
        sq = np.sqrt(self.kept_vals)
        self.rank = int(self.kept_vals.size)
        self.quotient_exact = self.rank == report.matrix.shape[0]
        self.r_factor = sq[:, None] * self.q_kept.conj().T  # rank x (n d)
        self.factor_residual = float(
            np.linalg.norm(self.r_factor.conj().T @ self.r_factor - report.matrix)
        ) / (1.0 + hi)
        unit_pos = fam.key_index[()]
        self.v1 = self.r_factor[:, unit_pos * d : (unit_pos + 1) * d]
        self.isometry_residual = float(
            np.linalg.norm(self.v1.conj().T @ self.v1 - np.eye(d))
        )
        self._sq = sq
        self._lmats = {}
        self._chain_keys = {}
        self.welldef_residuals = {}
        for gen in fam.generators:
            self._build_l(gen)

    def _build_l(self, gen):
        fam = self.fam
        d = self.report.block_dim
        targets = [fam.act(gen, k) for k in fam.keys]
        pq = np.zeros_like(self.q_kept)  # (n d) x rank
        for y_idx, t_key in enumerate(targets):
            if t_key is None:
                continue
            t_idx = fam.key_index[t_key]
            pq[t_idx * d : (t_idx + 1) * d, :] += self.q_kept[y_idx * d : (y_idx + 1) * d, :]
        core = self.q_kept.conj().T @ pq  # rank x rank
        with np.errstate(divide="ignore"):
            inv_sq = np.where(self._sq > 0, 1.0 / self._sq, 0.0)
        lmat = (self._sq[:, None] * core) * inv_sq[None, :]
        self._lmats[gen] = lmat
        # residual of Lx R = R Px: provably tiny iff the kernel is trivial
        rp = np.zeros_like(self.r_factor)
        for y_idx, t_key in enumerate(targets):
            if t_key is None:
                continue
            t_idx = fam.key_index[t_key]
            rp[:, y_idx * d : (y_idx + 1) * d] = self.r_factor[
                :, t_idx * d : (t_idx + 1) * d
            ]
        res = float(np.linalg.norm(lmat @ self.r_factor - rp)) / (
            1.0 + self.report.lambda_max
        )
        self.welldef_residuals[gen] = res

    def l_op(self, gen) -> np.ndarray:
        if gen not in self._lmats:
            raise PairNotInXError(f"{gen} is not a length-one member of the set")
        return self._lmats[gen]

    def chain_key(self, key):
        """Index of L_{x_1} ... L_{x_m} applied to the unit embedding.

        Follows the index action letter by letter; completeness guarantees
        every intermediate stays in the set (PairNotInXError otherwise).
        """
        hit = self._chain_keys.get(key)
        if hit is not None:
            return hit
        cur = ()
        for s in reversed(key):
            nxt = self.fam.act((s,), cur)
            if nxt is None:
                raise PairNotInXError(
                    f"chain for {key} leaves the set at letter {s}"
                )
            cur = nxt
        self._chain_keys[key] = cur
        return cur

    def chain(self, key) -> np.ndarray:
        """Embedded vector map of the concatenation chain: R E_{chain_key}."""
        d = self.report.block_dim
        idx = self.fam.key_index[self.chain_key(key)]
        return self.r_factor[:, idx * d : (idx + 1) * d]

    def chain_matrix(self, key) -> np.ndarray:
        """The same chain through the matrix Lx realizations."""
        m = self.v1
        for s in reversed(key):
            m = self.l_op((s,)) @ m
        return m


def build_concat_space(
    spec: ThetaSpec, fam: WordFamily, report: GramReport | None = None,
    tols: Tolerances = DEFAULT,
) -> ConcatSpace:
    if report is None:
        report = gram(spec, fam, tols)
    return ConcatSpace(spec, fam, report, tols)


def check_lx_bound(cs: ConcatSpace, gen_key, tols: Tolerances = DEFAULT) -> dict:
    """Boundedness of Lx by the letter norm, on elementary tensors.

    The provable estimate is norm(Lx (xi tensor e_y)) <= norm(x) *
    norm(xi tensor e_y) for every single word index y, equivalently that
    norm(x)^2 Theta(y* y) - Theta((xy)* (xy)) is PSD for every transition
    y -> xy inside the set.  The raw operator norm of Lx on the quotient is
    reported as well; it can legitimately exceed norm(x) because distinct
    word indices are not orthogonal in the quotient inner product, so it is
    informational, not a verdict.
    """
    fam = cs.fam
    d = cs.report.block_dim
    g_mat = cs.report.matrix
    xnorm = fam.letter_norm(gen_key)
    worst = 0.0
    for y_idx, key in enumerate(fam.keys):
        t_key = fam.act(gen_key, key)
        if t_key is None:
            continue
        t_idx = fam.key_index[t_key]
        blk_y = g_mat[y_idx * d : (y_idx + 1) * d, y_idx * d : (y_idx + 1) * d]
        blk_t = g_mat[t_idx * d : (t_idx + 1) * d, t_idx * d : (t_idx + 1) * d]
        m = xnorm * xnorm * blk_y - blk_t
        v = linalg.is_psd(m, tol=tols.lx_bound, tols=tols)
        deficiency = max(0.0, -v.lambda_min) / (1.0 + abs(v.lambda_max))
        worst = max(worst, deficiency)
    lnorm = linalg.op_norm(cs.l_op(gen_key))
    return {
        "passed": worst <= tols.lx_bound,
        "worst_deficiency": worst,
        "l_norm": lnorm,
        "letter_norm": xnorm,
        "opnorm_within_letter_norm": lnorm <= xnorm * (1.0 + tols.lx_bound),
    }


def check_compression(cs: ConcatSpace, tols: Tolerances = DEFAULT) -> dict:
    """Theta(x* y) = (L_x V1)* (L_y V1) over all pairs of the family.

    The concatenation chain from the unit embedding must land exactly on the
    indexing word (a bookkeeping identity of the family), and the pairing of
    the embedded chains through the factor R must reproduce the Gram block,
    i.e. the independently computed Theta(x* y).  When the quotient is exact
    (trivial kernel) the chains through the matrix Lx realizations must agree
    with the embeddings as well.
    """
    fam = cs.fam
    d = cs.report.block_dim
    worst = 0.0
    chain_ok = True
    matrix_chain_worst = 0.0
    scale = 1.0 + cs.report.lambda_max
    chains = {}
    for ki in fam.keys:
        chain_ok = chain_ok and (cs.chain_key(ki) == ki)
        chains[ki] = cs.chain(ki)
        if cs.quotient_exact:
            res = float(np.linalg.norm(cs.chain_matrix(ki) - chains[ki])) / scale
            matrix_chain_worst = max(matrix_chain_worst, res)
    for i, ki in enumerate(fam.keys):
        mi = chains[ki]
        for j, kj in enumerate(fam.keys):
            mj = chains[kj]
            block = cs.report.matrix[i * d : (i + 1) * d, j * d : (j + 1) * d]
            res = float(np.linalg.norm(mi.conj().T @ mj - block)) / scale
            worst = max(worst, res)
    passed = (
        chain_ok
        and worst <= tols.compression
        and matrix_chain_worst <= tols.compression
    )
    return {
        "passed": passed,
        "worst_residual": worst,
        "chains_land_on_keys": chain_ok,
        "matrix_chain_residual": matrix_chain_worst,
        "quotient_exact": cs.quotient_exact,
    }


# ---------------------------------------------------------------------------
# generalized Schwarz inequality
# ---------------------------------------------------------------------------


def check_schwarz(
    spec: ThetaSpec, fam: WordFamily, pairs, tols: Tolerances = DEFAULT
) -> dict:
    """[Theta(b_i* c_i* c_j b_j)] >= [Theta(b_i*) Theta(c_i* c_j) Theta(b_j)].

    Each pair is (b_key, c_key); b, c, and the composite c.b must all belong
    to the family (PairNotInXError otherwise).
    """
    for b_key, c_key in pairs:
        if b_key not in fam.key_index or c_key not in fam.key_index:
            raise PairNotInXError("pair members must come from the complete set")
        if fam.compose(c_key, b_key) is None:
            raise PairNotInXError(f"composite of {c_key} and {b_key} not in the set")
    n = len(pairs)
    d = spec.target_dim
    b_els = [fam.element(b) for b, _ in pairs]
    c_els = [fam.element(c) for _, c in pairs]
    full = [gp_mul(c_els[i], b_els[i]) for i in range(n)]
    full_adj = [gp_adjoint(e) for e in full]
    c_adj = [gp_adjoint(e) for e in c_els]
    theta_b = [theta_eval(spec, e) for e in b_els]
    theta_b_adj = [theta_eval(spec, gp_adjoint(e)) for e in b_els]
    lhs = np.zeros((n * d, n * d), dtype=complex)
    rhs = np.zeros((n * d, n * d), dtype=complex)
    for i in range(n):
        for j in range(n):
            lhs[i * d : (i + 1) * d, j * d : (j + 1) * d] = theta_eval(
                spec, gp_mul(full_adj[i], full[j])
            )
            mid = theta_eval(spec, gp_mul(c_adj[i], c_els[j]))
            rhs[i * d : (i + 1) * d, j * d : (j + 1) * d] = (
                theta_b_adj[i] @ mid @ theta_b[j]
            )
    verdict = linalg.is_psd(lhs - rhs, tol=tols.gram_psd, tols=tols)
    return {
        "passed": verdict.passed,
        "lambda_min": verdict.lambda_min,
        "lambda_max": verdict.lambda_max,
        "n_pairs": n,
    }


def find_schwarz_pairs(fam: WordFamily, rng, max_pairs: int = 4):
    """Composable (b, c) pairs from the family, a seeded sample."""
    cands = []
    for b in fam.keys:
        for c in fam.keys:
            if fam.compose(c, b) is not None:
                cands.append((b, c))
    if not cands:
        return []
    idx = rng.choice(len(cands), size=min(max_pairs, len(cands)), replace=False)
    return [cands[i] for i in sorted(idx)]


# ---------------------------------------------------------------------------
# lemma instances
# ---------------------------------------------------------------------------


def _word_element(spec: ThetaSpec, word, rng) -> GpElement:
    """Elementary element with fresh centered unit-norm letters along word."""
    if word == ():
        return GpElement.one(spec.ctx)
    letters = [
        (v, spec.ctx.algebras[v].random_centered(rng, unit_norm=True)) for v in word
    ]
    return gp_word(spec.ctx, letters)


def _rel_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    return float(np.linalg.norm(lhs - rhs)) / (1.0 + float(np.linalg.norm(lhs)))


def _random_reduced_word(g, rng, max_len, require_vertex=None, tries=60):
    for _ in range(tries):
        length = int(rng.integers(1, max_len + 1))
        w = tuple(int(rng.integers(0, g.n)) for _ in range(length))
        if not is_reduced(g, w):
            w = reduce_word(g, w)
        if require_vertex is not None and require_vertex not in w:
            continue
        if w:
            return w
    return None


@dataclass
class X1Instance:
    """Cross-term hypothesis data: x in standard form, x' strictly below it."""

    v0: int
    x_word: tuple
    xp_word: tuple
    y: tuple
    c: tuple
    b: tuple
    nc_level: int


def find_x1_words(g: SimplicialGraph, rng, max_len: int = 4) -> X1Instance:
    """Search small words for the cross-term hypotheses; raises when unlucky."""
    for _ in range(40):
        x = _random_reduced_word(g, rng, max_len)
        if x is None:
            continue
        v0 = int(x[rng.integers(0, len(x))])
        sf = standard_form(g, x, v0)
        level = nc_length_set(g, down_set(g, x), v0)
        for _ in range(40):
            xp = _random_reduced_word(g, rng, max_len)
            if xp is None:
                continue
            if nc_length_set(g, down_set(g, xp), v0) < level:
                return X1Instance(
                    v0=v0, x_word=x, xp_word=xp, y=sf.y, c=sf.c, b=sf.b,
                    nc_level=level,
                )
        # allow the empty word as x' when nothing else is below
        if level > -1:
            return X1Instance(v0=v0, x_word=x, xp_word=(), y=sf.y, c=sf.c, b=sf.b,
                              nc_level=level)
    raise HypothesisNotMetError("no cross-term instance found")


def check_lemma_x1(
    spec: ThetaSpec, inst: X1Instance, rng, tols: Tolerances = DEFAULT
) -> dict:
    """Theta(b* a* c* y* x') = Theta(b* a*) Theta(c* y* x') on the instance."""
    g = spec.ctx.graph
    if not (is_reduced(g, inst.x_word) and inst.v0 in inst.x_word):
        raise HypothesisNotMetError("x must be reduced and contain v0")
    sf = standard_form(g, inst.x_word, inst.v0)
    if (sf.y, sf.c, sf.b) != (inst.y, inst.c, inst.b):
        raise HypothesisNotMetError("declared standard form does not match")
    level = nc_length_set(g, down_set(g, inst.x_word), inst.v0)
    level_p = nc_length_set(g, down_set(g, inst.xp_word), inst.v0)
    if not level_p < level:
        raise HypothesisNotMetError("x' must have strictly smaller nc-length")

    y_el = _word_element(spec, inst.y, rng)
    c_el = _word_element(spec, inst.c, rng)
    b_el = _word_element(spec, inst.b, rng)
    a_el = _word_element(spec, (inst.v0,), rng)
    xp_el = _word_element(spec, inst.xp_word, rng)

    ycab = gp_mul(gp_mul(gp_mul(y_el, c_el), a_el), b_el)
    lhs = theta_eval(spec, gp_mul(gp_adjoint(ycab), xp_el))
    left = theta_eval(spec, gp_adjoint(gp_mul(a_el, b_el)))
    right = theta_eval(spec, gp_mul(gp_adjoint(gp_mul(y_el, c_el)), xp_el))
    res = _rel_residual(lhs, left @ right)
    return {"passed": res <= tols.equality, "residual": res, "nc_level": inst.nc_level}


@dataclass
class Y1Instance:
    """Two standard forms at equal positive nc-length with distinct y-words."""

    v0: int
    x_word: tuple
    xp_word: tuple
    nc_level: int


def find_y1_words(g: SimplicialGraph, rng, max_len: int = 4) -> Y1Instance:
    for _ in range(60):
        x = _random_reduced_word(g, rng, max_len)
        if x is None:
            continue
        v0 = int(x[rng.integers(0, len(x))])
        level = nc_length_set(g, down_set(g, x), v0)
        if level < 1:
            continue
        sf = standard_form(g, x, v0)
        for _ in range(60):
            xp = _random_reduced_word(g, rng, max_len, require_vertex=v0)
            if xp is None:
                continue
            if nc_length_set(g, down_set(g, xp), v0) != level:
                continue
            sfp = standard_form(g, xp, v0)
            if sfp.y != sf.y:
                return Y1Instance(v0=v0, x_word=x, xp_word=xp, nc_level=level)
    raise HypothesisNotMetError("no equal-level instance with distinct y-words")


def check_lemma_y1(
    spec: ThetaSpec, inst: Y1Instance, rng, tols: Tolerances = DEFAULT
) -> dict:
    """Theta(b*a*c*y* y'c'a'b') factors through Theta(b*a*); both stated forms."""
    g = spec.ctx.graph
    level = nc_length_set(g, down_set(g, inst.x_word), inst.v0)
    level_p = nc_length_set(g, down_set(g, inst.xp_word), inst.v0)
    if not (level == level_p > 0):
        raise HypothesisNotMetError("equal positive nc-lengths required")
    sf = standard_form(g, inst.x_word, inst.v0)
    sfp = standard_form(g, inst.xp_word, inst.v0)
    if sf.y == sfp.y:
        raise HypothesisNotMetError("y-words must differ")

    y_el = _word_element(spec, sf.y, rng)
    c_el = _word_element(spec, sf.c, rng)
    b_el = _word_element(spec, sf.b, rng)
    a_el = _word_element(spec, (inst.v0,), rng)
    yp_el = _word_element(spec, sfp.y, rng)
    cp_el = _word_element(spec, sfp.c, rng)
    bp_el = _word_element(spec, sfp.b, rng)
    ap_el = _word_element(spec, (inst.v0,), rng)

    yc = gp_mul(y_el, c_el)
    ab = gp_mul(a_el, b_el)
    ypcp = gp_mul(yp_el, cp_el)
    apbp = gp_mul(ap_el, bp_el)
    xp_full = gp_mul(ypcp, apbp)

    lhs = theta_eval(spec, gp_mul(gp_adjoint(gp_mul(yc, ab)), xp_full))
    t_ba = theta_eval(spec, gp_adjoint(ab))
    rhs1 = t_ba @ theta_eval(spec, gp_mul(gp_adjoint(yc), xp_full))
    rhs2 = (
        t_ba
        @ theta_eval(spec, gp_mul(gp_adjoint(yc), ypcp))
        @ theta_eval(spec, apbp)
    )
    res1 = _rel_residual(lhs, rhs1)
    res2 = _rel_residual(lhs, rhs2)
    return {
        "passed": res1 <= tols.equality,
        "residual": res1,
        "second_form_residual": res2,
        "second_form_passed": res2 <= tols.equality,
        "nc_level": level,
    }


@dataclass
class TechInstance:
    """y extendable by v0 on the left; a an arbitrary vertex element."""

    v0: int
    y_word: tuple


def check_techlem(
    spec: ThetaSpec, inst: TechInstance, rng, tols: Tolerances = DEFAULT
) -> dict:
    """Theta(y* a* a y) >= Theta(y*) theta_{v0}(a* a) Theta(y) >= 0, any a."""
    g = spec.ctx.graph
    if not is_reduced(g, inst.y_word):
        raise HypothesisNotMetError("y must be reduced")
    if not is_reduced(g, (inst.v0,) + inst.y_word):
        raise HypothesisNotMetError("(v0).y must stay reduced")
    alg = spec.ctx.algebras[inst.v0]
    a = alg.random_element(rng)  # deliberately not centered
    aa = alg.mul(alg.adjoint(a), a)
    y_el = _word_element(spec, inst.y_word, rng)
    a_el = gp_word(spec.ctx, [(inst.v0, a)])
    ay = gp_mul(a_el, y_el)
    lhs = theta_eval(spec, gp_mul(gp_adjoint(ay), ay))
    t_y = theta_eval(spec, y_el)
    t_y_adj = theta_eval(spec, gp_adjoint(y_el))
    t_aa = theta_eval(spec, gp_word(spec.ctx, [(inst.v0, aa)]))
    local_aa = spec.image(inst.v0, aa)
    mid_eq_res = _rel_residual(t_aa, local_aa)
    mid = t_y_adj @ local_aa @ t_y
    diff = linalg.is_psd(lhs - mid, tol=tols.gram_psd, tols=tols)
    nonneg = linalg.is_psd(mid, tol=tols.gram_psd, tols=tols)
    nc_branch = any(not g.adjacent(v, inst.v0) for v in inst.y_word)
    return {
        "passed": diff.passed and nonneg.passed and mid_eq_res <= tols.equality,
        "slack": diff.lambda_min,
        "middle_equality_residual": mid_eq_res,
        "nc_level": 1 if nc_branch else 0,
    }


@dataclass
class Y1SquareInstance:
    """Words sharing one y-word in standard form at a common v0."""

    v0: int
    y_word: tuple
    cb_words: list  # list of (c_word, b_word)


def find_y1_square_words(
    g: SimplicialGraph, rng, max_len: int = 4, max_n: int = 3
) -> Y1SquareInstance:
    """Bucket small reduced words by their standard-form y-word."""
    from .words import reduced_words

    v0 = int(rng.integers(0, g.n))
    buckets = {}
    for w in reduced_words(g, max_len):
        if v0 not in w:
            continue
        nf = normal_form(g, w)
        sf = standard_form(g, nf, v0)
        buckets.setdefault(sf.y, set()).add((sf.c, sf.b))
    if not buckets:
        raise HypothesisNotMetError("no words containing v0")
    ys = sorted(buckets, key=lambda y: (len(y), y))
    # prefer nonempty y-words when available, chosen by seed
    nonempty = [y for y in ys if y]
    pool = nonempty if (nonempty and rng.random() < 0.7) else ys
    y = pool[int(rng.integers(0, len(pool)))]
    cbs = sorted(buckets[y])
    take = min(max_n, len(cbs))
    idx = rng.choice(len(cbs), size=take, replace=False)
    return Y1SquareInstance(v0=v0, y_word=y, cb_words=[cbs[i] for i in sorted(idx)])


def check_y1_square(
    spec: ThetaSpec, inst: Y1SquareInstance, rng, tols: Tolerances = DEFAULT
) -> dict:
    """[Theta(x_i* x_j)] >= [Theta(b_i*a_i*) Theta(c_i*y_i*y_jc_j) Theta(a_jb_j)]."""
    g = spec.ctx.graph
    words = []
    for c_word, b_word in inst.cb_words:
        x_word = inst.y_word + c_word + (inst.v0,) + b_word
        if not is_reduced(g, x_word):
            raise HypothesisNotMetError("composite word is not reduced")
        sf = standard_form(g, normal_form(g, x_word), inst.v0)
        if sf.y != inst.y_word or (sf.c, sf.b) != (c_word, b_word):
            raise HypothesisNotMetError("standard form does not split as declared")
        words.append((c_word, b_word))
    n = len(words)
    d = spec.target_dim
    yc, ab, xs = [], [], []
    for c_word, b_word in words:
        y_el = _word_element(spec, inst.y_word, rng)
        c_el = _word_element(spec, c_word, rng)
        b_el = _word_element(spec, b_word, rng)
        a_el = _word_element(spec, (inst.v0,), rng)
        g_i = gp_mul(y_el, c_el)
        f_i = gp_mul(a_el, b_el)
        yc.append(g_i)
        ab.append(f_i)
        xs.append(gp_mul(g_i, f_i))
    lhs = np.zeros((n * d, n * d), dtype=complex)
    rhs = np.zeros((n * d, n * d), dtype=complex)
    xs_adj = [gp_adjoint(x) for x in xs]
    yc_adj = [gp_adjoint(e) for e in yc]
    t_ab = [theta_eval(spec, e) for e in ab]
    t_ab_adj = [theta_eval(spec, gp_adjoint(e)) for e in ab]
    for i in range(n):
        for j in range(n):
            lhs[i * d : (i + 1) * d, j * d : (j + 1) * d] = theta_eval(
                spec, gp_mul(xs_adj[i], xs[j])
            )
            mid = theta_eval(spec, gp_mul(yc_adj[i], yc[j]))
            rhs[i * d : (i + 1) * d, j * d : (j + 1) * d] = (
                t_ab_adj[i] @ mid @ t_ab[j]
            )
    verdict = linalg.is_psd(lhs - rhs, tol=tols.gram_psd, tols=tols)
    return {
        "passed": verdict.passed,
        "lambda_min": verdict.lambda_min,
        "n_words": n,
        "nc_level": 1 if inst.y_word else 0,
    }


# ---------------------------------------------------------------------------
# degenerations: complete graphs, edgeless graphs, a single vertex
# ---------------------------------------------------------------------------


def complete_graph_order_residual(spec: ThetaSpec, word, rng) -> float:
    """On a complete graph, the product must not depend on letter order."""
    from itertools import permutations

    images = [spec.image(v, spec.ctx.algebras[v].random_centered(rng)) for v in word]
    ref = None
    worst = 0.0
    for order in permutations(range(len(word))):
        m = spec.eye()
        for i in order:
            m = m @ images[i]
        if ref is None:
            ref = m
        else:
            worst = max(worst, float(np.linalg.norm(m - ref)))
    return worst / (1.0 + float(np.linalg.norm(ref)))


def _free_theta_value(spec: ThetaSpec, seq) -> np.ndarray:
    """Independent free-product evaluation: merge only adjacent equal vertices.

    This is the oracle route for edgeless graphs: no word machinery, no
    normal forms, just direct recursion on the letter sequence.
    """
    for i in range(len(seq) - 1):
        if seq[i][0] == seq[i + 1][0]:
            v = seq[i][0]
            alg = spec.ctx.algebras[v]
            merged = alg.mul(seq[i][1], seq[i + 1][1])
            centered, scalar = center(alg, merged)
            rest = seq[:i] + seq[i + 2 :]
            out = scalar * _free_theta_value(spec, rest)
            if alg.norm(centered) > 1e-14 * (1.0 + alg.norm(merged)):
                out = out + _free_theta_value(
                    spec, seq[:i] + [(v, centered)] + seq[i + 2 :]
                )
            return out
    out = spec.eye()
    for v, a in seq:
        out = out @ spec.image(v, a)
    return out


def free_gram_oracle(spec: ThetaSpec, fam: WordFamily, tols: Tolerances = DEFAULT):
    """Gram matrix over the family computed by the free-product oracle."""
    if spec.ctx.graph.edges:
        raise SpecInvalidError("the free oracle applies to edgeless graphs only")
    keys = fam.keys
    n = len(keys)
    d = spec.target_dim
    seqs = []
    for k in keys:
        seqs.append([(v, fam.letters[v]) for v in k])
    big = np.zeros((n * d, n * d), dtype=complex)
    for i in range(n):
        adj_i = [
            (v, spec.ctx.algebras[v].adjoint(a)) for v, a in reversed(seqs[i])
        ]
        for j in range(n):
            big[i * d : (i + 1) * d, j * d : (j + 1) * d] = _free_theta_value(
                spec, adj_i + seqs[j]
            )
    big = 0.5 * (big + big.conj().T)
    verdict = linalg.is_psd(big, tol=tols.gram_psd, tols=tols)
    return big, verdict


def degeneration_suite(
    spec: ThetaSpec, fam: WordFamily, rng, tols: Tolerances = DEFAULT
) -> dict:
    """Dispatch the degeneration checks suited to the spec's graph."""
    g = spec.ctx.graph
    out = {"graph": "generic", "passed": True}
    n_edges = len(g.edges)
    full = g.n * (g.n - 1) // 2
    if g.n == 1:
        report = gram(spec, fam, tols)
        cp_ok = spec.validation["valid"]
        out.update(
            graph="single_vertex",
            passed=report.verdict.passed and cp_ok,
            gram_passed=report.verdict.passed,
            cp_passed=cp_ok,
        )
    elif n_edges == full and g.n >= 2:
        worst = 0.0
        for key in fam.keys:
            if len(key) >= 2:
                worst = max(worst, complete_graph_order_residual(spec, key, rng))
        out.update(graph="complete", passed=worst <= 1e-10, worst_residual=worst)
    elif n_edges == 0:
        report = gram(spec, fam, tols)
        oracle_matrix, oracle_verdict = free_gram_oracle(spec, fam, tols)
        entry_res = float(np.linalg.norm(report.matrix - oracle_matrix)) / (
            1.0 + report.lambda_max
        )
        out.update(
            graph="edgeless",
            passed=(report.verdict.passed == oracle_verdict.passed)
            and entry_res <= 1e-10,
            verdicts_match=report.verdict.passed == oracle_verdict.passed,
            entry_residual=entry_res,
        )
    return out
