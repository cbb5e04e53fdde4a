"""Dense complex linear algebra used everywhere else in the package.

Small dense Hermitian problems only: eigendecompositions, PSD verdicts with
explicit minimum eigenvalues, PSD square roots, operator norms, and seeded
random isometries.  Matrices are plain complex numpy arrays; the helpers here
add the validation and the tolerance conventions the rest of the package
relies on.  PSD tolerances are relative, scaled by (1 + lambda_max), so badly
scaled Gram matrices are judged fairly.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    DimensionMismatchError,
    NoConvergenceError,
    NotHermitianError,
    NotPsdError,
)

__all__ = [
    "as_cmatrix",
    "herm_residual",
    "HermEig",
    "herm_eig",
    "PsdVerdict",
    "is_psd",
    "psd_sqrt",
    "op_norm",
    "random_isometry",
    "rng_from",
]


def as_cmatrix(m) -> np.ndarray:
    """Coerce to a 2d complex array and reject non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise NotHermitianError("matrix has NaN or Inf entries")
    return a


def herm_residual(m: np.ndarray) -> float:
    """Relative distance from m to its own adjoint."""
    m = np.asarray(m)
    scale = 1.0 + op_norm(m)
    return float(np.linalg.norm(m - m.conj().T)) / scale


@dataclass
class HermEig:
    """Eigendecomposition of a Hermitian matrix.

    eigenvalues are real and ascending; eigenvectors has the matching
    eigenvectors as columns and is unitary.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.conj().T


def herm_eig(m, tols: Tolerances = DEFAULT) -> HermEig:
    """Eigendecomposition with Hermiticity validation.

    Raises NotHermitianError when the input is farther than tols.herm
    (relative) from Hermitian, and NoConvergenceError if the solver fails.
    The result satisfies Q Lambda Q* = M and Q*Q = I to tols.eig_recon.
    """
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    if herm_residual(a) > tols.herm:
        raise NotHermitianError(
            f"relative Hermiticity residual {herm_residual(a):.3e} > {tols.herm:.1e}"
        )
    h = 0.5 * (a + a.conj().T)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        raise NoConvergenceError(str(exc)) from exc
    return HermEig(eigenvalues=vals, eigenvectors=vecs)


@dataclass
class PsdVerdict:
    """Outcome of a positivity check, with the raw spectrum endpoints."""

    passed: bool
    lambda_min: float
    lambda_max: float
    tol: float

    @property
    def slack(self) -> float:
        """Signed margin: negative means the check failed."""
        return self.lambda_min + self.tol * (1.0 + self.lambda_max)


def is_psd(m, tol: float | None = None, tols: Tolerances = DEFAULT) -> PsdVerdict:
    """Judge positive semidefiniteness of a Hermitian matrix.

    Passes iff lambda_min >= -tol * (1 + lambda_max).  Always reports the
    extreme eigenvalues so the verdict can be re-evaluated under another
    tolerance.
    """
    if tol is None:
        tol = tols.psd
    eig = herm_eig(m, tols)
    lo = float(eig.eigenvalues[0])
    hi = float(eig.eigenvalues[-1])
    return PsdVerdict(passed=lo >= -tol * (1.0 + hi), lambda_min=lo, lambda_max=hi, tol=tol)


def psd_sqrt(m, tols: Tolerances = DEFAULT) -> np.ndarray:
    """Hermitian PSD square root.

    Eigenvalues in [-tols.psd_sqrt * (1 + lambda_max), 0) are clamped to zero;
    anything more negative raises NotPsdError.  This is the only place in the
    package where negative eigenvalues are clamped.
    """
    eig = herm_eig(m, tols)
    vals = eig.eigenvalues.copy()
    hi = float(vals[-1]) if vals.size else 0.0
    floor = -tols.psd_sqrt * (1.0 + max(hi, 0.0))
    if vals.size and float(vals[0]) < floor:
        raise NotPsdError(
            f"minimum eigenvalue {vals[0]:.3e} below clamp window {floor:.3e}"
        )
    np.clip(vals, 0.0, None, out=vals)
    q = eig.eigenvectors
    return (q * np.sqrt(vals)) @ q.conj().T


def op_norm(m) -> float:
    """Operator (spectral) norm: the largest singular value."""
    a = np.asarray(m, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def rng_from(seed) -> np.random.Generator:
    """Build a Generator from an int seed, a SeedSequence, or pass one through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_isometry(n_from: int, n_to: int, seed) -> np.ndarray:
    """Seeded random isometry V with V*V = I_{n_from}, shape (n_to, n_from).

    Requires n_from <= n_to.  Deterministic in the seed: the QR phase is fixed
    by making the R diagonal real positive.
    """
    if n_from > n_to:
        raise DimensionMismatchError(f"cannot embed dimension {n_from} into {n_to}")
    rng = rng_from(seed)
    g = rng.standard_normal((n_to, n_from)) + 1j * rng.standard_normal((n_to, n_from))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r).copy()
    d[d == 0] = 1.0
    return q * (d / np.abs(d)).conj()


def random_density(dim: int, seed, mix: float = 0.2) -> np.ndarray:
    """Seeded random density matrix (PSD, trace one), mixed toward I/dim.

    The mixing keeps the state faithful, which downstream GNS constructions
    appreciate; pass mix=0.0 for a fully random (possibly nearly singular)
    state.
    """
    rng = rng_from(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    rho = (1.0 - mix) * rho + mix * np.eye(dim) / dim
    return 0.5 * (rho + rho.conj().T)
