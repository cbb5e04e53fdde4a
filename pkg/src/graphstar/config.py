"""Centralized numerical tolerances.

All verdict-producing operations take their thresholds from a Tolerances
instance (DEFAULT unless the caller overrides), and every verdict carries the
raw residuals it was judged on, so a tolerance change re-evaluates old reports
without recomputation.
"""

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class Tolerances:
    # linear algebra
    herm: float = 1e-10          # relative Hermiticity check
    eig_recon: float = 1e-10     # relative eigendecomposition reconstruction
    psd: float = 1e-8            # relative PSD verdicts (lambda_min >= -psd*(1+lambda_max))
    psd_sqrt: float = 1e-9       # clamp window and sqrt(M)^2 = M check
    isometry: float = 1e-10      # V*V = I check

    # algebra / product maps
    center: float = 1e-12        # |phi(a)| <= center * norm(a) for centered letters
    choi: float = 1e-9           # complete positivity of vertex maps
    commute: float = 1e-10       # edge commutation of map ranges
    equality: float = 1e-9       # relative residual for operator equalities
    choda: float = 1e-9          # state-compatibility composition check
    state_compat: float = 1e-10  # per-vertex psi . theta = phi precondition

    # Gram / concatenation space
    gram_psd: float = 1e-8
    rank_cutoff: float = 1e-10   # eigenvalue cutoff, relative to lambda_max
    compression: float = 1e-8    # theta(x*y) = V1* Lx* Ly V1 residual
    lx_bound: float = 1e-7       # opnorm(Lx) <= norm(x) * (1 + lx_bound)

    # Fock space
    gns_cutoff: float = 1e-12    # null-vector cutoff in the GNS form
    independence: float = 1e-10  # vanishing of reduced-word moments
    moment_match: float = 1e-10  # fock moment vs formal vacuum state

    # dilation
    dilation: float = 1e-9       # unitarity and power-compression residuals
    double_commute: float = 1e-10

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()
