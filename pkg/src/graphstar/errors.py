"""Exception hierarchy for graphstar.

Every error raised deliberately by this package derives from GraphstarError,
so callers can catch the whole family with one clause.  Names mirror the
failure they signal; none of them should appear during a healthy run except
the hypothesis-rejection ones (HypothesisNotMet), which instance generators
use to say "this candidate does not satisfy the preconditions".
"""


class GraphstarError(Exception):
    """Base class for all graphstar errors."""


# ---- linear algebra -------------------------------------------------------

class NotHermitianError(GraphstarError):
    """Input matrix is not Hermitian within tolerance."""


class NoConvergenceError(GraphstarError):
    """Eigenvalue iteration did not converge."""


class NotPsdError(GraphstarError):
    """Matrix has a negative eigenvalue beyond tolerance."""


class DimensionMismatchError(GraphstarError):
    """Incompatible matrix or isometry dimensions."""


# ---- words ----------------------------------------------------------------

class BadVertexError(GraphstarError):
    """A word letter is not a vertex of the graph."""


class CapExceededError(GraphstarError):
    """Equivalence class or search space larger than the stated cap."""


class VertexAbsentError(GraphstarError):
    """Requested vertex does not occur in the word."""


class NonUniqueError(GraphstarError):
    """Standard-form search found zero or several minimal candidates.

    This must never fire; it signals a bug (or a genuinely ambiguous
    factorization, which the uniqueness property rules out).
    """


# ---- algebra --------------------------------------------------------------

class AlgebraMismatchError(GraphstarError):
    """Operands live over different graphs or vertex-algebra assignments."""


class SpecInvalidError(GraphstarError):
    """A product-map specification failed its validity checks."""


class IncompatibleStatesError(GraphstarError):
    """Per-vertex state compatibility (psi . theta = phi) does not hold."""


class BandExceededError(GraphstarError):
    """A banded Laurent product left the configured degree window."""


# ---- verification ---------------------------------------------------------

class GramNotPsdError(GraphstarError):
    """Gram matrix failed its positivity check; quotient not constructible."""


class PairNotInXError(GraphstarError):
    """A requested word (or composite) is not a member of the complete set."""


class HypothesisNotMetError(GraphstarError):
    """Candidate instance does not satisfy a lemma's combinatorial hypotheses."""


# ---- groups / fock / dilation ---------------------------------------------

class SizeCapError(GraphstarError):
    """Ball enumeration exceeded the configured size cap."""


class BudgetExceededError(GraphstarError):
    """Computation would exceed the configured work budget."""


class NotContractionError(GraphstarError):
    """Operator norm exceeds 1 beyond tolerance."""


class NotDoublyCommutingError(GraphstarError):
    """An edge pair of contractions fails [T,S] = [T*,S] = 0."""


class UsageError(GraphstarError):
    """Bad command-line usage or malformed input file."""
