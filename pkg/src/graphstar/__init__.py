"""graphstar: word combinatorics of graph products and numerical verification
of graph products of unital completely positive maps.

A graph product interpolates between a free product (edgeless graph) and a
tensor/direct product (complete graph): vertex objects commute exactly when
their vertices share an edge.  This package implements the underlying word
calculus (reduction, normal forms, non-commutative length, standard form,
complete sets), formal graph-product algebras with their vacuum state, the
truncated graph-product Hilbert space, Gram-matrix positivity verification of
graph products of ucp maps together with the finite concatenation-Stinespring
construction, graph products of finite groups and positive-definite
functions, and unitary dilation checks at desk scale.
"""

from .config import DEFAULT, Tolerances
from .words import (
    SimplicialGraph,
    is_reduced,
    reduce_word,
    equivalence_class,
    normal_form,
    nc_length,
    truncations,
    complete_closure,
    is_complete,
    StdForm,
    standard_form,
)
from .linalg import herm_eig, is_psd, psd_sqrt, op_norm, random_isometry
from .algebra import (
    MatrixAlgebra,
    GroupAlgebraV,
    LaurentAlgebra,
    GraphAlgebra,
    GpElement,
    gp_word,
    gp_unit,
    gp_mul,
    gp_adjoint,
    vacuum_state,
    ThetaSpec,
    theta_eval,
    random_theta,
    choda_check,
)

__version__ = "0.1.0"
