"""Exact model reduction for discrete-time quantum conditional evolutions.

Given a quantum instrument and a set of observables of interest, the
package computes an exactly equivalent conditional model of smaller
dimension: it finds the operator subspace reached by the dual dynamics,
closes it to a *-algebra, block-diagonalizes the algebra and projects the
model through the CPTP factorization of the conditional expectation.
"""

from .algebra import (
    CEFactorization,
    DegenerateAlgebraError,
    StarAlgebra,
    WedderburnDecomposition,
    algebra_closure,
    commutant,
    conditional_expectation,
    wedderburn,
)
from .model import (
    ConditionalEvolution,
    Instrument,
    OutcomeImpossibleError,
    OutputMap,
    condition,
    output_eval,
    step_unnormalized,
    trajectory_probability,
    validate_ce,
)
from .observability import (
    LinearReducedModel,
    check_invariance,
    invariant_closure,
    linear_reduce,
    nonobservable_complement,
)
from .operators import (
    DEFAULT_TOL,
    ChannelReport,
    OperatorSubspace,
    Superoperator,
    channel_checks,
    hs_inner,
    hs_norm,
    orthonormalize,
    superop_from_kraus,
    unvec,
    vec,
)
from .reduction import (
    AssumptionReport,
    EquivalenceReport,
    ReducedCE,
    SeparableReduction,
    check_assumptions,
    equivalence_check,
    random_ce,
    random_density,
    reduce_ce,
    reduce_separably,
)
from .trajectories import (
    StateEscapedError,
    TrajectoryRecord,
    enumerate_distribution,
    sample_trajectory,
    total_variation,
)
from .zoo import (
    haar_unitary,
    ising_chain,
    measured_quantum_walk,
    walk_is_generic,
    walk_markov_oracle,
)

__version__ = "0.1.0"
