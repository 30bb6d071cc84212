"""Pure-state tomography by iterated physical imposition.

Reconstructs pure states from basis-measurement distributions, enumerates
all states sharing the same statistics (Pauli partners) by multi-seed
fixed-point iteration, and tracks how their number changes as the
generating state moves.
"""
from .catalog import (
    BasisFamily,
    fourier_basis,
    pauli_bases,
    povm_lower_bound,
    resolve_family,
    spin_observable_bases,
    unbiasedness,
)
from .hilbert import (
    TOL,
    DimensionMismatch,
    ObservableBasis,
    ProbDist,
    PureState,
    born_probabilities,
    canonicalize_ray,
    inner,
    random_basis,
    random_state,
)
from .imposition import TomographyProblem, impose, impose_composite, impose_relaxed, lipschitz_ratio
from .metrics import MetricReport, bures, check_bound, distributional, hellinger, hellinger_states
from .solver import (
    FixedPointRecord,
    SolutionSet,
    SolverConfig,
    bifurcation_sweep,
    completeness_probe,
    enumerate_partners,
    geodesic,
    iterate,
    make_seed,
    perturbation_probe,
    synthesize_problem,
)

__version__ = "0.1.0"
