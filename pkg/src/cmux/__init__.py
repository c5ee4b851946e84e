"""Compressive acquisition of correlated signal ensembles.

Low-rank ensembles of bandlimited signals are multiplexed onto a single
sampling channel by random modulation (and optionally random filtering),
then recovered by nuclear-norm minimization.
"""

__version__ = "0.1.0"

from cmux._backend import BACKEND
from cmux.ensemble import (
    CoefficientMatrix,
    CoherenceReport,
    EnsembleSpec,
    Generator,
    SvdTriple,
    SymmetryMode,
    coherence,
    generate_ensemble,
    synthesize_samples,
    truncated_svd,
)
from cmux.errors import (
    CmuxError,
    ConstraintInfeasibleError,
    DenseCapError,
    DimensionError,
    FormatError,
    GenerationError,
    IllPosedError,
    SearchExhaustedError,
    UndefinedMetricError,
)
from cmux.harness import (
    Metrics,
    TrialSpec,
    min_rate_search,
    noise_sweep,
    phase_transition,
    run_trial,
    run_trials,
)
from cmux.operators import (
    FilterBank,
    MeasurementOperator,
    ModulationCodes,
    OperatorKind,
    SampleVector,
    add_noise,
    make_operator,
    materialize_dense,
    operator_norm,
    rip_probe,
)
from cmux.solvers import (
    MixingMatrix,
    SolverConfig,
    SolverReport,
    auto_lambda,
    klt_estimate,
    least_squares_known_mixing,
    matrix_lasso,
)

__all__ = [name for name in dir() if not name.startswith("_") or name == "__version__"]
