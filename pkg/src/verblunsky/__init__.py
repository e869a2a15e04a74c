"""Point-mass insertion for orthogonal polynomials on the unit circle and the
induced polynomially decaying perturbation of Jacobi coefficients."""

from verblunsky.scaled import ScaledComplex, ScaledReal
from verblunsky.opuc import (
    ConstantInterleaved,
    ExplicitSequence,
    InterleavedSequence,
    InvalidCoefficient,
    SzegoEvaluation,
    VerblunskySequence,
    eval_at_one,
    kernel_ratio_step,
    make_interleaved,
    szego_states,
    szego_step,
)
from verblunsky.point_mass import (
    PerturbationRecord,
    PerturbedSequence,
    PointMassSpec,
    delta_even_fast,
    delta_n,
    delta_odd_fast,
    fast_deltas,
    geronimus_alpha,
    perturb_at_minus_one,
    perturb_sequence,
    simon_alpha,
)
from verblunsky.szego_map import (
    JacobiCoefficients,
    ScalingMap,
    direct_geronimus,
    inverse_symmetric,
    scale,
    support_arcs,
)

__version__ = "0.1.0"
