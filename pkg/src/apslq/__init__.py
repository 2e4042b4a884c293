"""Integer relation detection over quadratic rings of integers.

One solver engine covers classic PSLQ over Z, complex PSLQ over Z[i],
and the algebraic variant over Z[w] for complex quadratic fields; a
dimension-doubling reduction handles the real quadratic fields.  The
package also ships a seeded test-set generator and an experiment harness
that classifies results against planted relations.
"""

from .numerics import (
    ConstantSpec,
    PrecisionContext,
    eval_constant,
    nearly_zero,
    parse_constant_spec,
    parse_number,
)
from .quadring import (
    RATIONAL_RING,
    AlgebraicInt,
    LatticeParams,
    QuadraticRing,
    UnsupportedRingError,
    embed,
    format_element,
    format_relation,
    is_member_of_ring,
    lattice_params,
    make_ring,
    nearest_quadratic_integer,
    nearest_rational_integer,
    omega_value,
    parse_element,
    parse_relation,
    ring_from_id,
    ring_id,
)
from .pslq import (
    DegenerateCornerError,
    DegeneratePivotError,
    SolverConfig,
    SolverOutcome,
    SolverStatus,
    ThresholdMode,
    build_h_matrix,
    corner_matrix,
    reducing_matrix,
    relation_norm_bound,
    solve,
)
from .reduction import (
    ReductionOutcome,
    ReductionStatus,
    expand_vector,
    reconstruct,
    reduction_solve,
)
from .testgen import (
    CoeffSize,
    PoolKind,
    ProblemInstance,
    TestSet,
    TestSetSpec,
    complex_constant_pool,
    generate_instance,
    generate_test_set,
    load_test_set,
    real_constant_pool,
    save_test_set,
)
from .harness import (
    Classification,
    ExperimentReport,
    MethodConfig,
    Verdict,
    classify,
    postprocess_reduction,
    run_experiment,
)

__version__ = "0.1.0"
