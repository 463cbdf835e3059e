"""Homogeneous cones built from Vinberg algebras over finite posets.

The package covers the algebra of a poset (block products, involution,
trace), the generalized Cholesky factorization of the cone and its dual,
boundary orbits, generalized powers and gamma functions, the Gindikin set,
Riesz measures with exact samplers and Laplace transforms, and the natural
exponential families they generate.
"""

from ._kernels import HAVE_NUMBA
from .algebra import (
    Algebra,
    AlgebraElement,
    AxiomReport,
    DimensionSystem,
    StructureConstants,
    axiom_check,
    build_algebra,
    dimension_profile,
    involute,
    multiply,
    pairing,
    trace,
)
from .errors import *  # noqa: F401,F403
from .gindikin import (
    Classification,
    MeasureKind,
    SignatureFamily,
    XiWitness,
    classify_measure,
    enumerate_signatures,
    in_xi,
    is_absolutely_continuous,
    witness_from_tuple,
    xi_component_check,
    xi_membership,
    xi_witnesses,
)
from .nef import (
    RieszFamily,
    SymmetricOperator,
    cumulant_k,
    hessian_k,
    inverse_derivative,
    mean_inverse,
    mean_map,
    quadratic_rep,
    quadratic_rep_factor,
    upset_variance_sum,
    variance_function,
    verification_oracles,
)
from .poset import (
    Poset,
    antichain,
    chain,
    opposite_poset,
    order_sets,
    parse_poset,
    random_poset,
    scalar_obstruction,
    structure_sets,
    subposet,
)
from .power import (
    Multiplier,
    gamma_cone,
    gamma_orbit,
    gen_power,
    log_gamma_cone,
    log_gamma_orbit,
    log_gen_power,
    minors,
    n_profile,
)
from .sampling import (
    density_ac,
    laplace_closed,
    log_density_ac,
    log_laplace_closed,
    make_rng,
    mc_laplace,
    random_dual_points,
    sample_orbit_component,
    sample_riesz,
    sample_standard_ac,
)
from .triangular import (
    LowerTriangular,
    OrbitSignature,
    cholesky,
    cholesky_dual,
    classify_orbit,
    components,
    group_act,
    inverse_dual,
    inverse_primal,
    orbit_point,
    project_upsets,
    tri_invert,
    tri_product,
)

__version__ = "0.1.0"
