"""finclass: finite classifying spaces for families of subgroups.

Finite topological spaces (as specialization preorders), finite group
actions, the cardinal-indexed classifying spaces E_F^k(G) with their tube
decompositions, classifying maps and pullback verification, enumeration of
free regular covers over finite bases with a brute-force oracle, and the
exact piecewise-linear cover-reduction formulas.
"""

from .finspace import (
    FinSpace,
    SpaceMap,
    bi_sierpinski,
    canonical_form,
    discrete,
    indiscrete_cone,
    is_continuous,
    opens_of,
    product,
    quotient,
    sierpinski,
    space_from_relation,
    specialization_of_topology,
    subspace,
    weight,
)
from .groups import (
    FinGroup,
    Subgroup,
    all_subgroups,
    are_conjugate,
    builtin_group,
    coset_space,
    group_from_table,
    orbit_type_preorder,
)
from .gspaces import (
    FilteredSpace,
    GSpace,
    is_equivariant,
    is_filtered_map,
    is_isovariant,
    is_stratified_map,
    orbit_space,
    orbit_type_filtration,
)
from .classifying import (
    BudgetExceeded,
    ClassifyingSpace,
    build_B,
    build_E,
    isovariant_part,
    slice_S,
    tube_T,
    verify_mu,
    verify_tube_decomposition,
)
from .pullbacks import (
    Bundle,
    CoverFailure,
    TubeChart,
    classifying_map,
    cover_kind,
    equivariant_factorization,
    find_tube_cover,
    homotopy_phi,
    pullback,
    verify_psi,
)
from .enumeration import (
    CellComplex,
    bundle_iso_over_base,
    circle_complex,
    enumerate_bundles,
    enumerate_monotone_maps,
    face_space,
    interval_complex,
    oracle_bundles,
)
from .analytic import (
    ConePoint,
    IntervalSet,
    PLFunc,
    cone_metric,
    iota,
    reduce_cover,
    urysohn_ratio,
)

__version__ = "0.1.0"
