"""Exact-arithmetic vertex algebra computations over the projective line.

The package implements, over the rationals and with no floating point
anywhere:

* a rank-2 indefinite lattice Fock space and its vertex algebra products,
* the beta-gamma system on the two standard charts of the projective line,
  with the localized algebra on the overlap,
* the bosonization maps between the two and the associated differentials,
* finite truncated blocks of the resulting two-term complex and its
  one-parameter deformation, together with their cohomology.

Everything is deterministic; random sampling used by the verification
suites is seeded explicitly.
"""

from .linalg import (
    CompositionNotZero,
    SparseMatrix,
    TooManyNonzeros,
    cohomology_dim,
    kernel_basis,
    rank,
    solve,
)
from .fock import (
    LatticeVector,
    FockMonomial,
    VState,
    P,
    Q,
    apply_mode,
    charge,
    enumerate_basis,
    format_state,
    pair,
    parse_state,
    qcharge,
    weight,
)
from .voa import (
    MixedCharge,
    MixedParity,
    borcherds_residual,
    deformed_product,
    degenerate_product,
    epsilon,
    parity,
    product,
    translate,
    vertex_operator_mode,
)
from .betagamma import (
    BGMonomial,
    BGState,
    C0,
    CINF,
    CSTAR,
    ChartMismatch,
    bg_hcharge,
    bg_product,
    bg_weight,
    chart_basis,
    format_bg_state,
    parse_bg_state,
)
from .bosonization import (
    cech_dims,
    d_geq,
    d_leq,
    glue,
    homotopy_check,
    lattice_involution,
    rho_cstar_inverse,
    rho_geq,
    rho_leq,
)
from .cohomology import (
    ChainBroken,
    CheckFailed,
    CutoffTooSmall,
    NotACocycle,
    TruncatedBlock,
    build_block,
    class_reduce,
    cohomology_table,
    h1_hwv_chain,
    sing_check,
)
from .characters import h0_series, h1_series, two_colored_partition_counts

__all__ = [name for name in dir() if not name.startswith("_")]
