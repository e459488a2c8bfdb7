//! Planar Cauchy-Green transform on a uniform grid and the weighted norms of
//! the curve solver.
//!
//! The transform uses piecewise-constant panels centred on the nodes; the kernel
//! `1/(tau - zeta)` is integrated exactly over every panel, including the one
//! containing the target, so no singular-cell rule is needed. Evaluation is a
//! direct `O(N^4)` sum with a fixed accumulation order per target node.

mod grid;
mod kernel;
mod norms;

pub use grid::PlaneGrid;
pub use kernel::{cauchy_green, cauchy_green_at, cell_integral, cell_weight, CauchyKernel};
pub use norms::{
    dbar_residual, holder_norms, holder_norms_seeded, holder_seminorm, lp_norm, weighted_c0_norm, DbarResidual, HolderNorms, NormParams,
    LONG_RANGE_PAIRS, PAIR_SEED,
};
