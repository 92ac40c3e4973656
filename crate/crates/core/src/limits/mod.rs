//! Limiting objects for large populations: scaling constants, limit
//! transition matrices and generators, Xi rates and the CTMC simulator.
//!
//! The limit side works in `f64` since the limits are analytic; exact
//! rationals are kept only where a finite-N matrix is compared with them.

mod completion;
mod generator;
mod rates;
mod scaling;
mod strong;
mod weak;
mod xi;

pub use completion::{check_consisdiag, check_phimon, complete_rates_by_consistency, diagonal_tensors};
pub use generator::{limit_generator, simulate_coalescent, CoalescentTrajectory, GeneratorMatrix};
pub use rates::{kingman_rates, total_binary_rate, Fallback, RateTable};
pub use scaling::{standard_scaling, StandardScaling};
pub use strong::{
    discrete_limit_matrix, discrete_limit_matrix_exact, strong_mutation_correction, strong_mutation_limit,
    strong_mutation_expansion, strong_mutation_model, StrongMutationExpansion,
};
pub use weak::{weak_mutation_family, weak_mutation_residual, WeakMutationPoint};
pub use xi::{qj_moment, qj_moment_check, xi_rate, xi_rate_table, FiniteMeasure, XiAtom, XiSpec};

/// Tolerance for algebraic identities between floating-point rates.
pub const RATE_TOL: f64 = 1e-12;
