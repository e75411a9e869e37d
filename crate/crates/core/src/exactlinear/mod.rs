//! Exact scalar and polynomial-matrix arithmetic over the rationals and
//! prime fields, including Smith normal form over the Euclidean coordinate
//! rings and exact linear solving. Everything here is immutable after
//! construction and safe to use concurrently.

mod factor;
mod kmat;
mod matrix;
mod poly;
mod scalar;
mod snf;
mod solve;

pub use factor::{factor_squarefree_part, irreducible_factors, is_irreducible};
pub use kmat::KMat;
pub use matrix::RingMat;
pub use poly::{Ring, RingElem, RingId};
pub use scalar::{Field, Scalar};
pub use snf::{smith_normal_form, smith_normal_form_with_budget, Snf};
pub use solve::{
    kernel_basis, ring_divide, solve_linear, solve_linear_with_budget, LinearSolution,
};

/// Default cap on polynomial degrees appearing in matrix algorithms.
/// Operations that would push intermediate degrees past the cap fail with
/// [`crate::Error::DegreeBudgetExceeded`] instead of running unbounded.
pub const DEFAULT_DEGREE_BUDGET: i64 = 512;
