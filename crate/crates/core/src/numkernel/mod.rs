//! Small dense numeric kernels shared by the physics modules.
//!
//! Everything here works on `Complex64` scalars and matrices of order at most
//! [`MAX_ORDER`]. Polynomial coefficient slices are always in *descending*
//! order: `coeffs[0]` multiplies the highest power.
//!
//! Tolerances are relative to a per-call scale; there are no absolute
//! epsilons.

mod aberth;
mod branches;
mod cubic;
mod matrix;
mod poly;
mod routh;

pub use aberth::{solve_poly_aberth, solve_poly_aberth_with, AberthOptions};
pub use branches::{apply_permutation, match_branches, matching_cost};
pub use cubic::{cardano_parts, solve_cubic_cardano, CardanoParts, CubicRoots};
pub use matrix::{char_poly, eigvals_small, null_vector, Lu, SmallMatrix};
pub use poly::{backward_error, eval_compensated, eval_with_derivative, horner, poly_from_roots};
pub use routh::{routh_hurwitz_stable, routh_rhp_count};

use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Largest matrix order / polynomial degree the kernels accept.
pub const MAX_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("non-finite or degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("order {0} outside the supported range 1..={max}", max = MAX_ORDER)]
    InvalidOrder(usize),
    #[error("root finder did not converge after {iterations} iterations (best relative residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },
    #[error("entire Routh row {row} vanished")]
    DegenerateArray { row: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub(crate) fn all_finite(zs: &[C64]) -> bool {
    zs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Distance between two root multisets: the optimal-matching maximum
/// absolute difference.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> Result<f64, NumError> {
    let perm = match_branches(a, b)?;
    Ok(a.iter()
        .zip(perm.iter())
        .map(|(x, &j)| (x - b[j]).norm())
        .fold(0.0, f64::max))
}
