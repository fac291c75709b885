//! Dense linear algebra, special functions and assignment shared by the
//! rest of the crate.

pub mod assign;
pub mod linalg;
pub mod matrix;
pub mod special;

pub use assign::{hungarian_min_assign, Permutation};
pub use linalg::{ridge_solve, spd_inverse, Cholesky, PivotedCholesky};
pub use matrix::{dot, squared_distance, Matrix};
pub use special::{log_sum_exp, normal_cdf, normal_cdf_pdf, normal_pdf, softmax};
