mod eigen;
mod expm;
mod lu;
mod matrix;
mod tridiag;

pub use eigen::{eig_general, sort_order, Eigensystem, NEAR_DEFECTIVE_COND, RESIDUAL_BOUND};
pub use expm::{mat_exp, EXP_NORM_LIMIT};
pub use lu::{inverse, Lu};
pub use matrix::{inner, mat_mul, vec_norm, ComplexMatrix, C64, I, ONE, ZERO};
pub use tridiag::Tridiagonal;
