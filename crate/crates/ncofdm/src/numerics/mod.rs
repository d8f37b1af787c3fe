//! Dense complex linear algebra, the 1/M-normalized DFT, special functions
//! and window evaluators shared by the other modules.

mod dft;
mod matrix;
mod special;
mod window;

pub use dft::{dft, idft, DftPlan};
pub(crate) use matrix::solve_named as matrix_solve_named;
pub use matrix::{normal_equation_pinv, solve, CMatrix, Lu, Solved, SINGULAR_COND};
pub use special::{erf, erfc, exp_integral_e1, exp_integral_e1_scaled, gauss_2f1, q_function, sinc};
pub use window::{blackman, blackman_derivative, WindowKind};
