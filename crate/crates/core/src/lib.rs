//! Sigmoidal (sech²-kernel) fractional derivatives with Caputo and
//! Caputo–Fabrizio comparison operators, transform multipliers, ℓ1 smoothing,
//! fractional gradient descent, Volterra solvers, and a theorem-check suite.

// NaN must fail validation, so checks are written as !(x > 0.0).
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes keep their published digits.
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod fde;
pub mod fracderiv;
pub mod grid;
pub mod kernels;
pub mod l1reg;
pub mod optimizer;
pub mod quadrature;
pub mod special;
pub mod suite;
pub mod transforms;
pub mod weights;

pub use error::{FracError, Result};
pub use fde::{
    build_volterra, contraction_check, picard_solve, thm29_residual, PicardConfig, VolterraSystem,
};
pub use fracderiv::{sig_deriv, DerivResult};
pub use grid::GridFunction;
pub use kernels::{
    c1_constant, eval_kernel, sech2_antiderivative, Convention, FractionalOrder, KernelFamily,
    KernelSpec,
};
pub use optimizer::{fgd_run, fgd_step, DescentConfig, DescentTrace};
pub use quadrature::{QuadConfig, QuadResult};
pub use suite::{run_suite, Report, Status, SuiteConfig};
