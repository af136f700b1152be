//! Operator-valued integral operators on discretized measure spaces, Schur-type
//! `L_q -> L_p` bounds, Littlewood–Paley/Besov machinery on periodic grids, and
//! checkable sufficient conditions for operator-valued Fourier multipliers.

pub mod besov;
pub mod bochner;
pub mod error;
pub mod exponent;
pub mod kernel;
pub mod multiplier;
pub mod operator;
pub mod schur;
pub mod spaces;
pub mod symbol;
pub mod torus;

pub use num_complex::Complex64 as C64;

pub use besov::{besov_norm, build_partition, mu_estimate, BesovParams, DyadicPartition};
pub use bochner::{random_simple_function, BochnerFunction};
pub use error::{Error, Result};
pub use exponent::{make_exponents, Exponent, ExponentTriple};
pub use kernel::{CMatrix, OperatorKernel};
pub use multiplier::{FmReport, MultiplierReport};
pub use operator::{estimate_norm, BochnerOperator, NormEstimate, SearchBudget};
pub use spaces::{operator_norm, DiscreteMeasureSpace, NormKind, NormedSpace, OperatorNorm};
pub use symbol::Symbol;
pub use torus::{
    apply_multiplier, convolve, kernel_symbol, multiplier_kernel, MatrixField, MultiplierOperator,
    SymbolField, TorusGrid,
};
