//! Constant schemes for the real and complex Bohnenblust-Hille inequality,
//! together with exact-enumeration checks of the inequalities they rest on
//! (Khinchine, Blei mixed norms, Rademacher chaos, multiple summing forms).
//!
//! Every real m-linear form here lives on `(l_inf^N)^m`, where the operator
//! norm is attained at sign vectors and can be computed by enumeration.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod error;
pub mod exponents;
pub mod forms;
pub mod special_fn;
pub mod verify;

pub use constants::{Field, Log2Constant, SchemeId};
pub use error::{Error, Result};
pub use forms::{MultilinearForm, VectorFamily};
pub use special_fn::{KhinchineBranch, KhinchineConstant};
pub use verify::{SearchState, VerificationReport};

/// Exact rational numbers used for exponent bookkeeping.
pub type Rational = num_rational::Ratio<i64>;
