#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod exec;
pub mod exponents;
pub mod harness;
pub mod iteration;
pub mod quad;
pub mod solver;
pub mod specfun;
pub mod testfun;

pub use error::{Error, Result};
