#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod nogp;
pub mod propagator;
pub mod scanner;
pub mod three_level;
pub mod xi;

pub use error::{NogpError, Result};
