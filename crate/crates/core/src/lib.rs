//! Ground states of the spin-1/2 Heisenberg ring, their two-point `S^z`
//! correlation matrices, and the singular value decomposition of those
//! matrices into rank-1 domain components.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod corr;
pub mod ed;
pub mod error;
pub mod four_site;
pub mod io;
pub mod linalg;
pub mod mps;
pub mod svd;

pub use error::{Error, Result};
