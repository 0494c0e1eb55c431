//! Edge expansion, nontrivial spectra and mixing times of nonnegative
//! matrices, with an explicit doubly stochastic family whose nontrivial
//! eigenvalues all vanish while its expansion stays O(1/√n).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod bounds;
pub mod config;
pub mod construction;
pub mod error;
pub mod expansion;
pub mod matrix;
pub mod mixing;
pub mod pf;
pub mod report;
pub mod spectral;

pub use config::Config;
pub use error::{Error, Result};
pub use matrix::{Mode, NonnegMatrix};
