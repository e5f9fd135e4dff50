//! Square-free values of `n^2 + 1` and `n^2 + 2` at the same argument:
//! modular arithmetic, root sets, a segmented sieve, the singular series,
//! and the exponential sums behind the error term.

pub mod error;
pub mod expsum;
pub mod gamma_census;
pub mod modmath;
pub mod quadroots;
pub mod representation_map;
pub mod sieve;
pub mod cli;
pub mod singular_series;
pub mod verify;

pub use error::{Error, Result};
