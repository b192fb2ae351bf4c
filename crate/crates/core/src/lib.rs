//! Effective weak convergence of finite Borel measures on the real line.
//!
//! Everything is exact: reals are query descriptors over rationals, sets
//! are enumerations of rational intervals, and every convergence claim is
//! a certificate (modulus or witness) that can be re-checked exactly.

pub mod cli;
pub mod error;
pub mod functions;
pub mod kernel;
pub mod measures;
pub mod portmanteau;
pub mod weakconv;

pub use error::{Error, Result};
