//! Quantum speed limits in the generalized Bloch representation.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod bloch;
pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod oat;
pub mod rational;
pub mod reachable;
pub mod sampling;
pub mod spectrum;
pub mod threelevel;
pub mod table;

pub use error::{QslError, Result};
