//! Desk-scale numerics for mean dimension with potential.
//!
//! Finite periodic-point models stand in for compact dynamical systems. On
//! them the crate computes covering numbers and pressure with a potential,
//! Hausdorff contents, nerve-based width dimension bounds, rate-distortion
//! curves, Frostman measures, optimal couplings and dynamical Voronoi tilings,
//! and checks the inequalities that relate these quantities.

// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cliques;
pub mod config;
pub mod covering;
pub mod error;
pub mod harness;
pub mod hausdorff;
pub mod info;
pub mod lp;
pub mod measures;
pub mod nerve;
pub mod setcover;
pub mod spaces;
pub mod tiling;
pub mod transport;

pub use error::{Error, Result};
pub use spaces::{
    average_metric, birkhoff_sum, bowen_metric, build_symbolic, DistMatrix, FiniteSystem, Potential,
    SymbolicModel,
};

/// `log2(1/eps)`
#[inline]
pub fn log_inv(eps: f64) -> f64 {
    -eps.log2()
}
