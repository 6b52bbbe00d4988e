//! graphheat: a numerical laboratory for the parabolic equation
//! `rho * du/dt - Lap u = f` on infinite weighted graphs.
//!
//! The crate materializes balls of infinite graph families (lattices,
//! spherically symmetric trees, anti-trees), solves Cauchy-Dirichlet
//! problems on them by eigenfunction expansion with an independent
//! implicit time-stepping oracle, certifies explicit supersolution
//! (barrier) families numerically, and runs the exhaustion construction
//! that exhibits non-uniqueness when the density decays too fast.

pub mod barriers;
pub mod calculus;
pub mod cauchy;
pub mod cli;
pub mod config;
pub mod error;
pub mod exhaustion;
pub mod graph;
pub mod linalg;
pub mod maxprinciple;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
