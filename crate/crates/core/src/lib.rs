//! Numerical checks of correlation decay for factor-of-IID processes on
//! d-regular trees.
//!
//! The crate builds finite balls of `T_d`, realises the non-backtracking
//! operator on their directed edges, evaluates the closed-form correlation
//! and operator-norm bounds, and compares them with exact (enumerated) and
//! Monte Carlo correlations of concrete factor rules.

pub mod bounds;
pub mod correlation;
pub mod error;
pub mod factor;
pub mod nb;
pub mod numeric;
pub mod report;
pub mod rng;
pub mod tree;
pub mod universal;

pub use error::{Error, Result};
pub use tree::{DirectedEdge, EdgeId, HullDistance, Orientation, TreeBall, VertexId};
