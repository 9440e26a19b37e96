//! Randomized approximate graceful labelling of trees.
//!
//! The pipeline cuts a tree into small components, orders and two-colours it,
//! assigns each component a pair of complementary label intervals and then
//! labels vertices one at a time with uniform admissible choices plus
//! correction removals that keep the remaining label sets balanced. Around
//! it sit verifiers, an exhaustive oracle for small trees, the cyclic-shift
//! packing construction and a seeded Monte-Carlo harness.

pub mod concentration;
pub mod error;
pub mod exact;
pub mod harness;
pub mod intervals;
pub mod labeller;
pub mod labelset;
pub mod params;
pub mod prepare;
pub mod quasirandom;
pub mod rng;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use rng::SplitRng;
pub use tree::Tree;
