//! Desk-scale approximations of Gromov boundaries.
//!
//! A hyperbolic group is enumerated as a ball of its Cayley graph; spheres
//! become Rips complexes, truncation of normal forms gives the bonding maps,
//! and the audit functions test the metric inequalities along the way.

pub mod ball;
pub mod cache;
pub mod complex;
pub mod conditions;
pub mod delta;
pub mod horoball;
pub mod inverse;
pub mod oracle;
pub mod par;
pub mod presentation;
pub mod presets;
pub mod report;
pub mod word;

pub use ball::{BallError, BallOptions, CayleyBall, DistanceBounds};
pub use presentation::{GroupPresentation, OracleKind};
pub use word::{HalfInt, Letter, NormalWord, Word};
