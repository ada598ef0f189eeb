//! Symbolic plane-geometry reasoning.
//!
//! The crate is organised bottom-up:
//!
//! * [`lang`] parses definition files (predicates and theorems) and problem
//!   statements, and renders stored facts back to text.
//! * [`topology`] builds composite shapes from point-sequence units.
//! * [`gpl`] evaluates theorem premises as relational algebra.
//! * [`algebra`] keeps the equation set and solves targets through a minimum
//!   dependency subset.
//! * [`problem`] holds a single problem: conditions, provenance, goal.
//! * [`search`] applies theorems interactively or searches forward/backward.
//! * [`harness`] batch runs, augmentation and reports.

pub mod algebra;
pub mod expr;
pub mod gpl;
pub mod harness;
pub mod kb;
pub mod lang;
pub mod par;
pub mod point;
pub mod problem;
pub mod search;
pub mod topology;

pub use expr::Expr;
pub use kb::Kb;
pub use point::{Point, PointSeq};
pub use problem::{ConditionStore, Problem};
