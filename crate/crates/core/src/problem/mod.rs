//! One problem's state: conditions with provenance, goal, export.

mod goal;
mod hypertree;
mod init;
mod store;

pub use goal::{check_goal, Goal, GoalKind, GoalStatus};
pub use hypertree::{export_hypertree, replay_hypertree, GoalDoc, HyperEdge, HyperNode, Hypertree, ReplayError};
pub use init::{init_problem, InitError, Problem};
pub use store::{Condition, ConditionStore, Fact, StoreError, EXTENDED, PREREQUISITE};
pub(crate) use store::instantiate;
