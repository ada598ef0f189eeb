use indexmap::IndexMap;

use super::relation::{anti_filter, atom_relation, complement_rel, filter_algebraic, join, Relation, Tuple};
use super::{Atom, CondId, GplError};
use crate::expr::Expr;
use crate::par::Exec;
use crate::point::{Point, Var};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintCheck {
    pub holds: bool,
    pub premises: Vec<CondId>,
    pub timed_out: bool,
}

/// What branch evaluation needs from a condition store.
pub trait RelationSource: Sync {
    /// Stored tuples of a predicate at the given arity, each with its
    /// condition id. Every equivalent representation is listed.
    fn extension(&self, predicate: &str, arity: usize) -> Option<&IndexMap<Tuple, CondId>>;

    /// Known problem points.
    fn universe(&self) -> Vec<Point>;

    /// Checks an algebraic constraint under a binding of its variables.
    fn check_constraint(&self, constraint: &Expr, binding: &[(Var, Point)]) -> ConstraintCheck;
}

#[derive(Clone, Debug, Default)]
pub struct BranchOutcome {
    pub relation: Relation,
    pub algebra_calls: usize,
    pub timeouts: usize,
}

static EMPTY: std::sync::OnceLock<IndexMap<Tuple, CondId>> = std::sync::OnceLock::new();

/// Left-to-right fold of the branch atoms starting from `start` (the unit
/// relation when absent). Stops as soon as the running relation is empty.
pub fn execute_branch<S: RelationSource + ?Sized>(
    atoms: &[Atom],
    source: &S,
    start: Option<Relation>,
    exec: Exec,
) -> Result<BranchOutcome, GplError> {
    let mut rel = start.unwrap_or_else(Relation::unit);
    let mut outcome = BranchOutcome::default();
    let empty = EMPTY.get_or_init(IndexMap::new);
    for atom in atoms {
        if rel.is_empty() {
            break;
        }
        match atom {
            Atom::Rel(a) => {
                let ext = source.extension(&a.predicate, a.vars.len()).unwrap_or(empty);
                rel = join(&rel, &atom_relation(a, ext));
            }
            Atom::Not(a) => {
                let ext = source.extension(&a.predicate, a.vars.len()).unwrap_or(empty);
                let neg = atom_relation(a, ext);
                if neg.vars.iter().all(|v| rel.vars.contains(v)) {
                    rel = anti_filter(&rel, &neg);
                } else {
                    rel = join(&rel, &complement_rel(&neg, &source.universe()));
                }
            }
            Atom::Alg(e) => {
                let unbound: Vec<Var> = e.points().into_iter().filter(|v| !rel.vars.contains(v)).collect();
                if !unbound.is_empty() {
                    return Err(GplError::UnboundConstraint(unbound));
                }
                outcome.algebra_calls += rel.len();
                let (next, timeouts) = filter_algebraic(&rel, exec, |b| source.check_constraint(e, b));
                outcome.timeouts += timeouts;
                rel = next;
            }
        }
    }
    outcome.relation = rel;
    Ok(outcome)
}
