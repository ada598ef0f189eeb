use super::store::ConditionStore;
use crate::algebra::Value;
use crate::expr::Expr;
use crate::gpl::CondId;
use crate::kb::Kb;
use crate::lang::{render_fact, RelFact};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoalKind {
    Value(Expr),
    Equal(Expr, Expr),
    Relation(RelFact),
}

impl GoalKind {
    pub fn name(&self) -> &'static str {
        match self {
            GoalKind::Value(_) => "value",
            GoalKind::Equal(..) => "equal",
            GoalKind::Relation(_) => "relation",
        }
    }

    pub fn payload(&self, kb: &Kb) -> String {
        match self {
            GoalKind::Value(e) => e.to_string(),
            GoalKind::Equal(l, r) => format!("{l},{r}"),
            GoalKind::Relation(r) => render_fact(kb, &r.predicate, &r.points),
        }
    }

    pub fn text(&self, kb: &Kb) -> String {
        match self {
            GoalKind::Value(e) => format!("Value({e})"),
            GoalKind::Equal(l, r) => format!("Equal({l},{r})"),
            GoalKind::Relation(_) => format!("Relation({})", self.payload(kb)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GoalStatus {
    Unsolved,
    Solved {
        answer: Option<Value>,
        premises: Vec<CondId>,
    },
}

impl GoalStatus {
    pub fn is_solved(&self) -> bool {
        matches!(self, GoalStatus::Solved { .. })
    }

    pub fn premises(&self) -> &[CondId] {
        match self {
            GoalStatus::Solved { premises, .. } => premises,
            GoalStatus::Unsolved => &[],
        }
    }

    pub fn answer(&self) -> Option<&Value> {
        match self {
            GoalStatus::Solved { answer, .. } => answer.as_ref(),
            GoalStatus::Unsolved => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub kind: GoalKind,
    pub status: GoalStatus,
}

impl Goal {
    pub fn new(kind: GoalKind) -> Goal {
        Goal { kind, status: GoalStatus::Unsolved }
    }

    /// Re-checks the goal and records the result.
    pub fn update(&mut self, store: &ConditionStore) -> bool {
        if !self.status.is_solved() {
            self.status = check_goal(store, &self.kind);
        }
        self.status.is_solved()
    }
}

/// Checks a goal against the current store.
pub fn check_goal(store: &ConditionStore, kind: &GoalKind) -> GoalStatus {
    match kind {
        GoalKind::Relation(r) => match store.contains(&r.predicate, &r.points) {
            Some(id) => GoalStatus::Solved { answer: None, premises: closure(store, [id]) },
            None => GoalStatus::Unsolved,
        },
        GoalKind::Value(e) => {
            let out = store.solve_expr(e);
            match out.value {
                Some(v) => GoalStatus::Solved { answer: Some(v), premises: closure(store, out.premises) },
                None => GoalStatus::Unsolved,
            }
        }
        GoalKind::Equal(l, r) => {
            let out = store.solve_expr(&Expr::sub(l.clone(), r.clone()));
            match out.value {
                Some(v) if v.is_zero() => GoalStatus::Solved { answer: None, premises: closure(store, out.premises) },
                _ => GoalStatus::Unsolved,
            }
        }
    }
}

fn closure(store: &ConditionStore, ids: impl IntoIterator<Item = CondId>) -> Vec<CondId> {
    store.ancestors(ids).into_iter().collect()
}
