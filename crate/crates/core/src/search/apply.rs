use std::fmt;

use thiserror::Error;

use crate::gpl::{execute_branch, reorder_branch, Atom, CondId, RelAtom, Relation};
use crate::par::Exec;
use crate::point::{points, seq_string, Point, PointSeq, Var};
use crate::problem::{instantiate, ConditionStore, Goal, GoalStatus};

/// A theorem reference: `name`, `name(k)`, `name(k,AB,CD)` or `name(AB,CD)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TheoremCall {
    pub name: String,
    /// 1-based branch index.
    pub branch: Option<usize>,
    pub binding: Option<Vec<PointSeq>>,
}

impl TheoremCall {
    pub fn named(name: &str) -> TheoremCall {
        TheoremCall { name: name.to_string(), branch: None, binding: None }
    }

    pub fn parse(text: &str) -> Result<TheoremCall, ApplyError> {
        let text = text.trim();
        let bad = || ApplyError::Syntax(text.to_string());
        let Some(open) = text.find('(') else {
            if text.is_empty() || !text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(bad());
            }
            return Ok(TheoremCall::named(text));
        };
        let name = &text[..open];
        let inner = text[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad());
        }
        let mut parts = inner.split(',').map(str::trim).peekable();
        let mut call = TheoremCall::named(name);
        if let Some(first) = parts.peek() {
            if !first.is_empty() && first.chars().all(|c| c.is_ascii_digit()) {
                let k: usize = first.parse().map_err(|_| bad())?;
                call.branch = Some(k);
                parts.next();
            }
        }
        let groups: Vec<PointSeq> =
            parts.map(|p| points(p).filter(|g| !g.is_empty()).ok_or_else(bad)).collect::<Result<_, _>>()?;
        if !groups.is_empty() {
            call.binding = Some(groups);
        } else if call.branch.is_none() {
            return Err(bad());
        }
        Ok(call)
    }
}

impl fmt::Display for TheoremCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if let Some(k) = self.branch {
            parts.push(k.to_string());
        }
        if let Some(groups) = &self.binding {
            parts.extend(groups.iter().map(|g| seq_string(g)));
        }
        if parts.is_empty() {
            f.write_str(&self.name)
        } else {
            write!(f, "{}({})", self.name, parts.join(","))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("malformed theorem call {0:?}")]
    Syntax(String),
    #[error("unknown theorem {0}")]
    UnknownTheorem(String),
    #[error("{name} has {count} branch(es), branch {branch} requested")]
    BadBranch { name: String, branch: usize, count: usize },
    #[error("binding {call}: {reason}")]
    BadBinding { call: String, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApplyReport {
    pub new_conditions: Vec<CondId>,
    pub bindings: usize,
    pub goal: GoalStatus,
    pub diagnostics: Vec<String>,
    pub timeouts: usize,
}

/// Evaluates a theorem against the store and adds every conclusion.
///
/// Branches are evaluated concurrently against the unchanged store;
/// insertion happens afterwards in branch and binding order.
pub fn interactive_apply(
    store: &mut ConditionStore,
    goal: &mut Goal,
    call: &TheoremCall,
    exec: Exec,
) -> Result<ApplyReport, ApplyError> {
    let kb = store.kb().clone();
    let thm = kb.theorem(&call.name).ok_or_else(|| ApplyError::UnknownTheorem(call.name.clone()))?;
    let count = thm.branches.len();
    let branch_ids: Vec<usize> = match call.branch {
        Some(k) if k == 0 || k > count => {
            return Err(ApplyError::BadBranch { name: call.name.clone(), branch: k, count })
        }
        Some(k) => vec![k - 1],
        None => (0..count).collect(),
    };
    let start = match &call.binding {
        None => None,
        Some(groups) => {
            let bad = |reason: String| ApplyError::BadBinding { call: call.to_string(), reason };
            let map = thm
                .parse_binding(groups)
                .ok_or_else(|| bad(format!("does not match the pattern of {}", thm.name)))?;
            let vars = thm.vars();
            let tuple: Vec<Point> = vars.iter().map(|v| map[v]).collect();
            if tuple.iter().collect::<std::collections::BTreeSet<_>>().len() != tuple.len() {
                return Err(bad("points must be distinct".into()));
            }
            if let Some(p) = tuple.iter().find(|p| !store.points().contains(p)) {
                return Err(bad(format!("unknown point {p}")));
            }
            Some(Relation::from_tuples(vars, [tuple]))
        }
    };

    let snapshot: &ConditionStore = store;
    let outcomes = exec.map(&branch_ids, |&i| {
        let branch = &thm.branches[i];
        let atoms: Vec<Atom> = if start.is_some() {
            branch.atoms.clone()
        } else {
            let size = |a: &RelAtom| snapshot.extension(&a.predicate, a.vars.len()).map_or(0, |e| e.len());
            reorder_branch(&branch.atoms, Some(&size))
        };
        execute_branch(&atoms, snapshot, start.clone(), exec)
    });

    let before = store.len();
    let mut report = ApplyReport {
        new_conditions: Vec::new(),
        bindings: 0,
        goal: GoalStatus::Unsolved,
        diagnostics: Vec::new(),
        timeouts: 0,
    };
    for (&i, outcome) in branch_ids.iter().zip(outcomes) {
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                report.diagnostics.push(format!("branch {}: {e}", i + 1));
                continue;
            }
        };
        report.timeouts += outcome.timeouts;
        let rel = outcome.relation;
        for (tuple, premises) in &rel.rows {
            report.bindings += 1;
            let map = |v: Var| rel.slot(v).map(|s| tuple[s]).unwrap_or(v);
            let label = format!("{}({},{})", thm.name, i + 1, thm.render_binding(&map));
            for c in &thm.branches[i].conclusions {
                let fact = instantiate(c, &map);
                if let Err(e) = store.add_condition(fact, premises.clone(), &label) {
                    report.diagnostics.push(format!("{label}: {e}"));
                }
            }
        }
    }
    store.auto_extend();
    goal.update(store);
    report.new_conditions = (before..store.len()).collect();
    report.goal = goal.status.clone();
    Ok(report)
}

/// Branch-level calls whose first premise atom currently has facts.
pub fn applicable(store: &ConditionStore) -> Vec<TheoremCall> {
    let mut out = Vec::new();
    for thm in store.kb().theorems() {
        for (i, b) in thm.branches.iter().enumerate() {
            let first = b.atoms.iter().find_map(|a| match a {
                Atom::Rel(r) => Some(r),
                _ => None,
            });
            if first.is_some_and(|r| store.extension(&r.predicate, r.vars.len()).is_some_and(|e| !e.is_empty())) {
                out.push(TheoremCall { name: thm.name.clone(), branch: Some(i + 1), binding: None });
            }
        }
    }
    out
}

/// Applies calls in order; stops early once the goal is solved.
pub fn replay_calls(
    store: &mut ConditionStore,
    goal: &mut Goal,
    calls: &[String],
    exec: Exec,
) -> Result<Vec<ApplyReport>, ApplyError> {
    let mut reports = Vec::new();
    for text in calls {
        let call = TheoremCall::parse(text)?;
        reports.push(interactive_apply(store, goal, &call, exec)?);
    }
    Ok(reports)
}
