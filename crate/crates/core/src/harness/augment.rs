use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use super::records::{load_dir, HarnessError, ProblemRecord};
use crate::kb::Kb;
use crate::lang::{render_equation, render_fact};
use crate::par::Exec;
use crate::problem::Fact;
use crate::search::replay_calls;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Augmented {
    pub parent: String,
    pub derived: Vec<ProblemRecord>,
    pub notes: Vec<String>,
}

/// New problems from the intermediate conditions of a solved record.
///
/// For every proper prefix of the annotated sequence, the lowest-id
/// condition that prefix produced and the final goal depends on becomes
/// the goal of a new record whose sequence is that prefix.
pub fn augment_problem(kb: Arc<Kb>, record: &ProblemRecord, exec: Exec) -> Result<Augmented, HarnessError> {
    let problem = record.load(kb.clone(), exec)?;
    let mut store = problem.store.clone();
    let mut goal = problem.goal.clone();
    let reports = replay_calls(&mut store, &mut goal, &record.theorem_seqs, exec)?;
    let mut out = Augmented { parent: record.problem_id.clone(), derived: vec![], notes: vec![] };
    if !goal.status.is_solved() {
        out.notes.push("annotated sequence does not solve the problem".into());
        return Ok(out);
    }
    let needed: BTreeSet<usize> = goal.status.premises().iter().copied().collect();
    let mut seen_goals = BTreeSet::new();
    for (i, report) in reports.iter().enumerate().take(reports.len().saturating_sub(1)) {
        let Some(&id) = report.new_conditions.iter().find(|id| needed.contains(id)) else {
            out.notes.push(format!("prefix {}: no condition on the solution path", i + 1));
            continue;
        };
        let cond = store.condition(id).expect("stored");
        let goal_cdl = match &cond.fact {
            Fact::Relation(r) if kb.predicate(&r.predicate).is_some_and(|d| d.kind.is_construction()) => {
                out.notes.push(format!("prefix {}: construction fact cannot be a goal", i + 1));
                continue;
            }
            Fact::Relation(r) => format!("Relation({})", render_fact(&kb, &r.predicate, &r.points)),
            Fact::Equation(e) => render_equation(e),
        };
        if !seen_goals.insert(goal_cdl.clone()) {
            continue;
        }
        out.derived.push(ProblemRecord {
            problem_id: format!("{}_aug{}", record.problem_id, i + 1),
            description: String::new(),
            construction_cdl: record.construction_cdl.clone(),
            text_cdl: record.text_cdl.clone(),
            goal_cdl,
            theorem_seqs: record.theorem_seqs[..=i].to_vec(),
            problem_answer: None,
        });
    }
    Ok(out)
}

/// Augments every record of `dir`, writing derived records to `out`.
pub fn augment_dir(kb: Arc<Kb>, dir: &Path, out: &Path, exec: Exec) -> Result<Vec<Augmented>, HarnessError> {
    let (records, _) = load_dir(dir)?;
    std::fs::create_dir_all(out).map_err(|source| HarnessError::Io { path: out.into(), source })?;
    let results = exec.map(&records, |(_, r)| augment_problem(kb.clone(), r, Exec::Sequential));
    let mut all = Vec::new();
    for result in results {
        let a = result?;
        for d in &a.derived {
            let path = out.join(format!("{}.json", d.problem_id));
            let text = serde_json::to_string_pretty(d).map_err(|source| HarnessError::Json { path: path.clone(), source })?;
            std::fs::write(&path, text).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
        }
        all.push(a);
    }
    Ok(all)
}
