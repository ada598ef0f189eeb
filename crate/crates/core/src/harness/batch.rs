use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::records::{difficulty_of, load_dir, replay_solves, HarnessError, ProblemRecord};
use crate::kb::Kb;
use crate::par::Exec;
use crate::search::{search, Outcome, SearchConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRow {
    pub problem_id: String,
    pub level: Option<u8>,
    pub outcome: Outcome,
    pub time: f64,
    pub steps: usize,
    pub theorem_seqs: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub file: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub config: SearchConfig,
    pub rows: Vec<ProblemRow>,
    pub skipped: Vec<Skipped>,
}

/// Searches one problem. A solution only counts once its theorem
/// sequence replays to a solved goal on a fresh store.
pub fn run_record(kb: Arc<Kb>, record: &ProblemRecord, config: &SearchConfig) -> Result<ProblemRow, HarnessError> {
    let problem = record.load(kb, Exec::Sequential)?;
    let result = search(&problem, config);
    let mut row = ProblemRow {
        problem_id: record.problem_id.clone(),
        level: difficulty_of(record),
        outcome: result.outcome,
        time: result.elapsed,
        steps: result.steps,
        theorem_seqs: result.theorem_seqs,
        note: String::new(),
    };
    if row.outcome == Outcome::Solved && !replay_solves(&problem, &row.theorem_seqs, config.exec) {
        row.outcome = Outcome::Unsolved;
        row.note = "solution failed replay".into();
    }
    Ok(row)
}

/// Runs every problem file of `dir`; `workers` picks sequential or
/// parallel execution over problems. Files that do not load are skipped.
pub fn run_batch(kb: Arc<Kb>, dir: &Path, config: &SearchConfig, workers: Exec) -> Result<BatchReport, HarnessError> {
    let (records, unreadable) = load_dir(dir)?;
    let mut skipped: Vec<Skipped> =
        unreadable.into_iter().map(|(p, e)| Skipped { file: p.display().to_string(), error: e }).collect();
    let outcomes = workers.map(&records, |(_, r)| run_record(kb.clone(), r, config));
    let mut rows = Vec::new();
    for ((path, _), outcome) in records.iter().zip(outcomes) {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => skipped.push(Skipped { file: path.display().to_string(), error: e.to_string() }),
        }
    }
    Ok(BatchReport { config: config.clone(), rows, skipped })
}
