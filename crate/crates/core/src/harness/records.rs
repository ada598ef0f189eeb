use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::algebra::{Poly, Value};
use crate::kb::Kb;
use crate::lang::parse_expr;
use crate::par::Exec;
use crate::problem::{init_problem, InitError, Problem};
use crate::search::{replay_calls, ApplyError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Init(#[from] InitError),
    #[error("{0}")]
    Apply(#[from] ApplyError),
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// One problem file. Field aliases accept the published dataset layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    #[serde(alias = "id", deserialize_with = "id_string")]
    pub problem_id: String,
    #[serde(default, skip_serializing_if = "String::is_empty", alias = "problem_text_en")]
    pub description: String,
    #[serde(alias = "construction")]
    pub construction_cdl: Vec<String>,
    #[serde(default, alias = "text")]
    pub text_cdl: Vec<String>,
    #[serde(alias = "goal")]
    pub goal_cdl: String,
    #[serde(default, alias = "theorems")]
    pub theorem_seqs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none", alias = "answer")]
    pub problem_answer: Option<String>,
}

fn id_string<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        Text(String),
        Number(i64),
    }
    Ok(match Id::deserialize(d)? {
        Id::Text(s) => s,
        Id::Number(n) => n.to_string(),
    })
}

impl ProblemRecord {
    pub fn load(&self, kb: Arc<Kb>, exec: Exec) -> Result<Problem, InitError> {
        init_problem(kb, &self.problem_id, &self.construction_cdl, &self.text_cdl, &self.goal_cdl, exec)
    }
}

pub fn load_record(path: &Path) -> Result<ProblemRecord, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })
}

/// Every `*.json` file of a directory, by file name. Unreadable files are
/// returned separately.
#[allow(clippy::type_complexity)]
pub fn load_dir(dir: &Path) -> Result<(Vec<(PathBuf, ProblemRecord)>, Vec<(PathBuf, String)>), HarnessError> {
    let entries = std::fs::read_dir(dir).map_err(|source| HarnessError::Io { path: dir.into(), source })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for p in paths {
        match load_record(&p) {
            Ok(r) => ok.push((p, r)),
            Err(e) => bad.push((p, e.to_string())),
        }
    }
    Ok((ok, bad))
}

/// Difficulty bin 1..=6 by annotated sequence length.
pub fn difficulty_of(record: &ProblemRecord) -> Option<u8> {
    match record.theorem_seqs.len() {
        0 => None,
        1..=2 => Some(1),
        3..=4 => Some(2),
        5..=6 => Some(3),
        7..=8 => Some(4),
        9..=10 => Some(5),
        _ => Some(6),
    }
}

/// Replays theorem calls on a fresh copy of the problem.
pub fn replay_solves(problem: &Problem, calls: &[String], exec: Exec) -> bool {
    let mut store = problem.store.clone();
    store.deadline = None;
    let mut goal = problem.goal.clone();
    replay_calls(&mut store, &mut goal, calls, exec).is_ok() && goal.status.is_solved()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub problem_id: String,
    pub solved: bool,
    pub answer: Option<String>,
    /// Present when the record carries an expected answer.
    pub answer_matches: Option<bool>,
    pub conditions: usize,
}

/// Replays the annotated theorem sequence and compares the answer.
pub fn check_record(kb: Arc<Kb>, record: &ProblemRecord, exec: Exec) -> Result<CheckReport, HarnessError> {
    let p = record.load(kb.clone(), exec)?;
    let mut store = p.store.clone();
    let mut goal = p.goal.clone();
    replay_calls(&mut store, &mut goal, &record.theorem_seqs, exec)?;
    let answer = goal.status.answer().cloned();
    let answer_matches = record
        .problem_answer
        .as_ref()
        .map(|text| answer.as_ref().is_some_and(|v| expected_value(&kb, text).is_some_and(|e| e.approx_eq(v))));
    Ok(CheckReport {
        problem_id: record.problem_id.clone(),
        solved: goal.status.is_solved(),
        answer: answer.map(|v| v.to_string()),
        answer_matches,
        conditions: store.len(),
    })
}

fn expected_value(kb: &Kb, text: &str) -> Option<Value> {
    let e = parse_expr(kb, text).ok()?;
    Poly::from_expr(&e).ok()?.as_constant()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize) -> ProblemRecord {
        ProblemRecord {
            problem_id: "x".into(),
            description: String::new(),
            construction_cdl: vec![],
            text_cdl: vec![],
            goal_cdl: String::new(),
            theorem_seqs: vec!["t".into(); n],
            problem_answer: None,
        }
    }

    #[test]
    fn bins() {
        let bins: Vec<Option<u8>> = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 40].iter().map(|&n| difficulty_of(&record(n))).collect();
        let expect = [None, Some(1), Some(1), Some(2), Some(2), Some(3), Some(3), Some(4), Some(4), Some(5), Some(5), Some(6), Some(6)];
        assert_eq!(bins, expect);
    }

    #[test]
    fn dataset_field_names() {
        let text = r#"{"problem_id": 12, "construction_cdl": ["Shape(AB,BC,CA)"], "text_cdl": [],
            "goal_cdl": "Value(LengthOfLine(AB))", "theorem_seqs": [], "problem_answer": "3"}"#;
        let r: ProblemRecord = serde_json::from_str(text).unwrap();
        assert_eq!(r.problem_id, "12");
        assert_eq!(r.problem_answer.as_deref(), Some("3"));
        let alias = r#"{"id": "a", "construction": [], "goal": "Value(1)"}"#;
        let r: ProblemRecord = serde_json::from_str(alias).unwrap();
        assert_eq!(r.goal_cdl, "Value(1)");
    }
}
