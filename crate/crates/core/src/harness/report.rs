use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::batch::{BatchReport, ProblemRow};
use super::records::HarnessError;
use crate::search::Outcome;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: String,
    pub count: usize,
    pub solved: usize,
    /// Percent, two decimals.
    pub success: f64,
    /// Mean seconds over solved problems.
    pub time: f64,
    /// Mean steps over solved problems.
    pub steps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub strategy: String,
    pub total: usize,
    pub solved: usize,
    pub unsolved: usize,
    pub timeout: usize,
    pub solved_pct: f64,
    pub unsolved_pct: f64,
    pub timeout_pct: f64,
    /// `l1`..`l6`, then `unbinned` when present.
    pub levels: Vec<LevelStats>,
    /// Mean seconds and steps over problems not solved.
    pub unsolved_time: f64,
    pub unsolved_steps: f64,
}

pub fn level_name(level: Option<u8>) -> String {
    level.map_or_else(|| "unbinned".to_string(), |l| format!("l{l}"))
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        round2(100.0 * part as f64 / whole as f64)
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        round2(sum / n as f64)
    }
}

/// Aggregates computed only from the per-problem rows.
pub fn summarize(report: &BatchReport) -> Summary {
    let rows = &report.rows;
    let count = |o: Outcome| rows.iter().filter(|r| r.outcome == o).count();
    let (solved, unsolved, timeout) = (count(Outcome::Solved), count(Outcome::Unsolved), count(Outcome::Timeout));
    let mut levels: Vec<Option<u8>> = (1..=6).map(Some).collect();
    if rows.iter().any(|r| r.level.is_none()) {
        levels.push(None);
    }
    let levels = levels
        .into_iter()
        .map(|l| {
            let bin: Vec<&ProblemRow> = rows.iter().filter(|r| r.level == l).collect();
            let ok: Vec<&&ProblemRow> = bin.iter().filter(|r| r.outcome == Outcome::Solved).collect();
            LevelStats {
                level: level_name(l),
                count: bin.len(),
                solved: ok.len(),
                success: pct(ok.len(), bin.len()),
                time: mean(ok.iter().map(|r| r.time)),
                steps: mean(ok.iter().map(|r| r.steps as f64)),
            }
        })
        .collect();
    let failed = || rows.iter().filter(|r| r.outcome != Outcome::Solved);
    Summary {
        method: report.config.method.to_string(),
        strategy: report.config.strategy.to_string(),
        total: rows.len(),
        solved,
        unsolved,
        timeout,
        solved_pct: pct(solved, rows.len()),
        unsolved_pct: pct(unsolved, rows.len()),
        timeout_pct: pct(timeout, rows.len()),
        levels,
        unsolved_time: mean(failed().map(|r| r.time)),
        unsolved_steps: mean(failed().map(|r| r.steps as f64)),
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    summary: &'a Summary,
    #[serde(flatten)]
    report: &'a BatchReport,
}

fn summary_record(s: &Summary) -> (Vec<String>, Vec<String>) {
    let mut header: Vec<String> = ["method", "strategy", "total", "solved", "unsolved", "timeout", "solved_pct", "unsolved_pct", "timeout_pct"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut row = vec![
        s.method.clone(),
        s.strategy.clone(),
        s.total.to_string(),
        s.solved.to_string(),
        s.unsolved.to_string(),
        s.timeout.to_string(),
        s.solved_pct.to_string(),
        s.unsolved_pct.to_string(),
        s.timeout_pct.to_string(),
    ];
    for l in &s.levels {
        header.push(format!("{}_success", l.level));
        row.push(l.success.to_string());
    }
    for l in &s.levels {
        header.push(format!("{}_time", l.level));
        row.push(l.time.to_string());
    }
    for l in &s.levels {
        header.push(format!("{}_step", l.level));
        row.push(l.steps.to_string());
    }
    header.extend(["unsolved_time".to_string(), "unsolved_step".to_string()]);
    row.extend([s.unsolved_time.to_string(), s.unsolved_steps.to_string()]);
    (header, row)
}

/// Writes `<prefix>.json`, `<prefix>_summary.csv` and
/// `<prefix>_problems.csv`.
pub fn emit_report(report: &BatchReport, prefix: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let summary = summarize(report);
    let with_suffix = |suffix: &str| {
        let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(suffix);
        prefix.with_file_name(name)
    };
    let json_path = with_suffix(".json");
    let text = serde_json::to_string_pretty(&JsonReport { summary: &summary, report })
        .map_err(|source| HarnessError::Json { path: json_path.clone(), source })?;
    std::fs::write(&json_path, text).map_err(|source| HarnessError::Io { path: json_path.clone(), source })?;

    let summary_path = with_suffix("_summary.csv");
    let csv_err = |path: &PathBuf| {
        let path = path.clone();
        move |source: csv::Error| HarnessError::Csv { path: path.clone(), source }
    };
    let mut w = csv::Writer::from_path(&summary_path).map_err(csv_err(&summary_path))?;
    let (header, row) = summary_record(&summary);
    w.write_record(&header).map_err(csv_err(&summary_path))?;
    w.write_record(&row).map_err(csv_err(&summary_path))?;
    w.flush().map_err(|source| HarnessError::Io { path: summary_path.clone(), source })?;

    let rows_path = with_suffix("_problems.csv");
    let mut w = csv::Writer::from_path(&rows_path).map_err(csv_err(&rows_path))?;
    w.write_record(["problem_id", "level", "outcome", "time", "steps", "theorem_seqs", "note"])
        .map_err(csv_err(&rows_path))?;
    for r in &report.rows {
        w.write_record([
            r.problem_id.clone(),
            level_name(r.level),
            r.outcome.to_string(),
            r.time.to_string(),
            r.steps.to_string(),
            r.theorem_seqs.join(";"),
            r.note.clone(),
        ])
        .map_err(csv_err(&rows_path))?;
    }
    w.flush().map_err(|source| HarnessError::Io { path: rows_path.clone(), source })?;
    Ok(vec![json_path, summary_path, rows_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::SearchConfig;

    fn row(id: usize, level: Option<u8>, outcome: Outcome) -> ProblemRow {
        ProblemRow {
            problem_id: id.to_string(),
            level,
            outcome,
            time: 0.5,
            steps: 3,
            theorem_seqs: vec![],
            note: String::new(),
        }
    }

    #[test]
    fn percentages() {
        let mut rows: Vec<ProblemRow> = (0..8).map(|i| row(i, Some(1), Outcome::Solved)).collect();
        rows.push(row(8, Some(2), Outcome::Unsolved));
        rows.push(row(9, None, Outcome::Timeout));
        let report = BatchReport { config: SearchConfig::default(), rows, skipped: vec![] };
        let s = summarize(&report);
        assert_eq!((s.solved_pct, s.unsolved_pct, s.timeout_pct), (80.0, 10.0, 10.0));
        assert_eq!(s.levels.iter().map(|l| l.count).sum::<usize>(), 10);
        assert_eq!(s.levels[0].success, 100.0);
        assert_eq!(s.levels[1].success, 0.0);
    }

    #[test]
    fn empty_report() {
        let report = BatchReport { config: SearchConfig::default(), rows: vec![], skipped: vec![] };
        let s = summarize(&report);
        assert_eq!(s.total, 0);
        assert_eq!(s.levels.len(), 6);
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&report, &dir.path().join("r")).unwrap();
        assert!(files.iter().all(|f| f.exists()));
    }
}
