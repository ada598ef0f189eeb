//! Batch runs, augmentation and reports.

mod augment;
mod batch;
mod records;
mod report;

pub use augment::{augment_dir, augment_problem, Augmented};
pub use batch::{run_batch, run_record, BatchReport, ProblemRow, Skipped};
pub use records::{check_record, difficulty_of, load_dir, load_record, replay_solves, CheckReport, HarnessError, ProblemRecord};
pub use report::{emit_report, level_name, summarize, LevelStats, Summary};
