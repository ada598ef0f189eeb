use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use plangeo_core::harness::{
    augment_dir, check_record, emit_report, load_dir, load_record, run_batch, run_record, summarize,
};
use plangeo_core::par::Exec;
use plangeo_core::search::{Method, SearchConfig, Strategy};
use plangeo_core::Kb;

#[derive(Parser)]
#[command(name = "plangeo", version, about = "Symbolic plane-geometry problem solver")]
struct Cli {
    /// Predicate and theorem library (defaults to the bundled one).
    #[arg(long, global = true)]
    kb: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a solution of one problem.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Search every problem of a directory and write a report.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Report path prefix; `.json`, `_summary.csv` and `_problems.csv` are appended.
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Run problems one at a time.
        #[arg(long)]
        single_worker: bool,
    },
    /// Derive new problems from solution paths of annotated problems.
    Augment {
        dir: PathBuf,
        #[arg(long, default_value = "augmented")]
        out: PathBuf,
    },
    /// Replay the annotated theorem sequences of problem files.
    Check {
        #[arg(required = true)]
        problems: Vec<PathBuf>,
    },
    /// Start the HTTP session service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080", env = "PLANGEO_ADDR")]
        addr: SocketAddr,
        /// Problems that sessions may be opened from by id.
        #[arg(long, env = "PLANGEO_PROBLEMS")]
        problems: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value = "fw")]
    method: Method,
    #[arg(long, default_value = "bfs")]
    strategy: Strategy,
    /// Seconds per problem.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    #[arg(long, default_value_t = 15)]
    depth: usize,
    #[arg(long, default_value_t = 20)]
    beam: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate theorem branches on one thread.
    #[arg(long)]
    sequential: bool,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig> {
        if self.depth == 0 || self.beam == 0 {
            bail!("--depth and --beam must be at least 1");
        }
        Ok(SearchConfig {
            method: self.method,
            strategy: self.strategy,
            max_depth: self.depth,
            beam_size: self.beam,
            timeout: Duration::try_from_secs_f64(self.timeout).context("invalid --timeout")?,
            seed: self.seed,
            exec: if self.sequential { Exec::Sequential } else { Exec::default() },
        })
    }
}

fn load_kb(path: Option<&Path>) -> Result<Arc<Kb>> {
    match path {
        None => Ok(Kb::bundled()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let kb = Kb::from_gdl(&text).with_context(|| format!("loading {}", p.display()))?;
            Ok(Arc::new(kb))
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let kb = load_kb(cli.kb.as_deref())?;
    match cli.command {
        Command::Solve { problem, search } => {
            let record = load_record(&problem)?;
            let row = run_record(kb, &record, &search.config()?)?;
            println!("{}", serde_json::to_string_pretty(&row)?);
        }
        Command::Batch { dir, search, out, single_worker } => {
            let workers = if single_worker { Exec::Sequential } else { Exec::default() };
            let report = run_batch(kb, &dir, &search.config()?, workers)?;
            for s in &report.skipped {
                eprintln!("skipped {}: {}", s.file, s.error);
            }
            let files = emit_report(&report, &out)?;
            let summary = summarize(&report);
            println!(
                "{} {}: {} problems, solved {}%, unsolved {}%, timeout {}%",
                summary.method, summary.strategy, summary.total, summary.solved_pct, summary.unsolved_pct, summary.timeout_pct
            );
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Augment { dir, out } => {
            let results = augment_dir(kb, &dir, &out, Exec::default())?;
            let (parents, derived) = (results.len(), results.iter().map(|a| a.derived.len()).sum::<usize>());
            for a in &results {
                println!("{}: {} derived", a.parent, a.derived.len());
                for n in &a.notes {
                    println!("  note: {n}");
                }
            }
            println!("{parents} problems, {derived} derived, written to {}", out.display());
        }
        Command::Check { problems } => {
            let mut paths = Vec::new();
            for p in problems {
                if p.is_dir() {
                    let (records, bad) = load_dir(&p)?;
                    for (path, e) in bad {
                        println!("{}: unreadable: {e}", path.display());
                    }
                    paths.extend(records.into_iter().map(|(path, _)| path));
                } else {
                    paths.push(p);
                }
            }
            for path in paths {
                let line = match load_record(&path).and_then(|r| check_record(kb.clone(), &r, Exec::default())) {
                    Ok(c) => {
                        let status = if c.solved { "solved" } else { "unsolved" };
                        let answer = c.answer.map(|a| format!(" answer={a}")).unwrap_or_default();
                        let matches = match c.answer_matches {
                            Some(true) => " (matches)",
                            Some(false) => " (MISMATCH)",
                            None => "",
                        };
                        format!("{}: {status}{answer}{matches}", c.problem_id)
                    }
                    Err(e) => format!("{}: error: {e}", path.display()),
                };
                println!("{line}");
            }
        }
        Command::Serve { addr, problems } => {
            let mut state = plangeo_service::AppState::new(kb);
            if let Some(dir) = problems {
                state = state.with_problem_dir(dir);
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                eprintln!("listening on http://{addr}");
                plangeo_service::serve(listener, state).await
            })?;
        }
    }
    Ok(())
}
