//! Theorem application and proof search.

mod apply;
mod backward;
mod forward;
mod frontier;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use apply::{applicable, interactive_apply, replay_calls, ApplyError, ApplyReport, TheoremCall};
pub use backward::backward_search;
pub use forward::forward_search;
pub use frontier::Frontier;

use crate::par::Exec;
use crate::problem::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[serde(alias = "fw")]
    Forward,
    #[serde(alias = "bw")]
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Bfs,
    Dfs,
    Rs,
    Bs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeState {
    Expandable,
    Expanded,
    Solved,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Solved,
    Unsolved,
    Timeout,
}

impl Method {
    pub fn short(self) -> &'static str {
        match self {
            Method::Forward => "fw",
            Method::Backward => "bw",
        }
    }
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Bfs, Strategy::Dfs, Strategy::Rs, Strategy::Bs];

    pub fn short(self) -> &'static str {
        match self {
            Strategy::Bfs => "bfs",
            Strategy::Dfs => "dfs",
            Strategy::Rs => "rs",
            Strategy::Bs => "bs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Solved => "solved",
            Outcome::Unsolved => "unsolved",
            Outcome::Timeout => "timeout",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fw" | "forward" => Ok(Method::Forward),
            "bw" | "backward" => Ok(Method::Backward),
            _ => Err(format!("unknown method {s:?} (expected fw or bw)")),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(Strategy::Bfs),
            "dfs" => Ok(Strategy::Dfs),
            "rs" => Ok(Strategy::Rs),
            "bs" => Ok(Strategy::Bs),
            _ => Err(format!("unknown strategy {s:?} (expected bfs, dfs, rs or bs)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub method: Method,
    pub strategy: Strategy,
    pub max_depth: usize,
    pub beam_size: usize,
    /// Wall-clock budget per problem.
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            method: Method::Forward,
            strategy: Strategy::Bfs,
            max_depth: 15,
            beam_size: 20,
            timeout: Duration::from_secs(30),
            seed: 0,
            exec: Exec::default(),
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub theorem_seqs: Vec<String>,
    /// Seconds.
    pub elapsed: f64,
    /// Forward: nodes applied. Backward: super nodes expanded.
    pub steps: usize,
}

/// Runs the configured search method.
pub fn search(problem: &Problem, config: &SearchConfig) -> SearchResult {
    match config.method {
        Method::Forward => forward_search(problem, config),
        Method::Backward => backward_search(problem, config),
    }
}
