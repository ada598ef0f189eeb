use std::sync::Arc;
use std::time::Instant;

use super::apply::{applicable, interactive_apply, TheoremCall};
use super::frontier::Frontier;
use super::{NodeState, Outcome, SearchConfig, SearchResult};
use crate::problem::{ConditionStore, Goal, Problem};

struct Node {
    parent: Option<usize>,
    call: Option<TheoremCall>,
    depth: usize,
    state: NodeState,
    store: Option<Arc<ConditionStore>>,
}

fn path(nodes: &[Node], mut id: usize) -> Vec<String> {
    let mut out = Vec::new();
    while let Some(call) = &nodes[id].call {
        out.push(call.to_string());
        id = nodes[id].parent.expect("non-root");
    }
    out.reverse();
    out
}

fn children(nodes: &mut Vec<Node>, parent: usize, cfg: &SearchConfig) -> Vec<usize> {
    let depth = nodes[parent].depth + 1;
    if depth > cfg.max_depth {
        return Vec::new();
    }
    let store = nodes[parent].store.clone().expect("applied node");
    applicable(&store)
        .into_iter()
        .map(|call| {
            nodes.push(Node { parent: Some(parent), call: Some(call), depth, state: NodeState::Expandable, store: None });
            nodes.len() - 1
        })
        .collect()
}

/// Forward search: every node applies one theorem branch to its parent's
/// store; the first node whose store solves the goal ends the search.
pub fn forward_search(problem: &Problem, cfg: &SearchConfig) -> SearchResult {
    let start = Instant::now();
    let deadline = start + cfg.timeout;
    let mut root = problem.store.clone();
    root.deadline = Some(deadline);
    let mut goal = problem.goal.clone();
    let kind = goal.kind.clone();
    let result = |outcome, theorem_seqs, steps| SearchResult {
        outcome,
        theorem_seqs,
        elapsed: start.elapsed().as_secs_f64(),
        steps,
    };
    if goal.update(&root) {
        return result(Outcome::Solved, vec![], 0);
    }
    let mut nodes = vec![Node { parent: None, call: None, depth: 0, state: NodeState::Expanded, store: Some(Arc::new(root)) }];
    let mut frontier = Frontier::new(cfg.strategy, cfg.beam_size, cfg.seed, false);
    let first = children(&mut nodes, 0, cfg);
    frontier.push_children(&first);
    let mut steps = 0;
    loop {
        if Instant::now() >= deadline {
            return result(Outcome::Timeout, vec![], steps);
        }
        let Some(id) = frontier.pop() else {
            return result(Outcome::Unsolved, vec![], steps);
        };
        steps += 1;
        let parent = nodes[id].parent.expect("non-root");
        let mut store = (*nodes[parent].store.clone().expect("applied parent")).clone();
        let mut g = Goal::new(kind.clone());
        let call = nodes[id].call.clone().expect("non-root");
        let report = interactive_apply(&mut store, &mut g, &call, cfg.exec);
        let Ok(report) = report else {
            nodes[id].state = NodeState::Failed;
            continue;
        };
        if g.status.is_solved() {
            nodes[id].state = NodeState::Solved;
            log::debug!("{}: solved after {steps} steps", problem.id);
            return result(Outcome::Solved, path(&nodes, id), steps);
        }
        if report.new_conditions.is_empty() {
            nodes[id].state = NodeState::Failed;
            continue;
        }
        nodes[id].store = Some(Arc::new(store));
        let kids = children(&mut nodes, id, cfg);
        nodes[id].state = if kids.is_empty() { NodeState::Failed } else { NodeState::Expanded };
        frontier.push_children(&kids);
    }
}
