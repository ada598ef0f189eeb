use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::goal::{Goal, GoalStatus};
use super::store::{ConditionStore, Fact, StoreError};
use crate::expr::Expr;
use crate::gpl::CondId;
use crate::kb::Kb;
use crate::lang::{parse_cdl, StatementBody};
use crate::point::seq_string;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperNode {
    pub id: CondId,
    pub predicate: String,
    pub item: String,
    pub text: String,
}

/// One theorem application: its premises and everything it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperEdge {
    pub theorem: String,
    pub premises: Vec<CondId>,
    pub conclusions: Vec<CondId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalDoc {
    pub kind: String,
    pub payload: String,
    pub status: String,
    pub answer: Option<String>,
    pub premises: Vec<CondId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypertree {
    pub nodes: Vec<HyperNode>,
    pub edges: Vec<HyperEdge>,
    pub goal: GoalDoc,
}

pub fn export_hypertree(store: &ConditionStore, goal: &Goal) -> Hypertree {
    let kb = store.kb();
    let nodes = store
        .conditions()
        .iter()
        .map(|c| HyperNode {
            id: c.id,
            predicate: c.fact.predicate().to_string(),
            item: match &c.fact {
                Fact::Relation(r) => seq_string(&r.points),
                Fact::Equation(e) => e.to_string(),
            },
            text: store.text(c.id),
        })
        .collect();
    let mut edges: Vec<HyperEdge> = Vec::new();
    for c in store.conditions() {
        match edges.last_mut() {
            Some(e) if e.theorem == c.theorem && e.premises == c.premises => e.conclusions.push(c.id),
            _ => edges.push(HyperEdge { theorem: c.theorem.clone(), premises: c.premises.clone(), conclusions: vec![c.id] }),
        }
    }
    let (status, answer) = match &goal.status {
        GoalStatus::Unsolved => ("unsolved", None),
        GoalStatus::Solved { answer, .. } => ("solved", answer.as_ref().map(|v| v.to_string())),
    };
    Hypertree {
        nodes,
        edges,
        goal: GoalDoc {
            kind: goal.kind.name().to_string(),
            payload: goal.kind.payload(kb),
            status: status.to_string(),
            answer,
            premises: goal.status.premises().to_vec(),
        },
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("node {id}: {message}")]
    Parse { id: CondId, message: String },
    #[error("node {id}: {source}")]
    Store { id: CondId, source: StoreError },
    #[error("node {id} was not reproduced")]
    Mismatch { id: CondId },
}

/// Rebuilds a store by inserting every node in id order with the premises
/// and theorem of its edge.
pub fn replay_hypertree(kb: Arc<Kb>, doc: &Hypertree) -> Result<ConditionStore, ReplayError> {
    let mut store = ConditionStore::new(kb.clone());
    let mut origin = vec![None; doc.nodes.len()];
    for e in &doc.edges {
        for &c in &e.conclusions {
            if let Some(slot) = origin.get_mut(c) {
                *slot = Some(e);
            }
        }
    }
    let mut nodes: Vec<&HyperNode> = doc.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    for n in nodes {
        let st = parse_cdl(&kb, &n.text).map_err(|e| ReplayError::Parse { id: n.id, message: e.to_string() })?;
        let fact = match st.body {
            StatementBody::Relation(r) => Fact::Relation(r),
            StatementBody::Equal(l, r) => Fact::Equation(Expr::sub(l, r)),
            StatementBody::Value(_) => return Err(ReplayError::Parse { id: n.id, message: "unexpected Value".into() }),
        };
        let edge = origin.get(n.id).copied().flatten();
        let (premises, theorem) = edge.map(|e| (e.premises.clone(), e.theorem.as_str())).unwrap_or((vec![], ""));
        match store.add_condition(fact, premises, theorem) {
            Ok(Some(id)) if id == n.id => {}
            Ok(_) => return Err(ReplayError::Mismatch { id: n.id }),
            Err(source) => return Err(ReplayError::Store { id: n.id, source }),
        }
    }
    Ok(store)
}
