use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use super::apply::{interactive_apply, replay_calls, TheoremCall};
use super::frontier::Frontier;
use super::{NodeState, Outcome, SearchConfig, SearchResult};
use crate::algebra::parse_symbol;
use crate::expr::Expr;
use crate::gpl::{execute_branch, Atom, CondId, RelAtom, Relation};
use crate::kb::{Conclusion, Kb, TheoremDef};
use crate::lang::RelFact;
use crate::par::Exec;
use crate::point::{Point, Var};
use crate::problem::{instantiate, ConditionStore, Fact, Goal, GoalKind, Problem};

/// Full bindings kept per unified theorem branch.
const GROUND_LIMIT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum SubGoal {
    Relation(RelFact),
    Value(Expr),
    Zero(Expr),
}

struct GoalNode {
    goal: SubGoal,
    parent: usize,
    state: NodeState,
    children: Vec<usize>,
}

struct SuperNode {
    call: Option<TheoremCall>,
    parent: Option<usize>,
    subgoals: Vec<usize>,
    depth: usize,
    state: NodeState,
}

type Partial = BTreeMap<Var, Point>;

struct Tree<'a> {
    kb: Arc<Kb>,
    cfg: &'a SearchConfig,
    store: ConditionStore,
    goal: Goal,
    goals: Vec<GoalNode>,
    supers: Vec<SuperNode>,
    /// Conclusions of each theorem branch, extensions included.
    effective: Vec<Vec<Vec<Conclusion>>>,
    applied: Vec<(String, Vec<CondId>)>,
    /// Super nodes created by re-expanding an algebraic goal after an application.
    reopened: Vec<usize>,
}

/// Conclusions plus everything their `extend` rules add, over variables.
fn effective(kb: &Kb, conclusions: &[Conclusion]) -> Vec<Conclusion> {
    let mut out = conclusions.to_vec();
    let mut i = 0;
    while i < out.len() {
        if let Conclusion::Rel(a) = &out[i] {
            if let Some(def) = kb.predicate(&a.predicate) {
                let bind = def.binding(&a.vars);
                for c in &def.extend {
                    let derived = match instantiate(c, &|v| bind[&v]) {
                        Fact::Relation(r) => Conclusion::Rel(RelAtom::new(r.predicate, r.points)),
                        Fact::Equation(e) => Conclusion::Eq(e),
                    };
                    if !out.contains(&derived) {
                        out.push(derived);
                    }
                }
            }
        }
        i += 1;
    }
    out
}

fn unify(vars: &[Var], pts: &[Point], into: &mut Partial) -> bool {
    if vars.len() != pts.len() {
        return false;
    }
    for (&v, &p) in vars.iter().zip(pts) {
        if *into.entry(v).or_insert(p) != p {
            return false;
        }
    }
    true
}

impl Tree<'_> {
    fn check(&self, g: &SubGoal) -> bool {
        match g {
            SubGoal::Relation(r) => self.store.contains(&r.predicate, &r.points).is_some(),
            SubGoal::Value(e) => self.store.solve_expr(e).value.is_some(),
            SubGoal::Zero(e) => self.store.solve_expr(e).value.is_some_and(|v| v.is_zero()),
        }
    }

    fn partials(&self, g: &SubGoal) -> Vec<(usize, usize, Partial)> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut push = |t: usize, b: usize, m: Partial| {
            if seen.insert((t, b, m.clone())) {
                out.push((t, b, m));
            }
        };
        match g {
            SubGoal::Relation(r) => {
                let Some(def) = self.kb.predicate(&r.predicate) else { return out };
                let reps = def.reps(&r.points);
                for (t, branches) in self.effective.iter().enumerate() {
                    for (b, concl) in branches.iter().enumerate() {
                        for c in concl {
                            let Conclusion::Rel(a) = c else { continue };
                            if a.predicate != r.predicate {
                                continue;
                            }
                            for rep in &reps {
                                let mut m = Partial::new();
                                if unify(&a.vars, rep, &mut m) {
                                    push(t, b, m);
                                }
                            }
                        }
                    }
                }
            }
            SubGoal::Value(e) | SubGoal::Zero(e) => {
                let Ok(resolved) = self.store.resolve(e) else { return out };
                let solved = self.store.equations().solve(&resolved, self.store.solve_options());
                for sym in &solved.frontier {
                    let Some((name, pts)) = parse_symbol(&self.kb, sym) else { continue };
                    let reps = self.kb.predicate(name).map(|d| d.reps(&pts)).unwrap_or_default();
                    for (t, branches) in self.effective.iter().enumerate() {
                        for (b, concl) in branches.iter().enumerate() {
                            for c in concl {
                                let Conclusion::Eq(eq) = c else { continue };
                                for term in eq.attrs().into_iter().filter(|a| a.name == name) {
                                    for rep in &reps {
                                        let mut m = Partial::new();
                                        if unify(&term.points, rep, &mut m) {
                                            push(t, b, m);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Completes a partial binding through facts already in the store.
    fn ground(&self, thm: &TheoremDef, branch: usize, partial: &Partial) -> Vec<Partial> {
        let atoms = &thm.branches[branch].atoms;
        let (construction, custom): (Vec<Atom>, Vec<Atom>) = atoms
            .iter()
            .filter(|a| matches!(a, Atom::Rel(_)))
            .cloned()
            .partition(|a| match a {
                Atom::Rel(r) => self.kb.predicate(&r.predicate).is_some_and(|d| d.kind.is_construction()),
                _ => false,
            });
        let start = Relation::from_tuples(partial.keys().copied().collect(), [partial.values().copied().collect()]);
        let Ok(mut out) = execute_branch(&construction, &self.store, Some(start), Exec::Sequential) else {
            return vec![];
        };
        let vars = thm.vars();
        if vars.iter().any(|v| out.relation.slot(*v).is_none()) {
            let base = out.relation;
            match execute_branch(&custom, &self.store, Some(base.clone()), Exec::Sequential) {
                Ok(o) if !o.relation.is_empty() => out = o,
                _ => match execute_branch(&self.entity_atoms(&custom), &self.store, Some(base), Exec::Sequential) {
                    Ok(o) => out = o,
                    Err(_) => return vec![],
                },
            }
        }
        let rel = &out.relation;
        if vars.iter().any(|v| rel.slot(*v).is_none()) {
            return vec![];
        }
        rel.tuples()
            .filter(|t| t.iter().collect::<HashSet<_>>().len() == t.len())
            .take(GROUND_LIMIT)
            .map(|t| vars.iter().map(|&v| (v, t[rel.slot(v).unwrap()])).collect())
            .collect()
    }

    /// The entity checks of `atoms`, over the theorem's variables.
    fn entity_atoms(&self, atoms: &[Atom]) -> Vec<Atom> {
        let mut out = Vec::new();
        for atom in atoms {
            let Atom::Rel(a) = atom else { continue };
            let Some(def) = self.kb.predicate(&a.predicate) else { continue };
            let bind = def.binding(&a.vars);
            for ee in &def.ee_check {
                let vars = ee.vars.iter().map(|v| bind[v]).collect();
                let atom = Atom::Rel(RelAtom::new(ee.predicate.clone(), vars));
                if !out.contains(&atom) {
                    out.push(atom);
                }
            }
        }
        out
    }

    fn ancestry(&self, g: usize) -> (HashSet<TheoremCall>, HashSet<SubGoal>) {
        let mut calls = HashSet::new();
        let mut goals = HashSet::new();
        let mut cur = Some(g);
        while let Some(gid) = cur {
            goals.insert(self.goals[gid].goal.clone());
            let s = &self.supers[self.goals[gid].parent];
            if let Some(c) = &s.call {
                calls.insert(c.clone());
            }
            cur = s.parent;
        }
        (calls, goals)
    }

    /// Creates the child super nodes of goal `g`.
    fn expand(&mut self, g: usize) -> Vec<usize> {
        self.goals[g].state = NodeState::Expanded;
        let depth = self.supers[self.goals[g].parent].depth + 1;
        if depth > self.cfg.max_depth {
            return vec![];
        }
        let (calls, seen_goals) = self.ancestry(g);
        let kb = self.kb.clone();
        let theorems: Vec<&TheoremDef> = kb.theorems().collect();
        let mut created = Vec::new();
        let mut made: HashSet<TheoremCall> =
            self.goals[g].children.iter().filter_map(|&c| self.supers[c].call.clone()).collect();
        for (t, b, partial) in self.partials(&self.goals[g].goal.clone()) {
            let thm = theorems[t];
            for full in self.ground(thm, b, &partial) {
                let map = |v: Var| full[&v];
                let call = TheoremCall {
                    name: thm.name.clone(),
                    branch: Some(b + 1),
                    binding: Some(thm.var_pattern.iter().map(|grp| grp.iter().map(|&v| map(v)).collect()).collect()),
                };
                if calls.contains(&call) || made.contains(&call) {
                    continue;
                }
                let mut subgoals = Vec::new();
                let mut blocked = false;
                for atom in &thm.branches[b].atoms {
                    match atom {
                        Atom::Rel(a) if kb.predicate(&a.predicate).is_some_and(|d| d.kind.is_construction()) => {}
                        Atom::Rel(a) => subgoals.push(SubGoal::Relation(RelFact {
                            predicate: a.predicate.clone(),
                            points: a.vars.iter().map(|&v| map(v)).collect(),
                        })),
                        Atom::Not(a) => {
                            let pts: Vec<Point> = a.vars.iter().map(|&v| map(v)).collect();
                            blocked |= self.store.contains(&a.predicate, &pts).is_some();
                        }
                        Atom::Alg(e) => subgoals.push(SubGoal::Zero(e.rename_points(&map))),
                    }
                }
                if blocked || subgoals.iter().any(|s| seen_goals.contains(s)) {
                    continue;
                }
                made.insert(call.clone());
                let sid = self.supers.len();
                let goal_ids: Vec<usize> = subgoals
                    .into_iter()
                    .map(|goal| {
                        self.goals.push(GoalNode { goal, parent: sid, state: NodeState::Expandable, children: vec![] });
                        self.goals.len() - 1
                    })
                    .collect();
                self.supers.push(SuperNode {
                    call: Some(call),
                    parent: Some(g),
                    subgoals: goal_ids,
                    depth,
                    state: NodeState::Expandable,
                });
                created.push(sid);
            }
        }
        self.goals[g].children.extend(&created);
        created
    }

    fn apply(&mut self, sid: usize) {
        self.supers[sid].state = NodeState::Solved;
        if let Some(call) = self.supers[sid].call.clone() {
            match interactive_apply(&mut self.store, &mut self.goal, &call, self.cfg.exec) {
                Ok(r) => self.applied.push((call.to_string(), r.new_conditions)),
                Err(e) => log::debug!("backward application {call} failed: {e}"),
            }
        }
        let Some(g) = self.supers[sid].parent else { return };
        if self.goals[g].state == NodeState::Solved {
            return;
        }
        if !self.check(&self.goals[g].goal.clone()) {
            if !matches!(self.goals[g].goal, SubGoal::Relation(_)) {
                let more = self.expand(g);
                self.reopened.extend(more);
            }
            return;
        }
        self.goals[g].state = NodeState::Solved;
        let parent = self.goals[g].parent;
        if self.supers[parent].state == NodeState::Expanded && self.all_solved(parent) {
            self.apply(parent);
        }
    }

    fn all_solved(&mut self, sid: usize) -> bool {
        let ids = self.supers[sid].subgoals.clone();
        let mut all = true;
        for g in ids {
            if self.goals[g].state != NodeState::Solved {
                if self.check(&self.goals[g].goal.clone()) {
                    self.goals[g].state = NodeState::Solved;
                } else {
                    all = false;
                }
            }
        }
        all
    }

    fn fail(&mut self, sid: usize) {
        self.supers[sid].state = NodeState::Failed;
        let Some(g) = self.supers[sid].parent else { return };
        if self.goals[g].state == NodeState::Solved {
            return;
        }
        if self.goals[g].children.iter().all(|&c| self.supers[c].state == NodeState::Failed) {
            self.goals[g].state = NodeState::Failed;
            let p = self.goals[g].parent;
            if self.supers[p].state != NodeState::Solved && self.supers[p].state != NodeState::Failed {
                self.fail(p);
            }
        }
    }
}

/// Backward search: sub-goal sets are generated from theorem branches
/// whose conclusions match an open goal; a set whose goals all hold has
/// its theorem applied to the shared store.
pub fn backward_search(problem: &Problem, cfg: &SearchConfig) -> SearchResult {
    let start = Instant::now();
    let deadline = start + cfg.timeout;
    let mut store = problem.store.clone();
    store.deadline = Some(deadline);
    let mut goal = problem.goal.clone();
    let result = |outcome, theorem_seqs, steps| SearchResult {
        outcome,
        theorem_seqs,
        elapsed: start.elapsed().as_secs_f64(),
        steps,
    };
    if goal.update(&store) {
        return result(Outcome::Solved, vec![], 0);
    }
    let kb = store.kb().clone();
    let root_goal = match &goal.kind {
        GoalKind::Value(e) => SubGoal::Value(e.clone()),
        GoalKind::Equal(l, r) => SubGoal::Zero(Expr::sub(l.clone(), r.clone())),
        GoalKind::Relation(r) => SubGoal::Relation(r.clone()),
    };
    let effective = kb
        .theorems()
        .map(|t| t.branches.iter().map(|b| effective(&kb, &b.conclusions)).collect())
        .collect();
    let mut tree = Tree {
        kb: kb.clone(),
        cfg,
        store,
        goal,
        goals: vec![GoalNode { goal: root_goal, parent: 0, state: NodeState::Expandable, children: vec![] }],
        supers: vec![SuperNode { call: None, parent: None, subgoals: vec![0], depth: 0, state: NodeState::Expandable }],
        effective,
        applied: vec![],
        reopened: vec![],
    };
    let mut frontier = Frontier::new(cfg.strategy, cfg.beam_size, cfg.seed, true);
    frontier.push_children(&[0]);
    let mut steps = 0;
    loop {
        if tree.goal.status.is_solved() {
            let seqs = trim(problem, &tree, cfg);
            return result(Outcome::Solved, seqs, steps);
        }
        if Instant::now() >= deadline {
            return result(Outcome::Timeout, vec![], steps);
        }
        if tree.supers[0].state == NodeState::Failed {
            return result(Outcome::Unsolved, vec![], steps);
        }
        let Some(sid) = frontier.pop() else {
            return result(Outcome::Unsolved, vec![], steps);
        };
        if tree.supers[sid].state != NodeState::Expandable {
            continue;
        }
        steps += 1;
        if tree.all_solved(sid) {
            tree.apply(sid);
        } else {
            let open: Vec<usize> = tree.supers[sid]
                .subgoals
                .iter()
                .copied()
                .filter(|&g| tree.goals[g].state != NodeState::Solved)
                .collect();
            let mut created = Vec::new();
            let mut dead = false;
            for g in open {
                if tree.goals[g].state == NodeState::Expandable {
                    created.extend(tree.expand(g));
                }
                let alive = tree.goals[g].children.iter().any(|&c| tree.supers[c].state != NodeState::Failed);
                if !alive {
                    tree.goals[g].state = NodeState::Failed;
                    dead = true;
                }
                if Instant::now() >= deadline {
                    break;
                }
            }
            if dead {
                tree.fail(sid);
            } else {
                tree.supers[sid].state = NodeState::Expanded;
                frontier.push_children(&created);
            }
        }
        let reopened = std::mem::take(&mut tree.reopened);
        frontier.push_children(&reopened);
        let Tree { goal, store, .. } = &mut tree;
        goal.update(store);
    }
}

/// Applications that produced conditions the goal depends on, when they
/// alone reproduce the solution; the full log otherwise.
fn trim(problem: &Problem, tree: &Tree, cfg: &SearchConfig) -> Vec<String> {
    let needed: HashSet<CondId> = tree.goal.status.premises().iter().copied().collect();
    let all: Vec<String> = tree.applied.iter().map(|(c, _)| c.clone()).collect();
    let kept: Vec<String> = tree
        .applied
        .iter()
        .filter(|(_, ids)| ids.iter().any(|i| needed.contains(i)))
        .map(|(c, _)| c.clone())
        .collect();
    if kept.len() < all.len() {
        let mut store = problem.store.clone();
        let mut goal = problem.goal.clone();
        if replay_calls(&mut store, &mut goal, &kept, cfg.exec).is_ok() && goal.status.is_solved() {
            return kept;
        }
    }
    all
}
