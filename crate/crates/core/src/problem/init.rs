use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use super::goal::{Goal, GoalKind};
use super::store::{ConditionStore, Fact, EXTENDED, PREREQUISITE};
use crate::expr::Expr;
use crate::gpl::CondId;
use crate::kb::Kb;
use crate::lang::{parse_cdl, parse_goal, Category, StatementBody};
use crate::par::Exec;
use crate::point::{seq_string, Point, PointSeq};
use crate::topology::{construct_all, multi_repr, TsiSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{statement}: {message}")]
pub struct InitError {
    pub statement: String,
    pub message: String,
}

fn init_err(statement: &str, message: impl ToString) -> InitError {
    InitError { statement: statement.to_string(), message: message.to_string() }
}

/// A problem ready for reasoning: the initial store and its goal.
#[derive(Clone, Debug)]
pub struct Problem {
    pub id: String,
    pub store: ConditionStore,
    pub goal: Goal,
}

impl Problem {
    pub fn kb(&self) -> &Arc<Kb> {
        self.store.kb()
    }
}

struct Diagram {
    shapes: Vec<(PointSeq, CondId)>,
    collinear: Vec<(PointSeq, CondId)>,
    cocircular: Vec<(PointSeq, CondId)>,
    segments: Vec<(PointSeq, CondId)>,
}

impl Diagram {
    fn collinear_run(&self, pts: &[Point]) -> Option<(&PointSeq, CondId)> {
        self.collinear
            .iter()
            .find(|(run, _)| pts.iter().all(|p| run.contains(p)))
            .map(|(r, id)| (r, *id))
    }

    /// True when `b` lies strictly between `a` and `c` on a stored line.
    fn between(&self, a: Point, b: Point, c: Point) -> Option<CondId> {
        let (run, id) = self.collinear_run(&[a, b, c])?;
        let pos = |p: Point| run.iter().position(|&x| x == p).unwrap();
        let (pa, pb, pc) = (pos(a), pos(b), pos(c));
        ((pa < pb && pb < pc) || (pc < pb && pb < pa)).then_some(id)
    }

    /// Removes vertices lying on a straight boundary stretch.
    fn contract(&self, seq: &[Point]) -> (PointSeq, Vec<CondId>) {
        let mut cur = seq.to_vec();
        let mut used = Vec::new();
        loop {
            let n = cur.len();
            if n < 3 {
                return (cur, used);
            }
            let hit = (0..n).find_map(|i| {
                self.between(cur[(i + n - 1) % n], cur[i], cur[(i + 1) % n]).map(|id| (i, id))
            });
            match hit {
                Some((i, id)) => {
                    cur.remove(i);
                    used.push(id);
                }
                None => return (cur, used),
            }
        }
    }

    /// Points on the ray from `vertex` through `through`, `through` included.
    fn ray(&self, vertex: Point, through: Point) -> (BTreeSet<Point>, Vec<CondId>) {
        let mut out = BTreeSet::from([through]);
        let mut ids = Vec::new();
        for (run, id) in &self.collinear {
            let (Some(pv), Some(pt)) = (run.iter().position(|&p| p == vertex), run.iter().position(|&p| p == through))
            else {
                continue;
            };
            for (i, &p) in run.iter().enumerate() {
                if i != pv && (i > pv) == (pt > pv) && p != through {
                    out.insert(p);
                    ids.push(*id);
                }
            }
        }
        ids.sort();
        ids.dedup();
        (out, ids)
    }
}

/// Ordered subsequences of length at least 3.
fn sub_runs(run: &[Point]) -> Vec<PointSeq> {
    let n = run.len();
    let mut out = Vec::new();
    if n > 16 {
        return out;
    }
    for mask in 0u32..(1 << n) {
        if mask.count_ones() >= 3 && mask.count_ones() < n as u32 {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| run[i]).collect());
        }
    }
    out.sort();
    out
}

/// Centre followed by every proper non-empty ordered subset of the circle points.
fn cocircular_sub_runs(run: &[Point]) -> Vec<PointSeq> {
    let ring = &run[1..];
    let n = ring.len();
    if n < 2 || n > 12 {
        return Vec::new();
    }
    (1u32..(1 << n) - 1)
        .map(|mask| std::iter::once(run[0]).chain((0..n).filter(|i| mask & (1 << i) != 0).map(|i| ring[i])).collect())
        .collect()
}

fn distinct(seq: &[Point]) -> bool {
    seq.iter().collect::<BTreeSet<_>>().len() == seq.len()
}

/// Builds the initial store: construction statements with every derived
/// basic entity, then conditions, their extensions, and the goal.
pub fn init_problem(
    kb: Arc<Kb>,
    id: &str,
    construction: &[String],
    conditions: &[String],
    goal: &str,
    exec: Exec,
) -> Result<Problem, InitError> {
    let mut store = ConditionStore::new(kb.clone());
    let mut diagram = Diagram { shapes: vec![], collinear: vec![], cocircular: vec![], segments: vec![] };
    let mut points: BTreeMap<Point, CondId> = BTreeMap::new();

    for text in construction {
        let st = parse_cdl(&kb, text).map_err(|e| init_err(text, e))?;
        let StatementBody::Relation(fact) = st.body else { unreachable!() };
        if st.category != Category::Construction {
            return Err(init_err(text, "not a construction statement"));
        }
        let pts = fact.points.clone();
        let pred = fact.predicate.clone();
        let Some(cid) = store.add_condition(Fact::Relation(fact), vec![], PREREQUISITE).map_err(|e| init_err(text, e))?
        else {
            continue;
        };
        for &p in &pts {
            points.entry(p).or_insert(cid);
        }
        match pred.as_str() {
            "Shape" if pts.len() == 2 => diagram.segments.push((pts, cid)),
            "Shape" => diagram.shapes.push((pts, cid)),
            "Collinear" => diagram.collinear.push((pts, cid)),
            _ => diagram.cocircular.push((pts, cid)),
        }
    }
    derive_entities(&mut store, &diagram, &points, exec);

    for text in conditions {
        let st = parse_cdl(&kb, text).map_err(|e| init_err(text, e))?;
        if st.category == Category::Construction {
            return Err(init_err(text, "construction statement among conditions"));
        }
        let fact = match st.body {
            StatementBody::Relation(r) => Fact::Relation(r),
            StatementBody::Equal(l, r) => Fact::Equation(Expr::sub(l, r)),
            StatementBody::Value(_) => return Err(init_err(text, "Value is only valid as a goal")),
        };
        store.add_condition(fact, vec![], PREREQUISITE).map_err(|e| init_err(text, e))?;
    }
    store.auto_extend();

    let g = parse_goal(&kb, goal).map_err(|e| init_err(goal, e))?;
    let kind = match g.body {
        StatementBody::Value(e) => GoalKind::Value(e),
        StatementBody::Equal(l, r) => GoalKind::Equal(l, r),
        StatementBody::Relation(r) => GoalKind::Relation(r),
    };
    if let GoalKind::Relation(r) = &kind {
        if kb.predicate(&r.predicate).is_some_and(|d| d.kind.is_construction()) {
            return Err(init_err(goal, "goal must not be a construction fact"));
        }
    }
    let mut goal = Goal::new(kind);
    goal.update(&store);
    Ok(Problem { id: id.to_string(), store, goal })
}

fn add(store: &mut ConditionStore, predicate: &str, pts: PointSeq, premises: Vec<CondId>) -> Option<CondId> {
    match store.add_condition(Fact::relation(predicate, pts.clone()), premises, EXTENDED) {
        Ok(id) => id.or_else(|| store.contains(predicate, &pts)),
        Err(e) => {
            log::debug!("derived entity skipped: {e}");
            None
        }
    }
}

fn derive_entities(store: &mut ConditionStore, d: &Diagram, points: &BTreeMap<Point, CondId>, exec: Exec) {
    for (&p, &src) in points {
        add(store, "Point", vec![p], vec![src]);
    }
    for (run, id) in &d.collinear {
        for sub in sub_runs(run) {
            add(store, "Collinear", sub, vec![*id]);
        }
    }

    let mut lines: BTreeMap<PointSeq, CondId> = BTreeMap::new();
    let mut line = |a: Point, b: Point, src: CondId| {
        let key = if a < b { vec![a, b] } else { vec![b, a] };
        lines.entry(key).or_insert(src);
    };
    for (seg, id) in &d.segments {
        line(seg[0], seg[1], *id);
    }
    for (run, id) in &d.collinear {
        for i in 0..run.len() {
            for j in i + 1..run.len() {
                line(run[i], run[j], *id);
            }
        }
    }

    let unit_ids: Vec<(TsiSet, CondId)> = d.shapes.iter().map(|(s, id)| (multi_repr(s), *id)).collect();
    let units: Vec<TsiSet> = unit_ids.iter().map(|(u, _)| u.clone()).collect();
    let mut polygons: BTreeMap<PointSeq, Vec<CondId>> = BTreeMap::new();
    for shape in construct_all(&units, exec) {
        let seq = shape.canonical();
        if !distinct(seq) {
            log::debug!("self-touching shape {} dropped", seq_string(seq));
            continue;
        }
        let pts = shape.points();
        let mut premises: Vec<CondId> =
            unit_ids.iter().filter(|(u, _)| u.points().is_subset(&pts)).map(|(_, id)| *id).collect();
        for i in 0..seq.len() {
            line(seq[i], seq[(i + 1) % seq.len()], premises[0]);
        }
        let (contracted, used) = d.contract(seq);
        if contracted.len() < 3 {
            continue;
        }
        premises.extend(used);
        premises.sort();
        premises.dedup();
        let key = multi_repr(&contracted).canonical().clone();
        polygons.entry(key).or_insert(premises);
    }

    for (l, src) in &lines {
        add(store, "Line", l.clone(), vec![*src]);
    }
    let mut angles: BTreeMap<PointSeq, CondId> = BTreeMap::new();
    for (poly, premises) in &polygons {
        let Some(pid) = add(store, "Polygon", poly.clone(), premises.clone()) else { continue };
        let n = poly.len();
        for i in 0..n {
            let a = vec![poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]];
            if d.between(a[0], a[1], a[2]).is_none() {
                if let Some(aid) = add(store, "Angle", a.clone(), vec![pid]) {
                    angles.insert(a, aid);
                }
            }
        }
    }
    same_angle_equations(store, d, &angles);

    for (run, id) in &d.cocircular {
        let centre = run[0];
        add(store, "Circle", vec![centre], vec![*id]);
        for sub in cocircular_sub_runs(run) {
            add(store, "Cocircular", sub, vec![*id]);
        }
        for &a in &run[1..] {
            for &b in &run[1..] {
                if a != b {
                    add(store, "Arc", vec![centre, a, b], vec![*id]);
                }
            }
        }
    }
}

/// Angles naming the same pair of rays get equal measures.
fn same_angle_equations(store: &mut ConditionStore, d: &Diagram, angles: &BTreeMap<PointSeq, CondId>) {
    let mut classes: BTreeMap<(Point, BTreeSet<Point>, BTreeSet<Point>), Vec<(PointSeq, Vec<CondId>)>> = BTreeMap::new();
    for (a, &aid) in angles {
        let (r1, i1) = d.ray(a[1], a[0]);
        let (r2, i2) = d.ray(a[1], a[2]);
        let mut premises = vec![aid];
        premises.extend(i1);
        premises.extend(i2);
        classes.entry((a[1], r1, r2)).or_default().push((a.clone(), premises));
    }
    for members in classes.values() {
        let (first, p0) = &members[0];
        for (other, p1) in &members[1..] {
            let mut premises: Vec<CondId> = p0.iter().chain(p1).copied().collect();
            premises.sort();
            premises.dedup();
            let e = Expr::sub(
                Expr::attr("MeasureOfAngle", &seq_string(first)),
                Expr::attr("MeasureOfAngle", &seq_string(other)),
            );
            if let Err(e) = store.add_condition(Fact::Equation(e), premises, EXTENDED) {
                log::debug!("angle identification skipped: {e}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::points;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn triangle_entities() {
        let p = init_problem(
            Kb::bundled(),
            "t",
            &strings(&["Shape(AB,BC,CA)"]),
            &[],
            "Value(MeasureOfAngle(ABC))",
            Exec::Sequential,
        )
        .unwrap();
        let s = &p.store;
        for l in ["AB", "BC", "CA"] {
            assert!(s.contains("Line", &points(l).unwrap()).is_some());
        }
        for a in ["ABC", "BCA", "CAB"] {
            assert!(s.contains("Angle", &points(a).unwrap()).is_some());
        }
        assert!(s.contains("Polygon", &points("BCA").unwrap()).is_some());
        assert!(!p.goal.status.is_solved());
    }

    #[test]
    fn split_triangle_contracts_composite() {
        let p = init_problem(
            Kb::bundled(),
            "t",
            &strings(&["Shape(AB,BD,DA)", "Shape(AD,DC,CA)", "Collinear(BDC)"]),
            &[],
            "Value(MeasureOfAngle(ABC))",
            Exec::Sequential,
        )
        .unwrap();
        let s = &p.store;
        assert!(s.contains("Polygon", &points("ABC").unwrap()).is_some());
        assert!(s.contains("Polygon", &points("ABDC").unwrap()).is_none());
        assert!(s.contains("Angle", &points("BDC").unwrap()).is_none());
        assert!(s.contains("Line", &points("BC").unwrap()).is_some());
        assert!(s.contains("Angle", &points("ABC").unwrap()).is_some());
        assert!(s.contains("Angle", &points("ABD").unwrap()).is_some());
        let same = Expr::sub(Expr::attr("MeasureOfAngle", "ABC"), Expr::attr("MeasureOfAngle", "ABD"));
        assert_eq!(s.solve_expr(&same).value.map(|v| v.is_zero()), Some(true));
    }

    #[test]
    fn bad_condition_names_statement() {
        let err = init_problem(
            Kb::bundled(),
            "t",
            &strings(&["Shape(AB,BC,CA)"]),
            &strings(&["Equal(LengthOfLine(AZ),3)"]),
            "Value(LengthOfLine(AB))",
            Exec::Sequential,
        )
        .unwrap_err();
        assert_eq!(err.statement, "Equal(LengthOfLine(AZ),3)");
    }

    #[test]
    fn goal_present_initially() {
        let p = init_problem(
            Kb::bundled(),
            "t",
            &strings(&["Shape(AB,BC,CA)"]),
            &strings(&["Equal(LengthOfLine(AB),3)"]),
            "Value(LengthOfLine(BA))",
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(p.goal.status.answer().map(|v| v.to_string()), Some("3".into()));
    }

    #[test]
    fn cocircular_sub_runs_are_derived() {
        let p = init_problem(
            Kb::bundled(),
            "t",
            &strings(&["Shape(AB,BC,CA)", "Cocircular(O,ABC)"]),
            &[],
            "Value(RadiusOfCircle(O))",
            Exec::Sequential,
        )
        .unwrap();
        let s = &p.store;
        for run in ["OA", "OB", "OAC", "OCA", "OBC"] {
            assert!(s.contains("Cocircular", &points(run).unwrap()).is_some(), "{run}");
        }
        assert!(s.contains("Circle", &points("O").unwrap()).is_some());
        assert!(s.contains("Arc", &points("OAB").unwrap()).is_some());
    }
}
