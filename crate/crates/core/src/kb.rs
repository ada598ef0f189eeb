//! Knowledge base: predicate and theorem definitions.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;
use serde::Serialize;

use crate::expr::Expr;
use crate::gpl::{GplExpr, RelAtom, TheoremBranch};
use crate::lang::{parse_gdl, GdlError};
use crate::point::{grouped_string, points, Point, PointSeq, Var};
use crate::topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateKind {
    Structure,
    BasicEntity,
    Entity,
    Relation,
    Attribution,
}

impl PredicateKind {
    /// Structure and basic-entity predicates are built in.
    pub fn is_construction(self) -> bool {
        matches!(self, PredicateKind::Structure | PredicateKind::BasicEntity)
    }
}

/// A fact asserted by a theorem or an `extend` rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Conclusion {
    Rel(RelAtom),
    /// `lhs - rhs`, kept as a `Sub` node.
    Eq(Expr),
}

impl Conclusion {
    pub fn vars(&self) -> Vec<Var> {
        match self {
            Conclusion::Rel(a) => a.vars.clone(),
            Conclusion::Eq(e) => e.points(),
        }
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Rel(a) => write!(f, "{a}"),
            Conclusion::Eq(e) => f.write_str(&crate::lang::render_equation(e)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PredicateDef {
    pub name: String,
    pub kind: PredicateKind,
    /// Comma groups of distinct variables, e.g. `M,AB`.
    pub var_pattern: Vec<Vec<Var>>,
    /// Minimum length for built-ins taking a free-length point run.
    pub variadic: Option<usize>,
    pub ee_check: Vec<RelAtom>,
    pub fv_check: Vec<Vec<Var>>,
    pub multi: Vec<Vec<Var>>,
    pub extend: Vec<Conclusion>,
    pub sym: Option<String>,
}

impl PredicateDef {
    fn builtin(name: &str, kind: PredicateKind, pattern: &str, multi: &[&str]) -> PredicateDef {
        let vars = points(pattern).expect("builtin pattern");
        PredicateDef {
            name: name.into(),
            kind,
            var_pattern: vec![vars],
            variadic: None,
            ee_check: vec![],
            fv_check: vec![],
            multi: multi.iter().map(|m| points(m).expect("builtin multi")).collect(),
            extend: vec![],
            sym: None,
        }
    }

    fn variadic(name: &str, kind: PredicateKind, min: usize) -> PredicateDef {
        PredicateDef {
            name: name.into(),
            kind,
            var_pattern: vec![],
            variadic: Some(min),
            ee_check: vec![],
            fv_check: vec![],
            multi: vec![],
            extend: vec![],
            sym: None,
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        self.var_pattern.iter().flatten().copied().collect()
    }

    pub fn arity(&self) -> Option<usize> {
        match self.variadic {
            Some(_) => None,
            None => Some(self.var_pattern.iter().map(Vec::len).sum()),
        }
    }

    pub fn groups(&self) -> Vec<usize> {
        self.var_pattern.iter().map(Vec::len).collect()
    }

    pub fn is_builtin(&self) -> bool {
        self.kind.is_construction()
    }

    /// Binds the variable pattern to concrete points.
    pub fn binding(&self, pts: &[Point]) -> HashMap<Var, Point> {
        self.vars().into_iter().zip(pts.iter().copied()).collect()
    }

    /// Every equivalent point tuple for a fact, the given one first.
    pub fn reps(&self, pts: &[Point]) -> Vec<PointSeq> {
        match self.name.as_str() {
            "Shape" | "Polygon" => {
                let mut out = topology::rotations(pts);
                out.sort();
                if let Some(i) = out.iter().position(|r| r.as_slice() == pts) {
                    out.swap(0, i);
                }
                return out;
            }
            "Collinear" => {
                let mut rev = pts.to_vec();
                rev.reverse();
                return if rev == pts { vec![rev] } else { vec![pts.to_vec(), rev] };
            }
            "Cocircular" => {
                if pts.len() <= 2 {
                    return vec![pts.to_vec()];
                }
                let centre = pts[0];
                let mut out: Vec<PointSeq> = topology::rotations(&pts[1..])
                    .into_iter()
                    .map(|r| std::iter::once(centre).chain(r).collect())
                    .collect();
                out.sort();
                if let Some(i) = out.iter().position(|r| r.as_slice() == pts) {
                    out.swap(0, i);
                }
                return out;
            }
            _ => {}
        }
        let mut out = vec![pts.to_vec()];
        let bind = self.binding(pts);
        for layout in &self.multi {
            let rep: PointSeq = layout.iter().map(|v| bind[v]).collect();
            if !out.contains(&rep) {
                out.push(rep);
            }
        }
        out
    }

    /// Canonical representative: the smallest equivalent tuple.
    pub fn canonical(&self, pts: &[Point]) -> PointSeq {
        self.reps(pts).into_iter().min().expect("at least one rep")
    }

    /// Format validity: length, plus point-equality pattern of some layout.
    pub fn fv_ok(&self, pts: &[Point]) -> bool {
        if let Some(min) = self.variadic {
            let distinct = pts.iter().collect::<std::collections::BTreeSet<_>>().len() == pts.len();
            return pts.len() >= min && distinct;
        }
        let layouts: Vec<Vec<Var>> = if self.fv_check.is_empty() { vec![self.vars()] } else { self.fv_check.clone() };
        layouts.iter().any(|layout| {
            layout.len() == pts.len()
                && (0..pts.len()).all(|i| (0..pts.len()).all(|j| (layout[i] == layout[j]) == (pts[i] == pts[j])))
        })
    }

    /// Renders a fact of this predicate, e.g. `IsMidpointOfLine(M,AB)`.
    pub fn render(&self, pts: &[Point]) -> String {
        match self.name.as_str() {
            "Shape" if pts.len() >= 3 => {
                let edges: Vec<String> = (0..pts.len())
                    .map(|i| format!("{}{}", pts[i], pts[(i + 1) % pts.len()]))
                    .collect();
                format!("Shape({})", edges.join(","))
            }
            "Cocircular" if pts.len() > 1 => {
                format!("Cocircular({},{})", pts[0], crate::point::seq_string(&pts[1..]))
            }
            _ => format!("{}({})", self.name, grouped_string(pts, &self.groups())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TheoremDef {
    pub name: String,
    pub var_pattern: Vec<Vec<Var>>,
    pub premise: GplExpr,
    pub conclusions: Vec<Conclusion>,
    /// DNF branches, statically reordered.
    pub branches: Vec<TheoremBranch>,
}

impl TheoremDef {
    /// Distinct variables in order of first appearance.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for &v in self.var_pattern.iter().flatten() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn groups(&self) -> Vec<usize> {
        self.var_pattern.iter().map(Vec::len).collect()
    }

    /// Header pattern with variables replaced, e.g. `AOC,BOD`.
    pub fn render_binding(&self, map: &dyn Fn(Var) -> Point) -> String {
        self.var_pattern
            .iter()
            .map(|g| g.iter().map(|&v| map(v).as_char()).collect::<String>())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Reads point groups written against the header pattern.
    pub fn parse_binding(&self, groups: &[PointSeq]) -> Option<HashMap<Var, Point>> {
        if groups.len() != self.var_pattern.len() {
            return None;
        }
        let mut map = HashMap::new();
        for (g, pts) in self.var_pattern.iter().zip(groups) {
            if g.len() != pts.len() {
                return None;
            }
            for (&v, &p) in g.iter().zip(pts) {
                if *map.entry(v).or_insert(p) != p {
                    return None;
                }
            }
        }
        Some(map)
    }
}

#[derive(Clone, Debug)]
pub struct Kb {
    predicates: IndexMap<String, PredicateDef>,
    theorems: IndexMap<String, TheoremDef>,
    by_sym: HashMap<String, String>,
}

pub const BUNDLED_GDL: &str = include_str!("../data/kb.gdl");

impl Kb {
    /// Only the nine built-in predicates.
    pub fn builtin() -> Kb {
        use PredicateKind::*;
        let defs = vec![
            PredicateDef::variadic("Shape", Structure, 2),
            PredicateDef::variadic("Collinear", Structure, 3),
            PredicateDef::variadic("Cocircular", Structure, 1),
            PredicateDef::builtin("Point", BasicEntity, "A", &[]),
            PredicateDef::builtin("Line", BasicEntity, "AB", &["BA"]),
            PredicateDef::builtin("Arc", BasicEntity, "OAB", &[]),
            PredicateDef::builtin("Angle", BasicEntity, "ABC", &[]),
            PredicateDef::variadic("Polygon", BasicEntity, 3),
            PredicateDef::builtin("Circle", BasicEntity, "O", &[]),
        ];
        Kb {
            predicates: defs.into_iter().map(|d| (d.name.clone(), d)).collect(),
            theorems: IndexMap::new(),
            by_sym: HashMap::new(),
        }
    }

    pub fn from_gdl(text: &str) -> Result<Kb, GdlError> {
        let mut kb = Kb::builtin();
        let (preds, theorems) = parse_gdl(text)?;
        for p in preds {
            if let Some(sym) = &p.sym {
                kb.by_sym.insert(sym.clone(), p.name.clone());
            }
            kb.predicates.insert(p.name.clone(), p);
        }
        for t in theorems {
            kb.theorems.insert(t.name.clone(), t);
        }
        Ok(kb)
    }

    /// The library shipped with the crate.
    pub fn bundled() -> Arc<Kb> {
        static KB: OnceLock<Arc<Kb>> = OnceLock::new();
        KB.get_or_init(|| Arc::new(Kb::from_gdl(BUNDLED_GDL).expect("bundled library parses")))
            .clone()
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        self.predicates.get(name)
    }

    pub fn predicates(&self) -> impl Iterator<Item = &PredicateDef> {
        self.predicates.values()
    }

    pub fn theorem(&self, name: &str) -> Option<&TheoremDef> {
        self.theorems.get(name)
    }

    pub fn theorems(&self) -> impl Iterator<Item = &TheoremDef> {
        self.theorems.values()
    }

    pub fn attribution_by_sym(&self, sym: &str) -> Option<&PredicateDef> {
        self.by_sym.get(sym).and_then(|n| self.predicates.get(n))
    }

    pub fn is_attribution(&self, name: &str) -> bool {
        self.predicate(name).is_some_and(|p| p.kind == PredicateKind::Attribution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_builtins() {
        let kb = Kb::builtin();
        assert_eq!(kb.predicates().count(), 9);
        assert!(kb.predicates().all(|p| p.is_builtin()));
    }

    #[test]
    fn line_reps_include_reverse() {
        let kb = Kb::builtin();
        let line = kb.predicate("Line").unwrap();
        let reps = line.reps(&points("BA").unwrap());
        assert_eq!(reps.len(), 2);
        assert_eq!(line.canonical(&points("BA").unwrap()), points("AB").unwrap());
    }

    #[test]
    fn fv_default_requires_distinct() {
        let kb = Kb::builtin();
        let angle = kb.predicate("Angle").unwrap();
        assert!(angle.fv_ok(&points("ABC").unwrap()));
        assert!(!angle.fv_ok(&points("ABA").unwrap()));
        assert!(!angle.fv_ok(&points("AB").unwrap()));
    }

    #[test]
    fn shape_renders_as_edges() {
        let kb = Kb::builtin();
        let s = kb.predicate("Shape").unwrap();
        assert_eq!(s.render(&points("ABC").unwrap()), "Shape(AB,BC,CA)");
        assert_eq!(s.render(&points("AB").unwrap()), "Shape(AB)");
    }
}
