//! Condition statements: parsing and rendering.

use super::term::{Cursor, Term, TermKind};
use super::ParseError;
use crate::expr::{AttrTerm, Expr, Op};
use crate::kb::Kb;
use crate::point::{Point, PointSeq};
use crate::problem::{Condition, Fact};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Construction,
    Condition,
    Goal,
}

/// A relation fact with its points flattened.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelFact {
    pub predicate: String,
    pub points: PointSeq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatementBody {
    Relation(RelFact),
    Equal(Expr, Expr),
    Value(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdlStatement {
    pub category: Category,
    pub body: StatementBody,
}

impl CdlStatement {
    pub fn to_text(&self, kb: &Kb) -> String {
        match (&self.body, self.category) {
            (StatementBody::Relation(r), Category::Goal) => format!("Relation({})", render_fact(kb, &r.predicate, &r.points)),
            (StatementBody::Relation(r), _) => render_fact(kb, &r.predicate, &r.points),
            (StatementBody::Equal(l, r), _) => format!("Equal({l},{r})"),
            (StatementBody::Value(e), _) => format!("Value({e})"),
        }
    }
}

const CONSTRUCTION: [&str; 3] = ["Shape", "Collinear", "Cocircular"];

/// Parses one construction or condition line.
pub fn parse_cdl(kb: &Kb, text: &str) -> Result<CdlStatement, ParseError> {
    let mut cur = Cursor::new(text, 1, 1);
    let term = cur.term()?;
    cur.expect_end()?;
    statement(kb, &term, false)
}

/// Parses a goal line: `Value(...)`, `Equal(...)` or `Relation(...)`.
pub fn parse_goal(kb: &Kb, text: &str) -> Result<CdlStatement, ParseError> {
    let mut cur = Cursor::new(text, 1, 1);
    let term = cur.term()?;
    cur.expect_end()?;
    statement(kb, &term, true)
}

/// Parses a bare expression.
pub fn parse_expr(kb: &Kb, text: &str) -> Result<Expr, ParseError> {
    let mut cur = Cursor::new(text, 1, 1);
    let term = cur.term()?;
    cur.expect_end()?;
    to_expr(kb, &term)
}

fn err(t: &Term, msg: impl Into<String>) -> ParseError {
    ParseError::new(t.line, t.col, msg)
}

fn statement(kb: &Kb, term: &Term, goal: bool) -> Result<CdlStatement, ParseError> {
    let TermKind::Call(name, args) = &term.kind else {
        return Err(err(term, "expected a statement of the form Predicate(items)"));
    };
    match name.as_str() {
        "Equal" => {
            if args.len() != 2 {
                return Err(err(term, format!("Equal takes 2 arguments, got {}", args.len())));
            }
            let category = if goal { Category::Goal } else { Category::Condition };
            Ok(CdlStatement {
                category,
                body: StatementBody::Equal(to_expr(kb, &args[0])?, to_expr(kb, &args[1])?),
            })
        }
        "Value" if goal => {
            if args.len() != 1 {
                return Err(err(term, "Value takes 1 argument"));
            }
            Ok(CdlStatement { category: Category::Goal, body: StatementBody::Value(to_expr(kb, &args[0])?) })
        }
        "Relation" if goal => {
            if args.len() != 1 {
                return Err(err(term, "Relation takes 1 argument"));
            }
            let fact = rel_fact(kb, &args[0])?;
            Ok(CdlStatement { category: Category::Goal, body: StatementBody::Relation(fact) })
        }
        _ if goal => Err(err(term, format!("goal must be Value, Equal or Relation, found {name}"))),
        _ => {
            let fact = rel_fact(kb, term)?;
            let category = if CONSTRUCTION.contains(&fact.predicate.as_str()) {
                Category::Construction
            } else {
                Category::Condition
            };
            Ok(CdlStatement { category, body: StatementBody::Relation(fact) })
        }
    }
}

fn point_groups(args: &[Term]) -> Result<Vec<PointSeq>, ParseError> {
    args.iter()
        .map(|a| match &a.kind {
            TermKind::Points(p) => Ok(p.clone()),
            _ => Err(err(a, "malformed point sequence")),
        })
        .collect()
}

fn rel_fact(kb: &Kb, term: &Term) -> Result<RelFact, ParseError> {
    let TermKind::Call(name, args) = &term.kind else {
        return Err(err(term, "expected Predicate(items)"));
    };
    let def = kb
        .predicate(name)
        .ok_or_else(|| err(term, format!("unknown predicate {name}")))?;
    if def.kind == crate::kb::PredicateKind::Attribution {
        return Err(err(term, format!("{name} is an attribution, not a relation")));
    }
    let groups = point_groups(args)?;
    let points: PointSeq = match name.as_str() {
        "Shape" => shape_points(term, &groups)?,
        "Cocircular" => {
            if groups.is_empty() || groups[0].len() != 1 || groups.len() > 2 {
                return Err(err(term, "Cocircular expects a centre and an optional point run"));
            }
            groups.concat()
        }
        _ => {
            let flat = groups.concat();
            if let Some(n) = def.arity() {
                if flat.len() != n {
                    return Err(err(term, format!("{name} expects {n} points, got {}", flat.len())));
                }
            } else if groups.len() != 1 {
                return Err(err(term, format!("{name} expects a single point run")));
            }
            flat
        }
    };
    if !def.fv_ok(&points) {
        return Err(err(term, format!("{name}: illegal point layout")));
    }
    Ok(RelFact { predicate: name.clone(), points })
}

fn shape_points(term: &Term, edges: &[PointSeq]) -> Result<PointSeq, ParseError> {
    if edges.is_empty() || edges.iter().any(|e| e.len() != 2) {
        return Err(err(term, "Shape edges must be point pairs"));
    }
    if edges.len() == 1 {
        return Ok(edges[0].clone());
    }
    for w in 0..edges.len() {
        let next = &edges[(w + 1) % edges.len()];
        if edges[w][1] != next[0] {
            return Err(err(term, "Shape edges do not form a closed chain"));
        }
    }
    Ok(edges.iter().map(|e| e[0]).collect())
}

fn to_expr(kb: &Kb, term: &Term) -> Result<Expr, ParseError> {
    match &term.kind {
        TermKind::Num(n) => Ok(Expr::Num(n.clone())),
        TermKind::Ident(s) => Ok(Expr::Free(s.clone())),
        TermKind::Points(_) => Err(err(term, "point sequence outside an attribute term")),
        TermKind::Call(name, args) => {
            if let Some(op) = Op::from_name(name) {
                let (lo, hi) = op.arity();
                if args.len() < lo || args.len() > hi {
                    return Err(err(term, format!("{name}: wrong number of arguments ({})", args.len())));
                }
                let args = args.iter().map(|a| to_expr(kb, a)).collect::<Result<_, _>>()?;
                return Ok(Expr::Op(op, args));
            }
            if name == "Free" {
                return match args.as_slice() {
                    [Term { kind: TermKind::Ident(s), .. }] => Ok(Expr::Free(s.clone())),
                    _ => Err(err(term, "Free takes one lowercase symbol")),
                };
            }
            let def = kb.predicate(name).ok_or_else(|| err(term, format!("unknown attribution {name}")))?;
            if def.kind != crate::kb::PredicateKind::Attribution {
                return Err(err(term, format!("{name} is not an attribution")));
            }
            let groups = point_groups(args)?;
            let points: Vec<Point> = groups.concat();
            if Some(points.len()) != def.arity() {
                return Err(err(term, format!("{name} expects {} points", def.arity().unwrap_or(0))));
            }
            Ok(Expr::Attr(AttrTerm { name: name.clone(), points, groups: groups.iter().map(Vec::len).collect() }))
        }
    }
}

/// Reads an expression with attribute names checked only syntactically,
/// used inside definition files where points are variables.
pub(crate) fn term_to_expr_with(kb_attr: &dyn Fn(&str) -> Option<usize>, term: &Term) -> Result<Expr, ParseError> {
    match &term.kind {
        TermKind::Num(n) => Ok(Expr::Num(n.clone())),
        TermKind::Ident(s) => Ok(Expr::Free(s.clone())),
        TermKind::Points(_) => Err(err(term, "point sequence outside an attribute term")),
        TermKind::Call(name, args) => {
            if let Some(op) = Op::from_name(name) {
                let (lo, hi) = op.arity();
                if args.len() < lo || args.len() > hi {
                    return Err(err(term, format!("{name}: wrong number of arguments ({})", args.len())));
                }
                let args = args.iter().map(|a| term_to_expr_with(kb_attr, a)).collect::<Result<_, _>>()?;
                return Ok(Expr::Op(op, args));
            }
            let groups = point_groups(args)?;
            let points: Vec<Point> = groups.concat();
            if let Some(n) = kb_attr(name) {
                if n != points.len() {
                    return Err(err(term, format!("{name} expects {n} points")));
                }
            }
            Ok(Expr::Attr(AttrTerm { name: name.clone(), points, groups: groups.iter().map(Vec::len).collect() }))
        }
    }
}

pub fn render_fact(kb: &Kb, predicate: &str, points: &[Point]) -> String {
    match kb.predicate(predicate) {
        Some(def) => def.render(points),
        None => format!("{predicate}({})", crate::point::seq_string(points)),
    }
}

/// `Sub(l,r)` renders as `Equal(l,r)`; anything else as `Equal(e,0)`.
pub fn render_equation(e: &Expr) -> String {
    match e {
        Expr::Op(Op::Sub, args) if args.len() == 2 => format!("Equal({},{})", args[0], args[1]),
        other => format!("Equal({other},0)"),
    }
}

/// Formal text of a stored condition.
pub fn inverse_parse(kb: &Kb, condition: &Condition) -> String {
    match &condition.fact {
        Fact::Relation(r) => render_fact(kb, &r.predicate, &r.points),
        Fact::Equation(e) => render_equation(e),
    }
}
