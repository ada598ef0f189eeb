//! Definition-file reader.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::cdl::term_to_expr_with;
use super::term::{Cursor, Term, TermKind};
use super::ParseError;
use crate::expr::Expr;
use crate::gpl::{self, Atom, GplExpr, RelAtom, TheoremBranch};
use crate::kb::{Conclusion, Kb, PredicateDef, PredicateKind, TheoremDef};
use crate::point::{Point, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GdlError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("line {line}: unknown predicate {name}")]
    UnknownPredicate { line: usize, name: String },
    #[error("line {line}: duplicate definition {name}")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("extend rules form a cycle through {0}")]
    ExtendCycle(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Header {
    Entity,
    Relation,
    Attribution,
    Theorem,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    col: usize,
}

struct Block {
    header: Header,
    name: String,
    pattern: Vec<Vec<Var>>,
    line: usize,
    entries: Vec<Entry>,
}

fn invalid(line: usize, message: impl Into<String>) -> GdlError {
    GdlError::Invalid { line, message: message.into() }
}

/// Reads predicate and theorem definitions. Built-in predicates are always
/// known; names defined in `text` may be referenced before their block.
pub fn parse_gdl(text: &str) -> Result<(Vec<PredicateDef>, Vec<TheoremDef>), GdlError> {
    let blocks = split_blocks(text)?;
    let builtins = Kb::builtin();

    let mut arity: HashMap<String, (PredicateKind, Option<usize>)> = builtins
        .predicates()
        .map(|p| (p.name.clone(), (p.kind, p.arity())))
        .collect();
    let mut theorem_names = HashSet::new();
    for b in &blocks {
        let kind = match b.header {
            Header::Entity => PredicateKind::Entity,
            Header::Relation => PredicateKind::Relation,
            Header::Attribution => PredicateKind::Attribution,
            Header::Theorem => {
                if !theorem_names.insert(b.name.clone()) {
                    return Err(GdlError::Duplicate { line: b.line, name: b.name.clone() });
                }
                continue;
            }
        };
        let n = b.pattern.iter().map(Vec::len).sum();
        if arity.insert(b.name.clone(), (kind, Some(n))).is_some() {
            return Err(GdlError::Duplicate { line: b.line, name: b.name.clone() });
        }
    }

    let ctx = Ctx { arity: &arity };
    let mut preds = Vec::new();
    let mut theorems = Vec::new();
    for b in &blocks {
        match b.header {
            Header::Theorem => theorems.push(ctx.theorem(b)?),
            _ => preds.push(ctx.predicate(b)?),
        }
    }
    check_syms(&preds, &blocks)?;
    check_extend_cycles(&preds)?;
    Ok((preds, theorems))
}

fn split_blocks(text: &str) -> Result<Vec<Block>, GdlError> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let body = content.trim();
        let header = [
            ("Entity ", Header::Entity),
            ("Relation ", Header::Relation),
            ("Attribution ", Header::Attribution),
            ("Theorem ", Header::Theorem),
        ]
        .into_iter()
        .find(|(kw, _)| body.starts_with(kw));
        if let Some((kw, header)) = header {
            let rest = &body[kw.len()..];
            let mut cur = Cursor::new(rest, line, indent + kw.len() + 1);
            let term = cur.term()?;
            cur.expect_end()?;
            let TermKind::Call(name, args) = term.kind else {
                return Err(ParseError::new(line, indent + 1, "expected Name(pattern)").into());
            };
            let mut pattern = Vec::new();
            for a in &args {
                match &a.kind {
                    TermKind::Points(p) => pattern.push(p.clone()),
                    _ => return Err(ParseError::new(a.line, a.col, "expected point variables").into()),
                }
            }
            let flat: Vec<Var> = pattern.iter().flatten().copied().collect();
            if header != Header::Theorem && flat.iter().collect::<BTreeSet<_>>().len() != flat.len() {
                return Err(invalid(line, format!("{name}: repeated variable in pattern")));
            }
            blocks.push(Block { header, name, pattern, line, entries: Vec::new() });
            continue;
        }
        let Some(colon) = body.find(':') else {
            return Err(ParseError::new(line, indent + 1, "expected a definition header or `key: value`").into());
        };
        let key = body[..colon].trim().to_string();
        let value = body[colon + 1..].to_string();
        let col = indent + colon + 2;
        let Some(block) = blocks.last_mut() else {
            return Err(ParseError::new(line, indent + 1, "entry outside a definition block").into());
        };
        block.entries.push(Entry { key, value, line, col });
    }
    Ok(blocks)
}

struct Ctx<'a> {
    arity: &'a HashMap<String, (PredicateKind, Option<usize>)>,
}

impl Ctx<'_> {
    fn attr_arity(&self, name: &str) -> Option<usize> {
        match self.arity.get(name) {
            Some((PredicateKind::Attribution, n)) => *n,
            _ => None,
        }
    }

    fn check_expr(&self, e: &Expr, line: usize) -> Result<(), GdlError> {
        for a in e.attrs() {
            match self.arity.get(&a.name) {
                Some((PredicateKind::Attribution, _)) => {}
                Some(_) => return Err(invalid(line, format!("{} is not an attribution", a.name))),
                None => return Err(GdlError::UnknownPredicate { line, name: a.name.clone() }),
            }
        }
        Ok(())
    }

    fn check_atom(&self, a: &RelAtom, line: usize) -> Result<(), GdlError> {
        match self.arity.get(&a.predicate) {
            None => Err(GdlError::UnknownPredicate { line, name: a.predicate.clone() }),
            Some((PredicateKind::Attribution, _)) => Err(invalid(line, format!("{} is an attribution", a.predicate))),
            Some((_, Some(n))) if *n != a.vars.len() => {
                Err(invalid(line, format!("{} expects {} points, got {}", a.predicate, n, a.vars.len())))
            }
            _ => Ok(()),
        }
    }

    fn gpl(&self, e: &Entry) -> Result<GplExpr, GdlError> {
        let mut cur = Cursor::new(&e.value, e.line, e.col);
        let g = self.gpl_or(&mut cur, e.line)?;
        cur.expect_end()?;
        Ok(g)
    }

    fn gpl_or(&self, cur: &mut Cursor, line: usize) -> Result<GplExpr, GdlError> {
        let mut parts = vec![self.gpl_and(cur, line)?];
        while cur.eat('|') {
            parts.push(self.gpl_and(cur, line)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { GplExpr::Or(parts) })
    }

    fn gpl_and(&self, cur: &mut Cursor, line: usize) -> Result<GplExpr, GdlError> {
        let mut parts = vec![self.gpl_unary(cur, line)?];
        while cur.eat('&') {
            parts.push(self.gpl_unary(cur, line)?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { GplExpr::And(parts) })
    }

    fn gpl_unary(&self, cur: &mut Cursor, line: usize) -> Result<GplExpr, GdlError> {
        if cur.eat('~') {
            return Ok(GplExpr::Not(Box::new(self.gpl_unary(cur, line)?)));
        }
        if cur.eat('(') {
            let inner = self.gpl_or(cur, line)?;
            cur.expect(')')?;
            return Ok(inner);
        }
        let term = cur.term()?;
        match self.conclusion(&term)? {
            Conclusion::Rel(a) => Ok(GplExpr::Rel(a)),
            Conclusion::Eq(e) => Ok(GplExpr::Alg(e)),
        }
    }

    /// A relation atom or `Equal(a,b)`.
    fn conclusion(&self, term: &Term) -> Result<Conclusion, GdlError> {
        let TermKind::Call(name, args) = &term.kind else {
            return Err(ParseError::new(term.line, term.col, "expected Predicate(vars) or Equal(a,b)").into());
        };
        if name == "Equal" {
            if args.len() != 2 {
                return Err(ParseError::new(term.line, term.col, "Equal takes 2 arguments").into());
            }
            let attr = |n: &str| self.attr_arity(n);
            let l = term_to_expr_with(&attr, &args[0])?;
            let r = term_to_expr_with(&attr, &args[1])?;
            let e = Expr::sub(l, r);
            self.check_expr(&e, term.line)?;
            return Ok(Conclusion::Eq(e));
        }
        let mut vars = Vec::new();
        let mut groups = Vec::new();
        for a in args {
            match &a.kind {
                TermKind::Points(p) => {
                    groups.push(p.len());
                    vars.extend(p.iter().copied());
                }
                _ => return Err(ParseError::new(a.line, a.col, "expected point variables").into()),
            }
        }
        let atom = RelAtom { predicate: name.clone(), vars, groups };
        self.check_atom(&atom, term.line)?;
        Ok(Conclusion::Rel(atom))
    }

    fn conclusions(&self, e: &Entry) -> Result<Vec<Conclusion>, GdlError> {
        let mut cur = Cursor::new(&e.value, e.line, e.col);
        let mut out = vec![self.conclusion(&cur.term()?)?];
        while cur.eat('&') {
            out.push(self.conclusion(&cur.term()?)?);
        }
        cur.expect_end()?;
        Ok(out)
    }

    fn layout(&self, e: &Entry, n: usize) -> Result<Vec<Point>, GdlError> {
        let mut flat = Vec::new();
        for (i, part) in e.value.split(',').enumerate() {
            let part = part.trim();
            let pts = crate::point::points(part)
                .filter(|p| !p.is_empty())
                .ok_or_else(|| ParseError::new(e.line, e.col, format!("malformed point sequence {part:?} in group {}", i + 1)))?;
            flat.extend(pts);
        }
        if flat.len() != n {
            return Err(invalid(e.line, format!("{} layout has {} points, expected {}", e.key, flat.len(), n)));
        }
        Ok(flat)
    }

    fn predicate(&self, b: &Block) -> Result<PredicateDef, GdlError> {
        let kind = match b.header {
            Header::Entity => PredicateKind::Entity,
            Header::Relation => PredicateKind::Relation,
            _ => PredicateKind::Attribution,
        };
        let vars: Vec<Var> = b.pattern.iter().flatten().copied().collect();
        let mut def = PredicateDef {
            name: b.name.clone(),
            kind,
            var_pattern: b.pattern.clone(),
            variadic: None,
            ee_check: vec![],
            fv_check: vec![],
            multi: vec![],
            extend: vec![],
            sym: None,
        };
        let covered = |line: usize, used: &[Var], what: &str| -> Result<(), GdlError> {
            match used.iter().find(|v| !vars.contains(v)) {
                Some(v) => Err(invalid(line, format!("{}: {what} uses variable {v} outside the pattern", b.name))),
                None => Ok(()),
            }
        };
        for e in &b.entries {
            match e.key.as_str() {
                "ee_check" => {
                    for c in self.conclusions(e)? {
                        match c {
                            Conclusion::Rel(a) => {
                                covered(e.line, &a.vars, "ee_check")?;
                                def.ee_check.push(a);
                            }
                            Conclusion::Eq(_) => return Err(invalid(e.line, "ee_check takes relation atoms")),
                        }
                    }
                }
                "fv_check" => def.fv_check.push(self.layout(e, vars.len())?),
                "multi" => {
                    let l = self.layout(e, vars.len())?;
                    covered(e.line, &l, "multi")?;
                    if l.iter().collect::<BTreeSet<_>>().len() != l.len() {
                        return Err(invalid(e.line, format!("{}: multi must permute the pattern", b.name)));
                    }
                    def.multi.push(l);
                }
                "extend" => {
                    for c in self.conclusions(e)? {
                        covered(e.line, &c.vars(), "extend")?;
                        if let Conclusion::Rel(a) = &c {
                            let (k, _) = self.arity[&a.predicate];
                            if k.is_construction() {
                                return Err(invalid(
                                    e.line,
                                    format!("{}: extends may not produce construction facts ({})", b.name, a.predicate),
                                ));
                            }
                        }
                        def.extend.push(c);
                    }
                }
                "sym" => {
                    let s = e.value.trim();
                    if s.is_empty() || !s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()) {
                        return Err(invalid(e.line, "sym must be a lowercase identifier"));
                    }
                    def.sym = Some(s.to_string());
                }
                other => return Err(invalid(e.line, format!("unknown key {other:?} in {}", b.name))),
            }
        }
        match (kind, &def.sym) {
            (PredicateKind::Attribution, None) => return Err(invalid(b.line, format!("{}: attribution needs sym", b.name))),
            (PredicateKind::Attribution, Some(_)) => {}
            (_, Some(_)) => return Err(invalid(b.line, format!("{}: only attributions take sym", b.name))),
            _ => {}
        }
        Ok(def)
    }

    fn theorem(&self, b: &Block) -> Result<TheoremDef, GdlError> {
        let mut premise: Option<GplExpr> = None;
        let mut conclusions = Vec::new();
        for e in &b.entries {
            match e.key.as_str() {
                "premise" => {
                    if premise.is_some() {
                        return Err(invalid(e.line, format!("{}: more than one premise", b.name)));
                    }
                    premise = Some(self.gpl(e)?);
                }
                "conclusion" => conclusions.extend(self.conclusions(e)?),
                other => return Err(invalid(e.line, format!("unknown key {other:?} in theorem {}", b.name))),
            }
        }
        let premise = premise.ok_or_else(|| invalid(b.line, format!("{}: missing premise", b.name)))?;
        if conclusions.is_empty() {
            return Err(invalid(b.line, format!("{}: missing conclusion", b.name)));
        }
        let dnf = gpl::to_dnf(&premise).map_err(|err| invalid(b.line, format!("{}: {err}", b.name)))?;
        let header_vars: BTreeSet<Var> = b.pattern.iter().flatten().copied().collect();
        let mut branches = Vec::new();
        for atoms in dnf {
            let bound = gpl::positive_vars(&atoms);
            if bound != header_vars {
                return Err(invalid(b.line, format!("{}: premise binds {:?}, header declares {:?}", b.name, bound, header_vars)));
            }
            for a in &atoms {
                if matches!(a, Atom::Not(_) | Atom::Alg(_)) && !a.vars().iter().all(|v| bound.contains(v)) {
                    return Err(invalid(b.line, format!("{}: {a} uses unbound variables", b.name)));
                }
            }
            for c in &conclusions {
                if !c.vars().iter().all(|v| bound.contains(v)) {
                    return Err(invalid(b.line, format!("{}: conclusion {c} uses unbound variables", b.name)));
                }
            }
            branches.push(TheoremBranch { atoms: gpl::reorder_branch(&atoms, None), conclusions: conclusions.clone() });
        }
        Ok(TheoremDef { name: b.name.clone(), var_pattern: b.pattern.clone(), premise, conclusions, branches })
    }
}

fn check_syms(preds: &[PredicateDef], blocks: &[Block]) -> Result<(), GdlError> {
    let mut seen = HashSet::new();
    for p in preds {
        if let Some(s) = &p.sym {
            if !seen.insert(s.clone()) {
                let line = blocks.iter().find(|b| b.name == p.name).map_or(0, |b| b.line);
                return Err(invalid(line, format!("sym {s} used twice")));
            }
        }
    }
    Ok(())
}

fn check_extend_cycles(preds: &[PredicateDef]) -> Result<(), GdlError> {
    let edges: HashMap<&str, Vec<&str>> = preds
        .iter()
        .map(|p| {
            let targets = p
                .extend
                .iter()
                .filter_map(|c| match c {
                    Conclusion::Rel(a) => Some(a.predicate.as_str()),
                    Conclusion::Eq(_) => None,
                })
                .collect();
            (p.name.as_str(), targets)
        })
        .collect();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: HashMap<&str, u8> = HashMap::new();
    fn visit<'a>(n: &'a str, edges: &HashMap<&'a str, Vec<&'a str>>, state: &mut HashMap<&'a str, u8>) -> Result<(), GdlError> {
        match state.get(n) {
            Some(1) => return Err(GdlError::ExtendCycle(n.to_string())),
            Some(2) => return Ok(()),
            _ => {}
        }
        state.insert(n, 1);
        for &m in edges.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            visit(m, edges, state)?;
        }
        state.insert(n, 2);
        Ok(())
    }
    for p in preds {
        visit(&p.name, &edges, &mut state)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::points;

    const MIDPOINT: &str = "
Relation IsMidpointOfLine(M,AB)
    ee_check: Point(M)&Line(AB)&Collinear(AMB)
    fv_check: M,AB
    multi: M,BA
    extend: Equal(LengthOfLine(AM),LengthOfLine(MB))

Attribution LengthOfLine(AB)
    ee_check: Line(AB)
    multi: BA
    sym: ll

Theorem midpoint_of_line_judgment(M,AB)
    premise: Collinear(AMB)&Equal(LengthOfLine(AM),LengthOfLine(MB))
    conclusion: IsMidpointOfLine(M,AB)
";

    #[test]
    fn empty_input() {
        let (p, t) = parse_gdl("").unwrap();
        assert!(p.is_empty() && t.is_empty());
    }

    #[test]
    fn midpoint_definition() {
        let (preds, theorems) = parse_gdl(MIDPOINT).unwrap();
        let m = &preds[0];
        assert_eq!(m.name, "IsMidpointOfLine");
        let ee: Vec<String> = m.ee_check.iter().map(|a| a.to_string()).collect();
        assert_eq!(ee, ["Point(M)", "Line(AB)", "Collinear(AMB)"]);
        assert_eq!(m.multi, vec![points("MBA").unwrap()]);
        assert_eq!(m.extend.len(), 1);
        assert_eq!(m.extend[0].to_string(), "Equal(LengthOfLine(AM),LengthOfLine(MB))");
        let t = &theorems[0];
        match &t.premise {
            GplExpr::And(cs) => {
                assert_eq!(cs.len(), 2);
                assert_eq!(cs[0].to_string(), "Collinear(AMB)");
                assert!(matches!(cs[1], GplExpr::Alg(_)));
            }
            other => panic!("unexpected premise {other}"),
        }
        assert_eq!(t.conclusions[0].to_string(), "IsMidpointOfLine(M,AB)");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_gdl("Theorem t(AB)\n    premise: Line(AB)&\n    conclusion: Line(AB)").unwrap_err();
        match err {
            GdlError::Syntax(e) => assert_eq!(e.line, 2),
            other => panic!("{other}"),
        }
        let err = parse_gdl("Theorem t(AB)\n    premise: Foo(AB)\n    conclusion: Line(AB)").unwrap_err();
        assert!(matches!(err, GdlError::UnknownPredicate { line: 2, .. }));
        let err = parse_gdl("Relation Line(AB)\n").unwrap_err();
        assert!(matches!(err, GdlError::Duplicate { .. }));
    }

    #[test]
    fn extend_cycles_rejected() {
        let src = "Relation P(AB)\n extend: Q(AB)\nRelation Q(AB)\n extend: P(BA)\n";
        assert!(matches!(parse_gdl(src), Err(GdlError::ExtendCycle(_))));
    }

    #[test]
    fn construction_extends_rejected() {
        let src = "Relation P(AB)\n extend: Line(AB)\n";
        assert!(matches!(parse_gdl(src), Err(GdlError::Invalid { .. })));
    }

    #[test]
    fn reparse_is_identical() {
        let a = parse_gdl(MIDPOINT).unwrap();
        let b = parse_gdl(MIDPOINT).unwrap();
        assert_eq!(format!("{:?}", a), format!("{:?}", b));
    }
}
