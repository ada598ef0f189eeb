//! Expression trees over numbers, free symbols and attribute terms.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigRational, Signed, Zero};

use crate::point::{grouped_string, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Mod,
    Sqrt,
    Sin,
    Cos,
    Tan,
}

impl Op {
    pub const ALL: [Op; 10] = [
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Div,
        Op::Pow,
        Op::Mod,
        Op::Sqrt,
        Op::Sin,
        Op::Cos,
        Op::Tan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "Add",
            Op::Sub => "Sub",
            Op::Mul => "Mul",
            Op::Div => "Div",
            Op::Pow => "Pow",
            Op::Mod => "Mod",
            Op::Sqrt => "Sqrt",
            Op::Sin => "Sin",
            Op::Cos => "Cos",
            Op::Tan => "Tan",
        }
    }

    pub fn from_name(name: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.name() == name)
    }

    /// Accepted argument counts as `(min, max)`.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Op::Add | Op::Mul => (2, usize::MAX),
            Op::Sub | Op::Div | Op::Pow | Op::Mod => (2, 2),
            Op::Sqrt | Op::Sin | Op::Cos | Op::Tan => (1, 1),
        }
    }
}

/// An attribute of an entity, e.g. `LengthOfLine(AB)`.
///
/// `groups` records how the points were split by commas when written so the
/// term renders back the same way.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrTerm {
    pub name: String,
    pub points: Vec<Point>,
    pub groups: Vec<usize>,
}

impl AttrTerm {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> AttrTerm {
        let groups = vec![points.len()];
        AttrTerm { name: name.into(), points, groups }
    }
}

impl fmt::Display for AttrTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, grouped_string(&self.points, &self.groups))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(BigRational),
    /// Lowercase user symbol.
    Free(String),
    Attr(AttrTerm),
    /// Resolved attribute symbol such as `ll_AB`.
    Sym(String),
    Op(Op, Vec<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(n.into()))
    }

    pub fn attr(name: &str, pts: &str) -> Expr {
        Expr::Attr(AttrTerm::new(name, crate::point::points(pts).expect("uppercase points")))
    }

    pub fn op(op: Op, args: Vec<Expr>) -> Expr {
        Expr::Op(op, args)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Op(Op::Sub, vec![a, b])
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(n) if n.is_zero())
    }

    /// Every attribute term, left to right.
    pub fn attrs(&self) -> Vec<&AttrTerm> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Attr(a) = e {
                out.push(a);
            }
        });
        out
    }

    /// Points mentioned by attribute terms, in first-occurrence order.
    pub fn points(&self) -> Vec<Point> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for a in self.attrs() {
            for &p in &a.points {
                if seen.insert(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Free(s) = e {
                out.insert(s.clone());
            }
        });
        out
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        if let Expr::Op(_, args) = self {
            for a in args {
                a.walk(f);
            }
        }
    }

    /// Rebuilds the tree replacing attribute terms.
    pub fn try_map_attrs<E>(&self, f: &mut dyn FnMut(&AttrTerm) -> Result<Expr, E>) -> Result<Expr, E> {
        Ok(match self {
            Expr::Attr(a) => f(a)?,
            Expr::Op(op, args) => Expr::Op(
                *op,
                args.iter().map(|a| a.try_map_attrs(f)).collect::<Result<_, _>>()?,
            ),
            other => other.clone(),
        })
    }

    /// Renames point variables inside attribute terms.
    pub fn rename_points(&self, map: &dyn Fn(Point) -> Point) -> Expr {
        self.try_map_attrs::<()>(&mut |a| {
            Ok(Expr::Attr(AttrTerm {
                name: a.name.clone(),
                points: a.points.iter().map(|&p| map(p)).collect(),
                groups: a.groups.clone(),
            }))
        })
        .expect("infallible")
    }
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        let sign = if r.is_negative() { "-" } else { "" };
        format!("{}{}/{}", sign, r.numer().abs(), r.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => f.write_str(&fmt_rational(r)),
            Expr::Free(s) | Expr::Sym(s) => f.write_str(s),
            Expr::Attr(a) => write!(f, "{a}"),
            Expr::Op(op, args) => {
                write!(f, "{}(", op.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_nested() {
        let e = Expr::op(Op::Add, vec![Expr::attr("LengthOfLine", "AB"), Expr::Free("x".into()), Expr::int(-3)]);
        assert_eq!(e.to_string(), "Add(LengthOfLine(AB),x,-3)");
    }

    #[test]
    fn fractions_render_with_sign_outside() {
        let r = BigRational::new((-1).into(), 2.into());
        assert_eq!(fmt_rational(&r), "-1/2");
    }

    #[test]
    fn collects_points_in_order() {
        let e = Expr::sub(Expr::attr("LengthOfLine", "AM"), Expr::attr("LengthOfLine", "MB"));
        assert_eq!(crate::point::seq_string(&e.points()), "AMB");
    }
}
