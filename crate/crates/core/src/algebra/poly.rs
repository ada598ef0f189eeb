//! Sparse polynomials whose atoms are symbols or opaque function applications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigRational, Signed, ToPrimitive};

use super::value::{cos_deg, sin_deg, tan_deg, Value};
use super::AlgebraError;
use crate::expr::{Expr, Op};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Tan,
    Inv,
    /// Non-integer power.
    Pow(BigRational),
    Mod,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Sym(String),
    Apply(Func, Vec<Poly>),
}

/// Product of atom powers, sorted by atom. Empty means the constant term.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial(pub Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn is_const(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// The symbol, when the monomial is a bare symbol to the first power.
    pub fn as_linear_sym(&self) -> Option<&str> {
        match self.0.as_slice() {
            [(Atom::Sym(s), 1)] => Some(s),
            _ => None,
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Atom, u32> = BTreeMap::new();
        for (a, e) in self.0.iter().chain(other.0.iter()) {
            *map.entry(a.clone()).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }

    fn syms_into(&self, out: &mut BTreeSet<String>) {
        for (a, _) in &self.0 {
            match a {
                Atom::Sym(s) => {
                    out.insert(s.clone());
                }
                Atom::Apply(_, args) => {
                    for p in args {
                        p.syms_into(out);
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Value>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(v: Value) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), v);
        p
    }

    pub fn sym(name: &str) -> Poly {
        Poly::atom(Atom::Sym(name.to_string()))
    }

    pub fn atom(a: Atom) -> Poly {
        let mut p = Poly::zero();
        p.terms.insert(Monomial(vec![(a, 1)]), Value::one());
        p
    }

    fn add_term(&mut self, m: Monomial, v: Value) {
        let next = match self.terms.get(&m) {
            Some(old) => old.add(&v),
            None => v,
        };
        if next.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, next);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coef(&self, m: &Monomial) -> Option<&Value> {
        self.terms.get(m)
    }

    pub fn constant_term(&self) -> Value {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Value::zero)
    }

    /// The value, when no non-constant term remains.
    pub fn as_constant(&self) -> Option<Value> {
        if self.terms.keys().all(Monomial::is_const) {
            Some(self.constant_term())
        } else {
            None
        }
    }

    /// Non-constant monomials.
    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys().filter(|m| !m.is_const())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.add_term(m.clone(), v.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v.neg())).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Value) -> Poly {
        let mut out = Poly::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.mul(k));
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, v1) in &self.terms {
            for (m2, v2) in &other.terms {
                let m = m1.mul(m2);
                let v = v1.mul(v2);
                out = out.add(&reduce_sqrt_squares(m, v));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(Value::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn syms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.syms_into(&mut out);
        out
    }

    fn syms_into(&self, out: &mut BTreeSet<String>) {
        for m in self.terms.keys() {
            m.syms_into(out);
        }
    }

    /// Replaces known symbols and folds applications whose arguments become
    /// constant.
    pub fn substitute(&self, known: &dyn Fn(&str) -> Option<Value>) -> Result<Poly, AlgebraError> {
        let mut out = Poly::zero();
        for (m, v) in &self.terms {
            let mut term = Poly::constant(v.clone());
            for (a, e) in &m.0 {
                let base = match a {
                    Atom::Sym(s) => match known(s) {
                        Some(x) => Poly::constant(x),
                        None => Poly::atom(a.clone()),
                    },
                    Atom::Apply(f, args) => {
                        let args: Vec<Poly> = args.iter().map(|p| p.substitute(known)).collect::<Result<_, _>>()?;
                        apply(f.clone(), args)?
                    }
                };
                term = term.mul(&base.pow(*e));
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Scales so the leading coefficient is one; a stable identity for
    /// equations `p = 0`.
    pub fn normalized(&self) -> Poly {
        match self.terms.iter().find(|(m, _)| !m.is_const()).or_else(|| self.terms.iter().next()) {
            Some((_, lead)) => match lead.recip() {
                Some(r) => self.scale(&r),
                None => self.clone(),
            },
            None => self.clone(),
        }
    }

    pub fn from_expr(e: &Expr) -> Result<Poly, AlgebraError> {
        Ok(match e {
            Expr::Num(r) => Poly::constant(Value::rational(r.clone())),
            Expr::Free(s) | Expr::Sym(s) => Poly::sym(s),
            Expr::Attr(a) => return Err(AlgebraError::Unresolved(a.to_string())),
            Expr::Op(op, args) => {
                let ps: Vec<Poly> = args.iter().map(Poly::from_expr).collect::<Result<_, _>>()?;
                match op {
                    Op::Add => ps.iter().fold(Poly::zero(), |acc, p| acc.add(p)),
                    Op::Mul => ps.iter().fold(Poly::constant(Value::one()), |acc, p| acc.mul(p)),
                    Op::Sub => ps[0].sub(&ps[1]),
                    Op::Div => ps[0].mul(&apply(Func::Inv, vec![ps[1].clone()])?),
                    Op::Pow => {
                        let Some(exp) = ps[1].as_constant() else {
                            return Err(AlgebraError::Unsupported(format!("non-constant exponent in {e}")));
                        };
                        let Some(q) = exp.as_rational().cloned() else {
                            return Err(AlgebraError::Unsupported(format!("irrational exponent in {e}")));
                        };
                        power(&ps[0], &q)?
                    }
                    Op::Mod => apply(Func::Mod, ps)?,
                    Op::Sqrt => apply(Func::Sqrt, ps)?,
                    Op::Sin => apply(Func::Sin, ps)?,
                    Op::Cos => apply(Func::Cos, ps)?,
                    Op::Tan => apply(Func::Tan, ps)?,
                }
            }
        })
    }
}

fn power(base: &Poly, q: &BigRational) -> Result<Poly, AlgebraError> {
    if let Some(b) = base.as_constant() {
        return b
            .pow_rational(q)
            .map(Poly::constant)
            .ok_or_else(|| AlgebraError::Undefined(format!("{b}^{}", crate::expr::fmt_rational(q))));
    }
    if q.is_integer() {
        let n = q.to_integer().to_i64().filter(|n| n.abs() <= 8).ok_or_else(|| {
            AlgebraError::Unsupported(format!("exponent {} too large", crate::expr::fmt_rational(q)))
        })?;
        return Ok(if n >= 0 {
            base.pow(n as u32)
        } else {
            apply(Func::Inv, vec![base.clone()])?.pow((-n) as u32)
        });
    }
    if *q == BigRational::new(1.into(), 2.into()) {
        return apply(Func::Sqrt, vec![base.clone()]);
    }
    apply(Func::Pow(q.clone()), vec![base.clone()])
}

/// `sqrt(p)^2 = p` inside a product term.
fn reduce_sqrt_squares(m: Monomial, v: Value) -> Poly {
    let squares = m.0.iter().any(|(a, e)| *e >= 2 && matches!(a, Atom::Apply(Func::Sqrt, _)));
    if !squares {
        let mut p = Poly::zero();
        p.add_term(m, v);
        return p;
    }
    let mut factor = Poly::constant(v);
    let mut rest = Vec::new();
    for (a, e) in m.0 {
        if let (Atom::Apply(Func::Sqrt, args), true) = (&a, e >= 2) {
            factor = factor.mul(&args[0].pow(e / 2));
            if e % 2 == 1 {
                rest.push((a, 1));
            }
        } else {
            rest.push((a, e));
        }
    }
    let mut tail = Poly::zero();
    tail.terms.insert(Monomial(rest), Value::one());
    factor.mul(&tail)
}

/// Applies a function, evaluating when all arguments are constant.
pub fn apply(f: Func, args: Vec<Poly>) -> Result<Poly, AlgebraError> {
    let consts: Option<Vec<Value>> = args.iter().map(Poly::as_constant).collect();
    if let Some(vals) = consts {
        return eval_func(&f, &vals).map(Poly::constant);
    }
    Ok(Poly::atom(Atom::Apply(f, args)))
}

pub fn eval_func(f: &Func, args: &[Value]) -> Result<Value, AlgebraError> {
    let x = &args[0];
    match f {
        Func::Sqrt => x.sqrt().ok_or_else(|| AlgebraError::Undefined(format!("Sqrt({x})"))),
        Func::Sin => Ok(sin_deg(x)),
        Func::Cos => Ok(cos_deg(x)),
        Func::Tan => tan_deg(x).ok_or_else(|| AlgebraError::Undefined(format!("Tan({x})"))),
        Func::Inv => x.recip().ok_or(AlgebraError::DivisionByZero),
        Func::Pow(q) => x.pow_rational(q).ok_or_else(|| AlgebraError::Undefined(format!("{x}^{}", crate::expr::fmt_rational(q)))),
        Func::Mod => x.modulo(&args[1]).ok_or(AlgebraError::DivisionByZero),
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Sym(s) => f.write_str(s),
            Atom::Apply(func, args) => {
                let name = match func {
                    Func::Sqrt => "sqrt".to_string(),
                    Func::Sin => "sin".to_string(),
                    Func::Cos => "cos".to_string(),
                    Func::Tan => "tan".to_string(),
                    Func::Inv => "inv".to_string(),
                    Func::Pow(q) => format!("pow[{}]", crate::expr::fmt_rational(q)),
                    Func::Mod => "mod".to_string(),
                };
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_const() {
                write!(f, "{v}")?;
                continue;
            }
            if !v.is_one() {
                write!(f, "{v}*")?;
            }
            for (j, (a, e)) in m.0.iter().enumerate() {
                if j > 0 {
                    f.write_str("*")?;
                }
                write!(f, "{a}")?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl Value {
    pub fn is_negative(&self) -> bool {
        match self {
            Value::Exact { coef, .. } => coef.is_negative(),
            Value::Approx(_) => self.signum() < 0,
        }
    }
}
