//! Numbers of the form `c * sqrt(r)` with rational `c`, or floating point.

use std::cmp::Ordering;
use std::fmt;

use num::bigint::Sign;
use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

pub const TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum Value {
    /// `coef * sqrt(radicand)`; `radicand` is square-free and at least 1.
    Exact { coef: BigRational, radicand: u64 },
    Approx(f64),
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn int_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Splits `n` into `(s, f)` with `n = s^2 * f`, `f` square-free.
/// Gives up on factors beyond trial-division reach.
fn split_square(n: &BigInt) -> Option<(BigInt, u64)> {
    let mut rest = n.clone();
    let mut outside = BigInt::one();
    let mut inside: u64 = 1;
    let mut p: u64 = 2;
    while p <= 1000 {
        let bp = BigInt::from(p);
        let mut e = 0;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        for _ in 0..e / 2 {
            outside *= &bp;
        }
        if e % 2 == 1 {
            inside = inside.checked_mul(p)?;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest.is_one() {
        return Some((outside, inside));
    }
    let r = rest.to_u64()?;
    let s = int_sqrt(r);
    if s * s == r {
        return Some((outside * BigInt::from(s), inside));
    }
    // No prime factor <= 1000 and below 10^6 means prime.
    if r < 1_000_000 {
        return Some((outside, inside.checked_mul(r)?));
    }
    None
}

impl Value {
    pub fn rational(r: BigRational) -> Value {
        Value::Exact { coef: r, radicand: 1 }
    }

    pub fn int(n: i64) -> Value {
        Value::rational(rat(n))
    }

    pub fn zero() -> Value {
        Value::int(0)
    }

    pub fn one() -> Value {
        Value::int(1)
    }

    /// `sqrt(n)` for a non-negative integer, kept exact.
    pub fn sqrt_int(n: u64) -> Value {
        Value::int(n as i64).sqrt().expect("non-negative")
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Exact { coef, radicand: 1 } => Some(coef),
            Value::Exact { coef, .. } if coef.is_zero() => Some(coef),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact { .. })
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact { coef, radicand } => coef.to_f64().unwrap_or(f64::NAN) * (*radicand as f64).sqrt(),
            Value::Approx(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact { coef, .. } => coef.is_zero(),
            Value::Approx(x) => x.abs() < TOLERANCE,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Value::Exact { coef, radicand } => *radicand == 1 && coef.is_one(),
            Value::Approx(x) => (x - 1.0).abs() < TOLERANCE,
        }
    }

    /// -1, 0 or 1, treating values within tolerance of zero as zero.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        match self {
            Value::Exact { coef, .. } => {
                if coef.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Value::Approx(x) => {
                if *x > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    fn normalize(self) -> Value {
        match self {
            Value::Exact { coef, .. } if coef.is_zero() => Value::zero(),
            Value::Approx(x) if !x.is_finite() => Value::Approx(x),
            v => v,
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (a, b) if a.is_exact_zero() => b.clone(),
            (a, b) if b.is_exact_zero() => a.clone(),
            (Value::Exact { coef: a, radicand: r }, Value::Exact { coef: b, radicand: s }) if r == s => {
                Value::Exact { coef: a + b, radicand: *r }.normalize()
            }
            (a, b) => Value::Approx(a.to_f64() + b.to_f64()),
        }
    }

    fn is_exact_zero(&self) -> bool {
        matches!(self, Value::Exact { coef, .. } if coef.is_zero())
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Exact { coef, radicand } => Value::Exact { coef: -coef, radicand: *radicand },
            Value::Approx(x) => Value::Approx(-x),
        }
    }

    pub fn sub(&self, other: &Value) -> Value {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Value) -> Value {
        match (self, other) {
            (a, _) | (_, a) if a.is_exact_zero() => Value::zero(),
            (Value::Exact { coef: a, radicand: r }, Value::Exact { coef: b, radicand: s }) => {
                let g = r.gcd(s);
                let inner = (r / g) as u128 * (s / g) as u128;
                match u64::try_from(inner) {
                    Ok(inner) => Value::Exact { coef: a * b * rat(g as i64), radicand: inner },
                    Err(_) => Value::Approx(self.to_f64() * other.to_f64()),
                }
            }
            (a, b) => Value::Approx(a.to_f64() * b.to_f64()),
        }
    }

    pub fn recip(&self) -> Option<Value> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Value::Exact { coef, radicand } => {
                Value::Exact { coef: (coef * rat(*radicand as i64)).recip(), radicand: *radicand }
            }
            Value::Approx(x) => Value::Approx(1.0 / x),
        })
    }

    pub fn div(&self, other: &Value) -> Option<Value> {
        Some(self.mul(&other.recip()?))
    }

    /// Principal square root; `None` for negative values.
    pub fn sqrt(&self) -> Option<Value> {
        match self.signum() {
            -1 => return None,
            0 => return Some(Value::zero()),
            _ => {}
        }
        match self {
            Value::Exact { coef, radicand: 1 } => {
                let (p, q) = (coef.numer(), coef.denom());
                let pq = p * q;
                match split_square(&pq) {
                    Some((s, f)) => Some(Value::Exact { coef: BigRational::new(s, q.clone()), radicand: f }),
                    None => Some(Value::Approx(self.to_f64().sqrt())),
                }
            }
            v => Some(Value::Approx(v.to_f64().sqrt())),
        }
    }

    pub fn pow_int(&self, n: i64) -> Option<Value> {
        if n < 0 {
            return self.recip()?.pow_int(-n);
        }
        let mut out = Value::one();
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Some(out)
    }

    /// `self ^ e` for a rational exponent, exact when the denominator is 1
    /// or 2.
    pub fn pow_rational(&self, e: &BigRational) -> Option<Value> {
        let num = e.numer().to_i64()?;
        if e.denom().is_one() {
            return self.pow_int(num);
        }
        if *e.denom() == BigInt::from(2) {
            return self.sqrt()?.pow_int(num);
        }
        if self.signum() < 0 {
            return None;
        }
        let x = self.to_f64().powf(e.to_f64()?);
        x.is_finite().then_some(Value::Approx(x))
    }

    /// Euclidean remainder.
    pub fn modulo(&self, m: &Value) -> Option<Value> {
        if m.is_zero() {
            return None;
        }
        match (self.as_rational(), m.as_rational()) {
            (Some(a), Some(b)) => {
                let q = (a / b).floor();
                let mut r = a - b * q;
                if r.is_negative() {
                    r += b.abs();
                }
                Some(Value::rational(r))
            }
            _ => Some(Value::Approx(self.to_f64().rem_euclid(m.to_f64()))),
        }
    }

    pub fn approx_eq(&self, other: &Value) -> bool {
        self.sub(other).is_zero()
    }

    fn cmp_key(&self) -> (u8, u64, BigRational, u64) {
        match self {
            Value::Exact { coef, radicand } => (0, *radicand, coef.clone(), 0),
            Value::Approx(x) => (1, 0, BigRational::zero(), x.to_bits()),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural order, used for canonical keys only.
impl Ord for Value {
    fn cmp(&self, other: &Value) -> Ordering {
        self.cmp_key().cmp(&other.cmp_key())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact { coef, radicand: 1 } => f.write_str(&crate::expr::fmt_rational(coef)),
            Value::Exact { coef, radicand } if coef.is_one() => write!(f, "Sqrt({radicand})"),
            Value::Exact { coef, radicand } => {
                write!(f, "Mul({},Sqrt({radicand}))", crate::expr::fmt_rational(coef))
            }
            Value::Approx(x) => {
                let s = format!("{x:.12}");
                let s = s.trim_end_matches('0').trim_end_matches('.');
                f.write_str(if s == "-0" { "0" } else { s })
            }
        }
    }
}

/// Exact sine and cosine at table angles (degrees).
pub fn table_sin_cos(deg: &BigRational) -> Option<(Value, Value)> {
    if !deg.is_integer() {
        return None;
    }
    let d = deg.to_integer().mod_floor(&BigInt::from(360)).to_i64()?;
    let half = || Value::rational(BigRational::new(1.into(), 2.into()));
    let r2 = || Value::Exact { coef: BigRational::new(1.into(), 2.into()), radicand: 2 };
    let r3 = || Value::Exact { coef: BigRational::new(1.into(), 2.into()), radicand: 3 };
    let base = |a: i64| -> Option<(Value, Value)> {
        Some(match a {
            0 => (Value::zero(), Value::one()),
            30 => (half(), r3()),
            45 => (r2(), r2()),
            60 => (r3(), half()),
            90 => (Value::one(), Value::zero()),
            _ => return None,
        })
    };
    let (q, a) = (d / 90, d % 90);
    let (s, c) = if a == 0 { base(0)? } else { base(a)? };
    // rotate by q quadrants: (s,c) -> (c,-s)
    let (mut s, mut c) = (s, c);
    for _ in 0..q {
        let ns = c.clone();
        let nc = s.neg();
        s = ns;
        c = nc;
    }
    Some((s, c))
}

pub fn sin_deg(v: &Value) -> Value {
    if let Some(r) = v.as_rational() {
        if let Some((s, _)) = table_sin_cos(r) {
            return s;
        }
    }
    Value::Approx(v.to_f64().to_radians().sin())
}

pub fn cos_deg(v: &Value) -> Value {
    if let Some(r) = v.as_rational() {
        if let Some((_, c)) = table_sin_cos(r) {
            return c;
        }
    }
    Value::Approx(v.to_f64().to_radians().cos())
}

pub fn tan_deg(v: &Value) -> Option<Value> {
    let c = cos_deg(v);
    if c.is_zero() {
        return None;
    }
    sin_deg(v).div(&c)
}

pub const TABLE_ANGLES: [i64; 9] = [0, 30, 45, 60, 90, 120, 135, 150, 180];

/// Table angles in `[0,180]` at which `f` takes the value `v`.
pub fn invert_table(f: fn(&Value) -> Option<Value>, v: &Value) -> Vec<i64> {
    TABLE_ANGLES
        .into_iter()
        .filter(|&a| f(&Value::int(a)).is_some_and(|x| x.approx_eq(v)))
        .collect()
}

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Value {
        Value::rational(r)
    }
}

impl Value {
    /// Total order by magnitude, for sorting roots.
    pub fn cmp_numeric(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Exact { coef: a, radicand: 1 }, Value::Exact { coef: b, radicand: 1 }) => a.cmp(b),
            _ => match self.sub(other).signum() {
                -1 => Ordering::Less,
                0 => Ordering::Equal,
                _ => Ordering::Greater,
            },
        }
    }

    pub fn sign_of_bigint(n: &BigInt) -> i32 {
        match n.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sqrt_simplifies() {
        let v = Value::int(8).sqrt().unwrap();
        assert_eq!(v, Value::Exact { coef: rat(2), radicand: 2 });
        let v = Value::rational(q(3, 4)).sqrt().unwrap();
        assert_eq!(v, Value::Exact { coef: q(1, 2), radicand: 3 });
        assert_eq!(Value::int(9).sqrt().unwrap(), Value::int(3));
        assert!(Value::int(-1).sqrt().is_none());
    }

    #[test]
    fn surd_products() {
        let r2 = Value::sqrt_int(2);
        assert_eq!(r2.mul(&r2), Value::int(2));
        let r6 = Value::sqrt_int(2).mul(&Value::sqrt_int(3));
        assert_eq!(r6, Value::sqrt_int(6));
        assert_eq!(Value::sqrt_int(2).recip().unwrap(), Value::Exact { coef: q(1, 2), radicand: 2 });
    }

    #[test]
    fn mixed_radicands_fall_back() {
        let v = Value::sqrt_int(2).add(&Value::sqrt_int(3));
        assert!(!v.is_exact());
        assert!((v.to_f64() - (2f64.sqrt() + 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn trig_table() {
        assert_eq!(sin_deg(&Value::int(30)), Value::rational(q(1, 2)));
        assert_eq!(cos_deg(&Value::int(120)), Value::rational(q(-1, 2)));
        assert_eq!(sin_deg(&Value::int(135)), Value::Exact { coef: q(1, 2), radicand: 2 });
        assert_eq!(cos_deg(&Value::int(180)), Value::int(-1));
        assert!(tan_deg(&Value::int(90)).is_none());
        assert_eq!(tan_deg(&Value::int(45)).unwrap(), Value::int(1));
        let s = sin_deg(&Value::int(20));
        assert!((s.to_f64() - 20f64.to_radians().sin()).abs() < 1e-12);
    }

    #[test]
    fn table_inversion() {
        let sin = |v: &Value| Some(sin_deg(v));
        let cos = |v: &Value| Some(cos_deg(v));
        assert_eq!(invert_table(sin, &Value::rational(q(1, 2))), vec![30, 150]);
        assert_eq!(invert_table(cos, &Value::rational(q(1, 2))), vec![60]);
    }

    #[test]
    fn modulo_rational() {
        assert_eq!(Value::int(-7).modulo(&Value::int(3)).unwrap(), Value::int(2));
        assert_eq!(Value::int(370).modulo(&Value::int(360)).unwrap(), Value::int(10));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Value::sqrt_int(2).to_string(), "Sqrt(2)");
        assert_eq!(Value::sqrt_int(8).to_string(), "Mul(2,Sqrt(2))");
        assert_eq!(Value::rational(q(-3, 4)).to_string(), "-3/4");
        assert_eq!(Value::Approx(0.5).to_string(), "0.5");
    }
}
