use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A named point. Names are single uppercase ASCII letters.
///
/// The same type doubles as a point *variable* inside definitions, where the
/// letter is a placeholder rather than a problem point.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub u8);

pub type Var = Point;

pub type PointSeq = Vec<Point>;

impl Point {
    pub fn new(c: char) -> Option<Point> {
        if c.is_ascii_uppercase() {
            Some(Point(c as u8))
        } else {
            None
        }
    }

    pub fn as_char(self) -> char {
        self.0 as char
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_char(self.as_char())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let c = char::deserialize(d)?;
        Point::new(c).ok_or_else(|| serde::de::Error::custom(format!("bad point name {c:?}")))
    }
}

/// Parses a run of uppercase letters such as `"ABC"`.
pub fn points(s: &str) -> Option<PointSeq> {
    s.chars().map(Point::new).collect()
}

/// Renders a point run without separators.
pub fn seq_string(seq: &[Point]) -> String {
    seq.iter().map(|p| p.as_char()).collect()
}

/// Renders a flat point list split into groups of the given lengths,
/// comma separated: `[M,A,B]` with `[1,2]` becomes `M,AB`.
pub fn grouped_string(seq: &[Point], groups: &[usize]) -> String {
    let mut out = String::new();
    let mut at = 0;
    for (i, &g) in groups.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let end = (at + g).min(seq.len());
        out.push_str(&seq_string(&seq[at..end]));
        at = end;
    }
    if at < seq.len() {
        if !groups.is_empty() {
            out.push(',');
        }
        out.push_str(&seq_string(&seq[at..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouped_rendering() {
        let s = points("MAB").unwrap();
        assert_eq!(grouped_string(&s, &[1, 2]), "M,AB");
        assert_eq!(grouped_string(&s, &[3]), "MAB");
        assert_eq!(grouped_string(&s, &[]), "MAB");
    }

    #[test]
    fn rejects_lowercase() {
        assert!(points("Ab").is_none());
        assert_eq!(points("").unwrap(), Vec::<Point>::new());
    }
}
